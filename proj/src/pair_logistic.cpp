#include "tergmix/pair_logistic.hpp"

#include <cmath>
#include <stdexcept>

#include "tergmix/common.hpp"

namespace tergmix {

PairTallies tallies_from_counts(const BlockTransitionCounts& counts, ModelKind kind) {
  PairTallies t;
  t.K = counts.K;
  t.blocks = param_count(kind);
  for (int b = 0; b < t.blocks; ++b) {
    t.succ[b] = Eigen::MatrixXd::Zero(t.K, t.K);
    t.trials[b] = Eigen::MatrixXd::Zero(t.K, t.K);
  }
  for (int k = 1; k <= t.K; ++k) {
    for (int l = k; l <= t.K; ++l) {
      const auto& c = counts.cells[static_cast<std::size_t>(counts.pair_index(k, l))];
      const int a = k - 1, b = l - 1;
      auto put = [&](int slab, double succ, double trials) {
        t.succ[slab](a, b) = t.succ[slab](b, a) = succ;
        t.trials[slab](a, b) = t.trials[slab](b, a) = trials;
      };
      if (kind == ModelKind::tergm_stability) {
        put(0, static_cast<double>(c.n00 + c.n11), static_cast<double>(c.total()));
      } else {
        put(0, static_cast<double>(c.n01), static_cast<double>(c.n00 + c.n01));
        put(1, static_cast<double>(c.n11), static_cast<double>(c.n10 + c.n11));
      }
    }
  }
  return t;
}

namespace {

// Accumulates O(k,l) = sum_{i<j} gamma_ik gamma_jl x_ij, then folds the two
// orderings into a symmetric matrix of unordered pair totals: off-diagonal
// entries O + O', the diagonal kept as is.
Eigen::MatrixXd weighted_pair_sums(const Eigen::MatrixXd& gamma,
                                   const std::vector<std::uint32_t>& x, int n) {
  const int K = static_cast<int>(gamma.cols());
  Eigen::MatrixXd ordered = Eigen::MatrixXd::Zero(K, K);
  std::size_t d = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++d) {
      const double xd = static_cast<double>(x[d]);
      if (xd == 0.0) continue;
      for (int k = 0; k < K; ++k) {
        const double gik = gamma(i, k) * xd;
        if (gik == 0.0) continue;
        for (int l = 0; l < K; ++l) ordered(k, l) += gik * gamma(j, l);
      }
    }
  }
  Eigen::MatrixXd folded = ordered + ordered.transpose();
  folded.diagonal() = ordered.diagonal();
  return folded;
}

// Same fold for x == 1: total dyad weights, computed in closed form.
Eigen::MatrixXd unit_pair_sums(const Eigen::MatrixXd& gamma) {
  const Eigen::VectorXd colsum = gamma.colwise().sum();
  Eigen::MatrixXd all = colsum * colsum.transpose() - gamma.transpose() * gamma;
  all.diagonal() *= 0.5;
  return all;
}

}  // namespace

PairTallies tallies_from_gamma(const DyadHistory& hist, ModelKind kind,
                               const Eigen::MatrixXd& gamma) {
  if (gamma.rows() != hist.n) throw std::invalid_argument("tallies_from_gamma: gamma rows != n");
  PairTallies t;
  t.K = static_cast<int>(gamma.cols());
  t.blocks = param_count(kind);
  const Eigen::MatrixXd weights = unit_pair_sums(gamma);
  if (kind == ModelKind::tergm_stability) {
    t.succ[0] = weighted_pair_sums(gamma, hist.stable, hist.n);
    t.trials[0] = static_cast<double>(hist.T) * weights;
  } else {
    const Eigen::MatrixXd prev = weighted_pair_sums(gamma, hist.prev_edges, hist.n);
    t.succ[0] = weighted_pair_sums(gamma, hist.formed, hist.n);
    t.trials[0] = static_cast<double>(hist.T) * weights - prev;
    t.succ[1] = weighted_pair_sums(gamma, hist.persisted, hist.n);
    t.trials[1] = prev;
  }
  return t;
}

double pair_loglik(const PairTallies& tallies, const Eigen::MatrixXd& theta) {
  if (theta.rows() != tallies.K || theta.cols() != tallies.blocks)
    throw std::invalid_argument("pair_loglik: theta must be K x blocks");
  double value = 0.0;
  for (int b = 0; b < tallies.blocks; ++b) {
    for (int k = 0; k < tallies.K; ++k) {
      for (int l = k; l < tallies.K; ++l) {
        const double m = tallies.trials[b](k, l);
        const double s = tallies.succ[b](k, l);
        if (m == 0.0 && s == 0.0) continue;
        const double eta = theta(k, b) + theta(l, b);
        value += s * eta - m * log1p_exp(eta);
      }
    }
  }
  return value;
}

void pair_grad_hess(const PairTallies& tallies, const Eigen::MatrixXd& theta,
                    Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const int K = tallies.K;
  const int dim = K * tallies.blocks;
  if (grad) grad->setZero(dim);
  if (hess) hess->setZero(dim, dim);
  for (int b = 0; b < tallies.blocks; ++b) {
    const int off = b * K;
    for (int k = 0; k < K; ++k) {
      for (int l = k; l < K; ++l) {
        const double m = tallies.trials[b](k, l);
        const double s = tallies.succ[b](k, l);
        if (m == 0.0 && s == 0.0) continue;
        const double sig = logistic(theta(k, b) + theta(l, b));
        const double resid = s - m * sig;
        const double info = m * sig * (1.0 - sig);
        if (grad) {
          (*grad)(off + k) += resid;
          (*grad)(off + l) += resid;  // doubles the diagonal term when k == l
        }
        if (hess) {
          (*hess)(off + k, off + k) -= info;
          (*hess)(off + l, off + l) -= info;
          (*hess)(off + k, off + l) -= info;
          (*hess)(off + l, off + k) -= info;
        }
      }
    }
  }
}

Eigen::MatrixXi separation_directions(const PairTallies& tallies) {
  Eigen::MatrixXi pin = Eigen::MatrixXi::Zero(tallies.K, tallies.blocks);
  for (int b = 0; b < tallies.blocks; ++b) {
    for (int k = 0; k < tallies.K; ++k) {
      bool any_trials = false, all_succ = true, all_fail = true;
      for (int l = 0; l < tallies.K; ++l) {
        const double m = tallies.trials[b](k, l);
        if (m == 0.0) continue;
        any_trials = true;
        const double s = tallies.succ[b](k, l);
        all_succ = all_succ && s == m;
        all_fail = all_fail && s == 0.0;
      }
      if (any_trials && all_succ) pin(k, b) = 1;
      if (any_trials && all_fail) pin(k, b) = -1;
    }
  }
  return pin;
}

NewtonResult maximize_pair_loglik(const PairTallies& tallies, const Eigen::MatrixXd& theta0,
                                  const NewtonOptions& options) {
  const int K = tallies.K;
  const int dim = K * tallies.blocks;
  const bool has_pins = options.pin.size() > 0 && (options.pin.array() != 0).any();

  auto clip = [&](Eigen::MatrixXd& th) {
    if (!std::isfinite(options.box)) return false;
    bool any = false;
    for (int r = 0; r < th.rows(); ++r) {
      for (int c = 0; c < th.cols(); ++c) {
        if (th(r, c) > options.box) {
          th(r, c) = options.box;
          any = true;
        } else if (th(r, c) < -options.box) {
          th(r, c) = -options.box;
          any = true;
        }
      }
    }
    return any;
  };

  NewtonResult result;
  result.theta = theta0;
  clip(result.theta);
  if (has_pins) {
    if (!std::isfinite(options.box))
      throw std::invalid_argument("maximize_pair_loglik: pinned coordinates require a finite box");
    for (int b = 0; b < tallies.blocks; ++b) {
      for (int k = 0; k < K; ++k) {
        if (options.pin(k, b) != 0) result.theta(k, b) = options.pin(k, b) * options.box;
      }
    }
    result.clipped = true;
  }
  result.value = pair_loglik(tallies, result.theta);
  if (!std::isfinite(result.value))
    throw std::runtime_error("maximize_pair_loglik: non-finite objective at the start");

  // Frozen coordinates drop out of the gradient and the Newton system.
  auto apply_pins = [&](Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    if (!has_pins) return;
    for (int b = 0; b < tallies.blocks; ++b) {
      for (int k = 0; k < K; ++k) {
        if (options.pin(k, b) == 0) continue;
        const int idx = b * K + k;
        if (g) (*g)(idx) = 0.0;
        if (h) {
          h->row(idx).setZero();
          h->col(idx).setZero();
          (*h)(idx, idx) = -1.0;
        }
      }
    }
  };

  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd hess(dim, dim);
  double prev_value = result.value;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    pair_grad_hess(tallies, result.theta, &grad, &hess);
    apply_pins(&grad, &hess);
    result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
    if (result.grad_inf_norm < options.grad_tol) {
      result.converged = true;
      break;
    }

    // Newton direction on -hess (PSD); ridge escalation when the solve is
    // unusable or does not point uphill.
    Eigen::VectorXd dir;
    double ridge = 0.0;
    for (;;) {
      Eigen::MatrixXd a = -hess;
      if (ridge > 0.0) a.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> solver(a);
      bool ok = solver.info() == Eigen::Success;
      if (ok) {
        dir = solver.solve(grad);
        ok = dir.allFinite() && grad.dot(dir) > 0.0;
      }
      if (ok) break;
      ridge = ridge == 0.0 ? 1e-8 : ridge * 10.0;
      if (ridge > 1e-2)
        throw std::runtime_error("maximize_pair_loglik: Hessian solve failed despite ridge up to 1e-2");
    }

    const double slope = grad.dot(dir);
    double lambda = 1.0;
    bool stepped = false;
    for (int halving = 0; halving < 60; ++halving, lambda *= 0.5) {
      Eigen::MatrixXd cand = result.theta;
      for (int b = 0; b < tallies.blocks; ++b) cand.col(b) += lambda * dir.segment(b * K, K);
      const bool was_clipped = clip(cand);
      const double cand_value = pair_loglik(tallies, cand);
      if (!std::isfinite(cand_value)) continue;
      const bool accept = was_clipped ? cand_value >= result.value
                                      : cand_value >= result.value + 1e-4 * lambda * slope;
      if (accept) {
        result.theta = cand;
        result.value = cand_value;
        result.clipped = result.clipped || was_clipped;
        stepped = true;
        break;
      }
    }
    if (!stepped) break;  // no improving step length; treat as converged as-is

    if (std::abs(result.value - prev_value) / (std::abs(prev_value) + 1.0) < options.rel_tol &&
        result.grad_inf_norm < 1.0) {
      // Near-stationary; one more gradient check below decides convergence.
      pair_grad_hess(tallies, result.theta, &grad, nullptr);
      apply_pins(&grad, nullptr);
      result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
      result.converged = result.grad_inf_norm < options.grad_tol;
      if (result.converged || result.clipped) break;
    }
    prev_value = result.value;
  }

  if (!result.converged) {
    pair_grad_hess(tallies, result.theta, &grad, nullptr);
    apply_pins(&grad, nullptr);
    result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
    result.converged = result.grad_inf_norm < options.grad_tol;
  }
  return result;
}

}  // namespace tergmix
