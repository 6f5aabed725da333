#include "tergmix/varem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "tergmix/common.hpp"
#include "tergmix/pair_logistic.hpp"

namespace tergmix {

void FitConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("FitConfig: max_iter must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("FitConfig: rel_tol must be in (0,1)");
  if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be positive");
  if (!(gamma_floor > 0.0 && gamma_floor < 1e-3))
    throw std::invalid_argument("FitConfig: gamma_floor must be a small positive real");
  if (newton_max_inner < 1) throw std::invalid_argument("FitConfig: newton_max_inner must be positive");
}

namespace {

void check_gamma_shape(const Eigen::MatrixXd& gamma, int n, int K) {
  if (gamma.rows() != n || gamma.cols() != K)
    throw std::invalid_argument("gamma must be n x K");
}

void check_gamma_rows(const Eigen::MatrixXd& gamma) {
  for (int i = 0; i < gamma.rows(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < gamma.cols(); ++k) {
      if (!(gamma(i, k) >= 0.0)) throw std::invalid_argument("gamma entries must be nonnegative");
      sum += gamma(i, k);
    }
    if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("gamma rows must sum to 1");
  }
}

void clamp_rows_to_simplex(Eigen::MatrixXd& gamma, double floor) {
  for (int i = 0; i < gamma.rows(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < gamma.cols(); ++k) {
      gamma(i, k) = std::max(gamma(i, k), floor);
      sum += gamma(i, k);
    }
    gamma.row(i) /= sum;
  }
}

// sum_{i,k} gamma_ik (log pi_k - log gamma_ik); zero-weight entries contribute
// their limit 0.
double entropy_prior(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& pi) {
  double acc = 0.0;
  for (int k = 0; k < gamma.cols(); ++k) {
    const double logpi = std::log(pi(k));
    for (int i = 0; i < gamma.rows(); ++i) {
      const double g = gamma(i, k);
      if (g > 0.0) acc += g * (logpi - std::log(g));
    }
  }
  return acc;
}

// out(i,k) = sum_{j != i} gamma(j,k) x_{d(i,j)}
Eigen::MatrixXd neighbor_weighted(const DyadHistory& hist, const Eigen::MatrixXd& gamma,
                                  const std::vector<std::uint32_t>& x) {
  const int n = hist.n;
  const int K = static_cast<int>(gamma.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, K);
  std::size_t d = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++d) {
      const double xd = static_cast<double>(x[d]);
      if (xd == 0.0) continue;
      for (int k = 0; k < K; ++k) {
        out(i, k) += xd * gamma(j, k);
        out(j, k) += xd * gamma(i, k);
      }
    }
  }
  return out;
}

// Symmetric K x K matrices of theta_k + theta_l and log(1 + e^{theta_k + theta_l}).
void theta_sum_tables(const Eigen::MatrixXd& theta, int col, Eigen::MatrixXd* sums,
                      Eigen::MatrixXd* lse) {
  const int K = static_cast<int>(theta.rows());
  sums->resize(K, K);
  lse->resize(K, K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      const double s = theta(k, col) + theta(l, col);
      (*sums)(k, l) = s;
      (*lse)(k, l) = log1p_exp(s);
    }
  }
}

// The dyadic part of the minorizer separates per node: D(i,k) below is
// sum_t sum_{j != i} sum_l gamma_jl log pr_{theta_kl}(y_t,ij | y_{t-1},ij),
// assembled from neighbor-weighted transition counts since the per-dyad log
// probability is linear in those counts.
MinorizerCoeffs minorizer_from_hist(const DyadHistory& hist, const ModelSpec& spec,
                                    const Params& params, const Eigen::MatrixXd& gamma_tau,
                                    double floor) {
  const int n = hist.n;
  const int K = spec.K;
  check_gamma_shape(gamma_tau, n, K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      if (!(gamma_tau(i, k) >= floor * (1.0 - 1e-6)))
        throw std::invalid_argument("minorizer_coefficients: gamma entry below floor");
    }
  }

  const double T = static_cast<double>(hist.T);
  const Eigen::VectorXd colsum = gamma_tau.colwise().sum();
  const Eigen::MatrixXd nb = (-gamma_tau).rowwise() + colsum.transpose();

  Eigen::MatrixXd D;
  if (spec.kind == ModelKind::tergm_stability) {
    Eigen::MatrixXd sums, lse;
    theta_sum_tables(params.theta, 0, &sums, &lse);
    const Eigen::MatrixXd stable = neighbor_weighted(hist, gamma_tau, hist.stable);
    D = stable * sums - T * nb * lse;
  } else {
    Eigen::MatrixXd sums_f, lse_f, sums_p, lse_p;
    theta_sum_tables(params.theta, 0, &sums_f, &lse_f);
    theta_sum_tables(params.theta, 1, &sums_p, &lse_p);
    const Eigen::MatrixXd formed = neighbor_weighted(hist, gamma_tau, hist.formed);
    const Eigen::MatrixXd persisted = neighbor_weighted(hist, gamma_tau, hist.persisted);
    const Eigen::MatrixXd prev = neighbor_weighted(hist, gamma_tau, hist.prev_edges);
    const Eigen::MatrixXd form_trials = T * nb - prev;
    D = formed * sums_f - form_trials * lse_f + persisted * sums_p - prev * lse_p;
  }

  // The membership prior/entropy enters once: z is drawn a single time for
  // the whole series, so only the dyadic part carries the sum over t.
  MinorizerCoeffs coeffs;
  coeffs.A = (0.5 * D.array() - 1.0).cwiseQuotient(gamma_tau.array()).matrix();
  coeffs.B = (params.pi.array().log().transpose().replicate(n, 1) -
              gamma_tau.array().log() + 1.0)
                 .matrix();
  return coeffs;
}

double lb_from_hist(const DyadHistory& hist, const ModelSpec& spec, const Params& params,
                    const Eigen::MatrixXd& gamma) {
  const PairTallies tallies = tallies_from_gamma(hist, spec.kind, gamma);
  return pair_loglik(tallies, params.theta) + entropy_prior(gamma, params.pi);
}

Eigen::MatrixXd estep_from_hist(const DyadHistory& hist, const ModelSpec& spec,
                                const Params& params, const Eigen::MatrixXd& gamma_tau,
                                double floor) {
  const MinorizerCoeffs coeffs = minorizer_from_hist(hist, spec, params, gamma_tau, floor);
  Eigen::MatrixXd next(gamma_tau.rows(), gamma_tau.cols());
  for (int i = 0; i < gamma_tau.rows(); ++i)
    next.row(i) = estep_node_qp(coeffs.A.row(i), coeffs.B.row(i), floor).transpose();
  return next;
}

NewtonOptions newton_options(const FitConfig& config) {
  NewtonOptions opts;
  opts.max_iter = config.newton_max_inner;
  opts.grad_tol = 1e-8;
  opts.rel_tol = config.rel_tol;
  return opts;
}

FitResult em_run(const DyadHistory& hist, const ModelSpec& spec, Eigen::MatrixXd gamma,
                 const FitConfig& config) {
  clamp_rows_to_simplex(gamma, config.gamma_floor);

  FitResult result;
  Params params;
  params.pi = mstep_pi(gamma);

  // Remark-5 style start: an M-step from the random responsibilities.
  PairTallies tallies = tallies_from_gamma(hist, spec.kind, gamma);
  NewtonResult nr = maximize_pair_loglik(tallies, Eigen::MatrixXd::Zero(spec.K, spec.p()),
                                         newton_options(config));
  params.theta = nr.theta;

  double lb = nr.value + entropy_prior(gamma, params.pi);
  if (!std::isfinite(lb)) throw std::runtime_error("fit: non-finite lower bound at initialization");
  result.lb_trajectory.push_back(lb);

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    gamma = estep_from_hist(hist, spec, params, gamma, config.gamma_floor);
    params.pi = mstep_pi(gamma);
    tallies = tallies_from_gamma(hist, spec.kind, gamma);
    nr = maximize_pair_loglik(tallies, params.theta, newton_options(config));
    params.theta = nr.theta;

    const double lb_new = nr.value + entropy_prior(gamma, params.pi);
    if (!std::isfinite(lb_new)) throw std::runtime_error("fit: non-finite lower bound");
    result.lb_trajectory.push_back(lb_new);
    result.iterations = iter;
    if (std::abs(lb_new - lb) / (std::abs(lb) + 1.0) < config.rel_tol) {
      result.converged = true;
      lb = lb_new;
      break;
    }
    lb = lb_new;
  }

  result.params = std::move(params);
  result.gamma = std::move(gamma);
  result.labels = assign_labels(result.gamma);
  return result;
}

// Reorder communities by descending pi, ties by the first theta column
// ascending, so reports are stable under label switching.
void canonicalize(FitResult& result, const ModelSpec& spec) {
  const int K = spec.K;
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (result.params.pi(a) != result.params.pi(b)) return result.params.pi(a) > result.params.pi(b);
    if (result.params.theta(a, 0) != result.params.theta(b, 0))
      return result.params.theta(a, 0) < result.params.theta(b, 0);
    return a < b;
  });

  Eigen::VectorXd pi(K);
  Eigen::MatrixXd theta(K, spec.p());
  Eigen::MatrixXd gamma(result.gamma.rows(), K);
  for (int k = 0; k < K; ++k) {
    pi(k) = result.params.pi(order[static_cast<std::size_t>(k)]);
    theta.row(k) = result.params.theta.row(order[static_cast<std::size_t>(k)]);
    gamma.col(k) = result.gamma.col(order[static_cast<std::size_t>(k)]);
  }
  result.params.pi = std::move(pi);
  result.params.theta = std::move(theta);
  result.gamma = std::move(gamma);
  result.labels = assign_labels(result.gamma);
}

}  // namespace

double lower_bound(const NetworkSeries& series, const ModelSpec& spec, const Params& params,
                   const Eigen::MatrixXd& gamma) {
  spec.validate();
  params.validate(spec);
  check_gamma_shape(gamma, series.node_count(), spec.K);
  check_gamma_rows(gamma);
  return lb_from_hist(DyadHistory::from_series(series), spec, params, gamma);
}

MinorizerCoeffs minorizer_coefficients(const NetworkSeries& series, const ModelSpec& spec,
                                       const Params& params_tau, const Eigen::MatrixXd& gamma_tau,
                                       double gamma_floor) {
  spec.validate();
  params_tau.validate(spec);
  return minorizer_from_hist(DyadHistory::from_series(series), spec, params_tau, gamma_tau,
                             gamma_floor);
}

Eigen::VectorXd estep_node_qp(const Eigen::VectorXd& A, const Eigen::VectorXd& B, double floor) {
  const int K = static_cast<int>(A.size());
  if (B.size() != K) throw std::invalid_argument("estep_node_qp: A and B must have equal length");
  if (K < 1) throw std::invalid_argument("estep_node_qp: empty problem");
  for (int k = 0; k < K; ++k) {
    if (!(A(k) < 0.0)) throw std::invalid_argument("estep_node_qp: A entries must be negative");
  }
  if (K == 1) return Eigen::VectorXd::Ones(1);

  auto eval = [&](double nu, Eigen::VectorXd* g) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      const double raw = (nu - B(k)) / (2.0 * A(k));
      const double v = std::clamp(raw, floor, 1.0);
      (*g)(k) = v;
      sum += v;
    }
    return sum;
  };

  // gamma_k(nu) is nonincreasing in nu: lo puts some coordinate at 1 (sum >= 1),
  // hi puts all coordinates at the floor (sum < 1).
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    lo = std::min(lo, B(k) + 2.0 * A(k));
    hi = std::max(hi, B(k) + 2.0 * A(k) * floor);
  }

  Eigen::VectorXd g(K);
  for (int iter = 0; iter < 300; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double sum = eval(mid, &g);
    if (std::abs(sum - 1.0) <= 1e-12) return g;
    (sum > 1.0 ? lo : hi) = mid;
  }
  eval(0.5 * (lo + hi), &g);
  return g;
}

Eigen::MatrixXd estep(const NetworkSeries& series, const ModelSpec& spec, const Params& params_tau,
                      const Eigen::MatrixXd& gamma_tau, double gamma_floor) {
  spec.validate();
  params_tau.validate(spec);
  return estep_from_hist(DyadHistory::from_series(series), spec, params_tau, gamma_tau,
                         gamma_floor);
}

Eigen::VectorXd mstep_pi(const Eigen::MatrixXd& gamma) {
  check_gamma_rows(gamma);
  return gamma.colwise().mean();
}

void lb_grad_hess_theta(const NetworkSeries& series, const ModelSpec& spec,
                        const Eigen::MatrixXd& theta, const Eigen::MatrixXd& gamma,
                        Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  spec.validate();
  check_gamma_shape(gamma, series.node_count(), spec.K);
  const PairTallies tallies =
      tallies_from_gamma(DyadHistory::from_series(series), spec.kind, gamma);
  pair_grad_hess(tallies, theta, grad, hess);
}

Eigen::MatrixXd mstep_theta(const NetworkSeries& series, const ModelSpec& spec,
                            const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& theta_init,
                            const FitConfig& config) {
  spec.validate();
  config.validate();
  check_gamma_shape(gamma, series.node_count(), spec.K);
  const PairTallies tallies =
      tallies_from_gamma(DyadHistory::from_series(series), spec.kind, gamma);
  return maximize_pair_loglik(tallies, theta_init, newton_options(config)).theta;
}

std::vector<int> assign_labels(const Eigen::MatrixXd& gamma) {
  std::vector<int> z(static_cast<std::size_t>(gamma.rows()));
  for (int i = 0; i < gamma.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < gamma.cols(); ++k) {
      if (gamma(i, k) > gamma(i, best)) best = k;
    }
    z[static_cast<std::size_t>(i)] = best + 1;
  }
  return z;
}

FitResult em_from_gamma(const NetworkSeries& series, const ModelSpec& spec,
                        const Eigen::MatrixXd& gamma0, const FitConfig& config) {
  spec.validate();
  config.validate();
  check_gamma_shape(gamma0, series.node_count(), spec.K);
  FitResult result = em_run(DyadHistory::from_series(series), spec, gamma0, config);
  result.seed = config.seed;
  result.restart_trajectories.push_back(result.lb_trajectory);
  return result;
}

FitResult fit(const NetworkSeries& series, const ModelSpec& spec, const FitConfig& config) {
  spec.validate();
  config.validate();
  series.validate();
  if (series.node_count() < 2) throw std::invalid_argument("fit: need at least 2 nodes");

  const DyadHistory hist = DyadHistory::from_series(series);
  const int n = hist.n;

  std::vector<std::optional<FitResult>> runs(static_cast<std::size_t>(config.restarts));
  std::string first_error;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(r)));
    Eigen::MatrixXd gamma0(n, spec.K);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < spec.K; ++k) gamma0(i, k) = rng.uniform01();
    }
    try {
      runs[static_cast<std::size_t>(r)] = em_run(hist, spec, gamma0, config);
    } catch (const std::exception& e) {
      if (first_error.empty()) first_error = e.what();
    }
  }

  int best = -1;
  for (int r = 0; r < config.restarts; ++r) {
    const auto& run = runs[static_cast<std::size_t>(r)];
    if (!run) continue;
    if (best < 0 || run->lb_trajectory.back() >
                        runs[static_cast<std::size_t>(best)]->lb_trajectory.back())
      best = r;
  }
  if (best < 0) throw std::runtime_error("fit: all restarts failed; first error: " + first_error);

  FitResult result = std::move(*runs[static_cast<std::size_t>(best)]);
  result.restart_index = best;
  result.seed = config.seed;
  for (const auto& run : runs) {
    if (run) result.restart_trajectories.push_back(run->lb_trajectory);
    else ++result.failed_restarts;
  }
  canonicalize(result, spec);
  return result;
}

std::string fit_result_to_json(const FitResult& result, const ModelSpec& spec) {
  nlohmann::json doc;
  doc["model"] = model_kind_name(spec.kind);
  doc["K"] = spec.K;
  doc["pi"] = std::vector<double>(result.params.pi.data(), result.params.pi.data() + result.params.pi.size());
  {
    std::vector<std::vector<double>> theta;
    for (int k = 0; k < result.params.theta.rows(); ++k) {
      theta.emplace_back();
      for (int c = 0; c < result.params.theta.cols(); ++c) theta.back().push_back(result.params.theta(k, c));
    }
    doc["theta"] = theta;
  }
  {
    std::vector<std::vector<double>> gamma;
    for (int i = 0; i < result.gamma.rows(); ++i) {
      gamma.emplace_back();
      for (int k = 0; k < result.gamma.cols(); ++k) gamma.back().push_back(result.gamma(i, k));
    }
    doc["gamma"] = gamma;
  }
  doc["labels"] = result.labels;
  doc["lb_trajectory"] = result.lb_trajectory;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["restart_index"] = result.restart_index;
  doc["seed"] = result.seed;
  return doc.dump(2) + "\n";
}

}  // namespace tergmix
