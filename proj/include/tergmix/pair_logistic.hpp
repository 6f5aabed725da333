#pragma once

#include <array>
#include <limits>
#include <Eigen/Dense>

#include "tergmix/models.hpp"
#include "tergmix/netseries.hpp"

namespace tergmix {

// Bernoulli tallies pooled by unordered community pair, one (succ, trials)
// slab per parameter column. Both model kinds reduce to
//   sum_{k<=l} [ succ_kl * (th_k + th_l) - trials_kl * log(1 + e^{th_k + th_l}) ]
// per slab, so theta estimation is a shared concave logistic problem whether
// the tallies come from hard labels or from responsibility weights.
struct PairTallies {
  int K = 0;
  int blocks = 0;  // 1 = stability slab; 2 = formation, persistence slabs
  std::array<Eigen::MatrixXd, 2> succ;    // K x K symmetric; (k,l) holds the unordered total
  std::array<Eigen::MatrixXd, 2> trials;
};

PairTallies tallies_from_counts(const BlockTransitionCounts& counts, ModelKind kind);

// Soft tallies weighted by gamma_{ik} gamma_{jl} over dyads i < j.
PairTallies tallies_from_gamma(const DyadHistory& hist, ModelKind kind,
                               const Eigen::MatrixXd& gamma);

// The pooled log-likelihood (equivalently the theta-dependent part of the
// variational lower bound when the tallies are soft).
double pair_loglik(const PairTallies& tallies, const Eigen::MatrixXd& theta);

// Gradient (length K*p, slab-major) and Hessian of pair_loglik in theta.
// The Hessian is block-diagonal across slabs and negative semidefinite.
void pair_grad_hess(const PairTallies& tallies, const Eigen::MatrixXd& theta,
                    Eigen::VectorXd* grad, Eigen::MatrixXd* hess);

struct NewtonOptions {
  int max_iter = 50;
  double grad_tol = 1e-8;
  double rel_tol = 1e-6;
  // Optional box |theta| <= box, used to stop separation cases from running away.
  double box = std::numeric_limits<double>::infinity();
  // Optional K x blocks mask: +1/-1 freezes the coordinate at +box/-box
  // (separated directions), 0 leaves it free.
  Eigen::MatrixXi pin;
};

// Directions of quasi-complete separation: +1 where every pair touching the
// component is all-success (MLE at +infinity), -1 where all-failure.
Eigen::MatrixXi separation_directions(const PairTallies& tallies);

struct NewtonResult {
  Eigen::MatrixXd theta;
  double value = 0.0;  // pair_loglik at theta
  double grad_inf_norm = 0.0;
  bool converged = false;
  bool clipped = false;  // some coordinate ended on the box boundary
};

// Modified Newton-Raphson ascent with Armijo backtracking along the Newton
// direction; the Hessian solve is ridge-regularized on failure (1e-8 * I,
// escalating tenfold up to 1e-2 before throwing).
NewtonResult maximize_pair_loglik(const PairTallies& tallies,
                                  const Eigen::MatrixXd& theta0,
                                  const NewtonOptions& options);

}  // namespace tergmix
