#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "tergmix/models.hpp"
#include "tergmix/netseries.hpp"

namespace tergmix {

struct FitConfig {
  int max_iter = 500;
  double rel_tol = 1e-6;
  int restarts = 10;
  std::uint64_t seed = 0;
  double gamma_floor = 1e-10;
  int newton_max_inner = 50;

  void validate() const;
};

struct FitResult {
  Params params;
  Eigen::MatrixXd gamma;   // n x K responsibilities, rows on the simplex
  std::vector<int> labels; // 1..K, argmax of gamma rows
  std::vector<double> lb_trajectory;  // winning restart, one entry per outer iteration
  bool converged = false;
  int iterations = 0;
  int restart_index = 0;
  std::uint64_t seed = 0;

  // Diagnostics: trajectories of every restart (for ascent audits) and the
  // number of restarts that errored and were skipped.
  std::vector<std::vector<double>> restart_trajectories;
  int failed_restarts = 0;
};

// Mean-field lower bound LB(pi, theta; gamma). The membership prior/entropy
// term is summed over t (so multiplied by T) to match the bound being
// maximized.
double lower_bound(const NetworkSeries& series, const ModelSpec& spec,
                   const Params& params, const Eigen::MatrixXd& gamma);

// Coefficients of the separable quadratic minorizer of the lower bound at
// gamma_tau: Q(Gamma) = sum_{i,k} A_ik gamma_ik^2 + B_ik gamma_ik. Every A_ik
// is strictly negative, so each per-node subproblem is strictly concave.
struct MinorizerCoeffs {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

MinorizerCoeffs minorizer_coefficients(const NetworkSeries& series, const ModelSpec& spec,
                                       const Params& params_tau,
                                       const Eigen::MatrixXd& gamma_tau,
                                       double gamma_floor = 1e-10);

// Maximizes sum_k (A_k g_k^2 + B_k g_k) over the simplex (entries >= floor)
// by exact KKT: g_k(nu) = clamp((nu - B_k) / (2 A_k), floor, 1) with nu found
// by monotone bisection on sum_k g_k(nu) = 1.
Eigen::VectorXd estep_node_qp(const Eigen::VectorXd& A, const Eigen::VectorXd& B,
                              double floor = 1e-10);

// One MM step of the variational E-step: solves the per-node QPs for all
// nodes. Guarantees LB(gamma_next) >= LB(gamma_tau).
Eigen::MatrixXd estep(const NetworkSeries& series, const ModelSpec& spec,
                      const Params& params_tau, const Eigen::MatrixXd& gamma_tau,
                      double gamma_floor = 1e-10);

Eigen::VectorXd mstep_pi(const Eigen::MatrixXd& gamma);

// Analytic gradient (length K*p) and Hessian of the lower bound with respect
// to theta at fixed gamma. Layout is column-major over theta columns:
// stability, or formation block then persistence block.
void lb_grad_hess_theta(const NetworkSeries& series, const ModelSpec& spec,
                        const Eigen::MatrixXd& theta, const Eigen::MatrixXd& gamma,
                        Eigen::VectorXd* grad, Eigen::MatrixXd* hess);

// Line-searched Newton ascent on theta; never decreases the lower bound.
Eigen::MatrixXd mstep_theta(const NetworkSeries& series, const ModelSpec& spec,
                            const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& theta_init,
                            const FitConfig& config);

// Hard assignment z_i = argmax_k gamma_ik, ties toward the smallest k; 1-based.
std::vector<int> assign_labels(const Eigen::MatrixXd& gamma);

// One EM run from the given initialization (no restarts, no reordering).
FitResult em_from_gamma(const NetworkSeries& series, const ModelSpec& spec,
                        const Eigen::MatrixXd& gamma0, const FitConfig& config);

// Full fit: multistart EM (uniform random responsibilities, initial M-step,
// then alternate E/M until the relative lower-bound change drops below
// rel_tol). Returns the restart with the highest final lower bound, with
// communities reordered by descending pi (ties by first theta column).
FitResult fit(const NetworkSeries& series, const ModelSpec& spec, const FitConfig& config);

std::string fit_result_to_json(const FitResult& result, const ModelSpec& spec);

}  // namespace tergmix
