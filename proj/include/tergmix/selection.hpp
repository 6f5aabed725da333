#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>

#include "tergmix/models.hpp"
#include "tergmix/netseries.hpp"
#include "tergmix/varem.hpp"

namespace tergmix {

// Conditional log-likelihood of the series given hard labels, evaluated in
// O(K^2) from block transition tallies.
double conditional_loglik(const NetworkSeries& series, const ModelSpec& spec,
                          const Eigen::MatrixXd& theta, const std::vector<int>& z);

struct MleResult {
  Eigen::MatrixXd theta;
  double grad_inf_norm = 0.0;
  // Separation: the maximizer ran into the |theta| <= 15 box, so the true MLE
  // is infinite and the returned estimate is clipped.
  bool diverged = false;
};

MleResult conditional_mle(const NetworkSeries& series, const ModelSpec& spec,
                          const std::vector<int>& z);

struct ComplexityResult {
  double d_k = 0.0;
  // Fisher information was singular (e.g. an empty community); a Moore-Penrose
  // pseudo-inverse was used.
  bool hess_singular = false;
};

// Sandwich complexity d_K = tr(H^-1 V) with V = sum_t u_t u_t' built from
// per-time-step scores of the conditional log-likelihood and H its Fisher
// information at theta_mle. For stergm_fp the construction is applied to the
// formation and persistence sub-likelihoods, giving a 2K-parameter
// block-diagonal H and stacked scores.
ComplexityResult clbic_complexity(const NetworkSeries& series, const ModelSpec& spec,
                                  const Eigen::MatrixXd& theta_mle,
                                  const std::vector<int>& z);

double clbic_score(double cl, double d_k, double sample_size);
double icl_score(double cl, int m_k, double sample_size);

// -2 cl + d_K log(T n(n-1)/2); smaller is better.
double cl_bic(const NetworkSeries& series, const ModelSpec& spec,
              const std::vector<int>& z, const Eigen::MatrixXd& theta_mle);

// cl - m_K log(T n(n-1)/2) with m_K the free-parameter count (K for the
// stability model, 2K for formation/persistence); larger is better.
double icl(const NetworkSeries& series, const ModelSpec& spec,
           const std::vector<int>& z, const Eigen::MatrixXd& theta_hat);

struct IdentifiabilityCheck {
  bool mixture_ok = false;
  bool theta_ok = false;
};

// Sufficient conditions for generic identifiability of (pi, p_kl) and of the
// network parameters, as functions of n, K and the per-community parameter
// count p.
IdentifiabilityCheck identifiability_check(int n, int K, int p);

struct KReport {
  int K = 0;
  double cl = 0.0;
  Eigen::MatrixXd theta_mle;
  double d_k = 0.0;
  double cl_bic = 0.0;
  double icl = 0.0;
  bool mle_diverged = false;
  bool hess_singular = false;
  bool mixture_identifiable = false;
  bool theta_identifiable = false;
};

struct SelectionReport {
  std::vector<KReport> per_k;
  int chosen_k_clbic = 0;
  int chosen_k_icl = 0;
};

// Fits every K in [k_min, k_max] and scores CL-BIC / ICL at the conditional
// MLE given the fitted hard labels. Per-K fits may run concurrently.
SelectionReport select_k(const NetworkSeries& series, ModelKind kind, int k_min, int k_max,
                         const FitConfig& config, int jobs = 1,
                         std::vector<FitResult>* fits_out = nullptr);

std::string selection_report_to_json(const SelectionReport& report, ModelKind kind);
void write_selection_tsv(const SelectionReport& report, const std::string& path);

}  // namespace tergmix
