#pragma once

#include <cstdint>
#include <Eigen/Dense>

#include "tergmix/netseries.hpp"

namespace tergmix {

// tergm_stability: one stability parameter per community.
// stergm_fp: separable formation + persistence parameters per community.
enum class ModelKind { tergm_stability, stergm_fp };

inline int param_count(ModelKind kind) { return kind == ModelKind::tergm_stability ? 1 : 2; }

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::tergm_stability;
  int K = 1;

  int p() const { return param_count(kind); }
  void validate() const;
};

// Mixture parameters: pi lives on the simplex, theta is K x p with column 0
// the stability (or formation) parameter and column 1 the persistence
// parameter for stergm_fp.
struct Params {
  Eigen::VectorXd pi;
  Eigen::MatrixXd theta;

  void validate(const ModelSpec& spec) const;
};

// Counts over dyads for one transition: density, stability, formation,
// persistence.
struct SuffStats {
  std::int64_t g_d = 0;
  std::int64_t g_s = 0;
  std::int64_t g_f = 0;
  std::int64_t g_p = 0;
};

SuffStats suff_stats(const Snapshot& y_prev, const Snapshot& y_cur);

// Log-odds of y_cur = 1 given y_prev for a dyad whose endpoints sit in
// communities k and l. The natural parameter is node-additive: theta_k +
// theta_l enters with a sign set by y_prev for the stability model, and the
// formation/persistence column is selected by y_prev for the separable model.
double dyad_natural_param(const ModelSpec& spec,
                          const Eigen::Ref<const Eigen::RowVectorXd>& theta_k,
                          const Eigen::Ref<const Eigen::RowVectorXd>& theta_l,
                          int y_prev);

// log pr(Y_t,ij = y_cur | y_prev). The per-dyad normalizer is log(1 + e^eta),
// evaluated in a form stable for |eta| up to ~700.
double edge_transition_logprob(const ModelSpec& spec,
                               const Eigen::Ref<const Eigen::RowVectorXd>& theta_k,
                               const Eigen::Ref<const Eigen::RowVectorXd>& theta_l,
                               int y_prev, int y_cur);

// Conditional edge probability p_kl = pr(Y_t,ij = 1 | y_prev).
double edge_prob(const ModelSpec& spec,
                 const Eigen::Ref<const Eigen::RowVectorXd>& theta_k,
                 const Eigen::Ref<const Eigen::RowVectorXd>& theta_l,
                 int y_prev);

}  // namespace tergmix
