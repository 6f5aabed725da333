#include "tergmix/models.hpp"

#include <cmath>
#include <stdexcept>

#include "tergmix/common.hpp"

namespace tergmix {

const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::tergm_stability ? "tergm" : "stergm";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "tergm" || name == "tergm_stability") return ModelKind::tergm_stability;
  if (name == "stergm" || name == "stergm_fp") return ModelKind::stergm_fp;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected tergm or stergm)");
}

void ModelSpec::validate() const {
  if (K < 1) throw std::invalid_argument("ModelSpec: K must be >= 1");
}

void Params::validate(const ModelSpec& spec) const {
  spec.validate();
  if (pi.size() != spec.K) throw std::invalid_argument("Params: pi length must equal K");
  if (theta.rows() != spec.K || theta.cols() != spec.p())
    throw std::invalid_argument("Params: theta must be K x p");
  double sum = 0.0;
  for (int k = 0; k < pi.size(); ++k) {
    if (!(pi(k) >= 0.0)) throw std::invalid_argument("Params: pi entries must be >= 0");
    sum += pi(k);
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Params: pi must sum to 1");
  if (!theta.allFinite()) throw std::invalid_argument("Params: theta entries must be finite");
}

SuffStats suff_stats(const Snapshot& y_prev, const Snapshot& y_cur) {
  if (y_prev.node_count() != y_cur.node_count())
    throw std::invalid_argument("suff_stats: snapshots must share a node set");
  const std::int64_t total =
      static_cast<std::int64_t>(dyad_count(static_cast<std::size_t>(y_prev.node_count())));

  SuffStats s;
  s.g_d = static_cast<std::int64_t>(y_cur.edge_count());
  for (const auto& [i, j] : y_cur.edges()) s.g_p += y_prev.has_edge(i, j);
  s.g_f = s.g_d - s.g_p;
  // stable = persisted + stably-absent; the latter is total minus the union
  // of the two edge sets.
  s.g_s = total - static_cast<std::int64_t>(y_prev.edge_count()) - s.g_d + 2 * s.g_p;
  return s;
}

double dyad_natural_param(const ModelSpec& spec,
                          const Eigen::Ref<const Eigen::RowVectorXd>& theta_k,
                          const Eigen::Ref<const Eigen::RowVectorXd>& theta_l,
                          int y_prev) {
  if (theta_k.size() != spec.p() || theta_l.size() != spec.p())
    throw std::invalid_argument("dyad_natural_param: parameter rows must have length p");
  switch (spec.kind) {
    case ModelKind::tergm_stability:
      // Stability statistic equals y_cur when y_prev = 1 and 1 - y_cur when
      // y_prev = 0, so the log-odds flip sign with y_prev.
      return (theta_k(0) + theta_l(0)) * (y_prev ? 1.0 : -1.0);
    case ModelKind::stergm_fp:
      return y_prev ? theta_k(1) + theta_l(1) : theta_k(0) + theta_l(0);
  }
  throw std::logic_error("unknown model kind");
}

double edge_transition_logprob(const ModelSpec& spec,
                               const Eigen::Ref<const Eigen::RowVectorXd>& theta_k,
                               const Eigen::Ref<const Eigen::RowVectorXd>& theta_l,
                               int y_prev, int y_cur) {
  const double eta = dyad_natural_param(spec, theta_k, theta_l, y_prev);
  return (y_cur ? eta : 0.0) - log1p_exp(eta);
}

double edge_prob(const ModelSpec& spec,
                 const Eigen::Ref<const Eigen::RowVectorXd>& theta_k,
                 const Eigen::Ref<const Eigen::RowVectorXd>& theta_l,
                 int y_prev) {
  return logistic(dyad_natural_param(spec, theta_k, theta_l, y_prev));
}

}  // namespace tergmix
