#include "tergmix/selection.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tergmix/common.hpp"
#include "tergmix/pair_logistic.hpp"

namespace tergmix {

namespace {

double pair_sample_size(const NetworkSeries& series) {
  return static_cast<double>(series.transitions()) *
         static_cast<double>(dyad_count(static_cast<std::size_t>(series.node_count())));
}

}  // namespace

double conditional_loglik(const NetworkSeries& series, const ModelSpec& spec,
                          const Eigen::MatrixXd& theta, const std::vector<int>& z) {
  spec.validate();
  const BlockTransitionCounts counts = transition_tallies(series, z, spec.K);
  return pair_loglik(tallies_from_counts(counts, spec.kind), theta);
}

MleResult conditional_mle(const NetworkSeries& series, const ModelSpec& spec,
                          const std::vector<int>& z) {
  spec.validate();
  const BlockTransitionCounts counts = transition_tallies(series, z, spec.K);
  const PairTallies tallies = tallies_from_counts(counts, spec.kind);
  NewtonOptions opts;
  opts.max_iter = 200;
  opts.grad_tol = 1e-8;
  opts.rel_tol = 1e-12;
  opts.box = 15.0;  // separation guard
  opts.pin = separation_directions(tallies);
  const NewtonResult nr =
      maximize_pair_loglik(tallies, Eigen::MatrixXd::Zero(spec.K, spec.p()), opts);
  MleResult result;
  result.theta = nr.theta;
  result.grad_inf_norm = nr.grad_inf_norm;
  result.diverged = nr.clipped;
  return result;
}

ComplexityResult clbic_complexity(const NetworkSeries& series, const ModelSpec& spec,
                                  const Eigen::MatrixXd& theta_mle, const std::vector<int>& z) {
  spec.validate();
  if (!theta_mle.allFinite()) throw std::invalid_argument("clbic_complexity: theta must be finite");
  const int dim = spec.K * spec.p();

  // Fisher information of cl at theta_mle; trials are pooled over t.
  const BlockTransitionCounts pooled = transition_tallies(series, z, spec.K);
  Eigen::MatrixXd hess(dim, dim);
  pair_grad_hess(tallies_from_counts(pooled, spec.kind), theta_mle, nullptr, &hess);
  const Eigen::MatrixXd info = -hess;

  // V = sum_t u_t u_t' with u_t the score of the time-t term of cl.
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd score(dim);
  for (int t = 1; t <= series.transitions(); ++t) {
    const BlockTransitionCounts at_t = transition_tallies_at(series, z, spec.K, t);
    pair_grad_hess(tallies_from_counts(at_t, spec.kind), theta_mle, &score, nullptr);
    v.noalias() += score * score.transpose();
  }

  ComplexityResult result;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("clbic_complexity: eigendecomposition failed");
  const double max_ev = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = std::max(max_ev, 1.0) * 1e-12;
  result.hess_singular = eig.eigenvalues().minCoeff() <= tol;

  if (!result.hess_singular) {
    result.d_k = Eigen::LDLT<Eigen::MatrixXd>(info).solve(v).trace();
  } else {
    // Moore-Penrose pseudo-inverse on the nonsingular eigenspace.
    Eigen::VectorXd inv = eig.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv(i) = inv(i) > tol ? 1.0 / inv(i) : 0.0;
    const Eigen::MatrixXd pinv =
        eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    result.d_k = (pinv * v).trace();
  }
  return result;
}

double clbic_score(double cl, double d_k, double sample_size) {
  return -2.0 * cl + d_k * std::log(sample_size);
}

double icl_score(double cl, int m_k, double sample_size) {
  return cl - static_cast<double>(m_k) * std::log(sample_size);
}

double cl_bic(const NetworkSeries& series, const ModelSpec& spec, const std::vector<int>& z,
              const Eigen::MatrixXd& theta_mle) {
  const double cl = conditional_loglik(series, spec, theta_mle, z);
  const ComplexityResult complexity = clbic_complexity(series, spec, theta_mle, z);
  return clbic_score(cl, complexity.d_k, pair_sample_size(series));
}

double icl(const NetworkSeries& series, const ModelSpec& spec, const std::vector<int>& z,
           const Eigen::MatrixXd& theta_hat) {
  const double cl = conditional_loglik(series, spec, theta_hat, z);
  return icl_score(cl, spec.K * spec.p(), pair_sample_size(series));
}

IdentifiabilityCheck identifiability_check(int n, int K, int p) {
  if (n < 1 || K < 1 || p < 1)
    throw std::invalid_argument("identifiability_check: n, K, p must be positive");
  const double root = std::sqrt(static_cast<double>(n));
  const double kd = static_cast<double>(K);
  const double bound = K % 2 == 0 ? kd - 1.0 + (kd + 2.0) * (kd + 2.0) / 4.0
                                  : kd - 1.0 + (kd + 1.0) * (kd + 3.0) / 4.0;
  IdentifiabilityCheck check;
  check.mixture_ok = root >= bound;
  check.theta_ok = p <= (K + 1) / 2;
  return check;
}

SelectionReport select_k(const NetworkSeries& series, ModelKind kind, int k_min, int k_max,
                         const FitConfig& config, int jobs, std::vector<FitResult>* fits_out) {
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("select_k: need 1 <= k_min <= k_max");
  const int count = k_max - k_min + 1;
  const double sample_size = pair_sample_size(series);

  SelectionReport report;
  report.per_k.resize(static_cast<std::size_t>(count));
  std::vector<FitResult> fits(static_cast<std::size_t>(count));

  parallel_for(static_cast<std::size_t>(std::max(jobs, 1)), static_cast<std::size_t>(count),
               [&](std::size_t idx) {
                 const int K = k_min + static_cast<int>(idx);
                 const ModelSpec spec{kind, K};
                 FitResult fitted = fit(series, spec, config);
                 const MleResult mle = conditional_mle(series, spec, fitted.labels);
                 const double cl = conditional_loglik(series, spec, mle.theta, fitted.labels);
                 const ComplexityResult complexity =
                     clbic_complexity(series, spec, mle.theta, fitted.labels);
                 const IdentifiabilityCheck ident =
                     identifiability_check(series.node_count(), K, spec.p());

                 KReport& row = report.per_k[idx];
                 row.K = K;
                 row.cl = cl;
                 row.theta_mle = mle.theta;
                 row.d_k = complexity.d_k;
                 row.cl_bic = clbic_score(cl, complexity.d_k, sample_size);
                 row.icl = icl_score(cl, K * spec.p(), sample_size);
                 row.mle_diverged = mle.diverged;
                 row.hess_singular = complexity.hess_singular;
                 row.mixture_identifiable = ident.mixture_ok;
                 row.theta_identifiable = ident.theta_ok;
                 fits[idx] = std::move(fitted);
               });

  report.chosen_k_clbic = report.per_k.front().K;
  report.chosen_k_icl = report.per_k.front().K;
  for (const KReport& row : report.per_k) {
    if (row.cl_bic < report.per_k[static_cast<std::size_t>(report.chosen_k_clbic - k_min)].cl_bic)
      report.chosen_k_clbic = row.K;
    if (row.icl > report.per_k[static_cast<std::size_t>(report.chosen_k_icl - k_min)].icl)
      report.chosen_k_icl = row.K;
  }
  if (fits_out) *fits_out = std::move(fits);
  return report;
}

std::string selection_report_to_json(const SelectionReport& report, ModelKind kind) {
  nlohmann::json doc;
  doc["model"] = model_kind_name(kind);
  doc["chosen_K_clbic"] = report.chosen_k_clbic;
  doc["chosen_K_icl"] = report.chosen_k_icl;
  doc["per_K"] = nlohmann::json::array();
  for (const KReport& row : report.per_k) {
    nlohmann::json item;
    item["K"] = row.K;
    item["cl"] = row.cl;
    item["d_K"] = row.d_k;
    item["cl_bic"] = row.cl_bic;
    item["icl"] = row.icl;
    std::vector<std::vector<double>> theta;
    for (int k = 0; k < row.theta_mle.rows(); ++k) {
      theta.emplace_back();
      for (int c = 0; c < row.theta_mle.cols(); ++c) theta.back().push_back(row.theta_mle(k, c));
    }
    item["theta_mle"] = theta;
    item["mle_diverged"] = row.mle_diverged;
    item["hess_singular"] = row.hess_singular;
    item["mixture_identifiable"] = row.mixture_identifiable;
    item["theta_identifiable"] = row.theta_identifiable;
    doc["per_K"].push_back(item);
  }
  return doc.dump(2) + "\n";
}

void write_selection_tsv(const SelectionReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "K\tcl\td_K\tcl_bic\ticl\n";
  out.precision(10);
  for (const KReport& row : report.per_k)
    out << row.K << '\t' << row.cl << '\t' << row.d_k << '\t' << row.cl_bic << '\t' << row.icl
        << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tergmix
