#include "tergmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tergmix/common.hpp"

namespace tergmix {

double rand_index(const std::vector<int>& z_true, const std::vector<int>& z_hat) {
  const std::size_t n = z_true.size();
  if (z_hat.size() != n) throw std::invalid_argument("rand_index: label vectors differ in length");
  if (n < 2) throw std::invalid_argument("rand_index: need at least 2 nodes");
  std::uint64_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_true = z_true[i] == z_true[j];
      const bool same_hat = z_hat[i] == z_hat[j];
      agree += same_true == same_hat;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(dyad_count(n));
}

RseResult rse(const Eigen::VectorXd& pi_hat, const Eigen::VectorXd& pi_true,
              const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& theta_true) {
  const int K = static_cast<int>(pi_true.size());
  const int p = static_cast<int>(theta_true.cols());
  if (pi_hat.size() != K || theta_hat.rows() != K || theta_true.rows() != K ||
      theta_hat.cols() != p)
    throw std::invalid_argument("rse: estimate and truth must share K and p");
  if (K > 8) throw std::invalid_argument("rse: exhaustive alignment supports K <= 8 only");

  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);

  double best_obj = std::numeric_limits<double>::infinity();
  RseResult best;
  best.rse_theta.resize(p);
  do {
    double sq_pi = 0.0;
    Eigen::VectorXd sq_theta = Eigen::VectorXd::Zero(p);
    for (int k = 0; k < K; ++k) {
      const int e = perm[static_cast<std::size_t>(k)];
      const double dpi = pi_hat(e) - pi_true(k);
      sq_pi += dpi * dpi;
      for (int c = 0; c < p; ++c) {
        const double dth = theta_hat(e, c) - theta_true(k, c);
        sq_theta(c) += dth * dth;
      }
    }
    const double rse_pi = std::sqrt(sq_pi);
    const Eigen::VectorXd rse_theta = sq_theta.cwiseSqrt();
    const double obj = rse_pi + rse_theta.sum();
    if (obj < best_obj) {
      best_obj = obj;
      best.rse_pi = rse_pi;
      best.rse_theta = rse_theta;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

struct RatioSeries {
  std::vector<double> values;
  int excluded = 0;

  void add(double numer, double denom) {
    if (denom > 0.0) {
      values.push_back(numer / denom);
    } else {
      ++excluded;
    }
  }

  void summarize(double* mean, double* sd) const {
    if (values.empty()) {
      *mean = std::numeric_limits<double>::quiet_NaN();
      *sd = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    *mean = m;
    if (values.size() < 2) {
      *sd = 0.0;
      return;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    *sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
};

}  // namespace

InstabilityReport instability_stats(const NetworkSeries& series, const std::vector<int>& z, int K) {
  series.validate();
  if (K < 0) K = z.empty() ? 0 : *std::max_element(z.begin(), z.end());
  if (K < 1) throw std::invalid_argument("instability_stats: need at least one community");

  const int pairs = K * (K + 1) / 2;
  std::vector<RatioSeries> s10(static_cast<std::size_t>(pairs));
  std::vector<RatioSeries> s01(static_cast<std::size_t>(pairs));
  std::vector<RatioSeries> stot(static_cast<std::size_t>(pairs));

  for (int t = 1; t <= series.transitions(); ++t) {
    const BlockTransitionCounts counts = transition_tallies_at(series, z, K, t);
    for (int idx = 0; idx < pairs; ++idx) {
      const auto& c = counts.cells[static_cast<std::size_t>(idx)];
      s10[static_cast<std::size_t>(idx)].add(static_cast<double>(c.n10), static_cast<double>(c.n11));
      s01[static_cast<std::size_t>(idx)].add(static_cast<double>(c.n01), static_cast<double>(c.n00));
      stot[static_cast<std::size_t>(idx)].add(static_cast<double>(c.n10 + c.n01),
                                              static_cast<double>(c.n11 + c.n00));
    }
  }

  InstabilityReport report;
  report.K = K;
  BlockTransitionCounts indexer;
  indexer.K = K;
  for (int k = 1; k <= K; ++k) {
    for (int l = k; l <= K; ++l) {
      const std::size_t idx = static_cast<std::size_t>(indexer.pair_index(k, l));
      PairInstability pair;
      pair.k = k;
      pair.l = l;
      s10[idx].summarize(&pair.as_10, &pair.sd_10);
      s01[idx].summarize(&pair.as_01, &pair.sd_01);
      stot[idx].summarize(&pair.as_tot, &pair.sd_tot);
      pair.excluded_10 = s10[idx].excluded;
      pair.excluded_01 = s01[idx].excluded;
      pair.excluded_tot = stot[idx].excluded;
      report.pairs.push_back(pair);
    }
  }
  return report;
}

void write_instability_tsv(const InstabilityReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "k\tl\tas_10\tsd_10\tas_01\tsd_01\tas_tot\tsd_tot\texcl_10\texcl_01\texcl_tot\n";
  out.precision(10);
  for (const PairInstability& pair : report.pairs) {
    out << pair.k << '\t' << pair.l << '\t' << pair.as_10 << '\t' << pair.sd_10 << '\t'
        << pair.as_01 << '\t' << pair.sd_01 << '\t' << pair.as_tot << '\t' << pair.sd_tot << '\t'
        << pair.excluded_10 << '\t' << pair.excluded_01 << '\t' << pair.excluded_tot << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

double mean_relational_duration(double theta_p) {
  if (!std::isfinite(theta_p))
    throw std::invalid_argument("mean_relational_duration: theta_p must be finite");
  return 1.0 / (1.0 - logistic(theta_p));
}

}  // namespace tergmix
