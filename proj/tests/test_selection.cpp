#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tergmix/selection.hpp"
#include "tergmix/simulate.hpp"
#include "test_util.hpp"

using namespace tergmix;

namespace {

// time-t term of cl, evaluated through an independent two-snapshot series
double per_time_cl(const NetworkSeries& series, const ModelSpec& spec,
                   const Eigen::MatrixXd& theta, const std::vector<int>& z, int t) {
  NetworkSeries window;
  window.snapshots.push_back(series.snapshots[static_cast<std::size_t>(t) - 1]);
  window.snapshots.push_back(series.snapshots[static_cast<std::size_t>(t)]);
  return conditional_loglik(window, spec, theta, z);
}

std::vector<int> random_labels(int n, int K, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.below(K));
  return z;
}

}  // namespace

TEST_CASE("conditional_loglik equals the per-dyad sum") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Rng rng(seed * 7);
    const ModelKind kind = seed % 2 == 0 ? ModelKind::stergm_fp : ModelKind::tergm_stability;
    const ModelSpec spec{kind, 2};
    const NetworkSeries series = testutil::random_series(6, 3, 0.4, seed);
    const std::vector<int> z = random_labels(6, 2, seed + 5);
    const Params params = testutil::random_params(spec, rng);

    double direct = 0.0;
    for (int t = 1; t <= series.transitions(); ++t)
      direct += testutil::transition_logprob_given_z(
          series.snapshots[static_cast<std::size_t>(t) - 1],
          series.snapshots[static_cast<std::size_t>(t)], spec, params.theta, z);
    CHECK(conditional_loglik(series, spec, params.theta, z) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("conditional_loglik approaches zero for a frozen series at large theta") {
  NetworkSeries series = testutil::random_series(8, 1, 0.4, 12);
  series.snapshots.push_back(series.snapshots[1]);
  series.snapshots.push_back(series.snapshots[1]);
  // transitions 2 and 3 are perfectly stable; drop the random first one
  NetworkSeries frozen;
  frozen.snapshots = {series.snapshots[1], series.snapshots[2], series.snapshots[3]};

  const ModelSpec spec{ModelKind::tergm_stability, 1};
  const double cl =
      conditional_loglik(frozen, spec, Eigen::MatrixXd::Constant(1, 1, 15.0), std::vector<int>(8, 1));
  CHECK(cl < 0.0);
  CHECK(cl > -1e-6);
}

TEST_CASE("conditional_loglik is invariant under relabeling") {
  Rng rng(3);
  const ModelSpec spec{ModelKind::tergm_stability, 3};
  const NetworkSeries series = testutil::random_series(9, 2, 0.45, 8);
  const std::vector<int> z = random_labels(9, 3, 2);
  const Params params = testutil::random_params(spec, rng);

  // permutation 1->3, 2->1, 3->2 applied to labels and theta rows
  std::vector<int> zp(z.size());
  const int map[4] = {0, 3, 1, 2};
  for (std::size_t i = 0; i < z.size(); ++i) zp[i] = map[z[i]];
  Eigen::MatrixXd thetap(3, 1);
  thetap.row(2) = params.theta.row(0);
  thetap.row(0) = params.theta.row(1);
  thetap.row(1) = params.theta.row(2);

  CHECK(conditional_loglik(series, spec, params.theta, z) ==
        doctest::Approx(conditional_loglik(series, spec, thetap, zp)).epsilon(1e-12));
}

TEST_CASE("conditional_mle closed form at K=1 and gradient at optimum") {
  const NetworkSeries series = testutil::random_series(10, 3, 0.4, 50);
  const ModelSpec spec{ModelKind::tergm_stability, 1};
  const MleResult mle = conditional_mle(series, spec, std::vector<int>(10, 1));

  const BlockTransitionCounts counts = transition_tallies(series, std::vector<int>(10, 1), 1);
  const auto& cell = counts.cells[0];
  const double fraction =
      static_cast<double>(cell.n00 + cell.n11) / static_cast<double>(cell.total());
  CHECK(mle.theta(0, 0) == doctest::Approx(0.5 * logit(fraction)).epsilon(1e-8));
  CHECK_FALSE(mle.diverged);
  CHECK(mle.grad_inf_norm < 1e-8);
}

TEST_CASE("conditional_mle flags separation and clips") {
  // perfectly stable series: the stability MLE runs away
  NetworkSeries series;
  series.snapshots.assign(3, Snapshot(5));
  for (auto& snap : series.snapshots) {
    snap.add_edge(0, 1);
    snap.add_edge(2, 3);
    snap.finalize();
  }
  const ModelSpec spec{ModelKind::tergm_stability, 1};
  const MleResult mle = conditional_mle(series, spec, std::vector<int>(5, 1));
  CHECK(mle.diverged);
  CHECK(std::abs(mle.theta(0, 0)) == doctest::Approx(15.0));
}

TEST_CASE("conditional_mle agrees with mstep_theta at one-hot responsibilities") {
  const MixtureSimConfig config = std::get<MixtureSimConfig>(model_preset("model1", 31));
  const SimResult sim = simulate_mixture(config);
  const ModelSpec spec = config.spec;

  const MleResult mle = conditional_mle(sim.series, spec, sim.z);

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Constant(config.n, 2, 1e-10);
  for (int i = 0; i < config.n; ++i) gamma(i, sim.z[static_cast<std::size_t>(i)] - 1) = 1.0;
  for (int i = 0; i < config.n; ++i) gamma.row(i) /= gamma.row(i).sum();
  FitConfig fc;
  const Eigen::MatrixXd theta =
      mstep_theta(sim.series, spec, gamma, Eigen::MatrixXd::Zero(2, 1), fc);

  CHECK(mle.theta(0, 0) == doctest::Approx(theta(0, 0)).epsilon(1e-5));
  CHECK(mle.theta(1, 0) == doctest::Approx(theta(1, 0)).epsilon(1e-5));
}

TEST_CASE("sandwich complexity approximates the free-parameter count") {
  double total_tergm = 0.0, total_stergm = 0.0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    {
      const MixtureSimConfig config =
          std::get<MixtureSimConfig>(model_preset("model1", 100 + static_cast<unsigned>(rep)));
      const SimResult sim = simulate_mixture(config);
      const MleResult mle = conditional_mle(sim.series, config.spec, sim.z);
      const ComplexityResult c = clbic_complexity(sim.series, config.spec, mle.theta, sim.z);
      CHECK_FALSE(c.hess_singular);
      CHECK(c.d_k >= 0.0);
      total_tergm += c.d_k;
    }
    {
      const MixtureSimConfig config =
          std::get<MixtureSimConfig>(model_preset("model3", 200 + static_cast<unsigned>(rep)));
      const SimResult sim = simulate_mixture(config);
      const MleResult mle = conditional_mle(sim.series, config.spec, sim.z);
      const ComplexityResult c = clbic_complexity(sim.series, config.spec, mle.theta, sim.z);
      total_stergm += c.d_k;
    }
  }
  CHECK(total_tergm / reps == doctest::Approx(2.0).epsilon(0.3));
  CHECK(total_stergm / reps == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("complexity matches finite differences of cl") {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const ModelKind kind = seed % 2 == 0 ? ModelKind::stergm_fp : ModelKind::tergm_stability;
    const ModelSpec spec{kind, 2};
    const NetworkSeries series = testutil::random_series(12, 4, 0.45, seed + 60);
    const std::vector<int> z = random_labels(12, 2, seed);
    const MleResult mle = conditional_mle(series, spec, z);
    const int dim = spec.K * spec.p();

    const double h = 1e-5;
    auto theta_shift = [&](int idx, double delta) {
      Eigen::MatrixXd t = mle.theta;
      t(idx % spec.K, idx / spec.K) += delta;
      return t;
    };

    // H by central second differences of cl
    Eigen::MatrixXd h_fd(dim, dim);
    const double f0 = conditional_loglik(series, spec, mle.theta, z);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        double fpp, fpm, fmp, fmm;
        auto at = [&](double da, double db) {
          Eigen::MatrixXd t = mle.theta;
          t(a % spec.K, a / spec.K) += da;
          t(b % spec.K, b / spec.K) += db;
          return conditional_loglik(series, spec, t, z);
        };
        fpp = at(h, h);
        fpm = at(h, -h);
        fmp = at(-h, h);
        fmm = at(-h, -h);
        h_fd(a, b) = -(fpp - fpm - fmp + fmm) / (4.0 * h * h);
      }
    }
    (void)f0;

    // per-time scores by central differences
    Eigen::MatrixXd v_fd = Eigen::MatrixXd::Zero(dim, dim);
    for (int t = 1; t <= series.transitions(); ++t) {
      Eigen::VectorXd u(dim);
      for (int a = 0; a < dim; ++a) {
        u(a) = (per_time_cl(series, spec, theta_shift(a, h), z, t) -
                per_time_cl(series, spec, theta_shift(a, -h), z, t)) /
               (2.0 * h);
      }
      v_fd.noalias() += u * u.transpose();
    }

    const double d_fd = Eigen::LDLT<Eigen::MatrixXd>(h_fd).solve(v_fd).trace();
    const ComplexityResult c = clbic_complexity(series, spec, mle.theta, z);
    CHECK(c.d_k == doctest::Approx(d_fd).epsilon(1e-3));
  }
}

TEST_CASE("T=1 score vanishes at the MLE so the complexity collapses") {
  const NetworkSeries series = testutil::random_series(10, 1, 0.4, 17);
  const ModelSpec spec{ModelKind::tergm_stability, 2};
  const std::vector<int> z = random_labels(10, 2, 4);
  const MleResult mle = conditional_mle(series, spec, z);
  REQUIRE_FALSE(mle.diverged);
  const ComplexityResult c = clbic_complexity(series, spec, mle.theta, z);
  CHECK(std::abs(c.d_k) < 1e-8);  // V = u1 u1' with u1 = grad cl = 0
}

TEST_CASE("cl_bic formula and penalty multiplier") {
  CHECK(std::log(10.0 * 100.0 * 99.0 / 2.0) == doctest::Approx(10.809).epsilon(1e-4));

  const NetworkSeries series = testutil::random_series(8, 2, 0.4, 5);
  const ModelSpec spec{ModelKind::tergm_stability, 2};
  const std::vector<int> z = random_labels(8, 2, 9);
  const MleResult mle = conditional_mle(series, spec, z);
  const double cl = conditional_loglik(series, spec, mle.theta, z);
  const ComplexityResult c = clbic_complexity(series, spec, mle.theta, z);
  const double m = 2.0 * dyad_count(8);
  CHECK(cl_bic(series, spec, z, mle.theta) ==
        doctest::Approx(-2.0 * cl + c.d_k * std::log(m)).epsilon(1e-12));
}

TEST_CASE("CL-BIC penalizes a duplicated community") {
  const MixtureSimConfig config = std::get<MixtureSimConfig>(model_preset("model1", 55));
  const SimResult sim = simulate_mixture(config);

  const ModelSpec spec2{ModelKind::tergm_stability, 2};
  const MleResult mle2 = conditional_mle(sim.series, spec2, sim.z);
  const double bic2 = cl_bic(sim.series, spec2, sim.z, mle2.theta);

  // split community 1 into labels 1 and 3
  const ModelSpec spec3{ModelKind::tergm_stability, 3};
  std::vector<int> z3 = sim.z;
  bool toggle = false;
  for (auto& zi : z3) {
    if (zi == 1) {
      if (toggle) zi = 3;
      toggle = !toggle;
    }
  }
  const MleResult mle3 = conditional_mle(sim.series, spec3, z3);
  const double cl2 = conditional_loglik(sim.series, spec2, mle2.theta, sim.z);
  const double cl3 = conditional_loglik(sim.series, spec3, mle3.theta, z3);
  CHECK(cl3 >= cl2 - 1e-6);
  CHECK(cl_bic(sim.series, spec3, z3, mle3.theta) > bic2);
}

TEST_CASE("icl identities") {
  const NetworkSeries series = testutil::random_series(9, 3, 0.4, 23);
  const double logm = std::log(3.0 * dyad_count(9));

  const ModelSpec spec2{ModelKind::tergm_stability, 2};
  const std::vector<int> z2 = random_labels(9, 2, 1);
  const MleResult mle2 = conditional_mle(series, spec2, z2);
  const double cl2 = conditional_loglik(series, spec2, mle2.theta, z2);
  CHECK(icl(series, spec2, z2, mle2.theta) == doctest::Approx(cl2 - 2.0 * logm).epsilon(1e-12));

  const ModelSpec spec3{ModelKind::tergm_stability, 3};
  const std::vector<int> z3 = random_labels(9, 3, 2);
  const MleResult mle3 = conditional_mle(series, spec3, z3);
  const double cl3 = conditional_loglik(series, spec3, mle3.theta, z3);
  // ICL_K - ICL_{K+1} = cl_K - cl_{K+1} + log(sample size) for the stability model
  CHECK(icl(series, spec2, z2, mle2.theta) - icl(series, spec3, z3, mle3.theta) ==
        doctest::Approx(cl2 - cl3 + logm).epsilon(1e-10));

  // stergm penalizes per free parameter, 2K of them
  const ModelSpec sspec{ModelKind::stergm_fp, 2};
  const MleResult smle = conditional_mle(series, sspec, z2);
  const double scl = conditional_loglik(series, sspec, smle.theta, z2);
  CHECK(icl(series, sspec, z2, smle.theta) == doctest::Approx(scl - 4.0 * logm).epsilon(1e-12));
}

TEST_CASE("T=1, K=1 reduces to the cross-sectional criterion") {
  const NetworkSeries series = testutil::random_series(10, 1, 0.35, 2);
  const ModelSpec spec{ModelKind::tergm_stability, 1};
  const std::vector<int> z(10, 1);
  const MleResult mle = conditional_mle(series, spec, z);
  const double cl = conditional_loglik(series, spec, mle.theta, z);
  CHECK(icl(series, spec, z, mle.theta) ==
        doctest::Approx(cl - std::log(static_cast<double>(dyad_count(10)))).epsilon(1e-12));
}

TEST_CASE("criteria are invariant under community relabeling") {
  const NetworkSeries series = testutil::random_series(9, 2, 0.45, 31);
  const ModelSpec spec{ModelKind::tergm_stability, 2};
  const std::vector<int> z = random_labels(9, 2, 3);
  const MleResult mle = conditional_mle(series, spec, z);

  std::vector<int> zswap(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) zswap[i] = z[i] == 1 ? 2 : 1;
  Eigen::MatrixXd theta_swap(2, 1);
  theta_swap << mle.theta(1, 0), mle.theta(0, 0);

  CHECK(cl_bic(series, spec, z, mle.theta) ==
        doctest::Approx(cl_bic(series, spec, zswap, theta_swap)).epsilon(1e-10));
  CHECK(icl(series, spec, z, mle.theta) ==
        doctest::Approx(icl(series, spec, zswap, theta_swap)).epsilon(1e-10));
}

TEST_CASE("identifiability boundaries") {
  CHECK(identifiability_check(25, 2, 1).mixture_ok);
  CHECK_FALSE(identifiability_check(24, 2, 1).mixture_ok);
  CHECK(identifiability_check(64, 3, 1).mixture_ok);
  CHECK_FALSE(identifiability_check(63, 3, 1).mixture_ok);
  CHECK(identifiability_check(1, 1, 1).theta_ok);
  CHECK(identifiability_check(25, 2, 1).theta_ok);
  CHECK_FALSE(identifiability_check(25, 2, 2).theta_ok);
  CHECK(identifiability_check(25, 3, 2).theta_ok);
  CHECK_THROWS(identifiability_check(0, 1, 1));
}

TEST_CASE("select_k scans the range and picks K") {
  const MixtureSimConfig config = std::get<MixtureSimConfig>(model_preset("model1", 77));
  const SimResult sim = simulate_mixture(config);
  FitConfig fc;
  fc.seed = 19;
  fc.restarts = 4;
  const SelectionReport report = select_k(sim.series, ModelKind::tergm_stability, 1, 4, fc, 2);
  CHECK(report.per_k.size() == 4);
  CHECK(report.chosen_k_clbic == 2);
  CHECK(report.chosen_k_icl == 2);

  testutil::TempDir tmp("sel_tsv");
  write_selection_tsv(report, tmp.path("sel.tsv").string());
  const std::string tsv = testutil::read_file(tmp.path("sel.tsv"));
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 5);  // header + 4 rows

  const SelectionReport single = select_k(sim.series, ModelKind::tergm_stability, 1, 1, fc, 1);
  CHECK(single.per_k.size() == 1);
  CHECK(single.chosen_k_clbic == 1);
  CHECK(single.chosen_k_icl == 1);

  CHECK_THROWS(select_k(sim.series, ModelKind::tergm_stability, 2, 1, fc, 1));
}
