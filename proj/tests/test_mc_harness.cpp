#include <doctest.h>

#include <cmath>

#include "expdes/exact_oracle.hpp"
#include "expdes/mc_harness.hpp"

using namespace expdes;

TEST_CASE("noiseless draws reproduce the model equations") {
  Rng rng(89);
  {
    Vec g(3);
    g << 1, 2, 3;
    const AdditiveDgp dgp{AdditiveModelSpec(g, 0.0, 10.0, -10.0), NoiseKind::Gaussian};
    const ScienceTable t = draw_science_table(dgp, rng);
    for (int j = 0; j < 3; ++j) {
      CHECK(t.y1[j] == doctest::Approx(10.0 + g[j]).epsilon(1e-14));
      CHECK(t.y0[j] == doctest::Approx(-10.0 + g[j]).epsilon(1e-14));
    }
  }
  {
    Mat xm(3, 1);
    xm << 1, 2, 3;
    Vec beta(1);
    beta << 2.0;
    const LinearDgp dgp(1.5, beta, CovariateMatrix(xm), 0.0);
    const ScienceTable t = draw_science_table(dgp, rng);
    for (int j = 0; j < 3; ++j) CHECK(t.y1[j] - t.y0[j] == doctest::Approx(1.5).epsilon(1e-14));
  }
  {
    // alpha[0] is the control arm, alpha[1] the treated arm.
    std::array<Mat, 2> alpha{Mat::Constant(4, 1, 2.0), Mat::Constant(4, 1, -1.0)};
    std::array<Mat, 2> beta{Mat::Zero(4, 0), Mat::Zero(4, 0)};
    std::array<Mat, 2> lambda{Mat::Zero(4, 1), Mat::Zero(4, 1)};
    const FactorPanelDgp dgp(alpha, beta, lambda, Mat::Zero(2, 1), Mat::Zero(2, 0), 0.0);
    const auto [y1, y0] = draw_factor_panels(dgp, rng);
    CHECK(y1(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(y0(1, 3) == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("linear noise is shared across arms") {
  Mat xm(4, 1);
  xm << 1, 1, 1, 1;
  Vec beta(1);
  beta << 0.0;
  const LinearDgp dgp(0.7, beta, CovariateMatrix(xm), 2.0);
  Rng rng(97);
  const ScienceTable t = draw_science_table(dgp, rng);
  for (int j = 0; j < 4; ++j) CHECK(t.y1[j] - t.y0[j] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("gaussian noise moments") {
  Rng rng(101);
  const double sigma = 1.7;
  const long long n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (long long i = 0; i < n; ++i) {
    const double x = draw_noise(NoiseKind::Gaussian, sigma, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * sigma / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.01));
}

TEST_CASE("replication engine is deterministic and thread-invariant") {
  Vec g(6);
  g << 1, -2, 0.5, 3, -1, 2;
  const AdditiveDgp dgp{AdditiveModelSpec(g, 1.0, 1.0, 0.0), NoiseKind::Gaussian};
  const DesignSpec design(CrdDesign{6, 3});
  const auto a = run_replications(dgp, design, McEstimatorSpec::dm(), McEstimand::sample(),
                                  5000, 42, 1);
  const auto b = run_replications(dgp, design, McEstimatorSpec::dm(), McEstimand::sample(),
                                  5000, 42, 8);
  CHECK(a.bias == b.bias);
  CHECK(a.variance == b.variance);
  CHECK(a.mse == b.mse);
  CHECK(a.replications == b.replications);
  CHECK(a.mse == doctest::Approx(a.variance + a.bias * a.bias).epsilon(1e-9));
  CHECK(std::abs(a.bias) <= 4.0 * a.mc_standard_error);
}

TEST_CASE("degenerate replications are excluded and counted") {
  Vec g(2);
  g << 1, 2;
  const AdditiveDgp dgp{AdditiveModelSpec(g, 0.0, 1.0, 0.0), NoiseKind::Gaussian};
  const DesignSpec bern(BernoulliDesign{Vec::Constant(2, 0.5)});
  const auto rep = run_replications(dgp, bern, McEstimatorSpec::dm(), McEstimand::sample(),
                                    4000, 7, 1);
  CHECK(rep.excluded > 0);
  CHECK(rep.replications + rep.excluded == 4000);
}

TEST_CASE("sigma zero linear dgp with ols recovers tau exactly") {
  Mat xm(6, 2);
  xm << 1, 0.3, 1, -0.9, 1, 1.2, 1, 0.1, 1, -0.4, 1, 0.8;
  const CovariateMatrix x(xm);
  Vec beta(2);
  beta << 1.0, -2.0;
  const LinearDgp dgp(0.9, beta, x, 0.0);
  const auto rep = run_replications(DgpSpec(dgp), DesignSpec(CrdDesign{6, 3}),
                                    McEstimatorSpec::ols(x), McEstimand::fixed(0.9), 200, 3, 1);
  CHECK(std::abs(rep.bias) < 1e-10);
  CHECK(rep.variance < 1e-18);
}

TEST_CASE("stopping rule simulation") {
  const auto res = stopping_rule_simulation(2.0 / 3.0, 200, 5000, 13);
  CHECK(res.stop_fraction > 0.0);
  REQUIRE(res.conditional_mean.has_value());
  CHECK(*res.conditional_mean >= 2.0 / 3.0);

  const auto none = stopping_rule_simulation(1.5, 50, 100, 13);
  CHECK(none.stop_fraction == 0.0);
  CHECK(!none.conditional_mean.has_value());

  // A first draw of 1 stops immediately at mu-hat = 1; threshold 1 keeps
  // exactly those paths at the first step.
  const auto ones = stopping_rule_simulation(1.0, 1, 2000, 17);
  REQUIRE(ones.conditional_mean.has_value());
  CHECK(*ones.conditional_mean == 1.0);
  CHECK_THROWS_AS(stopping_rule_simulation(0.5, 0, 10, 1), std::invalid_argument);
}

TEST_CASE("two-stage monte carlo brackets the exact path enumeration") {
  const auto exact = two_stage_adaptive_expectation(0.5);
  const auto mc = two_stage_mc(0.5, 200'000, 23);
  CHECK(std::abs(mc.mean_mu_hat - exact.expectation) <= 4.0 * mc.se_mu_hat);
  CHECK(std::abs(mc.mean_ipw - 0.5) <= 4.0 * mc.se_ipw);
}
