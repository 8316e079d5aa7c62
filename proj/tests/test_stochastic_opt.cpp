#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "expdes/designs_estimators.hpp"
#include "expdes/exact_oracle.hpp"
#include "expdes/rng.hpp"
#include "expdes/stochastic_opt.hpp"

using namespace expdes;

namespace {

Vec random_baselines(int n, Rng& rng) {
  Vec g(n);
  for (int j = 0; j < n; ++j) g[j] = 10.0 * rng.uniform() - 5.0;
  return g;
}

}  // namespace

TEST_CASE("stratified covariance matrix blocks") {
  const Mat v6 = stratified_cov_matrix(StrataPartition(6, {{0, 1, 2, 3, 4, 5}}));
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j) CHECK(v6(i, j) == 0.25);
      else CHECK(v6(i, j) == -1.0 / 20.0);
    }
  }
  const Mat vp = stratified_cov_matrix(StrataPartition(4, {{0, 1}, {2, 3}}));
  CHECK(vp(0, 1) == -0.25);
  CHECK(vp(2, 3) == -0.25);
  CHECK(vp(0, 2) == 0.0);
  CHECK(vp(1, 3) == 0.0);
  // Rows of each block sum to zero (up to accumulation of 1/20 terms).
  for (int i = 0; i < 6; ++i) CHECK(std::abs(v6.row(i).sum()) < 1e-15);
  CHECK_THROWS_WITH_AS(stratified_cov_matrix(StrataPartition(3, {{0, 1, 2}})),
                       "stratified_cov_matrix: odd-size stratum", std::invalid_argument);
}

TEST_CASE("pairing objective closed form and matrix path agree") {
  Vec g(4);
  g << 10, 8, 6, 4;
  const BaselineVector b(g);
  CHECK(pairing_objective(b, StrataPartition(4, {{0, 1}, {2, 3}})) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(pairing_objective(b, StrataPartition(4, {{0, 3}, {1, 2}})) ==
        doctest::Approx(10.0).epsilon(1e-14));
  CHECK(pairing_objective(BaselineVector(Vec::Constant(6, 3.3)),
                          StrataPartition(6, {{0, 1, 2, 3}, {4, 5}})) ==
        doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 8;
    const BaselineVector gb(random_baselines(n, rng));
    const StrataPartition p(n, {{0, 5}, {1, 2, 3, 4}, {6, 7}});
    const Mat v = stratified_cov_matrix(p);
    Vec gv = gb.g;
    const double quad = gv.dot(v * gv);
    CHECK(pairing_objective(gb, p) == doctest::Approx(quad).epsilon(1e-10));
  }
}

TEST_CASE("sort-and-pair is optimal over all pairings and even partitions") {
  {
    Vec g(4);
    g << 4, 10, 2, 8;
    const auto res = optimal_matched_pairs(BaselineVector(g));
    CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(res.partition.strata[0] == std::vector<int>({1, 3}));
    CHECK(res.partition.strata[1] == std::vector<int>({0, 2}));
  }
  {
    const auto res = optimal_matched_pairs(BaselineVector(Vec::Constant(4, 1.0)));
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(res.partition.strata[0] == std::vector<int>({0, 1}));
    CHECK(res.partition.strata[1] == std::vector<int>({2, 3}));
  }
  CHECK_THROWS_WITH_AS(optimal_matched_pairs(BaselineVector(Vec::Zero(3))),
                       "optimal_matched_pairs: requires even n", std::invalid_argument);

  Rng rng(37);
  for (int n : {4, 6, 8}) {
    const auto pairings = enumerate_pairings(n);
    for (int rep = 0; rep < 100; ++rep) {
      const BaselineVector g(random_baselines(n, rng));
      const auto res = optimal_matched_pairs(g);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pairings) best = std::min(best, pairing_objective(g, p));
      CHECK(res.objective == doctest::Approx(best).epsilon(1e-10));
    }
  }
  for (int n : {4, 6}) {
    const auto partitions = enumerate_even_partitions(n);
    for (int rep = 0; rep < 50; ++rep) {
      const BaselineVector g(random_baselines(n, rng));
      const auto res = optimal_matched_pairs(g);
      for (const auto& p : partitions)
        CHECK(res.objective <= pairing_objective(g, p) + 1e-10);
    }
  }
}

TEST_CASE("exchange inequality for sorted quadruples") {
  Rng rng(41);
  for (int rep = 0; rep < 200; ++rep) {
    double g[4];
    for (double& v : g) v = 10.0 * rng.uniform() - 5.0;
    std::sort(g, g + 4, std::greater<double>());
    const double outer = (g[0] - g[3]) * (g[0] - g[3]) + (g[1] - g[2]) * (g[1] - g[2]);
    const double adjacent = (g[0] - g[1]) * (g[0] - g[1]) + (g[2] - g[3]) * (g[2] - g[3]);
    CHECK(outer >= adjacent - 1e-12);
  }
}

TEST_CASE("pairwise double-sum form is exactly twice the quadratic form") {
  Rng rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 6;
    const BaselineVector g(random_baselines(n, rng));
    const StrataPartition p(n, {{0, 1}, {2, 3, 4, 5}});
    double double_sum = 0.0;
    for (const auto& s : p.strata) {
      const double sl = static_cast<double>(s.size());
      for (int i : s) {
        for (int j : s) {
          if (i != j)
            double_sum += 0.25 * (g.g[i] - g.g[j]) * (g.g[i] - g.g[j]) / (sl - 1.0);
        }
      }
    }
    CHECK(double_sum == doctest::Approx(2.0 * pairing_objective(g, p)).epsilon(1e-10));
  }
}

TEST_CASE("bias variance decomposition identity") {
  auto [mse0, var0, bias0] = bias_variance_decompose({1.0, 1.0, 1.0}, 1.0);
  CHECK(mse0 == 0.0);
  CHECK(var0 == 0.0);
  CHECK(bias0 == 0.0);
  auto [mse1, var1, bias1] = bias_variance_decompose({0.0, 2.0}, 1.0);
  CHECK(mse1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(var1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bias1 == doctest::Approx(0.0).epsilon(1e-14));
  auto [mse2, var2, bias2] = bias_variance_decompose({2.0, 2.0}, 1.0);
  CHECK(mse2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(var2 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bias2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(bias_variance_decompose({1.0}, 0.0), std::invalid_argument);

  Rng rng(47);
  std::vector<double> samples(100);
  for (double& s : samples) s = rng.normal();
  auto [mse, var, bias_sq] = bias_variance_decompose(samples, 0.3);
  CHECK(mse == doctest::Approx(var + bias_sq).epsilon(1e-10));
}

TEST_CASE("exact dm mse across pairings differs only through the quadratic form") {
  // Deterministic two-point conditional model at n = 4: y_j(w) are constants,
  // so the exact MSE around tau equals (4/n^2) g' V g plus terms common to
  // every pairing, with g_j = y_j(1) + y_j(0).
  Vec y1(4), y0(4);
  y1 << 5, 1, 3, 2;
  y0 << 1, 3, 1, 0;
  const ScienceTable t(y1, y0);
  const Vec g = y1 + y0;
  const double tau = sample_ate(t);
  auto paired_design = [&](const StrataPartition& p) {
    std::vector<DesignSpec> inner;
    for (const auto& s : p.strata)
      inner.emplace_back(CrdDesign{static_cast<int>(s.size()), static_cast<int>(s.size()) / 2});
    return DesignSpec(StratifiedDesign{p, std::move(inner)});
  };
  auto exact_mse = [&](const StrataPartition& p) {
    return exact_risk(paired_design(p), [&](const AssignmentVector& w) {
      Vec y_obs(4);
      for (int j = 0; j < 4; ++j) y_obs[j] = w.w[j] ? t.y1[j] : t.y0[j];
      const double e = dm_estimate(y_obs, w) - tau;
      return e * e;
    });
  };
  const auto pairings = enumerate_pairings(4);
  const BaselineVector gb(g);
  for (std::size_t a = 0; a < pairings.size(); ++a) {
    for (std::size_t b = a + 1; b < pairings.size(); ++b) {
      const double mse_gap = exact_mse(pairings[a]) - exact_mse(pairings[b]);
      const double quad_gap = (4.0 / 16.0) * (pairing_objective(gb, pairings[a]) -
                                              pairing_objective(gb, pairings[b]));
      CHECK(mse_gap == doctest::Approx(quad_gap).epsilon(1e-10));
    }
  }
}
