#include <doctest.h>

#include <cmath>

#include "expdes/rng.hpp"
#include "expdes/synth_design.hpp"

using namespace expdes;

namespace {

constexpr double kTol = 1e-9;

void check_weight_invariants(const SynthProblem& prob, const SynthWeights& w) {
  double su = 0.0, sv = 0.0;
  int u_support = 0;
  for (int j = 0; j < prob.n(); ++j) {
    CHECK(w.u[j] >= -kTol);
    CHECK(w.v[j] >= -kTol);
    CHECK(w.u[j] * w.v[j] == 0.0);
    su += w.u[j];
    sv += w.v[j];
    if (w.u[j] > 0.0) ++u_support;
  }
  CHECK(su == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sv == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(u_support <= prob.k);
  for (int j : w.treated_set) CHECK(w.v[j] == 0.0);
}

SynthProblem random_problem(int n, int t0, int periods, int k, Rng& rng) {
  Mat y(n, periods);
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < periods; ++t) y(j, t) = rng.normal();
  return SynthProblem(PanelData(std::move(y), t0), Mat::Zero(n, 0),
                      Vec::Constant(n, 1.0 / n), k);
}

}  // namespace

TEST_CASE("targets stack pre-period outcomes over covariates") {
  Mat y(3, 4);
  y << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  Mat x(3, 1);
  x << -1, -2, -3;
  Vec f(3);
  f << 1, 0, 0;
  const SynthProblem prob(PanelData(y, 3), x, f, 1);
  const auto [z, z_bar] = build_targets(prob);
  REQUIRE(z.size() == 3);
  CHECK(z[0].size() == 4);
  CHECK(z[0][0] == 1);
  CHECK(z[0][2] == 3);
  CHECK(z[0][3] == -1);
  CHECK((z_bar - z[0]).norm() == 0.0);  // point-mass target

  // Uniform target over two identical units equals either.
  Mat y2(2, 3);
  y2 << 1, 2, 3, 1, 2, 3;
  const SynthProblem prob2(PanelData(y2, 2), Mat::Zero(2, 0), Vec::Constant(2, 0.5), 1);
  const auto [z2, z2_bar] = build_targets(prob2);
  CHECK((z2_bar - z2[0]).norm() == 0.0);
}

TEST_CASE("simplex least squares handles membership, hulls, and exteriors") {
  Vec a(2), b(2), target(2);
  a << 0, 0;
  b << 1, 0;
  target << 2, 0;
  {
    const auto [w, loss] = simplex_least_squares({a, b}, target);
    CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(loss == doctest::Approx(1.0).epsilon(1e-8));
  }
  {
    Vec c(2);
    c << 0, 1;
    const auto [w, loss] = simplex_least_squares({a, b, c}, c);
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(w[2] == doctest::Approx(1.0).epsilon(1e-6));
  }
  {
    Vec mid(2);
    mid << 0.5, 0;
    const auto [w, loss] = simplex_least_squares({a, b}, mid);
    CHECK(loss < 1e-10);
  }
  // The loss never exceeds the best single-vertex fit.
  Rng rng(79);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Vec> cols;
    for (int j = 0; j < 5; ++j) {
      Vec c(3);
      for (int i = 0; i < 3; ++i) c[i] = rng.normal();
      cols.push_back(std::move(c));
    }
    Vec t(3);
    for (int i = 0; i < 3; ++i) t[i] = rng.normal();
    const auto [w, loss] = simplex_least_squares(cols, t);
    for (const Vec& c : cols) CHECK(loss <= (c - t).squaredNorm() + 1e-9);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  }
  CHECK_THROWS_WITH_AS(simplex_least_squares({}, target),
                       "simplex_least_squares: empty column set", std::invalid_argument);
}

TEST_CASE("synthetic design search satisfies its invariants") {
  // Unit 1 matches the target exactly.
  Mat y(4, 5);
  y << 1, 2, 3, 4, 0, 9, 9, 9, 9, 0, -7, -7, -7, -7, 0, 1, 5, 2, 8, 0;
  Vec f(4);
  f << 1, 0, 0, 0;
  const SynthProblem prob(PanelData(y, 4), Mat::Zero(4, 0), f, 1);
  const auto res = solve_synth_design(prob, SynthMode::Exhaustive);
  check_weight_invariants(prob, res);
  CHECK(res.treated_set == std::vector<int>({0}));
  CHECK(res.u[0] == doctest::Approx(1.0).epsilon(1e-9));

  // Exhaustive never loses to greedy, and both satisfy the invariants.
  Rng rng(83);
  for (int rep = 0; rep < 25; ++rep) {
    const SynthProblem p = random_problem(4 + static_cast<int>(rng.uniform_int(5)), 4, 6,
                                          1 + static_cast<int>(rng.uniform_int(3)), rng);
    const auto ex = solve_synth_design(p, SynthMode::Exhaustive);
    const auto gr = solve_synth_design(p, SynthMode::Greedy);
    check_weight_invariants(p, ex);
    check_weight_invariants(p, gr);
    CHECK(ex.fit_loss <= gr.fit_loss + 1e-9);
    // Greedy is at least as good as the best single-unit support it scanned.
    const auto single =
        solve_synth_design(SynthProblem(p.panel, p.x, p.f, 1), SynthMode::Exhaustive);
    CHECK(gr.fit_loss <= single.fit_loss + 1e-9);
  }
}

TEST_CASE("two-unit search matches the hand enumeration") {
  Mat y(2, 3);
  y << 1, 1, 0, 4, 4, 0;
  Vec f(2);
  f << 0.5, 0.5;  // z_bar = (2.5, 2.5)
  const SynthProblem prob(PanelData(y, 2), Mat::Zero(2, 0), f, 1);
  const auto res = solve_synth_design(prob, SynthMode::Exhaustive);
  // Either support gives u-loss + v-loss = 2 * (1.5^2 + 1.5^2) = 9; the first
  // support in lexicographic order wins the tie.
  CHECK(res.treated_set == std::vector<int>({0}));
  CHECK(res.fit_loss == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("theorem 4 bound arithmetic") {
  Theorem4Params p{1.0, 1.0, 1, 2, 1.0, 0.1, 1.0, 100, 50};
  CHECK(theorem4_bound(p) ==
        doctest::Approx(1.0 + 0.2 * std::sqrt(2.0 * std::log(100.0))).epsilon(1e-12));
  Theorem4Params zero = p;
  zero.c = 0.0;
  zero.sigma_bar = 0.0;
  CHECK(theorem4_bound(zero) == doctest::Approx(0.0).epsilon(1e-14));
  Theorem4Params noisy = p;
  noisy.c = 0.0;
  Theorem4Params noisy2 = noisy;
  noisy2.t0 = 200;
  CHECK(theorem4_bound(noisy2) ==
        doctest::Approx(theorem4_bound(noisy) / std::sqrt(2.0)).epsilon(1e-12));
  Theorem4Params bad = p;
  bad.zeta_lower = 0.0;
  CHECK_THROWS_AS(theorem4_bound(bad), std::invalid_argument);
}

TEST_CASE("fit constants from solved weights") {
  // Zero-loss fixture.
  Mat y(3, 3);
  y << 1, 2, 0, 1, 2, 0, 5, 5, 0;
  Vec f(3);
  f << 1, 0, 0;
  const SynthProblem prob(PanelData(y, 2), Mat::Zero(3, 0), f, 1);
  SynthWeights w;
  w.u = Vec::Zero(3);
  w.u[1] = 1.0;  // unit 2 duplicates the target unit
  w.v = Vec::Zero(3);
  w.v[0] = 1.0;
  w.treated_set = {1};
  w.fit_loss = 0.0;
  const auto [c_cov, c_out] = check_fit_constants(prob, w);
  CHECK(c_cov == 0.0);
  CHECK(c_out == doctest::Approx(0.0).epsilon(1e-12));

  // Known residual: v = unit 3 misses the target by (4,3), norm^2 = 25,
  // T0 = 2 -> c_out = sqrt(25/2).
  SynthWeights w2 = w;
  w2.v = Vec::Zero(3);
  w2.v[2] = 1.0;
  const auto [c2_cov, c2_out] = check_fit_constants(prob, w2);
  CHECK(c2_out == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
}
