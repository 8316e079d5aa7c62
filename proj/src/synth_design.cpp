#include "expdes/synth_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "expdes/exact_oracle.hpp"

namespace expdes {
namespace {

constexpr double kSimplexTol = 1e-9;
constexpr long long kExhaustiveCap = 100'000;

long long binom(int n, int k) {
  long double c = 1.0L;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return static_cast<long long>(c + 0.5L);
}

}  // namespace

SynthProblem::SynthProblem(PanelData panel_in, Mat x_in, Vec f_in, int k_in)
    : panel(std::move(panel_in)), x(std::move(x_in)), f(std::move(f_in)), k(k_in) {
  const int units = n();
  if (x.rows() != units && !(x.size() == 0 && x.cols() == 0))
    throw std::invalid_argument("SynthProblem: covariate row count mismatch");
  if (x.size() == 0) x = Mat::Zero(units, 0);
  if (!x.allFinite()) throw std::invalid_argument("SynthProblem: non-finite covariate");
  if (f.size() != units) throw std::invalid_argument("SynthProblem: f length mismatch");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (f[j] < -kSimplexTol) throw std::invalid_argument("SynthProblem: f has a negative entry");
    sum += f[j];
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw std::invalid_argument("SynthProblem: f must sum to 1");
  if (k < 1 || k > units - 1) throw std::invalid_argument("SynthProblem: require 1 <= k <= n-1");
}

std::pair<std::vector<Vec>, Vec> build_targets(const SynthProblem& prob) {
  const int t0 = prob.panel.t0, d = prob.d();
  std::vector<Vec> z(prob.n());
  Vec z_bar = Vec::Zero(t0 + d);
  for (int j = 0; j < prob.n(); ++j) {
    z[j].resize(t0 + d);
    z[j].head(t0) = prob.panel.outcomes.row(j).head(t0);
    if (d > 0) z[j].tail(d) = prob.x.row(j);
    z_bar += prob.f[j] * z[j];
  }
  return {std::move(z), std::move(z_bar)};
}

std::pair<Vec, double> simplex_least_squares(const std::vector<Vec>& columns, const Vec& target) {
  const int m = static_cast<int>(columns.size());
  if (m == 0) throw std::invalid_argument("simplex_least_squares: empty column set");
  for (const Vec& c : columns) {
    if (c.size() != target.size())
      throw std::invalid_argument("simplex_least_squares: column length mismatch");
  }
  Vec w = Vec::Constant(m, 1.0 / m);
  Vec fit = Vec::Zero(target.size());
  for (int j = 0; j < m; ++j) fit += w[j] * columns[j];
  for (int iter = 0; iter < kFwMaxIter; ++iter) {
    const Vec resid = fit - target;
    // grad_j = 2 columns[j] . resid; the FW vertex is the argmin coordinate.
    int best = 0;
    double best_grad = 2.0 * columns[0].dot(resid);
    double wdotgrad = w[0] * best_grad;
    for (int j = 1; j < m; ++j) {
      const double gj = 2.0 * columns[j].dot(resid);
      wdotgrad += w[j] * gj;
      if (gj < best_grad) {
        best_grad = gj;
        best = j;
      }
    }
    const double gap = wdotgrad - best_grad;  // grad . (w - e_best)
    if (gap <= kFwGapTol) break;
    const Vec cd = columns[best] - fit;  // C (e_best - w)
    const double cd_sq = cd.squaredNorm();
    double gamma = cd_sq > 0.0 ? gap / (2.0 * cd_sq) : 1.0;
    if (gamma > 1.0) gamma = 1.0;
    w *= 1.0 - gamma;
    w[best] += gamma;
    fit += gamma * cd;
  }
  return {std::move(w), (fit - target).squaredNorm()};
}

namespace {

struct SupportFit {
  Vec u;  // length n, supported on the subset
  Vec v;  // length n, supported off the subset
  double loss;
};

SupportFit fit_support(const std::vector<Vec>& z, const Vec& z_bar, const std::vector<int>& s) {
  const int n = static_cast<int>(z.size());
  std::vector<char> in(n, 0);
  for (int j : s) in[j] = 1;
  std::vector<Vec> cols_in, cols_out;
  std::vector<int> idx_out;
  for (int j = 0; j < n; ++j) {
    if (in[j]) cols_in.push_back(z[j]);
    else {
      cols_out.push_back(z[j]);
      idx_out.push_back(j);
    }
  }
  const auto [wu, lu] = simplex_least_squares(cols_in, z_bar);
  const auto [wv, lv] = simplex_least_squares(cols_out, z_bar);
  SupportFit out;
  out.u = Vec::Zero(n);
  out.v = Vec::Zero(n);
  for (std::size_t i = 0; i < s.size(); ++i) out.u[s[i]] = wu[static_cast<int>(i)];
  for (std::size_t i = 0; i < idx_out.size(); ++i) out.v[idx_out[i]] = wv[static_cast<int>(i)];
  out.loss = lu + lv;
  return out;
}

}  // namespace

SynthWeights solve_synth_design(const SynthProblem& prob, SynthMode mode) {
  const auto [z, z_bar] = build_targets(prob);
  const int n = prob.n();
  std::vector<int> best_s;
  SupportFit best_fit;
  best_fit.loss = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<int>& s) {
    SupportFit fit = fit_support(z, z_bar, s);
    if (fit.loss < best_fit.loss - 1e-15) {
      best_fit = std::move(fit);
      best_s = s;
    }
  };
  if (mode == SynthMode::Exhaustive) {
    long long total = 0;
    for (int sz = 1; sz <= prob.k; ++sz) total += binom(n, sz);
    if (total > kExhaustiveCap)
      throw std::invalid_argument("solve_synth_design: support count exceeds the cap of 1e5");
    for (int sz = 1; sz <= prob.k; ++sz)
      for_each_k_subset(n, sz, consider);
  } else {
    std::vector<int> s;
    std::vector<char> in(n, 0);
    for (int sz = 1; sz <= prob.k; ++sz) {
      if (static_cast<int>(s.size()) == n - 1) break;  // v needs a nonempty complement
      int pick = -1;
      double pick_loss = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (in[j]) continue;
        s.push_back(j);
        std::sort(s.begin(), s.end());
        const double loss = fit_support(z, z_bar, s).loss;
        s.erase(std::find(s.begin(), s.end(), j));
        if (loss < pick_loss - 1e-15) {
          pick_loss = loss;
          pick = j;
        }
      }
      s.push_back(pick);
      std::sort(s.begin(), s.end());
      in[pick] = 1;
      consider(s);  // the cardinality constraint is an inequality
    }
    // 1-exchange refinement of the best support found.
    s = best_s;
    std::fill(in.begin(), in.end(), 0);
    for (int j : s) in[j] = 1;
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i < s.size() && !improved; ++i) {
        for (int j = 0; j < n && !improved; ++j) {
          if (in[j]) continue;
          std::vector<int> cand = s;
          cand[i] = j;
          std::sort(cand.begin(), cand.end());
          const double loss = fit_support(z, z_bar, cand).loss;
          if (loss < best_fit.loss - 1e-15) {
            in[s[i]] = 0;
            in[j] = 1;
            s = cand;
            consider(s);
            improved = true;
          }
        }
      }
    }
  }
  SynthWeights out;
  out.u = std::move(best_fit.u);
  out.v = std::move(best_fit.v);
  out.treated_set = std::move(best_s);
  out.fit_loss = best_fit.loss;
  return out;
}

double theorem4_bound(const Theorem4Params& p) {
  if (!(p.zeta_lower > 0.0)) throw std::invalid_argument("theorem4_bound: zeta_lower must be positive");
  if (p.r > p.t0) throw std::invalid_argument("theorem4_bound: require r <= T0");
  if (p.beta_bar < 0.0 || p.lambda_bar < 0.0 || p.c < 0.0 || p.sigma_bar < 0.0)
    throw std::invalid_argument("theorem4_bound: negative parameter");
  const double ratio = p.lambda_bar * p.lambda_bar * p.r / p.zeta_lower;
  const double bd = p.beta_bar * p.d;
  return 2.0 * (bd + (1.0 + bd) * ratio) * p.c +
         2.0 * ratio * std::sqrt(2.0 * std::log(2.0 * p.n)) * p.sigma_bar / std::sqrt(p.t0);
}

std::pair<double, double> check_fit_constants(const SynthProblem& prob, const SynthWeights& w) {
  const auto [z, z_bar] = build_targets(prob);
  const int t0 = prob.panel.t0, d = prob.d();
  auto misfit = [&](const Vec& weights) -> Vec {
    Vec fit = Vec::Zero(t0 + d);
    for (int j = 0; j < prob.n(); ++j) fit += weights[j] * z[j];
    return fit - z_bar;
  };
  const Vec mu = misfit(w.u), mv = misfit(w.v);
  double c_cov = 0.0;
  if (d > 0) {
    c_cov = std::sqrt(std::max(mu.tail(d).squaredNorm(), mv.tail(d).squaredNorm()) / d);
  }
  const double c_out =
      std::sqrt(std::max(mu.head(t0).squaredNorm(), mv.head(t0).squaredNorm()) / t0);
  return {c_cov, c_out};
}

}  // namespace expdes
