#include "expdes/designs_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace expdes {
namespace {

constexpr double kSimplexTol = 1e-9;
constexpr double kCollinearTol = 1e-12;

}  // namespace

ObservedExperiment::ObservedExperiment(Vec y_obs_in, AssignmentVector w_in, DesignSpec design_in)
    : y_obs(std::move(y_obs_in)), w(std::move(w_in)), design(std::move(design_in)) {
  if (y_obs.size() != w.n() || w.n() != design.n())
    throw std::invalid_argument("ObservedExperiment: length mismatch");
}

double bernoulli_pmf(const Vec& p, const AssignmentVector& w) {
  if (p.size() != w.n()) throw std::invalid_argument("bernoulli_pmf: length mismatch");
  double out = 1.0;
  for (int j = 0; j < w.n(); ++j) {
    if (!(p[j] > 0.0 && p[j] < 1.0))
      throw std::invalid_argument("bernoulli_pmf: p_j must lie strictly in (0,1)");
    out *= w.w[j] ? p[j] : 1.0 - p[j];
  }
  return out;
}

double crd_pmf(int n, int n1, const AssignmentVector& w) {
  if (n1 < 1 || n1 > n - 1) throw std::invalid_argument("crd_pmf: require 1 <= n1 <= n-1");
  if (w.n() != n) throw std::invalid_argument("crd_pmf: length mismatch");
  if (w.n1() != n1) return 0.0;
  long double c = 1.0L;
  for (int i = 0; i < n1; ++i) c = c * (n - i) / (i + 1);
  return static_cast<double>(1.0L / c);
}

AssignmentVector sample_assignment(const DesignSpec& d, Rng& rng) {
  return std::visit(
      [&rng](const auto& spec) -> AssignmentVector {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, BernoulliDesign>) {
          std::vector<std::uint8_t> w(spec.p.size());
          for (Eigen::Index j = 0; j < spec.p.size(); ++j) w[j] = rng.bernoulli(spec.p[j]) ? 1 : 0;
          return AssignmentVector(std::move(w));
        } else if constexpr (std::is_same_v<T, CrdDesign>) {
          std::vector<int> idx(spec.n);
          std::iota(idx.begin(), idx.end(), 0);
          // Partial Fisher-Yates: the first n1 slots become the treated set.
          for (int i = 0; i < spec.n1; ++i) {
            const int j = i + static_cast<int>(rng.uniform_int(spec.n - i));
            std::swap(idx[i], idx[j]);
          }
          std::vector<std::uint8_t> w(spec.n, 0);
          for (int i = 0; i < spec.n1; ++i) w[idx[i]] = 1;
          return AssignmentVector(std::move(w));
        } else if constexpr (std::is_same_v<T, StratifiedDesign>) {
          std::vector<std::uint8_t> w(spec.partition.n(), 0);
          for (std::size_t l = 0; l < spec.inner.size(); ++l) {
            const AssignmentVector inner = sample_assignment(spec.inner[l], rng);
            const auto& s = spec.partition.strata[l];
            for (std::size_t i = 0; i < s.size(); ++i) w[s[i]] = inner.w[i];
          }
          return AssignmentVector(std::move(w));
        } else {
          double u = rng.uniform();
          for (const auto& [w, prob] : spec.support) {
            u -= prob;
            if (u < 0.0) return w;
          }
          return spec.support.back().first;
        }
      },
      d.value);
}

double dm_estimate(const Vec& y_obs, const AssignmentVector& w) {
  if (y_obs.size() != w.n()) throw std::invalid_argument("dm_estimate: length mismatch");
  const int n1 = w.n1();
  if (n1 == 0 || n1 == w.n()) throw std::invalid_argument("dm_estimate: degenerate assignment");
  double treated = 0.0, control = 0.0;
  for (int j = 0; j < w.n(); ++j) (w.w[j] ? treated : control) += y_obs[j];
  return treated / n1 - control / (w.n() - n1);
}

double ipw_estimate(const Vec& y_obs, const AssignmentVector& w, const Vec& propensities) {
  if (y_obs.size() != w.n() || propensities.size() != w.n())
    throw std::invalid_argument("ipw_estimate: length mismatch");
  double out = 0.0;
  for (int j = 0; j < w.n(); ++j) {
    const double e = propensities[j];
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("ipw_estimate: positivity violated");
    out += w.w[j] ? y_obs[j] / e : -y_obs[j] / (1.0 - e);
  }
  return out / w.n();
}

double aggregate_estimate(const Vec& y_obs, const AssignmentVector& w, const StrataPartition& p) {
  if (y_obs.size() != w.n() || p.n() != w.n())
    throw std::invalid_argument("aggregate_estimate: length mismatch");
  double out = 0.0;
  for (int l = 0; l < p.num_strata(); ++l) {
    const auto& s = p.strata[l];
    double treated = 0.0, control = 0.0;
    int n1 = 0;
    for (int j : s) {
      if (w.w[j]) {
        treated += y_obs[j];
        ++n1;
      } else {
        control += y_obs[j];
      }
    }
    const int n0 = static_cast<int>(s.size()) - n1;
    if (n1 == 0 || n0 == 0)
      throw std::invalid_argument("aggregate_estimate: degenerate stratum " + std::to_string(l + 1));
    out += (static_cast<double>(s.size()) / w.n()) * (treated / n1 - control / n0);
  }
  return out;
}

namespace {

Mat design_matrix(const AssignmentVector& w, const CovariateMatrix& x) {
  Mat z(x.n(), x.d() + 1);
  for (int j = 0; j < x.n(); ++j) z(j, 0) = w.w[j];
  z.rightCols(x.d()) = x.x;
  return z;
}

}  // namespace

OlsFit ols_fit(const AssignmentVector& w, const CovariateMatrix& x, const Vec& y_obs, double sigma2) {
  if (w.n() != x.n() || y_obs.size() != x.n()) throw std::invalid_argument("ols_fit: length mismatch");
  if (sigma2 < 0.0) throw std::invalid_argument("ols_fit: sigma2 must be nonnegative");
  const Mat z = design_matrix(w, x);
  Eigen::ColPivHouseholderQR<Mat> qr(z);
  if (qr.rank() < z.cols()) throw std::invalid_argument("ols_fit: singular design matrix");
  OlsFit fit;
  fit.theta_hat = qr.solve(y_obs);
  fit.residuals = y_obs - z * fit.theta_hat;
  const Mat ztz = z.transpose() * z;
  fit.covariance = sigma2 * ztz.inverse();
  return fit;
}

double estimate_sigma2(const OlsFit& fit, int n, int d) {
  const int dof = n - d - 1;
  if (dof <= 0) throw std::invalid_argument("estimate_sigma2: no residual degrees of freedom");
  return fit.residuals.squaredNorm() / dof;
}

double var_tau_ols(const AssignmentVector& w, const CovariateMatrix& x, double sigma2) {
  if (w.n() != x.n()) throw std::invalid_argument("var_tau_ols: length mismatch");
  Vec wv(w.n());
  for (int j = 0; j < w.n(); ++j) wv[j] = w.w[j];
  const Mat xtx = x.x.transpose() * x.x;
  Eigen::FullPivLU<Mat> lu(xtx);
  if (!lu.isInvertible()) throw std::invalid_argument("var_tau_ols: singular x'x");
  const Vec xtw = x.x.transpose() * wv;
  const double denom = wv.squaredNorm() - xtw.dot(lu.solve(xtw));
  if (denom <= kCollinearTol)
    throw std::invalid_argument("var_tau_ols: treatment collinear with covariates");
  return sigma2 / denom;
}

double sc_estimate(const Vec& outcomes_t, const Vec& u, const Vec& v) {
  const auto n = outcomes_t.size();
  if (u.size() != n || v.size() != n) throw std::invalid_argument("sc_estimate: length mismatch");
  double su = 0.0, sv = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (u[j] < -kSimplexTol || v[j] < -kSimplexTol)
      throw std::invalid_argument("sc_estimate: negative weight");
    if (u[j] > 0.0 && v[j] > 0.0)
      throw std::invalid_argument("sc_estimate: overlapping support");
    su += u[j];
    sv += v[j];
  }
  if (std::abs(su - 1.0) > kSimplexTol || std::abs(sv - 1.0) > kSimplexTol)
    throw std::invalid_argument("sc_estimate: weights must sum to 1");
  return u.dot(outcomes_t) - v.dot(outcomes_t);
}

}  // namespace expdes
