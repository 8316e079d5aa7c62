#include "expdes/robust_opt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace expdes {
namespace {

constexpr int kSymmetrizeMaxUnits = 8;

void require_finite(const Vec& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

AdditiveModelSpec::AdditiveModelSpec(Vec g_in, double sigma2_in, double alpha1_in, double alpha0_in)
    : g(std::move(g_in)), sigma2(sigma2_in), alpha1(alpha1_in), alpha0(alpha0_in) {
  if (g.size() == 0) throw std::invalid_argument("AdditiveModelSpec: empty g");
  require_finite(g, "AdditiveModelSpec g");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("AdditiveModelSpec: sigma2 must be nonnegative");
  if (!std::isfinite(alpha1) || !std::isfinite(alpha0))
    throw std::invalid_argument("AdditiveModelSpec: non-finite arm effect");
}

BoxUncertainty::BoxUncertainty(double b_in) : b(b_in) {
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("BoxUncertainty: b must be positive");
}

double additive_crd_risk(int n1, int n0, const AdditiveModelSpec& m) {
  const int n = n1 + n0;
  if (n1 < 1 || n0 < 1 || n < 2) throw std::invalid_argument("additive_crd_risk: require n1, n0 >= 1");
  if (m.g.size() != n) throw std::invalid_argument("additive_crd_risk: g length mismatch");
  const double sum_sq = m.g.squaredNorm();
  const double sum = m.g.sum();
  const double cross = sum * sum - sum_sq;  // sum over i != j of g_i g_j
  return (1.0 / n1 + 1.0 / n0) * (sum_sq / n - cross / (static_cast<double>(n) * (n - 1)) + m.sigma2);
}

std::pair<int, int> optimal_crd_split(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("optimal_crd_split: requires even n");
  return {n / 2, n / 2};
}

DesignPmf symmetrize(const DesignPmf& d) {
  if (d.n > kSymmetrizeMaxUnits) throw std::invalid_argument("symmetrize: n exceeds the cap of 8");
  std::vector<double> mass(std::size_t{1} << d.n, 0.0);
  std::vector<int> perm(d.n);
  std::iota(perm.begin(), perm.end(), 0);
  long long n_fact = 0;
  do {
    ++n_fact;
    for (const auto& [w, prob] : d.support) {
      std::uint64_t m = 0;
      for (int j = 0; j < d.n; ++j) m |= static_cast<std::uint64_t>(w.w[j]) << perm[j];
      mass[m] += prob;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<std::pair<AssignmentVector, double>> support;
  for (std::uint64_t m = 0; m < mass.size(); ++m) {
    if (mass[m] > 0.0) support.emplace_back(AssignmentVector(d.n, m), mass[m] / n_fact);
  }
  return DesignPmf(d.n, std::move(support));
}

double reduced_bernoulli_objective(const Vec& p, const ScienceTable& t) {
  const auto n = p.size();
  if (t.n() != n) throw std::invalid_argument("reduced_bernoulli_objective: length mismatch");
  double out = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(p[j] > 0.0 && p[j] < 1.0))
      throw std::invalid_argument("reduced_bernoulli_objective: positivity violated");
    const double num = t.y1[j] * (1.0 - p[j]) + t.y0[j] * p[j];
    out += num * num / (p[j] * (1.0 - p[j]));
  }
  return out / (static_cast<double>(n) * n);
}

double bernoulli_worst_case_risk(const Vec& p, const BoxUncertainty& box) {
  const auto n = p.size();
  if (n == 0) throw std::invalid_argument("bernoulli_worst_case_risk: empty p");
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(p[j] > 0.0 && p[j] < 1.0))
      throw std::invalid_argument("bernoulli_worst_case_risk: positivity violated");
    s += 1.0 / (p[j] * (1.0 - p[j]));
  }
  return box.b * box.b / (static_cast<double>(n) * n) * s;
}

MinimaxResult minimax_bernoulli(int n, const BoxUncertainty& box) {
  if (n < 1) throw std::invalid_argument("minimax_bernoulli: n must be positive");
  MinimaxResult out;
  out.optimal_p = Vec::Constant(n, 0.5);
  out.worst_case_risk = 4.0 * box.b * box.b / n;
  out.worst_case_outcomes = "y_j(1) = y_j(0) = s_j b with any signs s_j in {-1,+1}";
  return out;
}

}  // namespace expdes
