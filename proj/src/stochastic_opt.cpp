#include "expdes/stochastic_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace expdes {

BaselineVector::BaselineVector(Vec g_in) : g(std::move(g_in)) {
  if (g.size() < 2) throw std::invalid_argument("BaselineVector: need n >= 2");
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw std::invalid_argument("BaselineVector: non-finite entry");
  }
}

Mat stratified_cov_matrix(const StrataPartition& p) {
  Mat v = Mat::Zero(p.n(), p.n());
  for (const auto& s : p.strata) {
    if (s.size() % 2 != 0)
      throw std::invalid_argument("stratified_cov_matrix: odd-size stratum");
    const double off = -1.0 / (4.0 * (static_cast<double>(s.size()) - 1.0));
    for (int i : s) {
      for (int j : s) v(i, j) = (i == j) ? 0.25 : off;
    }
  }
  return v;
}

double pairing_objective(const BaselineVector& g, const StrataPartition& p) {
  if (g.g.size() != p.n()) throw std::invalid_argument("pairing_objective: length mismatch");
  double out = 0.0;
  for (const auto& s : p.strata) {
    if (s.size() % 2 != 0) throw std::invalid_argument("pairing_objective: odd-size stratum");
    double sum = 0.0, sum_sq = 0.0;
    for (int j : s) {
      sum += g.g[j];
      sum_sq += g.g[j] * g.g[j];
    }
    const double cross = sum * sum - sum_sq;
    out += 0.25 * (sum_sq - cross / (static_cast<double>(s.size()) - 1.0));
  }
  return out;
}

PairingResult optimal_matched_pairs(const BaselineVector& g) {
  const int n = static_cast<int>(g.g.size());
  if (n % 2 != 0) throw std::invalid_argument("optimal_matched_pairs: requires even n");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&g](int a, int b) { return g.g[a] > g.g[b]; });
  std::vector<std::vector<int>> pairs;
  pairs.reserve(n / 2);
  for (int i = 0; i < n; i += 2) pairs.push_back({order[i], order[i + 1]});
  StrataPartition partition(n, std::move(pairs));
  const double obj = pairing_objective(g, partition);
  return {std::move(partition), obj};
}

std::tuple<double, double, double> bias_variance_decompose(const std::vector<double>& samples,
                                                           double target) {
  if (samples.size() < 2) throw std::invalid_argument("bias_variance_decompose: need >= 2 samples");
  const double m = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= m;
  double var = 0.0, mse = 0.0;
  for (double s : samples) {
    var += (s - mean) * (s - mean);
    mse += (s - target) * (s - target);
  }
  var /= m;
  mse /= m;
  const double bias = mean - target;
  return {mse, var, bias * bias};
}

}  // namespace expdes
