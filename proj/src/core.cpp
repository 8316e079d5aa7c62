#include "expdes/core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace expdes {
namespace {

void require_finite(const Vec& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

constexpr int kExplicitPmfMaxUnits = 20;
constexpr double kPmfNormTol = 1e-12;

}  // namespace

ScienceTable::ScienceTable(Vec y1_in, Vec y0_in) : y1(std::move(y1_in)), y0(std::move(y0_in)) {
  if (y1.size() == 0) throw std::invalid_argument("ScienceTable: n must be positive");
  if (y1.size() != y0.size()) throw std::invalid_argument("ScienceTable: y1/y0 length mismatch");
  require_finite(y1, "ScienceTable y1");
  require_finite(y0, "ScienceTable y0");
}

double sample_ate(const ScienceTable& t) { return (t.y1 - t.y0).mean(); }

AssignmentVector::AssignmentVector(std::vector<std::uint8_t> bits) : w(std::move(bits)) {
  if (w.empty()) throw std::invalid_argument("AssignmentVector: empty");
  for (auto b : w) {
    if (b > 1) throw std::invalid_argument("AssignmentVector: entries must be 0 or 1");
  }
}

AssignmentVector::AssignmentVector(int n, std::uint64_t mask) : w(n) {
  if (n <= 0 || n > 63) throw std::invalid_argument("AssignmentVector: bad n for mask constructor");
  for (int j = 0; j < n; ++j) w[j] = (mask >> j) & 1;
}

int AssignmentVector::n1() const { return std::accumulate(w.begin(), w.end(), 0); }

std::uint64_t AssignmentVector::mask() const {
  if (n() > 63) throw std::invalid_argument("AssignmentVector: too long for mask");
  std::uint64_t m = 0;
  for (int j = 0; j < n(); ++j) m |= static_cast<std::uint64_t>(w[j]) << j;
  return m;
}

Permutation::Permutation(std::vector<int> targets_in) : targets(std::move(targets_in)) {
  const int m = n();
  std::vector<char> seen(m, 0);
  for (int t : targets) {
    if (t < 0 || t >= m || seen[t]) throw std::invalid_argument("Permutation: not a bijection");
    seen[t] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> t(n);
  std::iota(t.begin(), t.end(), 0);
  return Permutation(std::move(t));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(targets.size());
  for (int j = 0; j < n(); ++j) inv[targets[j]] = j;
  return Permutation(std::move(inv));
}

Vec apply_permutation(const Permutation& pi, const Vec& v) {
  if (v.size() != pi.n()) throw std::invalid_argument("apply_permutation: length mismatch");
  Vec out(v.size());
  for (int j = 0; j < pi.n(); ++j) out[pi.targets[j]] = v[j];
  return out;
}

AssignmentVector apply_permutation(const Permutation& pi, const AssignmentVector& v) {
  if (v.n() != pi.n()) throw std::invalid_argument("apply_permutation: length mismatch");
  std::vector<std::uint8_t> out(v.w.size());
  for (int j = 0; j < pi.n(); ++j) out[pi.targets[j]] = v.w[j];
  return AssignmentVector(std::move(out));
}

StrataPartition::StrataPartition(int n, std::vector<std::vector<int>> strata_in)
    : strata(std::move(strata_in)), n_(n) {
  if (n <= 0) throw std::invalid_argument("StrataPartition: n must be positive");
  std::vector<char> seen(n, 0);
  int covered = 0;
  for (const auto& s : strata) {
    if (s.empty()) throw std::invalid_argument("StrataPartition: empty stratum");
    for (int j : s) {
      if (j < 0 || j >= n) throw std::invalid_argument("StrataPartition: index out of range");
      if (seen[j]) throw std::invalid_argument("StrataPartition: overlapping strata");
      seen[j] = 1;
      ++covered;
    }
  }
  if (covered != n) throw std::invalid_argument("StrataPartition: incomplete cover");
}

DesignPmf::DesignPmf(int n_in, std::vector<std::pair<AssignmentVector, double>> support_in)
    : n(n_in), support(std::move(support_in)) {
  if (n <= 0 || n > kExplicitPmfMaxUnits)
    throw std::invalid_argument("DesignPmf: n must be in [1, 20]");
  if (support.empty()) throw std::invalid_argument("DesignPmf: empty support");
  double total = 0.0;
  std::vector<char> seen(std::size_t{1} << n, 0);
  for (const auto& [w, prob] : support) {
    if (w.n() != n) throw std::invalid_argument("DesignPmf: support vector length mismatch");
    if (prob < 0.0 || !std::isfinite(prob))
      throw std::invalid_argument("DesignPmf: negative or non-finite probability");
    const std::uint64_t m = w.mask();
    if (seen[m]) throw std::invalid_argument("DesignPmf: duplicate support vector");
    seen[m] = 1;
    total += prob;
  }
  if (std::abs(total - 1.0) > kPmfNormTol)
    throw std::invalid_argument("DesignPmf: probabilities do not sum to 1");
}

DesignSpec::DesignSpec(BernoulliDesign d) : value(std::move(d)) {
  const auto& p = std::get<BernoulliDesign>(value).p;
  if (p.size() == 0) throw std::invalid_argument("BernoulliDesign: empty p");
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0 && p[j] < 1.0))
      throw std::invalid_argument("BernoulliDesign: p_j must lie strictly in (0,1)");
  }
}

DesignSpec::DesignSpec(CrdDesign d) : value(d) {
  if (d.n < 2 || d.n1 < 1 || d.n1 > d.n - 1)
    throw std::invalid_argument("CrdDesign: require 1 <= n1 <= n-1");
}

DesignSpec::DesignSpec(StratifiedDesign d) : value(std::move(d)) {
  const auto& s = std::get<StratifiedDesign>(value);
  if (s.inner.size() != s.partition.strata.size())
    throw std::invalid_argument("StratifiedDesign: one inner design per stratum required");
  for (std::size_t l = 0; l < s.inner.size(); ++l) {
    if (s.inner[l].n() != static_cast<int>(s.partition.strata[l].size()))
      throw std::invalid_argument("StratifiedDesign: inner design not sized to stratum");
  }
}

DesignSpec::DesignSpec(DesignPmf d) : value(std::move(d)) {}

int DesignSpec::n() const {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BernoulliDesign>) return static_cast<int>(d.p.size());
        else if constexpr (std::is_same_v<T, CrdDesign>) return d.n;
        else if constexpr (std::is_same_v<T, StratifiedDesign>) return d.partition.n();
        else return d.n;
      },
      value);
}

Vec marginal_propensities(const DesignSpec& d) {
  return std::visit(
      [](const auto& spec) -> Vec {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, BernoulliDesign>) {
          return spec.p;
        } else if constexpr (std::is_same_v<T, CrdDesign>) {
          return Vec::Constant(spec.n, static_cast<double>(spec.n1) / spec.n);
        } else if constexpr (std::is_same_v<T, StratifiedDesign>) {
          Vec out(spec.partition.n());
          for (std::size_t l = 0; l < spec.inner.size(); ++l) {
            const Vec inner = marginal_propensities(spec.inner[l]);
            const auto& s = spec.partition.strata[l];
            for (std::size_t i = 0; i < s.size(); ++i) out[s[i]] = inner[static_cast<int>(i)];
          }
          return out;
        } else {
          Vec out = Vec::Zero(spec.n);
          for (const auto& [w, prob] : spec.support) {
            for (int j = 0; j < spec.n; ++j) {
              if (w.w[j]) out[j] += prob;
            }
          }
          return out;
        }
      },
      d.value);
}

CovariateMatrix::CovariateMatrix(Mat x_in, std::vector<std::string> labels_in)
    : x(std::move(x_in)), labels(std::move(labels_in)) {
  if (x.cols() < 1) throw std::invalid_argument("CovariateMatrix: d must be >= 1");
  if (!x.allFinite()) throw std::invalid_argument("CovariateMatrix: non-finite entry");
  if (labels.empty()) {
    for (int c = 0; c < d(); ++c) labels.push_back("x" + std::to_string(c + 1));
  }
  if (static_cast<int>(labels.size()) != d())
    throw std::invalid_argument("CovariateMatrix: label count mismatch");
}

PanelData::PanelData(Mat outcomes_in, int t0_in) : outcomes(std::move(outcomes_in)), t0(t0_in) {
  if (outcomes.rows() < 1 || outcomes.cols() < 2)
    throw std::invalid_argument("PanelData: need at least 1 unit and 2 periods");
  if (t0 < 1 || t0 >= periods()) throw std::invalid_argument("PanelData: T0 must satisfy 1 <= T0 < T");
  if (!outcomes.allFinite()) throw std::invalid_argument("PanelData: non-finite entry");
}

}  // namespace expdes
