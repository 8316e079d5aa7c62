#include "expdes/exact_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "expdes/designs_estimators.hpp"

namespace expdes {
namespace {

constexpr int kExpandMaxUnits = 20;
constexpr int kMomentsMaxUnits = 16;
constexpr int kPairingMaxUnits = 12;
constexpr int kEvenPartitionMaxUnits = 8;
constexpr long long kSubsetCap = 1'000'000;

}  // namespace

bool ConditioningEvent::accepts(const AssignmentVector& w) const {
  switch (kind) {
    case Kind::None:
      return true;
    case Kind::NonDegenerate:
      return w.n1() != 0 && w.n1() != w.n();
    case Kind::FixedN1:
      return w.n1() == n1;
  }
  return false;
}

DesignPmf expand_design(const DesignSpec& d) {
  const int n = d.n();
  if (n > kExpandMaxUnits) throw std::invalid_argument("expand_design: n exceeds the enumeration cap of 20");
  return std::visit(
      [n](const auto& spec) -> DesignPmf {
        using T = std::decay_t<decltype(spec)>;
        std::vector<std::pair<AssignmentVector, double>> support;
        if constexpr (std::is_same_v<T, BernoulliDesign>) {
          for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
            AssignmentVector w(n, m);
            support.emplace_back(w, bernoulli_pmf(spec.p, w));
          }
        } else if constexpr (std::is_same_v<T, CrdDesign>) {
          for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
            AssignmentVector w(n, m);
            const double prob = crd_pmf(spec.n, spec.n1, w);
            if (prob > 0.0) support.emplace_back(std::move(w), prob);
          }
        } else if constexpr (std::is_same_v<T, StratifiedDesign>) {
          // Cartesian product of the per-stratum supports.
          std::vector<std::pair<std::vector<std::uint8_t>, double>> acc;
          acc.emplace_back(std::vector<std::uint8_t>(n, 0), 1.0);
          for (std::size_t l = 0; l < spec.inner.size(); ++l) {
            const DesignPmf inner = expand_design(spec.inner[l]);
            const auto& s = spec.partition.strata[l];
            std::vector<std::pair<std::vector<std::uint8_t>, double>> next;
            next.reserve(acc.size() * inner.support.size());
            for (const auto& [base, base_prob] : acc) {
              for (const auto& [iw, iprob] : inner.support) {
                if (iprob == 0.0) continue;
                auto bits = base;
                for (std::size_t i = 0; i < s.size(); ++i) bits[s[i]] = iw.w[i];
                next.emplace_back(std::move(bits), base_prob * iprob);
              }
            }
            acc = std::move(next);
          }
          for (auto& [bits, prob] : acc) support.emplace_back(AssignmentVector(std::move(bits)), prob);
        } else {
          for (const auto& [w, prob] : spec.support) {
            if (prob > 0.0) support.emplace_back(w, prob);
          }
          // Re-normalize exactly: dropping zero-mass points cannot change the sum.
        }
        return DesignPmf(n, std::move(support));
      },
      d.value);
}

ExactMoments exact_estimator_moments(const DesignSpec& d, const ScienceTable& t,
                                     const EstimatorChoice& estimator,
                                     const ConditioningEvent& cond) {
  const int n = d.n();
  if (n > kMomentsMaxUnits)
    throw std::invalid_argument("exact_estimator_moments: n exceeds the enumeration cap of 16");
  if (t.n() != n) throw std::invalid_argument("exact_estimator_moments: table size mismatch");
  Vec propensities;
  if (estimator.kind == EstimatorKind::IPW) {
    propensities = marginal_propensities(d);
    for (Eigen::Index j = 0; j < propensities.size(); ++j) {
      if (!(propensities[j] > 0.0 && propensities[j] < 1.0))
        throw std::invalid_argument("exact_estimator_moments: positivity violated");
    }
  }
  const DesignPmf pmf = expand_design(d);
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (const auto& [w, prob] : pmf.support) {
    if (!cond.accepts(w)) continue;
    mass += prob;
    Vec y_obs(n);
    for (int j = 0; j < n; ++j) y_obs[j] = w.w[j] ? t.y1[j] : t.y0[j];
    double est = 0.0;
    switch (estimator.kind) {
      case EstimatorKind::DM:
        est = dm_estimate(y_obs, w);
        break;
      case EstimatorKind::IPW:
        est = ipw_estimate(y_obs, w, propensities);
        break;
      case EstimatorKind::AGG:
        est = aggregate_estimate(y_obs, w, estimator.partition.at(0));
        break;
    }
    m1 += prob * est;
    m2 += prob * est * est;
  }
  if (mass <= 0.0)
    throw std::invalid_argument("exact_estimator_moments: conditioning event has zero probability");
  const double mean = m1 / mass;
  double variance = m2 / mass - mean * mean;
  if (variance < 0.0) variance = 0.0;
  return {mean, variance, mass};
}

double exact_risk(const DesignSpec& d, const std::function<double(const AssignmentVector&)>& loss) {
  if (d.n() > kMomentsMaxUnits) throw std::invalid_argument("exact_risk: n exceeds the enumeration cap of 16");
  const DesignPmf pmf = expand_design(d);
  double out = 0.0;
  for (const auto& [w, prob] : pmf.support) out += prob * loss(w);
  return out;
}

namespace {

void pairings_rec(std::vector<int>& remaining, std::vector<std::vector<int>>& current, int n,
                  std::vector<StrataPartition>& out) {
  if (remaining.empty()) {
    out.emplace_back(n, current);
    return;
  }
  const int first = remaining.front();
  for (std::size_t i = 1; i < remaining.size(); ++i) {
    const int partner = remaining[i];
    std::vector<int> rest;
    rest.reserve(remaining.size() - 2);
    for (std::size_t k = 1; k < remaining.size(); ++k) {
      if (k != i) rest.push_back(remaining[k]);
    }
    current.push_back({first, partner});
    pairings_rec(rest, current, n, out);
    current.pop_back();
  }
}

void even_partitions_rec(std::vector<int>& remaining, std::vector<std::vector<int>>& current, int n,
                         std::vector<StrataPartition>& out) {
  if (remaining.empty()) {
    out.emplace_back(n, current);
    return;
  }
  const int first = remaining.front();
  const std::vector<int> rest(remaining.begin() + 1, remaining.end());
  const int m = static_cast<int>(rest.size());
  // Pick an odd number of companions for `first` so the block size is even.
  for (int take = 1; take <= m; take += 2) {
    std::vector<int> combo(take);
    std::function<void(int, int)> choose = [&](int start, int depth) {
      if (depth == take) {
        std::vector<int> block{first};
        block.insert(block.end(), combo.begin(), combo.end());
        std::vector<int> next;
        next.reserve(m - take);
        std::vector<char> used(m, 0);
        for (int c : combo) {
          for (int k = 0; k < m; ++k) {
            if (!used[k] && rest[k] == c) {
              used[k] = 1;
              break;
            }
          }
        }
        for (int k = 0; k < m; ++k) {
          if (!used[k]) next.push_back(rest[k]);
        }
        current.push_back(std::move(block));
        even_partitions_rec(next, current, n, out);
        current.pop_back();
        return;
      }
      for (int k = start; k < m; ++k) {
        combo[depth] = rest[k];
        choose(k + 1, depth + 1);
      }
    };
    choose(0, 0);
  }
}

}  // namespace

std::vector<StrataPartition> enumerate_pairings(int n) {
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument("enumerate_pairings: n must be even");
  if (n > kPairingMaxUnits) throw std::invalid_argument("enumerate_pairings: n exceeds the cap of 12");
  std::vector<int> remaining(n);
  for (int j = 0; j < n; ++j) remaining[j] = j;
  std::vector<std::vector<int>> current;
  std::vector<StrataPartition> out;
  pairings_rec(remaining, current, n, out);
  return out;
}

std::vector<StrataPartition> enumerate_even_partitions(int n) {
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument("enumerate_even_partitions: n must be even");
  if (n > kEvenPartitionMaxUnits)
    throw std::invalid_argument("enumerate_even_partitions: n exceeds the cap of 8");
  std::vector<int> remaining(n);
  for (int j = 0; j < n; ++j) remaining[j] = j;
  std::vector<std::vector<int>> current;
  std::vector<StrataPartition> out;
  even_partitions_rec(remaining, current, n, out);
  return out;
}

void for_each_k_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  if (k <= 0 || k > n) throw std::invalid_argument("for_each_k_subset: require 0 < k <= n");
  long double count = 1.0L;
  for (int i = 0; i < k; ++i) count = count * (n - i) / (i + 1);
  if (count > static_cast<long double>(kSubsetCap))
    throw std::invalid_argument("for_each_k_subset: combinatorial overflow (C(n,k) > 1e6)");
  std::vector<int> s(k);
  for (int i = 0; i < k; ++i) s[i] = i;
  for (;;) {
    fn(s);
    int i = k - 1;
    while (i >= 0 && s[i] == n - k + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

std::vector<std::vector<int>> enumerate_k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  for_each_k_subset(n, k, [&out](const std::vector<int>& s) { out.push_back(s); });
  return out;
}

TwoStageResult two_stage_adaptive_expectation(double bern_param, bool adaptive_stage_two) {
  const double q = bern_param;
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("two_stage_adaptive_expectation: parameter must lie in [0,1]");
  double expectation = 0.0;
  double mass = 0.0;
  // Outcome bits: (Y1(1), Y1(0), Y2(1), Y2(0), Y3(1), Y3(0)).
  for (int bits = 0; bits < 64; ++bits) {
    const int y[6] = {(bits >> 0) & 1, (bits >> 1) & 1, (bits >> 2) & 1,
                      (bits >> 3) & 1, (bits >> 4) & 1, (bits >> 5) & 1};
    double prob_outcomes = 1.0;
    for (int b : y) prob_outcomes *= b ? q : 1.0 - q;
    if (prob_outcomes == 0.0) continue;
    // Stage one: CRD(2,1) over units 1 and 2.
    for (int first_treated = 0; first_treated < 2; ++first_treated) {
      const double obs_t = first_treated ? y[0] : y[2];  // treated unit's Y(1)
      const double obs_c = first_treated ? y[3] : y[1];  // control unit's Y(0)
      const double path = prob_outcomes * 0.5;
      const double est_treat3 = (obs_t + y[4]) / 2.0;
      const double est_control3 = obs_t;
      if (!adaptive_stage_two || obs_t == obs_c) {
        // Even split, as an explicit branch rather than an RNG draw.
        expectation += path * 0.5 * (est_treat3 + est_control3);
        mass += path;
      } else if (obs_t > obs_c) {
        expectation += path * est_treat3;
        mass += path;
      } else {
        expectation += path * est_control3;
        mass += path;
      }
    }
  }
  return {expectation, mass};
}

}  // namespace expdes
