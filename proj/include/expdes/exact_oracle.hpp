#pragma once

#include <functional>
#include <vector>

#include "expdes/core.hpp"

namespace expdes {

// Event the expectation is conditioned on.
struct ConditioningEvent {
  enum class Kind { None, NonDegenerate, FixedN1 };

  static ConditioningEvent none() { return {Kind::None, 0}; }
  static ConditioningEvent non_degenerate() { return {Kind::NonDegenerate, 0}; }
  static ConditioningEvent fixed_n1(int n1) { return {Kind::FixedN1, n1}; }

  bool accepts(const AssignmentVector& w) const;

  Kind kind;
  int n1;
};

struct ExactMoments {
  double mean;
  double variance;
  double conditioning_mass;  // probability of the conditioning event
};

enum class EstimatorKind { DM, IPW, AGG };

struct EstimatorChoice {
  static EstimatorChoice dm() { return {EstimatorKind::DM, {}}; }
  static EstimatorChoice ipw() { return {EstimatorKind::IPW, {}}; }
  static EstimatorChoice agg(StrataPartition p) { return {EstimatorKind::AGG, {std::move(p)}}; }

  EstimatorKind kind;
  std::vector<StrataPartition> partition;  // singleton when kind == AGG
};

// Materializes the design as an explicit pmf over its full support.
// Hard-capped at n <= 20; the oracle is never approximate.
DesignPmf expand_design(const DesignSpec& d);

// Exact mean and variance of the estimator over all assignments, under
// the stated conditioning event. Observed outcomes come from the table.
ExactMoments exact_estimator_moments(const DesignSpec& d, const ScienceTable& t,
                                     const EstimatorChoice& estimator,
                                     const ConditioningEvent& cond);

// Exact pmf-weighted loss r(eta, .) = sum_w eta(w) L(w).
double exact_risk(const DesignSpec& d, const std::function<double(const AssignmentVector&)>& loss);

// All (n-1)!! perfect matchings of {0..n-1}. n even, n <= 12.
std::vector<StrataPartition> enumerate_pairings(int n);

// All partitions of {0..n-1} into strata of even size >= 2. n even, n <= 8.
std::vector<StrataPartition> enumerate_even_partitions(int n);

// All C(n,k) k-subsets of {0..n-1} in lexicographic order, via callback.
void for_each_k_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn);
std::vector<std::vector<int>> enumerate_k_subsets(int n, int k);

struct TwoStageResult {
  double expectation;  // E[mu_hat(1)] of the sample-mean-of-treated estimator
  double path_mass;    // total probability over the enumerated path tree
};

// Exact expectation of the treated-sample-mean under the two-stage design:
// stage one runs a CRD(2,1) on units 1-2, stage two assigns unit 3 to the
// empirically better arm (ties split half-half as explicit branches). All
// six potential outcomes are iid Bernoulli(bern_param). With
// adaptive_stage_two = false, stage two is a fair coin instead.
TwoStageResult two_stage_adaptive_expectation(double bern_param, bool adaptive_stage_two = true);

}  // namespace expdes
