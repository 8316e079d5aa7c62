#pragma once

#include <tuple>

#include "expdes/core.hpp"

namespace expdes {

// Baseline values g_j = E[Y_j(1) + Y_j(0) | x_j], caller-supplied.
struct BaselineVector {
  explicit BaselineVector(Vec g_in);
  Vec g;
};

struct PairingResult {
  StrataPartition partition;  // all strata of size 2
  double objective;
};

// Covariance matrix of the treatment indicators under the stratified design
// that treats exactly half of each (even-sized) stratum: diagonal 1/4,
// within-stratum off-diagonal -1/(4(s_l - 1)), zero across strata.
Mat stratified_cov_matrix(const StrataPartition& p);

// Quadratic form g' V g with V = stratified_cov_matrix(p).
double pairing_objective(const BaselineVector& g, const StrataPartition& p);

// Sort baselines descending (ties by ascending index), pair adjacent.
// Minimizes pairing_objective over all perfect matchings.
PairingResult optimal_matched_pairs(const BaselineVector& g);

// Empirical (mse, variance, bias^2) of draws around a target; population
// divisor m, so mse = variance + bias^2 holds as an identity.
std::tuple<double, double, double> bias_variance_decompose(const std::vector<double>& samples,
                                                           double target);

}  // namespace expdes
