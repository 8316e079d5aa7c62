#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "expdes/core.hpp"
#include "expdes/rng.hpp"

namespace expdes {

// Treatment-variance maximization instance: caches M = I - x(x'x)^-1 x'.
struct DaProblem {
  explicit DaProblem(CovariateMatrix x_in);

  CovariateMatrix x;
  Mat projection_complement;
};

struct SubsetDesign {
  std::vector<int> subset;
  double objective;  // log-determinant of the information matrix
  Mat information_matrix;
};

inline constexpr double kLogDetSingular = -std::numeric_limits<double>::infinity();

// w' M w; equals sigma2 / var_tau_ols whenever the variance is finite.
double da_objective(const AssignmentVector& w, const DaProblem& prob);

// Global maximizer over {0,1}^n, excluding vectors with undefined OLS
// variance; lexicographically smallest argmax. n <= 22.
std::pair<AssignmentVector, double> da_exhaustive(const DaProblem& prob);

// Best-of-restarts local search under 1-flip and 2-swap moves.
std::pair<AssignmentVector, double> da_local_search(const DaProblem& prob, int restarts, Rng& rng);

// log det of sum_{j in S} x_j x_j'; kLogDetSingular if singular.
double dopt_objective(const std::vector<int>& s, const CovariateMatrix& x);

enum class DoptMode { Exhaustive, GreedyExchange };

// Exhaustive requires C(n,k) <= 1e6. Greedy fills to k then 1-exchanges.
SubsetDesign dopt_search(const CovariateMatrix& x, int k, DoptMode mode, Rng& rng);

}  // namespace expdes
