#pragma once

#include <string>
#include <utility>

#include "expdes/core.hpp"

namespace expdes {

// Additive outcome model y_j(w) = alpha_w + g_j + eps_jw.
struct AdditiveModelSpec {
  AdditiveModelSpec(Vec g_in, double sigma2_in, double alpha1_in, double alpha0_in);

  double tau() const { return alpha1 - alpha0; }

  Vec g;
  double sigma2;
  double alpha1;
  double alpha0;
};

// Box uncertainty set [-b, b]^{2n} over the science table.
struct BoxUncertainty {
  explicit BoxUncertainty(double b_in);
  double b;
};

struct MinimaxResult {
  Vec optimal_p;
  double worst_case_risk;
  std::string worst_case_outcomes;
};

// Closed-form DM risk of CRD(n1) under the additive model:
// (1/n1 + 1/n0) ((1/n) sum g^2 - (1/(n(n-1))) sum_{i!=j} g_i g_j + sigma2).
double additive_crd_risk(int n1, int n0, const AdditiveModelSpec& m);

// Balanced split (n/2, n/2); minimizes additive_crd_risk over all splits.
std::pair<int, int> optimal_crd_split(int n);

// Orbit average over all n! unit permutations; n <= 8.
DesignPmf symmetrize(const DesignPmf& d);

// IPW squared-error risk under the Bernoulli design, in reduced form:
// (1/n^2) sum_j (y_j(1)(1-p_j) + y_j(0) p_j)^2 / (p_j(1-p_j)).
double reduced_bernoulli_objective(const Vec& p, const ScienceTable& t);

// sup over the box of the reduced objective: (b^2/n^2) sum_j 1/(p_j(1-p_j)).
double bernoulli_worst_case_risk(const Vec& p, const BoxUncertainty& box);

// Minimax Bernoulli design: p = 1/2 everywhere, worst-case risk 4 b^2 / n.
MinimaxResult minimax_bernoulli(int n, const BoxUncertainty& box);

}  // namespace expdes
