#pragma once

#include "expdes/core.hpp"
#include "expdes/rng.hpp"

namespace expdes {

// Observed data of a run experiment: Y_j = Y_j(W_j).
struct ObservedExperiment {
  ObservedExperiment(Vec y_obs_in, AssignmentVector w_in, DesignSpec design_in);

  Vec y_obs;
  AssignmentVector w;
  DesignSpec design;
};

// Joint pmf of the (possibly heterogeneous) Bernoulli design at w.
double bernoulli_pmf(const Vec& p, const AssignmentVector& w);

// Pmf of the completely randomized design with n1 treated units at w.
double crd_pmf(int n, int n1, const AssignmentVector& w);

// One draw from the design. Stratified designs draw independently per
// stratum; Explicit pmfs are inverse-CDF sampled over their support.
AssignmentVector sample_assignment(const DesignSpec& d, Rng& rng);

// Difference in means between treated and control outcomes. Throws on
// all-treated or all-control assignments.
double dm_estimate(const Vec& y_obs, const AssignmentVector& w);

// Inverse propensity weighted estimator; requires 0 < e_j < 1.
double ipw_estimate(const Vec& y_obs, const AssignmentVector& w, const Vec& propensities);

// Stratum-size-weighted aggregation of per-stratum difference in means.
double aggregate_estimate(const Vec& y_obs, const AssignmentVector& w, const StrataPartition& p);

struct OlsFit {
  Vec theta_hat;    // first entry tau_hat, rest beta_hat
  Mat covariance;   // sigma2 * (Z'Z)^-1
  Vec residuals;
};

// Least squares of y on Z = [w | x], solved by column-pivoted QR.
// sigma2 is the (model-given) noise variance entering the covariance.
OlsFit ols_fit(const AssignmentVector& w, const CovariateMatrix& x, const Vec& y_obs, double sigma2);

// Residual-based noise variance estimate ||r||^2 / (n - d - 1).
double estimate_sigma2(const OlsFit& fit, int n, int d);

// Closed-form Var(tau_hat) = sigma2 / (w'w - w'x (x'x)^-1 x'w).
double var_tau_ols(const AssignmentVector& w, const CovariateMatrix& x, double sigma2);

// Synthetic-control point estimate sum u_j Y_jt - sum v_j Y_jt for one
// period. u and v must lie on the unit simplex with disjoint supports.
double sc_estimate(const Vec& outcomes_t, const Vec& u, const Vec& v);

}  // namespace expdes
