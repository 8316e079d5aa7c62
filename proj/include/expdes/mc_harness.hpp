#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>

#include "expdes/core.hpp"
#include "expdes/robust_opt.hpp"
#include "expdes/rng.hpp"

namespace expdes {

enum class NoiseKind { Gaussian, Rademacher };

// y_j(w) = alpha_w + g_j + eps_jw, eps iid with variance sigma2.
struct AdditiveDgp {
  AdditiveModelSpec model;
  NoiseKind noise = NoiseKind::Gaussian;
};

// y_j(w) = tau w + x_j . beta + eps_j, with eps_j1 = eps_j0.
struct LinearDgp {
  LinearDgp(double tau_in, Vec beta_in, CovariateMatrix x_in, double sigma_in,
            NoiseKind noise_in = NoiseKind::Gaussian);

  double tau;
  Vec beta;
  CovariateMatrix x;
  double sigma;
  NoiseKind noise;
};

// Panel factor model: y_jt(w) = alpha_t(w) + beta_t(w).x_j + lambda_t(w).mu_j + eps.
// alpha[w] is length T; beta[w] is T x d; lambda[w] is T x r; mu is n x r.
struct FactorPanelDgp {
  FactorPanelDgp(std::array<Mat, 2> alpha_in, std::array<Mat, 2> beta_in,
                 std::array<Mat, 2> lambda_in, Mat mu_in, Mat x_in, double noise_scale_in,
                 NoiseKind noise_in = NoiseKind::Gaussian);

  int n() const { return static_cast<int>(mu.rows()); }
  int periods() const { return static_cast<int>(alpha[0].rows()); }

  std::array<Mat, 2> alpha;   // T x 1 each, indexed by arm
  std::array<Mat, 2> beta;    // T x d
  std::array<Mat, 2> lambda;  // T x r
  Mat mu;                     // n x r
  Mat x;                      // n x d
  double noise_scale;
  NoiseKind noise;
};

using DgpSpec = std::variant<AdditiveDgp, LinearDgp, FactorPanelDgp>;

double draw_noise(NoiseKind kind, double scale, Rng& rng);

// One sampled science table (Additive or Linear dgp).
ScienceTable draw_science_table(const DgpSpec& dgp, Rng& rng);

// One sampled pair of n x T potential-outcome panels (treated, control).
std::pair<Mat, Mat> draw_factor_panels(const FactorPanelDgp& dgp, Rng& rng);

struct McEstimatorSpec {
  enum class Kind { DM, IPW, AGG, OLS };

  static McEstimatorSpec dm() { return {Kind::DM, {}, {}}; }
  static McEstimatorSpec ipw() { return {Kind::IPW, {}, {}}; }
  static McEstimatorSpec agg(StrataPartition p) { return {Kind::AGG, {std::move(p)}, {}}; }
  static McEstimatorSpec ols(CovariateMatrix x) { return {Kind::OLS, {}, {std::move(x)}}; }

  Kind kind;
  std::vector<StrataPartition> partition;  // singleton for AGG
  std::vector<CovariateMatrix> covariates; // singleton for OLS
};

struct McEstimand {
  enum class Kind { Sample, Fixed };

  static McEstimand sample() { return {Kind::Sample, 0.0}; }
  static McEstimand fixed(double v) { return {Kind::Fixed, v}; }

  Kind kind;
  double value;
};

struct McReport {
  long long replications = 0;  // replications entering the moments
  long long excluded = 0;      // degenerate replications dropped
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double mc_standard_error = 0.0;
  std::uint64_t seed = 0;
};

// Seeded replication engine. Replication i uses substream (seed, i); chunked
// partial sums merge in chunk order, so the report is identical for any
// thread count.
McReport run_replications(const DgpSpec& dgp, const DesignSpec& design,
                          const McEstimatorSpec& estimator, const McEstimand& estimand,
                          long long reps, std::uint64_t seed, int threads = 1);

struct StoppingResult {
  double stop_fraction;
  std::optional<double> conditional_mean;  // empty when no path stopped
};

// Bernoulli(1/2) stream; stop at the first running mean >= threshold.
StoppingResult stopping_rule_simulation(double threshold, int horizon, long long reps,
                                        std::uint64_t seed);

struct TwoStageMcReport {
  double mean_mu_hat;   // sample mean over treated units
  double se_mu_hat;
  double mean_ipw;      // IPW with the path-tree propensities
  double se_ipw;
  long long replications;
};

// Monte Carlo run of the three-unit two-stage design with iid Bernoulli(q)
// potential outcomes; mirrors two_stage_adaptive_expectation.
TwoStageMcReport two_stage_mc(double q, long long reps, std::uint64_t seed,
                              bool adaptive_stage_two = true);

}  // namespace expdes
