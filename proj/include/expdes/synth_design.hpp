#pragma once

#include <utility>
#include <vector>

#include "expdes/core.hpp"

namespace expdes {

// Cardinality-constrained synthetic design instance. Targets stack the
// pre-period outcomes on top of the covariates (d may be 0).
struct SynthProblem {
  SynthProblem(PanelData panel_in, Mat x_in, Vec f_in, int k_in);

  int n() const { return static_cast<int>(panel.outcomes.rows()); }
  int d() const { return static_cast<int>(x.cols()); }

  PanelData panel;
  Mat x;  // n x d, d >= 0
  Vec f;  // unit-simplex target weights
  int k;  // max treated-support size
};

struct SynthWeights {
  Vec u;  // synthetic treatment weights
  Vec v;  // synthetic control weights
  std::vector<int> treated_set;
  double fit_loss;  // u-loss + v-loss
};

struct Theorem4Params {
  double beta_bar;
  double lambda_bar;
  int r;
  int d;
  double zeta_lower;  // lower bound on zeta_T0 / T0
  double c;           // fit constant
  double sigma_bar;
  int t0;
  int n;
};

// Per-unit targets z_j = (pre-period outcomes, covariates) and z_bar = sum f_j z_j.
std::pair<std::vector<Vec>, Vec> build_targets(const SynthProblem& prob);

// min over the unit simplex of ||target - sum_j w_j columns[j]||^2, by
// conditional gradient from uniform weights: duality gap <= 1e-10 or
// 50,000 iterations.
std::pair<Vec, double> simplex_least_squares(const std::vector<Vec>& columns, const Vec& target);

inline constexpr double kFwGapTol = 1e-10;
inline constexpr int kFwMaxIter = 50'000;

enum class SynthMode { Exhaustive, Greedy };

// Searches treated supports of size 1..k; u fit inside the support, v fit
// outside, total loss minimized. Disjoint supports hold by construction.
SynthWeights solve_synth_design(const SynthProblem& prob, SynthMode mode);

// 2(beta_bar d + (1 + beta_bar d) lambda_bar^2 r / zeta) c
//   + (2 lambda_bar^2 r / zeta) sqrt(2 ln 2n) sigma_bar / sqrt(T0).
double theorem4_bound(const Theorem4Params& params);

// Smallest fit constants consistent with the solved weights: square roots
// of the covariate and pre-period misfit norms scaled by d and T0, each
// maximized over the u and v sides.
std::pair<double, double> check_fit_constants(const SynthProblem& prob, const SynthWeights& w);

}  // namespace expdes
