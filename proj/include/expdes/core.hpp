#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace expdes {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Units are indexed 1..n externally (file formats, reports) and 0..n-1
// internally. Everything in this header is 0-based.

// The 2n potential outcomes of a finite sample: y1[j] under treatment,
// y0[j] under control.
struct ScienceTable {
  ScienceTable(Vec y1_in, Vec y0_in);

  int n() const { return static_cast<int>(y1.size()); }

  Vec y1;
  Vec y0;
};

// Average causal effect of the finite sample, (1/n) sum (y1_j - y0_j).
double sample_ate(const ScienceTable& t);

// A realized treatment assignment vector w in {0,1}^n.
struct AssignmentVector {
  explicit AssignmentVector(std::vector<std::uint8_t> bits);
  AssignmentVector(int n, std::uint64_t mask);  // bit j of mask -> unit j

  int n() const { return static_cast<int>(w.size()); }
  int n1() const;
  int n0() const { return n() - n1(); }
  std::uint64_t mask() const;  // requires n <= 63

  bool operator==(const AssignmentVector& other) const { return w == other.w; }

  std::vector<std::uint8_t> w;
};

// A permutation pi of {0..n-1}; target(j) = pi(j).
struct Permutation {
  explicit Permutation(std::vector<int> targets);

  static Permutation identity(int n);
  Permutation inverse() const;
  int n() const { return static_cast<int>(targets.size()); }

  std::vector<int> targets;
};

// Output index i holds v[pi^-1(i)], i.e. value at j moves to pi(j).
Vec apply_permutation(const Permutation& pi, const Vec& v);
AssignmentVector apply_permutation(const Permutation& pi, const AssignmentVector& v);

// A disjoint cover of {0..n-1} into nonempty strata.
struct StrataPartition {
  StrataPartition(int n, std::vector<std::vector<int>> strata_in);

  int n() const { return n_; }
  int num_strata() const { return static_cast<int>(strata.size()); }

  std::vector<std::vector<int>> strata;

 private:
  int n_;
};

struct DesignSpec;

// Independent per-unit coin flips with probabilities p_j in (0,1).
struct BernoulliDesign {
  Vec p;
};

// Uniform distribution over assignments with exactly n1 treated units.
struct CrdDesign {
  int n;
  int n1;
};

// Independent randomization within each stratum.
struct StratifiedDesign {
  StrataPartition partition;
  std::vector<DesignSpec> inner;  // one spec per stratum, sized to it
};

// An explicit probability mass over assignment vectors.
struct DesignPmf {
  DesignPmf(int n, std::vector<std::pair<AssignmentVector, double>> support_in);

  int n;
  std::vector<std::pair<AssignmentVector, double>> support;
};

struct DesignSpec {
  DesignSpec(BernoulliDesign d);      // NOLINT(google-explicit-constructor)
  DesignSpec(CrdDesign d);            // NOLINT
  DesignSpec(StratifiedDesign d);     // NOLINT
  DesignSpec(DesignPmf d);            // NOLINT

  int n() const;

  std::variant<BernoulliDesign, CrdDesign, StratifiedDesign, DesignPmf> value;
};

// Per-unit marginal treatment probabilities Pr(W_j = 1) under the design.
Vec marginal_propensities(const DesignSpec& d);

// Observed covariates, n rows by d columns.
struct CovariateMatrix {
  CovariateMatrix(Mat x_in, std::vector<std::string> labels_in = {});

  int n() const { return static_cast<int>(x.rows()); }
  int d() const { return static_cast<int>(x.cols()); }

  Mat x;
  std::vector<std::string> labels;
};

// n units observed over T periods with a pre-experimental cutoff T0
// (periods 0..T0-1 are pre-experimental).
struct PanelData {
  PanelData(Mat outcomes_in, int t0_in);

  int n() const { return static_cast<int>(outcomes.rows()); }
  int periods() const { return static_cast<int>(outcomes.cols()); }

  Mat outcomes;
  int t0;
};

}  // namespace expdes
