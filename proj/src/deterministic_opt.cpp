#include "expdes/deterministic_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "expdes/exact_oracle.hpp"

namespace expdes {
namespace {

constexpr int kDaExhaustiveMaxUnits = 22;
constexpr double kImproveTol = 1e-12;

bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

DaProblem::DaProblem(CovariateMatrix x_in) : x(std::move(x_in)) {
  const Mat xtx = x.x.transpose() * x.x;
  Eigen::FullPivLU<Mat> lu(xtx);
  if (!lu.isInvertible()) throw std::invalid_argument("DaProblem: singular x'x");
  projection_complement = Mat::Identity(x.n(), x.n()) - x.x * lu.solve(x.x.transpose());
}

double da_objective(const AssignmentVector& w, const DaProblem& prob) {
  if (w.n() != prob.x.n()) throw std::invalid_argument("da_objective: length mismatch");
  Vec wv(w.n());
  for (int j = 0; j < w.n(); ++j) wv[j] = w.w[j];
  return wv.dot(prob.projection_complement * wv);
}

namespace {

// Depth-first scan in lexicographic order of w, maintaining t = M w_partial
// so each set bit costs O(n). The first strict improvement is therefore the
// lexicographically smallest argmax.
void da_scan(const Mat& m, int j, std::vector<std::uint8_t>& w, Vec& t, double obj,
             double& best_obj, std::vector<std::uint8_t>& best_w) {
  const int n = static_cast<int>(w.size());
  if (j == n) {
    if (obj > kImproveTol && obj > best_obj + kImproveTol) {
      best_obj = obj;
      best_w = w;
    }
    return;
  }
  w[j] = 0;
  da_scan(m, j + 1, w, t, obj, best_obj, best_w);
  w[j] = 1;
  const double new_obj = obj + 2.0 * t[j] + m(j, j);
  t += m.col(j);
  da_scan(m, j + 1, w, t, new_obj, best_obj, best_w);
  t -= m.col(j);
  w[j] = 0;
}

}  // namespace

std::pair<AssignmentVector, double> da_exhaustive(const DaProblem& prob) {
  const int n = prob.x.n();
  if (n > kDaExhaustiveMaxUnits)
    throw std::invalid_argument("da_exhaustive: n exceeds the enumeration cap of 22");
  std::vector<std::uint8_t> w(n, 0), best_w;
  Vec t = Vec::Zero(n);
  double best_obj = 0.0;
  da_scan(prob.projection_complement, 0, w, t, 0.0, best_obj, best_w);
  if (best_w.empty())
    throw std::invalid_argument("da_exhaustive: no assignment with defined variance");
  return {AssignmentVector(std::move(best_w)), best_obj};
}

std::pair<AssignmentVector, double> da_local_search(const DaProblem& prob, int restarts, Rng& rng) {
  if (restarts < 1) throw std::invalid_argument("da_local_search: restarts must be positive");
  const Mat& m = prob.projection_complement;
  const int n = prob.x.n();
  std::vector<std::uint8_t> best_w;
  double best_obj = -1.0;
  for (int r = 0; r < restarts; ++r) {
    std::vector<std::uint8_t> w(n);
    for (int j = 0; j < n; ++j) w[j] = rng.bernoulli(0.5) ? 1 : 0;
    Vec t = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (w[j]) t += m.col(j);
    }
    double obj = 0.0;
    for (int j = 0; j < n; ++j) {
      if (w[j]) obj += t[j];
    }
    // Best-improvement hill climb over 1-flips and 2-swaps.
    for (;;) {
      double best_delta = kImproveTol;
      int move_a = -1, move_b = -1;  // flip a; if b >= 0, also flip b
      for (int a = 0; a < n; ++a) {
        const double delta = w[a] ? -2.0 * t[a] + m(a, a) : 2.0 * t[a] + m(a, a);
        if (delta > best_delta) {
          best_delta = delta;
          move_a = a;
          move_b = -1;
        }
      }
      for (int a = 0; a < n; ++a) {
        if (w[a]) continue;
        for (int b = 0; b < n; ++b) {
          if (!w[b]) continue;
          const double delta = 2.0 * (t[a] - t[b]) + m(a, a) + m(b, b) - 2.0 * m(a, b);
          if (delta > best_delta) {
            best_delta = delta;
            move_a = a;
            move_b = b;
          }
        }
      }
      if (move_a < 0) break;
      obj += best_delta;
      w[move_a] ^= 1;
      t += (w[move_a] ? 1.0 : -1.0) * m.col(move_a);
      if (move_b >= 0) {
        w[move_b] ^= 1;
        t += (w[move_b] ? 1.0 : -1.0) * m.col(move_b);
      }
    }
    if (obj > best_obj + kImproveTol ||
        (std::abs(obj - best_obj) <= kImproveTol && !best_w.empty() && lex_less(w, best_w)) ||
        best_w.empty()) {
      best_obj = obj;
      best_w = std::move(w);
    }
  }
  return {AssignmentVector(std::move(best_w)), best_obj};
}

double dopt_objective(const std::vector<int>& s, const CovariateMatrix& x) {
  const int d = x.d();
  if (static_cast<int>(s.size()) < d)
    throw std::invalid_argument("dopt_objective: subset smaller than dimension");
  Mat info = Mat::Zero(d, d);
  for (int j : s) {
    if (j < 0 || j >= x.n()) throw std::invalid_argument("dopt_objective: index out of range");
    info += x.x.row(j).transpose() * x.x.row(j);
  }
  Eigen::LLT<Mat> llt(info);
  if (llt.info() != Eigen::Success) return kLogDetSingular;
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) {
    const double l = llt.matrixL()(i, i);
    if (!(l > 0.0)) return kLogDetSingular;
    logdet += 2.0 * std::log(l);
  }
  return logdet;
}

namespace {

Mat information_matrix(const std::vector<int>& s, const CovariateMatrix& x) {
  Mat info = Mat::Zero(x.d(), x.d());
  for (int j : s) info += x.x.row(j).transpose() * x.x.row(j);
  return info;
}

}  // namespace

SubsetDesign dopt_search(const CovariateMatrix& x, int k, DoptMode mode, Rng& rng) {
  (void)rng;
  const int n = x.n(), d = x.d();
  if (k < d || k > n) throw std::invalid_argument("dopt_search: require d <= k <= n");
  std::vector<int> best;
  double best_obj = kLogDetSingular;
  if (mode == DoptMode::Exhaustive) {
    for_each_k_subset(n, k, [&](const std::vector<int>& s) {
      const double obj = dopt_objective(s, x);
      // Lexicographic enumeration order makes strict-greater the tie rule.
      if (obj > best_obj + kImproveTol || best.empty()) {
        best_obj = obj;
        best = s;
      }
    });
  } else {
    std::vector<char> in(n, 0);
    for (int step = 0; step < k; ++step) {
      int pick = -1;
      double pick_obj = kLogDetSingular;
      for (int j = 0; j < n; ++j) {
        if (in[j]) continue;
        best.push_back(j);
        const double obj = static_cast<int>(best.size()) >= d ? dopt_objective(best, x)
                                                              : kLogDetSingular;
        best.pop_back();
        if (pick < 0 || obj > pick_obj + kImproveTol) {
          pick = j;
          pick_obj = obj;
        }
      }
      best.push_back(pick);
      in[pick] = 1;
    }
    std::sort(best.begin(), best.end());
    best_obj = dopt_objective(best, x);
    // 1-exchange refinement, best improving swap each round.
    for (;;) {
      double cand_obj = best_obj;
      int out_idx = -1, in_j = -1;
      for (int i = 0; i < k; ++i) {
        const int removed = best[i];
        for (int j = 0; j < n; ++j) {
          if (in[j]) continue;
          best[i] = j;
          const double obj = dopt_objective(best, x);
          if (obj > cand_obj + kImproveTol) {
            cand_obj = obj;
            out_idx = i;
            in_j = j;
          }
        }
        best[i] = removed;
      }
      if (out_idx < 0) break;
      in[best[out_idx]] = 0;
      in[in_j] = 1;
      best[out_idx] = in_j;
      best_obj = cand_obj;
      std::sort(best.begin(), best.end());
    }
  }
  SubsetDesign out;
  out.subset = std::move(best);
  out.objective = best_obj;
  out.information_matrix = information_matrix(out.subset, x);
  return out;
}

}  // namespace expdes
