#include "expdes/mc_harness.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "expdes/designs_estimators.hpp"

namespace expdes {
namespace {

constexpr int kChunkCount = 128;  // fixed, so results do not depend on thread count

}  // namespace

LinearDgp::LinearDgp(double tau_in, Vec beta_in, CovariateMatrix x_in, double sigma_in,
                     NoiseKind noise_in)
    : tau(tau_in), beta(std::move(beta_in)), x(std::move(x_in)), sigma(sigma_in), noise(noise_in) {
  if (beta.size() != x.d()) throw std::invalid_argument("LinearDgp: beta length mismatch");
  if (!(sigma >= 0.0) || !std::isfinite(sigma) || !std::isfinite(tau))
    throw std::invalid_argument("LinearDgp: bad scalar parameter");
}

FactorPanelDgp::FactorPanelDgp(std::array<Mat, 2> alpha_in, std::array<Mat, 2> beta_in,
                               std::array<Mat, 2> lambda_in, Mat mu_in, Mat x_in,
                               double noise_scale_in, NoiseKind noise_in)
    : alpha(std::move(alpha_in)),
      beta(std::move(beta_in)),
      lambda(std::move(lambda_in)),
      mu(std::move(mu_in)),
      x(std::move(x_in)),
      noise_scale(noise_scale_in),
      noise(noise_in) {
  const int t = periods();
  const int r = static_cast<int>(mu.cols());
  const int d = static_cast<int>(x.cols());
  for (int w = 0; w < 2; ++w) {
    if (alpha[w].rows() != t || alpha[w].cols() != 1)
      throw std::invalid_argument("FactorPanelDgp: alpha must be T x 1");
    if (beta[w].rows() != t || beta[w].cols() != d)
      throw std::invalid_argument("FactorPanelDgp: beta must be T x d");
    if (lambda[w].rows() != t || lambda[w].cols() != r)
      throw std::invalid_argument("FactorPanelDgp: lambda must be T x r");
  }
  if (x.rows() != mu.rows()) throw std::invalid_argument("FactorPanelDgp: x row count mismatch");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("FactorPanelDgp: negative noise scale");
}

double draw_noise(NoiseKind kind, double scale, Rng& rng) {
  if (scale == 0.0) {
    // Keep the stream advancing identically to the noisy case.
    if (kind == NoiseKind::Gaussian) rng.normal();
    else rng.rademacher();
    return 0.0;
  }
  return kind == NoiseKind::Gaussian ? scale * rng.normal() : scale * rng.rademacher();
}

ScienceTable draw_science_table(const DgpSpec& dgp, Rng& rng) {
  if (const auto* a = std::get_if<AdditiveDgp>(&dgp)) {
    const int n = static_cast<int>(a->model.g.size());
    const double sd = std::sqrt(a->model.sigma2);
    Vec y1(n), y0(n);
    for (int j = 0; j < n; ++j) {
      y1[j] = a->model.alpha1 + a->model.g[j] + draw_noise(a->noise, sd, rng);
      y0[j] = a->model.alpha0 + a->model.g[j] + draw_noise(a->noise, sd, rng);
    }
    return ScienceTable(std::move(y1), std::move(y0));
  }
  if (const auto* l = std::get_if<LinearDgp>(&dgp)) {
    const int n = l->x.n();
    Vec y1(n), y0(n);
    for (int j = 0; j < n; ++j) {
      const double base = l->x.x.row(j).dot(l->beta);
      const double eps = draw_noise(l->noise, l->sigma, rng);  // eps_j1 = eps_j0
      y0[j] = base + eps;
      y1[j] = base + l->tau + eps;
    }
    return ScienceTable(std::move(y1), std::move(y0));
  }
  throw std::invalid_argument("draw_science_table: factor panel dgps yield panels, not tables");
}

std::pair<Mat, Mat> draw_factor_panels(const FactorPanelDgp& dgp, Rng& rng) {
  const int n = dgp.n(), t = dgp.periods();
  Mat y1(n, t), y0(n, t);
  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < t; ++s) {
      const double base1 = dgp.alpha[1](s, 0) + dgp.beta[1].row(s).dot(dgp.x.row(j)) +
                           dgp.lambda[1].row(s).dot(dgp.mu.row(j));
      const double base0 = dgp.alpha[0](s, 0) + dgp.beta[0].row(s).dot(dgp.x.row(j)) +
                           dgp.lambda[0].row(s).dot(dgp.mu.row(j));
      y1(j, s) = base1 + draw_noise(dgp.noise, dgp.noise_scale, rng);
      y0(j, s) = base0 + draw_noise(dgp.noise, dgp.noise_scale, rng);
    }
  }
  return {std::move(y1), std::move(y0)};
}

namespace {

struct ChunkPartial {
  long long count = 0;
  long long excluded = 0;
  double sum_err = 0.0;
  double sum_err_sq = 0.0;
};

}  // namespace

McReport run_replications(const DgpSpec& dgp, const DesignSpec& design,
                          const McEstimatorSpec& estimator, const McEstimand& estimand,
                          long long reps, std::uint64_t seed, int threads) {
  if (reps < 2) throw std::invalid_argument("run_replications: reps must be >= 2");
  if (threads < 1) throw std::invalid_argument("run_replications: threads must be >= 1");
  if (std::holds_alternative<FactorPanelDgp>(dgp))
    throw std::invalid_argument("run_replications: factor panel dgps use the panel harness");
  Vec propensities;
  if (estimator.kind == McEstimatorSpec::Kind::IPW) propensities = marginal_propensities(design);

  const int chunks = static_cast<int>(std::min<long long>(kChunkCount, reps));
  std::vector<ChunkPartial> partials(chunks);
  auto run_chunk = [&](int c) {
    const long long lo = reps * c / chunks;
    const long long hi = reps * (c + 1) / chunks;
    ChunkPartial part;
    for (long long rep = lo; rep < hi; ++rep) {
      Rng rng(seed, static_cast<std::uint64_t>(rep));
      const ScienceTable t = draw_science_table(dgp, rng);
      const AssignmentVector w = sample_assignment(design, rng);
      Vec y_obs(t.n());
      for (int j = 0; j < t.n(); ++j) y_obs[j] = w.w[j] ? t.y1[j] : t.y0[j];
      double est = 0.0;
      try {
        switch (estimator.kind) {
          case McEstimatorSpec::Kind::DM:
            est = dm_estimate(y_obs, w);
            break;
          case McEstimatorSpec::Kind::IPW:
            est = ipw_estimate(y_obs, w, propensities);
            break;
          case McEstimatorSpec::Kind::AGG:
            est = aggregate_estimate(y_obs, w, estimator.partition.at(0));
            break;
          case McEstimatorSpec::Kind::OLS:
            est = ols_fit(w, estimator.covariates.at(0), y_obs, 0.0).theta_hat[0];
            break;
        }
      } catch (const std::invalid_argument&) {
        ++part.excluded;
        continue;
      }
      const double target = estimand.kind == McEstimand::Kind::Sample ? sample_ate(t) : estimand.value;
      const double err = est - target;
      ++part.count;
      part.sum_err += err;
      part.sum_err_sq += err * err;
    }
    partials[c] = part;
  };

  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, chunks);
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) {
      pool.emplace_back([&] {
        for (;;) {
          const int c = next.fetch_add(1);
          if (c >= chunks) return;
          run_chunk(c);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  McReport report;
  report.seed = seed;
  double sum_err = 0.0, sum_err_sq = 0.0;
  for (const auto& part : partials) {  // chunk order: deterministic merge
    report.replications += part.count;
    report.excluded += part.excluded;
    sum_err += part.sum_err;
    sum_err_sq += part.sum_err_sq;
  }
  if (report.replications < 2)
    throw std::invalid_argument("run_replications: fewer than 2 non-degenerate replications");
  const double m = static_cast<double>(report.replications);
  report.bias = sum_err / m;
  report.variance = std::max(0.0, sum_err_sq / m - report.bias * report.bias);
  report.mse = report.variance + report.bias * report.bias;
  report.mc_standard_error = std::sqrt(report.variance / m);
  const double target_mean = estimand.kind == McEstimand::Kind::Fixed ? estimand.value : 0.0;
  report.mean = report.bias + target_mean;  // meaningful mean only for fixed targets
  return report;
}

StoppingResult stopping_rule_simulation(double threshold, int horizon, long long reps,
                                        std::uint64_t seed) {
  if (!(threshold > 0.0)) throw std::invalid_argument("stopping_rule_simulation: threshold must be positive");
  if (horizon < 1) throw std::invalid_argument("stopping_rule_simulation: horizon must be >= 1");
  if (reps < 1) throw std::invalid_argument("stopping_rule_simulation: reps must be >= 1");
  long long stopped = 0;
  double sum_stopped = 0.0;
  for (long long rep = 0; rep < reps; ++rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    double running = 0.0;
    for (int j = 1; j <= horizon; ++j) {
      running += rng.bernoulli(0.5) ? 1.0 : 0.0;
      const double mu_hat = running / j;
      if (mu_hat >= threshold) {
        ++stopped;
        sum_stopped += mu_hat;
        break;
      }
    }
  }
  StoppingResult out;
  out.stop_fraction = static_cast<double>(stopped) / static_cast<double>(reps);
  if (stopped > 0) out.conditional_mean = sum_stopped / static_cast<double>(stopped);
  return out;
}

TwoStageMcReport two_stage_mc(double q, long long reps, std::uint64_t seed,
                              bool adaptive_stage_two) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("two_stage_mc: q must lie in [0,1]");
  if (reps < 2) throw std::invalid_argument("two_stage_mc: reps must be >= 2");
  double sum_mu = 0.0, sum_mu_sq = 0.0, sum_ipw = 0.0, sum_ipw_sq = 0.0;
  for (long long rep = 0; rep < reps; ++rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    double y1t = rng.bernoulli(q), y1c = rng.bernoulli(q);
    double y2t = rng.bernoulli(q), y2c = rng.bernoulli(q);
    double y3t = rng.bernoulli(q), y3c = rng.bernoulli(q);
    (void)y3c;
    const bool first_treated = rng.bernoulli(0.5);
    const double obs_t = first_treated ? y1t : y2t;
    const double obs_c = first_treated ? y2c : y1c;
    bool treat3;
    if (!adaptive_stage_two) {
      treat3 = rng.bernoulli(0.5);
    } else if (obs_t > obs_c) {
      treat3 = true;
    } else if (obs_t < obs_c) {
      treat3 = false;
    } else {
      treat3 = rng.bernoulli(0.5);
    }
    // Unit 3's assignment depends only on units 1-2, so IPW with its
    // path-tree marginal Pr(W_3 = 1) = q(1-q) + (q^2 + (1-q)^2)/2 = 1/2 is
    // unbiased for any q; stage one is a CRD with e = 1/2 as well.
    const double e3 = 0.5;
    const double mu_hat = treat3 ? (obs_t + y3t) / 2.0 : obs_t;
    double ipw = obs_t / 0.5;
    if (treat3) ipw += y3t / e3;
    ipw /= 3.0;
    sum_mu += mu_hat;
    sum_mu_sq += mu_hat * mu_hat;
    sum_ipw += ipw;
    sum_ipw_sq += ipw * ipw;
  }
  const double m = static_cast<double>(reps);
  TwoStageMcReport out;
  out.replications = reps;
  out.mean_mu_hat = sum_mu / m;
  out.mean_ipw = sum_ipw / m;
  const double var_mu = std::max(0.0, sum_mu_sq / m - out.mean_mu_hat * out.mean_mu_hat);
  const double var_ipw = std::max(0.0, sum_ipw_sq / m - out.mean_ipw * out.mean_ipw);
  out.se_mu_hat = std::sqrt(var_mu / m);
  out.se_ipw = std::sqrt(var_ipw / m);
  return out;
}

}  // namespace expdes
