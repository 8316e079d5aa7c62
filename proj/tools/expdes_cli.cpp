#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "expdes/core.hpp"
#include "expdes/designs_estimators.hpp"
#include "expdes/deterministic_opt.hpp"
#include "expdes/exact_oracle.hpp"
#include "expdes/io.hpp"
#include "expdes/mc_harness.hpp"
#include "expdes/robust_opt.hpp"
#include "expdes/stochastic_opt.hpp"
#include "expdes/synth_design.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

expdes::Vec parse_list(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    vals.push_back(std::stod(cell));
  }
  if (vals.empty()) throw std::invalid_argument("empty numeric list: '" + s + "'");
  expdes::Vec v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
  return v;
}

// "1,2;3,4" -> strata over 1-based unit ids.
expdes::StrataPartition parse_strata(const std::string& s, int n) {
  std::vector<std::vector<int>> strata;
  std::stringstream groups(s);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<int> stratum;
    std::stringstream units(group);
    std::string unit;
    while (std::getline(units, unit, ',')) {
      if (unit.empty()) continue;
      stratum.push_back(std::stoi(unit) - 1);
    }
    if (!stratum.empty()) strata.push_back(std::move(stratum));
  }
  return expdes::StrataPartition(n, std::move(strata));
}

json to_json(const expdes::Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json assignment_json(const expdes::AssignmentVector& w) {
  json out = json::array();
  for (auto b : w.w) out.push_back(static_cast<int>(b));
  return out;
}

json one_based(const std::vector<int>& idx) {
  json out = json::array();
  for (int j : idx) out.push_back(j + 1);
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_path;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads")->capture_default_str();
  cmd->add_option("--out", c.out_path, "write the report here instead of stdout");
}

void emit(const std::string& command, const Common& c, const json& params, const json& results,
          const std::chrono::steady_clock::time_point& start) {
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  json report;
  report["command"] = command;
  report["parameters"] = params;
  report["results"] = results;
  report["version"] = kVersion;
  report["seed"] = c.seed;
  report["duration_ms"] = elapsed;
  const std::string text = report.dump(2) + "\n";
  if (c.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(c.out_path);
    if (!out) throw std::invalid_argument(c.out_path + ": cannot open for writing");
    out << text;
  }
}

expdes::DesignSpec make_design(const std::string& kind, int n, const std::string& p_list, int n1,
                               const std::string& strata) {
  if (kind == "bernoulli") {
    expdes::Vec p = p_list.empty() ? expdes::Vec::Constant(n, 0.5) : parse_list(p_list);
    if (p.size() == 1 && n > 1) p = expdes::Vec::Constant(n, p[0]);
    return expdes::BernoulliDesign{std::move(p)};
  }
  if (kind == "crd") {
    return expdes::CrdDesign{n, n1 > 0 ? n1 : n / 2};
  }
  if (kind == "paired") {
    expdes::StrataPartition partition = parse_strata(strata, n);
    std::vector<expdes::DesignSpec> inner;
    for (const auto& s : partition.strata)
      inner.emplace_back(expdes::CrdDesign{static_cast<int>(s.size()),
                                           static_cast<int>(s.size()) / 2});
    return expdes::StratifiedDesign{std::move(partition), std::move(inner)};
  }
  throw std::invalid_argument("unknown design '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimization toolkit for randomized experimental design"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read flag values from a config file; flags override");

  const auto start = std::chrono::steady_clock::now();

  // minimax-bernoulli
  auto* mmb = app.add_subcommand("minimax-bernoulli", "minimax Bernoulli design on a box");
  Common mmb_c;
  int mmb_n = 0;
  double mmb_b = 1.0;
  mmb->add_option("--n", mmb_n, "number of units")->required();
  mmb->add_option("--b", mmb_b, "outcome bound")->capture_default_str();
  add_common(mmb, mmb_c);
  mmb->callback([&] {
    const auto res = expdes::minimax_bernoulli(mmb_n, expdes::BoxUncertainty(mmb_b));
    json params{{"n", mmb_n}, {"b", mmb_b}};
    json results;
    results["p"] = res.optimal_p[0];
    results["optimal_p"] = to_json(res.optimal_p);
    results["worst_case_risk"] = res.worst_case_risk;
    results["worst_case_outcomes"] = res.worst_case_outcomes;
    emit("minimax-bernoulli", mmb_c, params, results, start);
  });

  // crd-risk
  auto* crd = app.add_subcommand("crd-risk", "closed-form CRD risk under the additive model");
  Common crd_c;
  std::string crd_g;
  double crd_sigma2 = 0.0, crd_a1 = 0.0, crd_a0 = 0.0;
  int crd_n1 = 0;
  crd->add_option("--g", crd_g, "comma-separated unit fixed effects")->required();
  crd->add_option("--sigma2", crd_sigma2, "noise variance")->capture_default_str();
  crd->add_option("--alpha1", crd_a1, "treated arm effect")->capture_default_str();
  crd->add_option("--alpha0", crd_a0, "control arm effect")->capture_default_str();
  crd->add_option("--n1", crd_n1, "treated count (default: balanced split)");
  add_common(crd, crd_c);
  crd->callback([&] {
    const expdes::Vec g = parse_list(crd_g);
    const int n = static_cast<int>(g.size());
    const int n1 = crd_n1 > 0 ? crd_n1 : expdes::optimal_crd_split(n).first;
    const expdes::AdditiveModelSpec m(g, crd_sigma2, crd_a1, crd_a0);
    json params{{"g", to_json(g)}, {"sigma2", crd_sigma2}, {"alpha1", crd_a1},
                {"alpha0", crd_a0}, {"n1", n1}};
    json results;
    results["risk"] = expdes::additive_crd_risk(n1, n - n1, m);
    emit("crd-risk", crd_c, params, results, start);
  });

  // matched-pairs
  auto* mp = app.add_subcommand("matched-pairs", "optimal matched pairs for known baselines");
  Common mp_c;
  std::string mp_g;
  mp->add_option("--g", mp_g, "comma-separated baselines")->required();
  add_common(mp, mp_c);
  mp->callback([&] {
    const expdes::BaselineVector g(parse_list(mp_g));
    const auto res = expdes::optimal_matched_pairs(g);
    json params{{"g", to_json(g.g)}};
    json pairs = json::array();
    for (const auto& s : res.partition.strata) pairs.push_back(one_based(s));
    json results;
    results["pairs"] = pairs;
    results["objective"] = res.objective;
    emit("matched-pairs", mp_c, params, results, start);
  });

  // da-opt
  auto* da = app.add_subcommand("da-opt", "treatment-variance-optimal assignment");
  Common da_c;
  std::string da_file, da_mode = "exhaustive";
  int da_restarts = 20;
  da->add_option("--covariates", da_file, "covariate CSV path")->required();
  da->add_option("--mode", da_mode, "exhaustive or local")->capture_default_str();
  da->add_option("--restarts", da_restarts, "local-search restarts")->capture_default_str();
  add_common(da, da_c);
  da->callback([&] {
    const expdes::DaProblem prob(expdes::parse_covariates(da_file));
    std::pair<expdes::AssignmentVector, double> res = [&] {
      if (da_mode == "exhaustive") return expdes::da_exhaustive(prob);
      if (da_mode == "local") {
        expdes::Rng rng(da_c.seed);
        return expdes::da_local_search(prob, da_restarts, rng);
      }
      throw std::invalid_argument("unknown mode '" + da_mode + "'");
    }();
    json params{{"covariates", da_file}, {"mode", da_mode}, {"restarts", da_restarts}};
    json results;
    results["w"] = assignment_json(res.first);
    results["objective"] = res.second;
    emit("da-opt", da_c, params, results, start);
  });

  // d-opt
  auto* dopt = app.add_subcommand("d-opt", "determinant-optimal k-subset selection");
  Common dopt_c;
  std::string dopt_file, dopt_mode = "exhaustive";
  int dopt_k = 0;
  dopt->add_option("--covariates", dopt_file, "covariate CSV path")->required();
  dopt->add_option("--k", dopt_k, "subset size")->required();
  dopt->add_option("--mode", dopt_mode, "exhaustive or greedy")->capture_default_str();
  add_common(dopt, dopt_c);
  dopt->callback([&] {
    const expdes::CovariateMatrix x = expdes::parse_covariates(dopt_file);
    const expdes::DoptMode mode = [&] {
      if (dopt_mode == "exhaustive") return expdes::DoptMode::Exhaustive;
      if (dopt_mode == "greedy") return expdes::DoptMode::GreedyExchange;
      throw std::invalid_argument("unknown mode '" + dopt_mode + "'");
    }();
    expdes::Rng rng(dopt_c.seed);
    const auto res = expdes::dopt_search(x, dopt_k, mode, rng);
    json params{{"covariates", dopt_file}, {"k", dopt_k}, {"mode", dopt_mode}};
    json results;
    results["subset"] = one_based(res.subset);
    results["log_det"] = res.objective;
    results["det"] = std::isinf(res.objective) ? 0.0 : std::exp(res.objective);
    emit("d-opt", dopt_c, params, results, start);
  });

  // synth-design
  auto* sd = app.add_subcommand("synth-design", "cardinality-constrained synthetic design");
  Common sd_c;
  std::string sd_panel, sd_cov, sd_f, sd_mode = "exhaustive";
  int sd_t0 = 0, sd_k = 1;
  sd->add_option("--panel", sd_panel, "long-form panel CSV path")->required();
  sd->add_option("--t0", sd_t0, "number of pre-experimental periods")->required();
  sd->add_option("--covariates", sd_cov, "optional covariate CSV path");
  sd->add_option("--f", sd_f, "target simplex weights (default uniform)");
  sd->add_option("--k", sd_k, "max treated-support size")->capture_default_str();
  sd->add_option("--mode", sd_mode, "exhaustive or greedy")->capture_default_str();
  add_common(sd, sd_c);
  sd->callback([&] {
    const expdes::PanelData panel = expdes::parse_panel(sd_panel, sd_t0);
    expdes::Mat x = expdes::Mat::Zero(panel.n(), 0);
    if (!sd_cov.empty()) x = expdes::parse_covariates(sd_cov).x;
    const expdes::Vec f = sd_f.empty()
                              ? expdes::Vec::Constant(panel.n(), 1.0 / panel.n())
                              : parse_list(sd_f);
    const expdes::SynthProblem prob(panel, x, f, sd_k);
    const expdes::SynthMode mode = [&] {
      if (sd_mode == "exhaustive") return expdes::SynthMode::Exhaustive;
      if (sd_mode == "greedy") return expdes::SynthMode::Greedy;
      throw std::invalid_argument("unknown mode '" + sd_mode + "'");
    }();
    const auto res = expdes::solve_synth_design(prob, mode);
    const auto [c_cov, c_out] = expdes::check_fit_constants(prob, res);
    json params{{"panel", sd_panel}, {"t0", sd_t0}, {"covariates", sd_cov},
                {"f", to_json(f)},   {"k", sd_k},   {"mode", sd_mode},
                {"fw_gap_tol", expdes::kFwGapTol}, {"fw_max_iter", expdes::kFwMaxIter}};
    json results;
    results["treated_set"] = one_based(res.treated_set);
    results["u"] = to_json(res.u);
    results["v"] = to_json(res.v);
    results["fit_loss"] = res.fit_loss;
    results["c_covariates"] = c_cov;
    results["c_outcomes"] = c_out;
    emit("synth-design", sd_c, params, results, start);
  });

  // theorem4-bound
  auto* t4 = app.add_subcommand("theorem4-bound", "ex-post bias bound for synthetic designs");
  Common t4_c;
  expdes::Theorem4Params t4_p{0.0, 0.0, 1, 0, 1.0, 0.0, 0.0, 1, 1};
  t4->add_option("--beta-bar", t4_p.beta_bar, "max covariate coefficient magnitude")->required();
  t4->add_option("--lambda-bar", t4_p.lambda_bar, "max factor loading magnitude")->required();
  t4->add_option("--r", t4_p.r, "factor dimension")->required();
  t4->add_option("--d", t4_p.d, "covariate dimension")->required();
  t4->add_option("--zeta-lower", t4_p.zeta_lower, "lower bound on zeta_T0/T0")->required();
  t4->add_option("--c", t4_p.c, "fit constant")->required();
  t4->add_option("--sigma-bar", t4_p.sigma_bar, "noise scale")->required();
  t4->add_option("--t0", t4_p.t0, "pre-experimental periods")->required();
  t4->add_option("--n", t4_p.n, "number of units")->required();
  add_common(t4, t4_c);
  t4->callback([&] {
    json params{{"beta_bar", t4_p.beta_bar}, {"lambda_bar", t4_p.lambda_bar}, {"r", t4_p.r},
                {"d", t4_p.d},               {"zeta_lower", t4_p.zeta_lower}, {"c", t4_p.c},
                {"sigma_bar", t4_p.sigma_bar}, {"t0", t4_p.t0}, {"n", t4_p.n}};
    json results;
    results["bound"] = expdes::theorem4_bound(t4_p);
    emit("theorem4-bound", t4_c, params, results, start);
  });

  // estimate
  auto* est = app.add_subcommand("estimate", "point estimates from observed data");
  Common est_c;
  std::string est_data, est_method = "dm", est_prop, est_strata, est_cov;
  est->add_option("--data", est_data, "observed CSV path (unit,y,w)")->required();
  est->add_option("--method", est_method, "dm, ipw, agg, or ols")->capture_default_str();
  est->add_option("--propensities", est_prop, "propensities for ipw (scalar or list)");
  est->add_option("--strata", est_strata, "strata for agg, e.g. '1,2;3,4' (1-based)");
  est->add_option("--covariates", est_cov, "covariate CSV path for ols");
  add_common(est, est_c);
  est->callback([&] {
    const auto [y, w] = expdes::parse_observed(est_data);
    const int n = w.n();
    double value = 0.0;
    if (est_method == "dm") {
      value = expdes::dm_estimate(y, w);
    } else if (est_method == "ipw") {
      if (est_prop.empty()) throw std::invalid_argument("ipw requires --propensities");
      expdes::Vec e = parse_list(est_prop);
      if (e.size() == 1 && n > 1) e = expdes::Vec::Constant(n, e[0]);
      value = expdes::ipw_estimate(y, w, e);
    } else if (est_method == "agg") {
      if (est_strata.empty()) throw std::invalid_argument("agg requires --strata");
      value = expdes::aggregate_estimate(y, w, parse_strata(est_strata, n));
    } else if (est_method == "ols") {
      if (est_cov.empty()) throw std::invalid_argument("ols requires --covariates");
      const expdes::CovariateMatrix x = expdes::parse_covariates(est_cov);
      auto fit = expdes::ols_fit(w, x, y, 0.0);
      value = fit.theta_hat[0];
    } else {
      throw std::invalid_argument("unknown method '" + est_method + "'");
    }
    json params{{"data", est_data},     {"method", est_method},     {"propensities", est_prop},
                {"strata", est_strata}, {"covariates", est_cov}};
    json results;
    results["estimate"] = value;
    emit("estimate", est_c, params, results, start);
  });

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact estimator moments by full enumeration");
  Common orc_c;
  std::string orc_table, orc_design = "crd", orc_p, orc_strata, orc_estimator = "dm",
              orc_cond = "none";
  int orc_n1 = 0, orc_cond_n1 = 0;
  orc->add_option("--table", orc_table, "science table CSV path (unit,y1,y0)")->required();
  orc->add_option("--design", orc_design, "bernoulli, crd, or paired")->capture_default_str();
  orc->add_option("--p", orc_p, "Bernoulli probabilities (scalar or list)");
  orc->add_option("--n1", orc_n1, "treated count for crd (default n/2)");
  orc->add_option("--strata", orc_strata, "strata for the paired design (1-based)");
  orc->add_option("--estimator", orc_estimator, "dm, ipw, or agg")->capture_default_str();
  orc->add_option("--condition", orc_cond, "none, nondegenerate, or fixed-n1")
      ->capture_default_str();
  orc->add_option("--condition-n1", orc_cond_n1, "treated count for fixed-n1 conditioning");
  add_common(orc, orc_c);
  orc->callback([&] {
    const expdes::ScienceTable t = expdes::parse_science_table(orc_table);
    const expdes::DesignSpec design = make_design(orc_design, t.n(), orc_p, orc_n1, orc_strata);
    const expdes::EstimatorChoice estimator = [&] {
      if (orc_estimator == "dm") return expdes::EstimatorChoice::dm();
      if (orc_estimator == "ipw") return expdes::EstimatorChoice::ipw();
      if (orc_estimator == "agg")
        return expdes::EstimatorChoice::agg(parse_strata(orc_strata, t.n()));
      throw std::invalid_argument("unknown estimator '" + orc_estimator + "'");
    }();
    const expdes::ConditioningEvent cond = [&] {
      if (orc_cond == "none") return expdes::ConditioningEvent::none();
      if (orc_cond == "nondegenerate") return expdes::ConditioningEvent::non_degenerate();
      if (orc_cond == "fixed-n1") return expdes::ConditioningEvent::fixed_n1(orc_cond_n1);
      throw std::invalid_argument("unknown condition '" + orc_cond + "'");
    }();
    const auto moments = expdes::exact_estimator_moments(design, t, estimator, cond);
    json params{{"table", orc_table},   {"design", orc_design},       {"p", orc_p},
                {"n1", orc_n1},         {"strata", orc_strata},       {"estimator", orc_estimator},
                {"condition", orc_cond}, {"condition_n1", orc_cond_n1}};
    json results;
    results["mean"] = moments.mean;
    results["variance"] = moments.variance;
    results["conditioning_mass"] = moments.conditioning_mass;
    results["sample_ate"] = expdes::sample_ate(t);
    emit("oracle", orc_c, params, results, start);
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo studies");
  Common sim_c;
  std::string sim_scenario = "replications", sim_model = "additive", sim_g, sim_beta, sim_cov,
              sim_design = "crd", sim_p, sim_strata, sim_estimator = "dm", sim_estimand = "sample",
              sim_noise = "gaussian";
  double sim_sigma2 = 1.0, sim_tau = 0.0, sim_a1 = 0.0, sim_a0 = 0.0, sim_target = 0.0,
         sim_q = 0.5, sim_threshold = 2.0 / 3.0;
  long long sim_reps = 10000;
  int sim_n1 = 0, sim_horizon = 10000;
  sim->add_option("--scenario", sim_scenario, "replications, two-stage, or stopping")
      ->capture_default_str();
  sim->add_option("--model", sim_model, "additive or linear")->capture_default_str();
  sim->add_option("--g", sim_g, "fixed effects for the additive model");
  sim->add_option("--sigma2", sim_sigma2, "noise variance")->capture_default_str();
  sim->add_option("--alpha1", sim_a1, "treated arm effect")->capture_default_str();
  sim->add_option("--alpha0", sim_a0, "control arm effect")->capture_default_str();
  sim->add_option("--tau", sim_tau, "treatment effect for the linear model")->capture_default_str();
  sim->add_option("--beta", sim_beta, "coefficients for the linear model");
  sim->add_option("--covariates", sim_cov, "covariate CSV path for the linear model");
  sim->add_option("--noise", sim_noise, "gaussian or rademacher")->capture_default_str();
  sim->add_option("--design", sim_design, "bernoulli, crd, or paired")->capture_default_str();
  sim->add_option("--p", sim_p, "Bernoulli probabilities (scalar or list)");
  sim->add_option("--n1", sim_n1, "treated count for crd (default n/2)");
  sim->add_option("--strata", sim_strata, "strata for the paired design (1-based)");
  sim->add_option("--estimator", sim_estimator, "dm, ipw, agg, or ols")->capture_default_str();
  sim->add_option("--estimand", sim_estimand, "sample or fixed")->capture_default_str();
  sim->add_option("--target", sim_target, "estimand value when fixed")->capture_default_str();
  sim->add_option("--reps", sim_reps, "replications")->capture_default_str();
  sim->add_option("--q", sim_q, "Bernoulli outcome parameter for two-stage")->capture_default_str();
  sim->add_option("--threshold", sim_threshold, "stopping threshold")->capture_default_str();
  sim->add_option("--horizon", sim_horizon, "stopping horizon")->capture_default_str();
  add_common(sim, sim_c);
  sim->callback([&] {
    json params{{"scenario", sim_scenario}, {"reps", sim_reps}};
    json results;
    if (sim_scenario == "two-stage") {
      params["q"] = sim_q;
      const auto exact = expdes::two_stage_adaptive_expectation(sim_q);
      const auto mc = expdes::two_stage_mc(sim_q, sim_reps, sim_c.seed);
      results["exact_expectation"] = exact.expectation;
      results["path_mass"] = exact.path_mass;
      results["mc_mean_mu_hat"] = mc.mean_mu_hat;
      results["mc_se_mu_hat"] = mc.se_mu_hat;
      results["mc_mean_ipw"] = mc.mean_ipw;
      results["mc_se_ipw"] = mc.se_ipw;
    } else if (sim_scenario == "stopping") {
      params["threshold"] = sim_threshold;
      params["horizon"] = sim_horizon;
      const auto res = expdes::stopping_rule_simulation(sim_threshold, sim_horizon, sim_reps,
                                                        sim_c.seed);
      results["stop_fraction"] = res.stop_fraction;
      if (res.conditional_mean) results["conditional_mean"] = *res.conditional_mean;
      else results["conditional_mean"] = nullptr;
    } else if (sim_scenario == "replications") {
      const expdes::NoiseKind noise = [&] {
        if (sim_noise == "gaussian") return expdes::NoiseKind::Gaussian;
        if (sim_noise == "rademacher") return expdes::NoiseKind::Rademacher;
        throw std::invalid_argument("unknown noise '" + sim_noise + "'");
      }();
      expdes::CovariateMatrix x(expdes::Mat::Ones(1, 1));
      int n = 0;
      expdes::DgpSpec dgp = [&]() -> expdes::DgpSpec {
        if (sim_model == "additive") {
          if (sim_g.empty()) throw std::invalid_argument("additive model requires --g");
          const expdes::Vec g = parse_list(sim_g);
          n = static_cast<int>(g.size());
          return expdes::AdditiveDgp{expdes::AdditiveModelSpec(g, sim_sigma2, sim_a1, sim_a0),
                                     noise};
        }
        if (sim_model == "linear") {
          if (sim_cov.empty() || sim_beta.empty())
            throw std::invalid_argument("linear model requires --covariates and --beta");
          x = expdes::parse_covariates(sim_cov);
          n = x.n();
          return expdes::LinearDgp(sim_tau, parse_list(sim_beta), x, std::sqrt(sim_sigma2), noise);
        }
        throw std::invalid_argument("unknown model '" + sim_model + "'");
      }();
      const expdes::DesignSpec design = make_design(sim_design, n, sim_p, sim_n1, sim_strata);
      const expdes::McEstimatorSpec estimator = [&] {
        if (sim_estimator == "dm") return expdes::McEstimatorSpec::dm();
        if (sim_estimator == "ipw") return expdes::McEstimatorSpec::ipw();
        if (sim_estimator == "agg")
          return expdes::McEstimatorSpec::agg(parse_strata(sim_strata, n));
        if (sim_estimator == "ols") return expdes::McEstimatorSpec::ols(x);
        throw std::invalid_argument("unknown estimator '" + sim_estimator + "'");
      }();
      const expdes::McEstimand estimand = [&] {
        if (sim_estimand == "sample") return expdes::McEstimand::sample();
        if (sim_estimand == "fixed") return expdes::McEstimand::fixed(sim_target);
        throw std::invalid_argument("unknown estimand '" + sim_estimand + "'");
      }();
      const auto report = expdes::run_replications(dgp, design, estimator, estimand, sim_reps,
                                                   sim_c.seed, sim_c.threads);
      params["model"] = sim_model;
      params["design"] = sim_design;
      params["estimator"] = sim_estimator;
      params["estimand"] = sim_estimand;
      results["replications"] = report.replications;
      results["excluded"] = report.excluded;
      results["bias"] = report.bias;
      results["variance"] = report.variance;
      results["mse"] = report.mse;
      results["mc_standard_error"] = report.mc_standard_error;
    } else {
      throw std::invalid_argument("unknown scenario '" + sim_scenario + "'");
    }
    emit("simulate", sim_c, params, results, start);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
