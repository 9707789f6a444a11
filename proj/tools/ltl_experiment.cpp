// Experiment runner: synthetic and ratings-data environments, online
// hyperparameter selection, baseline matrix, CSV curves plus a rerunnable
// manifest. `certify` runs the certificate suite on random instances.

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biasltl/erm_oracle.hpp"
#include "biasltl/evaluation.hpp"
#include "biasltl/experiment.hpp"
#include "biasltl/random_instances.hpp"
#include "biasltl/within_task.hpp"

namespace {

using namespace biasltl;

struct FlagOverride {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

// Every flag funnels through apply_config_key so the command line and the
// config file share one parser; flags win over file values. A deque keeps the
// string targets at stable addresses for CLI11.
struct CommonFlags {
  std::string config_path;
  std::deque<FlagOverride> overrides;
  bool use_last_iterate = false;
  CLI::Option* use_last_opt = nullptr;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    auto opt = [&](const std::string& flag, const std::string& key,
                   const std::string& help) {
      overrides.push_back({key, "", nullptr});
      FlagOverride& ov = overrides.back();
      ov.option = cmd->add_option(flag, ov.value, help);
    };
    opt("--seed", "seed", "base seed for all repetitions");
    opt("--runs", "runs", "independent repetitions");
    opt("--t-train", "t_train", "training tasks per repetition");
    opt("--t-val", "t_val", "validation tasks");
    opt("--t-test", "t_test", "test tasks");
    opt("--methods", "methods",
        "comma list from ITL-SGD,ITL-ERM,MEAN-SGD,MEAN-ERM,LTL-SGD-SGD,"
        "LTL-ERM-SGD,LTL-ERM-ERM");
    opt("--lambda-grid", "lambda_grid", "lo:hi:count, log spaced");
    opt("--gamma-grid", "gamma_grid", "lo:hi:count, log spaced");
    opt("--out", "out", "output directory");
    opt("--threads", "threads", "worker threads for grid cells");
    opt("--eval-every", "eval_every", "record every k-th task (0 = auto)");
    opt("--metric", "metric", "test metric: loss or zero-one");
    opt("--d", "d", "input dimension (synthetic)");
    opt("--n-train", "n_train", "train points per task (synthetic)");
    opt("--n-test", "n_test", "test points per task (synthetic)");
    opt("--task-mean", "task_mean_value", "mean weight value per coordinate");
    opt("--task-std", "task_std", "task weight standard deviation");
    opt("--snr", "snr", "signal-to-noise ratio (regression)");
    opt("--margin", "margin_threshold", "margin exclusion threshold (classification)");
    opt("--logistic-scale", "logistic_scale", "label model scale (classification)");
    opt("--ratings", "ratings_path", "ratings CSV path");
    opt("--ratings-mode", "ratings_mode", "regression or classification");
    opt("--ratings-threshold", "ratings_threshold", "classification rating threshold");
    opt("--ratings-n-train", "ratings_n_train", "train rows per ratings task");
    use_last_opt = cmd->add_flag("--use-last-iterate", use_last_iterate,
                                 "validate the most recent bias iterate instead of "
                                 "the prefix average");
  }

  ExperimentConfig build(EnvironmentKind env) const {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = parse_config_file(config_path);
      if (cfg.environment != env)
        throw std::runtime_error("config file environment '" +
                                 environment_name(cfg.environment) +
                                 "' does not match this subcommand");
    }
    cfg.environment = env;
    for (const FlagOverride& ov : overrides)
      if (ov.option->count() > 0) apply_config_key(cfg, ov.key, ov.value);
    if (use_last_opt->count() > 0)
      apply_config_key(cfg, "use_last_iterate", use_last_iterate ? "true" : "false");
    return cfg;
  }
};

int run_env_command(const CommonFlags& flags, EnvironmentKind env) {
  const ExperimentConfig cfg = flags.build(env);
  cfg.validate();
  const ExperimentResult result = run_experiment(cfg);
  for (const LearningCurve& curve : result.aggregated) {
    const CurvePoint& last = curve.points.back();
    std::printf("%-12s T=%-4d error %.6f +/- %.6f\n", curve.method.c_str(), last.t,
                last.mean_error, last.std_error);
  }
  std::printf("wrote %zu curve files and %s\n",
              result.aggregated.size() * (1 + static_cast<std::size_t>(cfg.runs)),
              result.manifest_path.string().c_str());
  return 0;
}

bool report(const char* name, bool ok, const std::string& detail) {
  std::printf("%-34s %s%s%s\n", name, ok ? "PASS" : "FAIL",
              detail.empty() ? "" : "  ", detail.c_str());
  return ok;
}

int run_certify(std::uint64_t seed, int trials) {
  bool all_ok = true;
  SplitMix64 rng(seed);

  {  // primal and primal-dual within-task solvers produce one trajectory
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const RandomInstance inst = random_instance(rng);
      const InnerRun a = sgd_inner(inst.data, inst.lambda, inst.h, true);
      const InnerRun b = dual_coordinate_inner(inst.data, inst.lambda, inst.h, true);
      for (std::size_t k = 0; k < a.iterates.size(); ++k) {
        const double rel = (a.iterates[k] - b.iterates[k]).norm() /
                           (1.0 + a.iterates[k].norm());
        worst = std::max(worst, rel);
      }
    }
    all_ok &= report("solver equivalence", worst <= 1e-10,
                     "max rel diff " + std::to_string(worst));
  }

  {  // FISTA reaches its duality-gap tolerance
    RandomInstanceOptions opt;
    opt.n_min = 5;
    opt.lambda_log_lo = -2.0;
    int converged = 0;
    double worst_gap = 0.0;
    for (int t = 0; t < trials; ++t) {
      const RandomInstance inst = random_instance(rng, opt);
      const ErmSolution sol = fista_solve(inst.data, inst.lambda, inst.h);
      converged += sol.converged ? 1 : 0;
      worst_gap = std::max(worst_gap, sol.gap);
    }
    all_ok &= report("fista duality gap", converged == trials,
                     std::to_string(converged) + "/" + std::to_string(trials) +
                         " below tolerance");
  }

  {  // regret of the inner SGD against the ERM reference
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
      RandomInstanceOptions opt;
      opt.lambda_log_lo = -2.0;
      const RandomInstance inst = random_instance(rng, opt);
      const InnerRun run = sgd_inner(inst.data, inst.lambda, inst.h);
      const ErmSolution erm = fista_solve(inst.data, inst.lambda, inst.h);
      const double gap = inner_regret_gap(run, inst.data, inst.lambda, inst.h, erm);
      const double bound = inner_rate_constant(inst.data.radius_bound(), kLossLipschitz,
                                               inst.lambda, inst.data.n());
      if (gap <= bound + 1e-6) ++ok;
    }
    all_ok &= report("inner regret bound", ok == trials,
                     std::to_string(ok) + "/" + std::to_string(trials));
  }

  {  // eps-subgradient property of the approximate meta-gradient
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
      RandomInstanceOptions opt;
      opt.lambda_log_lo = -2.0;
      const RandomInstance inst = random_instance(rng, opt);
      const InnerRun run = sgd_inner(inst.data, inst.lambda, inst.h);
      const ErmSolution erm = fista_solve(inst.data, inst.lambda, inst.h);
      const double eps = epsilon_certificate(run, inst.data, inst.lambda, inst.h, erm);
      const Eigen::VectorXd grad = approx_meta_gradient(run, inst.lambda, inst.h);
      Eigen::VectorXd hp(inst.h.size());
      for (Eigen::Index j = 0; j < hp.size(); ++j)
        hp[j] = inst.h[j] + 10.0 * (2.0 * rng.uniform() - 1.0);
      const double lh = regularized_empirical_risk(inst.data, inst.lambda, inst.h, erm.w);
      const ErmSolution erm_p = fista_solve(inst.data, inst.lambda, hp);
      const double lhp = regularized_empirical_risk(inst.data, inst.lambda, hp, erm_p.w);
      if (lhp >= lh + grad.dot(hp - inst.h) - eps - 1e-6) ++ok;
    }
    all_ok &= report("eps-subgradient certificate", ok == trials,
                     std::to_string(ok) + "/" + std::to_string(trials));
  }

  {  // loss calculus: Fenchel-Young, prox optimality, Moreau identity
    int ok = 0;
    const int cases = trials * 10;
    for (int t = 0; t < cases; ++t) {
      const LossKind kind = rng.next() % 2 == 0 ? LossKind::Absolute : LossKind::Hinge;
      const double y = kind == LossKind::Hinge ? (rng.uniform() < 0.5 ? -1.0 : 1.0)
                                               : 4.0 * rng.gaussian();
      const double yhat = 4.0 * rng.gaussian();
      const double eta = std::pow(10.0, rng.uniform(-2.0, 2.0));
      const double a = 4.0 * rng.gaussian();
      bool good = true;
      const SubgradientInterval dom = conjugate_domain(kind, y);
      const double u = dom.lo + (dom.hi - dom.lo) * rng.uniform();
      const double fy =
          loss_value(kind, yhat, y) + loss_conjugate(kind, u, y) - u * yhat;
      good &= fy >= -1e-10;
      const double p = loss_prox(kind, eta, a, y);
      good &= loss_subgradient(kind, p, y).distance(eta * (a - p)) <= eta * 1e-9;
      const double m =
          conjugate_prox(kind, eta, a, y) + eta * loss_prox(kind, eta, a / eta, y);
      good &= std::abs(m - a) <= 1e-10 * std::max(1.0, std::abs(a));
      if (good) ++ok;
    }
    all_ok &= report("loss calculus", ok == cases,
                     std::to_string(ok) + "/" + std::to_string(cases));
  }

  std::printf("%s\n", all_ok ? "all checks passed" : "some checks FAILED");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-to-learn experiments: biased within-task SGD with an "
               "online bias estimator"};
  app.require_subcommand(1);

  CommonFlags reg_flags, cls_flags, ratings_flags;
  CLI::App* synth_reg =
      app.add_subcommand("synth-reg", "synthetic regression environment (absolute loss)");
  reg_flags.add(synth_reg);
  CLI::App* synth_cls = app.add_subcommand(
      "synth-cls", "synthetic classification environment (hinge loss)");
  cls_flags.add(synth_cls);
  CLI::App* ratings =
      app.add_subcommand("ratings", "ratings CSV environment (computer survey style)");
  ratings_flags.add(ratings);

  std::uint64_t certify_seed = 7;
  int certify_trials = 50;
  CLI::App* certify = app.add_subcommand(
      "certify", "run the certificate/invariant suite on random instances");
  certify->add_option("--seed", certify_seed, "generator seed");
  certify->add_option("--trials", certify_trials, "instances per check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_reg->parsed()) return run_env_command(reg_flags, EnvironmentKind::SynthReg);
    if (synth_cls->parsed()) return run_env_command(cls_flags, EnvironmentKind::SynthCls);
    if (ratings->parsed()) return run_env_command(ratings_flags, EnvironmentKind::Ratings);
    if (certify->parsed()) return run_certify(certify_seed, certify_trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
