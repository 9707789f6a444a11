#include "biasltl/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "biasltl/rng.hpp"
#include "text_util.hpp"

namespace biasltl {

namespace {

// seed streams used when deriving per-repetition randomness
constexpr std::uint64_t kGenStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kShuffleStream = 3;

const std::map<std::string, Method>& method_table() {
  static const std::map<std::string, Method> table = {
      {"ITL-SGD", Method::ItlSgd},        {"ITL-ERM", Method::ItlErm},
      {"MEAN-SGD", Method::MeanSgd},      {"MEAN-ERM", Method::MeanErm},
      {"LTL-SGD-SGD", Method::LtlSgdSgd}, {"LTL-ERM-SGD", Method::LtlErmSgd},
      {"LTL-ERM-ERM", Method::LtlErmErm},
  };
  return table;
}

bool is_ltl(Method m) {
  return m == Method::LtlSgdSgd || m == Method::LtlErmSgd || m == Method::LtlErmErm;
}

bool needs_oracle_mean(Method m) {
  return m == Method::MeanSgd || m == Method::MeanErm;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' expects true/false");
}

std::string render_grid(const GridRange& g) {
  return detail::format_double(g.lo) + ":" + detail::format_double(g.hi) + ":" +
         std::to_string(g.count);
}

double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

std::string method_name(Method m) {
  for (const auto& [name, value] : method_table())
    if (value == m) return name;
  throw std::logic_error("method_name: unknown method");
}

Method parse_method(const std::string& name) {
  const auto it = method_table().find(name);
  if (it == method_table().end())
    throw std::invalid_argument("unknown method '" + name + "'");
  return it->second;
}

std::string environment_name(EnvironmentKind k) {
  switch (k) {
    case EnvironmentKind::SynthReg: return "synth-reg";
    case EnvironmentKind::SynthCls: return "synth-cls";
    case EnvironmentKind::Ratings: return "ratings";
  }
  throw std::logic_error("environment_name: unknown kind");
}

EnvironmentKind parse_environment(const std::string& name) {
  if (name == "synth-reg") return EnvironmentKind::SynthReg;
  if (name == "synth-cls") return EnvironmentKind::SynthCls;
  if (name == "ratings") return EnvironmentKind::Ratings;
  throw std::invalid_argument("unknown environment '" + name + "'");
}

GridRange parse_grid_range(const std::string& text) {
  const auto parts = detail::split(text, ':');
  if (parts.size() != 3)
    throw std::invalid_argument("grid '" + text + "' must be lo:hi:count");
  GridRange g;
  g.lo = detail::parse_double(parts[0], "grid");
  g.hi = detail::parse_double(parts[1], "grid");
  g.count = static_cast<int>(detail::parse_long(parts[2], "grid"));
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.count < 1)
    throw std::invalid_argument("grid '" + text + "' must satisfy 0 < lo <= hi, count >= 1");
  return g;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("config: methods is empty");
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (t_train < 1 || t_val < 1 || t_test < 1)
    throw std::invalid_argument("config: t_train, t_val and t_test must be >= 1");
  if (d < 1) throw std::invalid_argument("config: d must be >= 1");
  if (n_train < 1 || n_test < 1)
    throw std::invalid_argument("config: n_train and n_test must be >= 1");
  if (!(task_std >= 0.0)) throw std::invalid_argument("config: task_std must be >= 0");
  if (!(snr > 0.0)) throw std::invalid_argument("config: snr must be > 0");
  if (!(margin_threshold >= 0.0))
    throw std::invalid_argument("config: margin_threshold must be >= 0");
  if (!(logistic_scale > 0.0))
    throw std::invalid_argument("config: logistic_scale must be > 0");
  if (eval_every < 0) throw std::invalid_argument("config: eval_every must be >= 0");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (ratings_n_train < 1)
    throw std::invalid_argument("config: ratings_n_train must be >= 1");
  if (environment == EnvironmentKind::Ratings) {
    if (ratings_path.empty())
      throw std::invalid_argument("config: ratings environment needs ratings_path");
    for (Method m : methods)
      if (needs_oracle_mean(m))
        throw std::invalid_argument("config: " + method_name(m) +
                                    " needs oracle statistics (synthetic environments only)");
  }
  const bool classification =
      environment == EnvironmentKind::SynthCls ||
      (environment == EnvironmentKind::Ratings && ratings_classification);
  if (metric == EvalMetric::ZeroOne && !classification)
    throw std::invalid_argument("config: zero-one metric needs a classification environment");
}

int ExperimentConfig::effective_eval_every() const {
  if (eval_every > 0) return eval_every;
  return t_train > 100 ? 5 : 1;
}

void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key == "environment") {
    cfg.environment = parse_environment(value);
  } else if (key == "d") {
    cfg.d = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "n_train") {
    cfg.n_train = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "n_test") {
    cfg.n_test = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "task_mean_value") {
    cfg.task_mean_value = detail::parse_double(value, key);
  } else if (key == "task_std") {
    cfg.task_std = detail::parse_double(value, key);
  } else if (key == "snr") {
    cfg.snr = detail::parse_double(value, key);
  } else if (key == "margin_threshold") {
    cfg.margin_threshold = detail::parse_double(value, key);
  } else if (key == "logistic_scale") {
    cfg.logistic_scale = detail::parse_double(value, key);
  } else if (key == "ratings_path") {
    cfg.ratings_path = value;
  } else if (key == "ratings_mode") {
    if (value == "regression")
      cfg.ratings_classification = false;
    else if (value == "classification")
      cfg.ratings_classification = true;
    else
      throw std::invalid_argument(
          "config: ratings_mode must be 'regression' or 'classification'");
  } else if (key == "ratings_threshold") {
    cfg.ratings_threshold = detail::parse_double(value, key);
  } else if (key == "ratings_n_train") {
    cfg.ratings_n_train = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const std::string& part : detail::split(value, ',')) {
      const Method m = parse_method(detail::strip(part));
      if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end())
        cfg.methods.push_back(m);
    }
  } else if (key == "lambda_grid") {
    cfg.lambda_grid = parse_grid_range(value);
  } else if (key == "gamma_grid") {
    cfg.gamma_grid = parse_grid_range(value);
  } else if (key == "t_train") {
    cfg.t_train = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "t_val") {
    cfg.t_val = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "t_test") {
    cfg.t_test = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "runs") {
    cfg.runs = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(detail::parse_long(value, key));
  } else if (key == "eval_every") {
    cfg.eval_every = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "use_last_iterate") {
    cfg.use_last_iterate = parse_bool(value, key);
  } else if (key == "metric") {
    if (value == "loss")
      cfg.metric = EvalMetric::TrainingLoss;
    else if (value == "zero-one")
      cfg.metric = EvalMetric::ZeroOne;
    else
      throw std::invalid_argument("config: metric must be 'loss' or 'zero-one'");
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(detail::parse_long(value, key));
  } else if (key == "out") {
    cfg.out_dir = value;
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  ExperimentConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = line;
    const auto hash = body.find('#');
    if (hash != std::string::npos) body = body.substr(0, hash);
    body = detail::strip(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not 'key = value'");
    const std::string key = detail::strip(body.substr(0, eq));
    const std::string value = detail::strip(body.substr(eq + 1));
    try {
      apply_config_key(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("config: line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return cfg;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "environment = " << environment_name(cfg.environment) << "\n";
  out << "d = " << cfg.d << "\n";
  out << "n_train = " << cfg.n_train << "\n";
  out << "n_test = " << cfg.n_test << "\n";
  out << "task_mean_value = " << detail::format_double(cfg.task_mean_value) << "\n";
  out << "task_std = " << detail::format_double(cfg.task_std) << "\n";
  out << "snr = " << detail::format_double(cfg.snr) << "\n";
  out << "margin_threshold = " << detail::format_double(cfg.margin_threshold) << "\n";
  out << "logistic_scale = " << detail::format_double(cfg.logistic_scale) << "\n";
  if (!cfg.ratings_path.empty()) out << "ratings_path = " << cfg.ratings_path << "\n";
  out << "ratings_mode = " << (cfg.ratings_classification ? "classification" : "regression")
      << "\n";
  out << "ratings_threshold = " << detail::format_double(cfg.ratings_threshold) << "\n";
  out << "ratings_n_train = " << cfg.ratings_n_train << "\n";
  out << "methods = ";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    if (i) out << ",";
    out << method_name(cfg.methods[i]);
  }
  out << "\n";
  out << "lambda_grid = " << render_grid(cfg.lambda_grid) << "\n";
  out << "gamma_grid = " << render_grid(cfg.gamma_grid) << "\n";
  out << "t_train = " << cfg.t_train << "\n";
  out << "t_val = " << cfg.t_val << "\n";
  out << "t_test = " << cfg.t_test << "\n";
  out << "runs = " << cfg.runs << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "eval_every = " << cfg.eval_every << "\n";
  out << "use_last_iterate = " << (cfg.use_last_iterate ? "true" : "false") << "\n";
  out << "metric = " << (cfg.metric == EvalMetric::TrainingLoss ? "loss" : "zero-one")
      << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "out = " << cfg.out_dir << "\n";
  return out.str();
}

namespace {

struct RepCollections {
  TaskCollection train;
  TaskCollection validation;
  TaskCollection test;
};

RepCollections build_collections(const ExperimentConfig& cfg, std::uint64_t rep_seed) {
  TaskCollection all;
  if (cfg.environment == EnvironmentKind::Ratings) {
    all = load_rating_tasks(cfg.ratings_path, cfg.ratings_mode(), cfg.ratings_threshold,
                            derive_seed(rep_seed, kShuffleStream), cfg.ratings_n_train);
  } else {
    EnvironmentSpec spec;
    spec.d = cfg.d;
    spec.n_train = cfg.n_train;
    spec.n_test = cfg.n_test;
    spec.task_mean = Eigen::VectorXd::Constant(cfg.d, cfg.task_mean_value);
    spec.task_std = cfg.task_std;
    spec.snr = cfg.snr;
    spec.margin_threshold = cfg.margin_threshold;
    spec.logistic_scale = cfg.logistic_scale;
    spec.seed = derive_seed(rep_seed, kGenStream);
    const int count = cfg.t_train + cfg.t_val + cfg.t_test;
    if (cfg.environment == EnvironmentKind::SynthReg) {
      spec.mode = EnvironmentMode::RegressionAbsolute;
      all = gen_regression_tasks(spec, count);
    } else {
      spec.mode = EnvironmentMode::ClassificationHinge;
      all = gen_classification_tasks(spec, count);
    }
  }
  CollectionSplits splits = split_collection(all, cfg.t_train, cfg.t_val, cfg.t_test,
                                             derive_seed(rep_seed, kSplitStream));
  return {std::move(splits.train), std::move(splits.validation), std::move(splits.test)};
}

LearningCurve run_method(const ExperimentConfig& cfg, Method m,
                         const RepCollections& coll, const HyperGrid& grid,
                         const std::vector<int>& horizons) {
  const FistaOptions fista;
  if (is_ltl(m)) {
    SelectionOptions opts;
    opts.gradient_mode =
        m == Method::LtlSgdSgd ? GradientMode::ApproxSgd : GradientMode::ExactErm;
    opts.deploy = m == Method::LtlErmErm ? InnerSolver::Erm : InnerSolver::Sgd;
    opts.fista = fista;
    opts.metric = cfg.metric;
    opts.eval_every = cfg.effective_eval_every();
    opts.use_last_iterate = cfg.use_last_iterate;
    opts.threads = cfg.threads;
    return online_model_selection(coll.train, coll.validation, coll.test, grid, opts,
                                  method_name(m));
  }
  const Eigen::Index d = coll.train.splits.front().train.d();
  Eigen::VectorXd bias;
  if (needs_oracle_mean(m))
    bias = Eigen::VectorXd::Constant(d, cfg.task_mean_value);
  else
    bias = Eigen::VectorXd::Zero(d);
  const InnerSolver solver =
      (m == Method::ItlErm || m == Method::MeanErm) ? InnerSolver::Erm : InnerSolver::Sgd;
  return baseline_curve(bias, grid.lambdas, coll.validation, coll.test, horizons, solver,
                        fista, cfg.metric, method_name(m));
}

LearningCurve aggregate_runs(const std::vector<LearningCurve>& runs) {
  LearningCurve agg;
  agg.method = runs.front().method;
  const std::size_t npts = runs.front().points.size();
  for (const LearningCurve& c : runs)
    if (c.points.size() != npts)
      throw std::logic_error("aggregate_runs: inconsistent horizon sets");

  agg.points.reserve(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    CurvePoint pt;
    pt.t = runs.front().points[i].t;
    std::vector<double> means, lambdas, gammas;
    bool all_gamma = true;
    for (const LearningCurve& c : runs) {
      means.push_back(c.points[i].mean_error);
      lambdas.push_back(c.points[i].lambda);
      if (c.points[i].gamma)
        gammas.push_back(*c.points[i].gamma);
      else
        all_gamma = false;
    }
    for (double v : means) pt.mean_error += v;
    pt.mean_error /= static_cast<double>(means.size());
    double var = 0.0;
    for (double v : means) var += (v - pt.mean_error) * (v - pt.mean_error);
    pt.std_error = std::sqrt(var / static_cast<double>(means.size()));
    pt.lambda = lower_median(lambdas);
    if (all_gamma) pt.gamma = lower_median(gammas);
    agg.points.push_back(pt);
  }
  return agg;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  HyperGrid grid;
  grid.lambdas = log_spaced(cfg.lambda_grid.lo, cfg.lambda_grid.hi, cfg.lambda_grid.count);
  grid.gammas = log_spaced(cfg.gamma_grid.lo, cfg.gamma_grid.hi, cfg.gamma_grid.count);
  grid.validate();
  const std::vector<int> horizons =
      evaluation_horizons(cfg.t_train, cfg.effective_eval_every());

  ExperimentResult result;
  result.per_run.assign(cfg.methods.size(), {});

  std::vector<std::uint64_t> rep_seeds;
  for (int rep = 0; rep < cfg.runs; ++rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    rep_seeds.push_back(rep_seed);
    const RepCollections coll = build_collections(cfg, rep_seed);
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
      result.per_run[mi].push_back(
          run_method(cfg, cfg.methods[mi], coll, grid, horizons));
  }

  for (const auto& runs : result.per_run)
    result.aggregated.push_back(aggregate_runs(runs));

  const std::filesystem::path out(cfg.out_dir);
  std::filesystem::create_directories(out);
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const std::string name = method_name(cfg.methods[mi]);
    {
      std::ofstream f(out / ("curve_" + name + ".csv"));
      if (!f) throw std::runtime_error("run_experiment: cannot write curve file");
      write_curve_csv(f, result.aggregated[mi]);
    }
    for (int rep = 0; rep < cfg.runs; ++rep) {
      std::ofstream f(out / ("curve_" + name + "_run" + std::to_string(rep) + ".csv"));
      if (!f) throw std::runtime_error("run_experiment: cannot write curve file");
      write_curve_csv(f, result.per_run[mi][rep]);
    }
  }

  result.manifest_path = out / "manifest.txt";
  {
    std::ofstream f(result.manifest_path);
    if (!f) throw std::runtime_error("run_experiment: cannot write manifest");
    f << "# biasltl experiment manifest (rerunnable config)\n";
    f << "# version 0.1.0\n";
    f << "# repetition seeds:";
    for (std::uint64_t s : rep_seeds) f << " " << s;
    f << "\n";
    f << render_config(cfg);
  }
  return result;
}

}  // namespace biasltl
