#include "biasltl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "biasltl/within_task.hpp"
#include "text_util.hpp"

namespace biasltl {

namespace {

// Deterministic chunked parallel loop; results must be written to disjoint
// slots keyed by index.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

Eigen::VectorXd deploy_weight(const TaskDataset& train, double lambda,
                              const BiasVector& bias, InnerSolver solver,
                              const FistaOptions& fista) {
  if (solver == InnerSolver::Sgd) return sgd_inner(train, lambda, bias).averaged;
  return fista_solve(train, lambda, bias, fista).w;
}

double task_score(const TaskDataset& test, const Eigen::VectorXd& w,
                  EvalMetric metric) {
  if (metric == EvalMetric::TrainingLoss) return empirical_risk(test, w);
  if (test.loss() != LossKind::Hinge)
    throw std::invalid_argument("test_error: zero-one metric needs hinge tasks");
  const Eigen::VectorXd preds = test.inputs() * w;
  double wrong = 0.0;
  for (Eigen::Index k = 0; k < test.n(); ++k)
    if (preds[k] * test.labels()[k] <= 0.0) wrong += 1.0;
  return wrong / static_cast<double>(test.n());
}

}  // namespace

void HyperGrid::validate() const {
  if (lambdas.empty() || gammas.empty())
    throw std::invalid_argument("HyperGrid: empty candidate list");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("HyperGrid: lambdas must be positive");
  for (double g : gammas)
    if (!(g >= 0.0)) throw std::invalid_argument("HyperGrid: gammas must be nonnegative");
  if (!std::is_sorted(lambdas.begin(), lambdas.end()) ||
      !std::is_sorted(gammas.begin(), gammas.end()))
    throw std::invalid_argument("HyperGrid: candidates must be sorted ascending");
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw std::invalid_argument("log_spaced: need 0 < lo <= hi and count >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (int i = 0; i < count; ++i)
    out[i] = std::pow(10.0, llo + (lhi - llo) * i / (count - 1));
  return out;
}

ErrorStats test_error(const BiasVector& bias, double lambda,
                      const TaskCollection& tasks, InnerSolver solver,
                      const FistaOptions& fista, EvalMetric metric) {
  if (tasks.count() == 0) throw std::invalid_argument("test_error: no tasks");
  if (!bias.allFinite()) throw std::invalid_argument("test_error: non-finite bias");

  std::vector<double> errs;
  errs.reserve(tasks.count());
  int skipped = 0;
  for (const TaskSplit& split : tasks.splits) {
    try {
      const Eigen::VectorXd w = deploy_weight(split.train, lambda, bias, solver, fista);
      errs.push_back(task_score(split.test, w, metric));
    } catch (const std::exception&) {
      ++skipped;
    }
  }
  if (errs.empty())
    throw std::runtime_error("test_error: solver failed on every task");

  ErrorStats stats;
  stats.skipped = skipped;
  for (double e : errs) stats.mean += e;
  stats.mean /= static_cast<double>(errs.size());
  double var = 0.0;
  for (double e : errs) var += (e - stats.mean) * (e - stats.mean);
  stats.stddev = std::sqrt(var / static_cast<double>(errs.size()));
  return stats;
}

std::vector<int> evaluation_horizons(int t_total, int eval_every) {
  if (t_total < 1) throw std::invalid_argument("evaluation_horizons: t_total < 1");
  if (eval_every < 1) throw std::invalid_argument("evaluation_horizons: eval_every < 1");
  std::vector<int> out;
  for (int t = eval_every; t <= t_total; t += eval_every) out.push_back(t);
  if (out.empty() || out.back() != t_total) out.push_back(t_total);
  return out;
}

LearningCurve online_model_selection(const TaskCollection& train_stream,
                                     const TaskCollection& val_tasks,
                                     const TaskCollection& test_tasks,
                                     const HyperGrid& grid,
                                     const SelectionOptions& opts,
                                     const std::string& method_name) {
  grid.validate();
  if (train_stream.count() == 0)
    throw std::invalid_argument("online_model_selection: empty training stream");

  const int p = static_cast<int>(grid.lambdas.size());
  const int r = static_cast<int>(grid.gammas.size());
  const int cells = p * r;
  const Eigen::Index d = train_stream.splits.front().train.d();

  struct Cell {
    double lambda;
    double gamma;
    Eigen::VectorXd h;
    Eigen::VectorXd h_sum;
  };
  std::vector<Cell> state(cells);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j) {
      Cell& c = state[i * r + j];
      c.lambda = grid.lambdas[i];
      c.gamma = grid.gammas[j];
      c.h = Eigen::VectorXd::Zero(d);
      c.h_sum = Eigen::VectorXd::Zero(d);
    }

  const std::vector<int> horizons =
      evaluation_horizons(train_stream.count(), opts.eval_every);
  std::size_t next_horizon = 0;

  LearningCurve curve;
  curve.method = method_name;
  curve.points.reserve(horizons.size());

  MetaConfig step_cfg;
  step_cfg.gradient_mode = opts.gradient_mode;
  step_cfg.fista = opts.fista;

  std::vector<double> val_errors(cells);
  for (int t = 1; t <= train_stream.count(); ++t) {
    const TaskDataset& task = train_stream.splits[t - 1].train;
    parallel_for(cells, opts.threads, [&](int c) {
      Cell& cell = state[c];
      cell.h_sum += cell.h;
      MetaConfig cfg = step_cfg;
      cfg.lambda = cell.lambda;
      cfg.gamma = cell.gamma;
      cell.h = meta_step(cell.h, task, cfg).next_bias;
    });

    if (next_horizon < horizons.size() && horizons[next_horizon] == t) {
      ++next_horizon;
      parallel_for(cells, opts.threads, [&](int c) {
        const Cell& cell = state[c];
        const Eigen::VectorXd candidate =
            opts.use_last_iterate ? cell.h : Eigen::VectorXd(cell.h_sum / t);
        val_errors[c] = test_error(candidate, cell.lambda, val_tasks, opts.deploy,
                                   opts.fista, opts.metric)
                            .mean;
      });
      int best = 0;
      for (int c = 1; c < cells; ++c)
        if (val_errors[c] < val_errors[best]) best = c;

      const Cell& winner = state[best];
      const Eigen::VectorXd candidate =
          opts.use_last_iterate ? winner.h : Eigen::VectorXd(winner.h_sum / t);
      const ErrorStats stats = test_error(candidate, winner.lambda, test_tasks,
                                          opts.deploy, opts.fista, opts.metric);
      curve.points.push_back(
          {t, stats.mean, stats.stddev, winner.lambda, winner.gamma});
    }
  }
  return curve;
}

LearningCurve baseline_curve(const BiasVector& fixed_bias,
                             const std::vector<double>& lambdas,
                             const TaskCollection& val_tasks,
                             const TaskCollection& test_tasks,
                             const std::vector<int>& horizons, InnerSolver solver,
                             const FistaOptions& fista, EvalMetric metric,
                             const std::string& method_name) {
  if (lambdas.empty()) throw std::invalid_argument("baseline_curve: empty lambda list");
  double best_lambda = lambdas.front();
  double best_err = kInfinity;
  for (double lambda : lambdas) {
    const double err =
        test_error(fixed_bias, lambda, val_tasks, solver, fista, metric).mean;
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  const ErrorStats stats =
      test_error(fixed_bias, best_lambda, test_tasks, solver, fista, metric);

  LearningCurve curve;
  curve.method = method_name;
  curve.points.reserve(horizons.size());
  for (int t : horizons)
    curve.points.push_back({t, stats.mean, stats.stddev, best_lambda, std::nullopt});
  return curve;
}

TheoreticalRates theoretical_rates(double var_h, double mean_norm, double radius,
                                   double lipschitz, int n, int T) {
  if (n < 1 || T < 1)
    throw std::invalid_argument("theoretical_rates: n and T must be >= 1");
  if (!(var_h >= 0.0) || !(radius > 0.0) || !(lipschitz > 0.0))
    throw std::invalid_argument("theoretical_rates: bad oracle statistics");
  const double nn = static_cast<double>(n);
  const double logn = std::log(nn) + 1.0;
  TheoreticalRates rates;
  rates.lambda = radius * lipschitz / var_h * std::sqrt(2.0 * logn / nn);
  rates.gamma = std::sqrt(2.0) * mean_norm / (lipschitz * radius) /
                std::sqrt(static_cast<double>(T) * (1.0 + 4.0 * logn / nn));
  return rates;
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
  out << "method,t,mean_error,std_error,lambda,gamma\n";
  for (const CurvePoint& pt : curve.points) {
    out << curve.method << "," << pt.t << "," << detail::format_double(pt.mean_error)
        << "," << detail::format_double(pt.std_error) << ","
        << detail::format_double(pt.lambda) << ",";
    if (pt.gamma) out << detail::format_double(*pt.gamma);
    out << "\n";
  }
}

}  // namespace biasltl
