#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "biasltl/environments.hpp"
#include "biasltl/erm_oracle.hpp"
#include "biasltl/meta_learner.hpp"

namespace biasltl {

// Candidate hyperparameter values for online model selection. Lambdas are
// strictly positive; a gamma of 0 is allowed and freezes the bias at 0 (the
// unbiased learner), which is useful as a degenerate cell in tests.
struct HyperGrid {
  std::vector<double> lambdas;
  std::vector<double> gammas;

  void validate() const;
};

std::vector<double> log_spaced(double lo, double hi, int count);

// Inner algorithm deployed at evaluation time: SGD deploys the averaged
// iterate, ERM deploys the (FISTA) minimizer.
enum class InnerSolver { Sgd, Erm };

// Test-split score: the training loss itself (default), or the 0-1 error as
// an alternate readout for classification tasks.
enum class EvalMetric { TrainingLoss, ZeroOne };

struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation across tasks
  int skipped = 0;      // tasks whose solver failed
};

// Train on every task's train split with the given bias and lambda, then
// average the test-split score across tasks.
ErrorStats test_error(const BiasVector& bias, double lambda,
                      const TaskCollection& tasks, InnerSolver solver,
                      const FistaOptions& fista = {},
                      EvalMetric metric = EvalMetric::TrainingLoss);

struct CurvePoint {
  int t = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double lambda = 0.0;
  std::optional<double> gamma;  // absent for fixed-bias baselines
};

struct LearningCurve {
  std::string method;
  std::vector<CurvePoint> points;
};

struct SelectionOptions {
  GradientMode gradient_mode = GradientMode::ApproxSgd;
  InnerSolver deploy = InnerSolver::Sgd;
  FistaOptions fista;
  EvalMetric metric = EvalMetric::TrainingLoss;
  int eval_every = 1;   // record every k-th incoming training task
  // Candidate estimator per cell: the prefix average of the bias iterates
  // (default) or the most recent iterate.
  bool use_last_iterate = false;
  int threads = 1;
};

// Online protocol: every (lambda, gamma) cell keeps its own bias estimate,
// updated with each incoming training task; at recorded horizons every cell is
// scored on the validation tasks (with its own lambda) and the winner's test
// error is recorded. Ties break toward the smaller (lambda, gamma) pair.
LearningCurve online_model_selection(const TaskCollection& train_stream,
                                     const TaskCollection& val_tasks,
                                     const TaskCollection& test_tasks,
                                     const HyperGrid& grid,
                                     const SelectionOptions& opts,
                                     const std::string& method_name);

// Fixed bias: validate lambda once, then report the (constant) test error at
// the given horizons for plot overlay.
LearningCurve baseline_curve(const BiasVector& fixed_bias,
                             const std::vector<double>& lambdas,
                             const TaskCollection& val_tasks,
                             const TaskCollection& test_tasks,
                             const std::vector<int>& horizons, InnerSolver solver,
                             const FistaOptions& fista, EvalMetric metric,
                             const std::string& method_name);

// {k, 2k, ...} up to t_total, always including t_total.
std::vector<int> evaluation_horizons(int t_total, int eval_every);

// Closed-form reference parameters from oracle environment statistics:
//   lambda = (R L / var_h) sqrt(2 (log n + 1) / n)
//   gamma  = (sqrt(2) ||m|| / (L R)) sqrt( 1 / (T (1 + 4 (log n + 1) / n)) )
struct TheoreticalRates {
  double lambda = 0.0;
  double gamma = 0.0;
};
TheoreticalRates theoretical_rates(double var_h, double mean_norm, double radius,
                                   double lipschitz, int n, int T);

// CSV: method,t,mean_error,std_error,lambda,gamma (gamma empty when absent).
void write_curve_csv(std::ostream& out, const LearningCurve& curve);

}  // namespace biasltl
