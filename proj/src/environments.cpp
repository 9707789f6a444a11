#include "biasltl/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "biasltl/rng.hpp"
#include "text_util.hpp"

namespace biasltl {

namespace {

constexpr long kRejectionCap = 1000000;

Eigen::VectorXd sphere_point(SplitMix64& rng, int d) {
  Eigen::VectorXd x(d);
  while (true) {
    for (int j = 0; j < d; ++j) x[j] = rng.gaussian();
    const double norm = x.norm();
    if (norm > 1e-150) return x / norm;
  }
}

Eigen::VectorXd draw_task_weight(SplitMix64& rng, const EnvironmentSpec& spec) {
  Eigen::VectorXd w = spec.task_mean;
  for (int j = 0; j < spec.d; ++j) w[j] += spec.task_std * rng.gaussian();
  return w;
}

TaskSplit make_split(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels,
                     int n_train, LossKind loss) {
  const int total = static_cast<int>(inputs.rows());
  TaskDataset train(inputs.topRows(n_train), labels.head(n_train), loss);
  TaskDataset test(inputs.bottomRows(total - n_train), labels.tail(total - n_train),
                   loss);
  return {std::move(train), std::move(test)};
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (d < 1) throw std::invalid_argument("EnvironmentSpec: d must be >= 1");
  if (n_train < 1 || n_test < 1)
    throw std::invalid_argument("EnvironmentSpec: n_train and n_test must be >= 1");
  if (task_mean.size() != d)
    throw std::invalid_argument("EnvironmentSpec: task_mean dimension mismatch");
  if (!(task_std >= 0.0))
    throw std::invalid_argument("EnvironmentSpec: task_std must be >= 0");
  if (!(snr > 0.0)) throw std::invalid_argument("EnvironmentSpec: snr must be > 0");
  if (!(margin_threshold >= 0.0))
    throw std::invalid_argument("EnvironmentSpec: margin_threshold must be >= 0");
  if (!(logistic_scale > 0.0))
    throw std::invalid_argument("EnvironmentSpec: logistic_scale must be > 0");
}

TaskCollection gen_regression_tasks(const EnvironmentSpec& spec, int count) {
  spec.validate();
  if (spec.mode != EnvironmentMode::RegressionAbsolute)
    throw std::invalid_argument("gen_regression_tasks: spec mode is not regression");
  if (count <= 0) throw std::invalid_argument("gen_regression_tasks: count must be > 0");

  TaskCollection out;
  out.splits.reserve(count);
  out.true_weights.reserve(count);
  const int total = spec.n_train + spec.n_test;
  for (int i = 0; i < count; ++i) {
    SplitMix64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXd w = draw_task_weight(rng, spec);
    const double sigma = w.norm() / (std::sqrt(static_cast<double>(spec.d)) * spec.snr);
    Eigen::MatrixXd inputs(total, spec.d);
    Eigen::VectorXd labels(total);
    for (int j = 0; j < total; ++j) {
      const Eigen::VectorXd x = sphere_point(rng, spec.d);
      inputs.row(j) = x;
      labels[j] = x.dot(w) + sigma * rng.gaussian();
    }
    out.splits.push_back(make_split(inputs, labels, spec.n_train, LossKind::Absolute));
    out.true_weights.push_back(w);
  }
  return out;
}

TaskCollection gen_classification_tasks(const EnvironmentSpec& spec, int count) {
  spec.validate();
  if (spec.mode != EnvironmentMode::ClassificationHinge)
    throw std::invalid_argument("gen_classification_tasks: spec mode is not classification");
  if (count <= 0)
    throw std::invalid_argument("gen_classification_tasks: count must be > 0");

  TaskCollection out;
  out.splits.reserve(count);
  out.true_weights.reserve(count);
  const int total = spec.n_train + spec.n_test;
  for (int i = 0; i < count; ++i) {
    SplitMix64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXd w = draw_task_weight(rng, spec);
    Eigen::MatrixXd inputs(total, spec.d);
    Eigen::VectorXd labels(total);
    for (int j = 0; j < total; ++j) {
      Eigen::VectorXd x;
      double z = 0.0;
      long attempts = 0;
      do {
        if (++attempts > kRejectionCap)
          throw std::runtime_error(
              "gen_classification_tasks: margin rejection loop exceeded its cap; "
              "margin_threshold looks infeasible for this task");
        x = sphere_point(rng, spec.d);
        z = x.dot(w);
      } while (std::abs(z) < spec.margin_threshold);
      inputs.row(j) = x;
      const double p_pos = 1.0 / (1.0 + spec.logistic_scale * std::exp(-z));
      labels[j] = rng.uniform() < p_pos ? 1.0 : -1.0;
    }
    out.splits.push_back(make_split(inputs, labels, spec.n_train, LossKind::Hinge));
    out.true_weights.push_back(w);
  }
  return out;
}

TaskCollection load_rating_tasks(const std::filesystem::path& csv_path,
                                 EnvironmentMode mode, double threshold,
                                 std::uint64_t shuffle_seed, int n_train) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("load_rating_tasks: cannot open " + csv_path.string());
  if (n_train < 1) throw std::invalid_argument("load_rating_tasks: n_train must be >= 1");

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_rating_tasks: empty file " + csv_path.string());
  const auto header = detail::split(detail::strip(line), ',');
  if (header.size() < 3 || detail::strip(header.front()) != "task_id" ||
      detail::strip(header.back()) != "rating")
    throw std::runtime_error(
        "load_rating_tasks: expected header task_id,x1,...,xk,rating");
  const int d = static_cast<int>(header.size()) - 2;

  struct Row {
    Eigen::VectorXd x;
    double rating;
  };
  std::vector<std::string> task_order;
  std::map<std::string, std::vector<Row>> by_task;

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    const auto fields = detail::split(stripped, ',');
    const std::string where = "row " + std::to_string(line_no);
    if (static_cast<int>(fields.size()) != d + 2)
      throw std::runtime_error("load_rating_tasks: " + where + ": expected " +
                               std::to_string(d + 2) + " fields, got " +
                               std::to_string(fields.size()));
    Row row;
    row.x.resize(d);
    for (int j = 0; j < d; ++j)
      row.x[j] = detail::parse_double(fields[j + 1], "load_rating_tasks: " + where);
    row.rating = detail::parse_double(fields[d + 1], "load_rating_tasks: " + where);
    if (row.rating < 0.0 || row.rating > 10.0 ||
        row.rating != std::floor(row.rating))
      throw std::runtime_error("load_rating_tasks: " + where +
                               ": rating must be an integer in [0, 10]");
    const std::string id = detail::strip(fields[0]);
    if (by_task.find(id) == by_task.end()) task_order.push_back(id);
    by_task[id].push_back(std::move(row));
  }
  if (task_order.empty())
    throw std::runtime_error("load_rating_tasks: no data rows in " + csv_path.string());

  double max_norm = 0.0;
  for (const auto& [id, rows] : by_task)
    for (const Row& r : rows) max_norm = std::max(max_norm, r.x.norm());
  if (max_norm <= 0.0)
    throw std::runtime_error("load_rating_tasks: all-zero inputs");

  const LossKind loss =
      mode == EnvironmentMode::RegressionAbsolute ? LossKind::Absolute : LossKind::Hinge;
  TaskCollection out;
  out.splits.reserve(task_order.size());
  for (std::size_t i = 0; i < task_order.size(); ++i) {
    const std::string& id = task_order[i];
    auto& rows = by_task[id];
    if (static_cast<int>(rows.size()) < n_train + 1)
      throw std::runtime_error("load_rating_tasks: task '" + id + "' has only " +
                               std::to_string(rows.size()) + " rows; need at least " +
                               std::to_string(n_train + 1));
    SplitMix64 rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(i)));
    for (std::size_t k = rows.size() - 1; k > 0; --k)
      std::swap(rows[k], rows[rng.next() % (k + 1)]);

    const int total = static_cast<int>(rows.size());
    Eigen::MatrixXd inputs(total, d);
    Eigen::VectorXd labels(total);
    for (int j = 0; j < total; ++j) {
      inputs.row(j) = rows[j].x / max_norm;
      if (mode == EnvironmentMode::RegressionAbsolute)
        labels[j] = rows[j].rating;
      else
        labels[j] = rows[j].rating > threshold ? 1.0 : -1.0;
    }
    out.splits.push_back(make_split(inputs, labels, n_train, loss));
  }
  return out;
}

CollectionSplits split_collection(const TaskCollection& tasks, int t_train, int t_val,
                                  int t_test, std::uint64_t seed) {
  if (t_train < 0 || t_val < 0 || t_test < 0)
    throw std::invalid_argument("split_collection: negative split size");
  const int total = tasks.count();
  if (t_train + t_val + t_test > total)
    throw std::invalid_argument("split_collection: not enough tasks (" +
                                std::to_string(total) + " available, " +
                                std::to_string(t_train + t_val + t_test) + " requested)");

  std::vector<int> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(seed);
  for (int k = total - 1; k > 0; --k)
    std::swap(perm[k], perm[rng.next() % static_cast<std::uint64_t>(k + 1)]);

  auto take = [&](int offset, int count) {
    TaskCollection part;
    part.splits.reserve(count);
    if (tasks.has_true_weights()) part.true_weights.reserve(count);
    for (int k = 0; k < count; ++k) {
      const int idx = perm[offset + k];
      part.splits.push_back(tasks.splits[idx]);
      if (tasks.has_true_weights()) part.true_weights.push_back(tasks.true_weights[idx]);
    }
    return part;
  };
  return {take(0, t_train), take(t_train, t_val), take(t_train + t_val, t_test)};
}

double environment_variance(const TaskCollection& tasks, const BiasVector& h) {
  if (!tasks.has_true_weights())
    throw std::invalid_argument("environment_variance: collection has no true weights");
  double acc = 0.0;
  for (const Eigen::VectorXd& w : tasks.true_weights) {
    if (w.size() != h.size())
      throw std::invalid_argument("environment_variance: dimension mismatch");
    acc += (w - h).squaredNorm();
  }
  return std::sqrt(0.5 * acc / static_cast<double>(tasks.true_weights.size()));
}

void save_collection(const std::filesystem::path& dir, const TaskCollection& tasks) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest)
    throw std::runtime_error("save_collection: cannot write manifest in " + dir.string());
  manifest << "file,loss,n_train,true_weights\n";
  for (int i = 0; i < tasks.count(); ++i) {
    const TaskSplit& split = tasks.splits[i];
    char name[32];
    std::snprintf(name, sizeof(name), "task_%05d.csv", i);
    std::ofstream task_file(dir / name);
    if (!task_file)
      throw std::runtime_error("save_collection: cannot write task file " +
                               std::string(name));
    const int d = static_cast<int>(split.train.d());
    for (int j = 0; j < d; ++j) task_file << "x" << (j + 1) << ",";
    task_file << "label\n";
    auto dump = [&](const TaskDataset& data) {
      for (Eigen::Index r = 0; r < data.n(); ++r) {
        for (Eigen::Index c = 0; c < data.d(); ++c)
          task_file << detail::format_double(data.inputs()(r, c)) << ",";
        task_file << detail::format_double(data.labels()[r]) << "\n";
      }
    };
    dump(split.train);
    dump(split.test);

    manifest << name << ","
             << (split.train.loss() == LossKind::Absolute ? "absolute" : "hinge") << ","
             << split.train.n() << ",";
    if (tasks.has_true_weights()) {
      const Eigen::VectorXd& w = tasks.true_weights[i];
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (j) manifest << ";";
        manifest << detail::format_double(w[j]);
      }
    }
    manifest << "\n";
  }
}

TaskCollection load_collection(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.csv");
  if (!manifest)
    throw std::runtime_error("load_collection: cannot open manifest in " + dir.string());
  std::string line;
  if (!std::getline(manifest, line) ||
      detail::strip(line) != "file,loss,n_train,true_weights")
    throw std::runtime_error("load_collection: bad manifest header");

  TaskCollection out;
  while (std::getline(manifest, line)) {
    const std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    const auto fields = detail::split(stripped, ',');
    if (fields.size() != 4)
      throw std::runtime_error("load_collection: bad manifest row: " + line);
    const std::string file = detail::strip(fields[0]);
    const std::string loss_name = detail::strip(fields[1]);
    LossKind loss;
    if (loss_name == "absolute")
      loss = LossKind::Absolute;
    else if (loss_name == "hinge")
      loss = LossKind::Hinge;
    else
      throw std::runtime_error("load_collection: unknown loss kind '" + loss_name + "'");
    const long n_train = detail::parse_long(fields[2], "load_collection");

    std::ifstream task_file(dir / file);
    if (!task_file)
      throw std::runtime_error("load_collection: cannot open task file " + file);
    std::string task_line;
    if (!std::getline(task_file, task_line))
      throw std::runtime_error("load_collection: empty task file " + file);
    const int d = static_cast<int>(detail::split(detail::strip(task_line), ',').size()) - 1;
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    while (std::getline(task_file, task_line)) {
      const std::string row = detail::strip(task_line);
      if (row.empty()) continue;
      const auto cols = detail::split(row, ',');
      if (static_cast<int>(cols.size()) != d + 1)
        throw std::runtime_error("load_collection: bad row in " + file);
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j)
        x[j] = detail::parse_double(cols[j], "load_collection: " + file);
      xs.push_back(std::move(x));
      ys.push_back(detail::parse_double(cols[d], "load_collection: " + file));
    }
    const int total = static_cast<int>(xs.size());
    if (n_train < 1 || n_train >= total)
      throw std::runtime_error("load_collection: bad n_train for " + file);
    Eigen::MatrixXd inputs(total, d);
    Eigen::VectorXd labels(total);
    for (int j = 0; j < total; ++j) {
      inputs.row(j) = xs[j];
      labels[j] = ys[j];
    }
    out.splits.push_back(make_split(inputs, labels, static_cast<int>(n_train), loss));

    const std::string weights = detail::strip(fields[3]);
    if (!weights.empty()) {
      const auto parts = detail::split(weights, ';');
      Eigen::VectorXd w(parts.size());
      for (std::size_t j = 0; j < parts.size(); ++j)
        w[j] = detail::parse_double(parts[j], "load_collection: weights in " + file);
      out.true_weights.push_back(std::move(w));
    }
  }
  if (!out.true_weights.empty() &&
      out.true_weights.size() != out.splits.size())
    throw std::runtime_error("load_collection: true weights present for only some tasks");
  return out;
}

}  // namespace biasltl
