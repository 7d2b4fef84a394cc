#ifndef DISSIM_TRAINER_HPP
#define DISSIM_TRAINER_HPP

#include "dissim/baselines.hpp"
#include "dissim/solver_theta.hpp"
#include "dissim/solver_w.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace dissim {

struct TrainConfig {
  HyperParams hyper{};
  SSDConfig ssd{};
  double inner_tol = 1e-4;
  int max_planes = 500;
  int max_outer_rounds = 40;
  int max_cccp_iterations = 100;
  std::vector<double> C_grid{1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2};

  InnerOptions inner() const {
    InnerOptions o;
    o.tol = inner_tol;
    o.max_planes = max_planes;
    return o;
  }

  void validate() const {
    hyper.validate();
    if (!(inner_tol > 0)) throw ConfigError("inner_tol must be > 0");
    if (max_planes < 1) throw ConfigError("max_planes must be >= 1");
    if (max_outer_rounds < 1) throw ConfigError("max_outer_rounds must be >= 1");
    if (C_grid.empty()) throw ConfigError("C grid must not be empty");
    for (std::size_t i = 1; i < C_grid.size(); ++i)
      if (!(C_grid[i] > C_grid[i - 1])) throw ConfigError("C grid must be strictly increasing");
    for (double c : C_grid)
      if (!(c > 0)) throw ConfigError("C grid values must be > 0");
  }
};

enum class Termination { tolerance, round_budget };

struct TrainedModel {
  ModelParams params;
  std::vector<double> trace;       // regularized objective at (0, 0) and after each round
  std::vector<double> best_trace;  // running minimum of trace
  Termination termination = Termination::round_budget;
  int rounds = 0;

  double best_objective() const { return best_trace.back(); }
};

// Block coordinate descent on the regularized objective: CCCP over w, then SSD over θ, from (0, 0).
inline TrainedModel train(const Dataset& data, const LossFunction& loss, const TrainConfig& config) {
  if (data.size() == 0) throw InputError("cannot train on an empty dataset");
  config.hyper.validate();
  const auto tables = tabulate(data, loss);
  const HyperParams& hyper = config.hyper;

  TrainedModel model;
  ModelParams current = ModelParams::zeros(data);
  model.params = current;
  double best = regularized_objective(current.w, current.theta, data, tables, hyper);
  model.trace.push_back(best);
  model.best_trace.push_back(best);

  for (int r = 0; r < config.max_outer_rounds; ++r) {
    WSolverReport w_report;
    try {
      current.w = cccp_w(data, current.theta, current.w, tables, hyper.C, hyper.epsilon, w_report,
                         config.inner(), config.max_cccp_iterations);
    } catch (const SolverError& e) {
      throw e.with_round(r);
    }
    SSDConfig ssd = config.ssd;
    ssd.seed = config.ssd.seed + static_cast<std::uint64_t>(r);
    current.theta = ssd_theta(data, current.w, current.theta, tables, hyper, ssd).theta;

    const double f = regularized_objective(current.w, current.theta, data, tables, hyper);
    model.trace.push_back(f);
    model.rounds = r + 1;
    const double previous_best = best;
    if (f < best) {
      best = f;
      model.params = current;
    }
    model.best_trace.push_back(best);
    if (previous_best - best < hyper.C * hyper.epsilon) {
      model.termination = Termination::tolerance;
      break;
    }
  }
  return model;
}

// Mean test loss against the planted (label, latent), scaled to [0, 100].
inline double evaluate(const ModelParams& model, const Dataset& data, const LossFunction& loss) {
  if (data.size() == 0) throw InputError("cannot evaluate on an empty dataset");
  loss.check_compatible(data);
  double total = 0.0;
  for (const auto& s : data.samples) {
    if (!s.truth_latent) throw InputError("sample '" + s.id + "' has no ground-truth latent");
    const Prediction p = predict(model.w, s);
    total += loss(s.truth_label, *s.truth_latent, p.label, p.latent, s);
  }
  return 100.0 * total / data.size();
}

// ---------------------------------------------------------------------------
// Experimental protocol.

enum class Method { dissim, lsvm, ilsvm };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::dissim: return "dissim";
    case Method::lsvm: return "lsvm";
    case Method::ilsvm: return "ilsvm";
  }
  return "unknown";
}

inline Method method_from_name(std::string_view name) {
  if (name == "dissim") return Method::dissim;
  if (name == "lsvm") return Method::lsvm;
  if (name == "ilsvm") return Method::ilsvm;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

struct FitResult {
  ModelParams params;
  double train_objective = 0.0;
};

// Trains one method at one C; the rest of config is shared.
inline FitResult fit(Method method, const Dataset& data, const LossFunction& loss, const TrainConfig& config,
                     double C) {
  TrainConfig local = config;
  local.hyper.C = C;
  if (method == Method::dissim) {
    TrainedModel m = train(data, loss, local);
    return {std::move(m.params), m.best_objective()};
  }
  BaselineOptions opts;
  opts.C = C;
  opts.epsilon = config.hyper.epsilon;
  opts.inner = config.inner();
  opts.max_cccp_iterations = config.max_cccp_iterations;
  opts.max_rounds = config.max_outer_rounds;
  if (method == Method::lsvm) {
    LsvmReport rep;
    ModelParams p = lsvm_train(data, loss, opts, &rep);
    return {std::move(p), rep.cccp.final_objective};
  }
  IlsvmReport rep;
  ModelParams p = ilsvm_train(data, loss, opts, &rep);
  return {std::move(p), rep.rounds.empty() ? 0.0 : rep.rounds.back().cccp.final_objective};
}

struct FoldResult {
  double C = 0.0;
  int fold = 0;
  double test_loss = 0.0;  // in [0, 100]
  double train_objective = 0.0;
  double wallclock_seconds = 0.0;
};

struct CurvePoint {
  double C = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over folds
};

struct ProtocolResult {
  std::vector<FoldResult> rows;  // ordered by (fold, C)
  std::vector<CurvePoint> curve;

  const CurvePoint& best() const {
    return *std::min_element(curve.begin(), curve.end(),
                             [](const CurvePoint& a, const CurvePoint& b) { return a.mean < b.mean; });
  }
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

// Per-class stratified split of sample indices, shuffled by seed.
inline Split stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("split fraction must lie in (0, 1)");
  std::vector<std::vector<int>> by_class(data.num_labels);
  for (int i = 0; i < data.size(); ++i) by_class[data.samples[i].truth_label].push_back(i);
  std::mt19937_64 rng(seed);
  Split split;
  for (int y = 0; y < data.num_labels; ++y) {
    auto& idx = by_class[y];
    if (idx.empty()) continue;
    if (idx.size() < 2) throw InputError("class " + std::to_string(y) + " has fewer than 2 samples");
    std::shuffle(idx.begin(), idx.end(), rng);
    const int n = static_cast<int>(idx.size());
    const int n_train = std::clamp(static_cast<int>(std::lround(train_fraction * n)), 1, n - 1);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + n_train);
    split.test.insert(split.test.end(), idx.begin() + n_train, idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

inline Dataset subset(const Dataset& data, const std::vector<int>& indices) {
  Dataset out{data.num_labels, data.dim_w, data.dim_theta, {}};
  out.samples.reserve(indices.size());
  for (int i : indices) out.samples.push_back(data.samples[i]);
  return out;
}

inline std::vector<CurvePoint> summarize(const std::vector<FoldResult>& rows, const std::vector<double>& C_grid) {
  std::vector<CurvePoint> curve;
  for (double C : C_grid) {
    std::vector<double> values;
    for (const auto& r : rows)
      if (r.C == C) values.push_back(r.test_loss);
    CurvePoint pt{C, 0.0, 0.0};
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      pt.mean = sum / values.size();
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - pt.mean) * (v - pt.mean);
        pt.stddev = std::sqrt(ss / (values.size() - 1));
      }
    }
    curve.push_back(pt);
  }
  return curve;
}

inline ProtocolResult run_protocol(const Dataset& data, const LossFunction& loss, const TrainConfig& config,
                                   Method method = Method::dissim, int n_folds = 5, double split = 0.6,
                                   std::uint64_t seed = 0) {
  config.validate();
  loss.check_compatible(data);
  if (n_folds < 1) throw ConfigError("need at least one fold");
  ProtocolResult result;
  for (int fold = 0; fold < n_folds; ++fold) {
    const Split sp = stratified_split(data, split, seed + 7919ull * static_cast<std::uint64_t>(fold));
    const Dataset train_set = subset(data, sp.train);
    const Dataset test_set = subset(data, sp.test);
    for (double C : config.C_grid) {
      const auto start = std::chrono::steady_clock::now();
      FitResult fitted = fit(method, train_set, loss, config, C);
      FoldResult row;
      row.C = C;
      row.fold = fold;
      row.test_loss = evaluate(fitted.params, test_set, loss);
      row.train_objective = fitted.train_objective;
      row.wallclock_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.rows.push_back(row);
    }
  }
  result.curve = summarize(result.rows, config.C_grid);
  return result;
}

}  // namespace dissim

#endif  // DISSIM_TRAINER_HPP
