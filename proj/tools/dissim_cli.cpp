// dissim: generate synthetic tasks, train models, run the cross-validated
// experiment and check gradients.
//
// Exit codes: 0 success, 1 failed gradient check, 2 input or configuration
// error, 3 solver failure.

#include "dissim/dissim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dissim;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;
constexpr int kSolverError = 3;

struct HyperFlags {
  double C = 1.0;
  double J = 0.1;
  double beta = 0.1;
  double epsilon = 1e-3;
  double inner_tol = 1e-4;
  int max_planes = 500;
  int max_rounds = 40;
  int ssd_iterations = 0;
  std::uint64_t seed = 0;
  CLI::Option* J_opt = nullptr;
  CLI::Option* beta_opt = nullptr;

  void add(CLI::App& app, bool with_C) {
    if (with_C) app.add_option("--C", C, "Regularization trade-off C")->capture_default_str();
    J_opt = app.add_option("--J", J, "Regularization weight of theta (dissim only)")->capture_default_str();
    beta_opt = app.add_option("--beta", beta, "Self-diversity weight in (0, 1) (dissim only)")->capture_default_str();
    app.add_option("--epsilon", epsilon, "Outer stopping tolerance, scaled by C")->capture_default_str();
    app.add_option("--inner-tol", inner_tol, "Cutting-plane violation tolerance")->capture_default_str();
    app.add_option("--max-planes", max_planes, "Cutting-plane budget per convex solve")->capture_default_str();
    app.add_option("--max-rounds", max_rounds, "Outer round budget")->capture_default_str();
    app.add_option("--ssd-iterations", ssd_iterations, "SSD iterations per theta step (0: 50 n)")
        ->capture_default_str();
    app.add_option("--seed", seed, "Seed for the stochastic theta step and fold shuffles")->capture_default_str();
  }

  TrainConfig config() const {
    TrainConfig c;
    c.hyper = {C, J, beta, epsilon};
    c.inner_tol = inner_tol;
    c.max_planes = max_planes;
    c.max_outer_rounds = max_rounds;
    c.ssd.T = ssd_iterations;
    c.ssd.seed = seed;
    if (ssd_iterations < 0) throw ConfigError("--ssd-iterations must be >= 0");
    return c;
  }

  bool dissim_only_flags_given() const { return J_opt->count() > 0 || beta_opt->count() > 0; }
};

void warn_unused_flags(Method m, const HyperFlags& flags) {
  if (m != Method::dissim && flags.dissim_only_flags_given())
    std::cerr << "warning: --J and --beta are ignored by " << method_name(m) << "\n";
}

// ---------------------------------------------------------------------------

int run_generate(const TaskSpec& spec, const fs::path& out) {
  const GeneratedTask task = generate(spec);
  io::save_dataset(out, task.data);
  std::cout << "wrote " << task.data.size() << " samples to " << out.string() << "\n";
  return kOk;
}

int run_train(const fs::path& data_path, const std::string& method_name_arg, const std::string& loss_name,
              const HyperFlags& flags, const fs::path& out) {
  const Method method = method_from_name(method_name_arg);
  const LossFunction loss = LossFunction::from_name(loss_name);
  const Dataset data = io::load_dataset(data_path);
  loss.check_compatible(data);
  const TrainConfig config = flags.config();
  config.validate();
  warn_unused_flags(method, flags);

  io::ModelFile file;
  file.method = method_name(method);
  file.loss = loss.name();
  file.hyper = config.hyper;
  if (method == Method::dissim) {
    TrainedModel m = train(data, loss, config);
    file.params = m.params;
    file.trace = m.best_trace;
    std::cout << "rounds " << m.rounds << " termination "
              << (m.termination == Termination::tolerance ? "tolerance" : "round_budget") << "\n";
  } else {
    BaselineOptions opts;
    opts.C = config.hyper.C;
    opts.epsilon = config.hyper.epsilon;
    opts.inner = config.inner();
    opts.max_cccp_iterations = config.max_cccp_iterations;
    opts.max_rounds = config.max_outer_rounds;
    if (method == Method::lsvm) {
      LsvmReport rep;
      file.params = lsvm_train(data, loss, opts, &rep);
      file.trace = rep.cccp.trace;
    } else {
      IlsvmReport rep;
      file.params = ilsvm_train(data, loss, opts, &rep);
      for (const auto& r : rep.rounds) file.trace.push_back(r.cccp.final_objective);
    }
  }
  io::write_file_atomic(out, io::model_to_string(file));
  std::cout << "final objective " << io::format_double(file.trace.empty() ? 0.0 : file.trace.back()) << "\n";
  return kOk;
}

struct ExperimentFlags {
  fs::path data;
  std::vector<std::string> methods{"dissim", "lsvm", "ilsvm"};
  std::vector<std::string> losses{"zero_one", "overlap"};
  std::vector<double> C_grid{1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2};
  int folds = 5;
  double split = 0.6;
  fs::path out;
  fs::path summary;
  fs::path plot_dir;
  bool timing = false;
};

int run_experiment(const ExperimentFlags& ef, const HyperFlags& flags) {
  const Dataset data = io::load_dataset(ef.data);
  TrainConfig config = flags.config();
  config.C_grid = ef.C_grid;
  config.validate();

  std::vector<Method> methods;
  for (const auto& m : ef.methods) methods.push_back(method_from_name(m));
  std::vector<LossFunction> losses;
  for (const auto& l : ef.losses) {
    losses.push_back(LossFunction::from_name(l));
    losses.back().check_compatible(data);
  }
  for (Method m : methods) warn_unused_flags(m, flags);

  const fs::path summary = ef.summary.empty() ? fs::path(ef.out.string() + ".summary") : ef.summary;
  const fs::path plot_dir = ef.plot_dir.empty() ? ef.out.parent_path() : ef.plot_dir;
  if (!plot_dir.empty()) fs::create_directories(plot_dir);

  std::vector<io::ResultRow> rows;
  std::ostringstream summary_text;
  summary_text << "# method loss C mean_test_loss std_test_loss\n";
  std::ostringstream best_text;
  for (const auto& loss : losses) {
    for (Method m : methods) {
      const ProtocolResult res = run_protocol(data, loss, config, m, ef.folds, ef.split, flags.seed);
      for (const auto& r : res.rows) rows.push_back({method_name(m), loss.name(), r});
      for (const auto& p : res.curve)
        summary_text << method_name(m) << " " << loss.name() << " " << io::format_double(p.C) << " "
                     << io::format_double(p.mean) << " " << io::format_double(p.stddev) << "\n";
      const CurvePoint& b = res.best();
      best_text << "# best " << method_name(m) << " " << loss.name() << " C " << io::format_double(b.C) << " mean "
                << io::format_double(b.mean) << " std " << io::format_double(b.stddev) << "\n";
      io::write_file_atomic(plot_dir / (method_name(m) + "_" + loss.name() + ".dat"), io::curve_to_string(res.curve));
      std::cout << method_name(m) << " " << loss.name() << " best C " << b.C << " test loss " << b.mean << " +- "
                << b.stddev << "\n";
    }
  }
  io::write_file_atomic(ef.out, io::results_to_string(rows, ef.timing));
  io::write_file_atomic(summary, summary_text.str() + best_text.str());
  return kOk;
}

int run_gradcheck_command(const fs::path& data_path, const std::string& loss_name, GradCheckOptions opts) {
  const Dataset data = io::load_dataset(data_path);
  std::vector<LossFunction> losses;
  if (loss_name == "all") {
    losses.push_back(LossFunction::zero_one());
    if (data.geometric()) losses.push_back(LossFunction::overlap());
  } else {
    losses.push_back(LossFunction::from_name(loss_name));
  }
  bool ok = true;
  double worst = 0.0;
  for (const auto& loss : losses) {
    const GradCheckReport report = run_gradcheck(data, loss, opts);
    for (const auto& t : report.terms)
      std::cout << loss.name() << " " << t.name << " worst_relative_error " << io::format_double(t.worst)
                << " checked " << t.checked << " skipped " << t.skipped << "\n";
    ok = ok && report.passed(opts.tolerance);
    worst = std::max(worst, report.worst());
  }
  std::cout << "worst relative error " << io::format_double(worst) << " tolerance "
            << io::format_double(opts.tolerance) << (ok ? " PASS" : " FAIL") << "\n";
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-variable learning by minimizing a dissimilarity coefficient"};
  app.require_subcommand(1);

  // generate
  TaskSpec spec;
  fs::path gen_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic weakly-labelled localisation dataset");
  gen->add_option("--out", gen_out, "Output dataset path")->required();
  gen->add_option("--classes", spec.num_classes, "Number of classes")->capture_default_str();
  gen->add_option("--per-class", spec.per_class, "Samples per class")->capture_default_str();
  gen->add_option("--grid", spec.grid, "Grid side in cells")->capture_default_str();
  gen->add_option("--boxes", spec.num_boxes, "Candidate boxes per sample")->capture_default_str();
  gen->add_option("--box-cells", spec.box_cells, "Box side in cells")->capture_default_str();
  gen->add_option("--dim", spec.dim, "Per-cell feature length")->capture_default_str();
  gen->add_option("--clutter", spec.clutter, "Probability a background cell carries a class signature")
      ->capture_default_str();
  gen->add_option("--noise", spec.noise, "Additive feature noise scale")->capture_default_str();
  gen->add_option("--cell-pixels", spec.cell_pixels, "Pixels per cell for box coordinates")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();

  // train
  fs::path train_data, train_out;
  std::string train_method = "dissim", train_loss = "zero_one";
  HyperFlags train_flags;
  auto* tr = app.add_subcommand("train", "Train one model");
  tr->add_option("--data", train_data, "Dataset path")->required();
  tr->add_option("--method", train_method, "dissim, lsvm or ilsvm")->capture_default_str();
  tr->add_option("--loss", train_loss, "zero_one or overlap")->capture_default_str();
  tr->add_option("--out", train_out, "Output model path")->required();
  train_flags.add(*tr, true);

  // experiment
  ExperimentFlags ef;
  HyperFlags exp_flags;
  auto* ex = app.add_subcommand("experiment", "Cross-validated comparison over a grid of C");
  ex->add_option("--data", ef.data, "Dataset path")->required();
  ex->add_option("--methods", ef.methods, "Methods to run")->delimiter(',')->capture_default_str();
  ex->add_option("--losses", ef.losses, "Losses to run")->delimiter(',')->capture_default_str();
  ex->add_option("--C-grid", ef.C_grid, "Strictly increasing values of C")->delimiter(',')->capture_default_str();
  ex->add_option("--folds", ef.folds, "Number of folds")->capture_default_str();
  ex->add_option("--split", ef.split, "Training fraction per class")->capture_default_str();
  ex->add_option("--out", ef.out, "Results CSV path")->required();
  ex->add_option("--summary", ef.summary, "Summary path (default: <out>.summary)");
  ex->add_option("--plot-dir", ef.plot_dir, "Directory for per-curve plot data (default: next to --out)");
  ex->add_flag("--timing", ef.timing, "Record wall-clock seconds (otherwise written as 0)");
  exp_flags.add(*ex, false);

  // gradcheck
  fs::path gc_data;
  std::string gc_loss = "all";
  GradCheckOptions gc_opts;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic theta-gradients with finite differences");
  gc->add_option("--data", gc_data, "Dataset path")->required();
  gc->add_option("--loss", gc_loss, "zero_one, overlap or all")->capture_default_str();
  gc->add_option("--seed", gc_opts.seed, "Seed for the random evaluation points")->capture_default_str();
  gc->add_option("--draws", gc_opts.draws, "Random draws per loss")->capture_default_str();
  gc->add_option("--tol", gc_opts.tolerance, "Relative error tolerance")->capture_default_str();
  gc->add_flag("--corrupt-gradient", gc_opts.corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*gen) return run_generate(spec, gen_out);
    if (*tr) return run_train(train_data, train_method, train_loss, train_flags, train_out);
    if (*ex) return run_experiment(ef, exp_flags);
    if (*gc) return run_gradcheck_command(gc_data, gc_loss, gc_opts);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kInputError;
  } catch (const IndexError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
