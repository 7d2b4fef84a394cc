#ifndef DISSIM_BASELINES_HPP
#define DISSIM_BASELINES_HPP

#include "dissim/solver_w.hpp"

#include <vector>

namespace dissim {

struct BaselineOptions {
  double C = 1.0;
  double epsilon = 1e-3;
  InnerOptions inner{};
  int max_cccp_iterations = 100;
  int max_rounds = 40;  // ILSVM outer rounds
};

struct LsvmReport {
  WSolverReport cccp;
};

// Pointwise loss against the imputed latent, Δ(truth, h*, y, k), averaged
// over h* when the imputation is tied.
inline Vector pointwise_offsets(const LossTable& table, const std::vector<int>& latents) {
  if (table.latent_independent()) return table.table().col(0);
  Vector out = Vector::Zero(table.table().rows());
  for (int h : latents) out += table.table().col(h);
  return out / static_cast<double>(latents.size());
}

// LSVM by CCCP. The loss inside loss-augmented inference is pointwise,
// measured against the imputed latent: Δ(truth, h*_i, y, k).
inline ModelParams lsvm_train(const Dataset& data, const LossFunction& loss, const BaselineOptions& opts,
                              LsvmReport* report = nullptr) {
  if (data.size() == 0) throw InputError("empty dataset");
  const auto tables = tabulate(data, loss);
  LsvmReport local;
  LsvmReport& rep = report ? *report : local;
  ModelParams params = ModelParams::zeros(data);
  params.w = run_cccp(
      data, params.w, opts.C, opts.epsilon,
      [&](int i, const std::vector<int>& tied) { return pointwise_offsets(tables[i], tied); }, rep.cccp,
      opts.inner,
      opts.max_cccp_iterations);
  return params;
}

inline ModelParams lsvm_train(const Dataset& data, const LossFunction& loss, double C, double epsilon,
                              double inner_tol) {
  BaselineOptions opts;
  opts.C = C;
  opts.epsilon = epsilon;
  opts.inner.tol = inner_tol;
  return lsvm_train(data, loss, opts);
}

// Latent that minimises Δ(truth, k, predicted), i.e. the delta placement of
// P_θ(.|s) minimising H_i(w, θ). First minimum wins.
inline int ilsvm_estimate_latent(const Vector& w, const SampleRecord& s, const LossTable& table) {
  const Prediction pred = predict(w, s);
  const auto row = table.table().row(pred.label * s.num_latents() + pred.latent);
  int best = 0;
  for (int k = 1; k < s.num_latents(); ++k)
    if (row[k] < row[best]) best = k;
  return best;
}

// Dissimilarity objective when every conditional is a delta at placements[i]; the
// self-diversity term is then zero.
inline double delta_restricted_objective(const Dataset& data, const Vector& w, const std::vector<int>& placements,
                                         const LossFunction& loss, double beta) {
  (void)beta;
  if (static_cast<int>(placements.size()) != data.size())
    throw InputError("one delta placement per sample required");
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    if (placements[i] < 0 || placements[i] >= s.num_latents()) throw IndexError("placement out of range");
    const Prediction p = predict(w, s);
    total += loss(s.truth_label, placements[i], p.label, p.latent, s);
  }
  return total / data.size();
}

struct IlsvmRound {
  Vector w;                     // parameters the latents were estimated from
  std::vector<int> estimated;   // step (i) output
  WSolverReport cccp;           // step (ii)
};

struct IlsvmReport {
  std::vector<IlsvmRound> rounds;
};

// ILSVM: alternate (i) pointwise latent estimation against the current
// prediction and (ii) an LSVM solve whose loss is measured against those
// latents.
inline ModelParams ilsvm_train(const Dataset& data, const LossFunction& loss, const BaselineOptions& opts,
                               IlsvmReport* report = nullptr) {
  if (data.size() == 0) throw InputError("empty dataset");
  const auto tables = tabulate(data, loss);
  ModelParams params = ModelParams::zeros(data);
  IlsvmReport local;
  IlsvmReport& rep = report ? *report : local;
  rep.rounds.clear();
  double previous = 0.0;
  std::vector<int> last_estimate;
  for (int r = 0; r < opts.max_rounds; ++r) {
    IlsvmRound round;
    round.w = params.w;
    round.estimated.resize(data.size());
    for (int i = 0; i < data.size(); ++i)
      round.estimated[i] = ilsvm_estimate_latent(params.w, data.samples[i], tables[i]);
    const auto& est = round.estimated;
    try {
      params.w = run_cccp(
          data, params.w, opts.C, opts.epsilon,
          [&](int i, const std::vector<int>&) -> Vector { return tables[i].table().col(est[i]); }, round.cccp,
          opts.inner,
          opts.max_cccp_iterations);
    } catch (const SolverError& e) {
      throw e.with_round(r);
    }
    const double objective = round.cccp.final_objective;
    const bool unchanged = est == last_estimate;
    last_estimate = est;
    rep.rounds.push_back(std::move(round));
    if (unchanged || (r > 0 && previous - objective < opts.C * opts.epsilon)) break;
    previous = objective;
  }
  return params;
}

inline ModelParams ilsvm_train(const Dataset& data, const LossFunction& loss, double C, double epsilon,
                               double inner_tol) {
  BaselineOptions opts;
  opts.C = C;
  opts.epsilon = epsilon;
  opts.inner.tol = inner_tol;
  return ilsvm_train(data, loss, opts);
}

}  // namespace dissim

#endif  // DISSIM_BASELINES_HPP
