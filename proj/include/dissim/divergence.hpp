#ifndef DISSIM_DIVERGENCE_HPP
#define DISSIM_DIVERGENCE_HPP

#include "dissim/loss.hpp"
#include "dissim/model.hpp"

#include <string>

namespace dissim {

struct HyperParams {
  double C = 1.0;
  double J = 0.1;
  double beta = 0.1;
  double epsilon = 1e-3;

  void validate() const {
    if (!(C > 0)) throw ConfigError("C must be > 0");
    if (!(J > 0)) throw ConfigError("J must be > 0");
    if (!(beta > 0 && beta < 1)) throw ConfigError("beta must lie in (0, 1)");
    if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Rao coefficients over an arbitrary finite space.

// H(P, Q) = sum_{a,b} Δ(a, b) P[a] Q[b].
template <class PairLoss>
double diversity(const FiniteDistribution& p, const FiniteDistribution& q, PairLoss&& delta) {
  if (p.size() != q.size()) throw InputError("diversity over distributions of different size");
  double total = 0.0;
  for (int a = 0; a < p.size(); ++a) {
    if (p[a] == 0.0) continue;
    double inner = 0.0;
    for (int b = 0; b < q.size(); ++b) inner += delta(a, b) * q[b];
    total += p[a] * inner;
  }
  return total;
}

// Jensen difference H(P,Q) - beta H(P,P) - (1 - beta) H(Q,Q).
template <class PairLoss>
double dissimilarity(const FiniteDistribution& p, const FiniteDistribution& q, PairLoss&& delta,
                     double beta) {
  if (!(beta > 0 && beta < 1)) throw ConfigError("beta must lie in (0, 1)");
  return diversity(p, q, delta) - beta * diversity(p, p, delta) - (1.0 - beta) * diversity(q, q, delta);
}

// Δ restricted to the latent space of one sample at a fixed label.
inline auto latent_pair_loss(const SampleRecord& s, const LossFunction& loss, int label) {
  return [&s, &loss, label](int a, int b) { return loss(label, a, label, b, s); };
}

// ---------------------------------------------------------------------------
// Tabulated per-sample quantities.

// Expected loss of every candidate (y, k), indexed y * K + k.
inline Vector expected_losses(const FiniteDistribution& p, const LossTable& table) {
  if (table.latent_independent()) return table.table().col(0);
  return table.table() * p.probs;
}

inline double self_diversity(const FiniteDistribution& p, const LossTable& table) {
  return p.probs.dot(table.truth_block() * p.probs);
}

// max_{y,k} [score + expected loss] - max_k score(truth, k).
inline double slack_from(const Vector& scores, const Vector& exp_losses, int K, int truth) {
  const double augmented = (scores + exp_losses).maxCoeff();
  const double truth_best = scores.segment(static_cast<Eigen::Index>(truth) * K, K).maxCoeff();
  return augmented - truth_best;
}

// ---------------------------------------------------------------------------
// Per-sample quantities.

inline double expected_loss(const Vector& theta, const SampleRecord& s, int y, int k,
                            const LossFunction& loss) {
  check_label_latent(s, y, k);
  const FiniteDistribution p = conditional_distribution(theta, s);
  double total = 0.0;
  for (int ki = 0; ki < s.num_latents(); ++ki) total += loss(s.truth_label, ki, y, k, s) * p[ki];
  return total;
}

// H_i(θ): the conditional's diversity with itself, measured at the truth label.
inline double self_diversity_theta(const Vector& theta, const SampleRecord& s, const LossFunction& loss) {
  const FiniteDistribution p = conditional_distribution(theta, s);
  return diversity(p, p, [&](int a, int b) { return loss(s.truth_label, a, s.truth_label, b, s); });
}

inline double slack_xi(const Vector& w, const Vector& theta, const SampleRecord& s, const LossFunction& loss) {
  const LossTable table(s, loss);
  return slack_from(all_scores(w, s), expected_losses(conditional_distribution(theta, s), table),
                    s.num_latents(), s.truth_label);
}

// ---------------------------------------------------------------------------
// Dataset-level objectives. Overloads taking precomputed tables are the
// hot path for the solvers.

inline double objective_D(const Vector& w, const Vector& theta, const Dataset& data,
                          const std::vector<LossTable>& tables, double beta) {
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    const FiniteDistribution p = conditional_distribution(theta, s);
    const Prediction pred = predict(w, s);
    const double h_wt = expected_losses(p, tables[i])[pred.label * s.num_latents() + pred.latent];
    total += h_wt - beta * self_diversity(p, tables[i]);
  }
  return total / data.size();
}

inline double objective_D(const Vector& w, const Vector& theta, const Dataset& data,
                          const LossFunction& loss, double beta) {
  return objective_D(w, theta, data, tabulate(data, loss), beta);
}

inline double upper_bound_U(const Vector& w, const Vector& theta, const Dataset& data,
                            const std::vector<LossTable>& tables, double beta) {
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    const FiniteDistribution p = conditional_distribution(theta, s);
    total += slack_from(all_scores(w, s), expected_losses(p, tables[i]), s.num_latents(), s.truth_label) -
             beta * self_diversity(p, tables[i]);
  }
  return total / data.size();
}

inline double upper_bound_U(const Vector& w, const Vector& theta, const Dataset& data,
                            const LossFunction& loss, double beta) {
  return upper_bound_U(w, theta, data, tabulate(data, loss), beta);
}

inline double regularized_objective(const Vector& w, const Vector& theta, const Dataset& data,
                                    const std::vector<LossTable>& tables, const HyperParams& hyper) {
  return 0.5 * w.squaredNorm() + 0.5 * hyper.J * theta.squaredNorm() +
         hyper.C * upper_bound_U(w, theta, data, tables, hyper.beta);
}

inline double regularized_objective(const Vector& w, const Vector& theta, const Dataset& data,
                                    const LossFunction& loss, const HyperParams& hyper) {
  return regularized_objective(w, theta, data, tabulate(data, loss), hyper);
}

}  // namespace dissim

#endif  // DISSIM_DIVERGENCE_HPP
