#ifndef DISSIM_SOLVER_THETA_HPP
#define DISSIM_SOLVER_THETA_HPP

#include "dissim/divergence.hpp"
#include "dissim/solver_w.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace dissim {

struct SSDConfig {
  int T = 0;  // iterations; 0 means 50 * n
  std::uint64_t seed = 0;

  int iterations_for(int n) const { return T > 0 ? T : 50 * n; }
};

struct SSDResult {
  Vector theta;
  std::vector<double> trace;  // theta objective at theta_init, then every n iterations
};

// Gradient of sum_k weights[k] P_θ(k) w.r.t. θ, i.e. sum_k weights[k] P(k) (phi_k - E_P[phi]).
inline Vector softmax_weighted_gradient(const SampleRecord& s, const FiniteDistribution& p,
                                        const Vector& weights) {
  const Vector weighted = weights.cwiseProduct(p.probs);
  const Vector mean_phi = s.phi.transpose() * p.probs;
  return s.phi.transpose() * weighted - weighted.sum() * mean_phi;
}

inline Vector grad_expected_loss(const SampleRecord& s, const FiniteDistribution& p, const LossTable& table,
                                 int y, int k) {
  return softmax_weighted_gradient(s, p, table.table().row(y * s.num_latents() + k).transpose());
}

inline Vector grad_expected_loss(const Vector& theta, const SampleRecord& s, int y, int k,
                                 const LossFunction& loss) {
  check_label_latent(s, y, k);
  return grad_expected_loss(s, conditional_distribution(theta, s), LossTable(s, loss), y, k);
}

// H(θ) = P^T B P with B(k', k) = Δ(truth, k, truth, k'); dH/dP = (B + B^T) P.
inline Vector grad_self_diversity(const SampleRecord& s, const FiniteDistribution& p, const LossTable& table) {
  const auto block = table.truth_block();
  const Vector dp = block * p.probs + block.transpose() * p.probs;
  return softmax_weighted_gradient(s, p, dp);
}

inline Vector grad_self_diversity(const Vector& theta, const SampleRecord& s, const LossFunction& loss) {
  return grad_self_diversity(s, conditional_distribution(theta, s), LossTable(s, loss));
}

// Subgradient of slack_xi in θ: the expected-loss gradient at the
// loss-augmented maximiser. The truth-label max does not depend on θ.
inline Vector grad_slack_xi(const Vector& scores, const SampleRecord& s, const FiniteDistribution& p,
                            const LossTable& table) {
  const Prediction arg = augmented_argmax(scores, expected_losses(p, table), s.num_latents());
  return grad_expected_loss(s, p, table, arg.label, arg.latent);
}

inline Vector grad_slack_xi(const Vector& w, const Vector& theta, const SampleRecord& s,
                            const LossFunction& loss) {
  return grad_slack_xi(all_scores(w, s), s, conditional_distribution(theta, s), LossTable(s, loss));
}

// Theta objective: J/2 |θ|^2 + C U(w, θ).
inline double objective_theta(const Vector& w, const Vector& theta, const Dataset& data,
                              const std::vector<LossTable>& tables, const HyperParams& hyper) {
  return 0.5 * hyper.J * theta.squaredNorm() + hyper.C * upper_bound_U(w, theta, data, tables, hyper.beta);
}

// Stochastic subgradient descent on the theta objective with Pegasos step
// 1/(λ t), λ = J/C. The per-sample subgradient of objective/C is
// λθ + ∇ξ_i - β ∇H_i(θ).
inline SSDResult ssd_theta(const Dataset& data, const Vector& w, const Vector& theta_init,
                           const std::vector<LossTable>& tables, const HyperParams& hyper,
                           const SSDConfig& config) {
  hyper.validate();
  check_dims(w, data.dim_w, "w");
  check_dims(theta_init, data.dim_theta, "theta_init");
  const int n = data.size();
  if (n == 0) throw InputError("empty dataset");
  const double lambda = hyper.J / hyper.C;
  const int T = config.iterations_for(n);

  std::vector<Vector> scores;
  scores.reserve(n);
  for (const auto& s : data.samples) scores.push_back(s.psi * w);

  SSDResult result;
  result.theta = theta_init;
  result.trace.push_back(objective_theta(w, result.theta, data, tables, hyper));

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int t = 1; t <= T; ++t) {
    const int i = pick(rng);
    const auto& s = data.samples[i];
    const FiniteDistribution p = conditional_distribution(result.theta, s);
    Vector g = lambda * result.theta;
    g += grad_slack_xi(scores[i], s, p, tables[i]);
    g -= hyper.beta * grad_self_diversity(s, p, tables[i]);
    result.theta -= g / (lambda * t);
    if (t % n == 0 || t == T) result.trace.push_back(objective_theta(w, result.theta, data, tables, hyper));
  }
  return result;
}

inline SSDResult ssd_theta(const Dataset& data, const Vector& w, const Vector& theta_init,
                           const LossFunction& loss, const HyperParams& hyper, const SSDConfig& config) {
  return ssd_theta(data, w, theta_init, tabulate(data, loss), hyper, config);
}

}  // namespace dissim

#endif  // DISSIM_SOLVER_THETA_HPP
