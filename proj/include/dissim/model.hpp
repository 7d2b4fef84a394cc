#ifndef DISSIM_MODEL_HPP
#define DISSIM_MODEL_HPP

#include "dissim/types.hpp"

#include <cmath>
#include <limits>

namespace dissim {

struct Prediction {
  int label = 0;
  int latent = 0;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline void check_label_latent(const SampleRecord& s, int y, int k) {
  if (y < 0 || y >= s.num_labels()) throw IndexError("label " + std::to_string(y) + " out of range");
  if (k < 0 || k >= s.num_latents()) throw IndexError("latent " + std::to_string(k) + " out of range");
}

inline double score(const Vector& w, const SampleRecord& s, int y, int k) {
  check_label_latent(s, y, k);
  if (w.size() != s.psi.cols()) throw ConfigError("w dimension does not match psi features");
  return s.psi_row(y, k).dot(w);
}

// All c*K scores, indexed y * K + k.
inline Vector all_scores(const Vector& w, const SampleRecord& s) {
  if (w.size() != s.psi.cols()) throw ConfigError("w dimension does not match psi features");
  return s.psi * w;
}

// First maximum of a flat table; the y-major layout makes that the smallest
// label, then the smallest latent.
inline int first_argmax(const Vector& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  if (!std::isfinite(values[best])) throw InternalError("non-finite score in argmax");
  return best;
}

inline Prediction predict(const Vector& w, const SampleRecord& s) {
  const int flat = first_argmax(all_scores(w, s));
  const int K = s.num_latents();
  return {flat / K, flat % K};
}

// Best latent under a fixed label.
inline int best_latent(const Vector& w, const SampleRecord& s, int y) {
  if (w.size() != s.psi.cols()) throw ConfigError("w dimension does not match psi features");
  const int K = s.num_latents();
  Vector row_scores = s.psi.middleRows(static_cast<Eigen::Index>(y) * K, K) * w;
  return first_argmax(row_scores);
}

inline double log_sum_exp(const Vector& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

inline FiniteDistribution conditional_distribution(const Vector& theta, const SampleRecord& s) {
  if (theta.size() != s.phi.cols()) throw ConfigError("theta dimension does not match phi features");
  const Vector logits = s.phi * theta;
  const double log_z = log_sum_exp(logits);
  Vector p = (logits.array() - log_z).exp();
  p /= p.sum();
  return {std::move(p)};
}

// P'(y, k): the conditional placed at the ground-truth label, zero elsewhere.
inline double joint_conditional(const Vector& theta, const SampleRecord& s, int y, int k) {
  check_label_latent(s, y, k);
  if (y != s.truth_label) return 0.0;
  return conditional_distribution(theta, s)[k];
}

}  // namespace dissim

#endif  // DISSIM_MODEL_HPP
