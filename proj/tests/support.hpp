// Random instance generators and brute-force reference implementations used
// across the test suites. The reference code uses plain loops over
// std::vector and shares nothing with the library's evaluators beyond the
// data types and the loss callable.
#ifndef DISSIM_TESTS_SUPPORT_HPP
#define DISSIM_TESTS_SUPPORT_HPP

#include "dissim/dissim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using dissim::Dataset;
using dissim::LossFunction;
using dissim::SampleRecord;
using dissim::Vector;

struct InstanceShape {
  int max_samples = 5;
  int max_labels = 3;
  int max_latents = 8;
  int max_dim_w = 5;
  int max_dim_theta = 4;
  bool geometric = true;
  double scale = 1.0;
};

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Dense random dataset: Gaussian ψ and φ tables, random integer boxes.
inline Dataset random_dataset(std::mt19937_64& rng, const InstanceShape& shape = {}) {
  std::normal_distribution<double> normal(0.0, shape.scale);
  Dataset d;
  d.num_labels = uniform_int(rng, 2, shape.max_labels);
  d.dim_w = uniform_int(rng, 1, shape.max_dim_w);
  d.dim_theta = uniform_int(rng, 1, shape.max_dim_theta);
  const int n = uniform_int(rng, 1, shape.max_samples);
  for (int i = 0; i < n; ++i) {
    SampleRecord s;
    s.id = "r" + std::to_string(i);
    s.truth_label = uniform_int(rng, 0, d.num_labels - 1);
    const int K = uniform_int(rng, 1, shape.max_latents);
    for (int k = 0; k < K; ++k) {
      dissim::LatentValue v{k, std::nullopt};
      if (shape.geometric) {
        const int x0 = uniform_int(rng, 0, 20), y0 = uniform_int(rng, 0, 20);
        v.box = dissim::Box{x0, y0, x0 + uniform_int(rng, 1, 12), y0 + uniform_int(rng, 1, 12)};
      }
      s.latent_space.push_back(v);
    }
    s.psi.resize(static_cast<Eigen::Index>(d.num_labels) * K, d.dim_w);
    for (Eigen::Index r = 0; r < s.psi.rows(); ++r)
      for (Eigen::Index c = 0; c < s.psi.cols(); ++c) s.psi(r, c) = normal(rng);
    s.phi.resize(K, d.dim_theta);
    for (Eigen::Index r = 0; r < s.phi.rows(); ++r)
      for (Eigen::Index c = 0; c < s.phi.cols(); ++c) s.phi(r, c) = normal(rng);
    s.truth_latent = uniform_int(rng, 0, K - 1);
    d.samples.push_back(std::move(s));
  }
  return d;
}

inline Vector random_vector(std::mt19937_64& rng, int size, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(size);
  for (auto& x : v) x = normal(rng);
  return v;
}

// ---------------------------------------------------------------------------
// Reference implementations.

inline double ref_score(const Vector& w, const SampleRecord& s, int y, int k) {
  double total = 0.0;
  const int row = y * s.num_latents() + k;
  for (int j = 0; j < static_cast<int>(w.size()); ++j) total += w[j] * s.psi(row, j);
  return total;
}

inline std::vector<double> ref_conditional(const Vector& theta, const SampleRecord& s) {
  const int K = s.num_latents();
  std::vector<double> logits(K);
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double v = 0.0;
    for (int j = 0; j < static_cast<int>(theta.size()); ++j) v += theta[j] * s.phi(k, j);
    logits[k] = v;
    top = std::max(top, v);
  }
  double z = 0.0;
  for (double& v : logits) z += (v = std::exp(v - top));
  for (double& v : logits) v /= z;
  return logits;
}

inline double ref_expected_loss(const Vector& theta, const SampleRecord& s, int y, int k, const LossFunction& loss) {
  const auto p = ref_conditional(theta, s);
  double total = 0.0;
  for (int h = 0; h < s.num_latents(); ++h) total += p[h] * loss(s.truth_label, h, y, k, s);
  return total;
}

inline double ref_self_diversity(const Vector& theta, const SampleRecord& s, const LossFunction& loss) {
  const auto p = ref_conditional(theta, s);
  double total = 0.0;
  for (int a = 0; a < s.num_latents(); ++a)
    for (int b = 0; b < s.num_latents(); ++b) total += p[a] * p[b] * loss(s.truth_label, a, s.truth_label, b, s);
  return total;
}

// Extended-precision variants for finite-difference oracles: at
// near-stationary points double rounding in f dominates the difference.
using LongVector = std::vector<long double>;

inline LongVector ref_conditional_ld(const LongVector& theta, const SampleRecord& s) {
  const int K = s.num_latents();
  LongVector logits(K);
  long double top = -std::numeric_limits<long double>::infinity();
  for (int k = 0; k < K; ++k) {
    long double v = 0.0L;
    for (std::size_t j = 0; j < theta.size(); ++j) v += theta[j] * s.phi(k, static_cast<Eigen::Index>(j));
    logits[k] = v;
    top = std::max(top, v);
  }
  long double z = 0.0L;
  for (long double& v : logits) z += (v = std::exp(v - top));
  for (long double& v : logits) v /= z;
  return logits;
}

inline long double ref_expected_loss_ld(const LongVector& theta, const SampleRecord& s, int y, int k,
                                        const LossFunction& loss) {
  const auto p = ref_conditional_ld(theta, s);
  long double total = 0.0L;
  for (int h = 0; h < s.num_latents(); ++h) total += p[h] * loss(s.truth_label, h, y, k, s);
  return total;
}

inline long double ref_self_diversity_ld(const LongVector& theta, const SampleRecord& s, const LossFunction& loss) {
  const auto p = ref_conditional_ld(theta, s);
  long double total = 0.0L;
  for (int a = 0; a < s.num_latents(); ++a)
    for (int b = 0; b < s.num_latents(); ++b) total += p[a] * p[b] * loss(s.truth_label, a, s.truth_label, b, s);
  return total;
}

template <class F>
Vector central_difference_ld(F&& f, const Vector& x, double h) {
  Vector g(x.size());
  LongVector base(x.data(), x.data() + x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    LongVector plus = base, minus = base;
    plus[j] += h;
    minus[j] -= h;
    g[j] = static_cast<double>((f(plus) - f(minus)) / (2.0L * h));
  }
  return g;
}

inline double ref_slack(const Vector& w, const Vector& theta, const SampleRecord& s, const LossFunction& loss) {
  double augmented = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < s.num_labels(); ++y)
    for (int k = 0; k < s.num_latents(); ++k)
      augmented = std::max(augmented, ref_score(w, s, y, k) + ref_expected_loss(theta, s, y, k, loss));
  double truth = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.num_latents(); ++k) truth = std::max(truth, ref_score(w, s, s.truth_label, k));
  return augmented - truth;
}

inline double ref_upper_bound(const Vector& w, const Vector& theta, const Dataset& d, const LossFunction& loss,
                              double beta) {
  double total = 0.0;
  for (const auto& s : d.samples) total += ref_slack(w, theta, s, loss) - beta * ref_self_diversity(theta, s, loss);
  return total / d.size();
}

// First maximiser in y-major order.
inline std::pair<int, int> ref_predict(const Vector& w, const SampleRecord& s) {
  std::pair<int, int> best{0, 0};
  double top = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < s.num_labels(); ++y)
    for (int k = 0; k < s.num_latents(); ++k) {
      const double v = ref_score(w, s, y, k);
      if (v > top) {
        top = v;
        best = {y, k};
      }
    }
  return best;
}

// Smallest gap between distinct scores of one sample; ties make predictions
// fragile under perturbation.
inline double score_gap(const Vector& w, const SampleRecord& s) {
  std::vector<double> v;
  for (int y = 0; y < s.num_labels(); ++y)
    for (int k = 0; k < s.num_latents(); ++k) v.push_back(ref_score(w, s, y, k));
  std::sort(v.begin(), v.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
  return gap;
}

inline double ref_regularized_objective(const Vector& w, const Vector& theta, const Dataset& d,
                                        const LossFunction& loss, const dissim::HyperParams& h) {
  return 0.5 * w.squaredNorm() + 0.5 * h.J * theta.squaredNorm() + h.C * ref_upper_bound(w, theta, d, loss, h.beta);
}

}  // namespace testing_support

#endif  // DISSIM_TESTS_SUPPORT_HPP
