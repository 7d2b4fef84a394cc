#ifndef DISSIM_GRADCHECK_HPP
#define DISSIM_GRADCHECK_HPP

#include "dissim/divergence.hpp"
#include "dissim/solver_theta.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

namespace dissim {

struct GradCheckOptions {
  int draws = 50;
  std::uint64_t seed = 0;
  double step = 1e-5;         // central-difference step
  double theta_scale = 1.0;   // std of random θ entries
  double w_scale = 1.0;       // std of random w entries
  double margin = 1e-4;       // minimum gap between the top two augmented scores
  double tolerance = 1e-6;
  bool corrupt = false;       // negative control: perturbs the analytic gradients
};

struct GradCheckTerm {
  std::string name;
  double worst = 0.0;
  int checked = 0;
  int skipped = 0;  // draws rejected by the margin test
};

struct GradCheckReport {
  std::array<GradCheckTerm, 3> terms{{{"expected_loss"}, {"self_diversity"}, {"slack"}}};

  double worst() const {
    double w = 0.0;
    for (const auto& t : terms) w = std::max(w, t.worst);
    return w;
  }
  bool passed(double tolerance) const {
    for (const auto& t : terms)
      if (t.checked == 0) return false;
    return worst() < tolerance;
  }
};

// ‖a - b‖ / max(‖a‖, ‖b‖). Gradients below `vanishing` in norm are compared
// in absolute terms, since finite differences only resolve them to noise.
inline double relative_error(const Vector& analytic, const Vector& numeric, double vanishing = 1e-8) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  const double diff = (analytic - numeric).norm();
  return scale < vanishing ? diff : diff / scale;
}

inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = f(probe);
    probe[j] = x[j] - h;
    const double down = f(probe);
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

// Gap between the largest and second-largest loss-augmented score.
inline double augmented_margin(const Vector& scores, const Vector& exp_losses) {
  const Vector v = scores + exp_losses;
  if (v.size() < 2) return INFINITY;
  const int top = first_argmax(v);
  double second = -INFINITY;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (j != top) second = std::max(second, v[j]);
  return v[top] - second;
}

// Compares the analytic θ-gradients of the expected loss, the self-diversity
// and the slack with central differences at random (w, θ) points.
inline GradCheckReport run_gradcheck(const Dataset& data, const LossFunction& loss, const GradCheckOptions& opts) {
  if (data.size() == 0) throw InputError("gradient check needs a non-empty dataset");
  loss.check_compatible(data);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick_sample(0, data.size() - 1);
  const double bias = opts.corrupt ? 1e-3 : 0.0;

  GradCheckReport report;
  auto record = [](GradCheckTerm& term, const Vector& analytic, const Vector& numeric) {
    term.worst = std::max(term.worst, relative_error(analytic, numeric));
    ++term.checked;
  };

  for (int d = 0; d < opts.draws; ++d) {
    const auto& s = data.samples[pick_sample(rng)];
    Vector theta(data.dim_theta), w(data.dim_w);
    for (auto& v : theta) v = opts.theta_scale * normal(rng);
    for (auto& v : w) v = opts.w_scale * normal(rng);
    const int y = std::uniform_int_distribution<int>(0, s.num_labels() - 1)(rng);
    const int k = std::uniform_int_distribution<int>(0, s.num_latents() - 1)(rng);

    Vector g = grad_expected_loss(theta, s, y, k, loss);
    g.array() += bias * g.norm();
    record(report.terms[0], g,
           central_difference([&](const Vector& t) { return expected_loss(t, s, y, k, loss); }, theta, opts.step));

    g = grad_self_diversity(theta, s, loss);
    g.array() += bias * g.norm();
    record(report.terms[1], g,
           central_difference([&](const Vector& t) { return self_diversity_theta(t, s, loss); }, theta, opts.step));

    const LossTable table(s, loss);
    const Vector scores = all_scores(w, s);
    if (augmented_margin(scores, expected_losses(conditional_distribution(theta, s), table)) < opts.margin) {
      ++report.terms[2].skipped;
      continue;
    }
    g = grad_slack_xi(w, theta, s, loss);
    g.array() += bias * g.norm();
    record(report.terms[2], g,
           central_difference([&](const Vector& t) { return slack_xi(w, t, s, loss); }, theta, opts.step));
  }
  return report;
}

}  // namespace dissim

#endif  // DISSIM_GRADCHECK_HPP
