#ifndef DISSIM_SOLVER_W_HPP
#define DISSIM_SOLVER_W_HPP

#include "dissim/divergence.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace dissim {

// One aggregated 1-slack constraint:  xi >= offset - w . direction.
struct CuttingPlane {
  Vector direction;
  double offset = 0.0;
};

struct InnerOptions {
  double tol = 1e-4;
  int max_planes = 500;
  // Dual ascent stops when the working-set duality gap, divided by C, drops
  // below gap_fraction * tol.
  double gap_fraction = 1e-3;
  long max_dual_steps = 2'000'000;
};

struct InnerSolution {
  Vector w;
  double slack = 0.0;       // slack over the working set
  double full_slack = 0.0;  // slack over all constraints at w
  double objective = 0.0;   // 1/2 |w|^2 + C * slack
  std::vector<double> violations_on_add;
};

struct WSolverReport {
  int iterations = 0;
  double final_objective = 0.0;
  std::vector<double> trace;     // w objective at w_init, then after every CCCP step
  std::vector<Vector> iterates;  // w at the same points as trace
  int total_planes = 0;
};

inline int latent_impute(const Vector& w, const SampleRecord& s) { return best_latent(w, s, s.truth_label); }

// argmax_{y,k} score + offsets, first maximum wins.
inline Prediction augmented_argmax(const Vector& scores, const Vector& offsets, int K) {
  const int flat = first_argmax(scores + offsets);
  return {flat / K, flat % K};
}

inline Prediction loss_augmented_argmax(const Vector& w, const Vector& theta, const SampleRecord& s,
                                        const LossFunction& loss) {
  const LossTable table(s, loss);
  return augmented_argmax(all_scores(w, s), expected_losses(conditional_distribution(theta, s), table),
                          s.num_latents());
}

namespace detail {

// Working-set QP
//   min_w 1/2 |w|^2 + C max(0, max_j offset_j - w . direction_j)
// solved in the dual over the simplex sum(alpha) = C, where index 0 is the
// implicit zero plane. Pairwise (SMO) steps with exact line search.
class WorkingSet {
 public:
  WorkingSet(int dim, double C) : C_(C), dim_(dim) {
    planes_.push_back({Vector::Zero(dim), 0.0});
    alpha_.push_back(C);
    gram_.push_back({0.0});
    g_alpha_.push_back(0.0);
  }

  int size() const { return static_cast<int>(planes_.size()) - 1; }

  bool contains(const CuttingPlane& p) const {
    for (std::size_t j = 1; j < planes_.size(); ++j)
      if (planes_[j].offset == p.offset && planes_[j].direction == p.direction) return true;
    return false;
  }

  void add(CuttingPlane p) {
    const std::size_t m = planes_.size();
    std::vector<double> row(m + 1);
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = planes_[j].direction.dot(p.direction);
      gram_[j].push_back(row[j]);
    }
    row[m] = p.direction.squaredNorm();
    gram_.push_back(std::move(row));
    double ga = 0.0;
    for (std::size_t j = 0; j < m; ++j) ga += gram_[m][j] * alpha_[j];
    g_alpha_.push_back(ga);
    alpha_.push_back(0.0);
    planes_.push_back(std::move(p));
  }

  void solve(double gap_tol, long max_steps) {
    const std::size_t m = planes_.size();
    std::vector<double> grad(m);
    for (long step = 0; step < max_steps; ++step) {
      std::size_t up = 0, dn = m;
      double gmax = -std::numeric_limits<double>::infinity();
      double weighted = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        grad[j] = planes_[j].offset - g_alpha_[j];
        if (grad[j] > gmax) { gmax = grad[j]; up = j; }
        weighted += alpha_[j] * grad[j];
      }
      if (C_ * gmax - weighted <= gap_tol * C_) return;
      for (std::size_t j = 0; j < m; ++j)
        if (alpha_[j] > 0 && (dn == m || grad[j] < grad[dn])) dn = j;
      if (dn == m || dn == up) return;
      const double diff = grad[up] - grad[dn];
      const double eta = gram_[up][up] + gram_[dn][dn] - 2.0 * gram_[up][dn];
      double t = eta > 1e-300 ? diff / eta : alpha_[dn];
      t = std::min(t, alpha_[dn]);
      if (t <= 0) return;
      alpha_[up] += t;
      alpha_[dn] -= t;
      if (alpha_[dn] < 1e-300) alpha_[dn] = 0.0;
      for (std::size_t j = 0; j < m; ++j) g_alpha_[j] += t * (gram_[j][up] - gram_[j][dn]);
    }
  }

  Vector primal() const {
    Vector w = Vector::Zero(dim_);
    for (std::size_t j = 1; j < planes_.size(); ++j)
      if (alpha_[j] != 0.0) w.noalias() += alpha_[j] * planes_[j].direction;
    return w;
  }

  double slack_at(const Vector& w) const {
    double xi = 0.0;
    for (std::size_t j = 1; j < planes_.size(); ++j)
      xi = std::max(xi, planes_[j].offset - planes_[j].direction.dot(w));
    return xi;
  }

 private:
  double C_;
  int dim_;
  std::vector<CuttingPlane> planes_;
  std::vector<double> alpha_;
  std::vector<std::vector<double>> gram_;
  std::vector<double> g_alpha_;
};

// Most violated joint constraint at w: per sample the loss-augmented argmax,
// aggregated in sample order.
inline CuttingPlane most_violated(const Dataset& data, const std::vector<Vector>& offsets,
                                  const std::vector<Vector>& anchors, const Vector& w) {
  CuttingPlane plane{Vector::Zero(data.dim_w), 0.0};
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    const Prediction p = augmented_argmax(s.psi * w, offsets[i], s.num_latents());
    plane.direction += anchors[i];
    plane.direction -= s.psi_row(p.label, p.latent).transpose();
    plane.offset += offsets[i][p.label * s.num_latents() + p.latent];
  }
  plane.direction /= data.size();
  plane.offset /= data.size();
  return plane;
}

}  // namespace detail

// Convex step of CCCP with the truth-label term linearised:
//   min_w 1/2 |w|^2 + C/n sum_i xi_i,
//   xi_i >= w.psi(y,k) + offsets_i(y,k) - w.anchor_i  for all (y,k),
// by 1-slack cutting planes. offsets_i is indexed y * K + k; anchor_i is
// psi(truth, h*_i), or the centroid of the tied rows when h*_i is not unique.
inline InnerSolution solve_inner_convex(const Dataset& data, const std::vector<Vector>& offsets,
                                        const std::vector<Vector>& anchors, double C,
                                        const InnerOptions& opts = {}) {
  if (!(opts.tol > 0)) throw ConfigError("inner tolerance must be > 0");
  if (!(C > 0)) throw ConfigError("C must be > 0");
  if (data.size() == 0) throw InputError("empty dataset");
  detail::WorkingSet ws(data.dim_w, C);
  InnerSolution sol;
  sol.w = Vector::Zero(data.dim_w);
  for (;;) {
    CuttingPlane plane = detail::most_violated(data, offsets, anchors, sol.w);
    const double value = plane.offset - plane.direction.dot(sol.w);
    sol.slack = ws.slack_at(sol.w);
    sol.full_slack = std::max(sol.slack, value);
    const double violation = value - sol.slack;
    if (violation < opts.tol || ws.contains(plane)) break;
    if (ws.size() >= opts.max_planes)
      throw SolverError("cutting-plane budget of " + std::to_string(opts.max_planes) + " planes exhausted",
                        sol.w);
    sol.violations_on_add.push_back(violation);
    ws.add(std::move(plane));
    ws.solve(opts.gap_fraction * opts.tol, opts.max_dual_steps);
    sol.w = ws.primal();
  }
  sol.objective = 0.5 * sol.w.squaredNorm() + C * sol.slack;
  return sol;
}

// Convenience entry point: offsets are the expected losses under P_θ.
inline Vector solve_inner_convex(const Dataset& data, const Vector& theta, const std::vector<int>& imputed,
                                 const LossFunction& loss, double C, double inner_tol) {
  const auto tables = tabulate(data, loss);
  std::vector<Vector> offsets;
  for (int i = 0; i < data.size(); ++i)
    offsets.push_back(expected_losses(conditional_distribution(theta, data.samples[i]), tables[i]));
  std::vector<Vector> anchors;
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    if (imputed.at(i) < 0 || imputed[i] >= s.num_latents()) throw IndexError("imputed latent out of range");
    anchors.push_back(s.psi_row(s.truth_label, imputed[i]).transpose());
  }
  InnerOptions opts;
  opts.tol = inner_tol;
  return solve_inner_convex(data, offsets, anchors, C, opts).w;
}

// Latents attaining the truth-label maximum score, in increasing order. More
// than one only at exact ties (always at w = 0).
inline std::vector<int> tied_latents(const Vector& scores, int K, int truth) {
  const auto row = scores.segment(static_cast<Eigen::Index>(truth) * K, K);
  const double top = row.maxCoeff();
  std::vector<int> tied;
  for (int k = 0; k < K; ++k)
    if (row[k] == top) tied.push_back(k);
  return tied;
}

// True when every tied latent has the same truth-label psi row, so the tie
// is not a kink of the objective.
inline bool same_rows(const SampleRecord& s, const std::vector<int>& tied) {
  for (std::size_t j = 1; j < tied.size(); ++j)
    if (s.psi_row(s.truth_label, tied[j]) != s.psi_row(s.truth_label, tied[0])) return false;
  return true;
}

inline Vector tied_anchor(const SampleRecord& s, const std::vector<int>& tied) {
  Vector a = Vector::Zero(s.psi.cols());
  for (int k : tied) a += s.psi_row(s.truth_label, k).transpose();
  return a / static_cast<double>(tied.size());
}

// Generic CCCP driver shared by the dissimilarity w-step and the LSVM/ILSVM
// baselines. offsets_for(i, tied) supplies the per-candidate loss term of
// sample i given its imputed latent(s).
template <class OffsetFn>
double cccp_objective(const Dataset& data, const Vector& w, double C, OffsetFn&& offsets_for) {
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    const Vector scores = s.psi * w;
    const int K = s.num_latents();
    total += slack_from(scores, offsets_for(i, tied_latents(scores, K, s.truth_label)), K, s.truth_label);
  }
  return 0.5 * w.squaredNorm() + C * total / data.size();
}

// Alternates imputation and the convex step until the objective decreases by
// less than C * epsilon. At exact ties the concave term -max_h w.psi(truth, h)
// is linearised with the centroid of the tied rows, which is a valid
// subgradient, so the iterates still descend.
template <class OffsetFn>
Vector run_cccp(const Dataset& data, const Vector& w_init, double C, double epsilon, OffsetFn&& offsets_for,
                WSolverReport& report, const InnerOptions& opts = {}, int max_iterations = 100) {
  if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
  check_dims(w_init, data.dim_w, "w_init");
  Vector w = w_init;
  double f_prev = cccp_objective(data, w, C, offsets_for);
  report = {};
  report.trace.push_back(f_prev);
  report.iterates.push_back(w);
  std::vector<Vector> anchors(data.size());
  std::vector<Vector> offsets(data.size());
  for (int t = 0; t < max_iterations; ++t) {
    bool any_tie = false;
    for (int i = 0; i < data.size(); ++i) {
      const auto& s = data.samples[i];
      const auto tied = tied_latents(s.psi * w, s.num_latents(), s.truth_label);
      any_tie = any_tie || !same_rows(s, tied);
      anchors[i] = tied_anchor(s, tied);
      offsets[i] = offsets_for(i, tied);
    }
    InnerSolution sol = solve_inner_convex(data, offsets, anchors, C, opts);
    report.total_planes += static_cast<int>(sol.violations_on_add.size());
    const double f_new = cccp_objective(data, sol.w, C, offsets_for);
    ++report.iterations;
    const double decrease = f_prev - f_new;
    // A step taken from tied imputations only breaks the symmetry: it is
    // kept when within the inner tolerance and never ends the loop.
    const bool symmetry_step = any_tie && sol.w != w && decrease >= -C * opts.tol;
    if (f_new <= f_prev || symmetry_step) {
      w = std::move(sol.w);
      f_prev = f_new;
    }
    report.trace.push_back(f_prev);
    report.iterates.push_back(w);
    if (decrease < C * epsilon && !symmetry_step) break;
  }
  report.final_objective = f_prev;
  return w;
}

// W objective: 1/2 |w|^2 + C/n sum_i slack_xi(w, θ, s_i).
inline double objective_w(const Vector& w, const Vector& theta, const Dataset& data,
                          const LossFunction& loss, double C) {
  const auto tables = tabulate(data, loss);
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    total += slack_from(all_scores(w, s), expected_losses(conditional_distribution(theta, s), tables[i]),
                        s.num_latents(), s.truth_label);
  }
  return 0.5 * w.squaredNorm() + C * total / data.size();
}

// CCCP over w for fixed θ. The expected-loss offsets do not depend on the
// imputed latents, so they are computed once.
inline Vector cccp_w(const Dataset& data, const Vector& theta, const Vector& w_init,
                     const std::vector<LossTable>& tables, double C, double epsilon, WSolverReport& report,
                     const InnerOptions& opts = {}, int max_iterations = 100) {
  check_dims(theta, data.dim_theta, "theta");
  std::vector<Vector> offsets;
  offsets.reserve(data.size());
  for (int i = 0; i < data.size(); ++i)
    offsets.push_back(expected_losses(conditional_distribution(theta, data.samples[i]), tables[i]));
  return run_cccp(
      data, w_init, C, epsilon, [&](int i, const std::vector<int>&) -> const Vector& { return offsets[i]; },
      report, opts, max_iterations);
}

inline Vector cccp_w(const Dataset& data, const Vector& theta, const Vector& w_init, const LossFunction& loss,
                     double C, double epsilon, WSolverReport& report, const InnerOptions& opts = {}) {
  return cccp_w(data, theta, w_init, tabulate(data, loss), C, epsilon, report, opts);
}

}  // namespace dissim

#endif  // DISSIM_SOLVER_W_HPP
