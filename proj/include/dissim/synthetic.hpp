#ifndef DISSIM_SYNTHETIC_HPP
#define DISSIM_SYNTHETIC_HPP

#include "dissim/loss.hpp"
#include "dissim/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <vector>

namespace dissim {

// Weakly-labelled localisation task on a G x G grid of cells. Each sample
// has one planted object filling a candidate box; the remaining cells are
// background, except that each carries a random class signature with
// probability `clutter`.
struct TaskSpec {
  int num_classes = 6;
  int per_class = 45;
  int grid = 8;
  int num_boxes = 16;
  int box_cells = 3;
  int dim = 8;
  double clutter = 0.3;
  double noise = 0.5;
  std::uint64_t seed = 0;
  int cell_pixels = 8;

  void validate() const {
    if (num_classes < 2) throw InputError("num_classes must be >= 2");
    if (per_class < 1) throw InputError("per_class must be >= 1");
    if (dim < 1) throw InputError("dim must be >= 1");
    if (box_cells < 1 || box_cells > grid) throw InputError("box_cells must lie in [1, grid]");
    if (num_boxes < 1) throw InputError("num_boxes must be >= 1");
    if (!(clutter >= 0 && clutter <= 1)) throw InputError("clutter must lie in [0, 1]");
    if (!(noise >= 0)) throw InputError("noise must be >= 0");
    if (cell_pixels < 1) throw InputError("cell_pixels must be >= 1");
    const int positions = grid - box_cells + 1;
    if (num_boxes > positions * positions)
      throw InputError("num_boxes exceeds the number of box positions on the grid");
  }
};

struct GroundTruth {
  std::vector<int> latent;  // planted box per sample
};

struct GeneratedTask {
  Dataset data;
  GroundTruth truth;
  Matrix signatures;  // one row per class
  Vector background;
};

namespace detail {

struct CellPos {
  int x = 0, y = 0;
};

// Candidate top-left corners: an m x m lattice spread evenly over the
// feasible offsets (m = ceil(sqrt(K))), row-major, first K kept. Falls back to
// every position when the lattice would repeat offsets.
inline std::vector<CellPos> candidate_corners(const TaskSpec& spec) {
  const int span = spec.grid - spec.box_cells;
  int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.num_boxes))));
  std::vector<int> offsets;
  if (m - 1 > span) {
    for (int o = 0; o <= span; ++o) offsets.push_back(o);
  } else if (m == 1) {
    offsets.push_back(0);
  } else {
    for (int j = 0; j < m; ++j)
      offsets.push_back(static_cast<int>(std::lround(static_cast<double>(j) * span / (m - 1))));
  }
  std::vector<CellPos> corners;
  for (int oy : offsets)
    for (int ox : offsets)
      if (static_cast<int>(corners.size()) < spec.num_boxes) corners.push_back({ox, oy});
  return corners;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Class signatures plus a shared background vector; orthonormal when
// num_classes + 1 <= dim, unit-norm random otherwise.
inline void draw_signatures(const TaskSpec& spec, Matrix& signatures, Vector& background) {
  std::mt19937_64 rng(mix_seed(spec.seed, 0, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const int rows = spec.num_classes + 1;
  Matrix raw(rows, spec.dim);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < spec.dim; ++j) raw(r, j) = normal(rng);
  const bool orthogonal = rows <= spec.dim;
  for (int r = 0; r < rows; ++r) {
    Vector v = raw.row(r).transpose();
    if (orthogonal)
      for (int q = 0; q < r; ++q) v -= raw.row(q).dot(v) * raw.row(q).transpose();
    raw.row(r) = (v / v.norm()).transpose();
  }
  signatures = raw.topRows(spec.num_classes);
  background = raw.row(spec.num_classes).transpose();
}

}  // namespace detail

inline GeneratedTask generate(const TaskSpec& spec) {
  spec.validate();
  GeneratedTask task;
  detail::draw_signatures(spec, task.signatures, task.background);
  const auto corners = detail::candidate_corners(spec);
  const int K = static_cast<int>(corners.size());
  const int c = spec.num_classes;
  const int d = spec.dim;
  const int G = spec.grid;
  const int b = spec.box_cells;

  task.data.num_labels = c;
  task.data.dim_w = c * d;
  task.data.dim_theta = d;

  std::vector<LatentValue> latents(K);
  for (int k = 0; k < K; ++k) {
    const auto& p = corners[k];
    latents[k] = {k, Box{p.x * spec.cell_pixels, p.y * spec.cell_pixels, (p.x + b) * spec.cell_pixels,
                         (p.y + b) * spec.cell_pixels}};
  }

  int index = 0;
  for (int y = 0; y < c; ++y) {
    for (int j = 0; j < spec.per_class; ++j, ++index) {
      // Independent streams: placement, noise, clutter.
      std::mt19937_64 place_rng(detail::mix_seed(spec.seed, 1, index));
      std::mt19937_64 noise_rng(detail::mix_seed(spec.seed, 2, index));
      std::mt19937_64 clutter_rng(detail::mix_seed(spec.seed, 3, index));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::uniform_int_distribution<int> any_class(0, c - 1);

      const int planted = std::uniform_int_distribution<int>(0, K - 1)(place_rng);
      const auto& corner = corners[planted];
      Matrix cells(G * G, d);
      for (int cy = 0; cy < G; ++cy) {
        for (int cx = 0; cx < G; ++cx) {
          const bool object = cx >= corner.x && cx < corner.x + b && cy >= corner.y && cy < corner.y + b;
          const double u = unit(clutter_rng);
          const int clutter_class = any_class(clutter_rng);
          Vector f;
          if (object)
            f = task.signatures.row(y).transpose();
          else if (u < spec.clutter)
            f = task.signatures.row(clutter_class).transpose();
          else
            f = task.background;
          for (int q = 0; q < d; ++q) f[q] += spec.noise * normal(noise_rng);
          cells.row(cy * G + cx) = f.transpose();
        }
      }

      SampleRecord s;
      char id[32];
      std::snprintf(id, sizeof id, "s%05d", index);
      s.id = id;
      s.truth_label = y;
      s.latent_space = latents;
      s.truth_latent = planted;
      s.phi.resize(K, d);
      for (int k = 0; k < K; ++k) {
        Vector pooled = Vector::Zero(d);
        for (int cy = corners[k].y; cy < corners[k].y + b; ++cy)
          for (int cx = corners[k].x; cx < corners[k].x + b; ++cx) pooled += cells.row(cy * G + cx).transpose();
        s.phi.row(k) = (pooled / (b * b)).transpose();
      }
      s.psi = Matrix::Zero(static_cast<Eigen::Index>(c) * K, c * d);
      for (int yy = 0; yy < c; ++yy)
        for (int k = 0; k < K; ++k) s.psi.block(yy * K + k, yy * d, 1, d) = s.phi.row(k);
      task.truth.latent.push_back(planted);
      task.data.samples.push_back(std::move(s));
    }
  }
  return task;
}

// Class-template parameters: block y of w is the class-y signature.
inline Vector template_w(const GeneratedTask& task) {
  const int c = static_cast<int>(task.signatures.rows());
  const int d = static_cast<int>(task.signatures.cols());
  Vector w(c * d);
  for (int y = 0; y < c; ++y) w.segment(y * d, d) = task.signatures.row(y).transpose();
  return w;
}

// Independent evaluation of the dissimilarity objective by direct loops,
// sharing no code with the library's divergence evaluators. Test use only.
inline double oracle_objective(const Vector& w, const Vector& theta, const Dataset& data,
                               const LossFunction& loss, double beta) {
  double work = 0.0;
  for (const auto& s : data.samples)
    work += static_cast<double>(data.num_labels) * s.num_latents() * s.num_latents();
  if (work > 1e6) throw InputError("oracle_objective refuses instances with n*c*K^2 > 1e6");
  double total = 0.0;
  for (const auto& s : data.samples) {
    const int K = s.num_latents();
    // Delta-distribution prediction.
    int best_y = 0, best_k = 0;
    double best_score = -INFINITY;
    for (int y = 0; y < data.num_labels; ++y) {
      for (int k = 0; k < K; ++k) {
        double sc = 0.0;
        for (int j = 0; j < data.dim_w; ++j) sc += w[j] * s.psi(y * K + k, j);
        if (sc > best_score) {
          best_score = sc;
          best_y = y;
          best_k = k;
        }
      }
    }
    // Conditional distribution.
    std::vector<double> logit(K), prob(K);
    double top = -INFINITY;
    for (int k = 0; k < K; ++k) {
      logit[k] = 0.0;
      for (int j = 0; j < data.dim_theta; ++j) logit[k] += theta[j] * s.phi(k, j);
      top = std::max(top, logit[k]);
    }
    double z = 0.0;
    for (int k = 0; k < K; ++k) z += std::exp(logit[k] - top);
    for (int k = 0; k < K; ++k) prob[k] = std::exp(logit[k] - top) / z;
    // Cross term and self-diversity.
    double cross = 0.0;
    for (int h = 0; h < K; ++h) cross += loss(s.truth_label, h, best_y, best_k, s) * prob[h];
    double self = 0.0;
    for (int h1 = 0; h1 < K; ++h1)
      for (int h2 = 0; h2 < K; ++h2) self += prob[h1] * prob[h2] * loss(s.truth_label, h2, s.truth_label, h1, s);
    total += cross - beta * self;
  }
  return total / data.size();
}

}  // namespace dissim

#endif  // DISSIM_SYNTHETIC_HPP
