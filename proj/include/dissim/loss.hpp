#ifndef DISSIM_LOSS_HPP
#define DISSIM_LOSS_HPP

#include "dissim/types.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <string_view>

namespace dissim {

// Intersection over union, with areas computed exactly in integers.
inline double overlap_ratio(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw InputError("overlap_ratio on a degenerate box");
  const long long iw = std::max(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const long long ih = std::max(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

enum class LossKind { zero_one, overlap, zero_one_label_only, custom };

// Pluggable Δ(y1, k1, y2, k2) on one sample's latent space.
class LossFunction {
 public:
  using Fn = std::function<double(int y1, int k1, int y2, int k2, const SampleRecord&)>;

  static LossFunction zero_one() { return LossFunction(LossKind::zero_one, true, {}); }
  static LossFunction overlap() { return LossFunction(LossKind::overlap, true, {}); }
  // Depends on the labels only.
  static LossFunction zero_one_label_only() {
    return LossFunction(LossKind::zero_one_label_only, false, {});
  }
  static LossFunction custom(Fn fn, bool latent_dependent = true) {
    return LossFunction(LossKind::custom, latent_dependent, std::move(fn));
  }

  static LossFunction from_name(std::string_view name) {
    if (name == "zero_one") return zero_one();
    if (name == "overlap") return overlap();
    if (name == "zero_one_label_only") return zero_one_label_only();
    throw ConfigError("unknown loss '" + std::string(name) + "'");
  }

  LossKind kind() const { return kind_; }
  bool latent_dependent() const { return latent_dependent_; }

  std::string name() const {
    switch (kind_) {
      case LossKind::zero_one: return "zero_one";
      case LossKind::overlap: return "overlap";
      case LossKind::zero_one_label_only: return "zero_one_label_only";
      case LossKind::custom: return "custom";
    }
    return "unknown";
  }

  double operator()(int y1, int k1, int y2, int k2, const SampleRecord& s) const {
    switch (kind_) {
      case LossKind::zero_one:
        return (y1 == y2 && k1 == k2) ? 0.0 : 1.0;
      case LossKind::zero_one_label_only:
        return y1 == y2 ? 0.0 : 1.0;
      case LossKind::overlap: {
        if (y1 != y2) return 1.0;
        const auto& b1 = s.latent_space[k1].box;
        const auto& b2 = s.latent_space[k2].box;
        if (!b1 || !b2) throw ConfigError("overlap loss requires a dataset with boxes");
        return 1.0 - overlap_ratio(*b1, *b2);
      }
      case LossKind::custom:
        return fn_(y1, k1, y2, k2, s);
    }
    throw InternalError("unhandled loss kind");
  }

  void check_compatible(const Dataset& data) const {
    if (kind_ == LossKind::overlap && !data.geometric())
      throw ConfigError("overlap loss requires a geometric dataset");
  }

 private:
  LossFunction(LossKind kind, bool latent_dependent, Fn fn)
      : kind_(kind), latent_dependent_(latent_dependent), fn_(std::move(fn)) {}

  LossKind kind_;
  bool latent_dependent_;
  Fn fn_;
};

inline double zero_one_loss(int y1, int k1, int y2, int k2) {
  return (y1 == y2 && k1 == k2) ? 0.0 : 1.0;
}

inline double overlap_loss(int y1, int k1, int y2, int k2, const SampleRecord& s) {
  return LossFunction::overlap()(y1, k1, y2, k2, s);
}

// Δ(truth, k_i, y, k) for every candidate (y, k) and every latent k_i of one
// sample: entry (y * K + k, k_i). Expected losses are then a single
// matrix-vector product with P_θ, and the truth-label block is the
// self-diversity kernel.
class LossTable {
 public:
  LossTable() = default;
  LossTable(const SampleRecord& s, const LossFunction& loss) : K_(s.num_latents()) {
    const int c = s.num_labels();
    table_.resize(static_cast<Eigen::Index>(c) * K_, K_);
    for (int y = 0; y < c; ++y)
      for (int k = 0; k < K_; ++k)
        for (int ki = 0; ki < K_; ++ki)
          table_(y * K_ + k, ki) = loss(s.truth_label, ki, y, k, s);
    truth_ = s.truth_label;
    for (int ki = 1; ki < K_ && independent_; ++ki) independent_ = table_.col(ki) == table_.col(0);
  }

  const Matrix& table() const { return table_; }
  int num_latents() const { return K_; }
  // True when every column is identical, i.e. Δ ignores the true latent.
  bool latent_independent() const { return independent_; }
  // Rows (truth, k'), columns k: Δ(truth, k, truth, k').
  auto truth_block() const { return table_.middleRows(static_cast<Eigen::Index>(truth_) * K_, K_); }

 private:
  Matrix table_;
  int K_ = 0;
  int truth_ = 0;
  bool independent_ = true;
};

inline std::vector<LossTable> tabulate(const Dataset& data, const LossFunction& loss) {
  loss.check_compatible(data);
  std::vector<LossTable> out;
  out.reserve(data.samples.size());
  for (const auto& s : data.samples) out.emplace_back(s, loss);
  return out;
}

}  // namespace dissim

#endif  // DISSIM_LOSS_HPP
