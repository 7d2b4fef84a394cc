#ifndef DISSIM_TYPES_HPP
#define DISSIM_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dissim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Error hierarchy. The CLI maps InputError/ConfigError to exit code 2 and
// SolverError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, Vector last_iterate, int round = -1)
      : Error(what), last_iterate_(std::move(last_iterate)), round_(round) {}

  const Vector& last_iterate() const { return last_iterate_; }
  int round() const { return round_; }

  SolverError with_round(int round) const {
    return SolverError(std::string(what()) + " (outer round " + std::to_string(round) + ")",
                       last_iterate_, round);
  }

 private:
  Vector last_iterate_;
  int round_;
};

// Axis-aligned rectangle in integer pixel units, half-open on both axes.
struct Box {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  long long area() const { return static_cast<long long>(x1 - x0) * (y1 - y0); }
  bool valid() const { return x0 < x1 && y0 < y1; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct LatentValue {
  int index = 0;
  std::optional<Box> box;
  friend bool operator==(const LatentValue&, const LatentValue&) = default;
};

// One weakly-labelled example. psi holds one row per (label, latent) pair at
// row y * K + k; phi holds one row per latent value, evaluated at the
// ground-truth label only.
struct SampleRecord {
  std::string id;
  int truth_label = 0;
  std::vector<LatentValue> latent_space;
  Matrix psi;
  Matrix phi;
  // Planted latent, when known. Never read by training code.
  std::optional<int> truth_latent;

  int num_latents() const { return static_cast<int>(latent_space.size()); }
  int num_labels() const {
    return num_latents() == 0 ? 0 : static_cast<int>(psi.rows()) / num_latents();
  }
  auto psi_row(int y, int k) const { return psi.row(static_cast<Eigen::Index>(y) * num_latents() + k); }
  auto phi_row(int k) const { return phi.row(k); }

  friend bool operator==(const SampleRecord& a, const SampleRecord& b) {
    return a.id == b.id && a.truth_label == b.truth_label && a.latent_space == b.latent_space &&
           a.psi.rows() == b.psi.rows() && a.psi.cols() == b.psi.cols() && a.psi == b.psi &&
           a.phi.rows() == b.phi.rows() && a.phi.cols() == b.phi.cols() && a.phi == b.phi &&
           a.truth_latent == b.truth_latent;
  }
};

struct Dataset {
  int num_labels = 2;
  int dim_w = 1;
  int dim_theta = 1;
  std::vector<SampleRecord> samples;

  int size() const { return static_cast<int>(samples.size()); }
  bool geometric() const {
    return !samples.empty() && !samples.front().latent_space.empty() &&
           samples.front().latent_space.front().box.has_value();
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct ModelParams {
  Vector w;
  Vector theta;

  static ModelParams zeros(const Dataset& data) {
    return {Vector::Zero(data.dim_w), Vector::Zero(data.dim_theta)};
  }
};

// Probabilities over one sample's latent space.
struct FiniteDistribution {
  Vector probs;

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int k) const { return probs[k]; }

  static FiniteDistribution delta(int size, int at) {
    FiniteDistribution d{Vector::Zero(size)};
    d.probs[at] = 1.0;
    return d;
  }
  static FiniteDistribution uniform(int size) {
    return {Vector::Constant(size, 1.0 / size)};
  }
};

// Checks every Dataset/SampleRecord invariant; throws InputError on the first
// violation.
inline void validate(const Dataset& data) {
  if (data.num_labels < 2) throw InputError("dataset needs at least 2 labels");
  if (data.dim_w < 1 || data.dim_theta < 1) throw InputError("feature dimensions must be >= 1");
  std::unordered_set<std::string> ids;
  bool any_box = false, any_abstract = false;
  for (const auto& s : data.samples) {
    if (s.id.empty() || s.id.find_first_of(" \t\r\n") != std::string::npos)
      throw InputError("sample id '" + s.id + "' must be a non-empty token without whitespace");
    if (!ids.insert(s.id).second) throw InputError("duplicate sample id '" + s.id + "'");
    const int K = s.num_latents();
    if (K < 1) throw InputError("sample '" + s.id + "' has an empty latent space");
    if (s.truth_label < 0 || s.truth_label >= data.num_labels)
      throw InputError("sample '" + s.id + "' has out-of-range label");
    if (s.psi.rows() != static_cast<Eigen::Index>(data.num_labels) * K || s.psi.cols() != data.dim_w)
      throw InputError("sample '" + s.id + "' psi table has wrong shape");
    if (s.phi.rows() != K || s.phi.cols() != data.dim_theta)
      throw InputError("sample '" + s.id + "' phi table has wrong shape");
    if (!s.psi.allFinite() || !s.phi.allFinite())
      throw InputError("sample '" + s.id + "' has non-finite features");
    for (int k = 0; k < K; ++k) {
      const auto& lv = s.latent_space[k];
      if (lv.index != k) throw InputError("sample '" + s.id + "' latent indices not contiguous");
      if (lv.box) {
        any_box = true;
        if (!lv.box->valid()) throw InputError("sample '" + s.id + "' has a degenerate box");
      } else {
        any_abstract = true;
      }
    }
    if (s.truth_latent && (*s.truth_latent < 0 || *s.truth_latent >= K))
      throw InputError("sample '" + s.id + "' truth latent out of range");
  }
  if (any_box && any_abstract) throw InputError("dataset mixes boxed and abstract latents");
}

inline void check_dims(const Vector& v, int expected, const char* what) {
  if (v.size() != expected)
    throw ConfigError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(expected));
}

}  // namespace dissim

#endif  // DISSIM_TYPES_HPP
