#ifndef DISSIM_IO_HPP
#define DISSIM_IO_HPP

#include "dissim/trainer.hpp"
#include "dissim/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace dissim::io {

// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw InternalError("failed to format double");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw InputError("malformed number '" + std::string(text) + "'");
  return v;
}

inline long long parse_int(std::string_view text) {
  long long v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InputError("malformed integer '" + std::string(text) + "'");
  return v;
}

// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out) throw InputError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-empty, non-comment line split on whitespace.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    fail("unexpected end of file");
  }

  std::vector<std::string> expect(std::string_view keyword, std::size_t count) {
    auto t = next();
    if (t[0] != keyword) fail("expected '" + std::string(keyword) + "', found '" + t[0] + "'");
    if (t.size() != count) fail("'" + std::string(keyword) + "' line has wrong field count");
    return t;
  }

  bool at_end() {
    auto pos = in_.tellg();
    std::string line;
    int skipped = 0;
    while (std::getline(in_, line)) {
      ++skipped;
      if (!line.empty() && line[0] != '#' && line.find_first_not_of(" \t\r") != std::string::npos) {
        in_.clear();
        in_.seekg(pos);
        return false;
      }
    }
    line_no_ += skipped;
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

inline void append_row(std::string& out, std::string_view tag, const auto& row) {
  out += tag;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    out += ' ';
    out += format_double(row[j]);
  }
  out += '\n';
}

inline int to_int(const LineReader& r, const std::string& s) {
  try {
    return static_cast<int>(parse_int(s));
  } catch (const InputError& e) {
    r.fail(e.what());
  }
}

inline double to_double(const LineReader& r, const std::string& s) {
  try {
    return parse_double(s);
  } catch (const InputError& e) {
    r.fail(e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset file.
//
//   dissim-dataset 1
//   labels <c> dim_w <dw> dim_theta <dt> geometric <0|1> samples <n>
//   sample <id> label <y> latents <K> truth <k | ->
//   box <x0> <y0> <x1> <y1>        K lines, geometric datasets only
//   psi <dw values>                c*K lines, row y*K+k
//   phi <dt values>                K lines

inline std::string dataset_to_string(const Dataset& data) {
  validate(data);
  std::string out = "dissim-dataset 1\n";
  out += "labels " + std::to_string(data.num_labels) + " dim_w " + std::to_string(data.dim_w) + " dim_theta " +
         std::to_string(data.dim_theta) + " geometric " + (data.geometric() ? "1" : "0") + " samples " +
         std::to_string(data.size()) + "\n";
  for (const auto& s : data.samples) {
    out += "sample " + s.id + " label " + std::to_string(s.truth_label) + " latents " +
           std::to_string(s.num_latents()) + " truth " +
           (s.truth_latent ? std::to_string(*s.truth_latent) : std::string("-")) + "\n";
    if (data.geometric())
      for (const auto& lv : s.latent_space)
        out += "box " + std::to_string(lv.box->x0) + " " + std::to_string(lv.box->y0) + " " +
               std::to_string(lv.box->x1) + " " + std::to_string(lv.box->y1) + "\n";
    for (Eigen::Index r = 0; r < s.psi.rows(); ++r) detail::append_row(out, "psi", s.psi.row(r));
    for (Eigen::Index r = 0; r < s.phi.rows(); ++r) detail::append_row(out, "phi", s.phi.row(r));
  }
  return out;
}

inline Dataset dataset_from_string(const std::string& text) {
  detail::LineReader r(text);
  auto magic = r.expect("dissim-dataset", 2);
  if (magic[1] != "1") r.fail("unsupported dataset version " + magic[1]);
  auto h = r.expect("labels", 10);
  if (h[2] != "dim_w" || h[4] != "dim_theta" || h[6] != "geometric" || h[8] != "samples")
    r.fail("malformed header line");
  Dataset data;
  data.num_labels = detail::to_int(r, h[1]);
  data.dim_w = detail::to_int(r, h[3]);
  data.dim_theta = detail::to_int(r, h[5]);
  const bool geometric = detail::to_int(r, h[7]) != 0;
  const int n = detail::to_int(r, h[9]);
  if (data.num_labels < 2 || data.dim_w < 1 || data.dim_theta < 1 || n < 0) r.fail("invalid header values");
  for (int i = 0; i < n; ++i) {
    auto t = r.expect("sample", 8);
    if (t[2] != "label" || t[4] != "latents" || t[6] != "truth") r.fail("malformed sample line");
    SampleRecord s;
    s.id = t[1];
    s.truth_label = detail::to_int(r, t[3]);
    const int K = detail::to_int(r, t[5]);
    if (K < 1) r.fail("sample needs at least one latent");
    if (t[7] != "-") s.truth_latent = detail::to_int(r, t[7]);
    s.latent_space.resize(K);
    for (int k = 0; k < K; ++k) {
      s.latent_space[k].index = k;
      if (geometric) {
        auto b = r.expect("box", 5);
        s.latent_space[k].box = Box{detail::to_int(r, b[1]), detail::to_int(r, b[2]), detail::to_int(r, b[3]),
                                    detail::to_int(r, b[4])};
      }
    }
    s.psi.resize(static_cast<Eigen::Index>(data.num_labels) * K, data.dim_w);
    for (Eigen::Index row = 0; row < s.psi.rows(); ++row) {
      auto v = r.expect("psi", static_cast<std::size_t>(data.dim_w) + 1);
      for (int j = 0; j < data.dim_w; ++j) s.psi(row, j) = detail::to_double(r, v[j + 1]);
    }
    s.phi.resize(K, data.dim_theta);
    for (int row = 0; row < K; ++row) {
      auto v = r.expect("phi", static_cast<std::size_t>(data.dim_theta) + 1);
      for (int j = 0; j < data.dim_theta; ++j) s.phi(row, j) = detail::to_double(r, v[j + 1]);
    }
    data.samples.push_back(std::move(s));
  }
  if (!r.at_end()) r.fail("trailing content after last sample");
  validate(data);
  return data;
}

inline void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_file_atomic(path, dataset_to_string(data));
}

inline Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_string(read_file(path)); }

// ---------------------------------------------------------------------------
// Model file.

struct ModelFile {
  std::string method;
  std::string loss;
  HyperParams hyper;
  ModelParams params;
  std::vector<double> trace;
};

inline std::string model_to_string(const ModelFile& m) {
  std::string out = "dissim-model 1\n";
  out += "method " + m.method + " loss " + m.loss + " C " + format_double(m.hyper.C) + " J " +
         format_double(m.hyper.J) + " beta " + format_double(m.hyper.beta) + " epsilon " +
         format_double(m.hyper.epsilon) + "\n";
  detail::append_row(out, "w " + std::to_string(m.params.w.size()), m.params.w);
  detail::append_row(out, "theta " + std::to_string(m.params.theta.size()), m.params.theta);
  Vector trace = Eigen::Map<const Vector>(m.trace.data(), static_cast<Eigen::Index>(m.trace.size()));
  detail::append_row(out, "trace " + std::to_string(m.trace.size()), trace);
  return out;
}

inline ModelFile model_from_string(const std::string& text) {
  detail::LineReader r(text);
  auto magic = r.expect("dissim-model", 2);
  if (magic[1] != "1") r.fail("unsupported model version " + magic[1]);
  auto h = r.expect("method", 12);
  ModelFile m;
  m.method = h[1];
  m.loss = h[3];
  m.hyper.C = detail::to_double(r, h[5]);
  m.hyper.J = detail::to_double(r, h[7]);
  m.hyper.beta = detail::to_double(r, h[9]);
  m.hyper.epsilon = detail::to_double(r, h[11]);
  auto read_vector = [&](std::string_view tag) {
    auto t = r.next();
    if (t[0] != tag || t.size() < 2) r.fail("expected '" + std::string(tag) + "'");
    const int len = detail::to_int(r, t[1]);
    if (len < 0 || t.size() != static_cast<std::size_t>(len) + 2) r.fail("length mismatch");
    std::vector<double> v(len);
    for (int j = 0; j < len; ++j) v[j] = detail::to_double(r, t[j + 2]);
    return v;
  };
  auto w = read_vector("w");
  auto theta = read_vector("theta");
  m.params.w = Eigen::Map<Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
  m.params.theta = Eigen::Map<Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  m.trace = read_vector("trace");
  return m;
}

// ---------------------------------------------------------------------------
// Results file: one CSV row per (method, loss, C, fold).

inline constexpr std::string_view kResultsHeader =
    "method,loss_kind,C,fold,test_loss,train_objective,wallclock_seconds";

struct ResultRow {
  std::string method;
  std::string loss_kind;
  FoldResult fold;
};

inline std::string results_to_string(const std::vector<ResultRow>& rows, bool record_timing) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.method + "," + r.loss_kind + "," + format_double(r.fold.C) + "," + std::to_string(r.fold.fold) + "," +
           format_double(r.fold.test_loss) + "," + format_double(r.fold.train_objective) + "," +
           format_double(record_timing ? r.fold.wallclock_seconds : 0.0) + "\n";
  }
  return out;
}

inline std::vector<ResultRow> results_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw InputError("results file has unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw InputError("results row has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.method = f[0];
    r.loss_kind = f[1];
    r.fold.C = parse_double(f[2]);
    r.fold.fold = static_cast<int>(parse_int(f[3]));
    r.fold.test_loss = parse_double(f[4]);
    r.fold.train_objective = parse_double(f[5]);
    r.fold.wallclock_seconds = parse_double(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Three-column plot data: C, mean test loss, standard deviation.
inline std::string curve_to_string(const std::vector<CurvePoint>& curve) {
  std::string out = "# C mean_test_loss std_test_loss\n";
  for (const auto& p : curve)
    out += format_double(p.C) + " " + format_double(p.mean) + " " + format_double(p.stddev) + "\n";
  return out;
}

}  // namespace dissim::io

#endif  // DISSIM_IO_HPP
