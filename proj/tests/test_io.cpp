#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

using namespace dissim;
using namespace testing_support;

namespace fs = std::filesystem;

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 10000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    const double back = io::parse_double(io::format_double(v));
    EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0) << io::format_double(v);
    ++checked;
  }
  for (double v : {0.0, -0.0, 1e-310, std::numeric_limits<double>::max(), 0.1, 1.0 / 3.0}) {
    const double back = io::parse_double(io::format_double(v));
    EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0);
  }
}

TEST(ParseNumbers, RejectGarbage) {
  EXPECT_THROW(io::parse_double("1.5x"), InputError);
  EXPECT_THROW(io::parse_double(""), InputError);
  EXPECT_THROW(io::parse_double("nan"), InputError);
  EXPECT_THROW(io::parse_int("3.0"), InputError);
  EXPECT_EQ(io::parse_int("-12"), -12);
}

TEST(DatasetFile, RoundTripsBitExactly) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    InstanceShape shape;
    shape.geometric = trial % 2 == 0;
    Dataset d = random_dataset(rng, shape);
    if (trial % 3 == 0) d.samples[0].truth_latent.reset();
    const std::string text = io::dataset_to_string(d);
    const Dataset back = io::dataset_from_string(text);
    EXPECT_EQ(back, d);
    EXPECT_EQ(io::dataset_to_string(back), text);
  }
  TaskSpec spec;
  spec.per_class = 2;
  const Dataset g = generate(spec).data;
  EXPECT_EQ(io::dataset_from_string(io::dataset_to_string(g)), g);
}

TEST(DatasetFile, SaveLoadAtomically) {
  const fs::path dir = fs::temp_directory_path() / "dissim_io_test";
  fs::create_directories(dir);
  std::mt19937_64 rng(3);
  const Dataset d = random_dataset(rng);
  io::save_dataset(dir / "d.txt", d);
  EXPECT_FALSE(fs::exists(dir / "d.txt.tmp"));
  EXPECT_EQ(io::load_dataset(dir / "d.txt"), d);
  EXPECT_THROW(io::load_dataset(dir / "missing.txt"), InputError);
  fs::remove_all(dir);
}

TEST(DatasetFile, RejectsMalformedInput) {
  std::mt19937_64 rng(4);
  const Dataset d = random_dataset(rng);
  const std::string good = io::dataset_to_string(d);
  EXPECT_THROW(io::dataset_from_string(""), InputError);
  EXPECT_THROW(io::dataset_from_string("dissim-dataset 2\n"), InputError);
  EXPECT_THROW(io::dataset_from_string(good + "psi 1\n"), InputError);
  std::string truncated = good.substr(0, good.rfind("phi"));
  EXPECT_THROW(io::dataset_from_string(truncated), InputError);
  std::string bad_number = good;
  bad_number.replace(bad_number.find("psi ") + 4, 1, "x");
  EXPECT_THROW(io::dataset_from_string(bad_number), InputError);

  Dataset spaced = d;
  spaced.samples[0].id = "has space";
  EXPECT_THROW(io::dataset_to_string(spaced), InputError);
}

TEST(ModelFile, RoundTrip) {
  std::mt19937_64 rng(5);
  io::ModelFile m;
  m.method = "dissim";
  m.loss = "overlap";
  m.hyper.C = 0.001;
  m.params.w = random_vector(rng, 7);
  m.params.theta = random_vector(rng, 3);
  m.trace = {1.0 / 3.0, 0.25, 1e-17};
  const std::string text = io::model_to_string(m);
  const io::ModelFile back = io::model_from_string(text);
  EXPECT_EQ(back.method, m.method);
  EXPECT_EQ(back.loss, m.loss);
  EXPECT_EQ(back.hyper.C, m.hyper.C);
  EXPECT_EQ(back.hyper.J, m.hyper.J);
  EXPECT_EQ(back.hyper.beta, m.hyper.beta);
  EXPECT_EQ(back.hyper.epsilon, m.hyper.epsilon);
  EXPECT_EQ(back.params.w, m.params.w);
  EXPECT_EQ(back.params.theta, m.params.theta);
  EXPECT_EQ(back.trace, m.trace);
  EXPECT_EQ(io::model_to_string(back), text);
  EXPECT_THROW(io::model_from_string("dissim-model 1\nmethod x\n"), InputError);
}

TEST(ResultsFile, RoundTripAndTimingFlag) {
  std::vector<io::ResultRow> rows;
  for (int f = 0; f < 3; ++f) rows.push_back({"lsvm", "zero_one", FoldResult{0.01, f, 12.5 + f, 0.75, 1.25}});
  const std::string with = io::results_to_string(rows, true);
  const std::string without = io::results_to_string(rows, false);
  EXPECT_EQ(with.substr(0, with.find('\n')), io::kResultsHeader);
  const auto back = io::results_from_string(with);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].method, rows[i].method);
    EXPECT_EQ(back[i].fold.fold, rows[i].fold.fold);
    EXPECT_EQ(back[i].fold.test_loss, rows[i].fold.test_loss);
    EXPECT_EQ(back[i].fold.wallclock_seconds, 1.25);
  }
  EXPECT_EQ(io::results_from_string(without)[0].fold.wallclock_seconds, 0.0);
  EXPECT_EQ(io::results_to_string(io::results_from_string(with), true), with);
  EXPECT_THROW(io::results_from_string("wrong,header\n"), InputError);
}

TEST(CurveFile, ThreeColumns) {
  const std::string text = io::curve_to_string({{0.1, 20.0, 1.5}, {1.0, 10.0, 0.5}});
  EXPECT_EQ(text, "# C mean_test_loss std_test_loss\n0.1 20 1.5\n1 10 0.5\n");
}
