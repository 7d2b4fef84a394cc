#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dissim;
using namespace testing_support;

namespace {

const LossFunction kZeroLoss = LossFunction::custom([](int, int, int, int, const SampleRecord&) { return 0.0; });

Vector fd(const std::function<double(const Vector&)>& f, const Vector& x) { return central_difference(f, x, 1e-5); }

}  // namespace

TEST(GradExpectedLoss, ConstantLossGivesZero) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = random_dataset(rng);
    const Vector theta = random_vector(rng, d.dim_theta);
    for (const auto& s : d.samples)
      for (int y = 0; y < d.num_labels; ++y) {
        if (y == s.truth_label) continue;
        for (int k = 0; k < s.num_latents(); ++k)
          EXPECT_LT(grad_expected_loss(theta, s, y, k, LossFunction::zero_one()).norm(), 1e-15);
      }
  }
}

TEST(GradExpectedLoss, SingleLatentGivesZero) {
  std::mt19937_64 rng(2);
  InstanceShape shape;
  shape.max_latents = 1;
  const Dataset d = random_dataset(rng, shape);
  const Vector theta = random_vector(rng, d.dim_theta);
  for (const auto& s : d.samples) {
    EXPECT_LT(grad_expected_loss(theta, s, s.truth_label, 0, LossFunction::overlap()).norm(), 1e-15);
    EXPECT_LT(grad_self_diversity(theta, s, LossFunction::overlap()).norm(), 1e-15);
  }
}

TEST(GradExpectedLoss, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset d = random_dataset(rng);
    const Vector theta = random_vector(rng, d.dim_theta);
    const auto& s = d.samples[0];
    const int y = s.truth_label;
    const int k = testing_support::uniform_int(rng, 0, s.num_latents() - 1);
    for (const auto& loss : {LossFunction::zero_one(), LossFunction::overlap()}) {
      const Vector g = grad_expected_loss(theta, s, y, k, loss);
      const Vector n =
          central_difference_ld([&](const LongVector& t) { return ref_expected_loss_ld(t, s, y, k, loss); }, theta, 1e-5);
      EXPECT_LT(relative_error(g, n), 1e-6);
    }
  }
}

TEST(GradSelfDiversity, LatentIndependentLossGivesZero) {
  std::mt19937_64 rng(4);
  const Dataset d = random_dataset(rng);
  const Vector theta = random_vector(rng, d.dim_theta);
  for (const auto& s : d.samples)
    EXPECT_LT(grad_self_diversity(theta, s, LossFunction::zero_one_label_only()).norm(), 1e-15);
}

TEST(GradSelfDiversity, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset d = random_dataset(rng);
    const Vector theta = random_vector(rng, d.dim_theta);
    for (const auto& loss : {LossFunction::zero_one(), LossFunction::overlap()})
      for (const auto& s : d.samples) {
        const Vector g = grad_self_diversity(theta, s, loss);
        const Vector n =
            central_difference_ld([&](const LongVector& t) { return ref_self_diversity_ld(t, s, loss); }, theta, 1e-5);
        EXPECT_LT(relative_error(g, n), 1e-6);
      }
  }
}

TEST(GradSelfDiversity, SwappedEqualLatentsGetEqualComponents) {
  // Latents 0 and 1 share the same phi row; boxes mirrored about x = 5.
  SampleRecord s;
  s.id = "sym";
  s.truth_label = 0;
  s.latent_space = {{0, Box{0, 0, 4, 4}}, {1, Box{6, 0, 10, 4}}, {2, Box{3, 0, 7, 4}}};
  s.psi = Matrix::Zero(6, 1);
  s.phi.resize(3, 2);
  s.phi << 1, 1, 1, 1, 0, 0;
  // With θ = 0 the conditional is uniform; the gradient lies along phi
  // components, which are equal for the swapped coordinates.
  const Vector g = grad_self_diversity(Vector::Zero(2), s, LossFunction::overlap());
  EXPECT_NEAR(g[0], g[1], 1e-15);
}

TEST(GradSlack, ZeroLossGivesZero) {
  std::mt19937_64 rng(6);
  const Dataset d = random_dataset(rng);
  const Vector w = random_vector(rng, d.dim_w), theta = random_vector(rng, d.dim_theta);
  for (const auto& s : d.samples) EXPECT_LT(grad_slack_xi(w, theta, s, kZeroLoss).norm(), 1e-15);
}

TEST(GradSlack, MatchesFiniteDifferencesAwayFromKinks) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Dataset d = random_dataset(rng);
    const Vector w = random_vector(rng, d.dim_w, 0.3), theta = random_vector(rng, d.dim_theta);
    for (const auto& loss : {LossFunction::zero_one(), LossFunction::overlap()})
      for (const auto& s : d.samples) {
        const Vector el = expected_losses(conditional_distribution(theta, s), LossTable(s, loss));
        if (augmented_margin(all_scores(w, s), el) <= 1e-3) continue;
        const Vector g = grad_slack_xi(w, theta, s, loss);
        const Vector n = fd([&](const Vector& t) { return ref_slack(w, t, s, loss); }, theta);
        EXPECT_LT(relative_error(g, n), 1e-6);
        ++checked;
      }
  }
  EXPECT_GT(checked, 100);
}

TEST(GradSlack, DominantScoreSelectsPrediction) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = random_dataset(rng);
    const Vector theta = random_vector(rng, d.dim_theta);
    for (const auto& s : d.samples) {
      const Vector w = 40.0 * random_vector(rng, d.dim_w);
      if (score_gap(w, s) <= 1.0) continue;
      const Prediction p = predict(w, s);
      const Vector expected = grad_expected_loss(theta, s, p.label, p.latent, LossFunction::overlap());
      EXPECT_LT((grad_slack_xi(w, theta, s, LossFunction::overlap()) - expected).norm(), 1e-15);
    }
  }
}

TEST(Ssd, SingleLatentShrinksDeterministically) {
  std::mt19937_64 rng(9);
  InstanceShape shape;
  shape.max_latents = 1;
  const Dataset d = random_dataset(rng, shape);
  const Vector w = random_vector(rng, d.dim_w);
  const Vector theta0 = random_vector(rng, d.dim_theta);
  HyperParams h;
  SSDConfig cfg;
  cfg.T = 7;
  const SSDResult a = ssd_theta(d, w, theta0, LossFunction::overlap(), h, cfg);
  // θ_{t+1} = θ_t (1 - 1/t): the first step already lands on zero.
  EXPECT_EQ(a.theta, Vector::Zero(d.dim_theta));
  cfg.seed = 99;
  EXPECT_EQ(ssd_theta(d, w, theta0, LossFunction::overlap(), h, cfg).theta, a.theta);
}

TEST(Ssd, DeterministicAndTraced) {
  std::mt19937_64 rng(10);
  const Dataset d = random_dataset(rng);
  const Vector w = random_vector(rng, d.dim_w);
  HyperParams h;
  SSDConfig cfg;
  cfg.seed = 5;
  const auto tables = tabulate(d, LossFunction::zero_one());
  const SSDResult a = ssd_theta(d, w, Vector::Zero(d.dim_theta), tables, h, cfg);
  const SSDResult b = ssd_theta(d, w, Vector::Zero(d.dim_theta), tables, h, cfg);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.trace.size(), 51u);  // initial value plus one per n iterations for T = 50 n
  EXPECT_NEAR(a.trace.back(), objective_theta(w, a.theta, d, tables, h), 1e-15);
}

TEST(Ssd, DescendsOnSmallInstance) {
  std::mt19937_64 rng(11);
  InstanceShape shape;
  shape.max_samples = 5;
  shape.max_latents = 4;
  Dataset d = random_dataset(rng, shape);
  const Vector w = random_vector(rng, d.dim_w);
  HyperParams h;
  const auto tables = tabulate(d, LossFunction::overlap());
  int below = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SSDConfig cfg;
    cfg.seed = seed;
    const SSDResult r = ssd_theta(d, w, Vector::Zero(d.dim_theta), tables, h, cfg);
    if (r.trace.back() <= r.trace.front()) ++below;
  }
  EXPECT_GE(below, 95);
}

TEST(Ssd, RejectsBadInput) {
  std::mt19937_64 rng(12);
  const Dataset d = random_dataset(rng);
  HyperParams h;
  h.J = 0;
  EXPECT_THROW(ssd_theta(d, Vector::Zero(d.dim_w), Vector::Zero(d.dim_theta), LossFunction::zero_one(), h, {}),
               ConfigError);
  EXPECT_THROW(ssd_theta(d, Vector::Zero(d.dim_w + 1), Vector::Zero(d.dim_theta), LossFunction::zero_one(),
                         HyperParams{}, {}),
               ConfigError);
}

TEST(GradCheck, HealthyAndCorrupted) {
  std::mt19937_64 rng(13);
  const Dataset d = random_dataset(rng);
  GradCheckOptions opts;
  opts.seed = 3;
  const GradCheckReport ok = run_gradcheck(d, LossFunction::overlap(), opts);
  EXPECT_TRUE(ok.passed(1e-6)) << ok.worst();
  opts.corrupt = true;
  const GradCheckReport bad = run_gradcheck(d, LossFunction::overlap(), opts);
  EXPECT_FALSE(bad.passed(1e-6));
  EXPECT_EQ(bad.terms[0].name, "expected_loss");
  EXPECT_EQ(bad.terms[1].name, "self_diversity");
  EXPECT_EQ(bad.terms[2].name, "slack");
}
