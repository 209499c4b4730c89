#include <cmath>

#include <gtest/gtest.h>

#include "phnhvi/error.hpp"
#include "phnhvi/network.hpp"
#include "test_util.hpp"

namespace phnhvi::network {
namespace {

using numerics::Activation;
using numerics::Rng;
using phnhvi::testing::rel_err;

TEST(InitHypernet, OutputWidths) {
  Rng rng(1);
  EXPECT_EQ(init_hypernet(TargetSpec::raw_vector(1), 2, rng).spec.output_dim, 1u);
  EXPECT_EQ(init_hypernet(TargetSpec::raw_vector(100), 2, rng).spec.output_dim, 100u);
  const auto target = MlpSpec::make(21, {256, 256, 256, 256}, 7, Activation::kRelu);
  const auto hn = init_hypernet(TargetSpec::mlp_target(target), 7, rng);
  EXPECT_EQ(hn.spec.output_dim, 21u * 256 + 256 + 3 * (256 * 256 + 256) + 256 * 7 + 7);
  EXPECT_EQ(hn.spec.input_dim, 7u);
  EXPECT_EQ(hn.spec.hidden_dims, (std::vector<std::size_t>{100, 100}));
}

TEST(InitHypernet, DeterministicUnderSeed) {
  Rng a(5);
  Rng b(5);
  const auto ha = init_hypernet(TargetSpec::raw_vector(10), 3, a);
  const auto hb = init_hypernet(TargetSpec::raw_vector(10), 3, b);
  EXPECT_TRUE(std::equal(ha.params.values().begin(), ha.params.values().end(),
                         hb.params.values().begin()));
}

TEST(GenerateTarget, EvalModeIsPure) {
  Rng rng(2);
  const auto hn = init_hypernet(TargetSpec::raw_vector(4), 2, rng);
  const std::vector<double> r{0.3, 0.7};
  Rng r1(10);
  Rng r2(20);
  EXPECT_EQ(generate_target(hn, r, r1, false).weights.theta,
            generate_target(hn, r, r2, false).weights.theta);
  EXPECT_EQ(predict_theta(hn, r), generate_target(hn, r, r1, false).weights.theta);
}

TEST(GenerateTarget, SigmoidSquashInUnitInterval) {
  Rng rng(3);
  HypernetOptions opt;
  const auto hn = init_hypernet(TargetSpec::raw_vector(10, Squash::kSigmoid), 3, rng, opt);
  for (int t = 0; t < 50; ++t) {
    const auto r = numerics::sample_dirichlet(std::vector<double>{1, 1, 1}, rng);
    for (double v : predict_theta(hn, r)) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(GenerateTarget, WrongRayLength) {
  Rng rng(4);
  const auto hn = init_hypernet(TargetSpec::raw_vector(2), 2, rng);
  EXPECT_THROW(generate_target(hn, {0.2, 0.3, 0.5}, rng, false), DimensionError);
}

TEST(BackpropToPhi, ZeroUpstreamGivesZero) {
  Rng rng(5);
  const auto hn = init_hypernet(TargetSpec::raw_vector(3), 2, rng);
  const auto g = generate_target(hn, {0.5, 0.5}, rng, true);
  for (double v : backprop_to_phi(hn, g.tape, std::vector<double>(3, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(BackpropToPhi, SigmoidFactorAtHalf) {
  // All-zero phi makes theta' = 0 and theta = 0.5; the output bias gradient is
  // then exactly the upstream gradient times sigma'(0) = 1/4.
  Rng rng(6);
  auto hn = init_hypernet(TargetSpec::raw_vector(2, Squash::kSigmoid), 2, rng);
  for (double& v : hn.params.mutable_values()) v = 0.0;
  const auto g = generate_target(hn, {0.5, 0.5}, rng, true);
  EXPECT_EQ(g.weights.theta, (std::vector<double>{0.5, 0.5}));
  const auto grad = backprop_to_phi(hn, g.tape, std::vector<double>{1.0, -2.0});
  const auto& bias = hn.params.entry("layer2.bias");
  EXPECT_DOUBLE_EQ(grad[bias.offset], 0.25);
  EXPECT_DOUBLE_EQ(grad[bias.offset + 1], -0.5);
}

void check_phi_fd(const TargetSpec& target, std::size_t nobj, std::uint64_t seed) {
  Rng rng(seed);
  HypernetOptions opt;
  opt.hidden = {12, 9};
  opt.activation = Activation::kTanh;
  const auto hn = init_hypernet(target, nobj, rng, opt);
  const auto r = numerics::sample_dirichlet(std::vector<double>(nobj, 1.0), rng);
  const auto gen = generate_target(hn, r, rng, true);
  std::vector<double> up(target.parameter_count());
  for (double& v : up) v = rng.normal();
  const auto grad = backprop_to_phi(hn, gen.tape, up);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = rng.below(hn.params.size());
    HypernetParams plus = hn;
    HypernetParams minus = hn;
    plus.params.mutable_values()[k] += h;
    minus.params.mutable_values()[k] -= h;
    const double fd =
        (numerics::dot(up, predict_theta(plus, r)) - numerics::dot(up, predict_theta(minus, r))) /
        (2 * h);
    if (std::abs(fd) < 1e-7 && std::abs(grad[k]) < 1e-7) continue;
    EXPECT_LE(rel_err(fd, grad[k]), 1e-5) << "coordinate " << k;
  }
}

TEST(BackpropToPhi, MatchesFiniteDifferences) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    check_phi_fd(TargetSpec::raw_vector(5), 2, s);
    check_phi_fd(TargetSpec::raw_vector(10, Squash::kSigmoid), 3, s);
    check_phi_fd(TargetSpec::mlp_target(MlpSpec::make(3, {4}, 2, Activation::kRelu)), 2, s);
  }
}

TEST(BackpropToPhi, AccumulationIsLinear) {
  Rng rng(7);
  const auto hn = init_hypernet(TargetSpec::raw_vector(4), 2, rng);
  const auto a = generate_target(hn, {0.1, 0.9}, rng, true);
  const auto b = generate_target(hn, {0.8, 0.2}, rng, true);
  const std::vector<double> ua{1, 2, 3, 4};
  const std::vector<double> ub{-1, 0.5, 0, 2};
  std::vector<double> acc(hn.params.size(), 0.0);
  backprop_to_phi_into(hn, a.tape, ua, acc);
  backprop_to_phi_into(hn, b.tape, ub, acc);
  const auto ga = backprop_to_phi(hn, a.tape, ua);
  const auto gb = backprop_to_phi(hn, b.tape, ub);
  for (std::size_t k = 0; k < acc.size(); ++k) EXPECT_NEAR(acc[k], ga[k] + gb[k], 1e-12);
}

TEST(BackpropToPhi, StaleTape) {
  Rng rng(8);
  auto hn = init_hypernet(TargetSpec::raw_vector(2), 2, rng);
  const auto g = generate_target(hn, {0.5, 0.5}, rng, true);
  hn.params.mutable_values()[0] += 0.1;
  EXPECT_THROW(backprop_to_phi(hn, g.tape, std::vector<double>{1, 1}), StaleTapeError);
}

TEST(Flatten, RoundTrip) {
  const auto spec = TargetSpec::mlp_target(MlpSpec::make(3, {5, 4}, 2, Activation::kRelu));
  std::vector<double> theta(spec.parameter_count());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 0.01 * static_cast<double>(i);
  const auto p = unflatten(spec, theta);
  EXPECT_EQ(p.entry("layer1.weight").shape, (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(flatten(p), theta);
  EXPECT_THROW(unflatten(spec, std::vector<double>(3)), DimensionError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = phnhvi::testing::scratch_dir();
  Rng rng(9);
  const auto hn = init_hypernet(TargetSpec::raw_vector(10, Squash::kSigmoid), 3, rng);
  Checkpoint ck{hn, R"({"note":"x"})"};
  save_checkpoint(dir / "ck.json", ck);
  const auto back = load_checkpoint(dir / "ck.json");
  EXPECT_EQ(back.hypernet.spec, hn.spec);
  EXPECT_EQ(back.hypernet.target, hn.target);
  EXPECT_EQ(back.hypernet.objectives, 3u);
  EXPECT_EQ(back.hypernet.params.layout(), hn.params.layout());
  ASSERT_EQ(back.hypernet.params.size(), hn.params.size());
  for (std::size_t k = 0; k < hn.params.size(); ++k) {
    ASSERT_EQ(back.hypernet.params.values()[k], hn.params.values()[k]);
  }
  EXPECT_EQ(checkpoint_to_json(back), checkpoint_to_json(ck));
}

TEST(Checkpoint, RejectsCorruptAndMissing) {
  const auto dir = phnhvi::testing::scratch_dir();
  EXPECT_THROW(load_checkpoint(dir / "absent.json"), IoError);
  EXPECT_THROW(checkpoint_from_json("{not json"), IoError);
  Rng rng(10);
  const auto hn = init_hypernet(TargetSpec::raw_vector(2), 2, rng);
  auto text = checkpoint_to_json({hn, "{}"});
  const std::string key = "\"schema_version\":1";
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, key.size(), "\"schema_version\":99");
  EXPECT_THROW(checkpoint_from_json(text), IoError);
}

}  // namespace
}  // namespace phnhvi::network
