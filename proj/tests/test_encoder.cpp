#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "reqgan/encoder.hpp"
#include "reqgan/nn.hpp"

using namespace reqgan;
using namespace reqgan::encoder;

namespace {

void randomize(nn::Mlp& net, Rng& rng, double scale = 1.0) {
  for (auto& p : net.params()) p = uniform(rng, -scale, scale);
}

}  // namespace

TEST(Mlp, GlorotRangeAndZeroBias) {
  nn::Mlp net({4, 32, 6}, nn::Activation::Tanh);
  Rng rng(1);
  net.init_glorot(rng);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& L = net.layers()[l];
    const double lim = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
    for (std::size_t i = 0; i < L.in * L.out; ++i) {
      EXPECT_LE(std::abs(net.params()[L.weight_offset + i]), lim);
    }
    for (std::size_t i = 0; i < L.out; ++i) EXPECT_EQ(net.params()[L.bias_offset + i], 0.0);
  }
}

TEST(Mlp, ForwardMatchesOracle) {
  for (auto act : {nn::Activation::Tanh, nn::Activation::LeakyRelu}) {
    nn::Mlp net({5, 7, 3, 2}, act, 0.2);
    Rng rng(2);
    randomize(net, rng);
    std::vector<double> x{0.1, -0.5, 0.9, 0.3, -0.2};
    const auto got = net.forward(x);
    const auto want = oracle::mlp(net.params(), net.widths(), x,
                                  act == nn::Activation::Tanh ? 1 : 2, 0.2);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(Encoder, ZeroNetwork) {
  NoiseEncoder enc(3);
  std::fill(enc.net().params().begin(), enc.net().params().end(), 0.0);
  const auto out = enc.encode(std::vector<double>{0.2, -0.4, 0.9});
  for (double z : out.z) EXPECT_EQ(z, 0.0);
  EXPECT_DOUBLE_EQ(out.alpha, std::log(2.0) + kDefaultAlphaMin);
  EXPECT_EQ(out.beta, 0.0);
}

TEST(Encoder, MatchesLayerOracle) {
  Rng rng(4);
  NoiseEncoder enc(4);
  randomize(enc.net(), rng);
  for (int t = 0; t < 10; ++t) {
    const auto a = sample_latent(rng, 4);
    const auto out = enc.encode(a);
    const auto raw = oracle::mlp(enc.net().params(), enc.net().widths(), a, 1);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.z[i], std::numbers::pi * std::tanh(raw[i]), 1e-12);
    EXPECT_NEAR(out.alpha, oracle::softplus(raw[4]) + kDefaultAlphaMin, 1e-12);
    EXPECT_NEAR(out.beta, raw[5], 1e-12);
  }
}

TEST(Encoder, BoundedDrive) {
  Rng rng(5);
  NoiseEncoder enc(6);
  randomize(enc.net(), rng, 20.0);
  for (int t = 0; t < 200; ++t) {
    const auto out = enc.encode(sample_latent(rng, 6));
    for (double z : out.z) EXPECT_LE(std::abs(z), std::numbers::pi);
    EXPECT_GE(out.alpha, kDefaultAlphaMin);
  }
}

TEST(Encoder, Deterministic) {
  Rng rng(6);
  NoiseEncoder enc(3);
  enc.init(rng);
  const auto a = sample_latent(rng, 3);
  const auto x = enc.encode(a), y = enc.encode(a);
  EXPECT_EQ(x.z, y.z);
  EXPECT_EQ(x.alpha, y.alpha);
  EXPECT_EQ(x.beta, y.beta);
}

TEST(Encoder, UnconstrainedAlpha) {
  NoiseEncoder enc(2, {4}, kDefaultAlphaMin, false);
  Rng rng(7);
  randomize(enc.net(), rng);
  const auto a = std::vector<double>{0.3, -0.6};
  const auto raw = oracle::mlp(enc.net().params(), enc.net().widths(), a, 1);
  EXPECT_NEAR(enc.encode(a).alpha, raw[2], 1e-12);
}

TEST(Encoder, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    NoiseEncoder enc(3, {5, 4});
    randomize(enc.net(), rng, 0.8);
    const auto a = sample_latent(rng, 3);
    const std::vector<double> cz{0.7, -1.3, 0.4};
    const double ca = 0.9, cb = -0.6;
    auto loss = [&](const std::vector<double>& params, const std::vector<double>& input) {
      NoiseEncoder e = enc;
      e.net().params() = params;
      const auto o = e.encode(input);
      double s = ca * o.alpha + cb * o.beta;
      for (int i = 0; i < 3; ++i) s += cz[i] * o.z[i];
      return s;
    };
    const auto g = enc.backward(enc.forward(a), cz, ca, cb);
    const auto params = enc.net().params();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double fd =
          oracle::central_diff([&](const auto& p) { return loss(p, a); }, params, k);
      EXPECT_LT(oracle::rel_err(g.params[k], fd), 1e-4) << "param " << k;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double fd =
          oracle::central_diff([&](const auto& x) { return loss(params, x); }, a, k);
      EXPECT_LT(oracle::rel_err(g.input[k], fd), 1e-4);
    }
  }
}

TEST(Encoder, SumZGradient) {
  Rng rng(9);
  NoiseEncoder enc(2);
  enc.init(rng);
  const auto a = sample_latent(rng, 2);
  const auto g = enc.backward(enc.forward(a), std::vector<double>{1, 1}, 0, 0);
  const auto params = enc.net().params();
  for (std::size_t k = 0; k < params.size(); k += 7) {
    const double fd = oracle::central_diff(
        [&](const auto& p) {
          NoiseEncoder e = enc;
          e.net().params() = p;
          const auto o = e.encode(a);
          return o.z[0] + o.z[1];
        },
        params, k);
    EXPECT_LT(oracle::rel_err(g.params[k], fd), 1e-5);
  }
}

TEST(Encoder, AlphaBiasGradientAtZero) {
  NoiseEncoder enc(2);
  std::fill(enc.net().params().begin(), enc.net().params().end(), 0.0);
  const auto g = enc.backward(enc.forward(std::vector<double>{0.1, 0.2}),
                              std::vector<double>{0, 0}, 1.0, 0.0);
  const auto& last = enc.net().layers().back();
  EXPECT_DOUBLE_EQ(g.params[last.bias_offset + 2], 0.5);
}

TEST(Encoder, UnusedBetaHead) {
  Rng rng(10);
  NoiseEncoder enc(3);
  enc.init(rng);
  const auto g = enc.backward(enc.forward(sample_latent(rng, 3)), std::vector<double>{1, 2, 3},
                              1.0, 0.0);
  const auto& last = enc.net().layers().back();
  const std::size_t row = 4;  // beta output row
  for (std::size_t c = 0; c < last.in; ++c) {
    EXPECT_EQ(g.params[last.weight_offset + row * last.in + c], 0.0);
  }
  EXPECT_EQ(g.params[last.bias_offset + row], 0.0);
}

TEST(Encoder, BackwardWithoutForward) {
  NoiseEncoder enc(2);
  EXPECT_THROW(enc.backward(EncoderTape{}, std::vector<double>{0, 0}, 0, 0), UsageError);
}

TEST(Latent, RangeMeanDeterminism) {
  Rng a(42), b(42);
  EXPECT_EQ(sample_latent(a, 5), sample_latent(b, 5));
  Rng rng(43);
  std::vector<double> mean(4, 0.0);
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    const auto v = sample_latent(rng, 4);
    for (int i = 0; i < 4; ++i) {
      ASSERT_GT(v[i], -1.0);
      ASSERT_LT(v[i], 1.0);
      mean[i] += v[i];
    }
  }
  for (double m : mean) EXPECT_NEAR(m / n, 0.0, 0.05);
}
