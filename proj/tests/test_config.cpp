#include <gtest/gtest.h>

#include "reqgan/config.hpp"

using namespace reqgan;
using namespace reqgan::config;

TEST(Config, DefaultsAreValid) {
  Config c;
  EXPECT_TRUE(c.problems().empty());
  EXPECT_EQ(c.train.batch_size, 5u);
  EXPECT_EQ(c.train.epochs, 50u);
  EXPECT_DOUBLE_EQ(c.train.lr_critic, 2e-4);
  EXPECT_DOUBLE_EQ(c.train.lr_encoder, 2e-4);
  EXPECT_DOUBLE_EQ(c.train.lr_pqc, 1e-2);
  EXPECT_DOUBLE_EQ(c.train.adam_beta1, 0.0);
  EXPECT_DOUBLE_EQ(c.train.adam_beta2, 0.9);
  EXPECT_EQ(c.data.train_count, 1000u);
  EXPECT_EQ(c.data.test_count, 250u);
  EXPECT_EQ(c.model.data_qubits, 10);
}

TEST(Config, ParseSectionsAndComments) {
  const auto c = parse(
      "# run\n[model]\ndata_qubits = 8\nlayers=3  # inline\n\n[train]\nablation = "
      "calib_knockout:deviation\n[data]\nresize = downsample_pow2\ntrain.seed = 9\n");
  EXPECT_EQ(c.model.data_qubits, 8);
  EXPECT_EQ(c.model.layers, 3);
  EXPECT_EQ(c.train.ablation.kind, AblationKind::CalibKnockout);
  EXPECT_EQ(c.train.ablation.stage, calibration::Stage::Deviation);
  EXPECT_FALSE(c.effective_calibration().on(calibration::Stage::Deviation));
  EXPECT_EQ(c.train.seed, 9u);
}

TEST(Config, ErrorsCollectedTogether) {
  try {
    parse("[model]\nlayers = many\nbogus = 1\n[train]\nepochs = -3\nno equals sign\n");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("model.bogus"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 6"), std::string::npos) << msg;
  }
}

TEST(Config, ValidationListsEveryProblem) {
  Config c;
  c.calibration.tau = 0.5;
  c.model.data_qubits = 7;
  c.train.lr_pqc = 0;
  const auto p = c.problems();
  EXPECT_EQ(p.size(), 3u);
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("tau"), std::string::npos);
  }
  c = Config{};
  c.calibration.tau = 0.5;
  c.train.ablation = Ablation::parse("calib_knockout:smoothing");
  EXPECT_TRUE(c.problems().empty());
}

TEST(Config, PadCropNeedsTenQubits) {
  Config c;
  c.model.data_qubits = 8;
  EXPECT_FALSE(c.problems().empty());
  c.data.policy = data::ResizePolicy::DownsamplePow2;
  EXPECT_TRUE(c.problems().empty());
}

TEST(Config, RenderRoundTrip) {
  Config c;
  c.set("model.data_qubits", "8");
  c.set("model.encoder_hidden", "16,8");
  c.set("train.ablation", "noise_gauss");
  c.set("train.lr_pqc", "0.0123456789012345");
  c.set("data.images", "/tmp/some path/images");
  c.set("data.resize", "downsample_pow2");
  c.set("run.eval_every_epoch", "false");
  const auto text = c.render();
  const auto d = parse(text);
  EXPECT_EQ(d.render(), text);
  EXPECT_EQ(d.train.lr_pqc, c.train.lr_pqc);
  EXPECT_EQ(d.model.encoder_hidden, (std::vector<std::size_t>{16, 8}));
  EXPECT_EQ(d.data.images, c.data.images);
  for (const auto& k : Config::keys()) EXPECT_EQ(d.get(k), c.get(k)) << k;
}

TEST(Config, AblationNames) {
  for (const char* s : {"none", "noise_uniform01", "noise_gauss", "map_max",
                        "calib_knockout:smoothing", "calib_knockout:affine"}) {
    EXPECT_EQ(Ablation::parse(s).name(), s);
  }
  EXPECT_THROW(Ablation::parse("dropout"), ConfigError);
  EXPECT_THROW(Ablation::parse("calib_knockout:nothing"), ConfigError);
}

TEST(Config, UnknownKey) {
  Config c;
  EXPECT_THROW(c.set("train.speed", "1"), ConfigError);
  EXPECT_THROW(c.get("nope"), ConfigError);
  EXPECT_THROW(load("/nonexistent/reqgan.cfg"), IoError);
}
