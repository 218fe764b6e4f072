#pragma once

// Run configuration: every knob that defines a run, with a flat sectioned
// key = value text format.
//
//   # comment
//   [train]
//   epochs = 50
//
// Keys are addressed as "section.key". Unknown keys and malformed values are
// collected and reported together.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reqgan/calibration.hpp"
#include "reqgan/data.hpp"
#include "reqgan/optim.hpp"

namespace reqgan::config {

enum class AblationKind { None, NoiseUniform01, NoiseGauss, MapMax, CalibKnockout };

struct Ablation {
  AblationKind kind = AblationKind::None;
  calibration::Stage stage = calibration::Stage::Smoothing;  // CalibKnockout only

  std::string name() const;
  static Ablation parse(const std::string& text);
  bool replaces_noise() const {
    return kind == AblationKind::NoiseUniform01 || kind == AblationKind::NoiseGauss;
  }
  bool operator==(const Ablation&) const = default;
};

struct ModelConfig {
  int data_qubits = 10;
  int layers = 6;
  int rotations = 2;
  std::vector<std::size_t> encoder_hidden{32, 32};
  double alpha_min = 1e-3;
  bool positive_alpha = true;
  std::vector<std::size_t> critic_hidden{256, 64};
  double leaky_slope = 0.2;
};

struct TrainConfig {
  std::uint64_t epochs = 50;
  std::size_t batch_size = 5;
  double lr_critic = 2e-4;
  double lr_encoder = 2e-4;
  double lr_pqc = 1e-2;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  double adam_eps = 1e-8;
  int n_critic = 5;
  double lambda_gp = 10.0;
  std::uint64_t seed = 0;
  Ablation ablation;
  bool linear_decay = false;
  int max_redraws = 3;
};

struct DataConfig {
  std::filesystem::path images;
  std::filesystem::path labels;
  int class_filter = 0;
  std::size_t train_count = 1000;
  std::size_t test_count = 250;
  data::ResizePolicy policy = data::ResizePolicy::PadCrop;
};

struct RunOptions {
  std::filesystem::path out = "runs/default";
  std::uint64_t montage_every = 5;
  std::size_t eval_samples = 250;
  std::uint64_t eval_seed = 12345;
  bool eval_every_epoch = true;
  std::string image_format = "pgm";
};

struct Config {
  ModelConfig model;
  TrainConfig train;
  calibration::CalibrationConfig calibration;
  DataConfig data;
  RunOptions run;

  // Calibration flags after applying a knockout ablation.
  calibration::CalibrationConfig effective_calibration() const;
  data::DatasetSpec dataset_spec() const;
  optim::AdamHyper adam(double lr) const;

  // Sets "section.key"; throws ConfigError on unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  // Every violated constraint, empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;

  // Canonical text form; parse(render()) reproduces the config exactly.
  std::string render() const;
};

// Applies the text on top of `base`. Collects every error before throwing.
Config parse(const std::string& text, Config base = {});
Config load(const std::filesystem::path& path, Config base = {});

// Human-readable list joined by newlines.
std::string join_problems(const std::vector<std::string>& problems);

}  // namespace reqgan::config
