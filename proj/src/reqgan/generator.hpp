#pragma once

// Generator pipeline: latent a -> encoder -> (z, alpha, beta) -> circuit ->
// post-selected distribution -> calibration (or /max) -> canvas pixels.

#include <span>
#include <vector>

#include "reqgan/calibration.hpp"
#include "reqgan/config.hpp"
#include "reqgan/critic.hpp"
#include "reqgan/data.hpp"
#include "reqgan/encoder.hpp"
#include "reqgan/quantum.hpp"

namespace reqgan::training {

struct SampleTape {
  std::vector<double> latent;
  encoder::EncoderTape enc;
  std::vector<double> z;  // circuit input actually used
  quantum::CircuitTape circuit;
  calibration::CalibrationTape calib;  // empty under the /max mapping
  std::vector<double> pixels;          // canvas
};

struct GeneratorGradients {
  std::vector<double> encoder;
  std::vector<double> angles;
};

class Generator {
 public:
  Generator() = default;
  explicit Generator(const config::Config& cfg);

  // Glorot encoder weights; circuit angles U(0, 2 pi).
  void init(Rng& rng);

  std::size_t canvas_pixels() const { return image_.canvas_pixels(); }
  const data::ImageLayout& image() const { return image_; }
  const quantum::CircuitLayout& circuit() const { return circuit_; }
  const config::Ablation& ablation() const { return ablation_; }
  const calibration::CalibrationConfig& calibration() const { return calibration_; }

  encoder::NoiseEncoder& encoder() { return encoder_; }
  const encoder::NoiseEncoder& encoder() const { return encoder_; }
  std::vector<double>& angles() { return angles_; }
  const std::vector<double>& angles() const { return angles_; }

  // `noise` supplies replacement z draws under the noise ablations.
  SampleTape forward(std::span<const double> latent, Rng& noise) const;

  // Draws a latent sample, redrawing up to max_redraws times on degenerate
  // post-selection.
  SampleTape sample(Rng& rng, std::size_t sample_index) const;

  void backward(const SampleTape& tape, std::span<const double> grad_pixels,
                GeneratorGradients& acc) const;
  GeneratorGradients zero_gradients() const;

  critic::Batch generate(Rng& rng, std::size_t count,
                         std::vector<double>* acceptance = nullptr) const;

 private:
  encoder::NoiseEncoder encoder_;
  quantum::CircuitLayout circuit_;
  std::vector<double> angles_;
  calibration::CalibrationConfig calibration_;
  config::Ablation ablation_;
  data::ImageLayout image_;
  int max_redraws_ = 3;
};

}  // namespace reqgan::training
