#include "reqgan/generator.hpp"

#include <numbers>

namespace reqgan::training {

Generator::Generator(const config::Config& cfg)
    : encoder_(cfg.model.data_qubits, cfg.model.encoder_hidden, cfg.model.alpha_min,
               cfg.model.positive_alpha),
      circuit_(quantum::CircuitLayout::linear_chain(cfg.model.data_qubits, cfg.model.layers,
                                                    cfg.model.rotations)),
      angles_(circuit_.num_angles(), 0.0),
      calibration_(cfg.effective_calibration()),
      ablation_(cfg.train.ablation),
      image_(data::ImageLayout::for_policy(cfg.model.data_qubits, cfg.data.policy)),
      max_redraws_(cfg.train.max_redraws) {}

void Generator::init(Rng& rng) {
  encoder_.init(rng);
  for (double& w : angles_) {
    w = 2.0 * std::numbers::pi * uniform01(rng);
  }
}

SampleTape Generator::forward(std::span<const double> latent, Rng& noise) const {
  SampleTape t;
  t.latent.assign(latent.begin(), latent.end());
  t.enc = encoder_.forward(latent);
  switch (ablation_.kind) {
    case config::AblationKind::NoiseUniform01:
      t.z.resize(latent.size());
      for (double& v : t.z) {
        v = uniform01(noise);
      }
      break;
    case config::AblationKind::NoiseGauss:
      t.z.resize(latent.size());
      for (double& v : t.z) {
        v = standard_normal(noise);
      }
      break;
    default:
      t.z = t.enc.out.z;
      break;
  }
  t.circuit = quantum::forward(t.z, circuit_, angles_);
  if (ablation_.kind == config::AblationKind::MapMax) {
    t.pixels = calibration::max_normalize(t.circuit.dist.probs);
  } else {
    t.calib = calibration::calibrate_tape(t.circuit.dist.probs, t.enc.out.alpha,
                                          t.enc.out.beta, calibration_);
    t.pixels = t.calib.pixels;
  }
  return t;
}

SampleTape Generator::sample(Rng& rng, std::size_t sample_index) const {
  for (int attempt = 0;; ++attempt) {
    const auto a = encoder::sample_latent(rng, encoder_.latent_dim());
    try {
      return forward(a, rng);
    } catch (const DegeneratePostSelection& e) {
      if (attempt >= max_redraws_) {
        throw DegeneratePostSelection("sample " + std::to_string(sample_index) + ": " +
                                      e.what() + " after " + std::to_string(attempt + 1) +
                                      " draws");
      }
    }
  }
}

GeneratorGradients Generator::zero_gradients() const {
  return {std::vector<double>(encoder_.net().num_params(), 0.0),
          std::vector<double>(angles_.size(), 0.0)};
}

void Generator::backward(const SampleTape& t, std::span<const double> grad_pixels,
                         GeneratorGradients& acc) const {
  std::vector<double> grad_probs;
  double grad_alpha = 0.0;
  double grad_beta = 0.0;
  if (ablation_.kind == config::AblationKind::MapMax) {
    grad_probs = calibration::max_normalize_backward(t.circuit.dist.probs, grad_pixels);
  } else {
    auto g = calibration::backward(t.calib, grad_pixels);
    grad_probs = std::move(g.probs);
    grad_alpha = g.alpha;
    grad_beta = g.beta;
  }
  const auto qg = quantum::backward(t.circuit, circuit_, grad_probs);
  for (std::size_t i = 0; i < qg.angles.size(); ++i) {
    acc.angles[i] += qg.angles[i];
  }
  // Replaced noise carries no gradient back into the z head.
  std::vector<double> grad_z =
      ablation_.replaces_noise() ? std::vector<double>(qg.z.size(), 0.0) : qg.z;
  const auto eg = encoder_.backward(t.enc, grad_z, grad_alpha, grad_beta);
  for (std::size_t i = 0; i < eg.params.size(); ++i) {
    acc.encoder[i] += eg.params[i];
  }
}

critic::Batch Generator::generate(Rng& rng, std::size_t count,
                                  std::vector<double>* acceptance) const {
  critic::Batch out;
  out.count = count;
  out.width = canvas_pixels();
  out.pixels.reserve(count * out.width);
  for (std::size_t i = 0; i < count; ++i) {
    const auto t = sample(rng, i);
    out.pixels.insert(out.pixels.end(), t.pixels.begin(), t.pixels.end());
    if (acceptance) {
      acceptance->push_back(t.circuit.dist.acceptance);
    }
  }
  return out;
}

}  // namespace reqgan::training
