#include "reqgan/encoder.hpp"

#include <cmath>
#include <numbers>

namespace reqgan::encoder {

namespace {

std::vector<std::size_t> widths_for(int latent_dim, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> w{static_cast<std::size_t>(latent_dim)};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(static_cast<std::size_t>(latent_dim) + 2);
  return w;
}

}  // namespace

NoiseEncoder::NoiseEncoder(int latent_dim, std::vector<std::size_t> hidden, double alpha_min,
                           bool positive_alpha)
    : latent_dim_(latent_dim), alpha_min_(alpha_min), positive_alpha_(positive_alpha) {
  if (latent_dim < 1) {
    throw ConfigError("encoder latent dimension must be at least 1");
  }
  if (positive_alpha && !(alpha_min > 0)) {
    throw ConfigError("alpha_min must be positive");
  }
  net_ = nn::Mlp(widths_for(latent_dim, hidden), nn::Activation::Tanh);
}

EncoderTape NoiseEncoder::forward(std::span<const double> a) const {
  if (a.size() != static_cast<std::size_t>(latent_dim_)) {
    throw ConfigError("encoder input has width " + std::to_string(a.size()) + ", expected " +
                      std::to_string(latent_dim_));
  }
  EncoderTape tape;
  tape.net = net_.forward_tape(a);
  const auto& raw = tape.net.output;
  tape.out.z.resize(latent_dim_);
  for (int i = 0; i < latent_dim_; ++i) {
    tape.out.z[i] = std::numbers::pi * std::tanh(raw[i]);
  }
  const double head_alpha = raw[latent_dim_];
  tape.out.alpha = positive_alpha_ ? softplus(head_alpha) + alpha_min_ : head_alpha;
  tape.out.beta = raw[latent_dim_ + 1];
  tape.valid = true;
  return tape;
}

EncoderGradients NoiseEncoder::backward(const EncoderTape& tape, std::span<const double> grad_z,
                                        double grad_alpha, double grad_beta) const {
  if (!tape.valid) {
    throw UsageError("encoder backward called without a forward pass");
  }
  if (grad_z.size() != static_cast<std::size_t>(latent_dim_)) {
    throw UsageError("encoder backward: z gradient has the wrong length");
  }
  const auto& raw = tape.net.output;
  std::vector<double> grad_raw(raw.size());
  for (int i = 0; i < latent_dim_; ++i) {
    const double t = std::tanh(raw[i]);
    grad_raw[i] = grad_z[i] * std::numbers::pi * (1.0 - t * t);
  }
  grad_raw[latent_dim_] = positive_alpha_ ? grad_alpha * sigmoid(raw[latent_dim_]) : grad_alpha;
  grad_raw[latent_dim_ + 1] = grad_beta;

  EncoderGradients g;
  g.params.assign(net_.num_params(), 0.0);
  g.input = net_.backward(tape.net, grad_raw, g.params);
  return g;
}

std::vector<double> sample_latent(Rng& rng, int dim) {
  std::vector<double> a(dim);
  for (double& v : a) {
    v = 2.0 * uniform_open01(rng) - 1.0;
  }
  return a;
}

}  // namespace reqgan::encoder
