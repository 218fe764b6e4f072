#pragma once

// Neural noise encoder: latent a ~ U(-1,1)^D -> (z, alpha, beta).
//   z     = pi * tanh(head_z)
//   alpha = softplus(head_alpha) + alpha_min   (or the raw head when unconstrained)
//   beta  = head_beta

#include <span>
#include <vector>

#include "reqgan/common.hpp"
#include "reqgan/nn.hpp"

namespace reqgan::encoder {

inline constexpr double kDefaultAlphaMin = 1e-3;

struct EncoderOutput {
  std::vector<double> z;
  double alpha = 0.0;
  double beta = 0.0;
};

struct EncoderTape {
  nn::MlpTape net;
  EncoderOutput out;
  bool valid = false;
};

struct EncoderGradients {
  std::vector<double> params;
  std::vector<double> input;
};

class NoiseEncoder {
 public:
  NoiseEncoder() = default;
  NoiseEncoder(int latent_dim, std::vector<std::size_t> hidden = {32, 32},
               double alpha_min = kDefaultAlphaMin, bool positive_alpha = true);

  void init(Rng& rng) { net_.init_glorot(rng); }

  int latent_dim() const { return latent_dim_; }
  double alpha_min() const { return alpha_min_; }
  bool positive_alpha() const { return positive_alpha_; }
  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

  EncoderOutput encode(std::span<const double> a) const { return forward(a).out; }
  EncoderTape forward(std::span<const double> a) const;
  EncoderGradients backward(const EncoderTape& tape, std::span<const double> grad_z,
                            double grad_alpha, double grad_beta) const;

 private:
  int latent_dim_ = 0;
  double alpha_min_ = kDefaultAlphaMin;
  bool positive_alpha_ = true;
  nn::Mlp net_;
};

// Latent sample with i.i.d. entries strictly inside (-1, 1).
std::vector<double> sample_latent(Rng& rng, int dim);

}  // namespace reqgan::encoder
