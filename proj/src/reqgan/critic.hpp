#pragma once

// WGAN-GP critic: a leaky-ReLU MLP scoring images, with the interpolation
// gradient penalty and its exact parameter gradient.

#include <span>
#include <vector>

#include "reqgan/common.hpp"
#include "reqgan/nn.hpp"

namespace reqgan::critic {

inline constexpr double kDefaultLambda = 10.0;

// Row-major batch of images, `width` pixels each.
struct Batch {
  std::size_t count = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  std::span<const double> row(std::size_t i) const {
    return {pixels.data() + i * width, width};
  }
  std::span<double> row(std::size_t i) { return {pixels.data() + i * width, width}; }
};

class Critic {
 public:
  Critic() = default;
  Critic(std::size_t input_width, std::vector<std::size_t> hidden = {256, 64},
         double leaky_slope = 0.2);

  void init(Rng& rng) { net_.init_glorot(rng); }

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }
  std::size_t input_width() const { return net_.input_width(); }

  double score(std::span<const double> image) const;
  std::vector<double> scores(const Batch& images) const;

  // d score / d image.
  std::vector<double> input_gradient(std::span<const double> image) const;

  // lambda * (||grad_x D(x)|| - 1)^2 at one point; accumulates its parameter
  // gradient (scaled by `weight`) into grad_params when non-empty.
  double point_penalty(std::span<const double> x, double lambda, double weight,
                       std::span<double> grad_params) const;

 private:
  // Backpropagation vectors s_l (per layer) for the unit cotangent at the output.
  struct InputGradientTrace {
    std::vector<std::vector<double>> s;      // s[l]: cotangent at layer l output
    std::vector<std::vector<double>> masks;  // activation slopes after hidden layers
    std::vector<double> grad;                // d score / d input
  };
  InputGradientTrace trace(std::span<const double> x) const;

  nn::Mlp net_;
};

double gradient_penalty(const Critic& critic, const Batch& real, const Batch& fake,
                        std::span<const double> eps, double lambda,
                        std::span<double> grad_params = {});

// Per-sample interpolation weights, one U(0,1) draw per image.
std::vector<double> draw_interpolation(Rng& rng, std::size_t count);

struct CriticLossResult {
  double loss = 0.0;
  double penalty = 0.0;
  double wasserstein_estimate = 0.0;  // mean D(real) - mean D(fake)
  std::vector<double> grad_params;
};

// mean D(fake) - mean D(real) + penalty, with parameter gradients.
CriticLossResult critic_loss(const Critic& critic, const Batch& real, const Batch& fake,
                             Rng& rng, double lambda = kDefaultLambda);
CriticLossResult critic_loss(const Critic& critic, const Batch& real, const Batch& fake,
                             std::span<const double> eps, double lambda);

}  // namespace reqgan::critic
