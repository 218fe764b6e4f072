#pragma once

// Small fully connected network with a flat parameter vector, explicit
// forward tapes and a reverse pass. Layout per layer: weight (out x in,
// row-major) followed by bias (out).

#include <span>
#include <string>
#include <vector>

#include "reqgan/common.hpp"

namespace reqgan::nn {

enum class Activation { Tanh, LeakyRelu };

struct LayerView {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

struct MlpTape {
  // inputs[l] is the input to layer l; pre[l] its pre-activation.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  std::vector<double> output;
  bool valid = false;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> widths, Activation hidden, double leaky_slope = 0.2);

  // Glorot-uniform weights, zero biases.
  void init_glorot(Rng& rng);

  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  const std::vector<LayerView>& layers() const { return layers_; }
  Activation hidden_activation() const { return hidden_; }
  double leaky_slope() const { return slope_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  double weight(std::size_t layer, std::size_t row, std::size_t col) const {
    const auto& L = layers_[layer];
    return params_[L.weight_offset + row * L.in + col];
  }

  std::vector<double> forward(std::span<const double> x) const;
  MlpTape forward_tape(std::span<const double> x) const;

  // Accumulates parameter gradients into grad_params (size num_params) and
  // returns the gradient with respect to the input.
  std::vector<double> backward(const MlpTape& tape, std::span<const double> grad_out,
                               std::span<double> grad_params) const;

  double activate(double x) const;
  double activate_derivative(double pre) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<LayerView> layers_;
  std::vector<double> params_;
  Activation hidden_ = Activation::Tanh;
  double slope_ = 0.2;
};

}  // namespace reqgan::nn
