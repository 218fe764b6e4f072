#include "reqgan/nn.hpp"

#include <cmath>

namespace reqgan::nn {

Mlp::Mlp(std::vector<std::size_t> widths, Activation hidden, double leaky_slope)
    : widths_(std::move(widths)), hidden_(hidden), slope_(leaky_slope) {
  if (widths_.size() < 2) {
    throw ConfigError("network needs at least an input and an output width");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] == 0 || widths_[l + 1] == 0) {
      throw ConfigError("network layer widths must be positive");
    }
    LayerView v;
    v.in = widths_[l];
    v.out = widths_[l + 1];
    v.weight_offset = offset;
    offset += v.in * v.out;
    v.bias_offset = offset;
    offset += v.out;
    layers_.push_back(v);
  }
  params_.assign(offset, 0.0);
}

void Mlp::init_glorot(Rng& rng) {
  for (const auto& L : layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
    for (std::size_t i = 0; i < L.in * L.out; ++i) {
      params_[L.weight_offset + i] = uniform(rng, -bound, bound);
    }
    for (std::size_t i = 0; i < L.out; ++i) {
      params_[L.bias_offset + i] = 0.0;
    }
  }
}

double Mlp::activate(double x) const {
  if (hidden_ == Activation::Tanh) {
    return std::tanh(x);
  }
  return x > 0 ? x : slope_ * x;
}

double Mlp::activate_derivative(double pre) const {
  if (hidden_ == Activation::Tanh) {
    const double t = std::tanh(pre);
    return 1.0 - t * t;
  }
  return pre > 0 ? 1.0 : slope_;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  return forward_tape(x).output;
}

MlpTape Mlp::forward_tape(std::span<const double> x) const {
  if (x.size() != input_width()) {
    throw ConfigError("network input has width " + std::to_string(x.size()) + ", expected " +
                      std::to_string(input_width()));
  }
  MlpTape tape;
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    std::vector<double> pre(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = &params_[L.weight_offset + o * L.in];
      double acc = params_[L.bias_offset + o];
      for (std::size_t i = 0; i < L.in; ++i) {
        acc += w[i] * cur[i];
      }
      pre[o] = acc;
    }
    tape.inputs.push_back(std::move(cur));
    cur = pre;
    if (l + 1 < layers_.size()) {
      for (double& v : cur) {
        v = activate(v);
      }
    }
    tape.pre.push_back(std::move(pre));
  }
  tape.output = std::move(cur);
  tape.valid = true;
  return tape;
}

std::vector<double> Mlp::backward(const MlpTape& tape, std::span<const double> grad_out,
                                  std::span<double> grad_params) const {
  if (!tape.valid) {
    throw UsageError("network backward called without a forward tape");
  }
  if (grad_out.size() != output_width() || grad_params.size() != params_.size()) {
    throw UsageError("network backward: gradient buffer shape mismatch");
  }
  std::vector<double> delta(grad_out.begin(), grad_out.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    if (l + 1 < layers_.size()) {
      for (std::size_t o = 0; o < L.out; ++o) {
        delta[o] *= activate_derivative(tape.pre[l][o]);
      }
    }
    const auto& in = tape.inputs[l];
    std::vector<double> next(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double d = delta[o];
      double* gw = &grad_params[L.weight_offset + o * L.in];
      const double* w = &params_[L.weight_offset + o * L.in];
      for (std::size_t i = 0; i < L.in; ++i) {
        gw[i] += d * in[i];
        next[i] += d * w[i];
      }
      grad_params[L.bias_offset + o] += d;
    }
    delta = std::move(next);
  }
  return delta;
}

}  // namespace reqgan::nn
