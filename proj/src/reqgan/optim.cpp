#include "reqgan/optim.hpp"

#include <cmath>

#include "reqgan/common.hpp"

namespace reqgan::optim {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamHyper& h) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw UsageError("adam_step: parameter, gradient and moment shapes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

}  // namespace reqgan::optim
