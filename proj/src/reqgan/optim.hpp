#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace reqgan::optim {

struct AdamHyper {
  double lr = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamHyper& hyper);

}  // namespace reqgan::optim
