#include "reqgan/critic.hpp"

#include <cmath>

namespace reqgan::critic {

namespace {

std::vector<std::size_t> widths_for(std::size_t in, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(1);
  return w;
}

void check_pair(const Critic& c, const Batch& real, const Batch& fake) {
  if (real.count != fake.count) {
    throw UsageError("critic: real and fake batches differ in size");
  }
  if (real.count == 0) {
    throw UsageError("critic: empty batch");
  }
  if (real.width != c.input_width() || fake.width != c.input_width()) {
    throw ConfigError("critic: image width does not match critic input width");
  }
}

}  // namespace

Critic::Critic(std::size_t input_width, std::vector<std::size_t> hidden, double leaky_slope)
    : net_(widths_for(input_width, hidden), nn::Activation::LeakyRelu, leaky_slope) {}

double Critic::score(std::span<const double> image) const {
  if (image.size() != input_width()) {
    throw ConfigError("critic: image width " + std::to_string(image.size()) +
                      " does not match critic input width " + std::to_string(input_width()));
  }
  return net_.forward(image)[0];
}

std::vector<double> Critic::scores(const Batch& images) const {
  std::vector<double> out(images.count);
  for (std::size_t i = 0; i < images.count; ++i) {
    out[i] = score(images.row(i));
  }
  return out;
}

Critic::InputGradientTrace Critic::trace(std::span<const double> x) const {
  const auto tape = net_.forward_tape(x);
  const auto& layers = net_.layers();
  const std::size_t depth = layers.size();
  InputGradientTrace tr;
  tr.masks.resize(depth);
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    tr.masks[l].resize(layers[l].out);
    for (std::size_t o = 0; o < layers[l].out; ++o) {
      tr.masks[l][o] = net_.activate_derivative(tape.pre[l][o]);
    }
  }
  // s[depth-1] = 1 at the scalar output; t_l = W_l^T s_l; s_{l-1} = mask ⊙ t_l.
  tr.s.resize(depth);
  tr.s[depth - 1] = {1.0};
  for (std::size_t l = depth; l-- > 0;) {
    const auto& L = layers[l];
    std::vector<double> t(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double so = tr.s[l][o];
      for (std::size_t i = 0; i < L.in; ++i) {
        t[i] += net_.weight(l, o, i) * so;
      }
    }
    if (l == 0) {
      tr.grad = std::move(t);
    } else {
      for (std::size_t i = 0; i < L.in; ++i) {
        t[i] *= tr.masks[l - 1][i];
      }
      tr.s[l - 1] = std::move(t);
    }
  }
  return tr;
}

std::vector<double> Critic::input_gradient(std::span<const double> image) const {
  return trace(image).grad;
}

double Critic::point_penalty(std::span<const double> x, double lambda, double weight,
                             std::span<double> grad_params) const {
  const auto tr = trace(x);
  const double norm = l2_norm(tr.grad);
  const double gap = norm - 1.0;
  if (grad_params.empty() || norm == 0.0) {
    // At a zero input gradient the direction is undefined; the subgradient 0 is used.
    return lambda * gap * gap;
  }
  // c = dP/dg; the slopes are piecewise constant so only weights carry gradient.
  const double scale = weight * 2.0 * lambda * gap / norm;
  std::vector<double> c(tr.grad.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = scale * tr.grad[i];
  }
  const auto& layers = net_.layers();
  const auto& params = net_.params();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<double> ds(L.out, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double so = tr.s[l][o];
      double* gw = &grad_params[L.weight_offset + o * L.in];
      const double* w = &params[L.weight_offset + o * L.in];
      double acc = 0.0;
      for (std::size_t i = 0; i < L.in; ++i) {
        gw[i] += so * c[i];
        acc += w[i] * c[i];
      }
      ds[o] = acc;
    }
    if (l + 1 < layers.size()) {
      for (std::size_t o = 0; o < L.out; ++o) {
        ds[o] *= tr.masks[l][o];
      }
      c = std::move(ds);
    }
  }
  return lambda * gap * gap;
}

double gradient_penalty(const Critic& critic, const Batch& real, const Batch& fake,
                        std::span<const double> eps, double lambda,
                        std::span<double> grad_params) {
  check_pair(critic, real, fake);
  if (eps.size() != real.count) {
    throw UsageError("gradient_penalty: one interpolation weight per sample required");
  }
  const double inv = 1.0 / static_cast<double>(real.count);
  std::vector<double> mixed(real.width);
  double total = 0.0;
  for (std::size_t b = 0; b < real.count; ++b) {
    const auto r = real.row(b);
    const auto f = fake.row(b);
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      mixed[i] = eps[b] * r[i] + (1.0 - eps[b]) * f[i];
    }
    total += critic.point_penalty(mixed, lambda, inv, grad_params);
  }
  return total * inv;
}

std::vector<double> draw_interpolation(Rng& rng, std::size_t count) {
  std::vector<double> eps(count);
  for (double& e : eps) {
    e = uniform01(rng);
  }
  return eps;
}

CriticLossResult critic_loss(const Critic& critic, const Batch& real, const Batch& fake,
                             Rng& rng, double lambda) {
  const auto eps = draw_interpolation(rng, real.count);
  return critic_loss(critic, real, fake, eps, lambda);
}

CriticLossResult critic_loss(const Critic& critic, const Batch& real, const Batch& fake,
                             std::span<const double> eps, double lambda) {
  check_pair(critic, real, fake);
  const auto& net = critic.net();
  CriticLossResult res;
  res.grad_params.assign(net.num_params(), 0.0);
  const double inv = 1.0 / static_cast<double>(real.count);
  double mean_real = 0.0;
  double mean_fake = 0.0;
  const double up_real[] = {-inv};
  const double up_fake[] = {inv};
  for (std::size_t b = 0; b < real.count; ++b) {
    const auto tr = net.forward_tape(real.row(b));
    mean_real += tr.output[0] * inv;
    net.backward(tr, up_real, res.grad_params);
    const auto tf = net.forward_tape(fake.row(b));
    mean_fake += tf.output[0] * inv;
    net.backward(tf, up_fake, res.grad_params);
  }
  res.penalty = gradient_penalty(critic, real, fake, eps, lambda, res.grad_params);
  res.wasserstein_estimate = mean_real - mean_fake;
  res.loss = mean_fake - mean_real + res.penalty;
  return res;
}

}  // namespace reqgan::critic
