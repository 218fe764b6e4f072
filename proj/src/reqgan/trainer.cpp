#include "reqgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace reqgan::training {

namespace {

std::vector<std::uint64_t> layer_shape(const nn::LayerView& L, bool weight) {
  if (weight) {
    return {L.out, L.in};
  }
  return {L.out};
}

void append_net(std::vector<checkpoint::Tensor>& out, const std::string& prefix,
                const nn::Mlp& net) {
  const auto& p = net.params();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& L = net.layers()[l];
    out.push_back({prefix + ".layer" + std::to_string(l) + ".weight", layer_shape(L, true),
                   {p.begin() + L.weight_offset, p.begin() + L.weight_offset + L.in * L.out}});
    out.push_back({prefix + ".layer" + std::to_string(l) + ".bias", layer_shape(L, false),
                   {p.begin() + L.bias_offset, p.begin() + L.bias_offset + L.out}});
  }
}

const checkpoint::Tensor& require(const checkpoint::Container& c, const std::string& name,
                                  const std::vector<std::uint64_t>& shape) {
  const auto* t = c.find(name);
  if (!t) {
    throw ConfigError("checkpoint is missing tensor " + name);
  }
  if (t->shape != shape) {
    throw ConfigError("checkpoint tensor " + name + " has a shape that does not match the model");
  }
  return *t;
}

void restore_net(const checkpoint::Container& c, const std::string& prefix, nn::Mlp& net) {
  auto& p = net.params();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& L = net.layers()[l];
    const auto& w =
        require(c, prefix + ".layer" + std::to_string(l) + ".weight", layer_shape(L, true));
    const auto& b =
        require(c, prefix + ".layer" + std::to_string(l) + ".bias", layer_shape(L, false));
    std::copy(w.data.begin(), w.data.end(), p.begin() + L.weight_offset);
    std::copy(b.data.begin(), b.data.end(), p.begin() + L.bias_offset);
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string group_name(Group g) {
  switch (g) {
    case Group::Critic:
      return "critic";
    case Group::Encoder:
      return "encoder";
    case Group::Pqc:
      return "pqc";
  }
  return "?";
}

std::string csv_header() {
  return "epoch,wasserstein_estimate,critic_loss,generator_loss,mean_acceptance,"
         "mean_brightness,mean_rms_contrast,generator_steps,critic_steps,aborted_batches,"
         "wall_seconds,pixel_mmd,pixel_frechet";
}

std::string csv_row(const EpochLog& l) {
  return std::to_string(l.epoch) + "," + fmt(l.wasserstein_estimate) + "," +
         fmt(l.critic_loss) + "," + fmt(l.generator_loss) + "," + fmt(l.mean_acceptance) + "," +
         fmt(l.mean_brightness) + "," + fmt(l.mean_rms_contrast) + "," +
         std::to_string(l.generator_steps) + "," + std::to_string(l.critic_steps) + "," +
         std::to_string(l.aborted_batches) + "," + fmt(l.wall_seconds) + "," +
         fmt(l.pixel_mmd) + "," + fmt(l.pixel_frechet);
}

metrics::FeatureSet view_features(const critic::Batch& canvas, const data::ImageLayout& layout) {
  return metrics::feature_map(layout.to_view(canvas), layout.view_side);
}

Trainer::Trainer(config::Config cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  gen_ = Generator(cfg_);
  critic_ = critic::Critic(gen_.image().view_pixels(), cfg_.model.critic_hidden,
                           cfg_.model.leaky_slope);
  Rng init_rng(derive_seed(cfg_.train.seed, 1));
  gen_.init(init_rng);
  critic_.init(init_rng);
  adam_[0] = optim::AdamState(critic_.net().num_params());
  adam_[1] = optim::AdamState(gen_.encoder().net().num_params());
  adam_[2] = optim::AdamState(gen_.angles().size());
  rng_.seed(derive_seed(cfg_.train.seed, 2));
}

double Trainer::learning_rate(Group g) const {
  double lr = g == Group::Critic    ? cfg_.train.lr_critic
              : g == Group::Encoder ? cfg_.train.lr_encoder
                                    : cfg_.train.lr_pqc;
  if (cfg_.train.linear_decay) {
    const double frac = static_cast<double>(epoch_) / static_cast<double>(cfg_.train.epochs);
    lr *= std::max(0.0, 1.0 - frac);
  }
  return lr;
}

void Trainer::step(Group g, std::span<double> params, std::span<const double> grads) {
  const int i = static_cast<int>(g);
  const double lr = learning_rate(g);
  optim::adam_step(params, grads, adam_[i], cfg_.adam(lr));
  auto& a = acct_[i];
  ++a.updates;
  a.min_lr = std::min(a.min_lr, lr);
  a.max_lr = std::max(a.max_lr, lr);
}

std::string Trainer::diagnostics(std::uint64_t batch, std::span<const std::size_t> idx) const {
  std::ostringstream os;
  os << "epoch " << epoch_ + 1 << " batch " << batch << " (train rows";
  for (auto i : idx) {
    os << ' ' << i;
  }
  os << "); parameter norms: critic " << l2_norm(critic_.net().params()) << ", encoder "
     << l2_norm(gen_.encoder().net().params()) << ", pqc " << l2_norm(gen_.angles());
  return os.str();
}

EpochLog Trainer::train_epoch(const data::ImageSource& train) {
  if (train.size() == 0) {
    throw UsageError("train_epoch: empty dataset");
  }
  if (train.images.width != gen_.canvas_pixels()) {
    throw ConfigError("train_epoch: dataset canvas does not match the generator resolution");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto& layout = gen_.image();
  const auto& tc = cfg_.train;
  EpochLog log;
  double sum_w = 0.0, sum_closs = 0.0, sum_gloss = 0.0, sum_acc = 0.0;
  double sum_bright = 0.0, sum_contrast = 0.0;
  std::size_t n_acc = 0, n_img = 0;

  const auto batches = data::batch_indices(train.size(), tc.batch_size, tc.seed, epoch_);
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const auto& idx = batches[bi];
    const auto real = layout.to_view(data::gather(train.images, idx));
    const std::size_t b = idx.size();
    try {
      for (int c = 0; c < tc.n_critic; ++c) {
        std::vector<double> acceptance;
        const auto fake = layout.to_view(gen_.generate(rng_, b, &acceptance));
        auto res = critic::critic_loss(critic_, real, fake, rng_, tc.lambda_gp);
        if (!std::isfinite(res.loss) || !all_finite(res.grad_params)) {
          throw NumericalError("non-finite critic loss at " + diagnostics(bi, idx));
        }
        step(Group::Critic, critic_.net().params(), res.grad_params);
        ++log.critic_steps;
        sum_w += res.wasserstein_estimate;
        sum_closs += res.loss;
        for (double a : acceptance) {
          sum_acc += a;
        }
        n_acc += acceptance.size();
      }

      auto grads = gen_.zero_gradients();
      double gen_loss = 0.0;
      const double inv = 1.0 / static_cast<double>(b);
      for (std::size_t s = 0; s < b; ++s) {
        const auto tape = gen_.sample(rng_, s);
        const auto view = layout.to_view(tape.pixels);
        gen_loss -= critic_.score(view) * inv;
        auto g_view = critic_.input_gradient(view);
        for (double& g : g_view) {
          g *= -inv;
        }
        gen_.backward(tape, layout.from_view(g_view), grads);
        const auto st = metrics::intensity_stats(critic::Batch{1, view.size(), view});
        sum_bright += st.avg_brightness.mean;
        sum_contrast += st.rms_contrast.mean;
        ++n_img;
        sum_acc += tape.circuit.dist.acceptance;
        ++n_acc;
      }
      if (!std::isfinite(gen_loss) || !all_finite(grads.encoder) || !all_finite(grads.angles)) {
        throw NumericalError("non-finite generator loss at " + diagnostics(bi, idx));
      }
      step(Group::Encoder, gen_.encoder().net().params(), grads.encoder);
      step(Group::Pqc, gen_.angles(), grads.angles);
      ++log.generator_steps;
      sum_gloss += gen_loss;
    } catch (const DegeneratePostSelection& e) {
      ++log.aborted_batches;
      std::fprintf(stderr, "reqgan: batch %zu aborted: %s\n", bi, e.what());
    }
  }

  ++epoch_;
  log.epoch = epoch_;
  const auto safe = [](double s, std::size_t n) { return n ? s / static_cast<double>(n) : 0.0; };
  log.wasserstein_estimate = safe(sum_w, log.critic_steps);
  log.critic_loss = safe(sum_closs, log.critic_steps);
  log.generator_loss = safe(sum_gloss, log.generator_steps);
  log.mean_acceptance = safe(sum_acc, n_acc);
  log.mean_brightness = safe(sum_bright, n_img);
  log.mean_rms_contrast = safe(sum_contrast, n_img);
  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

critic::Batch Trainer::generate(std::size_t count, std::uint64_t seed) const {
  Rng rng(seed);
  return gen_.generate(rng, count);
}

EvalReport Trainer::evaluate(const data::ImageSource& test, std::size_t samples,
                             std::uint64_t seed) const {
  const auto& layout = gen_.image();
  const auto fake = generate(samples, seed);
  const auto ff = view_features(fake, layout);
  const auto rf = view_features(test.images, layout);
  EvalReport r;
  r.pixel_mmd = metrics::mmd_poly(ff, rf);
  r.pixel_frechet = metrics::frechet_gaussian(ff, rf);
  r.stats = metrics::intensity_stats(layout.to_view(fake));
  return r;
}

checkpoint::Container Trainer::snapshot() const {
  checkpoint::Container c;
  c.epoch = epoch_;
  c.config_text = cfg_.render();
  std::ostringstream rs;
  rs << rng_;
  c.rng_state = rs.str();
  append_net(c.tensors, "encoder", gen_.encoder().net());
  const auto& layout = gen_.circuit();
  c.tensors.push_back({"circuit.angles",
                       {static_cast<std::uint64_t>(layout.layers),
                        static_cast<std::uint64_t>(layout.num_qubits()),
                        static_cast<std::uint64_t>(layout.rotations)},
                       gen_.angles()});
  append_net(c.tensors, "critic", critic_.net());
  for (Group g : kAllGroups) {
    const auto& st = adam_[static_cast<int>(g)];
    const auto& ac = acct_[static_cast<int>(g)];
    const std::string p = "adam." + group_name(g);
    c.tensors.push_back({p + ".m", {st.m.size()}, st.m});
    c.tensors.push_back({p + ".v", {st.v.size()}, st.v});
    c.tensors.push_back({p + ".step", {1}, {static_cast<double>(st.step)}});
    c.tensors.push_back({"accounting." + group_name(g),
                         {3},
                         {static_cast<double>(ac.updates), ac.min_lr, ac.max_lr}});
  }
  return c;
}

void Trainer::save(const std::filesystem::path& path) const {
  checkpoint::write(path, snapshot());
}

Trainer Trainer::from_snapshot(const checkpoint::Container& c) {
  Trainer t(config::parse(c.config_text));
  t.epoch_ = c.epoch;
  std::istringstream rs(c.rng_state);
  rs >> t.rng_;
  if (!rs) {
    throw ParseError("checkpoint RNG state is malformed");
  }
  restore_net(c, "encoder", t.gen_.encoder().net());
  const auto& layout = t.gen_.circuit();
  t.gen_.angles() = require(c, "circuit.angles",
                            {static_cast<std::uint64_t>(layout.layers),
                             static_cast<std::uint64_t>(layout.num_qubits()),
                             static_cast<std::uint64_t>(layout.rotations)})
                        .data;
  restore_net(c, "critic", t.critic_.net());
  for (Group g : kAllGroups) {
    auto& st = t.adam_[static_cast<int>(g)];
    auto& ac = t.acct_[static_cast<int>(g)];
    const std::string p = "adam." + group_name(g);
    st.m = require(c, p + ".m", {st.m.size()}).data;
    st.v = require(c, p + ".v", {st.v.size()}).data;
    st.step = static_cast<std::uint64_t>(require(c, p + ".step", {1}).data[0]);
    const auto& a = require(c, "accounting." + group_name(g), {3}).data;
    ac.updates = static_cast<std::uint64_t>(a[0]);
    ac.min_lr = a[1];
    ac.max_lr = a[2];
  }
  return t;
}

Trainer Trainer::load(const std::filesystem::path& path) {
  return from_snapshot(checkpoint::read(path));
}

void Trainer::restore(const std::filesystem::path& path) { *this = load(path); }

}  // namespace reqgan::training
