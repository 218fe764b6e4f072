#pragma once

// Adversarial training loop: per real batch, n_critic WGAN-GP critic updates
// followed by one generator update with loss -mean D(G(a)). Three Adam groups
// (critic, encoder, circuit) with their own learning rates.

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "reqgan/checkpoint.hpp"
#include "reqgan/config.hpp"
#include "reqgan/critic.hpp"
#include "reqgan/data.hpp"
#include "reqgan/generator.hpp"
#include "reqgan/metrics.hpp"
#include "reqgan/optim.hpp"

namespace reqgan::training {

enum class Group { Critic = 0, Encoder = 1, Pqc = 2 };
inline constexpr std::array<Group, 3> kAllGroups{Group::Critic, Group::Encoder, Group::Pqc};
std::string group_name(Group g);

// Per-group record of every optimizer step taken.
struct GroupAccounting {
  std::uint64_t updates = 0;
  double min_lr = std::numeric_limits<double>::infinity();
  double max_lr = 0.0;
};

struct EpochLog {
  std::uint64_t epoch = 0;  // 1-based index of the completed epoch
  double wasserstein_estimate = 0.0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double mean_acceptance = 0.0;
  double mean_brightness = 0.0;
  double mean_rms_contrast = 0.0;
  std::uint64_t generator_steps = 0;
  std::uint64_t critic_steps = 0;
  std::uint64_t aborted_batches = 0;
  double wall_seconds = 0.0;
  double pixel_mmd = std::numeric_limits<double>::quiet_NaN();
  double pixel_frechet = std::numeric_limits<double>::quiet_NaN();
};

std::string csv_header();
std::string csv_row(const EpochLog& log);

struct EvalReport {
  double pixel_mmd = 0.0;
  double pixel_frechet = 0.0;
  metrics::IntensityStats stats;
};

class Trainer {
 public:
  explicit Trainer(config::Config cfg);

  const config::Config& config() const { return cfg_; }
  Generator& generator() { return gen_; }
  const Generator& generator() const { return gen_; }
  critic::Critic& critic() { return critic_; }
  const critic::Critic& critic() const { return critic_; }
  std::uint64_t epoch() const { return epoch_; }
  const GroupAccounting& accounting(Group g) const { return acct_[static_cast<int>(g)]; }
  const optim::AdamState& adam_state(Group g) const { return adam_[static_cast<int>(g)]; }
  double learning_rate(Group g) const;

  EpochLog train_epoch(const data::ImageSource& train);

  critic::Batch generate(std::size_t count, std::uint64_t seed) const;
  EvalReport evaluate(const data::ImageSource& test, std::size_t samples,
                      std::uint64_t seed) const;

  checkpoint::Container snapshot() const;
  void save(const std::filesystem::path& path) const;
  static Trainer from_snapshot(const checkpoint::Container& c);
  static Trainer load(const std::filesystem::path& path);
  // Replaces this trainer's state; leaves it untouched if loading fails.
  void restore(const std::filesystem::path& path);

 private:
  void step(Group g, std::span<double> params, std::span<const double> grads);
  std::string diagnostics(std::uint64_t batch, std::span<const std::size_t> idx) const;

  config::Config cfg_;
  Generator gen_;
  critic::Critic critic_;
  std::array<optim::AdamState, 3> adam_;
  std::array<GroupAccounting, 3> acct_;
  Rng rng_;
  std::uint64_t epoch_ = 0;
};

// Pixel features of canvas images as seen through the layout's view.
metrics::FeatureSet view_features(const critic::Batch& canvas, const data::ImageLayout& layout);

}  // namespace reqgan::training
