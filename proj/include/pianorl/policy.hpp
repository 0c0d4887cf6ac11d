// Copyright 2026 The pianorl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIANORL_POLICY_HPP_
#define PIANORL_POLICY_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pianorl/env.hpp"
#include "pianorl/nn.hpp"

namespace pianorl {

inline constexpr int kObservationDim = static_cast<int>(Observation::kSize);

struct NetworkConfig {
  std::vector<int> actor_hidden = {256, 256, 256};
  std::vector<int> critic_hidden = {256, 256, 256};
  double dropout = 0.01;
  bool layer_norm = true;
  int num_critics = 2;
};

nn::MlpSpec actor_spec(const NetworkConfig& cfg);
nn::MlpSpec critic_spec(const NetworkConfig& cfg);

// Squashed-gaussian actor. The network emits 13 means and 13 unconstrained
// log-std values, which are squashed into [kLogStdMin, kLogStdMax].
template <typename S>
struct ActorOutput {
  nn::Mat<S> raw;
  nn::Mat<S> log_std;
  nn::Mat<S> std;
  nn::Mat<S> noise;
  nn::Mat<S> pre_tanh;
  nn::Mat<S> action;
  nn::RowVec<S> log_prob;
};

template <typename S>
class Actor {
 public:
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  Actor() = default;
  explicit Actor(nn::MlpSpec spec) : net(std::move(spec)) {}

  // noise == nullptr gives the deterministic action tanh(mean).
  ActorOutput<S> forward(const nn::Mat<S>& obs, const nn::Mat<S>* noise) {
    ActorOutput<S> out;
    out.raw = net.forward(obs);
    const Eigen::Index b = obs.cols();
    const auto mean = out.raw.topRows(kActionDim);
    const auto ls_raw = out.raw.bottomRows(kActionDim);
    const S half_range = static_cast<S>(0.5 * (kLogStdMax - kLogStdMin));
    out.log_std = (S(kLogStdMin) + half_range * (ls_raw.array().tanh() + S(1))).matrix();
    out.std = out.log_std.array().exp().matrix();
    out.noise = noise != nullptr ? *noise : nn::Mat<S>::Zero(kActionDim, b);
    out.pre_tanh = mean + out.std.cwiseProduct(out.noise);
    out.action = out.pre_tanh.array().tanh().matrix();
    // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
    nn::Mat<S> log_jac(kActionDim, b);
    for (Eigen::Index i = 0; i < log_jac.size(); ++i) {
      const S x = -S(2) * out.pre_tanh.data()[i];
      const S sp = x > S(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      log_jac.data()[i] = S(2) * (S(std::numbers::ln2) - out.pre_tanh.data()[i] - sp);
    }
    const S log_norm = static_cast<S>(0.5 * std::log(2.0 * std::numbers::pi));
    out.log_prob = (-S(0.5) * out.noise.array().square() - out.log_std.array() - log_norm -
                    log_jac.array())
                       .matrix()
                       .colwise()
                       .sum();
    return out;
  }

  // Accumulates parameter gradients given dL/daction (13 x B) and
  // dL/dlog_prob (1 x B) for the output of the most recent forward().
  void backward(const ActorOutput<S>& out, const nn::Mat<S>& grad_action,
                const nn::RowVec<S>& grad_log_prob) {
    const auto a = out.action.array();
    nn::Mat<S> g_u = (grad_action.array() * (S(1) - a.square())).matrix();
    // d log_prob / du = 2 tanh(u)
    g_u += (S(2) * a).matrix() * grad_log_prob.asDiagonal();
    nn::Mat<S> g_ls = g_u.cwiseProduct(out.std).cwiseProduct(out.noise);
    g_ls.rowwise() -= grad_log_prob;
    const S half_range = static_cast<S>(0.5 * (kLogStdMax - kLogStdMin));
    const auto t = out.raw.bottomRows(kActionDim).array().tanh();
    nn::Mat<S> g_raw(2 * kActionDim, out.raw.cols());
    g_raw.topRows(kActionDim) = g_u;
    g_raw.bottomRows(kActionDim) = (g_ls.array() * half_range * (S(1) - t.square())).matrix();
    net.backward(g_raw);
  }

  nn::Mlp<S> net;
};

// Q(s, a) ensemble input: observation rows followed by action rows.
template <typename S>
nn::Mat<S> critic_input(const nn::Mat<S>& obs, const nn::Mat<S>& act) {
  nn::Mat<S> x(obs.rows() + act.rows(), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.bottomRows(act.rows()) = act;
  return x;
}

// Sum over critics of mean squared TD error. Accumulates critic gradients.
template <typename S>
S critic_loss(std::vector<nn::Mlp<S>>& critics, const nn::Mat<S>& obs, const nn::Mat<S>& act,
              const nn::RowVec<S>& target, bool train, nn::Rng* rng) {
  const nn::Mat<S> x = critic_input(obs, act);
  const S inv_b = S(1) / static_cast<S>(obs.cols());
  S loss = 0;
  for (auto& q : critics) {
    const nn::Mat<S> pred = q.forward(x, train, rng);
    const nn::RowVec<S> err = pred.row(0) - target;
    loss += err.squaredNorm() * inv_b;
    q.backward(nn::Mat<S>(S(2) * inv_b * err));
  }
  return loss;
}

struct ActorLossResult {
  double loss = 0.0;
  double mean_log_prob = 0.0;
};

// mean(alpha * log_prob - mean_i Q_i(s, a)), a reparameterized through the
// given noise. Accumulates actor gradients only.
template <typename S>
ActorLossResult actor_loss(Actor<S>& actor, std::vector<nn::Mlp<S>>& critics,
                           const nn::Mat<S>& obs, const nn::Mat<S>& noise, S alpha, bool train,
                           nn::Rng* rng) {
  const ActorOutput<S> out = actor.forward(obs, &noise);
  const nn::Mat<S> x = critic_input(obs, out.action);
  const Eigen::Index b = obs.cols();
  const S inv_b = S(1) / static_cast<S>(b);
  const S inv_n = S(1) / static_cast<S>(critics.size());
  nn::RowVec<S> q_mean = nn::RowVec<S>::Zero(b);
  nn::Mat<S> grad_action = nn::Mat<S>::Zero(kActionDim, b);
  for (auto& q : critics) {
    q_mean += inv_n * q.forward(x, train, rng).row(0);
    const nn::Mat<S> g_in = q.backward(nn::Mat<S>::Constant(1, b, -inv_b * inv_n), false);
    grad_action += g_in.bottomRows(kActionDim);
  }
  ActorLossResult result;
  result.loss = static_cast<double>((alpha * out.log_prob - q_mean).sum() * inv_b);
  result.mean_log_prob = static_cast<double>(out.log_prob.mean());
  actor.backward(out, grad_action, nn::RowVec<S>::Constant(b, alpha * inv_b));
  return result;
}

// Packed observation: 13 continuous values plus 343 key bits.
struct PackedObservation {
  std::array<float, 13> continuous{};
  std::array<std::uint64_t, 6> bits{};

  static PackedObservation pack(const Observation& obs);
  void unpack_into(float* column) const;
  friend bool operator==(const PackedObservation&, const PackedObservation&) = default;
};

struct Transition {
  PackedObservation obs;
  std::array<float, kActionDim> action{};
  float reward = 0.0f;
  PackedObservation next_obs;
  // True only for real terminations (integration faults). The end of a song
  // is a time limit and still bootstraps.
  bool done = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

std::uint64_t transition_hash(const Transition& t);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }
  // Uniform indices with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch, nn::Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

struct Batch {
  nn::Mat<float> obs;
  nn::Mat<float> action;
  nn::RowVec<float> reward;
  nn::Mat<float> next_obs;
  nn::RowVec<float> not_done;
};

Batch gather_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices);

// Network input scaling of the slider reading (metres in, key widths out).
float slider_feature(double slider_m);

nn::Mat<float> observation_column(const Observation& obs);

// Deployable policy: the actor network only.
struct PolicyNet {
  nn::MlpSpec spec;
  nn::Vec<float> parameters;
};

// Stochastic actions sample the squashed gaussian with rng; deterministic
// actions are tanh(mean). Throws NumericalFault on non-finite outputs.
Action act(const PolicyNet& net, const Observation& obs, bool deterministic, nn::Rng& rng);

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::uint32_t version = kVersion;
  nn::MlpSpec actor;
  nn::MlpSpec critic;
  std::vector<float> actor_params;
  std::vector<std::vector<float>> critic_params;
  std::vector<std::vector<float>> target_params;
  double log_alpha = 0.0;
  std::uint64_t train_steps = 0;
  std::uint64_t config_hash = 0;

  PolicyNet policy() const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
// Throws VersionError on a foreign version tag and ChecksumError on a
// corrupt or truncated payload.
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Central-difference check of analytic gradients. Coordinates are sampled
// when the network has more than `max_coords` parameters.
struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

GradientCheckResult gradient_check_mlp(const nn::MlpSpec& spec, int batch, std::uint64_t seed,
                                       std::size_t max_coords = 0, double step = 1e-5);
GradientCheckResult gradient_check_actor(const NetworkConfig& cfg, int batch, std::uint64_t seed,
                                         std::size_t max_coords = 0, double step = 1e-5);
GradientCheckResult gradient_check_critic(const NetworkConfig& cfg, int batch, std::uint64_t seed,
                                          std::size_t max_coords = 0, double step = 1e-5);

}  // namespace pianorl

#endif  // PIANORL_POLICY_HPP_
