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

#include "pianorl/policy.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

constexpr int kContinuousObs = 13;

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

nn::Mat<double> random_observations(int batch, nn::Rng& rng) {
  std::uniform_real_distribution<double> cont(-1.0, 1.0);
  std::bernoulli_distribution bit(0.1);
  nn::Mat<double> obs(kObservationDim, batch);
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < kObservationDim; ++i) {
      obs(i, b) = i < kContinuousObs ? cont(rng) : (bit(rng) ? 1.0 : 0.0);
    }
  }
  return obs;
}

nn::Mat<double> gaussian(int rows, int cols, nn::Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  nn::Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Picks coordinates to check: every coordinate when max_coords is 0 or
// large enough, otherwise an even share per parameter block.
std::vector<Eigen::Index> pick_coordinates(
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& segments, std::size_t max_coords,
    nn::Rng& rng) {
  std::vector<Eigen::Index> out;
  Eigen::Index total = 0;
  for (const auto& s : segments) total += s.second;
  if (max_coords == 0 || static_cast<std::size_t>(total) <= max_coords) {
    out.resize(static_cast<std::size_t>(total));
    std::iota(out.begin(), out.end(), Eigen::Index{0});
    return out;
  }
  const std::size_t per = std::max<std::size_t>(1, max_coords / segments.size());
  for (const auto& [offset, size] : segments) {
    if (static_cast<std::size_t>(size) <= per) {
      for (Eigen::Index i = 0; i < size; ++i) out.push_back(offset + i);
      continue;
    }
    std::uniform_int_distribution<Eigen::Index> pick(0, size - 1);
    for (std::size_t i = 0; i < per; ++i) out.push_back(offset + pick(rng));
  }
  return out;
}

template <typename LossFn>
GradientCheckResult compare_gradients(nn::Vec<double>& theta, const nn::Vec<double>& analytic,
                                      const std::vector<Eigen::Index>& coords, double step,
                                      LossFn&& loss) {
  GradientCheckResult result;
  for (Eigen::Index i : coords) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double up = loss();
    theta[i] = saved - step;
    const double down = loss();
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    // Gradients below 1e-6 in magnitude are compared absolutely.
    const double denom = std::max(std::abs(a) + std::abs(numeric), 1e-6);
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.coordinates;
  }
  return result;
}

}  // namespace

nn::MlpSpec actor_spec(const NetworkConfig& cfg) {
  return {kObservationDim, cfg.actor_hidden, 2 * kActionDim, 0.0, false};
}

nn::MlpSpec critic_spec(const NetworkConfig& cfg) {
  return {kObservationDim + kActionDim, cfg.critic_hidden, 1, cfg.dropout, cfg.layer_norm};
}

PackedObservation PackedObservation::pack(const Observation& obs) {
  PackedObservation p;
  for (int i = 0; i < kContinuousObs; ++i) p.continuous[static_cast<std::size_t>(i)] = static_cast<float>(obs.data[static_cast<std::size_t>(i)]);
  for (std::size_t i = kContinuousObs; i < Observation::kSize; ++i) {
    if (obs.data[i] != 0.0) {
      const std::size_t bit = i - kContinuousObs;
      p.bits[bit / 64] |= std::uint64_t{1} << (bit % 64);
    }
  }
  return p;
}

// Slider position enters the networks in key widths around the middle of
// its travel; raw metres vary too little for the first layer to resolve one key.
float slider_feature(double slider_m) {
  const double travel = joint_limits().upper[kSliderJoint];
  return static_cast<float>((slider_m - 0.5 * travel) / (2.0 * geometry::kWhiteKeyWidth));
}

void PackedObservation::unpack_into(float* column) const {
  for (int i = 0; i < kContinuousObs; ++i) column[i] = continuous[static_cast<std::size_t>(i)];
  column[Observation::kSliderOffset] = slider_feature(continuous[Observation::kSliderOffset]);
  for (std::size_t i = kContinuousObs; i < Observation::kSize; ++i) {
    const std::size_t bit = i - kContinuousObs;
    column[i] = (bits[bit / 64] >> (bit % 64)) & 1U ? 1.0f : 0.0f;
  }
}

std::uint64_t transition_hash(const Transition& t) {
  std::uint64_t h = fnv1a(t.obs.continuous.data(), sizeof(t.obs.continuous));
  h = fnv1a(t.obs.bits.data(), sizeof(t.obs.bits), h);
  h = fnv1a(t.action.data(), sizeof(t.action), h);
  h = fnv1a(&t.reward, sizeof(t.reward), h);
  h = fnv1a(t.next_obs.continuous.data(), sizeof(t.next_obs.continuous), h);
  h = fnv1a(t.next_obs.bits.data(), sizeof(t.next_obs.bits), h);
  const unsigned char d = t.done ? 1 : 0;
  return fnv1a(&d, 1, h);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw UsageError("replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::add(const Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;
  }
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, nn::Rng& rng) const {
  if (size_ == 0) throw UsageError("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

Batch gather_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  Batch b;
  b.obs.resize(kObservationDim, n);
  b.next_obs.resize(kObservationDim, n);
  b.action.resize(kActionDim, n);
  b.reward.resize(n);
  b.not_done.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Transition& t = buffer.at(indices[static_cast<std::size_t>(c)]);
    t.obs.unpack_into(b.obs.col(c).data());
    t.next_obs.unpack_into(b.next_obs.col(c).data());
    for (int j = 0; j < kActionDim; ++j) b.action(j, c) = t.action[static_cast<std::size_t>(j)];
    b.reward[c] = t.reward;
    b.not_done[c] = t.done ? 0.0f : 1.0f;
  }
  return b;
}

nn::Mat<float> observation_column(const Observation& obs) {
  nn::Mat<float> col(kObservationDim, 1);
  for (std::size_t i = 0; i < Observation::kSize; ++i) col(static_cast<Eigen::Index>(i), 0) = static_cast<float>(obs.data[i]);
  // Same rounding as the replay path.
  col(Observation::kSliderOffset, 0) =
      slider_feature(static_cast<float>(obs.data[Observation::kSliderOffset]));
  return col;
}

Action act(const PolicyNet& net, const Observation& obs, bool deterministic, nn::Rng& rng) {
  if (net.spec.input != kObservationDim || net.spec.output != 2 * kActionDim) {
    throw UsageError("policy network has the wrong shape");
  }
  nn::Mlp<float> mlp(net.spec);
  mlp.parameters() = net.parameters;
  const nn::Mat<float> raw = mlp.predict(observation_column(obs));
  Action a;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < kActionDim; ++j) {
    const double mean = raw(j, 0);
    double u = mean;
    if (!deterministic) {
      const double ls = Actor<float>::kLogStdMin +
                        0.5 * (Actor<float>::kLogStdMax - Actor<float>::kLogStdMin) *
                            (std::tanh(static_cast<double>(raw(j + kActionDim, 0))) + 1.0);
      u += std::exp(ls) * normal(rng);
    }
    if (!std::isfinite(u)) {
      throw NumericalFault("policy produced a non-finite output for action " + std::to_string(j));
    }
    a[static_cast<std::size_t>(j)] = std::tanh(u);
  }
  return a;
}

PolicyNet Checkpoint::policy() const {
  PolicyNet net;
  net.spec = actor;
  net.parameters = Eigen::Map<const nn::Vec<float>>(actor_params.data(),
                                                    static_cast<Eigen::Index>(actor_params.size()));
  return net;
}

GradientCheckResult gradient_check_mlp(const nn::MlpSpec& spec, int batch, std::uint64_t seed,
                                       std::size_t max_coords, double step) {
  nn::Rng rng(seed);
  nn::Mlp<double> net(spec);
  net.initialize(rng);
  const nn::Mat<double> x = gaussian(spec.input, batch, rng);
  const nn::Mat<double> weights = gaussian(spec.output, batch, rng);
  const nn::Rng dropout_rng(seed ^ 0xD50F);
  auto loss = [&] {
    nn::Rng r = dropout_rng;
    return net.forward(x, true, &r).cwiseProduct(weights).sum();
  };
  net.zero_grad();
  {
    nn::Rng r = dropout_rng;
    net.forward(x, true, &r);
    net.backward(weights);
  }
  const nn::Vec<double> analytic = net.gradient();
  const auto coords = pick_coordinates(net.parameter_segments(), max_coords, rng);
  return compare_gradients(net.parameters(), analytic, coords, step, loss);
}

GradientCheckResult gradient_check_actor(const NetworkConfig& cfg, int batch, std::uint64_t seed,
                                         std::size_t max_coords, double step) {
  nn::Rng rng(seed);
  Actor<double> actor(actor_spec(cfg));
  actor.net.initialize(rng);
  std::vector<nn::Mlp<double>> critics;
  for (int i = 0; i < cfg.num_critics; ++i) {
    critics.emplace_back(critic_spec(cfg));
    critics.back().initialize(rng);
  }
  const nn::Mat<double> obs = random_observations(batch, rng);
  const nn::Mat<double> noise = gaussian(kActionDim, batch, rng);
  const double alpha = 0.2;
  const nn::Rng dropout_rng(seed ^ 0xAC7);
  auto loss = [&] {
    nn::Rng r = dropout_rng;
    return actor_loss(actor, critics, obs, noise, alpha, true, &r).loss;
  };
  actor.net.zero_grad();
  loss();
  const nn::Vec<double> analytic = actor.net.gradient();
  const auto coords = pick_coordinates(actor.net.parameter_segments(), max_coords, rng);
  return compare_gradients(actor.net.parameters(), analytic, coords, step, loss);
}

GradientCheckResult gradient_check_critic(const NetworkConfig& cfg, int batch, std::uint64_t seed,
                                          std::size_t max_coords, double step) {
  nn::Rng rng(seed);
  std::vector<nn::Mlp<double>> critics;
  for (int i = 0; i < cfg.num_critics; ++i) {
    critics.emplace_back(critic_spec(cfg));
    critics.back().initialize(rng);
  }
  const nn::Mat<double> obs = random_observations(batch, rng);
  const nn::Mat<double> act = gaussian(kActionDim, batch, rng).array().tanh().matrix();
  const nn::RowVec<double> target = gaussian(1, batch, rng);
  const nn::Rng dropout_rng(seed ^ 0xC817);
  auto loss = [&] {
    nn::Rng r = dropout_rng;
    return critic_loss(critics, obs, act, target, true, &r);
  };
  for (auto& q : critics) q.zero_grad();
  loss();
  // Snapshot first: every loss() call below accumulates into all critics.
  std::vector<nn::Vec<double>> analytic_all;
  for (const auto& q : critics) analytic_all.push_back(q.gradient());
  GradientCheckResult total;
  for (std::size_t i = 0; i < critics.size(); ++i) {
    auto& q = critics[i];
    const nn::Vec<double>& analytic = analytic_all[i];
    const auto coords = pick_coordinates(q.parameter_segments(),
                                         max_coords / static_cast<std::size_t>(cfg.num_critics), rng);
    const auto r = compare_gradients(q.parameters(), analytic, coords, step, loss);
    total.max_relative_error = std::max(total.max_relative_error, r.max_relative_error);
    total.coordinates += r.coordinates;
  }
  return total;
}

}  // namespace pianorl
