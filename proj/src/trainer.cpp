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

#include "pianorl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

using nn::Mat;
using nn::RowVec;
using nn::Vec;

Mat<float> gaussian_noise(int rows, Eigen::Index cols, nn::Rng& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  Mat<float> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

bool finite(double v) { return std::isfinite(v); }

std::vector<float> to_std(const Vec<float>& v) { return {v.data(), v.data() + v.size()}; }

class SacLearner {
 public:
  SacLearner(const TrainerConfig& cfg, nn::Rng& rng)
      : cfg_(cfg),
        actor_(actor_spec(cfg.network)),
        log_alpha_(std::log(cfg.init_temperature)),
        target_entropy_(cfg.target_entropy.value_or(-static_cast<double>(kActionDim))) {
    actor_.net.initialize(rng);
    actor_opt_ = nn::Adam<float>(actor_.net.parameters().size(), cfg.learning_rate);
    for (int i = 0; i < cfg.network.num_critics; ++i) {
      critics_.emplace_back(critic_spec(cfg.network));
      critics_.back().initialize(rng);
      targets_.push_back(critics_.back());
      critic_opts_.emplace_back(critics_.back().parameters().size(), cfg.learning_rate);
    }
    alpha_opt_ = nn::Adam<double>(1, cfg.learning_rate);
  }

  double temperature() const { return std::exp(log_alpha_); }

  Action act(const Observation& obs, bool deterministic, nn::Rng& rng) const {
    const Mat<float> raw = actor_.net.predict(observation_column(obs));
    std::normal_distribution<double> normal(0.0, 1.0);
    Action a;
    for (int j = 0; j < kActionDim; ++j) {
      double u = raw(j, 0);
      if (!deterministic) {
        const double ls = Actor<float>::kLogStdMin +
                          0.5 * (Actor<float>::kLogStdMax - Actor<float>::kLogStdMin) *
                              (std::tanh(static_cast<double>(raw(j + kActionDim, 0))) + 1.0);
        u += std::exp(ls) * normal(rng);
      }
      if (!finite(u)) throw NumericalFault("actor produced a non-finite action");
      a[static_cast<std::size_t>(j)] = std::tanh(u);
    }
    return a;
  }

  double update_critics(const Batch& b, nn::Rng& rng) {
    const Eigen::Index n = b.obs.cols();
    const Mat<float> noise = gaussian_noise(kActionDim, n, rng);
    const ActorOutput<float> next = actor_.forward(b.next_obs, &noise);
    const Mat<float> x_next = critic_input(b.next_obs, next.action);
    RowVec<float> target_q = targets_[0].predict(x_next).row(0);
    for (std::size_t i = 1; i < targets_.size(); ++i) {
      target_q = target_q.cwiseMin(targets_[i].predict(x_next).row(0));
    }
    const float alpha = static_cast<float>(temperature());
    const RowVec<float> soft_v = target_q - alpha * next.log_prob;
    const RowVec<float> y =
        b.reward + static_cast<float>(cfg_.discount) * b.not_done.cwiseProduct(soft_v);
    for (auto& q : critics_) q.zero_grad();
    const float loss = critic_loss(critics_, b.obs, b.action, y, true, &rng);
    for (std::size_t i = 0; i < critics_.size(); ++i) {
      critic_opts_[i].step(critics_[i].parameters(), critics_[i].gradient());
      targets_[i].soft_update_from(critics_[i], static_cast<float>(cfg_.target_smoothing));
    }
    return loss;
  }

  double update_actor(const Batch& b, nn::Rng& rng) {
    const Mat<float> noise = gaussian_noise(kActionDim, b.obs.cols(), rng);
    actor_.net.zero_grad();
    const float alpha = static_cast<float>(temperature());
    const ActorLossResult r = actor_loss(actor_, critics_, b.obs, noise, alpha, true, &rng);
    actor_opt_.step(actor_.net.parameters(), actor_.net.gradient());
    if (!cfg_.fixed_temperature) {
      Vec<double> theta(1);
      theta[0] = log_alpha_;
      Vec<double> grad(1);
      grad[0] = -(r.mean_log_prob + target_entropy_);
      alpha_opt_.step(theta, grad);
      log_alpha_ = theta[0];
    }
    return r.loss;
  }

  Checkpoint snapshot(std::uint64_t steps, std::uint64_t hash) const {
    Checkpoint c;
    c.actor = actor_.net.spec();
    c.critic = critics_.front().spec();
    c.actor_params = to_std(actor_.net.parameters());
    for (const auto& q : critics_) c.critic_params.push_back(to_std(q.parameters()));
    for (const auto& q : targets_) c.target_params.push_back(to_std(q.parameters()));
    c.log_alpha = log_alpha_;
    c.train_steps = steps;
    c.config_hash = hash;
    return c;
  }

 private:
  const TrainerConfig& cfg_;
  Actor<float> actor_;
  std::vector<nn::Mlp<float>> critics_;
  std::vector<nn::Mlp<float>> targets_;
  nn::Adam<float> actor_opt_;
  std::vector<nn::Adam<float>> critic_opts_;
  nn::Adam<double> alpha_opt_;
  double log_alpha_;
  double target_entropy_;
};

}  // namespace

std::uint64_t config_hash(const TrainerConfig& cfg, const DRConfig& dr) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int h : cfg.network.actor_hidden) os << h << ',';
  os << '|';
  for (int h : cfg.network.critic_hidden) os << h << ',';
  os << '|' << cfg.network.dropout << '|' << cfg.network.layer_norm << '|'
     << cfg.network.num_critics << '|' << cfg.env.reward.c_energy << '|'
     << cfg.env.reward.tolerance.bound << '|' << cfg.env.reward.tolerance.margin << '|'
     << cfg.env.reward.tolerance.value_at_margin << '|' << cfg.env.reward.binary_target_state
     << '|' << cfg.budget << '|' << static_cast<int>(cfg.budget_unit) << '|' << cfg.warmup << '|'
     << cfg.utd_ratio << '|' << cfg.batch_size << '|' << cfg.replay_capacity << '|'
     << cfg.discount << '|' << cfg.target_smoothing << '|' << cfg.learning_rate << '|'
     << cfg.init_temperature << '|' << cfg.target_entropy.value_or(-kActionDim) << '|'
     << cfg.fixed_temperature << '|' << cfg.eval_interval << '|' << cfg.eval_episodes << '|'
     << cfg.stop_at_eval_f1.value_or(-1.0) << '|' << cfg.seed << '|' << dr.c_dr << '|' << dr.seed << '|' << params_hash(dr.nominal) << '|'
     << dr.spreads.joint_damping << ',' << dr.spreads.joint_stiffness << ','
     << dr.spreads.key_spring << ',' << dr.spreads.press_threshold << ','
     << dr.spreads.friction << ',' << dr.spreads.piano_height << ',' << dr.spreads.hand_start;
  const std::string s = os.str();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_learning_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  out << "step,eval_precision,eval_recall,eval_f1,actor_loss,critic_loss,temperature\n";
  out << std::setprecision(9);
  for (const auto& r : curve) {
    out << r.step << ',' << r.eval.precision << ',' << r.eval.recall << ',' << r.eval.f1 << ','
        << r.actor_loss << ',' << r.critic_loss << ',' << r.temperature << '\n';
  }
}

EpisodeSummary evaluate_policy(const PolicyNet& policy, const SongTimeline& song,
                               const PhysicalParams& params, const EnvConfig& env_cfg,
                               std::ostream* log) {
  nn::Mlp<float> mlp(policy.spec);
  mlp.parameters() = policy.parameters;
  PianoEnv env(song, env_cfg);
  nn::Rng unused(0);
  PolicyNet view = policy;
  return run_episode(
      env, params, [&](const Observation& obs) { return act(view, obs, true, unused); }, log);
}

TrainResult train(const SongTimeline& song, const DRConfig& dr, const TrainerConfig& cfg,
                  const TrainProgressFn& progress) {
  if (cfg.budget_unit == BudgetUnit::kSteps && cfg.budget < cfg.warmup) {
    throw UsageError("training budget (" + std::to_string(cfg.budget) +
                     " steps) is smaller than the warmup (" + std::to_string(cfg.warmup) + ")");
  }
  if (cfg.batch_size <= 0 || cfg.utd_ratio <= 0 || cfg.eval_interval == 0) {
    throw UsageError("batch size, update ratio and eval interval must be positive");
  }
  const std::uint64_t hash = config_hash(cfg, dr);
  nn::Rng rng(cfg.seed);
  SacLearner learner(cfg, rng);
  ReplayBuffer buffer(cfg.replay_capacity);
  PianoEnv env(song, cfg.env);
  TrainResult result;

  auto evaluate = [&]() {
    EpisodeScorer scorer;
    PianoEnv eval_env(song, cfg.env);
    nn::Rng unused(0);
    const PolicyFn policy = [&](const Observation& o) { return learner.act(o, true, unused); };
    EpisodeCounts counts;
    for (int e = 0; e < std::max(1, cfg.eval_episodes); ++e) {
      counts += run_episode(eval_env, dr.nominal, policy).scorer.counts();
    }
    return finalize(counts);
  };

  std::uint64_t episode = 0;
  auto start_episode = [&]() {
    const DRSample s = sample_params(dr, episode);
    result.dr_clamps += static_cast<std::uint64_t>(s.clamped);
    return env.reset(s.params, episode);
  };
  Observation obs = start_episode();
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  double last_actor_loss = 0.0;
  double last_critic_loss = 0.0;
  Checkpoint last_good = learner.snapshot(0, hash);

  auto budget_left = [&](std::uint64_t step) {
    return cfg.budget_unit == BudgetUnit::kSteps ? step < cfg.budget : episode < cfg.budget;
  };

  std::uint64_t step = 0;
  try {
    for (; budget_left(step); ++step) {
      Action a;
      if (step < cfg.warmup) {
        for (auto& v : a) v = uniform(rng);
      } else {
        a = learner.act(obs, false, rng);
      }
      const StepResult r = env.step(a);
      Transition t;
      t.obs = PackedObservation::pack(obs);
      for (std::size_t j = 0; j < a.size(); ++j) t.action[j] = static_cast<float>(a[j]);
      t.reward = static_cast<float>(r.reward.total);
      t.next_obs = PackedObservation::pack(r.fault ? obs : r.observation);
      t.done = r.fault;
      buffer.add(t);
      obs = r.observation;
      if (r.done) {
        ++episode;
        ++result.episodes;
        obs = start_episode();
      }

      if (step + 1 >= cfg.warmup && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        Batch batch;
        for (int u = 0; u < cfg.utd_ratio; ++u) {
          batch = gather_batch(buffer, buffer.sample_indices(static_cast<std::size_t>(cfg.batch_size), rng));
          last_critic_loss = learner.update_critics(batch, rng);
          if (!finite(last_critic_loss)) throw NumericalFault("critic loss is not finite");
        }
        last_actor_loss = learner.update_actor(batch, rng);
        if (!finite(last_actor_loss) || !finite(learner.temperature())) {
          throw NumericalFault("actor loss or temperature is not finite");
        }
      }

      if ((step + 1) % cfg.eval_interval == 0) {
        CurveRow row{step + 1, evaluate(), last_actor_loss, last_critic_loss,
                     learner.temperature()};
        result.curve.push_back(row);
        last_good = learner.snapshot(step + 1, hash);
        if (row.eval.f1 > result.best_eval_f1) {
          result.best_eval_f1 = row.eval.f1;
          result.best = last_good;
        }
        if (progress) progress(row);
        if (cfg.stop_at_eval_f1 && row.eval.f1 >= *cfg.stop_at_eval_f1) {
          ++step;
          break;
        }
      }
    }
    if (result.curve.empty() || result.curve.back().step != step) {
      CurveRow row{step, evaluate(), last_actor_loss, last_critic_loss, learner.temperature()};
      result.curve.push_back(row);
      if (row.eval.f1 > result.best_eval_f1) {
        result.best_eval_f1 = row.eval.f1;
        result.best = learner.snapshot(step, hash);
      }
      if (progress) progress(row);
    }
    result.final = learner.snapshot(step, hash);
  } catch (const NumericalFault& e) {
    result.diverged = true;
    result.message = e.what();
    result.final = last_good;
    if (result.best_eval_f1 < 0.0) result.best = last_good;
  }
  result.env_steps = step;
  return result;
}

CemResult cem_optimize(const SongTimeline& song, const PhysicalParams& params,
                       const CemConfig& cfg, const EnvConfig& env_cfg) {
  if (cfg.elites <= 0 || cfg.elites > cfg.population) {
    throw UsageError("CEM needs 0 < elites <= population");
  }
  if (cfg.hold_steps <= 0) throw UsageError("CEM hold_steps must be positive");
  const std::size_t horizon = song.size();
  const auto hold = static_cast<std::size_t>(cfg.hold_steps);
  const std::size_t knots = (horizon + hold - 1) / hold;
  const auto dim = static_cast<Eigen::Index>(knots * kActionDim);
  Vec<double> mean = Vec<double>::Zero(dim);
  Vec<double> stddev = Vec<double>::Constant(dim, cfg.init_std);
  nn::Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PianoEnv env(song, env_cfg);

  auto rollout = [&](const Vec<double>& flat, std::vector<Action>& actions) {
    actions.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (int j = 0; j < kActionDim; ++j) {
        actions[t][static_cast<std::size_t>(j)] =
            std::clamp(flat[static_cast<Eigen::Index>((t / hold) * kActionDim) + j], -1.0, 1.0);
      }
    }
    std::size_t t = 0;
    return run_episode(env, params, [&](const Observation&) { return actions[t++]; });
  };

  CemResult best;
  best.total_reward = -std::numeric_limits<double>::infinity();
  std::vector<Vec<double>> samples(static_cast<std::size_t>(cfg.population));
  std::vector<double> returns(samples.size());
  std::vector<Action> actions;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = mean;
      for (Eigen::Index d = 0; d < dim; ++d) samples[i][d] += stddev[d] * normal(rng);
      const EpisodeSummary s = rollout(samples[i], actions);
      returns[i] = s.total_reward;
      if (s.total_reward > best.total_reward) {
        best.total_reward = s.total_reward;
        best.actions = actions;
        best.scores = s.scorer.scores();
      }
    }
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + cfg.elites, order.end(),
                      [&](std::size_t a, std::size_t b) { return returns[a] > returns[b]; });
    Vec<double> new_mean = Vec<double>::Zero(dim);
    for (int e = 0; e < cfg.elites; ++e) new_mean += samples[order[static_cast<std::size_t>(e)]];
    new_mean /= cfg.elites;
    Vec<double> var = Vec<double>::Zero(dim);
    for (int e = 0; e < cfg.elites; ++e) {
      var += (samples[order[static_cast<std::size_t>(e)]] - new_mean).cwiseAbs2();
    }
    var /= cfg.elites;
    mean = new_mean;
    stddev = var.cwiseSqrt().cwiseMax(cfg.min_std);
  }
  return best;
}

}  // namespace pianorl
