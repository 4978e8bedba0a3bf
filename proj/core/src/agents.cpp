#include "rltest/agents.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rltest/errors.hpp"

namespace rltest {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dqn: return "dqn";
    case Algorithm::a2c: return "a2c";
    case Algorithm::ppo: return "ppo";
    case Algorithm::ddpg: return "ddpg";
  }
  return "dqn";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "dqn") return Algorithm::dqn;
  if (s == "a2c") return Algorithm::a2c;
  if (s == "ppo") return Algorithm::ppo;
  if (s == "ddpg") return Algorithm::ddpg;
  throw ConfigError("unknown algorithm: " + s);
}

// ---------------------------------------------------------------------------
// Replay buffer
// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || batch_size > data_.size())
    throw std::invalid_argument("batch size must be in [1, buffer size]");
  // Floyd's algorithm: a uniform batch_size-subset without replacement.
  std::vector<std::size_t> chosen;
  chosen.reserve(batch_size);
  for (std::size_t i = data_.size() - batch_size; i < data_.size(); ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i) + 1));
    if (std::find(chosen.begin(), chosen.end(), j) != chosen.end())
      chosen.push_back(i);
    else
      chosen.push_back(j);
  }
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  for (std::size_t idx : chosen) out.push_back(&data_[idx]);
  return out;
}

// ---------------------------------------------------------------------------
// DQN
// ---------------------------------------------------------------------------

namespace {

int argmax(const Vec& v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace

int dqn_act(const Mlp& q_net, const Vec& state, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) return rng.uniform_int(q_net.output_size());
  return argmax(q_net.forward(state));
}

double dqn_learn(const std::vector<const Transition*>& batch, Mlp& online, const Mlp& target,
                 double gamma, AdamState& opt) {
  if (batch.empty()) throw std::invalid_argument("dqn_learn requires a non-empty batch");
  Vec grad(online.param_count(), 0.0);
  MlpWorkspace ws;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Transition* t : batch) {
    const Vec q = online.forward(t->state, ws);
    double y = t->reward;
    if (!t->done) {
      const Vec qn = target.forward(t->next_state);
      y += gamma * *std::max_element(qn.begin(), qn.end());
    }
    const double diff = q[t->action] - y;
    loss += diff * diff * inv_n;
    Vec upstream(q.size(), 0.0);
    upstream[t->action] = 2.0 * diff * inv_n;
    online.backward(ws, upstream, grad);
  }
  adam_step(online.params(), grad, opt);
  return loss;
}

// ---------------------------------------------------------------------------
// A2C
// ---------------------------------------------------------------------------

Vec n_step_returns(const std::vector<Transition>& traj, double bootstrap, double gamma) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  Vec returns(traj.size(), 0.0);
  double acc = bootstrap;
  for (int t = static_cast<int>(traj.size()) - 1; t >= 0; --t) {
    if (traj[t].done) acc = 0.0;
    acc = traj[t].reward + gamma * acc;
    returns[t] = acc;
  }
  return returns;
}

A2cStats a2c_step(const std::vector<Transition>& traj, Mlp& actor, Mlp& critic,
                  AdamState& actor_opt, AdamState& critic_opt, double gamma,
                  double entropy_coef, double value_coef) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  const double bootstrap = traj.back().done ? 0.0 : critic.forward(traj.back().next_state)[0];
  const Vec returns = n_step_returns(traj, bootstrap, gamma);

  Vec values(traj.size());
  std::vector<MlpWorkspace> critic_ws(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t)
    values[t] = critic.forward(traj[t].state, critic_ws[t])[0];

  A2cStats stats;
  Vec actor_grad(actor.param_count(), 0.0);
  Vec critic_grad(critic.param_count(), 0.0);
  MlpWorkspace ws;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double advantage = returns[t] - values[t];
    const Vec logits = actor.forward(traj[t].state, ws);
    const Vec lp = log_softmax(logits);
    double entropy = 0.0;
    for (double v : lp) entropy -= std::exp(v) * v;

    Vec dl_dz(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double pi_j = std::exp(lp[j]);
      const double onehot = (static_cast<int>(j) == traj[t].action) ? 1.0 : 0.0;
      // -log pi(a) * A   and   -entropy_coef * H, both through the logits.
      dl_dz[j] = -advantage * (onehot - pi_j) + entropy_coef * pi_j * (lp[j] + entropy);
    }
    actor.backward(ws, dl_dz, actor_grad);

    const Vec dv = {2.0 * value_coef * (values[t] - returns[t])};
    critic.backward(critic_ws[t], dv, critic_grad);

    stats.policy_loss -= lp[traj[t].action] * advantage;
    stats.value_loss += value_coef * (returns[t] - values[t]) * (returns[t] - values[t]);
    stats.entropy += entropy;
  }
  adam_step(actor.params(), actor_grad, actor_opt);
  adam_step(critic.params(), critic_grad, critic_opt);
  return stats;
}

GaussianHead::GaussianHead(double log_std_init, AdamConfig cfg)
    : log_std(log_std_init), opt(1, cfg) {}

double GaussianHead::stddev() const { return std::exp(log_std); }

void GaussianHead::apply_gradient(double grad) {
  Vec p = {log_std};
  const Vec g = {grad};
  adam_step(p, g, opt);
  log_std = p[0];
}

double gaussian_log_prob(double action, double mean, double log_std) {
  const double sigma = std::exp(log_std);
  const double z = (action - mean) / sigma;
  return -0.5 * z * z - log_std - 0.5 * std::log(2.0 * 3.14159265358979323846);
}

A2cStats a2c_step_continuous(const std::vector<Transition>& traj, Mlp& actor_mean,
                             GaussianHead& head, Mlp& critic, AdamState& actor_opt,
                             AdamState& critic_opt, double gamma, double entropy_coef,
                             double value_coef) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  const double bootstrap = traj.back().done ? 0.0 : critic.forward(traj.back().next_state)[0];
  const Vec returns = n_step_returns(traj, bootstrap, gamma);

  A2cStats stats;
  Vec actor_grad(actor_mean.param_count(), 0.0);
  Vec critic_grad(critic.param_count(), 0.0);
  double head_grad = 0.0;
  const double sigma = head.stddev();
  // Gaussian entropy: log sigma + log sqrt(2 pi e); constant across states.
  const double entropy = head.log_std + 0.5 * std::log(2.0 * 3.14159265358979323846 * std::exp(1.0));
  MlpWorkspace ws, cws;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double value = critic.forward(traj[t].state, cws)[0];
    const double advantage = returns[t] - value;
    const double mean = actor_mean.forward(traj[t].state, ws)[0];
    const double z = (traj[t].action_c - mean) / sigma;
    // d(-log pi * A)/d mean = -A * z / sigma
    const Vec up = {-advantage * z / sigma};
    actor_mean.backward(ws, up, actor_grad);
    // d(-log pi * A)/d log_std = -A * (z^2 - 1); entropy bonus adds -coef.
    head_grad += -advantage * (z * z - 1.0) - entropy_coef;

    const Vec dv = {2.0 * value_coef * (value - returns[t])};
    critic.backward(cws, dv, critic_grad);

    stats.policy_loss -= gaussian_log_prob(traj[t].action_c, mean, head.log_std) * advantage;
    stats.value_loss += value_coef * (returns[t] - value) * (returns[t] - value);
    stats.entropy += entropy;
  }
  adam_step(actor_mean.params(), actor_grad, actor_opt);
  head.apply_gradient(head_grad);
  adam_step(critic.params(), critic_grad, critic_opt);
  return stats;
}

// ---------------------------------------------------------------------------
// PPO
// ---------------------------------------------------------------------------

GaeResult gae_advantages(const std::vector<RolloutStep>& steps, double last_value, double gamma,
                         double lambda) {
  if (steps.empty()) throw std::invalid_argument("empty rollout");
  GaeResult r;
  r.advantages.assign(steps.size(), 0.0);
  r.returns.assign(steps.size(), 0.0);
  double gae = 0.0;
  for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
    const double not_done = steps[t].done ? 0.0 : 1.0;
    const double next_value =
        (t + 1 < static_cast<int>(steps.size())) ? steps[t + 1].value : last_value;
    const double delta = steps[t].reward + gamma * not_done * next_value - steps[t].value;
    gae = delta + gamma * lambda * not_done * gae;
    r.advantages[t] = gae;
    r.returns[t] = gae + steps[t].value;
  }
  return r;
}

namespace {

void normalize(Vec& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var) + 1e-8;
  for (double& x : v) x = (x - mean) / sd;
}

}  // namespace

double ppo_surrogate(const Mlp& actor, const std::vector<RolloutStep>& steps,
                     const Vec& advantages, double clip) {
  if (steps.size() != advantages.size())
    throw std::invalid_argument("advantage count must match rollout length");
  double total = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const Vec lp = log_softmax(actor.forward(steps[t].state));
    const double ratio = std::exp(lp[steps[t].action] - steps[t].log_prob);
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    total += std::min(ratio * advantages[t], clipped * advantages[t]);
  }
  return total / static_cast<double>(steps.size());
}

PpoStats ppo_update(const std::vector<RolloutStep>& steps, double last_value, Mlp& actor,
                    Mlp& critic, AdamState& actor_opt, AdamState& critic_opt,
                    const PpoParams& params) {
  if (steps.empty()) throw std::invalid_argument("empty rollout");
  GaeResult gae = gae_advantages(steps, last_value, params.gamma, params.gae_lambda);
  if (params.normalize_advantages) normalize(gae.advantages);

  PpoStats stats;
  const double inv_n = 1.0 / static_cast<double>(steps.size());
  MlpWorkspace ws, cws;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Vec actor_grad(actor.param_count(), 0.0);
    Vec critic_grad(critic.param_count(), 0.0);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const double a_t = gae.advantages[t];
      const Vec logits = actor.forward(steps[t].state, ws);
      const Vec lp = log_softmax(logits);
      const double ratio = std::exp(lp[steps[t].action] - steps[t].log_prob);
      const double unclipped = ratio * a_t;
      const double clipped = std::clamp(ratio, 1.0 - params.clip, 1.0 + params.clip) * a_t;
      double entropy = 0.0;
      for (double v : lp) entropy -= std::exp(v) * v;

      Vec dl_dz(logits.size(), 0.0);
      const bool unclipped_active = unclipped <= clipped;
      for (std::size_t j = 0; j < logits.size(); ++j) {
        const double pi_j = std::exp(lp[j]);
        if (unclipped_active) {
          const double onehot = (static_cast<int>(j) == steps[t].action) ? 1.0 : 0.0;
          dl_dz[j] = -a_t * ratio * (onehot - pi_j) * inv_n;
        }
        // The clipped branch is constant in the parameters: no policy
        // gradient flows through it.
        dl_dz[j] += params.entropy_coef * pi_j * (lp[j] + entropy) * inv_n;
      }
      actor.backward(ws, dl_dz, actor_grad);

      const double value = critic.forward(steps[t].state, cws)[0];
      const Vec dv = {2.0 * params.value_coef * (value - gae.returns[t]) * inv_n};
      critic.backward(cws, dv, critic_grad);

      if (epoch == 0) {
        stats.policy_loss -= std::min(unclipped, clipped) * inv_n;
        stats.value_loss += params.value_coef * (value - gae.returns[t]) * (value - gae.returns[t]) * inv_n;
        stats.entropy += entropy * inv_n;
      }
    }
    adam_step(actor.params(), actor_grad, actor_opt);
    adam_step(critic.params(), critic_grad, critic_opt);
  }
  return stats;
}

PpoStats ppo_update_continuous(const std::vector<RolloutStep>& steps, double last_value,
                               Mlp& actor_mean, GaussianHead& head, Mlp& critic,
                               AdamState& actor_opt, AdamState& critic_opt,
                               const PpoParams& params) {
  if (steps.empty()) throw std::invalid_argument("empty rollout");
  GaeResult gae = gae_advantages(steps, last_value, params.gamma, params.gae_lambda);
  if (params.normalize_advantages) normalize(gae.advantages);

  PpoStats stats;
  const double inv_n = 1.0 / static_cast<double>(steps.size());
  MlpWorkspace ws, cws;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Vec actor_grad(actor_mean.param_count(), 0.0);
    Vec critic_grad(critic.param_count(), 0.0);
    double head_grad = 0.0;
    const double sigma = head.stddev();
    const double entropy =
        head.log_std + 0.5 * std::log(2.0 * 3.14159265358979323846 * std::exp(1.0));
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const double a_t = gae.advantages[t];
      const double mean = actor_mean.forward(steps[t].state, ws)[0];
      const double lp = gaussian_log_prob(steps[t].action_c, mean, head.log_std);
      const double ratio = std::exp(lp - steps[t].log_prob);
      const double unclipped = ratio * a_t;
      const double clipped = std::clamp(ratio, 1.0 - params.clip, 1.0 + params.clip) * a_t;
      const bool unclipped_active = unclipped <= clipped;
      const double z = (steps[t].action_c - mean) / sigma;
      if (unclipped_active) {
        const Vec up = {-a_t * ratio * z / sigma * inv_n};
        actor_mean.backward(ws, up, actor_grad);
        head_grad += -a_t * ratio * (z * z - 1.0) * inv_n;
      }
      head_grad += -params.entropy_coef * inv_n;

      const double value = critic.forward(steps[t].state, cws)[0];
      const Vec dv = {2.0 * params.value_coef * (value - gae.returns[t]) * inv_n};
      critic.backward(cws, dv, critic_grad);

      if (epoch == 0) {
        stats.policy_loss -= std::min(unclipped, clipped) * inv_n;
        stats.value_loss += params.value_coef * (value - gae.returns[t]) * (value - gae.returns[t]) * inv_n;
        stats.entropy += entropy * inv_n;
      }
    }
    adam_step(actor_mean.params(), actor_grad, actor_opt);
    head.apply_gradient(head_grad);
    adam_step(critic.params(), critic_grad, critic_opt);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// DDPG
// ---------------------------------------------------------------------------

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.param_count() != online.param_count())
    throw std::invalid_argument("soft_update: network shapes differ");
  Vec& t = target.params();
  const Vec& o = online.params();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * o[i];
}

DdpgStats ddpg_step(const std::vector<const Transition*>& batch, Mlp& actor, Mlp& critic,
                    Mlp& target_actor, Mlp& target_critic, AdamState& actor_opt,
                    AdamState& critic_opt, double gamma, double tau) {
  if (batch.empty()) throw std::invalid_argument("ddpg_step requires a non-empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const int obs_size = actor.input_size();

  DdpgStats stats;
  MlpWorkspace ws;
  Vec critic_grad(critic.param_count(), 0.0);
  Vec critic_in(static_cast<std::size_t>(obs_size) + 1);
  for (const Transition* t : batch) {
    double y = t->reward;
    if (!t->done) {
      const double next_action = target_actor.forward(t->next_state)[0];
      std::copy(t->next_state.begin(), t->next_state.end(), critic_in.begin());
      critic_in.back() = next_action;
      y += gamma * target_critic.forward(critic_in)[0];
    }
    std::copy(t->state.begin(), t->state.end(), critic_in.begin());
    critic_in.back() = t->action_c;
    const double q = critic.forward(critic_in, ws)[0];
    stats.critic_loss += (q - y) * (q - y) * inv_n;
    const Vec up = {2.0 * (q - y) * inv_n};
    critic.backward(ws, up, critic_grad);
  }
  adam_step(critic.params(), critic_grad, critic_opt);

  // Actor ascends Q(s, mu(s)) through the updated critic's action gradient.
  Vec actor_grad(actor.param_count(), 0.0);
  MlpWorkspace actor_ws;
  for (const Transition* t : batch) {
    const double a = actor.forward(t->state, actor_ws)[0];
    std::copy(t->state.begin(), t->state.end(), critic_in.begin());
    critic_in.back() = a;
    const double q = critic.forward(critic_in, ws)[0];
    stats.actor_value += q * inv_n;
    Vec critic_param_scratch(critic.param_count(), 0.0);
    const Vec up = {-inv_n};  // minimize -Q
    const Vec dq_dinput = critic.backward(ws, up, critic_param_scratch);
    const Vec up_actor = {dq_dinput.back()};
    actor.backward(actor_ws, up_actor, actor_grad);
  }
  adam_step(actor.params(), actor_grad, actor_opt);

  soft_update(target_critic, critic, tau);
  soft_update(target_actor, actor, tau);
  return stats;
}

// ---------------------------------------------------------------------------
// Agent classes
// ---------------------------------------------------------------------------

namespace {

long resolved_anneal_steps(const AgentConfig& c) {
  if (c.anneal_steps > 0) return c.anneal_steps;
  if (c.total_steps_hint > 0) return std::max<long>(1, c.total_steps_hint / 10);
  return 10000;
}

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(out);
  return sizes;
}

class DqnAgent final : public DiscreteAgent {
 public:
  DqnAgent(const AgentConfig& c, int obs_size, int n_actions)
      : cfg_(c),
        online_(layer_sizes(obs_size, c.hidden, n_actions), Activation::identity),
        rng_(c.seed),
        buffer_(static_cast<std::size_t>(c.buffer_capacity)),
        anneal_steps_(resolved_anneal_steps(c)) {
    online_.init_glorot(rng_);
    target_ = online_;
    opt_ = std::make_unique<AdamState>(online_.param_count(), AdamConfig{.lr = c.lr});
  }

  int act(const Vec& obs) override {
    const double eps = exploration_rate();
    if (cfg_.param_noise_sigma > 0.0) {
      if (eps > 0.0 && rng_.uniform() < eps) return rng_.uniform_int(online_.output_size());
      noisy_ = online_;
      for (double& p : noisy_.params()) p += cfg_.param_noise_sigma * rng_.normal();
      return dqn_act(noisy_, obs, 0.0, rng_);
    }
    return dqn_act(online_, obs, eps, rng_);
  }

  int act_greedy(const Vec& obs) override { return dqn_act(online_, obs, 0.0, rng_); }

  void observe(const Transition& t) override {
    buffer_.push(t);
    ++steps_;
    if (steps_ >= cfg_.learn_start && steps_ % cfg_.learn_every == 0 &&
        buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size)) {
      const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
      dqn_learn(batch, online_, target_, cfg_.gamma, *opt_);
      ++learns_;
      if (learns_ % cfg_.target_update_interval == 0) target_ = online_;
    }
  }

  long step_count() const override { return steps_; }

  double exploration_rate() const override {
    const double frac =
        std::min(1.0, static_cast<double>(steps_) / static_cast<double>(anneal_steps_));
    // std::lerp lands exactly on eps_end once the schedule saturates.
    return std::lerp(cfg_.eps_start, cfg_.eps_end, frac);
  }

  void save_policy(std::ostream& out) const override { online_.save(out); }

 private:
  AgentConfig cfg_;
  Mlp online_, target_, noisy_;
  Rng rng_;
  ReplayBuffer buffer_;
  std::unique_ptr<AdamState> opt_;
  long anneal_steps_;
  long steps_ = 0;
  long learns_ = 0;
};

int sample_categorical(const Vec& probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

class A2cAgent final : public DiscreteAgent {
 public:
  A2cAgent(const AgentConfig& c, int obs_size, int n_actions)
      : cfg_(c),
        actor_(layer_sizes(obs_size, c.hidden, n_actions), Activation::identity),
        critic_(layer_sizes(obs_size, c.hidden, 1), Activation::identity),
        rng_(c.seed) {
    actor_.init_glorot(rng_);
    critic_.init_glorot(rng_);
    actor_opt_ = std::make_unique<AdamState>(actor_.param_count(), AdamConfig{.lr = c.lr});
    critic_opt_ = std::make_unique<AdamState>(critic_.param_count(), AdamConfig{.lr = c.lr});
  }

  int act(const Vec& obs) override {
    return sample_categorical(softmax(actor_.forward(obs)), rng_);
  }

  int act_greedy(const Vec& obs) override { return argmax(actor_.forward(obs)); }

  void observe(const Transition& t) override {
    traj_.push_back(t);
    ++steps_;
    if (t.done || static_cast<int>(traj_.size()) >= cfg_.n_step) {
      a2c_step(traj_, actor_, critic_, *actor_opt_, *critic_opt_, cfg_.gamma, cfg_.entropy_coef,
               cfg_.value_coef);
      traj_.clear();
    }
  }

  long step_count() const override { return steps_; }

  void save_policy(std::ostream& out) const override {
    actor_.save(out);
    critic_.save(out);
  }

 private:
  AgentConfig cfg_;
  Mlp actor_, critic_;
  Rng rng_;
  std::unique_ptr<AdamState> actor_opt_, critic_opt_;
  std::vector<Transition> traj_;
  long steps_ = 0;
};

class PpoAgent final : public DiscreteAgent {
 public:
  PpoAgent(const AgentConfig& c, int obs_size, int n_actions)
      : cfg_(c),
        actor_(layer_sizes(obs_size, c.hidden, n_actions), Activation::identity),
        critic_(layer_sizes(obs_size, c.hidden, 1), Activation::identity),
        rng_(c.seed) {
    actor_.init_glorot(rng_);
    critic_.init_glorot(rng_);
    actor_opt_ = std::make_unique<AdamState>(actor_.param_count(), AdamConfig{.lr = c.lr});
    critic_opt_ = std::make_unique<AdamState>(critic_.param_count(), AdamConfig{.lr = c.lr});
  }

  int act(const Vec& obs) override {
    const Vec lp = log_softmax(actor_.forward(obs));
    Vec probs(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) probs[i] = std::exp(lp[i]);
    const int a = sample_categorical(probs, rng_);
    last_log_prob_ = lp[a];
    last_value_ = critic_.forward(obs)[0];
    return a;
  }

  int act_greedy(const Vec& obs) override { return argmax(actor_.forward(obs)); }

  void observe(const Transition& t) override {
    rollout_.push_back(RolloutStep{t.state, t.action, 0.0, last_log_prob_, last_value_, t.reward,
                                   t.done});
    ++steps_;
    if (static_cast<int>(rollout_.size()) >= cfg_.rollout_steps) {
      const double last_value = t.done ? 0.0 : critic_.forward(t.next_state)[0];
      ppo_update(rollout_, last_value, actor_, critic_, *actor_opt_, *critic_opt_, params());
      rollout_.clear();
    }
  }

  long step_count() const override { return steps_; }

  void save_policy(std::ostream& out) const override {
    actor_.save(out);
    critic_.save(out);
  }

 private:
  PpoParams params() const {
    return PpoParams{cfg_.clip_range, cfg_.update_epochs,   cfg_.gamma,
                     cfg_.gae_lambda, cfg_.entropy_coef,    cfg_.value_coef,
                     cfg_.normalize_advantages};
  }

  AgentConfig cfg_;
  Mlp actor_, critic_;
  Rng rng_;
  std::unique_ptr<AdamState> actor_opt_, critic_opt_;
  std::vector<RolloutStep> rollout_;
  double last_log_prob_ = 0.0, last_value_ = 0.0;
  long steps_ = 0;
};

class A2cContinuousAgent final : public ContinuousAgent {
 public:
  A2cContinuousAgent(const AgentConfig& c, int obs_size)
      : cfg_(c),
        actor_(layer_sizes(obs_size, c.hidden, 1), Activation::sigmoid),
        critic_(layer_sizes(obs_size, c.hidden, 1), Activation::identity),
        head_(c.log_std_init, AdamConfig{.lr = c.lr}),
        rng_(c.seed) {
    actor_.init_glorot(rng_);
    critic_.init_glorot(rng_);
    actor_opt_ = std::make_unique<AdamState>(actor_.param_count(), AdamConfig{.lr = c.lr});
    critic_opt_ = std::make_unique<AdamState>(critic_.param_count(), AdamConfig{.lr = c.lr});
  }

  double act(const Vec& obs) override {
    const double mean = actor_.forward(obs)[0];
    last_raw_ = mean + head_.stddev() * rng_.normal();
    return std::clamp(last_raw_, 0.0, 1.0);
  }

  double act_greedy(const Vec& obs) override {
    return std::clamp(actor_.forward(obs)[0], 0.0, 1.0);
  }

  void observe(const Transition& t) override {
    Transition raw = t;
    raw.action_c = last_raw_;  // learn at the unclipped sample
    traj_.push_back(std::move(raw));
    ++steps_;
    if (t.done || static_cast<int>(traj_.size()) >= cfg_.n_step) {
      a2c_step_continuous(traj_, actor_, head_, critic_, *actor_opt_, *critic_opt_, cfg_.gamma,
                          cfg_.entropy_coef, cfg_.value_coef);
      traj_.clear();
    }
  }

  long step_count() const override { return steps_; }

  void save_policy(std::ostream& out) const override {
    actor_.save(out);
    critic_.save(out);
  }

 private:
  AgentConfig cfg_;
  Mlp actor_, critic_;
  GaussianHead head_;
  Rng rng_;
  std::unique_ptr<AdamState> actor_opt_, critic_opt_;
  std::vector<Transition> traj_;
  double last_raw_ = 0.0;
  long steps_ = 0;
};

class PpoContinuousAgent final : public ContinuousAgent {
 public:
  PpoContinuousAgent(const AgentConfig& c, int obs_size)
      : cfg_(c),
        actor_(layer_sizes(obs_size, c.hidden, 1), Activation::sigmoid),
        critic_(layer_sizes(obs_size, c.hidden, 1), Activation::identity),
        head_(c.log_std_init, AdamConfig{.lr = c.lr}),
        rng_(c.seed) {
    actor_.init_glorot(rng_);
    critic_.init_glorot(rng_);
    actor_opt_ = std::make_unique<AdamState>(actor_.param_count(), AdamConfig{.lr = c.lr});
    critic_opt_ = std::make_unique<AdamState>(critic_.param_count(), AdamConfig{.lr = c.lr});
  }

  double act(const Vec& obs) override {
    const double mean = actor_.forward(obs)[0];
    last_raw_ = mean + head_.stddev() * rng_.normal();
    last_log_prob_ = gaussian_log_prob(last_raw_, mean, head_.log_std);
    last_value_ = critic_.forward(obs)[0];
    return std::clamp(last_raw_, 0.0, 1.0);
  }

  double act_greedy(const Vec& obs) override {
    return std::clamp(actor_.forward(obs)[0], 0.0, 1.0);
  }

  void observe(const Transition& t) override {
    rollout_.push_back(
        RolloutStep{t.state, 0, last_raw_, last_log_prob_, last_value_, t.reward, t.done});
    ++steps_;
    if (static_cast<int>(rollout_.size()) >= cfg_.rollout_steps) {
      const double last_value = t.done ? 0.0 : critic_.forward(t.next_state)[0];
      ppo_update_continuous(rollout_, last_value, actor_, head_, critic_, *actor_opt_,
                            *critic_opt_, params());
      rollout_.clear();
    }
  }

  long step_count() const override { return steps_; }

  void save_policy(std::ostream& out) const override {
    actor_.save(out);
    critic_.save(out);
  }

 private:
  PpoParams params() const {
    return PpoParams{cfg_.clip_range, cfg_.update_epochs,   cfg_.gamma,
                     cfg_.gae_lambda, cfg_.entropy_coef,    cfg_.value_coef,
                     cfg_.normalize_advantages};
  }

  AgentConfig cfg_;
  Mlp actor_, critic_;
  GaussianHead head_;
  Rng rng_;
  std::unique_ptr<AdamState> actor_opt_, critic_opt_;
  std::vector<RolloutStep> rollout_;
  double last_raw_ = 0.0, last_log_prob_ = 0.0, last_value_ = 0.0;
  long steps_ = 0;
};

class DdpgAgent final : public ContinuousAgent {
 public:
  DdpgAgent(const AgentConfig& c, int obs_size)
      : cfg_(c),
        actor_(layer_sizes(obs_size, c.hidden, 1), Activation::sigmoid),
        critic_(layer_sizes(obs_size + 1, c.hidden, 1), Activation::identity),
        rng_(c.seed),
        buffer_(static_cast<std::size_t>(c.buffer_capacity)) {
    actor_.init_glorot(rng_);
    critic_.init_glorot(rng_);
    target_actor_ = actor_;
    target_critic_ = critic_;
    actor_opt_ = std::make_unique<AdamState>(actor_.param_count(), AdamConfig{.lr = c.lr});
    critic_opt_ = std::make_unique<AdamState>(critic_.param_count(), AdamConfig{.lr = c.lr});
  }

  double act(const Vec& obs) override {
    const double a = actor_.forward(obs)[0] + cfg_.action_noise_sigma * rng_.normal();
    return std::clamp(a, 0.0, 1.0);
  }

  double act_greedy(const Vec& obs) override {
    return std::clamp(actor_.forward(obs)[0], 0.0, 1.0);
  }

  void observe(const Transition& t) override {
    buffer_.push(t);
    ++steps_;
    if (steps_ >= cfg_.learn_start && steps_ % cfg_.learn_every == 0 &&
        buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size)) {
      const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
      ddpg_step(batch, actor_, critic_, target_actor_, target_critic_, *actor_opt_, *critic_opt_,
                cfg_.gamma, cfg_.tau);
    }
  }

  long step_count() const override { return steps_; }

  void save_policy(std::ostream& out) const override {
    actor_.save(out);
    critic_.save(out);
  }

 private:
  AgentConfig cfg_;
  Mlp actor_, critic_, target_actor_, target_critic_;
  Rng rng_;
  ReplayBuffer buffer_;
  std::unique_ptr<AdamState> actor_opt_, critic_opt_;
  long steps_ = 0;
};

}  // namespace

std::unique_ptr<DiscreteAgent> make_discrete_agent(const AgentConfig& config, int obs_size,
                                                   int n_actions) {
  if (obs_size <= 0 || n_actions <= 0)
    throw std::invalid_argument("agent dimensions must be positive");
  switch (config.algorithm) {
    case Algorithm::dqn: return std::make_unique<DqnAgent>(config, obs_size, n_actions);
    case Algorithm::a2c: return std::make_unique<A2cAgent>(config, obs_size, n_actions);
    case Algorithm::ppo: return std::make_unique<PpoAgent>(config, obs_size, n_actions);
    case Algorithm::ddpg:
      throw ConfigError("ddpg supports only continuous action spaces");
  }
  throw ConfigError("unknown algorithm");
}

std::unique_ptr<ContinuousAgent> make_continuous_agent(const AgentConfig& config, int obs_size) {
  if (obs_size <= 0) throw std::invalid_argument("agent dimensions must be positive");
  switch (config.algorithm) {
    case Algorithm::dqn:
      throw ConfigError("dqn supports only discrete action spaces");
    case Algorithm::a2c: return std::make_unique<A2cContinuousAgent>(config, obs_size);
    case Algorithm::ppo: return std::make_unique<PpoContinuousAgent>(config, obs_size);
    case Algorithm::ddpg: return std::make_unique<DdpgAgent>(config, obs_size);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace rltest
