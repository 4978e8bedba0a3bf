#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "rltest/neural.hpp"
#include "rltest/rng.hpp"

namespace rltest {

enum class Algorithm { dqn, a2c, ppo, ddpg };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// One environment interaction. Discrete actions use `action`; continuous
// (scalar) actions use `action_c`.
struct Transition {
  Vec state;
  int action = 0;
  double action_c = 0.0;
  double reward = 0.0;
  Vec next_state;
  bool done = false;
};

// Fixed-capacity FIFO transition store. Once full, the oldest transition is
// evicted. Batches are sampled uniformly without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_[i]; }

  // batch_size distinct transitions chosen uniformly; batch_size must not
  // exceed size().
  std::vector<const Transition*> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // slot that the next push overwrites once full
  std::vector<Transition> data_;
};

// Shared hyperparameter set for all algorithms. Fields not used by an
// algorithm are ignored by it.
struct AgentConfig {
  Algorithm algorithm = Algorithm::dqn;
  std::uint64_t seed = 1;
  double gamma = 0.99;
  double lr = 2.5e-4;
  std::vector<int> hidden = {256, 128, 128};

  // DQN
  int buffer_capacity = 50000;
  int batch_size = 32;
  double eps_start = 1.0;
  double eps_end = 0.05;
  long anneal_steps = 0;       // 0: resolve to total_steps_hint / 10
  long total_steps_hint = 0;   // planned training steps, for schedule defaults
  int target_update_interval = 1000;  // learn calls between hard target copies
  int learn_every = 4;                // environment steps between updates
  int learn_start = 1000;             // steps before the first update
  double param_noise_sigma = 0.0;     // > 0: Gaussian parameter-space noise

  // A2C
  int n_step = 5;
  double entropy_coef = 0.01;
  double value_coef = 0.5;

  // PPO
  double clip_range = 0.2;
  int update_epochs = 4;
  double gae_lambda = 0.95;
  int rollout_steps = 2048;
  bool normalize_advantages = true;

  // DDPG / continuous policies
  double tau = 0.005;
  double action_noise_sigma = 0.1;
  double log_std_init = -1.0;
};

// ---------------------------------------------------------------------------
// Core algorithm operations. The agent classes below orchestrate schedules
// and buffers around these.
// ---------------------------------------------------------------------------

// Epsilon-greedy action from a Q-network: uniform with probability epsilon,
// otherwise argmax (ties resolved to the lowest action index).
int dqn_act(const Mlp& q_net, const Vec& state, double epsilon, Rng& rng);

// One TD(0) update of the online network toward
// r + gamma * (1 - done) * max_a' Q_target(s', a'), mean-squared-error over
// the batch, one Adam step. Returns the batch loss.
double dqn_learn(const std::vector<const Transition*>& batch, Mlp& online, const Mlp& target,
                 double gamma, AdamState& opt);

// Discounted n-step returns for a trajectory; the tail is bootstrapped with
// `bootstrap` unless the transition at the tail is terminal.
Vec n_step_returns(const std::vector<Transition>& traj, double bootstrap, double gamma);

struct A2cStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// One advantage actor-critic update over a short trajectory (discrete
// policy): policy loss -sum_t log pi(a_t|s_t) * A_t - entropy_coef * sum_t H,
// value loss value_coef * sum_t (R_t - V(s_t))^2, one Adam step per network.
A2cStats a2c_step(const std::vector<Transition>& traj, Mlp& actor, Mlp& critic,
                  AdamState& actor_opt, AdamState& critic_opt, double gamma,
                  double entropy_coef, double value_coef);

// State-independent learnable log standard deviation of a Gaussian policy.
struct GaussianHead {
  double log_std;
  AdamState opt;

  explicit GaussianHead(double log_std_init, AdamConfig cfg = {});
  double stddev() const;
  void apply_gradient(double grad);
};

double gaussian_log_prob(double action, double mean, double log_std);

// Continuous-action variant: actions in trajectory `action_c` are the raw
// (unclipped) Gaussian samples.
A2cStats a2c_step_continuous(const std::vector<Transition>& traj, Mlp& actor_mean,
                             GaussianHead& head, Mlp& critic, AdamState& actor_opt,
                             AdamState& critic_opt, double gamma, double entropy_coef,
                             double value_coef);

// One recorded step of an on-policy rollout. log_prob and value are the
// behaviour policy's values at collection time.
struct RolloutStep {
  Vec state;
  int action = 0;
  double action_c = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

struct PpoParams {
  double clip = 0.2;
  int epochs = 4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  bool normalize_advantages = true;
};

struct GaeResult {
  Vec advantages;
  Vec returns;
};

// Generalized advantage estimation. last_value bootstraps the value of the
// state following the final step when that step is not terminal.
GaeResult gae_advantages(const std::vector<RolloutStep>& steps, double last_value, double gamma,
                         double lambda);

// Mean clipped-surrogate objective min(ratio * A, clip(ratio) * A) of a
// discrete actor against stored log-probabilities.
double ppo_surrogate(const Mlp& actor, const std::vector<RolloutStep>& steps,
                     const Vec& advantages, double clip);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// Clipped-surrogate update (discrete policy): `epochs` full passes over the
// rollout, advantages normalized once per batch when enabled.
PpoStats ppo_update(const std::vector<RolloutStep>& steps, double last_value, Mlp& actor,
                    Mlp& critic, AdamState& actor_opt, AdamState& critic_opt,
                    const PpoParams& params);

// Continuous (Gaussian) variant; `action_c` holds raw samples.
PpoStats ppo_update_continuous(const std::vector<RolloutStep>& steps, double last_value,
                               Mlp& actor_mean, GaussianHead& head, Mlp& critic,
                               AdamState& actor_opt, AdamState& critic_opt,
                               const PpoParams& params);

// Polyak averaging: target <- (1 - tau) * target + tau * online.
void soft_update(Mlp& target, const Mlp& online, double tau);

struct DdpgStats {
  double critic_loss = 0.0;
  double actor_value = 0.0;
};

// One deterministic-policy-gradient update: critic toward
// r + gamma * (1 - done) * Q_target(s', mu_target(s')), actor up the critic's
// action gradient, then soft target updates. Scalar actions; the critic input
// is [state; action].
DdpgStats ddpg_step(const std::vector<const Transition*>& batch, Mlp& actor, Mlp& critic,
                    Mlp& target_actor, Mlp& target_critic, AdamState& actor_opt,
                    AdamState& critic_opt, double gamma, double tau);

// ---------------------------------------------------------------------------
// Uniform agent interfaces (observe -> act -> learn driven internally).
// For on-policy agents, observe() must receive the transition produced by the
// preceding act() call.
// ---------------------------------------------------------------------------

class DiscreteAgent {
 public:
  virtual ~DiscreteAgent() = default;
  virtual int act(const Vec& obs) = 0;
  virtual int act_greedy(const Vec& obs) = 0;
  virtual void observe(const Transition& t) = 0;
  virtual long step_count() const = 0;
  virtual double exploration_rate() const { return 0.0; }
  // Writes the policy's network snapshot(s) sequentially.
  virtual void save_policy(std::ostream& out) const = 0;
};

class ContinuousAgent {
 public:
  virtual ~ContinuousAgent() = default;
  virtual double act(const Vec& obs) = 0;         // action already in [0, 1]
  virtual double act_greedy(const Vec& obs) = 0;
  virtual void observe(const Transition& t) = 0;  // action_c = executed action
  virtual long step_count() const = 0;
  virtual void save_policy(std::ostream& out) const = 0;
};

// Factory for discrete-action tasks; DDPG is rejected with ConfigError.
std::unique_ptr<DiscreteAgent> make_discrete_agent(const AgentConfig& config, int obs_size,
                                                   int n_actions);

// Factory for continuous-action tasks; DQN is rejected with ConfigError.
std::unique_ptr<ContinuousAgent> make_continuous_agent(const AgentConfig& config, int obs_size);

}  // namespace rltest
