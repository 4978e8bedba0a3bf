#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rltest/agents.hpp"
#include "rltest/cycle.hpp"
#include "rltest/metrics.hpp"

namespace rltest {

struct RankStep {
  Vec observation;
  double reward = 0.0;
  bool done = false;
};

// Episodic ranking process over one CI cycle. begin() starts an episode;
// once done() the episode's ranking covers every test of the cycle exactly
// once.
class RankingEnv {
 public:
  virtual ~RankingEnv() = default;

  virtual bool discrete_actions() const = 0;
  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;  // discrete models only

  virtual Vec begin(const Cycle& cycle) = 0;
  virtual RankStep step_discrete(int action);
  virtual RankStep step_continuous(double action);
  virtual bool done() const = 0;
  virtual const Ranking& ranking() const = 0;

  // Exact upper bound on the number of steps one episode over this cycle can
  // take; used to enforce per-cycle step budgets without truncating episodes.
  virtual long episode_step_limit(const Cycle& cycle) const = 0;
};

// Selection sort whose comparisons the agent answers. The observation is the
// concatenated feature pair; action 0 designates the first test as higher
// priority, action 1 the second. Reward: 1.0 when the designated test fails,
// otherwise 0.5 when the designation matches the reference order and 0.0
// when it does not. An episode performs exactly k(k-1)/2 comparisons.
class PairwiseEnv final : public RankingEnv {
 public:
  explicit PairwiseEnv(int feature_size);

  bool discrete_actions() const override { return true; }
  int observation_size() const override { return 2 * feature_size_; }
  int action_count() const override { return 2; }
  Vec begin(const Cycle& cycle) override;
  RankStep step_discrete(int action) override;
  bool done() const override { return done_; }
  const Ranking& ranking() const override;
  long episode_step_limit(const Cycle& cycle) const override;

  // Test ids of the pair the pending action decides: (current best, challenger).
  std::pair<int, int> current_pair() const;

 private:
  int feature_size_;
  const Cycle* cycle_ = nullptr;
  std::vector<FeatureVector> features_;
  std::vector<int> optimal_pos_;  // by index into cycle->tests
  std::vector<int> order_;        // current arrangement, indices into cycle->tests
  std::size_t i_ = 0, j_ = 0, best_ = 0;
  bool done_ = true;
  Ranking ranking_;

  Vec observation() const;
  void advance_outer();
};

// One test per step, in cycle order; the action is the test's priority score
// in [0, 1] (values outside are clamped). The final ranking sorts scores
// descending (ties by ascending test id); the terminal reward is the
// ranking's metric (APFD with failures, NRPA otherwise), intermediate
// rewards are zero.
class PointwiseEnv final : public RankingEnv {
 public:
  explicit PointwiseEnv(int feature_size);

  bool discrete_actions() const override { return false; }
  int observation_size() const override { return feature_size_; }
  int action_count() const override { return 0; }
  Vec begin(const Cycle& cycle) override;
  RankStep step_continuous(double action) override;
  bool done() const override { return done_; }
  const Ranking& ranking() const override;
  long episode_step_limit(const Cycle& cycle) const override;

 private:
  int feature_size_;
  const Cycle* cycle_ = nullptr;
  std::vector<FeatureVector> features_;
  std::vector<double> scores_;
  std::size_t t_ = 0;
  bool done_ = true;
  Ranking ranking_;
};

// The observation concatenates the features of `padded_length` slots; slots
// beyond the cycle's tests are zero-filled dummies, and selected slots are
// zeroed out. Each action picks a slot: a real, unselected test is appended
// to the ranking with reward 1 - |assigned - optimal| / k; picking a dummy
// or an already-selected slot costs -1. Episodes end when the ranking is
// complete or after 4 * padded_length steps, with leftovers appended in
// ascending test-id order.
class ListwiseEnv final : public RankingEnv {
 public:
  ListwiseEnv(int padded_length, int feature_size);

  bool discrete_actions() const override { return true; }
  int observation_size() const override { return padded_length_ * feature_size_; }
  int action_count() const override { return padded_length_; }
  Vec begin(const Cycle& cycle) override;
  RankStep step_discrete(int action) override;
  bool done() const override { return done_; }
  const Ranking& ranking() const override;
  long episode_step_limit(const Cycle& cycle) const override;

 private:
  int padded_length_;
  int feature_size_;
  const Cycle* cycle_ = nullptr;
  std::vector<FeatureVector> features_;
  std::vector<int> optimal_pos_;
  std::vector<bool> selected_;
  Vec obs_;
  long steps_ = 0;
  bool done_ = true;
  Ranking ranking_;

  void finish();
};

std::unique_ptr<RankingEnv> make_ranking_env(const std::string& model, int feature_size,
                                             int padded_length);

// Non-owning handle over a discrete or continuous agent so the training
// protocol can drive either.
class PolicyHandle {
 public:
  explicit PolicyHandle(DiscreteAgent& agent) : discrete_(&agent) {}
  explicit PolicyHandle(ContinuousAgent& agent) : continuous_(&agent) {}

  bool discrete() const { return discrete_ != nullptr; }
  DiscreteAgent& as_discrete() const { return *discrete_; }
  ContinuousAgent& as_continuous() const { return *continuous_; }

 private:
  DiscreteAgent* discrete_ = nullptr;
  ContinuousAgent* continuous_ = nullptr;
};

struct ReplayBudget {
  long max_steps_per_cycle = 1'000'000;
  int no_improve_limit = 100;  // consecutive episodes without a new best total reward
};

struct CycleEvalRecord {
  int cycle_id = 0;          // the evaluated cycle
  MetricValue metric;
  long episodes_trained = 0;  // on the preceding cycle
  long steps_trained = 0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

// For every consecutive cycle pair (i, i+1): train the agent on cycle i
// (episode budget from episode_budget(), per-cycle step cap, and an early
// stop after no_improve_limit consecutive episodes whose total reward does
// not exceed the best so far), then rank cycle i+1 greedily and score it.
// Requires at least two cycles.
std::vector<CycleEvalRecord> replay_train(RankingEnv& env, PolicyHandle agent,
                                          const std::vector<Cycle>& cycles,
                                          const ReplayBudget& budget);

}  // namespace rltest
