#include "rltest/ciprio.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "rltest/errors.hpp"

namespace rltest {

namespace {

// Position of every test (by index into cycle.tests) in the reference order.
std::vector<int> optimal_positions(const Cycle& cycle) {
  const Ranking opt = optimal_ranking(cycle);
  std::unordered_map<int, int> pos_by_id;
  pos_by_id.reserve(opt.size());
  for (std::size_t p = 0; p < opt.size(); ++p) pos_by_id[opt[p]] = static_cast<int>(p);
  std::vector<int> pos(cycle.tests.size());
  for (std::size_t i = 0; i < cycle.tests.size(); ++i)
    pos[i] = pos_by_id.at(cycle.tests[i].test_id);
  return pos;
}

}  // namespace

RankStep RankingEnv::step_discrete(int) {
  throw std::logic_error("environment does not take discrete actions");
}

RankStep RankingEnv::step_continuous(double) {
  throw std::logic_error("environment does not take continuous actions");
}

// ---------------------------------------------------------------------------
// PairwiseEnv
// ---------------------------------------------------------------------------

PairwiseEnv::PairwiseEnv(int feature_size) : feature_size_(feature_size) {
  if (feature_size <= 0) throw std::invalid_argument("feature size must be positive");
}

Vec PairwiseEnv::observation() const {
  Vec obs;
  obs.reserve(2 * static_cast<std::size_t>(feature_size_));
  const FeatureVector& a = features_[static_cast<std::size_t>(order_[best_])];
  const FeatureVector& b = features_[static_cast<std::size_t>(order_[j_])];
  obs.insert(obs.end(), a.begin(), a.end());
  obs.insert(obs.end(), b.begin(), b.end());
  return obs;
}

Vec PairwiseEnv::begin(const Cycle& cycle) {
  if (cycle.tests.empty()) throw std::invalid_argument("empty cycle");
  cycle_ = &cycle;
  features_ = cycle_features(cycle);
  for (const FeatureVector& f : features_)
    if (static_cast<int>(f.size()) != feature_size_)
      throw std::invalid_argument("cycle feature size mismatch");
  optimal_pos_ = optimal_positions(cycle);
  const std::size_t k = cycle.tests.size();
  order_.resize(k);
  for (std::size_t i = 0; i < k; ++i) order_[i] = static_cast<int>(i);
  ranking_.clear();
  if (k < 2) {
    ranking_.push_back(cycle.tests[0].test_id);
    done_ = true;
    return Vec(static_cast<std::size_t>(observation_size()), 0.0);
  }
  i_ = 0;
  best_ = 0;
  j_ = 1;
  done_ = false;
  return observation();
}

void PairwiseEnv::advance_outer() {
  std::swap(order_[i_], order_[best_]);
  ++i_;
  best_ = i_;
  j_ = i_ + 1;
  if (i_ + 1 >= order_.size()) {
    done_ = true;
    ranking_.reserve(order_.size());
    for (int idx : order_) ranking_.push_back(cycle_->tests[static_cast<std::size_t>(idx)].test_id);
  }
}

RankStep PairwiseEnv::step_discrete(int action) {
  if (cycle_ == nullptr) throw std::logic_error("begin an episode before stepping");
  if (done_) throw std::logic_error("episode finished");
  if (action != 0 && action != 1) throw std::invalid_argument("action out of range");

  const std::size_t chosen = action == 0 ? best_ : j_;
  const std::size_t other = action == 0 ? j_ : best_;
  const TestCaseRecord& chosen_test = cycle_->tests[static_cast<std::size_t>(order_[chosen])];
  RankStep out;
  if (chosen_test.verdict == 1) {
    out.reward = 1.0;
  } else if (optimal_pos_[static_cast<std::size_t>(order_[chosen])] <
             optimal_pos_[static_cast<std::size_t>(order_[other])]) {
    out.reward = 0.5;
  } else {
    out.reward = 0.0;
  }

  if (action == 1) best_ = j_;
  ++j_;
  if (j_ >= order_.size()) advance_outer();

  out.done = done_;
  out.observation =
      done_ ? Vec(static_cast<std::size_t>(observation_size()), 0.0) : observation();
  return out;
}

const Ranking& PairwiseEnv::ranking() const {
  if (!done_) throw std::logic_error("episode not finished");
  return ranking_;
}

std::pair<int, int> PairwiseEnv::current_pair() const {
  if (cycle_ == nullptr || done_) throw std::logic_error("no comparison pending");
  return {cycle_->tests[static_cast<std::size_t>(order_[best_])].test_id,
          cycle_->tests[static_cast<std::size_t>(order_[j_])].test_id};
}

long PairwiseEnv::episode_step_limit(const Cycle& cycle) const {
  const long k = static_cast<long>(cycle.tests.size());
  return k * (k - 1) / 2;
}

// ---------------------------------------------------------------------------
// PointwiseEnv
// ---------------------------------------------------------------------------

PointwiseEnv::PointwiseEnv(int feature_size) : feature_size_(feature_size) {
  if (feature_size <= 0) throw std::invalid_argument("feature size must be positive");
}

Vec PointwiseEnv::begin(const Cycle& cycle) {
  if (cycle.tests.empty()) throw std::invalid_argument("empty cycle");
  cycle_ = &cycle;
  features_ = cycle_features(cycle);
  for (const FeatureVector& f : features_)
    if (static_cast<int>(f.size()) != feature_size_)
      throw std::invalid_argument("cycle feature size mismatch");
  scores_.assign(cycle.tests.size(), 0.0);
  t_ = 0;
  done_ = false;
  ranking_.clear();
  return features_[0];
}

RankStep PointwiseEnv::step_continuous(double action) {
  if (cycle_ == nullptr) throw std::logic_error("begin an episode before stepping");
  if (done_) throw std::logic_error("episode finished");

  scores_[t_] = std::clamp(action, 0.0, 1.0);
  ++t_;

  RankStep out;
  if (t_ < cycle_->tests.size()) {
    out.observation = features_[t_];
    return out;
  }

  // Sort: score descending, test id ascending on ties.
  std::vector<std::size_t> idx(cycle_->tests.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
    if (scores_[a] != scores_[b]) return scores_[a] > scores_[b];
    return cycle_->tests[a].test_id < cycle_->tests[b].test_id;
  });
  ranking_.clear();
  ranking_.reserve(idx.size());
  for (std::size_t i : idx) ranking_.push_back(cycle_->tests[i].test_id);

  done_ = true;
  out.done = true;
  out.reward = ranking_metric(ranking_, *cycle_).value;
  out.observation = Vec(static_cast<std::size_t>(observation_size()), 0.0);
  return out;
}

const Ranking& PointwiseEnv::ranking() const {
  if (!done_) throw std::logic_error("episode not finished");
  return ranking_;
}

long PointwiseEnv::episode_step_limit(const Cycle& cycle) const {
  return static_cast<long>(cycle.tests.size());
}

// ---------------------------------------------------------------------------
// ListwiseEnv
// ---------------------------------------------------------------------------

ListwiseEnv::ListwiseEnv(int padded_length, int feature_size)
    : padded_length_(padded_length), feature_size_(feature_size) {
  if (padded_length <= 0) throw std::invalid_argument("padded length must be positive");
  if (feature_size <= 0) throw std::invalid_argument("feature size must be positive");
}

Vec ListwiseEnv::begin(const Cycle& cycle) {
  if (cycle.tests.empty()) throw std::invalid_argument("empty cycle");
  if (static_cast<int>(cycle.tests.size()) > padded_length_)
    throw std::invalid_argument("cycle has more tests than the padded length");
  cycle_ = &cycle;
  features_ = cycle_features(cycle);
  for (const FeatureVector& f : features_)
    if (static_cast<int>(f.size()) != feature_size_)
      throw std::invalid_argument("cycle feature size mismatch");
  optimal_pos_ = optimal_positions(cycle);
  selected_.assign(cycle.tests.size(), false);
  obs_.assign(static_cast<std::size_t>(observation_size()), 0.0);
  for (std::size_t i = 0; i < features_.size(); ++i)
    std::copy(features_[i].begin(), features_[i].end(),
              obs_.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(feature_size_)));
  steps_ = 0;
  done_ = false;
  ranking_.clear();
  ranking_.reserve(cycle.tests.size());
  return obs_;
}

void ListwiseEnv::finish() {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < selected_.size(); ++i)
    if (!selected_[i]) rest.push_back(i);
  std::sort(rest.begin(), rest.end(), [this](std::size_t a, std::size_t b) {
    return cycle_->tests[a].test_id < cycle_->tests[b].test_id;
  });
  for (std::size_t i : rest) ranking_.push_back(cycle_->tests[i].test_id);
  done_ = true;
}

RankStep ListwiseEnv::step_discrete(int action) {
  if (cycle_ == nullptr) throw std::logic_error("begin an episode before stepping");
  if (done_) throw std::logic_error("episode finished");
  if (action < 0 || action >= padded_length_) throw std::invalid_argument("action out of range");

  ++steps_;
  const std::size_t k = cycle_->tests.size();
  RankStep out;
  const auto slot = static_cast<std::size_t>(action);
  if (slot < k && !selected_[slot]) {
    const int assigned = static_cast<int>(ranking_.size());
    out.reward = 1.0 - std::abs(assigned - optimal_pos_[slot]) / static_cast<double>(k);
    selected_[slot] = true;
    ranking_.push_back(cycle_->tests[slot].test_id);
    std::fill_n(obs_.begin() + static_cast<std::ptrdiff_t>(slot * static_cast<std::size_t>(feature_size_)),
                feature_size_, 0.0);
    if (ranking_.size() == k) done_ = true;
  } else {
    out.reward = -1.0;  // dummy slot or a test already placed
  }

  if (!done_ && steps_ >= 4L * padded_length_) finish();

  out.done = done_;
  out.observation = done_ ? Vec(static_cast<std::size_t>(observation_size()), 0.0) : obs_;
  return out;
}

const Ranking& ListwiseEnv::ranking() const {
  if (!done_) throw std::logic_error("episode not finished");
  return ranking_;
}

long ListwiseEnv::episode_step_limit(const Cycle&) const { return 4L * padded_length_; }

std::unique_ptr<RankingEnv> make_ranking_env(const std::string& model, int feature_size,
                                             int padded_length) {
  if (model == "pairwise") return std::make_unique<PairwiseEnv>(feature_size);
  if (model == "pointwise") return std::make_unique<PointwiseEnv>(feature_size);
  if (model == "listwise") return std::make_unique<ListwiseEnv>(padded_length, feature_size);
  throw ConfigError("unknown ranking model: " + model);
}

// ---------------------------------------------------------------------------
// Replay training protocol
// ---------------------------------------------------------------------------

namespace {

double run_episode(RankingEnv& env, PolicyHandle agent, const Cycle& cycle, long& steps) {
  Vec obs = env.begin(cycle);
  double total = 0.0;
  while (!env.done()) {
    Transition t;
    RankStep s;
    if (agent.discrete()) {
      const int a = agent.as_discrete().act(obs);
      s = env.step_discrete(a);
      t.action = a;
    } else {
      const double a = agent.as_continuous().act(obs);
      s = env.step_continuous(a);
      t.action_c = a;
    }
    t.state = std::move(obs);
    t.reward = s.reward;
    t.next_state = s.observation;
    t.done = s.done;
    if (agent.discrete()) {
      agent.as_discrete().observe(t);
    } else {
      agent.as_continuous().observe(t);
    }
    total += s.reward;
    ++steps;
    obs = std::move(s.observation);
  }
  return total;
}

Ranking rank_greedy(RankingEnv& env, PolicyHandle agent, const Cycle& cycle) {
  Vec obs = env.begin(cycle);
  while (!env.done()) {
    RankStep s = agent.discrete()
                     ? env.step_discrete(agent.as_discrete().act_greedy(obs))
                     : env.step_continuous(agent.as_continuous().act_greedy(obs));
    obs = std::move(s.observation);
  }
  return env.ranking();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<CycleEvalRecord> replay_train(RankingEnv& env, PolicyHandle agent,
                                          const std::vector<Cycle>& cycles,
                                          const ReplayBudget& budget) {
  if (cycles.size() < 2)
    throw std::invalid_argument("replay training needs at least two cycles");

  std::vector<CycleEvalRecord> results;
  results.reserve(cycles.size() - 1);

  for (std::size_t ci = 0; ci + 1 < cycles.size(); ++ci) {
    const Cycle& train = cycles[ci];
    const Cycle& eval = cycles[ci + 1];

    const long max_episodes = episode_budget(static_cast<int>(train.tests.size()));
    const long per_episode = env.episode_step_limit(train);

    long episodes = 0;
    long steps = 0;
    long streak = 0;
    double best_total = -std::numeric_limits<double>::infinity();

    const auto train_start = std::chrono::steady_clock::now();
    while (episodes < max_episodes && streak < budget.no_improve_limit) {
      if (steps + per_episode > budget.max_steps_per_cycle) break;
      const double total = run_episode(env, agent, train, steps);
      ++episodes;
      if (total > best_total) {
        best_total = total;
        streak = 0;
      } else {
        ++streak;
      }
    }
    const double train_seconds = seconds_since(train_start);

    const auto predict_start = std::chrono::steady_clock::now();
    const Ranking ranking = rank_greedy(env, agent, eval);
    const MetricValue metric = ranking_metric(ranking, eval);
    const double predict_seconds = seconds_since(predict_start);

    results.push_back(
        {eval.cycle_id, metric, episodes, steps, train_seconds, predict_seconds});
  }
  return results;
}

}  // namespace rltest
