#include "rltest/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "rltest/errors.hpp"

using rltest::ConfigError;
using rltest::ExperimentConfig;
using rltest::KeyValueFile;

namespace {

KeyValueFile parse_text(const std::string& text) {
  std::istringstream in(text);
  return KeyValueFile::parse(in, "test.cfg");
}

std::string config_error_of(const std::string& text) {
  try {
    const KeyValueFile kv = parse_text(text);
    rltest::load_experiment_config(kv);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

constexpr const char* kMazeBase =
    "task = blockmaze\n"
    "agent.algorithm = dqn\n";

constexpr const char* kCiprioBase =
    "task = ciprio\n"
    "ciprio.model = pairwise\n"
    "ciprio.dataset = data.csv\n"
    "agent.algorithm = dqn\n";

}  // namespace

TEST(KeyValueFile, ParsesSectionsCommentsAndWhitespace) {
  const KeyValueFile kv = parse_text(
      "# leading comment\n"
      "top = 1\n"
      "\n"
      "[agent]\n"
      "  algorithm = ppo  \n"
      "; another comment style\n"
      "gamma=0.5\n"
      "[maze]\n"
      "width = 10\n");
  EXPECT_EQ(kv.get_string("top"), "1");
  EXPECT_EQ(kv.get_string("agent.algorithm"), "ppo");
  EXPECT_DOUBLE_EQ(kv.get_double("agent.gamma", 0.0), 0.5);
  EXPECT_EQ(kv.get_int("maze.width", 0), 10);
  EXPECT_TRUE(kv.has("agent.gamma"));
  EXPECT_FALSE(kv.has("agent.missing"));
}

TEST(KeyValueFile, ReportsDuplicateKeysWithLineNumbers) {
  try {
    parse_text("a = 1\na = 2\n");
    FAIL() << "duplicate keys must be rejected";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.cfg:2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("duplicate key 'a'"), std::string::npos);
  }
}

TEST(KeyValueFile, RejectsMalformedLines) {
  EXPECT_THROW(parse_text("key without equals\n"), ConfigError);
  EXPECT_THROW(parse_text("[unterminated\n"), ConfigError);
  EXPECT_THROW(parse_text("[]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_text("bad key! = 1\n"), ConfigError);
  EXPECT_NO_THROW(parse_text("[a]\n[b]\nx = 1\n"));  // empty sections are fine
}

TEST(KeyValueFile, TypedGettersParseAndValidate) {
  const KeyValueFile kv = parse_text(
      "i = 42\n"
      "neg = -7\n"
      "d = 2.5\n"
      "b1 = true\n"
      "b2 = off\n"
      "u = 18446744073709551615\n"
      "list = 256, 128,128\n"
      "bad_int = 4x\n"
      "bad_bool = maybe\n");
  EXPECT_EQ(kv.get_long("i", 0), 42);
  EXPECT_EQ(kv.get_int("neg", 0), -7);
  EXPECT_EQ(kv.get_long("absent", -3), -3);
  EXPECT_DOUBLE_EQ(kv.get_double("d", 0.0), 2.5);
  EXPECT_TRUE(kv.get_bool("b1", false));
  EXPECT_FALSE(kv.get_bool("b2", true));
  EXPECT_EQ(kv.get_u64("u", 0), 18446744073709551615ull);
  EXPECT_EQ(kv.get_int_list("list", {}), (std::vector<int>{256, 128, 128}));
  EXPECT_EQ(kv.get_int_list("absent", {64}), (std::vector<int>{64}));
  EXPECT_THROW(kv.get_long("bad_int", 0), ConfigError);
  EXPECT_THROW(kv.get_bool("bad_bool", false), ConfigError);
  EXPECT_THROW(kv.get_string("absent"), ConfigError);
  EXPECT_THROW(kv.require_long("absent"), ConfigError);
}

TEST(KeyValueFile, SetOverridesAndAddsKeys) {
  KeyValueFile kv = parse_text("seed = 1\n");
  kv.set("seed", "99");
  kv.set("maze.total_steps", "1000");
  EXPECT_EQ(kv.get_u64("seed", 0), 99u);
  EXPECT_EQ(kv.get_long("maze.total_steps", 0), 1000);
  EXPECT_THROW(kv.set("bad key", "1"), ConfigError);
}

TEST(KeyValueFile, RejectUnusedNamesEveryUnknownKey) {
  const KeyValueFile kv = parse_text("alpha = 1\nmystery_a = 2\nmystery_b = 3\n");
  kv.get_long("alpha", 0);
  try {
    kv.reject_unused();
    FAIL() << "unused keys must be rejected";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("mystery_a"), std::string::npos);
    EXPECT_NE(what.find("mystery_b"), std::string::npos);
    EXPECT_EQ(what.find("alpha"), std::string::npos);
  }
}

TEST(ExperimentConfig, MazeDefaultsApply) {
  const ExperimentConfig c = rltest::load_experiment_config(parse_text(kMazeBase));
  EXPECT_EQ(c.task, rltest::Task::blockmaze);
  EXPECT_EQ(c.repetitions, 10);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.name, "dqn-maze");
  EXPECT_EQ(c.maze.width, 20);
  EXPECT_EQ(c.maze.height, 20);
  EXPECT_DOUBLE_EQ(c.maze.wall_density, 0.2);
  EXPECT_EQ(c.maze.bug_count, 25);
  EXPECT_EQ(c.maze.step_cap, 500);
  EXPECT_EQ(c.maze.total_steps, 4000000);
  EXPECT_EQ(c.agent.algorithm, rltest::Algorithm::dqn);
  EXPECT_EQ(c.agent.hidden, (std::vector<int>{256, 128, 128}));
  EXPECT_EQ(c.output_dir, "results");
}

TEST(ExperimentConfig, CiprioDefaultsApply) {
  const ExperimentConfig c = rltest::load_experiment_config(parse_text(kCiprioBase));
  EXPECT_EQ(c.task, rltest::Task::ciprio);
  EXPECT_EQ(c.repetitions, 1);
  EXPECT_EQ(c.name, "dqn-pairwise");
  EXPECT_EQ(c.ciprio.dataset_path, "data.csv");
  EXPECT_EQ(c.ciprio.schema, rltest::DatasetSchema::simple);
  EXPECT_EQ(c.ciprio.max_steps_per_cycle, 1000000);
  EXPECT_EQ(c.ciprio.no_improve_limit, 100);
}

TEST(ExperimentConfig, ReadsExplicitValues) {
  const ExperimentConfig c = rltest::load_experiment_config(parse_text(
      "task = blockmaze\n"
      "name = trial-7\n"
      "seed = 123\n"
      "repetitions = 4\n"
      "output = out/dir\n"
      "[agent]\n"
      "algorithm = ppo\n"
      "gamma = 0.9\n"
      "learning_rate = 0.001\n"
      "hidden = 32,16\n"
      "rollout_steps = 64\n"
      "clip_range = 0.1\n"
      "[maze]\n"
      "width = 5\n"
      "height = 6\n"
      "density = 0.0\n"
      "bugs = 0\n"
      "step_cap = 50\n"
      "observation = one_hot\n"
      "total_steps = 5000\n"
      "checkpoint_interval = 500\n"));
  EXPECT_EQ(c.name, "trial-7");
  EXPECT_EQ(c.seed, 123u);
  EXPECT_EQ(c.repetitions, 4);
  EXPECT_EQ(c.output_dir, "out/dir");
  EXPECT_EQ(c.agent.algorithm, rltest::Algorithm::ppo);
  EXPECT_DOUBLE_EQ(c.agent.gamma, 0.9);
  EXPECT_DOUBLE_EQ(c.agent.lr, 0.001);
  EXPECT_EQ(c.agent.hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(c.agent.rollout_steps, 64);
  EXPECT_DOUBLE_EQ(c.agent.clip_range, 0.1);
  EXPECT_EQ(c.maze.width, 5);
  EXPECT_EQ(c.maze.height, 6);
  EXPECT_EQ(c.maze.observation, rltest::MazeObservation::one_hot);
  EXPECT_EQ(c.maze.total_steps, 5000);
}

TEST(ExperimentConfig, RejectsUnknownKeysByName) {
  const std::string what = config_error_of(std::string(kMazeBase) + "maze.colour = blue\n");
  EXPECT_NE(what.find("unknown key"), std::string::npos);
  EXPECT_NE(what.find("maze.colour"), std::string::npos);
}

TEST(ExperimentConfig, EnforcesTaskAgentCompatibility) {
  EXPECT_NE(config_error_of(
                "task = blockmaze\n"
                "agent.algorithm = ddpg\n")
                .find("ddpg"),
            std::string::npos);
  EXPECT_NE(config_error_of(
                "task = ciprio\n"
                "ciprio.model = pointwise\n"
                "ciprio.dataset = d.csv\n"
                "agent.algorithm = dqn\n")
                .find("continuous"),
            std::string::npos);
  EXPECT_NE(config_error_of(
                "task = ciprio\n"
                "ciprio.model = pairwise\n"
                "ciprio.dataset = d.csv\n"
                "agent.algorithm = ddpg\n")
                .find("discrete"),
            std::string::npos);
  EXPECT_NE(config_error_of(
                "task = ciprio\n"
                "ciprio.model = listwise\n"
                "ciprio.dataset = d.csv\n"
                "agent.algorithm = ddpg\n")
                .find("discrete"),
            std::string::npos);
  // The remaining pairings are legal.
  EXPECT_EQ(config_error_of(
                "task = ciprio\n"
                "ciprio.model = pointwise\n"
                "ciprio.dataset = d.csv\n"
                "agent.algorithm = ddpg\n"),
            "");
  EXPECT_EQ(config_error_of(
                "task = ciprio\n"
                "ciprio.model = listwise\n"
                "ciprio.dataset = d.csv\n"
                "agent.algorithm = ppo\n"),
            "");
}

TEST(ExperimentConfig, ValidatesRanges) {
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "repetitions = 0\n").find("repetitions"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "maze.density = 0.5\n").find("density"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "agent.gamma = 1.5\n").find("gamma"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "agent.hidden = 8,0\n").find("hidden"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "agent.learning_rate = 0\n")
                .find("learning_rate"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "maze.width = 1\n").find("dimensions"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kCiprioBase) + "ciprio.schema = fancy\n").find("schema"),
            std::string::npos);
  EXPECT_NE(config_error_of("task = juggling\nagent.algorithm = dqn\n").find("unknown task"),
            std::string::npos);
  EXPECT_NE(config_error_of(std::string(kMazeBase) + "name = a,b\n").find("name"),
            std::string::npos);
}

TEST(ExperimentConfig, SeedAndOverridesFlowThroughSet) {
  KeyValueFile kv = parse_text(kMazeBase);
  kv.set("seed", "77");
  kv.set("maze.total_steps", "123");
  kv.set("repetitions", "2");
  const ExperimentConfig c = rltest::load_experiment_config(kv);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.agent.seed, 77u);  // the agent inherits the experiment seed
  EXPECT_EQ(c.maze.total_steps, 123);
  EXPECT_EQ(c.repetitions, 2);
}

TEST(DatasetProfileConfig, ParsesAndValidates) {
  const KeyValueFile kv = parse_text(
      "[dataset]\n"
      "cycles = 50\n"
      "logs = 2000\n"
      "fail_rate = 0.2\n"
      "failed_cycles = 30\n"
      "enriched = true\n");
  const rltest::DatasetProfile p = rltest::load_dataset_profile(kv);
  EXPECT_EQ(p.cycles, 50);
  EXPECT_EQ(p.logs, 2000);
  EXPECT_DOUBLE_EQ(p.fail_rate, 0.2);
  EXPECT_EQ(p.failed_cycles, 30);
  EXPECT_TRUE(p.enriched);

  EXPECT_THROW(rltest::load_dataset_profile(parse_text("dataset.logs = 10\n")), ConfigError);
  EXPECT_THROW(rltest::load_dataset_profile(parse_text("dataset.cycles = 5\n")), ConfigError);
}

TEST(ExperimentConfig, MissingRequiredKeysAreNamed) {
  EXPECT_NE(config_error_of("agent.algorithm = dqn\n").find("'task'"), std::string::npos);
  EXPECT_NE(config_error_of("task = blockmaze\n").find("'agent.algorithm'"), std::string::npos);
  EXPECT_NE(config_error_of("task = ciprio\nagent.algorithm = dqn\n").find("'ciprio.model'"),
            std::string::npos);
}
