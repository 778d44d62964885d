#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "covmpg/run_config.hpp"

using namespace covmpg;

TEST(Presets, MatchTheTwoScenarios) {
  ASSERT_EQ(preset_names().size(), 2u);
  const auto two = preset("2agent-7x7x4");
  EXPECT_EQ(two.dims, (GridDims{7, 7, 4}));
  EXPECT_EQ(two.n_agents, 2);
  const auto four = preset("4agent-9x9x4");
  EXPECT_EQ(four.dims, (GridDims{9, 9, 4}));
  EXPECT_EQ(four.n_agents, 4);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate());
  EXPECT_THROW(preset("3agent"), ConfigError);
}

TEST(ParseRunConfig, PresetWithOverrides) {
  const auto cfg = parse_run_config(R"({
    "preset": "2agent-7x7x4", "seed": 9,
    "train": {"episodes": 2, "backend": "fsr"},
    "execute": {"max_steps": 5},
    "evaluate": {"trials": 3}
  })");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.train.seed, 9u);
  EXPECT_EQ(cfg.train.episodes, 2);
  EXPECT_EQ(cfg.train.max_steps, 200);
  EXPECT_EQ(cfg.train.backend, Backend::Fsr);
  EXPECT_EQ(cfg.exec.max_steps, 5);
  EXPECT_EQ(cfg.trials, 3);
  EXPECT_EQ(static_cast<int>(cfg.train.scenario.foi.size()), cfg.target_count);
}

TEST(ParseRunConfig, ExplicitScenario) {
  const auto cfg = parse_run_config(R"({
    "seed": 1,
    "scenario": {"dims": [5, 4, 3], "agents": 3, "targets": 6,
                 "fov_half_angles_deg": [30, 45]}
  })");
  EXPECT_TRUE(cfg.preset.empty());
  EXPECT_EQ(cfg.dims, (GridDims{5, 4, 3}));
  EXPECT_EQ(cfg.n_agents, 3);
  EXPECT_EQ(cfg.train.scenario.foi.size(), 6u);
  EXPECT_EQ(cfg.phi.phi_y_deg, 45.0);
}

TEST(ParseRunConfig, Errors) {
  const char* bad[] = {
      "not json",
      "[]",
      R"({"scenario": {"dims": [5, 5, 3], "agents": 2}})",
      R"({"scenario": {"dims": [5, 5], "agents": 2, "targets": 3}})",
      R"({"preset": "2agent-7x7x4", "colour": 1})",
      R"({"preset": "2agent-7x7x4", "train": {"epochs": 1}})",
      R"({"preset": "2agent-7x7x4", "train": {"episodes": "many"}})",
      R"({"preset": "2agent-7x7x4", "train": {"gamma": 1.0}})",
      R"({"preset": "2agent-7x7x4", "train": {"backend": "table"}})",
      R"({"preset": "2agent-7x7x4", "scenario": {"targets": 0}})",
      R"({"preset": "2agent-7x7x4", "scenario": {"targets": 50}})",
      R"({"preset": "2agent-7x7x4", "execute": {"sweep_limit": 0}})",
      R"({"preset": "2agent-7x7x4", "evaluate": {"trials": 0}})",
      R"({"preset": "nope"})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_run_config(text), ConfigError) << text;
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST(ResolvedJson, IsCanonicalAndComplete) {
  const auto a = parse_run_config(R"({"preset": "2agent-7x7x4", "seed": 4})");
  const auto b = parse_run_config(R"({"seed": 4, "preset": "2agent-7x7x4"})");
  EXPECT_EQ(resolved_json(a), resolved_json(b));
  const auto j = nlohmann::json::parse(resolved_json(a));
  EXPECT_EQ(j["seed"], 4);
  EXPECT_EQ(j["train"]["eps_decay"], 10000.0);
  EXPECT_EQ(j["train"]["hidden"], nlohmann::json::array({64, 64}));
  EXPECT_EQ(j["execute"]["max_steps"], 20);
  EXPECT_EQ(j["evaluate"]["trials"], 50);
  EXPECT_EQ(resolved_json(a).find('\n'), std::string::npos);
}

TEST(ResolveScenario, SeedDeterminesFoi) {
  auto a = preset("2agent-7x7x4");
  auto b = a;
  EXPECT_EQ(resolve_scenario(a).foi, resolve_scenario(b).foi);
  b.seed = 1;
  EXPECT_NE(resolve_scenario(a).foi, resolve_scenario(b).foi);
  EXPECT_EQ(execution_start(a), execution_start(a));
  EXPECT_TRUE(valid_joint_state(execution_start(a), a.dims));
}

TEST(Checkpoint, RoundTrip) {
  for (const char* backend : {"mlp", "fsr"}) {
    const auto cfg = parse_run_config(std::string(R"({"preset": "2agent-7x7x4", "seed": 2, "train": {"backend": ")") +
                                      backend + R"("}})");
    std::unique_ptr<QFunction> q = make_qfunction(cfg.train);
    if (auto* f = dynamic_cast<FsrQ*>(q.get())) f->set_weight(execution_start(cfg), joint_action_from_index(5, 2), 1.5);
    std::stringstream ss;
    save_checkpoint(ss, cfg, *q);
    const auto ck = load_checkpoint(ss);
    EXPECT_EQ(ck.config_json, resolved_json(cfg));
    EXPECT_EQ(ck.scenario.foi, cfg.train.scenario.foi);
    EXPECT_EQ(ck.scenario.dims, cfg.dims);
    EXPECT_EQ(ck.q->kind(), backend);
    const auto s = execution_start(cfg);
    EXPECT_EQ(ck.q->all_values(s), q->all_values(s));
    EXPECT_NO_THROW(check_compatible(ck, cfg));
  }
}

TEST(Checkpoint, CompatibilityChecks) {
  const auto cfg = parse_run_config(R"({"preset": "2agent-7x7x4", "seed": 2, "train": {"backend": "fsr"}})");
  std::stringstream ss;
  save_checkpoint(ss, cfg, FsrQ(cfg.dims, cfg.n_agents));
  const auto ck = load_checkpoint(ss);
  EXPECT_THROW(check_compatible(ck, parse_run_config(R"({"preset": "2agent-7x7x4", "seed": 2})")),
               ConfigError);
  EXPECT_THROW(check_compatible(ck, parse_run_config(R"({"preset": "2agent-7x7x4", "seed": 3, "train": {"backend": "fsr"}})")),
               ConfigError);
  EXPECT_THROW(check_compatible(ck, parse_run_config(R"({"preset": "4agent-9x9x4", "seed": 2, "train": {"backend": "fsr"}})")),
               ConfigError);
}

TEST(Checkpoint, CorruptInputIsRejected) {
  const auto cfg = parse_run_config(R"({"preset": "2agent-7x7x4", "train": {"backend": "fsr"}})");
  std::stringstream good;
  FsrQ q(cfg.dims, cfg.n_agents);
  q.set_weight(execution_start(cfg), joint_action_from_index(3, 2), 2.0);
  save_checkpoint(good, cfg, q);
  const std::string text = good.str();
  std::vector<std::string> variants{
      "",
      "garbage",
      "covmpg-checkpoint 2\n" + text.substr(text.find('\n') + 1),
      text.substr(0, text.size() / 2),
      text.substr(0, text.size() - 4),
  };
  std::string wrong_foi = text;
  wrong_foi.replace(wrong_foi.find("foi "), 4, "fox ");
  variants.push_back(wrong_foi);
  for (const auto& v : variants) {
    std::stringstream ss(v);
    EXPECT_THROW(load_checkpoint(ss), std::runtime_error) << v.substr(0, 40);
  }
}
