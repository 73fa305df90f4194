// Copyright 2026 The bfc Authors
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

#include "bfc/errors.hpp"
#include "bfc/metrics.hpp"
#include "bfc/prediction_io.hpp"
#include "commands.hpp"
#include "run_config.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"

namespace
{

namespace fs = std::filesystem;
using bfc::cli::RunConfig;

/// A fresh scratch directory per test.
class CliDir : public ::testing::Test
{
protected:
  void SetUp() override
  {
    const auto * info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("bfc_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig tiny() const
  {
    RunConfig c = bfc::cli::parse_run_config(R"({
      "num_scenes": 2,
      "model": {"feature_dim": 8, "graph_layers": 1, "history": 6, "future": 5},
      "train": {"batch_size": 2, "stage2_start_epoch": 1, "first_period": 1, "num_periods": 1, "total_epochs": 2}
    })");
    c.paths.data_dir = (dir_ / "data").string();
    c.paths.checkpoint = (dir_ / "model.ckpt").string();
    c.paths.log = (dir_ / "log.jsonl").string();
    c.paths.predictions = (dir_ / "pred.json").string();
    c.paths.report = (dir_ / "report.json").string();
    return c;
  }

  fs::path dir_;
};

std::string read_file(const fs::path & p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunConfig, DefaultsAndValidation)
{
  const RunConfig c = bfc::cli::parse_run_config("{}");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.precision, bfc::cli::Precision::F32);
  EXPECT_EQ(c.model.feature_dim, 64u);
  EXPECT_EQ(c.train.schedule.total_epochs, 100);
  EXPECT_EQ(c.scene_gen.history, c.model.history);
  EXPECT_EQ(c.scene_gen.future, c.model.future);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, UnknownKeysAndBadTypesNameTheField)
{
  const auto message = [](const char * text) {
    try {
      bfc::cli::parse_run_config(text);
    } catch (const bfc::ConfigError & e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"model": {"feature_dims": 8}})").find("model.feature_dims"), std::string::npos);
  EXPECT_NE(message(R"({"bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(message(R"({"seed": "x"})").find("seed"), std::string::npos);
  EXPECT_NE(message(R"({"precision": "f16"})").find("precision"), std::string::npos);
  EXPECT_NE(message("{"), "no error");
  EXPECT_THROW(bfc::cli::parse_run_config(R"({"model": {"history": 1}})"), bfc::ConfigError);
}

TEST(RunConfig, HashIgnoresPathsOnly)
{
  RunConfig a = bfc::cli::parse_run_config("{}");
  RunConfig b = a;
  b.paths.data_dir = "/elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 43;
  EXPECT_NE(a.hash(), b.hash());
  // The canonical form parses back to the same hash.
  EXPECT_EQ(bfc::cli::parse_run_config(a.to_json()).hash(), a.hash());
}

TEST(Commands, LrTableRows)
{
  const RunConfig c = bfc::cli::parse_run_config("{}");
  std::ostringstream out;
  ASSERT_EQ(bfc::cli::lr_table(c, out), 0);
  std::map<int, std::string> rows;
  std::istringstream in(out.str());
  int e = 0;
  std::string lr;
  while (in >> e >> lr) rows[e] = lr;
  EXPECT_EQ(rows.size(), 100u);
  for (int b : {0, 6, 18, 42}) EXPECT_EQ(rows[b], "1.000000e-03") << b;
  EXPECT_EQ(rows[90], "1.000000e-05");
  EXPECT_EQ(rows[3], "5.050000e-04");
}

TEST(Commands, ExitCodeMapping)
{
  using bfc::cli::exit_code_for;
  EXPECT_EQ(exit_code_for(bfc::ConfigError("x")), 1);
  EXPECT_EQ(exit_code_for(bfc::ParseError("f", "x")), 1);
  EXPECT_EQ(exit_code_for(bfc::IoError("x")), 1);
  EXPECT_EQ(exit_code_for(bfc::EvaluationError("x")), 1);
  EXPECT_EQ(exit_code_for(bfc::EnsembleError("x")), 1);
  EXPECT_EQ(exit_code_for(bfc::CheckError("x")), 2);
  EXPECT_EQ(exit_code_for(bfc::ContractError("x")), 3);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 3);
}

TEST_F(CliDir, GenerateTrainPredictEvaluate)
{
  const RunConfig c = tiny();
  std::ostringstream out;
  ASSERT_EQ(bfc::cli::gen_data(c, out), 0);
  EXPECT_TRUE(fs::exists(dir_ / "data" / "scene_0000.json"));
  EXPECT_TRUE(fs::exists(dir_ / "data" / "scene_0001.json"));
  ASSERT_EQ(bfc::cli::train(c, out), 0);
  std::istringstream log(read_file(c.paths.log));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["stage"], lines == 0 ? "S1" : "S2");
    EXPECT_EQ(j["config_hash"], c.hash());
    ++lines;
  }
  EXPECT_EQ(lines, 2);
  ASSERT_EQ(bfc::cli::predict(c, out), 0);
  ASSERT_EQ(bfc::cli::eval(c, out), 0);
  const auto report = nlohmann::json::parse(read_file(c.paths.report));
  EXPECT_EQ(report["config_hash"], c.hash());
  EXPECT_EQ(report["metrics"].size(), 8u);

  // A checkpoint from a different model shape is refused.
  RunConfig other = c;
  other.model.feature_dim = 16;
  EXPECT_THROW(bfc::cli::predict(other, out), bfc::ConfigError);
}

TEST_F(CliDir, SingleModelEnsembleKeepsMetrics)
{
  RunConfig c = tiny();
  c.num_scenes = 3;
  std::ostringstream out;
  ASSERT_EQ(bfc::cli::gen_data(c, out), 0);
  const auto scenes = bfc::cli::load_scene_dir(c.paths.data_dir);
  bfc::Rng rng(1);
  bfc::PredictionFile pf;
  for (const auto & s : scenes) {
    for (const auto & a : s.actors) {
      if (!a.is_focal) continue;
      auto f = bfc_test::random_forecast(rng, 6, static_cast<std::size_t>(c.model.future), 10.0);
      f.scene_id = s.id;
      f.actor_id = a.id;
      pf.predictions.push_back(f);
    }
  }
  bfc::save_predictions_file(pf, dir_ / "sub.json");
  std::ofstream(dir_ / "manifest.json") << R"([{"model_id": "only", "alpha": 1.5, "prediction_file": "sub.json"}])";
  ASSERT_EQ(bfc::cli::ensemble(c, dir_ / "manifest.json", out), 0);
  const auto fused = bfc::load_predictions_file(c.paths.predictions);
  const auto before = bfc::evaluate(pf.predictions, scenes);
  const auto after = bfc::evaluate(fused.predictions, scenes);
  for (std::size_t i = 0; i < bfc::kNumMetrics; ++i) EXPECT_NEAR(after.values[i], before.values[i], 1e-9);

  std::ofstream(dir_ / "bad.json") << R"([{"model_id": "x", "alpha": 1.0, "prediction_file": "sub.json", "extra": 1}])";
  EXPECT_THROW(bfc::cli::ensemble(c, dir_ / "bad.json", out), bfc::ParseError);
}
