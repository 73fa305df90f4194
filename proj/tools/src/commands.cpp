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

#include "commands.hpp"

#include "bfc/block_checks.hpp"
#include "bfc/checkpoint.hpp"
#include "bfc/ensemble.hpp"
#include "bfc/errors.hpp"
#include "bfc/metrics.hpp"
#include "bfc/model.hpp"
#include "bfc/prediction_io.hpp"
#include "bfc/rng.hpp"
#include "bfc/scene_io.hpp"
#include "bfc/train.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

namespace bfc::cli
{

namespace fs = std::filesystem;

namespace
{

constexpr const char * kParamPrefix = "param.";
constexpr const char * kOptimizerPrefix = "opt.";

std::string scene_file_name(int index)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d.json", index);
  return buf;
}

void ensure_parent(const fs::path & path)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
}

std::string format_double(const char * fmt, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

template <typename T>
int train_as(const RunConfig & config, const std::vector<TrainSample> & samples, std::ostream & out)
{
  const Network net(config.model);
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  ParamStore<T> params = net.init_params<T>(config.seed);
  TrainState<T> state{params, NAdam<T>(params), 0};

  const fs::path log_path(config.paths.log);
  ensure_parent(log_path);
  std::ofstream log(log_path, std::ios::binary);
  if (!log) {
    throw IoError("cannot open '" + log_path.string() + "' for writing");
  }
  const std::string hash = config.hash();
  train<T>(net, samples, tc, state, [&](const EpochLog & e) {
    log << epoch_log_json(e, hash) << '\n';
    out << "epoch " << e.epoch << ' ' << stage_name(e.loss.stage)
        << " lr=" << format_double("%.3e", e.lr)
        << " loss=" << format_double("%.4f", e.loss.total)
        << " minFDE6=" << format_double("%.4f", e.min_fde) << '\n';
  });
  if (!log) {
    throw IoError("failed writing '" + log_path.string() + "'");
  }

  Checkpoint ckpt;
  ckpt.meta["config_hash"] = hash;
  ckpt.meta["model"] = config.model_json();
  ckpt.meta["precision"] = std::string(precision_name(config.precision));
  ckpt.meta["epochs"] = std::to_string(state.next_epoch);
  append_params(ckpt, state.params, kParamPrefix);
  state.optimizer.save(ckpt, kOptimizerPrefix);
  const fs::path ckpt_path(config.paths.checkpoint);
  ensure_parent(ckpt_path);
  save_checkpoint(ckpt, ckpt_path);
  out << "wrote " << ckpt_path.string() << " (" << samples.size() << " samples, "
      << state.next_epoch << " epochs)\n";
  return kOk;
}

template <typename T>
std::vector<Forecast> predict_as(const RunConfig & config, const Checkpoint & ckpt, std::span<const Scene> scenes)
{
  const Network net(config.model);
  ParamStore<T> params = net.init_params<T>(0);
  restore_params(ckpt, params, kParamPrefix);
  std::vector<Forecast> all;
  for (const Scene & scene : scenes) {
    for (Forecast & f : forecast<T>(net, params, scene, Stage::S2)) {
      all.push_back(std::move(f));
    }
  }
  return all;
}

}  // namespace

int exit_code_for(const std::exception & e)
{
  if (dynamic_cast<const ConfigError *>(&e) || dynamic_cast<const ParseError *>(&e) ||
      dynamic_cast<const IoError *>(&e) || dynamic_cast<const EvaluationError *>(&e) ||
      dynamic_cast<const EnsembleError *>(&e) || dynamic_cast<const fs::filesystem_error *>(&e)) {
    return kUserError;
  }
  if (dynamic_cast<const CheckError *>(&e)) {
    return kCheckFailed;
  }
  return kInternalError;
}

std::vector<Scene> load_scene_dir(const fs::path & dir)
{
  if (!fs::is_directory(dir)) {
    throw IoError("data directory '" + dir.string() + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw IoError("no scene files in '" + dir.string() + "'");
  }
  std::vector<Scene> scenes;
  scenes.reserve(files.size());
  for (const auto & f : files) {
    scenes.push_back(load_scene_file(f));
  }
  return scenes;
}

int gen_data(const RunConfig & config, std::ostream & out)
{
  const fs::path dir(config.paths.data_dir);
  fs::create_directories(dir);
  for (int i = 0; i < config.num_scenes; ++i) {
    const std::uint64_t seed = config.seed ^ fnv1a64("scene/" + std::to_string(i));
    save_scene_file(generate_synthetic(config.scene_gen, seed), dir / scene_file_name(i));
  }
  out << "wrote " << config.num_scenes << " scenes to " << dir.string() << '\n';
  return kOk;
}

int train(const RunConfig & config, std::ostream & out)
{
  const std::vector<Scene> scenes = load_scene_dir(config.paths.data_dir);
  const std::vector<TrainSample> samples = make_samples(scenes, config.model);
  return config.precision == Precision::F32 ? train_as<float>(config, samples, out)
                                            : train_as<double>(config, samples, out);
}

int predict(const RunConfig & config, std::ostream & out)
{
  const Checkpoint ckpt = load_checkpoint(config.paths.checkpoint);
  const auto model = ckpt.meta.find("model");
  if (model == ckpt.meta.end() || model->second != config.model_json()) {
    throw ConfigError("checkpoint '" + config.paths.checkpoint +
                      "' was trained with a different model configuration");
  }
  const auto precision = ckpt.meta.find("precision");
  const bool f64 = precision != ckpt.meta.end() && precision->second == "f64";
  const std::vector<Scene> scenes = load_scene_dir(config.paths.data_dir);
  PredictionFile file;
  file.config_hash = config.hash();
  file.predictions = f64 ? predict_as<double>(config, ckpt, scenes) : predict_as<float>(config, ckpt, scenes);
  const fs::path path(config.paths.predictions);
  ensure_parent(path);
  save_predictions_file(file, path);
  out << "wrote " << file.predictions.size() << " forecasts to " << path.string() << '\n';
  return kOk;
}

int eval(const RunConfig & config, std::ostream & out)
{
  const PredictionFile file = load_predictions_file(config.paths.predictions);
  const std::vector<Scene> scenes = load_scene_dir(config.paths.data_dir);
  const MetricReport report = evaluate(file.predictions, scenes);
  const fs::path path(config.paths.report);
  ensure_parent(path);
  write_text_file(path, report.to_json(config.hash()) + "\n");
  out << report.to_table();
  return kOk;
}

int ensemble(const RunConfig & config, const fs::path & manifest, std::ostream & out)
{
  using nlohmann::json;
  json root;
  try {
    root = json::parse(read_text_file(manifest));
  } catch (const json::parse_error & e) {
    throw ParseError("manifest", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_array() || root.empty()) {
    throw ParseError("manifest", "expected a non-empty array of sub-models");
  }
  const fs::path base = manifest.parent_path();
  std::vector<SubmodelPrediction> models;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json & m = root[i];
    const std::string field = "manifest[" + std::to_string(i) + "]";
    if (!m.is_object()) {
      throw ParseError(field, "expected an object");
    }
    for (const auto & [key, value] : m.items()) {
      if (key != "model_id" && key != "alpha" && key != "prediction_file") {
        throw ParseError(field + "." + key, "unknown key");
      }
    }
    if (!m.contains("model_id") || !m["model_id"].is_string()) {
      throw ParseError(field + ".model_id", "expected a string");
    }
    if (!m.contains("alpha") || !m["alpha"].is_number()) {
      throw ParseError(field + ".alpha", "expected a number");
    }
    if (!m.contains("prediction_file") || !m["prediction_file"].is_string()) {
      throw ParseError(field + ".prediction_file", "expected a string");
    }
    fs::path file(m["prediction_file"].get<std::string>());
    if (file.is_relative()) {
      file = base / file;
    }
    models.push_back({m["model_id"].get<std::string>(), m["alpha"].get<double>(),
                      load_predictions_file(file).predictions});
  }

  std::vector<double> alphas;
  for (const auto & m : models) {
    alphas.push_back(m.alpha);
  }
  const std::vector<double> factors = model_factors(alphas);
  for (std::size_t i = 0; i < models.size(); ++i) {
    out << models[i].model_id << " alpha=" << format_double("%.4f", models[i].alpha)
        << " factor=" << format_double("%.6f", factors[i]) << '\n';
  }

  PredictionFile fused;
  fused.config_hash = config.hash();
  for (auto & f : fuse(models, config.seed, config.ensemble_modes)) {
    fused.predictions.push_back(std::move(f.forecast));
  }
  const fs::path path(config.paths.predictions);
  ensure_parent(path);
  save_predictions_file(fused, path);
  out << "wrote " << fused.predictions.size() << " fused forecasts to " << path.string() << '\n';
  return kOk;
}

int grad_check(const RunConfig & config, std::ostream & out)
{
  constexpr double kTolerance = 1e-4;
  bool ok = true;
  char line[256];
  std::snprintf(line, sizeof(line), "%-26s %12s  %-8s %s\n", "block", "max_rel_err", "seconds", "status");
  out << line;
  for (const BlockCheck & c : run_block_checks(config.seed, kTolerance)) {
    std::snprintf(line, sizeof(line), "%-26s %12.3e  %-8.2f %s\n", c.block.c_str(), c.result.max_rel_error,
                  c.seconds, c.passed ? "ok" : "FAIL");
    out << line;
    if (!c.passed) {
      out << "  worst " << c.result.worst_param << '[' << c.result.worst_index << "] analytic "
          << format_double("%.6e", c.result.worst_analytic) << " numeric "
          << format_double("%.6e", c.result.worst_numeric) << '\n';
    }
    ok = ok && c.passed;
  }
  return ok ? kOk : kCheckFailed;
}

int lr_table(const RunConfig & config, std::ostream & out)
{
  const LrSchedule & s = config.train.schedule;
  for (int e = 0; e < s.total_epochs; ++e) {
    out << e << '\t' << format_double("%.6e", s.lr_at(e)) << '\n';
  }
  return kOk;
}

}  // namespace bfc::cli
