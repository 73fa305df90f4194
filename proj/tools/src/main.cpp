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
#include "run_config.hpp"

#include "bfc/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

struct Overrides
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> precision;
  std::optional<std::string> data_dir;
  std::optional<std::string> checkpoint;
  std::optional<std::string> log;
  std::optional<std::string> predictions;
  std::optional<std::string> report;
};

bfc::cli::RunConfig resolve(const Overrides & o)
{
  bfc::cli::RunConfig c =
    o.config_path.empty() ? bfc::cli::parse_run_config("{}") : bfc::cli::load_run_config(o.config_path);
  if (o.seed) {
    c.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  if (o.precision) {
    if (*o.precision != "f32" && *o.precision != "f64") {
      throw bfc::ConfigError("--precision must be f32 or f64");
    }
    c.precision = *o.precision == "f32" ? bfc::cli::Precision::F32 : bfc::cli::Precision::F64;
  }
  if (o.data_dir) c.paths.data_dir = *o.data_dir;
  if (o.checkpoint) c.paths.checkpoint = *o.checkpoint;
  if (o.log) c.paths.log = *o.log;
  if (o.predictions) c.paths.predictions = *o.predictions;
  if (o.report) c.paths.report = *o.report;
  return c;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"bfc: lane and boundary aware motion forecasting"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config_path, "Run config (JSON); defaults apply when omitted");
  app.add_option("--seed", o.seed, "Override the config seed");
  app.add_option("--precision", o.precision, "Override the training precision (f32 or f64)");

  auto * gen = app.add_subcommand("gen-data", "Write synthetic scenes");
  gen->add_option("--data-dir", o.data_dir, "Output directory");

  auto * train = app.add_subcommand("train", "Two-stage training; writes checkpoint and epoch log");
  train->add_option("--data-dir", o.data_dir, "Scene directory");
  train->add_option("--checkpoint", o.checkpoint, "Output checkpoint");
  train->add_option("--log", o.log, "Output JSON-lines log");

  auto * predict = app.add_subcommand("predict", "Forecast every focal actor");
  predict->add_option("--data-dir", o.data_dir, "Scene directory");
  predict->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  predict->add_option("-o,--out", o.predictions, "Output prediction file");

  auto * eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--data-dir", o.data_dir, "Scene directory");
  eval->add_option("-p,--predictions", o.predictions, "Prediction file");
  eval->add_option("-o,--out", o.report, "Output report");

  std::string manifest;
  auto * ens = app.add_subcommand("ensemble", "Fuse sub-model predictions");
  ens->add_option("-m,--manifest", manifest, "Manifest of sub-models")->required();
  ens->add_option("-o,--out", o.predictions, "Output prediction file");

  auto * check = app.add_subcommand("grad-check", "Finite-difference check of every block");
  auto * lr = app.add_subcommand("lr-table", "Print the learning rate of every epoch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? bfc::cli::kOk : bfc::cli::kUserError;
  }

  try {
    const bfc::cli::RunConfig config = resolve(o);
    if (gen->parsed()) return bfc::cli::gen_data(config, std::cout);
    if (train->parsed()) return bfc::cli::train(config, std::cout);
    if (predict->parsed()) return bfc::cli::predict(config, std::cout);
    if (eval->parsed()) return bfc::cli::eval(config, std::cout);
    if (ens->parsed()) return bfc::cli::ensemble(config, manifest, std::cout);
    if (check->parsed()) return bfc::cli::grad_check(config, std::cout);
    if (lr->parsed()) return bfc::cli::lr_table(config, std::cout);
  } catch (const std::exception & e) {
    const int code = bfc::cli::exit_code_for(e);
    std::cerr << (code == bfc::cli::kInternalError ? "internal error: " : "error: ") << e.what() << '\n';
    return code;
  }
  return bfc::cli::kInternalError;
}
