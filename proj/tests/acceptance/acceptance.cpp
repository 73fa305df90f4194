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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "bfc/block_checks.hpp"
#include "bfc/encoder.hpp"
#include "bfc/ensemble.hpp"
#include "bfc/fusion.hpp"
#include "bfc/losses.hpp"
#include "bfc/metrics.hpp"
#include "bfc/optim.hpp"
#include "bfc/scene.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace
{

namespace fs = std::filesystem;
using bfc::Vec2;
using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string & what)
  {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char * f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string read_file(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Finite-difference checks of every block at the default seed.
Outcome gradient_correctness()
{
  Outcome o;
  const auto t0 = Clock::now();
  const auto results = bfc::run_block_checks(42, 1e-4, 1e-5);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto & r : results) {
    worst = std::max(worst, r.result.max_rel_error);
    o.require(r.passed, r.block + " rel error " + fmt("%.3e", r.result.max_rel_error));
  }
  const std::set<std::string> need{"actor_encoder", "gated_lane_graph_conv", "boundary_to_lane_fusion",
                                   "distance_attention", "decoder_stage1", "decoder_stage2",
                                   "pipeline_loss_S1", "pipeline_loss_S2"};
  std::set<std::string> have;
  for (const auto & r : results) have.insert(r.block);
  for (const auto & n : need) o.require(have.contains(n), "block " + n + " not checked");
  o.require(secs < 120.0, "runtime " + fmt("%.1f s", secs));
  if (o.pass) {
    o.detail = std::to_string(results.size()) + " blocks, max rel error " + fmt("%.2e", worst) + ", " +
               fmt("%.1f s", secs);
  }
  return o;
}

// 2. Loss oracles.
Outcome loss_oracles()
{
  Outcome o;
  const auto near = [&](double a, double b, const std::string & what) {
    o.require(std::abs(a - b) <= 1e-9, what + " = " + fmt("%.12g", a) + ", want " + fmt("%.12g", b));
  };
  const auto eq = bfc::gt_confidence_from_errors(std::vector<double>{0.8, 0.8, 0.8});
  for (double c : eq) near(c, 1.0 / 3.0, "equal D confidence");
  const auto c = bfc::gt_confidence_from_errors(std::vector<double>{0.0, std::log(3.0)});
  near(c[0], 0.75, "c[0]");
  near(c[1], 0.25, "c[1]");

  bfc::Rng rng(2);
  const auto simplex = [&](std::size_t k) {
    std::vector<double> p(k);
    double s = 0.0;
    for (double & v : p) s += (v = rng.uniform(0.001, 1.0));
    for (double & v : p) v /= s;
    return p;
  };
  double min_kl = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = simplex(6);
    const auto q = simplex(6);
    near(bfc::kl_divergence(p, p), 0.0, "KL(p||p)");
    min_kl = std::min(min_kl, bfc::kl_divergence(p, q));
  }
  o.require(min_kl >= 0.0, "negative KL " + fmt("%.3e", min_kl));
  near(bfc::kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}), std::log(2.0), "KL example");

  // Target loss: exact hit and a (0.5, 0) offset.
  bfc::TargetSample s{{{1.0, 2.0}, {5.0, 5.0}}, {1.0, 2.0}, true};
  near(bfc::target_loss(std::vector<bfc::TargetSample>{s}), 0.0, "target loss exact");
  s.gt_end = {1.5, 2.0};
  near(bfc::target_loss(std::vector<bfc::TargetSample>{s}), 0.0625, "target loss offset");

  // Trajectory loss: perfect, last step excluded, uniform 0.5 m offset.
  std::vector<Vec2> gt;
  for (int t = 1; t <= 6; ++t) gt.push_back({1.0 * t, 0.2 * t});
  const std::vector<bfc::TargetSample> ts{{{gt.back()}, gt.back(), true}};
  const std::vector<std::vector<Vec2>> truth{gt};
  auto traj = [&](const std::vector<Vec2> & s1) {
    return bfc::trajectory_loss(ts, std::vector<std::vector<bfc::Trajectory>>{{s1}}, truth);
  };
  near(traj(gt), 0.0, "trajectory loss perfect");
  auto last = gt;
  last.back() = last.back() + Vec2{4.0, 4.0};
  near(traj(last), 0.0, "trajectory loss last step");
  auto off = gt;
  for (auto & p : off) p = p + Vec2{0.5, 0.0};
  near(traj(off), 0.0625, "trajectory loss offset");
  if (o.pass) o.detail = "all cases within 1e-9 over 1000 random simplex pairs";
  return o;
}

// 3. Schedule values.
Outcome schedule_exactness()
{
  Outcome o;
  const bfc::LrSchedule s;
  const auto near = [&](double a, double b, const std::string & what) {
    o.require(std::abs(a - b) <= 1e-12, what + " = " + fmt("%.15g", a));
  };
  for (int e : {0, 6, 18, 42}) near(s.lr_at(e), 1e-3, "lr_at(" + std::to_string(e) + ")");
  near(s.lr_at(3), 5.05e-4, "lr_at(3)");
  for (double e = 90.0; e < 100.0; e += 0.5) near(s.lr_at(e), 1e-5, "lr_at(" + fmt("%.1f", e) + ")");
  const auto p = s.period_lengths();
  o.require(std::accumulate(p.begin(), p.end(), 0) == 90, "period lengths do not sum to 90");
  o.require(p.size() == 4, "expected 4 restart periods");
  if (o.pass) o.detail = "periods 6+12+24+48 = 90";
  return o;
}

struct PipelineRun
{
  fs::path dir;
  double train_seconds = 0.0;
  bool ok = true;
  std::string error;
};

PipelineRun run_pipeline(const fs::path & dir)
{
  PipelineRun r{dir};
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string tool = std::string("\"") + BFC_TOOL + "\" -c \"" + BFC_DESK_CONFIG + "\" ";
  const std::string d = "\"" + dir.string() + "/";
  const std::string quiet = " >> " + d + "out.txt\" 2>&1";
  const std::vector<std::pair<std::string, std::string>> steps{
    {"gen-data", "gen-data --data-dir " + d + "data\""},
    {"train", "train --data-dir " + d + "data\" --checkpoint " + d + "model.ckpt\" --log " + d + "log.jsonl\""},
    {"predict", "predict --data-dir " + d + "data\" --checkpoint " + d + "model.ckpt\" -o " + d + "pred.json\""},
    {"eval", "eval --data-dir " + d + "data\" -p " + d + "pred.json\" -o " + d + "report.json\""},
  };
  for (const auto & [name, args] : steps) {
    const auto t0 = Clock::now();
    const int rc = std::system((tool + args + quiet).c_str());
    if (name == "train") r.train_seconds = seconds_since(t0);
    if (rc != 0) {
      r.ok = false;
      r.error = name + " exited with status " + std::to_string(rc);
      return r;
    }
  }
  return r;
}

// 4. Desk-scale overfit.
Outcome overfit(const PipelineRun & run)
{
  Outcome o;
  if (!run.ok) {
    o.require(false, run.error);
    return o;
  }
  std::ifstream log(run.dir / "log.jsonl");
  std::vector<nlohmann::json> rows;
  for (std::string line; std::getline(log, line);) rows.push_back(nlohmann::json::parse(line));
  o.require(rows.size() == 200, "log has " + std::to_string(rows.size()) + " epochs");
  if (rows.size() < 7) return o;
  o.require(rows[5]["stage"] == "S1" && rows[5]["traj"].is_null(), "epoch 5 is not plain S1");
  o.require(rows[6]["stage"] == "S2" && rows[6]["traj"].is_number(), "epoch 6 is not S2 with traj");
  const double train_fde = rows.back()["minFDE6"].get<double>();
  const auto report = nlohmann::json::parse(read_file(run.dir / "report.json"));
  const double eval_fde = report["metrics"]["minFDE(6)"].get<double>();
  o.require(train_fde < 0.5, "final training minFDE6 " + fmt("%.4f", train_fde));
  o.require(eval_fde < 0.5, "evaluated minFDE(6) " + fmt("%.4f", eval_fde));
  o.require(run.train_seconds < 600.0, "training took " + fmt("%.1f s", run.train_seconds));
  if (o.pass) {
    o.detail = "train minFDE6 " + fmt("%.4f", train_fde) + ", eval minFDE(6) " + fmt("%.4f", eval_fde) +
               ", " + fmt("%.1f s", run.train_seconds) + ", S2 from epoch 6";
  }
  return o;
}

// 5. Metrics against brute force.
Outcome metric_equivalence()
{
  Outcome o;
  bfc::Rng rng(5);
  std::size_t mismatches = 0;
  std::size_t violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t t = 1 + rng.index(30);
    const bfc::Forecast f = bfc_test::random_forecast(rng, 6, t, rng.uniform(0.2, 5.0));
    std::vector<Vec2> gt;
    for (std::size_t s = 0; s < t; ++s) gt.push_back({rng.normal() * 2.0, rng.normal() * 2.0});
    const auto v = bfc::actor_metrics(f, gt);
    const auto b = bfc_test::brute_metrics(f, gt);
    const std::array<double, 8> want{b.brier_fde6, b.fde6, b.fde1, b.brier_ade6, b.ade6, b.ade1, b.mr6, b.mr1};
    for (std::size_t m = 0; m < 8; ++m) mismatches += v[m] != want[m];
    bfc::MetricReport r;
    r.values = v;
    violations += !r.invariant_violations(0.0).empty();
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " metric values differ");
  o.require(violations == 0, std::to_string(violations) + " reports violate invariants");
  if (o.pass) o.detail = "1000 pairs, 8000 values bit-identical";
  return o;
}

// 6. Ensemble properties.
Outcome ensemble_suite()
{
  Outcome o;
  const auto eq = bfc::model_factors(std::vector<double>(7, 2.0));
  for (double f : eq) o.require(std::abs(f - 1.0 / 7.0) <= 1e-15, "equal-alpha factor " + fmt("%.17g", f));

  bfc::Rng rng(6);
  bool monotone = true;
  const auto check_monotone = [&](const bfc::KMeansResult & r) {
    for (std::size_t i = 1; i < r.objective.size(); ++i) monotone = monotone && r.objective[i] <= r.objective[i - 1] + 1e-9;
  };
  std::vector<bfc::SubmodelPrediction> seven;
  for (int j = 0; j < 7; ++j) {
    seven.push_back({"m" + std::to_string(j), rng.uniform(0.5, 3.0), {bfc_test::random_forecast(rng, 6, 8, 6.0)}});
  }
  const auto fused = bfc::fuse(seven, 42);
  o.require(fused.size() == 1 && fused[0].pool_size == 42, "pool size is not 42");

  std::size_t recovered = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<Vec2> pts;
    std::vector<std::size_t> label;
    std::vector<double> w;
    for (std::size_t b = 0; b < 6; ++b) {
      const Vec2 c{80.0 * std::cos(b * 1.0471975511965976), 80.0 * std::sin(b * 1.0471975511965976)};
      for (int i = 0; i < 7; ++i) {
        pts.push_back(c + Vec2{rng.normal(), rng.normal()});
        label.push_back(b);
        w.push_back(rng.uniform(0.01, 1.0));
      }
    }
    const auto r = bfc::weighted_kmeans(pts, w, 6, seed);
    check_monotone(r);
    std::vector<std::set<std::size_t>> map(6);
    for (std::size_t i = 0; i < pts.size(); ++i) map[label[i]].insert(r.assignments[i]);
    std::set<std::size_t> images;
    bool ok = true;
    for (const auto & m : map) {
      ok = ok && m.size() == 1;
      images.insert(*m.begin());
    }
    recovered += ok && images.size() == 6;
  }
  o.require(recovered == 50, "planted blobs recovered for " + std::to_string(recovered) + " / 50 seeds");

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::vector<Vec2> pts;
    std::vector<double> w;
    for (int i = 0; i < 42; ++i) {
      pts.push_back({rng.normal() * 10.0, rng.normal() * 10.0});
      w.push_back(rng.uniform());
    }
    check_monotone(bfc::weighted_kmeans(pts, w, 6, seed));
  }
  o.require(monotone, "Lloyd objective increased");

  // N = 1 identity against evaluated metrics.
  const bfc::ModelConfig cfg = bfc_test::small_config();
  std::vector<bfc::Scene> scenes;
  bfc::SubmodelPrediction single{"only", 1.0, {}};
  for (std::uint64_t s = 0; s < 6; ++s) {
    scenes.push_back(bfc::generate_synthetic(bfc_test::scene_config(cfg), 500 + s));
    for (const auto & a : scenes.back().actors) {
      if (!a.is_focal) continue;
      auto f = bfc_test::random_forecast(rng, 6, a.future_gt->size(), 8.0);
      for (auto & traj : f.trajectories) {
        for (std::size_t i = 0; i < traj.size(); ++i) traj[i] = traj[i] + (*a.future_gt)[i];
      }
      f.scene_id = scenes.back().id;
      f.actor_id = a.id;
      single.forecasts.push_back(f);
    }
  }
  std::vector<bfc::Forecast> out;
  for (const auto & ff : bfc::fuse(std::vector<bfc::SubmodelPrediction>{single}, 42)) out.push_back(ff.forecast);
  const auto before = bfc::evaluate(single.forecasts, scenes);
  const auto after = bfc::evaluate(out, scenes);
  double diff = 0.0;
  for (std::size_t m = 0; m < bfc::kNumMetrics; ++m) diff = std::max(diff, std::abs(before.values[m] - after.values[m]));
  o.require(diff <= 1e-9, "N=1 metrics differ by " + fmt("%.3e", diff));
  if (o.pass) o.detail = "50/50 planted seeds, pool 42, N=1 metric diff " + fmt("%.1e", diff);
  return o;
}

// 7. Sparse implementations against dense oracles.
Outcome sparse_dense()
{
  Outcome o;
  bfc::Rng rng(7);
  const bfc::ModelConfig cfg = bfc_test::small_config(8);
  double worst_conv = 0.0;
  double worst_att = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(29);
    const bfc::LaneGraph g = bfc_test::random_graph(n, rng.index(3 * n + 1), rng);
    const bfc::GatedGraphConv conv("conv", 8);
    bfc::ParamStore<double> ps;
    conv.init(ps, rng);
    const auto x = bfc_test::random_matrix(n, 8, rng);
    bfc::Tape<double> tape;
    bfc::Binding<double> p(tape, ps, false);
    const auto y = conv(p, tape.constant(x), g).value();
    const auto ref = bfc_test::dense_gated_conv(bfc_test::from_tensor(x), g, ps, "conv");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 8; ++j) worst_conv = std::max(worst_conv, std::abs(y(i, j) - ref[i][j]));
    }

    const std::size_t nq = 1 + rng.index(15);
    const std::size_t nc = 1 + rng.index(20);
    const double tau = rng.uniform(1.0, 15.0);
    const bfc::DistanceAttention att(cfg, "att", tau);
    bfc::ParamStore<double> pa;
    att.init(pa, rng);
    const auto q = bfc_test::random_matrix(nq, 8, rng);
    const auto c = bfc_test::random_matrix(nc, 8, rng);
    std::vector<Vec2> qp, cp;
    for (std::size_t i = 0; i < nq; ++i) qp.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
    for (std::size_t i = 0; i < nc; ++i) cp.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
    bfc::Binding<double> pb(tape, pa, false);
    const auto ya = att(pb, tape.constant(q), bfc::Positions{qp, ""}, tape.constant(c), bfc::Positions{cp, ""}).value();
    const auto ra = bfc_test::dense_distance_attention(bfc_test::from_tensor(q), qp, bfc_test::from_tensor(c), cp,
                                                       tau, cfg.input_scale, pa, "att");
    for (std::size_t i = 0; i < nq; ++i) {
      for (std::size_t j = 0; j < 8; ++j) worst_att = std::max(worst_att, std::abs(ya(i, j) - ra[i][j]));
    }
  }
  o.require(worst_conv <= 1e-6, "gated conv max diff " + fmt("%.3e", worst_conv));
  o.require(worst_att <= 1e-6, "distance attention max diff " + fmt("%.3e", worst_att));
  if (o.pass) {
    o.detail = "200 graphs, max diff conv " + fmt("%.1e", worst_conv) + ", attention " + fmt("%.1e", worst_att);
  }
  return o;
}

// 8. Two identical CLI runs.
Outcome determinism(const PipelineRun & a, const PipelineRun & b)
{
  Outcome o;
  if (!a.ok || !b.ok) {
    o.require(false, a.ok ? b.error : a.error);
    return o;
  }
  for (const char * f : {"pred.json", "report.json", "model.ckpt", "log.jsonl"}) {
    const std::string x = read_file(a.dir / f);
    const std::string y = read_file(b.dir / f);
    o.require(!x.empty() && x == y, std::string(f) + " differs");
  }
  if (o.pass) o.detail = "predictions, report, checkpoint and log byte-identical";
  return o;
}

}  // namespace

int main()
{
  const fs::path root = fs::temp_directory_path() / ("bfc_acceptance_" + std::to_string(::getpid()));
  bool all = true;
  const auto report = [&](int n, const std::string & name, const std::function<Outcome()> & fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception & e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    all = all && o.pass;
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "gradient correctness", gradient_correctness);
  report(2, "loss oracles", loss_oracles);
  report(3, "schedule exactness", schedule_exactness);
  PipelineRun first;
  PipelineRun second;
  report(4, "desk overfit", [&] {
    first = run_pipeline(root / "run_a");
    return overfit(first);
  });
  report(5, "metric oracle equivalence", metric_equivalence);
  report(6, "ensemble suite", ensemble_suite);
  report(7, "sparse/dense equivalence", sparse_dense);
  report(8, "determinism", [&] {
    if (!first.ok || first.dir.empty()) first = run_pipeline(root / "run_a");
    second = run_pipeline(root / "run_b");
    return determinism(first, second);
  });
  fs::remove_all(root);
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
