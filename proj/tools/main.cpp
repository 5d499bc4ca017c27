// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
// rigidtraj: estimate and smooth rigid-object trajectories from masked lidar
// sequences, and evaluate them against ground truth.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "rigidtraj/config.hpp"
#include "rigidtraj/ctsmooth.hpp"
#include "rigidtraj/io.hpp"
#include "rigidtraj/logging.hpp"
#include "rigidtraj/moteval.hpp"
#include "rigidtraj/pipeline.hpp"
#include "rigidtraj/synthgen.hpp"

namespace fs = std::filesystem;
using namespace rigidtraj;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitConfigError = 2;

PipelineConfig make_config(const std::vector<std::string>& overrides) {
  PipelineConfig config;
  for (const auto& expr : overrides) {
    apply_override_expr(config, expr);
  }
  return config;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir) {
  const synth::ScenarioConfig config =
      parse_scenario_config(fs::path(config_path));
  const synth::Scenario scenario = synth::generate(config);
  synth::emit(scenario, fs::path(out_dir));
  logx::event(logx::Level::Info, "generate.done",
              {{"frames", std::to_string(config.frame_count)},
               {"objects", std::to_string(config.objects.size())},
               {"out", out_dir}});
  return kExitOk;
}

int cmd_run(const std::string& sequence_dir, const std::string& out_dir,
            const std::vector<std::string>& overrides) {
  const PipelineConfig config = make_config(overrides);
  const SequenceData sequence = load_sequence(fs::path(sequence_dir));
  const RunOutput output = run_pipeline(sequence, config);
  write_run_outputs(fs::path(out_dir), output, config);
  std::printf("%zu instances (%zu static), outputs in %s\n",
              output.instances.size(),
              static_cast<size_t>(std::count_if(
                  output.instances.begin(), output.instances.end(),
                  [](const InstanceResult& r) { return r.is_static; })),
              out_dir.c_str());
  return kExitOk;
}

int cmd_register(const std::string& sequence_dir, const std::string& out_dir,
                 const std::vector<std::string>& overrides) {
  const PipelineConfig config = make_config(overrides);
  const SequenceData sequence = load_sequence(fs::path(sequence_dir));
  const RunOutput output = run_registration(sequence, config);
  fs::create_directories(out_dir);
  for (const auto& r : output.instances) {
    char name[48];
    std::snprintf(name, sizeof(name), "trajectory_measured_%06d.json",
                  r.instance_id);
    io::TrajectoryFile f;
    f.instance_id = r.instance_id;
    f.kind = "measured";
    f.canonical_point_count =
        static_cast<int64_t>(r.measured.canonical_points.size());
    for (const auto& [t, m] : r.measured.measurements) {
      io::TrajectoryStateRecord s;
      s.t = t;
      s.pose = m.pose;
      s.fitness = m.fitness;
      s.measured = true;
      f.states.push_back(s);
    }
    io::write_trajectory(fs::path(out_dir) / name, f);
  }
  return kExitOk;
}

int cmd_smooth(const std::string& measured_path, const std::string& out_path,
               double dt, const std::vector<std::string>& overrides) {
  const PipelineConfig config = make_config(overrides);
  const io::TrajectoryFile in = io::read_trajectory(fs::path(measured_path));

  reg::MeasuredTrajectory measured;
  measured.instance_id = in.instance_id;
  for (const auto& s : in.states) {
    measured.measurements[s.t] = {s.pose, s.fitness.value_or(1.0)};
  }
  if (measured.measurements.empty()) {
    throw Error("smooth: trajectory file has no states");
  }
  // Densest frame unknown from the file; anchor on the first state.
  measured.t_init = measured.measurements.begin()->first;

  // Uniform grid spanning the measurements at the given dt.
  const double t0 = measured.measurements.begin()->first;
  const double t1 = measured.measurements.rbegin()->first;
  std::vector<double> grid;
  const int steps = std::max(0, static_cast<int>(std::llround((t1 - t0) / dt)));
  for (int k = 0; k <= steps; ++k) grid.push_back(t0 + k * dt);

  ct::SmoothedTrajectory smoothed;
  if (ct::classify_static(measured, config.static_displacement)) {
    smoothed = ct::make_static_trajectory(measured, grid);
  } else {
    smoothed = ct::smooth(measured, grid, config.smoother_params());
  }

  io::TrajectoryFile out;
  out.instance_id = in.instance_id;
  out.kind = "smoothed";
  out.is_static = smoothed.is_static;
  out.shared_rotation = smoothed.states.shared_rotation;
  for (size_t i = 0; i < smoothed.states.size(); ++i) {
    io::TrajectoryStateRecord s;
    s.t = smoothed.states.times[i];
    s.pose = smoothed.states.poses[i];
    s.speed = smoothed.states.speeds[i];
    s.curvature = smoothed.states.curvatures[i];
    s.measured = smoothed.measured[i];
    s.rejected = std::find(smoothed.rejected_times.begin(),
                           smoothed.rejected_times.end(),
                           smoothed.states.times[i]) !=
                 smoothed.rejected_times.end();
    out.states.push_back(s);
  }
  io::write_trajectory(fs::path(out_path), out);
  return kExitOk;
}

std::vector<io::TrackSeries> load_tracks_any(const fs::path& path) {
  // Accept either a combined tracks file or a single trajectory file.
  try {
    return io::read_tracks(path);
  } catch (const Error&) {
    const io::TrajectoryFile traj = io::read_trajectory(path);
    io::TrackSeries series;
    series.instance_id = traj.instance_id;
    for (const auto& s : traj.states) {
      series.states.emplace_back(s.t, s.pose.translation());
    }
    return {series};
  }
}

int cmd_eval(const std::string& gt_path, const std::string& pred_path,
             const std::string& out_path,
             const std::vector<std::string>& overrides) {
  const PipelineConfig config = make_config(overrides);
  const auto gt_frames = io::tracks_to_frames(load_tracks_any(gt_path));
  const auto pred_frames = io::tracks_to_frames(load_tracks_any(pred_path));
  const mot::TrackingReport report =
      mot::evaluate(gt_frames, pred_frames, config.mot_thresholds);
  if (!out_path.empty()) {
    io::write_report(fs::path(out_path), report);
  }
  std::fputs(io::render_report_table(report).c_str(), stdout);
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& inputs,
             const std::string& out_path) {
  std::vector<io::PlotSeries> series;
  for (const auto& input : inputs) {
    for (const auto& track : load_tracks_any(fs::path(input))) {
      io::PlotSeries s;
      s.label = fs::path(input).stem().string() + " #" +
                std::to_string(track.instance_id);
      for (const auto& [t, p] : track.states) s.points.push_back(p);
      series.push_back(std::move(s));
    }
  }
  io::write_svg_plot(fs::path(out_path), series);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigid-instance trajectory estimation and smoothing toolkit"};
  app.require_subcommand(1);

  std::vector<std::string> overrides;
  std::string arg_config, arg_out, arg_sequence, arg_gt, arg_pred, arg_in;
  double arg_dt = 0.1;
  std::vector<std::string> arg_inputs;

  const auto add_set_option = [&overrides](CLI::App* cmd) {
    cmd->add_option("--set", overrides,
                    "config override as dotted path=value, e.g. "
                    "register.iterations=5000");
  };

  auto* generate = app.add_subcommand(
      "generate", "generate a synthetic sequence from a scenario config");
  generate->add_option("config", arg_config, "scenario config JSON")
      ->required();
  generate->add_option("out", arg_out, "output sequence directory")->required();

  auto* run = app.add_subcommand(
      "run", "full pipeline: lift, cluster, register, smooth");
  run->add_option("sequence", arg_sequence, "sequence directory")->required();
  run->add_option("out", arg_out, "output directory")->required();
  add_set_option(run);

  auto* reg_cmd = app.add_subcommand(
      "register", "registration only: measured trajectories");
  reg_cmd->add_option("sequence", arg_sequence, "sequence directory")
      ->required();
  reg_cmd->add_option("out", arg_out, "output directory")->required();
  add_set_option(reg_cmd);

  auto* smooth_cmd =
      app.add_subcommand("smooth", "smooth one measured trajectory file");
  smooth_cmd->add_option("measured", arg_in, "measured trajectory JSON")
      ->required();
  smooth_cmd->add_option("out", arg_out, "smoothed trajectory JSON")
      ->required();
  smooth_cmd->add_option("--dt", arg_dt, "time grid step (s)");
  add_set_option(smooth_cmd);

  auto* eval = app.add_subcommand(
      "eval", "CLEAR-MOT evaluation of predictions against ground truth");
  eval->add_option("gt", arg_gt, "ground-truth tracks/trajectory file")
      ->required();
  eval->add_option("pred", arg_pred, "predicted tracks/trajectory file")
      ->required();
  eval->add_option("--out", arg_out, "report JSON path");
  add_set_option(eval);

  auto* plot = app.add_subcommand("plot", "plot trajectories as SVG");
  plot->add_option("inputs", arg_inputs, "tracks/trajectory files")
      ->required()
      ->expected(-1);
  plot->add_option("--out", arg_out, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(arg_config, arg_out);
    if (run->parsed()) return cmd_run(arg_sequence, arg_out, overrides);
    if (reg_cmd->parsed()) return cmd_register(arg_sequence, arg_out, overrides);
    if (smooth_cmd->parsed()) return cmd_smooth(arg_in, arg_out, arg_dt, overrides);
    if (eval->parsed()) return cmd_eval(arg_gt, arg_pred, arg_out, overrides);
    if (plot->parsed()) return cmd_plot(arg_inputs, arg_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDataError;
  }
  return kExitOk;
}
