// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "rigidtraj/logging.hpp"
#include "rigidtraj/rng.hpp"

namespace rigidtraj {

namespace fs = std::filesystem;

SequenceData load_sequence(const fs::path& dir) {
  SequenceData data;
  data.meta = io::read_sequence_meta(dir);
  const auto paths = io::list_sequence_frames(dir);
  if (paths.empty()) throw Error("sequence has no frames: " + dir.string());
  data.frames.reserve(paths.size());
  for (const auto& p : paths) {
    data.frames.push_back(io::read_sequence_frame(p));
  }
  std::sort(data.frames.begin(), data.frames.end(),
            [](const io::SequenceFrame& a, const io::SequenceFrame& b) {
              return a.lidar.timestamp < b.lidar.timestamp;
            });
  return data;
}

namespace {

struct GroupedObservations {
  std::map<int, std::vector<ingest::InstanceObservation>> per_instance;
  std::map<int, std::vector<double>> dropped;
};

GroupedObservations lift_and_group(const SequenceData& sequence,
                                   const PipelineConfig& config) {
  GroupedObservations out;
  for (const auto& frame : sequence.frames) {
    const auto observations = ingest::lift_instance_points(
        frame.lidar, frame.masks, sequence.meta.camera, config.max_range,
        config.erosion_radius);
    for (const auto& obs : observations) {
      const auto filtered = ingest::keep_largest_cluster(
          obs, config.dbscan_eps, config.dbscan_min_pts);
      if (!filtered.has_value()) {
        out.dropped[obs.instance_id].push_back(obs.timestamp);
        logx::event(logx::Level::Info, "cluster.all_noise",
                    {{"instance", std::to_string(obs.instance_id)},
                     {"t", std::to_string(obs.timestamp)}});
        continue;
      }
      out.per_instance[obs.instance_id].push_back(std::move(*filtered));
    }
  }
  return out;
}

}  // namespace

RunOutput run_pipeline(const SequenceData& sequence,
                       const PipelineConfig& config) {
  RunOutput out;
  for (const auto& f : sequence.frames) {
    out.grid_times.push_back(f.lidar.timestamp);
  }

  const GroupedObservations grouped = lift_and_group(sequence, config);
  const auto& per_instance = grouped.per_instance;
  const auto& dropped = grouped.dropped;

  std::vector<int> ids;
  for (const auto& [id, _] : per_instance) ids.push_back(id);

  std::vector<InstanceResult> results(ids.size());

  auto process_instance = [&](size_t i) {
    const int id = ids[i];
    const auto& observations = per_instance.at(id);

    InstanceResult result;
    result.instance_id = id;
    const auto dropped_it = dropped.find(id);
    if (dropped_it != dropped.end()) {
      result.dropped_observation_times = dropped_it->second;
    }

    reg::RansacParams params = config.ransac_params();
    params.seed = derive_seed(config.seed, static_cast<uint64_t>(id));
    result.measured = reg::build_trajectory(observations, params);
    logx::event(logx::Level::Info, "register.instance",
                {{"instance", std::to_string(id)},
                 {"measurements",
                  std::to_string(result.measured.measurements.size())},
                 {"failures",
                  std::to_string(result.measured.failed_times.size())}});

    result.is_static =
        ct::classify_static(result.measured, config.static_displacement);
    if (result.is_static) {
      result.smoothed =
          ct::make_static_trajectory(result.measured, out.grid_times);
    } else {
      try {
        result.smoothed = ct::smooth(result.measured, out.grid_times,
                                     config.smoother_params());
      } catch (const AllMeasurementsRejected&) {
        // Keep the raw trajectory, interpolated over the grid, and flag it.
        result.all_measurements_rejected = true;
        result.smoothed.instance_id = id;
        result.smoothed.states =
            ct::initialize_state(result.measured, out.grid_times);
        result.smoothed.measured =
            ct::measured_flags(result.measured, out.grid_times);
      }
    }
    result.smoothed.instance_id = id;
    logx::event(logx::Level::Info, "smooth.instance",
                {{"instance", std::to_string(id)},
                 {"static", result.is_static ? "true" : "false"},
                 {"rejected",
                  std::to_string(result.smoothed.rejected_times.size())}});
    results[i] = std::move(result);
  };

  // Worker-thread exceptions are captured and rethrown on the caller's
  // thread once the pool has drained.
  std::atomic<size_t> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= ids.size()) break;
      try {
        process_instance(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  int n_workers = config.workers > 0
                      ? config.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(ids.size())));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  out.instances = std::move(results);
  return out;
}

RunOutput run_registration(const SequenceData& sequence,
                           const PipelineConfig& config) {
  RunOutput out;
  for (const auto& f : sequence.frames) {
    out.grid_times.push_back(f.lidar.timestamp);
  }
  const GroupedObservations grouped = lift_and_group(sequence, config);
  for (const auto& [id, observations] : grouped.per_instance) {
    InstanceResult result;
    result.instance_id = id;
    const auto dropped_it = grouped.dropped.find(id);
    if (dropped_it != grouped.dropped.end()) {
      result.dropped_observation_times = dropped_it->second;
    }
    reg::RansacParams params = config.ransac_params();
    params.seed = derive_seed(config.seed, static_cast<uint64_t>(id));
    result.measured = reg::build_trajectory(observations, params);
    out.instances.push_back(std::move(result));
  }
  return out;
}

namespace {

io::TrajectoryFile measured_file(const InstanceResult& r) {
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
  return f;
}

io::TrajectoryFile smoothed_file(const InstanceResult& r) {
  io::TrajectoryFile f;
  f.instance_id = r.instance_id;
  f.kind = "smoothed";
  f.is_static = r.is_static;
  f.shared_rotation = r.smoothed.states.shared_rotation;
  const auto& st = r.smoothed.states;
  for (size_t i = 0; i < st.size(); ++i) {
    io::TrajectoryStateRecord s;
    s.t = st.times[i];
    s.pose = st.poses[i];
    if (!st.speeds.empty()) s.speed = st.speeds[i];
    if (!st.curvatures.empty()) s.curvature = st.curvatures[i];
    s.measured = i < r.smoothed.measured.size() && r.smoothed.measured[i];
    s.rejected = std::find(r.smoothed.rejected_times.begin(),
                           r.smoothed.rejected_times.end(),
                           st.times[i]) != r.smoothed.rejected_times.end();
    f.states.push_back(s);
  }
  return f;
}

}  // namespace

void write_run_outputs(const fs::path& out_dir, const RunOutput& output,
                       const PipelineConfig& config) {
  fs::create_directories(out_dir);

  std::vector<io::TrackSeries> tracks;
  io::JsonWriter summary;
  summary.begin_object();
  summary.key("instances");
  summary.begin_array();
  int static_count = 0;
  for (const auto& r : output.instances) {
    char name[48];
    std::snprintf(name, sizeof(name), "trajectory_measured_%06d.json",
                  r.instance_id);
    io::write_trajectory(out_dir / name, measured_file(r));
    std::snprintf(name, sizeof(name), "trajectory_smoothed_%06d.json",
                  r.instance_id);
    io::write_trajectory(out_dir / name, smoothed_file(r));

    io::TrackSeries series;
    series.instance_id = r.instance_id;
    for (size_t i = 0; i < r.smoothed.states.size(); ++i) {
      series.states.emplace_back(r.smoothed.states.times[i],
                                 r.smoothed.states.poses[i].translation());
    }
    tracks.push_back(std::move(series));

    if (r.is_static) ++static_count;
    summary.begin_object();
    summary.key("all_measurements_rejected");
    summary.value(r.all_measurements_rejected);
    summary.key("dropped_observations");
    summary.value(static_cast<int64_t>(r.dropped_observation_times.size()));
    summary.key("failed_registrations");
    summary.begin_array();
    for (double t : r.measured.failed_times) summary.value(t);
    summary.end_array();
    summary.key("id");
    summary.value(r.instance_id);
    summary.key("is_static");
    summary.value(r.is_static);
    summary.key("measurements");
    summary.value(static_cast<int64_t>(r.measured.measurements.size()));
    summary.key("rejected_times");
    summary.begin_array();
    for (double t : r.smoothed.rejected_times) summary.value(t);
    summary.end_array();
    summary.end_object();
  }
  summary.end_array();
  summary.key("seed");
  summary.value(config.seed);
  summary.key("static_count");
  summary.value(static_cast<int64_t>(static_count));
  summary.end_object();

  io::write_tracks(out_dir / "tracks.json", tracks);
  std::string text = summary.take();
  text += '\n';
  io::write_text_file(out_dir / "summary.json", text);

  std::vector<io::PlotSeries> plot;
  for (const auto& r : output.instances) {
    io::PlotSeries smoothed;
    smoothed.label = "instance " + std::to_string(r.instance_id);
    for (const auto& p : r.smoothed.states.poses) {
      smoothed.points.push_back(p.translation());
    }
    plot.push_back(std::move(smoothed));
  }
  io::write_svg_plot(out_dir / "plot.svg", plot);
}

}  // namespace rigidtraj
