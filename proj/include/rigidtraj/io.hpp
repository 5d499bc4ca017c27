// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/geometry.hpp"
#include "rigidtraj/ingest.hpp"
#include "rigidtraj/moteval.hpp"

namespace rigidtraj::io {

// --- deterministic JSON emission ---
// All on-disk records are UTF-8 JSON with alphabetically ordered keys and
// floats printed at 17 significant digits, so identical values always
// serialize to identical bytes.

/// %.17g; non-finite values become "null".
std::string fmt_double(double v);

/// Streaming JSON writer. The caller is responsible for emitting keys in
/// sorted order; the writer handles commas and nesting.
class JsonWriter {
 public:
  void begin_object();
  void end_object();
  void begin_array();
  void end_array();
  void key(std::string_view k);
  void value(double v);
  void value(int v) { value(static_cast<int64_t>(v)); }
  void value(int64_t v);
  void value(uint64_t v);
  void value(bool v);
  void value(std::string_view s);
  void value_null();
  std::string take() { return std::move(out_); }

 private:
  void separator();
  std::string out_;
  std::vector<bool> first_;  // per nesting level
  bool pending_key_ = false;
};

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// --- run-length-encoded bitmaps ---
// Row-major scan; counts alternate starting with the number of false pixels.

std::vector<int64_t> rle_encode(const ingest::Bitmap& bitmap);
ingest::Bitmap rle_decode(int width, int height,
                          const std::vector<int64_t>& counts);

// --- pose serialization ---

/// Unit quaternion (w, x, y, z) with the sign normalized to w >= 0.
std::array<double, 4> quat_wxyz(const Mat3& rotation);
Mat3 quat_to_mat(const std::array<double, 4>& wxyz);

// --- trajectory files ---

struct TrajectoryStateRecord {
  double t = 0.0;
  geom::Pose pose;
  std::optional<double> speed;
  std::optional<double> curvature;
  std::optional<double> fitness;
  bool measured = false;
  bool rejected = false;
};

struct TrajectoryFile {
  int instance_id = 0;
  std::string kind;  // "ground_truth" | "measured" | "smoothed"
  std::vector<TrajectoryStateRecord> states;
  std::optional<Mat3> shared_rotation;
  bool is_static = false;
  std::optional<int64_t> canonical_point_count;
};

void write_trajectory(const std::filesystem::path& path,
                      const TrajectoryFile& traj);
TrajectoryFile read_trajectory(const std::filesystem::path& path);

// --- multi-object track files (eval input) ---

struct TrackSeries {
  int instance_id = 0;
  std::vector<std::pair<double, Vec3>> states;  // (t, position)
};

void write_tracks(const std::filesystem::path& path,
                  const std::vector<TrackSeries>& tracks);
std::vector<TrackSeries> read_tracks(const std::filesystem::path& path);

/// Groups track states into per-timestamp frames, sorted by time.
std::vector<mot::TrackFrame> tracks_to_frames(
    const std::vector<TrackSeries>& tracks);

// --- tracking reports ---

void write_report(const std::filesystem::path& path,
                  const mot::TrackingReport& report);
mot::TrackingReport read_report(const std::filesystem::path& path);

/// Plain-text table, one row per threshold, columns in the order
/// threshold, frames, objects, predictions, matches, switches, FP, FN,
/// MOTA, MOTP, recall, precision.
std::string render_report_table(const mot::TrackingReport& report);

// --- sequence directories ---
// meta.json + frames/frame_%05d.json (+ optional gt/ written by the
// generator).

struct SequenceMeta {
  double dt = 0.1;
  int frame_count = 0;
  uint64_t seed = 0;
  int descriptor_dim = 0;
  ingest::CameraModel camera;
};

struct SequenceFrame {
  ingest::LidarFrame lidar;
  std::vector<ingest::InstanceMask> masks;
};

void write_sequence_meta(const std::filesystem::path& dir,
                         const SequenceMeta& meta);
SequenceMeta read_sequence_meta(const std::filesystem::path& dir);
void write_sequence_frame(const std::filesystem::path& dir, int index,
                          const SequenceFrame& frame);
SequenceFrame read_sequence_frame(const std::filesystem::path& path);
std::vector<std::filesystem::path> list_sequence_frames(
    const std::filesystem::path& dir);

// --- trajectory plots ---

struct PlotSeries {
  std::string label;
  std::vector<Vec3> points;
};

/// x-y top-down polyline plot as a standalone SVG.
void write_svg_plot(const std::filesystem::path& path,
                    const std::vector<PlotSeries>& series);

}  // namespace rigidtraj::io
