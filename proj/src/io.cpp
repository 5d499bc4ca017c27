// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/io.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace rigidtraj::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void JsonWriter::separator() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (first_.back()) {
      first_.back() = false;
    } else {
      out_ += ',';
    }
  }
}

void JsonWriter::begin_object() {
  separator();
  out_ += '{';
  first_.push_back(true);
}

void JsonWriter::end_object() {
  out_ += '}';
  first_.pop_back();
}

void JsonWriter::begin_array() {
  separator();
  out_ += '[';
  first_.push_back(true);
}

void JsonWriter::end_array() {
  out_ += ']';
  first_.pop_back();
}

void JsonWriter::key(std::string_view k) {
  if (first_.back()) {
    first_.back() = false;
  } else {
    out_ += ',';
  }
  out_ += '"';
  out_.append(k);
  out_ += "\":";
  pending_key_ = true;
}

void JsonWriter::value(double v) {
  separator();
  out_ += fmt_double(v);
}

void JsonWriter::value(int64_t v) {
  separator();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%" PRId64, v);
  out_ += buf;
}

void JsonWriter::value(uint64_t v) {
  separator();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
  out_ += buf;
}

void JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
}

void JsonWriter::value(std::string_view s) {
  separator();
  out_ += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out_ += "\\\"";
        break;
      case '\\':
        out_ += "\\\\";
        break;
      case '\n':
        out_ += "\\n";
        break;
      case '\t':
        out_ += "\\t";
        break;
      case '\r':
        out_ += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out_ += buf;
        } else {
          out_ += c;
        }
    }
  }
  out_ += '"';
}

void JsonWriter::value_null() {
  separator();
  out_ += "null";
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }
}

Vec3 to_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void write_vec3(JsonWriter& w, const Vec3& v) {
  w.begin_array();
  w.value(v.x());
  w.value(v.y());
  w.value(v.z());
  w.end_array();
}

void write_mat3(JsonWriter& w, const Mat3& m) {
  w.begin_array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) w.value(m(r, c));
  }
  w.end_array();
}

Mat3 to_mat3(const json& j) {
  if (!j.is_array() || j.size() != 9) throw Error("expected 9-element matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j[r * 3 + c].get<double>();
  }
  return m;
}

}  // namespace

std::vector<int64_t> rle_encode(const ingest::Bitmap& bitmap) {
  std::vector<int64_t> counts;
  bool current = false;  // runs start with the false count
  int64_t run = 0;
  for (uint8_t b : bitmap.data) {
    const bool v = b != 0;
    if (v == current) {
      ++run;
    } else {
      counts.push_back(run);
      current = v;
      run = 1;
    }
  }
  counts.push_back(run);
  return counts;
}

ingest::Bitmap rle_decode(int width, int height,
                          const std::vector<int64_t>& counts) {
  ingest::Bitmap out(width, height);
  size_t pos = 0;
  bool current = false;
  for (int64_t run : counts) {
    if (run < 0) throw Error("rle: negative run length");
    for (int64_t k = 0; k < run; ++k) {
      if (pos >= out.data.size()) throw Error("rle: runs exceed bitmap size");
      out.data[pos++] = current ? 1 : 0;
    }
    current = !current;
  }
  if (pos != out.data.size()) throw Error("rle: runs do not cover bitmap");
  return out;
}

std::array<double, 4> quat_wxyz(const Mat3& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  std::array<double, 4> out = {q.w(), q.x(), q.y(), q.z()};
  // canonical sign: first nonzero of (w, x, y, z) is positive
  for (double c : out) {
    if (c > 0.0) break;
    if (c < 0.0) {
      for (double& o : out) o = -o;
      break;
    }
  }
  return out;
}

Mat3 quat_to_mat(const std::array<double, 4>& wxyz) {
  Eigen::Quaterniond q(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
  if (q.norm() < 1e-12) throw Error("quaternion with zero norm");
  q.normalize();
  return q.toRotationMatrix();
}

namespace {

void write_pose_fields(JsonWriter& w, const geom::Pose& pose) {
  // caller has the enclosing object open; keys p < q
  w.key("p");
  write_vec3(w, pose.translation());
  w.key("q");
  const auto q = quat_wxyz(pose.rotation());
  w.begin_array();
  for (double c : q) w.value(c);
  w.end_array();
}

geom::Pose read_pose_fields(const json& j) {
  const auto& qj = j.at("q");
  if (!qj.is_array() || qj.size() != 4) throw Error("expected quaternion");
  std::array<double, 4> q = {qj[0].get<double>(), qj[1].get<double>(),
                             qj[2].get<double>(), qj[3].get<double>()};
  return geom::Pose(quat_to_mat(q), to_vec3(j.at("p")));
}

}  // namespace

void write_trajectory(const fs::path& path, const TrajectoryFile& traj) {
  JsonWriter w;
  w.begin_object();
  if (traj.canonical_point_count) {
    w.key("canonical_point_count");
    w.value(*traj.canonical_point_count);
  }
  w.key("instance_id");
  w.value(traj.instance_id);
  w.key("is_static");
  w.value(traj.is_static);
  w.key("kind");
  w.value(std::string_view(traj.kind));
  if (traj.shared_rotation) {
    w.key("shared_rotation");
    write_mat3(w, *traj.shared_rotation);
  }
  w.key("states");
  w.begin_array();
  for (const auto& s : traj.states) {
    w.begin_object();
    if (s.fitness) {
      w.key("fitness");
      w.value(*s.fitness);
    }
    if (s.curvature) {
      w.key("kappa");
      w.value(*s.curvature);
    }
    w.key("measured");
    w.value(s.measured);
    write_pose_fields(w, s.pose);
    w.key("rejected");
    w.value(s.rejected);
    w.key("t");
    w.value(s.t);
    if (s.speed) {
      w.key("v");
      w.value(*s.speed);
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string text = w.take();
  text += '\n';
  write_text_file(path, text);
}

TrajectoryFile read_trajectory(const fs::path& path) {
  const json j = parse_file(path);
  TrajectoryFile out;
  try {
    out.instance_id = j.at("instance_id").get<int>();
    out.kind = j.at("kind").get<std::string>();
    out.is_static = j.value("is_static", false);
    if (j.contains("shared_rotation")) {
      out.shared_rotation = to_mat3(j.at("shared_rotation"));
    }
    if (j.contains("canonical_point_count")) {
      out.canonical_point_count = j.at("canonical_point_count").get<int64_t>();
    }
    for (const auto& sj : j.at("states")) {
      TrajectoryStateRecord s;
      s.t = sj.at("t").get<double>();
      s.pose = read_pose_fields(sj);
      if (sj.contains("v")) s.speed = sj.at("v").get<double>();
      if (sj.contains("kappa")) s.curvature = sj.at("kappa").get<double>();
      if (sj.contains("fitness")) s.fitness = sj.at("fitness").get<double>();
      s.measured = sj.value("measured", false);
      s.rejected = sj.value("rejected", false);
      out.states.push_back(s);
    }
  } catch (const json::exception& e) {
    throw Error("bad trajectory file " + path.string() + ": " + e.what());
  }
  return out;
}

void write_tracks(const fs::path& path, const std::vector<TrackSeries>& tracks) {
  std::vector<const TrackSeries*> ordered;
  for (const auto& t : tracks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const TrackSeries* a, const TrackSeries* b) {
              return a->instance_id < b->instance_id;
            });
  JsonWriter w;
  w.begin_object();
  w.key("kind");
  w.value(std::string_view("tracks"));
  w.key("tracks");
  w.begin_array();
  for (const auto* t : ordered) {
    w.begin_object();
    w.key("instance_id");
    w.value(t->instance_id);
    w.key("states");
    w.begin_array();
    for (const auto& [time, pos] : t->states) {
      w.begin_object();
      w.key("p");
      write_vec3(w, pos);
      w.key("t");
      w.value(time);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string text = w.take();
  text += '\n';
  write_text_file(path, text);
}

std::vector<TrackSeries> read_tracks(const fs::path& path) {
  const json j = parse_file(path);
  std::vector<TrackSeries> out;
  try {
    if (j.value("kind", "") != "tracks") {
      throw Error("not a tracks file: " + path.string());
    }
    for (const auto& tj : j.at("tracks")) {
      TrackSeries t;
      t.instance_id = tj.at("instance_id").get<int>();
      for (const auto& sj : tj.at("states")) {
        t.states.emplace_back(sj.at("t").get<double>(), to_vec3(sj.at("p")));
      }
      out.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error("bad tracks file " + path.string() + ": " + e.what());
  }
  return out;
}

std::vector<mot::TrackFrame> tracks_to_frames(
    const std::vector<TrackSeries>& tracks) {
  std::map<double, mot::TrackFrame> by_time;
  for (const auto& t : tracks) {
    for (const auto& [time, pos] : t.states) {
      auto& frame = by_time[time];
      frame.timestamp = time;
      frame.entries.push_back({t.instance_id, pos});
    }
  }
  std::vector<mot::TrackFrame> out;
  out.reserve(by_time.size());
  for (auto& [time, frame] : by_time) out.push_back(std::move(frame));
  return out;
}

void write_report(const fs::path& path, const mot::TrackingReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("empty_ground_truth");
  w.value(report.empty_ground_truth);
  w.key("thresholds");
  w.begin_array();
  for (const auto& m : report.per_threshold) {
    w.begin_object();
    w.key("false_negatives");
    w.value(static_cast<int64_t>(m.false_negatives));
    w.key("false_positives");
    w.value(static_cast<int64_t>(m.false_positives));
    w.key("frames");
    w.value(static_cast<int64_t>(m.frames));
    w.key("matches");
    w.value(static_cast<int64_t>(m.matches));
    w.key("mota");
    if (std::isfinite(m.mota)) {
      w.value(m.mota);
    } else {
      w.value_null();
    }
    w.key("motp");
    w.value(m.motp);
    w.key("objects");
    w.value(static_cast<int64_t>(m.objects));
    w.key("precision");
    w.value(m.precision);
    w.key("predictions");
    w.value(static_cast<int64_t>(m.predictions));
    w.key("recall");
    w.value(m.recall);
    w.key("switches");
    w.value(static_cast<int64_t>(m.switches));
    w.key("threshold");
    w.value(m.threshold);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string text = w.take();
  text += '\n';
  write_text_file(path, text);
}

mot::TrackingReport read_report(const fs::path& path) {
  const json j = parse_file(path);
  mot::TrackingReport out;
  try {
    out.empty_ground_truth = j.at("empty_ground_truth").get<bool>();
    for (const auto& mj : j.at("thresholds")) {
      mot::ThresholdMetrics m;
      m.threshold = mj.at("threshold").get<double>();
      m.frames = mj.at("frames").get<int64_t>();
      m.objects = mj.at("objects").get<int64_t>();
      m.predictions = mj.at("predictions").get<int64_t>();
      m.matches = mj.at("matches").get<int64_t>();
      m.switches = mj.at("switches").get<int64_t>();
      m.false_positives = mj.at("false_positives").get<int64_t>();
      m.false_negatives = mj.at("false_negatives").get<int64_t>();
      m.mota = mj.at("mota").is_null()
                   ? std::numeric_limits<double>::quiet_NaN()
                   : mj.at("mota").get<double>();
      m.motp = mj.at("motp").get<double>();
      m.recall = mj.at("recall").get<double>();
      m.precision = mj.at("precision").get<double>();
      out.per_threshold.push_back(m);
    }
  } catch (const json::exception& e) {
    throw Error("bad report file " + path.string() + ": " + e.what());
  }
  return out;
}

std::string render_report_table(const mot::TrackingReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%9s %7s %8s %12s %8s %9s %7s %7s %7s %7s %7s %10s\n",
                "threshold", "frames", "objects", "predictions", "matches",
                "switches", "fp", "fn", "mota", "motp", "recall", "precision");
  out += line;
  for (const auto& m : report.per_threshold) {
    std::snprintf(line, sizeof(line),
                  "%9.2f %7ld %8ld %12ld %8ld %9ld %7ld %7ld %7.3f %7.3f %7.3f %10.3f\n",
                  m.threshold, m.frames, m.objects, m.predictions, m.matches,
                  m.switches, m.false_positives, m.false_negatives, m.mota,
                  m.motp, m.recall, m.precision);
    out += line;
  }
  if (report.empty_ground_truth) {
    out += "warning: empty ground truth, MOTA undefined\n";
  }
  return out;
}

void write_sequence_meta(const fs::path& dir, const SequenceMeta& meta) {
  JsonWriter w;
  w.begin_object();
  w.key("camera");
  w.begin_object();
  w.key("extrinsic_p");
  write_vec3(w, meta.camera.extrinsic.translation());
  w.key("extrinsic_q");
  {
    const auto q = quat_wxyz(meta.camera.extrinsic.rotation());
    w.begin_array();
    for (double c : q) w.value(c);
    w.end_array();
  }
  w.key("height");
  w.value(meta.camera.height);
  w.key("intrinsics");
  write_mat3(w, meta.camera.intrinsics);
  w.key("width");
  w.value(meta.camera.width);
  w.end_object();
  w.key("descriptor_dim");
  w.value(meta.descriptor_dim);
  w.key("dt");
  w.value(meta.dt);
  w.key("frame_count");
  w.value(meta.frame_count);
  w.key("seed");
  w.value(meta.seed);
  w.end_object();
  std::string text = w.take();
  text += '\n';
  write_text_file(dir / "meta.json", text);
}

SequenceMeta read_sequence_meta(const fs::path& dir) {
  const json j = parse_file(dir / "meta.json");
  SequenceMeta meta;
  try {
    meta.dt = j.at("dt").get<double>();
    meta.frame_count = j.at("frame_count").get<int>();
    meta.seed = j.at("seed").get<uint64_t>();
    meta.descriptor_dim = j.at("descriptor_dim").get<int>();
    const auto& cj = j.at("camera");
    meta.camera.intrinsics = to_mat3(cj.at("intrinsics"));
    const auto& qj = cj.at("extrinsic_q");
    std::array<double, 4> q = {qj[0].get<double>(), qj[1].get<double>(),
                               qj[2].get<double>(), qj[3].get<double>()};
    meta.camera.extrinsic =
        geom::Pose(quat_to_mat(q), to_vec3(cj.at("extrinsic_p")));
    meta.camera.width = cj.at("width").get<int>();
    meta.camera.height = cj.at("height").get<int>();
  } catch (const json::exception& e) {
    throw Error("bad meta.json in " + dir.string() + ": " + e.what());
  }
  meta.camera.validate();
  return meta;
}

void write_sequence_frame(const fs::path& dir, int index,
                          const SequenceFrame& frame) {
  JsonWriter w;
  w.begin_object();
  w.key("descriptors");
  w.begin_array();
  for (const auto& d : frame.lidar.descriptors) {
    w.begin_array();
    for (int k = 0; k < d.size(); ++k) w.value(d(k));
    w.end_array();
  }
  w.end_array();
  w.key("masks");
  w.begin_array();
  for (const auto& m : frame.masks) {
    w.begin_object();
    w.key("class_label");
    w.value(std::string_view(m.class_label));
    w.key("frame_time");
    w.value(m.frame_time);
    w.key("height");
    w.value(m.bitmap.height);
    w.key("instance_id");
    w.value(m.instance_id);
    w.key("rle");
    w.begin_array();
    for (int64_t r : rle_encode(m.bitmap)) w.value(r);
    w.end_array();
    w.key("width");
    w.value(m.bitmap.width);
    w.end_object();
  }
  w.end_array();
  w.key("points");
  w.begin_array();
  for (const auto& p : frame.lidar.points) write_vec3(w, p);
  w.end_array();
  w.key("sensor_origin");
  write_vec3(w, frame.lidar.sensor_origin);
  w.key("timestamp");
  w.value(frame.lidar.timestamp);
  w.end_object();

  char name[32];
  std::snprintf(name, sizeof(name), "frame_%05d.json", index);
  std::string text = w.take();
  text += '\n';
  write_text_file(dir / "frames" / name, text);
}

SequenceFrame read_sequence_frame(const fs::path& path) {
  const json j = parse_file(path);
  SequenceFrame frame;
  try {
    frame.lidar.timestamp = j.at("timestamp").get<double>();
    frame.lidar.sensor_origin = to_vec3(j.at("sensor_origin"));
    for (const auto& pj : j.at("points")) {
      frame.lidar.points.push_back(to_vec3(pj));
    }
    for (const auto& dj : j.at("descriptors")) {
      VecX d(dj.size());
      for (size_t k = 0; k < dj.size(); ++k) d(k) = dj[k].get<double>();
      if (std::abs(d.norm() - 1.0) > 1e-6) {
        throw Error("descriptor without unit norm in " + path.string());
      }
      frame.lidar.descriptors.push_back(std::move(d));
    }
    if (frame.lidar.points.size() != frame.lidar.descriptors.size()) {
      throw Error("points/descriptors size mismatch in " + path.string());
    }
    for (const auto& mj : j.at("masks")) {
      ingest::InstanceMask m;
      m.instance_id = mj.at("instance_id").get<int>();
      if (m.instance_id <= 0) {
        throw Error("mask with non-positive instance id in " + path.string());
      }
      m.class_label = mj.at("class_label").get<std::string>();
      m.frame_time = mj.at("frame_time").get<double>();
      std::vector<int64_t> counts;
      for (const auto& rj : mj.at("rle")) counts.push_back(rj.get<int64_t>());
      m.bitmap = rle_decode(mj.at("width").get<int>(),
                            mj.at("height").get<int>(), counts);
      frame.masks.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error("bad frame file " + path.string() + ": " + e.what());
  }
  return frame;
}

std::vector<fs::path> list_sequence_frames(const fs::path& dir) {
  const fs::path frames_dir = dir / "frames";
  if (!fs::is_directory(frames_dir)) {
    throw Error("no frames directory in " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_svg_plot(const fs::path& path,
                    const std::vector<PlotSeries>& series) {
  static const char* kPalette[] = {"#1b6ca8", "#c23b22", "#2e8540",
                                   "#8038a8", "#b8860b", "#008080"};
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (first) {
        min_x = max_x = p.x();
        min_y = max_y = p.y();
        first = false;
      } else {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
      }
    }
  }
  const double span_x = std::max(max_x - min_x, 1e-6);
  const double span_y = std::max(max_y - min_y, 1e-6);
  const double span = std::max(span_x, span_y) * 1.1;
  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);
  const int size = 640;
  auto to_px = [&](double x) { return (x - (cx - span / 2)) / span * size; };
  auto to_py = [&](double y) {
    return size - (y - (cy - span / 2)) / span * size;
  };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                size, size, size, size);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  size_t color_idx = 0;
  for (const auto& s : series) {
    const char* color = kPalette[color_idx++ % 6];
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : s.points) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", to_px(p.x()),
                    to_py(p.y()));
      svg += buf;
    }
    svg += "\"/>\n";
    if (!s.points.empty()) {
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                    "fill=\"%s\">%s</text>\n",
                    to_px(s.points.front().x()),
                    to_py(s.points.front().y()) - 4.0, color,
                    s.label.c_str());
      svg += buf;
    }
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"6\" y=\"14\" font-size=\"11\" fill=\"#444\">x: "
                "%.1f..%.1f m, y: %.1f..%.1f m</text>\n",
                min_x, max_x, min_y, max_y);
  svg += buf;
  svg += "</svg>\n";
  write_text_file(path, svg);
}

}  // namespace rigidtraj::io
