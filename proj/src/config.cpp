// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/config.hpp"

#include <charconv>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "rigidtraj/io.hpp"

namespace rigidtraj {

using nlohmann::json;

reg::RansacParams PipelineConfig::ransac_params() const {
  reg::RansacParams p;
  p.iterations = ransac_iterations;
  p.min_similarity = min_similarity;
  p.fitness_radius = fitness_radius;
  p.fitness_threshold = fitness_threshold;
  p.max_points = max_points;
  p.seed = seed;
  return p;
}

ct::SmootherParams PipelineConfig::smoother_params() const {
  ct::SmootherParams p;
  p.noise.huber_threshold = huber_threshold;
  p.whitened_cutoff = whitened_cutoff;
  p.lm_max_iterations = lm_max_iterations;
  p.static_displacement = static_displacement;
  return p;
}

namespace {

double parse_double(std::string_view path, std::string_view value) {
  char* end = nullptr;
  const std::string s(value);
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw ConfigError("cannot parse number for " + std::string(path) + ": '" +
                      s + "'");
  }
  return v;
}

int64_t parse_int(std::string_view path, std::string_view value) {
  int64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("cannot parse integer for " + std::string(path) + ": '" +
                      std::string(value) + "'");
  }
  return v;
}

uint64_t parse_uint(std::string_view path, std::string_view value) {
  uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("cannot parse unsigned integer for " +
                      std::string(path) + ": '" + std::string(value) + "'");
  }
  return v;
}

void require(bool ok, std::string_view path, const char* what) {
  if (!ok) {
    throw ConfigError(std::string(path) + ": " + what);
  }
}

}  // namespace

void apply_override(PipelineConfig& c, std::string_view path,
                    std::string_view value) {
  if (path == "ingest.erosion_radius") {
    c.erosion_radius = static_cast<int>(parse_int(path, value));
    require(c.erosion_radius >= 0, path, "must be >= 0");
  } else if (path == "ingest.max_range") {
    c.max_range = parse_double(path, value);
    require(c.max_range > 0.0, path, "must be > 0");
  } else if (path == "ingest.dbscan_eps") {
    c.dbscan_eps = parse_double(path, value);
    require(c.dbscan_eps > 0.0, path, "must be > 0");
  } else if (path == "ingest.dbscan_min_pts") {
    c.dbscan_min_pts = static_cast<int>(parse_int(path, value));
    require(c.dbscan_min_pts >= 1, path, "must be >= 1");
  } else if (path == "register.min_similarity") {
    c.min_similarity = parse_double(path, value);
    require(c.min_similarity >= -1.0 && c.min_similarity <= 1.0, path,
            "must be in [-1, 1]");
  } else if (path == "register.iterations") {
    c.ransac_iterations = static_cast<int>(parse_int(path, value));
    require(c.ransac_iterations >= 1, path, "must be >= 1");
  } else if (path == "register.fitness_radius") {
    c.fitness_radius = parse_double(path, value);
    require(c.fitness_radius > 0.0, path, "must be > 0");
  } else if (path == "register.fitness_threshold") {
    c.fitness_threshold = parse_double(path, value);
    require(c.fitness_threshold >= 0.0 && c.fitness_threshold <= 1.0, path,
            "must be in [0, 1]");
  } else if (path == "register.max_points") {
    c.max_points = static_cast<int>(parse_int(path, value));
    require(c.max_points >= 3, path, "must be >= 3");
  } else if (path == "smooth.huber_threshold") {
    c.huber_threshold = parse_double(path, value);
    require(c.huber_threshold > 0.0, path, "must be > 0");
  } else if (path == "smooth.whitened_cutoff") {
    c.whitened_cutoff = parse_double(path, value);
    require(c.whitened_cutoff > 0.0, path, "must be > 0");
  } else if (path == "smooth.lm_max_iterations") {
    c.lm_max_iterations = static_cast<int>(parse_int(path, value));
    require(c.lm_max_iterations >= 1, path, "must be >= 1");
  } else if (path == "smooth.static_displacement") {
    c.static_displacement = parse_double(path, value);
    require(c.static_displacement >= 0.0, path, "must be >= 0");
  } else if (path == "eval.thresholds") {
    std::vector<double> thresholds;
    size_t start = 0;
    while (start <= value.size()) {
      size_t comma = value.find(',', start);
      if (comma == std::string_view::npos) comma = value.size();
      const auto item = value.substr(start, comma - start);
      if (!item.empty()) {
        const double t = parse_double(path, item);
        require(t > 0.0, path, "thresholds must be > 0");
        thresholds.push_back(t);
      }
      start = comma + 1;
      if (comma == value.size()) break;
    }
    require(!thresholds.empty(), path, "needs at least one threshold");
    c.mot_thresholds = thresholds;
  } else if (path == "seed") {
    c.seed = parse_uint(path, value);
  } else if (path == "workers") {
    c.workers = static_cast<int>(parse_int(path, value));
    require(c.workers >= 0, path, "must be >= 0");
  } else {
    throw ConfigError("unknown config path: " + std::string(path));
  }
}

void apply_override_expr(PipelineConfig& config, std::string_view expr) {
  const size_t eq = expr.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must be path=value, got '" + std::string(expr) +
                      "'");
  }
  apply_override(config, expr.substr(0, eq), expr.substr(eq + 1));
}

namespace {

void check_known_keys(const json& j, const std::set<std::string>& known,
                      const std::string& scope) {
  for (const auto& [key, _] : j.items()) {
    if (known.count(key) == 0) {
      throw ConfigError("unknown field " + scope + key);
    }
  }
}

Vec3 config_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(field + " must be a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::vector<double> config_profile(const json& j, const std::string& field) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array() && !j.empty()) {
    for (const auto& v : j) out.push_back(v.get<double>());
  } else {
    throw ConfigError(field + " must be a number or a non-empty array");
  }
  return out;
}

}  // namespace

synth::ScenarioConfig parse_scenario_config(
    const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text_file(path));
  } catch (const json::exception& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }

  synth::ScenarioConfig config;
  try {
    check_known_keys(j,
                     {"seed", "frame_count", "dt", "descriptor_dim",
                      "background_points", "sensor_origin", "camera",
                      "objects", "noise"},
                     "");
    if (j.contains("seed")) config.seed = j["seed"].get<uint64_t>();
    if (j.contains("frame_count")) {
      config.frame_count = j["frame_count"].get<int>();
    }
    if (j.contains("dt")) config.dt = j["dt"].get<double>();
    if (j.contains("descriptor_dim")) {
      config.descriptor_dim = j["descriptor_dim"].get<int>();
    }
    if (j.contains("background_points")) {
      config.background_points = j["background_points"].get<int>();
    }
    if (j.contains("sensor_origin")) {
      config.sensor_origin = config_vec3(j["sensor_origin"], "sensor_origin");
    }
    if (j.contains("camera")) {
      const auto& cj = j["camera"];
      check_known_keys(cj, {"fx", "fy", "cx", "cy", "width", "height"},
                       "camera.");
      auto& cam = config.camera;
      if (cj.contains("fx")) cam.intrinsics(0, 0) = cj["fx"].get<double>();
      if (cj.contains("fy")) cam.intrinsics(1, 1) = cj["fy"].get<double>();
      if (cj.contains("cx")) cam.intrinsics(0, 2) = cj["cx"].get<double>();
      if (cj.contains("cy")) cam.intrinsics(1, 2) = cj["cy"].get<double>();
      if (cj.contains("width")) cam.width = cj["width"].get<int>();
      if (cj.contains("height")) cam.height = cj["height"].get<int>();
    }
    if (j.contains("noise")) {
      const auto& nj = j["noise"];
      check_known_keys(nj,
                       {"point_sigma", "dropout_prob", "outlier_frame_prob",
                        "outlier_shift", "descriptor_sigma"},
                       "noise.");
      if (nj.contains("point_sigma")) {
        config.noise.point_sigma = nj["point_sigma"].get<double>();
      }
      if (nj.contains("dropout_prob")) {
        config.noise.dropout_prob = nj["dropout_prob"].get<double>();
      }
      if (nj.contains("outlier_frame_prob")) {
        config.noise.outlier_frame_prob =
            nj["outlier_frame_prob"].get<double>();
      }
      if (nj.contains("outlier_shift")) {
        config.noise.outlier_shift = nj["outlier_shift"].get<double>();
      }
      if (nj.contains("descriptor_sigma")) {
        config.noise.descriptor_sigma = nj["descriptor_sigma"].get<double>();
      }
    }
    if (j.contains("objects")) {
      for (const auto& oj : j["objects"]) {
        check_known_keys(oj,
                         {"id", "box", "point_count", "spawn_yaw",
                          "spawn_position", "speed", "curvature",
                          "min_visible_fraction"},
                         "objects[].");
        synth::ObjectSpec spec;
        spec.id = oj.at("id").get<int>();
        if (oj.contains("box")) {
          spec.box_dims = config_vec3(oj["box"], "objects[].box");
        }
        if (oj.contains("point_count")) {
          spec.point_count = oj["point_count"].get<int>();
        }
        if (oj.contains("spawn_yaw")) {
          spec.spawn_yaw = oj["spawn_yaw"].get<double>();
        }
        if (oj.contains("spawn_position")) {
          spec.spawn_position =
              config_vec3(oj["spawn_position"], "objects[].spawn_position");
        }
        if (oj.contains("speed")) {
          spec.speeds = config_profile(oj["speed"], "objects[].speed");
        }
        if (oj.contains("curvature")) {
          spec.curvatures =
              config_profile(oj["curvature"], "objects[].curvature");
        }
        if (oj.contains("min_visible_fraction")) {
          spec.min_visible_fraction = oj["min_visible_fraction"].get<double>();
        }
        config.objects.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad scenario config " + path.string() + ": " + e.what());
  }

  config.validate();
  return config;
}

}  // namespace rigidtraj
