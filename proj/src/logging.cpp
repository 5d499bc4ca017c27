// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/logging.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace rigidtraj::logx {

namespace {

Level parse_level() {
  const char* env = std::getenv("RIGIDTRAJ_LOG");
  if (env == nullptr) return Level::Warn;
  if (std::strcmp(env, "debug") == 0) return Level::Debug;
  if (std::strcmp(env, "info") == 0) return Level::Info;
  if (std::strcmp(env, "warn") == 0) return Level::Warn;
  if (std::strcmp(env, "error") == 0) return Level::Error;
  if (std::strcmp(env, "quiet") == 0) return Level::Quiet;
  return Level::Warn;
}

const char* level_name(Level l) {
  switch (l) {
    case Level::Debug:
      return "debug";
    case Level::Info:
      return "info";
    case Level::Warn:
      return "warn";
    case Level::Error:
      return "error";
    case Level::Quiet:
      return "quiet";
  }
  return "info";
}

void append_escaped(std::string& out, std::string_view s) {
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
}

std::mutex g_mutex;

}  // namespace

Level threshold() {
  static const Level level = parse_level();
  return level;
}

bool enabled(Level level) {
  return static_cast<int>(level) >= static_cast<int>(threshold());
}

void event(Level level, std::string_view name,
           std::initializer_list<std::pair<std::string_view, std::string>>
               fields) {
  if (!enabled(level)) return;
  std::string line = "{\"event\":\"";
  append_escaped(line, name);
  line += "\",\"level\":\"";
  line += level_name(level);
  line += '"';
  for (const auto& [key, value] : fields) {
    line += ",\"";
    append_escaped(line, key);
    line += "\":\"";
    append_escaped(line, value);
    line += '"';
  }
  line += "}\n";
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fwrite(line.data(), 1, line.size(), stderr);
}

}  // namespace rigidtraj::logx
