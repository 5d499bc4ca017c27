// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace rigidtraj::logx {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Quiet = 4 };

/// Verbosity from RIGIDTRAJ_LOG (debug|info|warn|error|quiet), default warn.
Level threshold();
bool enabled(Level level);

/// One structured record per pipeline event, written as a single JSON line to
/// stderr. Field values are emitted as JSON strings.
void event(Level level, std::string_view name,
           std::initializer_list<std::pair<std::string_view, std::string>>
               fields = {});

}  // namespace rigidtraj::logx
