/*
 * SPDX-FileCopyrightText: <text>Copyright 2026 The scaeda Authors</text>
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * This file is part of scaeda, a side-channel template attack toolkit.
 */

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scaeda {
namespace cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { OK = 0, USAGE_ERROR = 1, DATA_ERROR = 2 };

/// Runs the `scaeda` command line. \p args excludes the program name.
/// Normal output goes to \p out, diagnostics to \p err.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

} // namespace cli
} // namespace scaeda
