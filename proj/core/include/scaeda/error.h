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

#include <stdexcept>
#include <string>

namespace scaeda {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a precondition.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

} // namespace scaeda
