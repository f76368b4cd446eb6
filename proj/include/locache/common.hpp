// SPDX-License-Identifier: Apache-2.0
//
// locache  Location-dependent coded caching with multi-antenna beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef LOCACHE_COMMON_HPP
#define LOCACHE_COMMON_HPP

#include <stdexcept>
#include <string>

#ifndef LOCACHE_VERSION
#define LOCACHE_VERSION "0.1.0"
#endif

namespace locache {

inline const char *version() { return LOCACHE_VERSION; }

// Invalid or inconsistent configuration (bad file, bad key, bad value).
// The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string &msg) : std::runtime_error(msg) {}
};

// A delivery schedule cannot be built with the requested parameters
// (e.g. common gain + multiplexing gain exceed the user count).
class schedule_error : public std::runtime_error {
  public:
    explicit schedule_error(const std::string &msg) : std::runtime_error(msg) {}
};

// A numerical solver failed to produce a usable iterate.
class solver_error : public std::runtime_error {
  public:
    explicit solver_error(const std::string &msg) : std::runtime_error(msg) {}
};

// A built plan violates one of its structural invariants (duplicate
// segment, incomplete delivery where completeness is guaranteed).
class plan_invariant_error : public std::runtime_error {
  public:
    explicit plan_invariant_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace locache

#endif
