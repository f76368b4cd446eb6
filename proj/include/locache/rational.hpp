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

#ifndef LOCACHE_RATIONAL_HPP
#define LOCACHE_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>

namespace locache {

// Subfile and segment sizes are tracked as exact rationals so that the
// delivery-completeness accounting is an identity, not a float comparison.
// Gains coming from the allocator are doubles; conversion to cpp_rational
// is exact (every finite double is a dyadic rational), so all downstream
// arithmetic stays exact.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational &r) { return r.convert_to<double>(); }

inline bool is_integer(const Rational &r) { return denominator(r) == 1; }

// Largest integer <= r.
inline BigInt floor_big(const Rational &r) {
    BigInt q = numerator(r) / denominator(r);
    if (numerator(r) < 0 && q * denominator(r) != numerator(r))
        --q;
    return q;
}

inline int floor_int(const Rational &r) { return floor_big(r).convert_to<int>(); }

// Snaps a gain that is within tol of an integer to that integer, avoiding
// spurious memory-sharing splits caused by floating-point allocator output.
inline Rational snap_gain(const Rational &t, double tol = 1e-9) {
    const double d = to_double(t);
    const double rounded = std::round(d);
    if (std::abs(d - rounded) <= tol)
        return Rational(static_cast<long long>(rounded));
    return t;
}

inline std::string to_string(const Rational &r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1)
        s += "/" + denominator(r).str();
    return s;
}

} // namespace locache

#endif
