// Copyright 2026 The PESS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace pess {

using Rational = mpq_class;

// n/d in lowest terms; mpq_class(n, d) alone does not canonicalize.
inline Rational ratio(const mpz_class& n, const mpz_class& d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

// Exact parse of "12", "-0.25", "3/8", "1e-3".
Rational parse_rational(std::string_view text);

// Nearest integer, ties away from zero.
mpz_class round_half_away(const Rational& x);
mpz_class floor_rational(const Rational& x);

double to_double(const Rational& x);
inline double to_double(double x) { return x; }

// Decimal rendering with `digits` fractional digits (rounded half away).
std::string to_decimal(const Rational& x, int digits = 6);

}  // namespace pess
