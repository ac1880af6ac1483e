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

#include "pess/field_group.h"
#include "pess/random.h"

namespace pess {

struct Commitment {
  GroupElement point;
  bool operator==(const Commitment&) const = default;
};

struct Opening {
  FieldElement value;
  FieldElement randomness;
  bool operator==(const Opening&) const = default;
};

// Cm(x, r) = g^x h^r mod p
Commitment commit(const FieldElement& value, const FieldElement& randomness,
                  const GroupParams& params);
Commitment commit(const Opening& o, const GroupParams& params);
// Fresh uniform randomness; returns the opening alongside.
Commitment commit_random(const FieldElement& value, Rng& rng, const GroupParams& params,
                         Opening* opening);

bool verify_opening(const Commitment& c, const Opening& o, const GroupParams& params);

Commitment combine(const Commitment& a, const Commitment& b, const GroupParams& params);
// a / b, commits to the difference.
Commitment divide(const Commitment& a, const Commitment& b, const GroupParams& params);
Commitment scale(const Commitment& c, const FieldElement& k, const GroupParams& params);
Commitment identity_commitment();

Opening combine(const Opening& a, const Opening& b, const GroupParams& params);
Opening divide(const Opening& a, const Opening& b, const GroupParams& params);
Opening scale(const Opening& o, const FieldElement& k, const GroupParams& params);

void write_commitment(ByteWriter& w, const Commitment& c, const GroupParams& params);
Commitment read_commitment(ByteReader& r, const GroupParams& params);

}  // namespace pess
