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

#include "pess/commitments.h"

namespace pess {

Commitment commit(const FieldElement& value, const FieldElement& randomness,
                  const GroupParams& params) {
  return {params.gmul(params.pow_g(params.reduce(value)),
                      params.pow_h(params.reduce(randomness)))};
}

Commitment commit(const Opening& o, const GroupParams& params) {
  return commit(o.value, o.randomness, params);
}

Commitment commit_random(const FieldElement& value, Rng& rng, const GroupParams& params,
                         Opening* opening) {
  Opening o{params.reduce(value), rng.below(params.order_q)};
  if (opening) *opening = o;
  return commit(o, params);
}

bool verify_opening(const Commitment& c, const Opening& o, const GroupParams& params) {
  if (!params.is_field_element(o.value) || !params.is_field_element(o.randomness)) {
    return false;
  }
  return commit(o, params) == c;
}

Commitment combine(const Commitment& a, const Commitment& b, const GroupParams& params) {
  return {params.gmul(a.point, b.point)};
}

Commitment divide(const Commitment& a, const Commitment& b, const GroupParams& params) {
  return {params.gdiv(a.point, b.point)};
}

Commitment scale(const Commitment& c, const FieldElement& k, const GroupParams& params) {
  return {params.pow(c.point, k)};
}

Commitment identity_commitment() { return {GroupElement(1)}; }

Opening combine(const Opening& a, const Opening& b, const GroupParams& params) {
  return {params.add(a.value, b.value), params.add(a.randomness, b.randomness)};
}

Opening divide(const Opening& a, const Opening& b, const GroupParams& params) {
  return {params.sub(a.value, b.value), params.sub(a.randomness, b.randomness)};
}

Opening scale(const Opening& o, const FieldElement& k, const GroupParams& params) {
  return {params.mul(o.value, k), params.mul(o.randomness, k)};
}

void write_commitment(ByteWriter& w, const Commitment& c, const GroupParams& params) {
  params.write_group(w, c.point);
}

Commitment read_commitment(ByteReader& r, const GroupParams& params) {
  return {params.read_group(r)};
}

}  // namespace pess
