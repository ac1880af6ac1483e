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

// Knowledge extractors, honest-verifier simulators and a mutation harness for
// the sigma proofs. Shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <array>
#include <vector>

#include "pess/zkp.h"

namespace pess::test {

inline FieldElement ratio(const FieldElement& num, const FieldElement& den,
                          const GroupParams& gp) {
  return gp.mul(num, gp.inv(den));
}

// x = (z' - z'') / (beta1 - beta2), likewise for r.
inline Opening extract_cm(const ProofCm& a, const ProofCm& b, const GroupParams& gp) {
  FieldElement db = gp.sub(a.challenge, b.challenge);
  return {ratio(gp.sub(a.z_value, b.z_value), db, gp),
          ratio(gp.sub(a.z_rand, b.z_rand), db, gp)};
}

// Returns sum r_i.
inline FieldElement extract_sum(const ProofSum& a, const ProofSum& b, const GroupParams& gp) {
  return ratio(gp.sub(a.z_rand, b.z_rand), gp.sub(a.challenge, b.challenge), gp);
}

// Some branch j saw two different sub-challenges; it yields Cm = g^{x_j} h^r.
inline Opening extract_mbs(const ProofMbs& a, const ProofMbs& b,
                           std::span<const FieldElement> members, const GroupParams& gp) {
  for (size_t j = 0; j < members.size(); ++j) {
    if (a.challenges[j] == b.challenges[j]) continue;
    FieldElement r = ratio(gp.sub(a.z_rands[j], b.z_rands[j]),
                           gp.sub(a.challenges[j], b.challenges[j]), gp);
    return {gp.reduce(members[j]), r};
  }
  throw std::logic_error("extract_mbs: identical sub-challenges");
}

inline Opening extract_nn(const ProofNN& a, const ProofNN& b, const FieldElement& beta1,
                          const FieldElement& beta2, const GroupParams& gp) {
  static const std::vector<FieldElement> bits{0, 1};
  FieldElement x = 0, weighted_r = 0, pow2 = 1;
  for (size_t i = 0; i < a.bit_proofs.size(); ++i) {
    Opening bi = extract_mbs(a.bit_proofs[i], b.bit_proofs[i], bits, gp);
    x = gp.add(x, gp.mul(bi.value, pow2));
    weighted_r = gp.add(weighted_r, gp.mul(bi.randomness, pow2));
    pow2 = gp.add(pow2, pow2);
  }
  FieldElement delta = ratio(gp.sub(a.z_rand, b.z_rand), gp.sub(beta1, beta2), gp);
  return {x, gp.sub(weighted_r, delta)};
}

// Transcript distributions on small groups, as sorted lists of packed tuples.
using Dist = std::vector<std::vector<long>>;

inline Dist sorted(Dist d) {
  std::sort(d.begin(), d.end());
  return d;
}

inline long L(const BigInt& x) { return x.get_si(); }

inline Dist real_cm_transcripts(const Opening& o, const GroupParams& gp) {
  Dist out;
  long q = L(gp.order_q);
  for (long xm = 0; xm < q; ++xm)
    for (long rm = 0; rm < q; ++rm)
      for (long beta = 0; beta < q; ++beta) {
        CmProverState st{{xm, rm}, commit(xm, rm, gp)};
        ProofCm p = cm_respond(st, o, beta, gp);
        out.push_back({L(p.announce.point), L(p.z_value), L(p.z_rand), beta});
      }
  return sorted(out);
}

// Cm(x', r') = g^{z_x} h^{z_r} Cm(x, r)^{-beta}
inline Dist simulated_cm_transcripts(const Commitment& c, const GroupParams& gp) {
  Dist out;
  long q = L(gp.order_q);
  for (long zx = 0; zx < q; ++zx)
    for (long zr = 0; zr < q; ++zr)
      for (long beta = 0; beta < q; ++beta) {
        GroupElement a = gp.gmul(commit(zx, zr, gp).point, gp.pow(c.point, gp.neg(beta)));
        out.push_back({L(a), zx, zr, beta});
      }
  return sorted(out);
}

inline Dist real_sum_transcripts(std::span<const Opening> os, const GroupParams& gp) {
  Dist out;
  long q = L(gp.order_q);
  for (long rm = 0; rm < q; ++rm)
    for (long beta = 0; beta < q; ++beta) {
      SumProverState st{rm, {gp.pow_h(rm)}};
      ProofSum p = sum_respond(st, os, beta, gp);
      out.push_back({L(p.announce.point), L(p.z_rand), beta});
    }
  return sorted(out);
}

// Cm(0, r') = g^{beta y} h^{z_r} prod Cm(x_i, r_i)^{-beta}
inline Dist simulated_sum_transcripts(std::span<const Commitment> cs, const FieldElement& y,
                                      const GroupParams& gp) {
  Dist out;
  long q = L(gp.order_q);
  GroupElement prod = 1;
  for (const auto& c : cs) prod = gp.gmul(prod, c.point);
  for (long zr = 0; zr < q; ++zr)
    for (long beta = 0; beta < q; ++beta) {
      GroupElement a = gp.gmul(commit(gp.mul(beta, y), zr, gp).point, gp.pow(prod, gp.neg(beta)));
      out.push_back({L(a), zr, beta});
    }
  return sorted(out);
}

// Two-member sets only; enumerates every prover coin and challenge. Tuples
// are packed 8 bits per component to keep the 11^6-entry lists cheap.
using PackedDist = std::vector<uint64_t>;

struct SmallGroup {
  long p, q;
  std::vector<long> gpow, hpow;
  explicit SmallGroup(const GroupParams& gp) : p(L(gp.modulus_p)), q(L(gp.order_q)) {
    for (long k = 0; k < q; ++k) {
      gpow.push_back(L(gp.pow_g(k)));
      hpow.push_back(L(gp.pow_h(k)));
    }
  }
  long mod(long x) const { return ((x % q) + q) % q; }
  long cm(long x, long r) const { return gpow[mod(x)] * hpow[mod(r)] % p; }
  long pw(long base, long e) const {
    long r = 1;
    for (long i = 0; i < mod(e); ++i) r = r * base % p;
    return r;
  }
};

inline uint64_t pack(std::initializer_list<long> xs) {
  uint64_t v = 0;
  for (long x : xs) v = v << 8 | static_cast<uint64_t>(x);
  return v;
}

inline PackedDist real_mbs_transcripts(const Opening& o, std::span<const FieldElement> set,
                                       const GroupParams& gp) {
  SmallGroup sg(gp);
  const long q = sg.q, r = L(o.randomness);
  PackedDist out;
  size_t i = gp.reduce(set[0]) == o.value ? 0 : 1;
  size_t j = 1 - i;
  long xi = L(gp.reduce(set[i])), xj = L(gp.reduce(set[j]));
  for (long x0 = 0; x0 < q; ++x0)
    for (long x1 = 0; x1 < q; ++x1)
      for (long r0 = 0; r0 < q; ++r0)
        for (long r1 = 0; r1 < q; ++r1)
          for (long bj = 0; bj < q; ++bj)
            for (long beta = 0; beta < q; ++beta) {
              std::array<long, 2> xm{x0, x1}, rm{r0, r1}, zx, zr, b;
              b[j] = bj;
              b[i] = sg.mod(beta - bj);
              zx[i] = xm[i];
              zx[j] = sg.mod(xm[j] + (xi - xj) * bj);
              for (int k = 0; k < 2; ++k) zr[k] = sg.mod(rm[k] + r * b[k]);
              out.push_back(pack({sg.cm(x0, r0), sg.cm(x1, r1), zx[0], zx[1], zr[0], zr[1],
                                  b[0], b[1]}));
            }
  std::sort(out.begin(), out.end());
  return out;
}

// Cm(x'_j, r'_j) = g^{z_xj} h^{z_rj} (Cm / g^{x_j})^{-beta_j}
inline PackedDist simulated_mbs_transcripts(const Commitment& c,
                                            std::span<const FieldElement> set,
                                            const GroupParams& gp) {
  SmallGroup sg(gp);
  const long q = sg.q;
  // shifted_pow[k][e] = (Cm / g^{x_k})^{-e}
  std::array<std::vector<long>, 2> shifted_pow;
  for (int k = 0; k < 2; ++k) {
    long s = L(gp.gmul(c.point, gp.pow_g(gp.neg(gp.reduce(set[k])))));
    for (long e = 0; e < q; ++e) shifted_pow[k].push_back(sg.pw(s, -e));
  }
  PackedDist out;
  for (long zx0 = 0; zx0 < q; ++zx0)
    for (long zx1 = 0; zx1 < q; ++zx1)
      for (long zr0 = 0; zr0 < q; ++zr0)
        for (long zr1 = 0; zr1 < q; ++zr1)
          for (long b0 = 0; b0 < q; ++b0)
            for (long beta = 0; beta < q; ++beta) {
              long b1 = sg.mod(beta - b0);
              long a0 = sg.cm(zx0, zr0) * shifted_pow[0][b0] % sg.p;
              long a1 = sg.cm(zx1, zr1) * shifted_pow[1][b1] % sg.p;
              out.push_back(pack({a0, a1, zx0, zx1, zr0, zr1, b0, b1}));
            }
  std::sort(out.begin(), out.end());
  return out;
}

inline Dist real_nn_recomposition(const Opening& o, std::span<const Opening> bits,
                                  const GroupParams& gp) {
  Dist out;
  long q = L(gp.order_q);
  FieldElement acc = 0;
  for (size_t k = bits.size(); k-- > 0;) acc = gp.add(gp.add(acc, acc), bits[k].randomness);
  acc = gp.sub(acc, o.randomness);
  for (long rm = 0; rm < q; ++rm)
    for (long beta = 0; beta < q; ++beta) {
      out.push_back({L(gp.pow_h(rm)), L(gp.add(rm, gp.mul(beta, acc))), beta});
    }
  return sorted(out);
}

// Cm(0, r') = h^{z_r} Cm(x, r)^beta prod Cm(b_i, r_i)^{-beta 2^{i-1}}
inline Dist simulated_nn_recomposition(const Commitment& c, std::span<const Commitment> bits,
                                       const GroupParams& gp) {
  Dist out;
  long q = L(gp.order_q);
  GroupElement recomposed = 1;
  for (size_t k = bits.size(); k-- > 0;) {
    recomposed = gp.gmul(gp.gmul(recomposed, recomposed), bits[k].point);
  }
  GroupElement ratio_pt = gp.gdiv(c.point, recomposed);
  for (long zr = 0; zr < q; ++zr)
    for (long beta = 0; beta < q; ++beta) {
      out.push_back({L(gp.gmul(gp.pow_h(zr), gp.pow(ratio_pt, beta))), zr, beta});
    }
  return sorted(out);
}

// Run the prover as if committed to `pretend`.
inline ProofMbs forge_mbs(const Commitment& c, const Opening& real,
                          std::span<const FieldElement> members, const FieldElement& pretend,
                          const GroupParams& gp, Transcript& t, Rng& rng) {
  Opening fake{pretend, real.randomness};
  MbsProverState st = mbs_announce(fake, members, rng, gp);
  mbs_append_statement(t, c, members, gp);
  mbs_append_first_move(t, st.proof, gp);
  FieldElement beta = draw_challenge(t, gp);
  return mbs_respond(std::move(st), fake, beta, gp);
}

// ---- mutation harness ----------------------------------------------------

enum class ProofKind { kCm, kSum, kMbs, kNn };

struct MutationCounts {
  int tried = 0;
  int accepted = 0;
};

inline FieldElement nonzero(Rng& rng, const GroupParams& gp) {
  return gp.add(rng.below(gp.order_q - 1), 1);
}

inline void bump(FieldElement& x, Rng& rng, const GroupParams& gp) {
  x = gp.add(x, nonzero(rng, gp));
}

inline void bump(Commitment& c, Rng& rng, const GroupParams& gp) {
  c.point = gp.gmul(c.point, gp.pow_g(nonzero(rng, gp)));
}

// Field slots of a proof, flattened in declaration order.
template <typename F>
void visit_fields(ProofMbs& p, F&& f) {
  for (auto& a : p.announces) f(a);
  for (auto& z : p.z_values) f(z);
  for (auto& z : p.z_rands) f(z);
  for (auto& b : p.challenges) f(b);
}

template <typename F>
void visit_fields(ProofNN& p, F&& f) {
  for (auto& b : p.bit_commitments) f(b);
  for (auto& bp : p.bit_proofs) visit_fields(bp, f);
  f(p.announce);
  f(p.z_rand);
}

template <typename F>
void visit_fields(ProofCm& p, F&& f) {
  f(p.announce);
  f(p.z_value);
  f(p.z_rand);
  f(p.challenge);
}

template <typename F>
void visit_fields(ProofSum& p, F&& f) {
  f(p.announce);
  f(p.z_rand);
  f(p.challenge);
}

template <typename Proof>
size_t count_fields(Proof& p) {
  size_t n = 0;
  visit_fields(p, [&](auto&) { ++n; });
  return n;
}

template <typename Proof>
void mutate_slot(Proof& p, size_t slot, Rng& rng, const GroupParams& gp) {
  size_t k = 0;
  visit_fields(p, [&](auto& field) {
    if (k++ == slot) bump(field, rng, gp);
  });
}

// Builds a fresh honest instance, checks it verifies, and returns true.
// With slot >= 0 the proof is mutated at that slot first and the return value
// is whether the verifier accepted the mutant.
inline bool run_instance(ProofKind kind, const GroupParams& gp, int m, Rng& rng, long slot,
                         size_t* n_slots = nullptr) {
  Transcript tp("pess/test"), tv("pess/test");
  auto pick_slot = [&](auto& proof) {
    size_t n = count_fields(proof);
    if (n_slots) *n_slots = n;
    if (slot >= 0) mutate_slot(proof, static_cast<size_t>(slot) % n, rng, gp);
  };
  switch (kind) {
    case ProofKind::kCm: {
      Opening o{rng.below(gp.order_q), rng.below(gp.order_q)};
      ProofCm p = prove_cm(o, gp, tp, rng);
      pick_slot(p);
      return verify_cm(commit(o, gp), p, gp, tv);
    }
    case ProofKind::kSum: {
      size_t n = 1 + rng.below(uint64_t{5});
      std::vector<Opening> os;
      std::vector<Commitment> cs;
      FieldElement y = 0;
      for (size_t i = 0; i < n; ++i) {
        os.push_back({rng.below(gp.order_q), rng.below(gp.order_q)});
        cs.push_back(commit(os.back(), gp));
        y = gp.add(y, os.back().value);
      }
      ProofSum p = prove_sum(os, y, gp, tp, rng);
      pick_slot(p);
      return verify_sum(cs, y, p, gp, tv);
    }
    case ProofKind::kMbs: {
      size_t n = 1 + rng.below(uint64_t{4});
      std::vector<FieldElement> set;
      for (size_t i = 0; i < n; ++i) set.push_back(rng.below(gp.order_q));
      Opening o{set[rng.below(uint64_t{n})], rng.below(gp.order_q)};
      ProofMbs p = prove_mbs(o, set, gp, tp, rng);
      pick_slot(p);
      return verify_mbs(commit(o, gp), set, p, gp, tv);
    }
    case ProofKind::kNn: {
      BigInt bound = BigInt(1) << m;
      if (bound > gp.order_q) bound = gp.order_q;
      Opening o{rng.below(bound), rng.below(gp.order_q)};
      ProofNN p = prove_nn(o, m, gp, tp, rng);
      pick_slot(p);
      return verify_nn(commit(o, gp), p, m, gp, tv);
    }
  }
  return false;
}

inline MutationCounts run_mutations(ProofKind kind, const GroupParams& gp, int m, Rng& rng,
                                    int n) {
  MutationCounts c;
  for (int i = 0; i < n; ++i) {
    long slot = static_cast<long>(rng.below(uint64_t{1} << 30));
    c.tried++;
    c.accepted += run_instance(kind, gp, m, rng, slot);
  }
  return c;
}

// Every slot of one instance per kind.
inline MutationCounts run_mutation_suite(const GroupParams& gp, int m, Rng& rng) {
  MutationCounts c;
  for (ProofKind kind : {ProofKind::kCm, ProofKind::kSum, ProofKind::kMbs, ProofKind::kNn}) {
    size_t n_slots = 0;
    Rng probe = rng.fork("probe");
    run_instance(kind, gp, m, probe, -1, &n_slots);
    for (size_t s = 0; s < n_slots; ++s) {
      Rng local = rng.fork("slot" + std::to_string(s));
      c.tried++;
      c.accepted += run_instance(kind, gp, m, local, static_cast<long>(s));
    }
  }
  return c;
}

}  // namespace pess::test
