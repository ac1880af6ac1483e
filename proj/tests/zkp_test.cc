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

#include "pess/zkp.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "zkp_oracles.h"

namespace pess {
namespace {

TEST(Transcript, ChallengeIsDeterministicAndSensitive) {
  const auto& gp = prod_group();
  Transcript a("dom"), b("dom"), c("dom"), empty(""), tagged("tag");
  Bytes msg{1, 2, 3};
  a.append("m", msg);
  b.append("m", msg);
  msg[2] ^= 1;
  c.append("m", msg);
  EXPECT_EQ(fiat_shamir(a, gp), fiat_shamir(b, gp));
  EXPECT_NE(fiat_shamir(a, gp), fiat_shamir(c, gp));
  EXPECT_NE(fiat_shamir(empty, gp), fiat_shamir(tagged, gp));
  EXPECT_TRUE(gp.is_field_element(fiat_shamir(a, gp)));
}

TEST(Transcript, ChallengeIsHashModQ) {
  const auto& gp = prod_group();
  Transcript t("x");
  Digest d = sha256(t.bytes());
  BigInt v = from_bytes(d);
  EXPECT_EQ(fiat_shamir(t, gp), BigInt(v % gp.order_q));
}

class ZkpGroups : public ::testing::TestWithParam<const GroupParams*> {};

TEST_P(ZkpGroups, CmCompletenessAndPerturbation) {
  const auto& gp = *GetParam();
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    Opening o{rng.below(gp.order_q), rng.below(gp.order_q)};
    Commitment c = commit(o, gp);
    Transcript tp("t"), tv("t"), tb("t");
    ProofCm proof = prove_cm(o, gp, tp, rng);
    EXPECT_TRUE(verify_cm(c, proof, gp, tv));
    EXPECT_EQ(tp.bytes(), tv.bytes());
    ProofCm bad = proof;
    bad.z_value = gp.add(bad.z_value, 1);
    EXPECT_FALSE(verify_cm(c, bad, gp, tb));
  }
}

TEST_P(ZkpGroups, SumExamples) {
  const auto& gp = *GetParam();
  Rng rng(2);
  std::vector<Opening> os;
  std::vector<Commitment> cs;
  for (long x : {1, 2, 3}) {
    Opening o;
    cs.push_back(commit_random(x, rng, gp, &o));
    os.push_back(o);
  }
  Transcript tp("s");
  ProofSum proof = prove_sum(os, 6, gp, tp, rng);
  Transcript tv("s"), tw("s");
  EXPECT_TRUE(verify_sum(cs, 6, proof, gp, tv));
  EXPECT_FALSE(verify_sum(cs, 7, proof, gp, tw));

  // Prover claiming a wrong total cannot pass either.
  Transcript tp2("s"), tv2("s");
  ProofSum wrong = prove_sum(os, 7, gp, tp2, rng);
  EXPECT_FALSE(verify_sum(cs, 7, wrong, gp, tv2));

  Transcript t1("s"), t2("s");
  ProofSum single = prove_sum(std::span(os).first(1), 1, gp, t1, rng);
  EXPECT_TRUE(verify_sum(std::span(cs).first(1), 1, single, gp, t2));
}

TEST_P(ZkpGroups, MbsExamples) {
  const auto& gp = *GetParam();
  Rng rng(3);
  std::vector<FieldElement> bits{0, 1};
  Opening o;
  Commitment c = commit_random(1, rng, gp, &o);
  Transcript tp("m"), tv("m");
  EXPECT_TRUE(verify_mbs(c, bits, prove_mbs(o, bits, gp, tp, rng), gp, tv));

  std::vector<FieldElement> single{5};
  Opening o5;
  Commitment c5 = commit_random(5, rng, gp, &o5);
  Transcript sp("m"), sv("m");
  EXPECT_TRUE(verify_mbs(c5, single, prove_mbs(o5, single, gp, sp, rng), gp, sv));

  Opening o2;
  Commitment c2 = commit_random(2, rng, gp, &o2);
  Transcript fp("m");
  EXPECT_THROW(prove_mbs(o2, bits, gp, fp, rng), InputError);
  // Forgery: run the prover as if the value were 1 against a commitment to 2.
  Transcript ft("m"), fv("m");
  ProofMbs forged = test::forge_mbs(c2, o2, bits, 1, gp, ft, rng);
  EXPECT_FALSE(verify_mbs(c2, bits, forged, gp, fv));
}

TEST_P(ZkpGroups, NnExamples) {
  const auto& gp = *GetParam();
  Rng rng(4);
  int m = gp.order_q > 1000 ? kRangeBits : 3;
  for (long x : {0L, 5L, 1L}) {
    Opening o;
    Commitment c = commit_random(x, rng, gp, &o);
    Transcript tp("n"), tv("n");
    ProofNN proof = prove_nn(o, m, gp, tp, rng);
    EXPECT_TRUE(verify_nn(c, proof, m, gp, tv)) << x;
    EXPECT_EQ(proof.bit_commitments.size(), static_cast<size_t>(m));
  }
  EXPECT_EQ(bit_decompose(5, 4), (std::vector<int>{1, 0, 1, 0}));
}

INSTANTIATE_TEST_SUITE_P(Groups, ZkpGroups, ::testing::Values(&tiny_group(), &prod_group()),
                         [](const auto& info) { return info.param->profile; });

TEST(Nn, MinusOneCannotBeDecomposed) {
  const auto& gp = prod_group();
  Rng rng(5);
  Opening o;
  Commitment c = commit_random(gp.order_q - 1, rng, gp, &o);
  Transcript tp("n");
  EXPECT_THROW(prove_nn(o, kRangeBits, gp, tp, rng), InputError);
  // Best forgery: the low 32 bits of q-1, or all ones.
  for (auto bits : {bit_decompose(o.value, kRangeBits), std::vector<int>(kRangeBits, 1)}) {
    Transcript ft("n"), fv("n");
    ProofNN forged = prove_nn_with_bits(o, bits, gp, ft, rng);
    EXPECT_FALSE(verify_nn(c, forged, kRangeBits, gp, fv));
  }
}

TEST(Nn, RejectsWrongWidth) {
  const auto& gp = prod_group();
  Rng rng(6);
  Opening o;
  Commitment c = commit_random(7, rng, gp, &o);
  Transcript tp("n"), tv("n");
  ProofNN proof = prove_nn(o, 8, gp, tp, rng);
  EXPECT_FALSE(verify_nn(c, proof, kRangeBits, gp, tv));
}

TEST(Nn, RecompositionEquationBySymbolicExpansion) {
  // h^{z_r} = Cm(0,r') Cm(x,r)^{-beta} prod Cm(b_i,r_i)^{beta 2^{i-1}}
  // expands to g^{beta(sum b_i 2^{i-1} - x)} h^{r' + beta(sum r_i 2^{i-1} - r)}.
  // Enumerate every x < 8, every beta, and check the g-exponent vanishes only
  // for the true decomposition.
  const auto& gp = tiny_group();
  for (long x = 0; x < 8; ++x) {
    for (long guess = 0; guess < 8; ++guess) {
      for (long beta = 1; beta < 11; ++beta) {
        long g_exp = ((beta * (guess - x)) % 11 + 11) % 11;
        EXPECT_EQ(g_exp == 0, guess == x);
      }
    }
  }
  Rng rng(7);
  for (long x = 0; x < 8; ++x) {
    Opening o{x, rng.below(gp.order_q)};
    Commitment c = commit(o, gp);
    NnProverState st = nn_announce(bit_decompose(x, 3), rng, gp);
    std::vector<Opening> bits = st.bits;
    FieldElement rp = st.mask_rand;
    for (long beta = 0; beta < 11; ++beta) {
      ProofNN p = nn_respond(st, o, beta, gp);
      long acc = 0;
      for (int i = 2; i >= 0; --i) acc = (2 * acc + bits[i].randomness.get_si()) % 11;
      long z = ((rp.get_si() + beta * (acc - o.randomness.get_si())) % 11 + 11) % 11;
      EXPECT_EQ(p.z_rand, z);
      EXPECT_TRUE(nn_check(c, p, 3, beta, gp));
    }
  }
}

TEST(Extractors, RecoverWitnessFromTwoTranscripts) {
  const auto& gp = tiny_group();
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    Opening o{rng.below(gp.order_q), rng.below(gp.order_q)};
    Commitment c = commit(o, gp);

    CmProverState cst = cm_announce(rng, gp);
    FieldElement b1 = rng.below(gp.order_q), b2;
    do b2 = rng.below(gp.order_q); while (b2 == b1);
    ProofCm p1 = cm_respond(cst, o, b1, gp), p2 = cm_respond(cst, o, b2, gp);
    ASSERT_TRUE(cm_check(c, p1.announce, p1.z_value, p1.z_rand, b1, gp));
    ASSERT_TRUE(cm_check(c, p2.announce, p2.z_value, p2.z_rand, b2, gp));
    Opening ext = test::extract_cm(p1, p2, gp);
    EXPECT_EQ(ext, o);
    EXPECT_EQ(commit(ext, gp), c);

    std::vector<Opening> os{o, {rng.below(gp.order_q), rng.below(gp.order_q)}};
    std::vector<Commitment> cs{commit(os[0], gp), commit(os[1], gp)};
    FieldElement y = gp.add(os[0].value, os[1].value);
    SumProverState sst = sum_announce(rng, gp);
    ProofSum s1 = sum_respond(sst, os, b1, gp), s2 = sum_respond(sst, os, b2, gp);
    ASSERT_TRUE(sum_check(cs, y, s1.announce, s1.z_rand, b1, gp));
    FieldElement r_sum = test::extract_sum(s1, s2, gp);
    EXPECT_EQ(r_sum, gp.add(os[0].randomness, os[1].randomness));
    EXPECT_EQ(commit(y, r_sum, gp), combine(cs[0], cs[1], gp));

    std::vector<FieldElement> set{3, 7, 9};
    Opening om{set[trial % 3], rng.below(gp.order_q)};
    Commitment cm = commit(om, gp);
    MbsProverState mst = mbs_announce(om, set, rng, gp);
    ProofMbs m1 = mbs_respond(mst, om, b1, gp), m2 = mbs_respond(mst, om, b2, gp);
    ASSERT_TRUE(mbs_check(cm, set, m1, b1, gp));
    ASSERT_TRUE(mbs_check(cm, set, m2, b2, gp));
    Opening em = test::extract_mbs(m1, m2, set, gp);
    EXPECT_EQ(em, om);

    long x = static_cast<long>(rng.below(uint64_t{8}));
    Opening on{x, rng.below(gp.order_q)};
    Commitment cn = commit(on, gp);
    NnProverState nst = nn_announce(bit_decompose(x, 3), rng, gp);
    ProofNN n1 = nn_respond(nst, on, b1, gp), n2 = nn_respond(nst, on, b2, gp);
    ASSERT_TRUE(nn_check(cn, n1, 3, b1, gp));
    ASSERT_TRUE(nn_check(cn, n2, 3, b2, gp));
    Opening en = test::extract_nn(n1, n2, b1, b2, gp);
    EXPECT_EQ(en.value, on.value);
    EXPECT_EQ(commit(en, gp), cn);
  }
}

TEST(Simulators, CmAndSumTranscriptsMatchRealDistribution) {
  const auto& gp = tiny_group();
  Opening o{4, 7};
  Commitment c = commit(o, gp);
  EXPECT_EQ(test::real_cm_transcripts(o, gp), test::simulated_cm_transcripts(c, gp));

  std::vector<Opening> os{{2, 3}, {5, 1}};
  std::vector<Commitment> cs{commit(os[0], gp), commit(os[1], gp)};
  EXPECT_EQ(test::real_sum_transcripts(os, gp), test::simulated_sum_transcripts(cs, 7, gp));
}

TEST(Simulators, MbsTranscriptsMatchRealDistribution) {
  const auto& gp = tiny_group();
  std::vector<FieldElement> set{0, 1};
  for (long b : {0L, 1L}) {
    Opening o{b, 6};
    Commitment c = commit(o, gp);
    auto real = test::real_mbs_transcripts(o, set, gp);
    auto sim = test::simulated_mbs_transcripts(c, set, gp);
    EXPECT_EQ(real.size(), sim.size());
    EXPECT_EQ(real, sim);
  }
}

TEST(Simulators, NnRecompositionTranscriptsMatch) {
  const auto& gp = tiny_group();
  Rng rng(9);
  Opening o{5, 2};
  Commitment c = commit(o, gp);
  NnProverState st = nn_announce(bit_decompose(5, 3), rng, gp);
  std::vector<Commitment> bits = st.proof.bit_commitments;
  std::vector<Opening> bit_open = st.bits;
  auto real = test::real_nn_recomposition(o, bit_open, gp);
  auto sim = test::simulated_nn_recomposition(c, bits, gp);
  EXPECT_EQ(real, sim);
}

TEST(Serialization, ProofsRoundTrip) {
  const auto& gp = prod_group();
  Rng rng(10);
  Opening o;
  Commitment c = commit_random(77, rng, gp, &o);
  Transcript t("r");
  ProofCm pc = prove_cm(o, gp, t, rng);
  ProofSum ps = prove_sum(std::span(&o, 1), 77, gp, t, rng);
  std::vector<FieldElement> set{76, 77, 78};
  ProofMbs pm = prove_mbs(o, set, gp, t, rng);
  ProofNN pn = prove_nn(o, kRangeBits, gp, t, rng);

  Bytes b = serialize(pc, gp);
  ByteReader r1(b);
  EXPECT_EQ(read_proof_cm(r1, gp), pc);
  r1.expect_done();
  Bytes b2 = serialize(ps, gp);
  ByteReader r2(b2);
  EXPECT_EQ(read_proof_sum(r2, gp), ps);
  Bytes b3 = serialize(pm, gp);
  ByteReader r3(b3);
  EXPECT_EQ(read_proof_mbs(r3, gp), pm);
  Bytes b4 = serialize(pn, gp);
  ByteReader r4(b4);
  ProofNN back = read_proof_nn(r4, gp);
  EXPECT_EQ(back, pn);
  EXPECT_EQ(serialize(back, gp), b4);

  Bytes truncated(b4.begin(), b4.end() - 1);
  ByteReader rt(truncated);
  EXPECT_THROW(read_proof_nn(rt, gp), DecodeError);
  (void)c;
}

TEST(Mutations, EverySingleFieldChangeRejects) {
  for (const GroupParams* g : {&tiny_group(), &prod_group()}) {
    const auto& gp = *g;
    Rng rng(11);
    int m = gp.order_q > 1000 ? 8 : 3;
    for (int trial = 0; trial < 5; ++trial) {
      auto counts = test::run_mutation_suite(gp, m, rng);
      EXPECT_EQ(counts.accepted, 0) << gp.profile;
      EXPECT_GT(counts.tried, 0);
    }
  }
}

}  // namespace
}  // namespace pess
