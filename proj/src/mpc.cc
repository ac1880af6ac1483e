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

#include "pess/mpc.h"

#include "pess/errors.h"
#include "pess/hash.h"

namespace pess {

namespace {

Bytes encode_fields(std::span<const FieldElement> xs, const GroupParams& gp) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(xs.size()));
  for (const auto& x : xs) gp.write_field(w, x);
  return std::move(w).take();
}

std::vector<FieldElement> decode_fields(std::span<const uint8_t> data, const GroupParams& gp) {
  ByteReader r(data);
  uint32_t n = r.u32();
  if (static_cast<size_t>(n) * gp.field_bytes() > data.size()) {
    throw DecodeError("field list longer than payload");
  }
  std::vector<FieldElement> out(n);
  for (auto& x : out) x = gp.read_field(r);
  r.expect_done();
  return out;
}

std::vector<int> all_parties(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return v;
}

}  // namespace

Shared deal_shared(const GroupParams& gp, const std::vector<MacKeyShare>& keys,
                   const FieldElement& x, Rng& rng) {
  const size_t n = keys.size();
  FieldElement alpha = reconstruct_key(keys, gp);
  FieldElement mac = gp.mul(alpha, x);
  Shared s(n);
  FieldElement vsum = 0, msum = 0;
  for (size_t i = 0; i + 1 < n; ++i) {
    s[i].value_share = rng.below(gp.order_q);
    s[i].mac_share = rng.below(gp.order_q);
    vsum = gp.add(vsum, s[i].value_share);
    msum = gp.add(msum, s[i].mac_share);
  }
  s[n - 1].value_share = gp.sub(gp.reduce(x), vsum);
  s[n - 1].mac_share = gp.sub(mac, msum);
  return s;
}

PreprocessingPool deal_preprocessing(const GroupParams& gp, int n_parties, size_t n_triples,
                                     size_t n_masks_per_party, Rng& rng) {
  if (n_parties < 3) throw InputError("preprocessing needs at least 3 parties");
  PreprocessingPool pool;
  pool.mac_key_shares.resize(static_cast<size_t>(n_parties));
  for (auto& k : pool.mac_key_shares) k.alpha_share = rng.below(gp.order_q);
  pool.triples.reserve(n_triples);
  for (size_t t = 0; t < n_triples; ++t) {
    FieldElement a = rng.below(gp.order_q), b = rng.below(gp.order_q);
    Triple tr;
    tr.a = deal_shared(gp, pool.mac_key_shares, a, rng);
    tr.b = deal_shared(gp, pool.mac_key_shares, b, rng);
    tr.c = deal_shared(gp, pool.mac_key_shares, gp.mul(a, b), rng);
    pool.triples.push_back(std::move(tr));
  }
  pool.masks.resize(static_cast<size_t>(n_parties));
  for (int owner = 0; owner < n_parties; ++owner) {
    auto& list = pool.masks[static_cast<size_t>(owner)];
    list.reserve(n_masks_per_party);
    for (size_t k = 0; k < n_masks_per_party; ++k) {
      InputMask m;
      m.owner = owner;
      m.plain_for_owner = rng.below(gp.order_q);
      m.shared = deal_shared(gp, pool.mac_key_shares, m.plain_for_owner, rng);
      list.push_back(std::move(m));
    }
  }
  return pool;
}

AuthShare share_add(const AuthShare& x, const AuthShare& y, const GroupParams& gp) {
  return {gp.add(x.value_share, y.value_share), gp.add(x.mac_share, y.mac_share)};
}

AuthShare share_sub(const AuthShare& x, const AuthShare& y, const GroupParams& gp) {
  return {gp.sub(x.value_share, y.value_share), gp.sub(x.mac_share, y.mac_share)};
}

AuthShare share_scale(const FieldElement& c, const AuthShare& x, const GroupParams& gp) {
  return {gp.mul(c, x.value_share), gp.mul(c, x.mac_share)};
}

AuthShare share_add_const(const FieldElement& c, const AuthShare& x, int party,
                          const MacKeyShare& key, const GroupParams& gp) {
  FieldElement cc = gp.reduce(c);
  return {party == 0 ? gp.add(x.value_share, cc) : x.value_share,
          gp.add(x.mac_share, gp.mul(cc, key.alpha_share))};
}

FieldElement reconstruct(const Shared& x, const GroupParams& gp) {
  FieldElement s = 0;
  for (const auto& a : x) s = gp.add(s, a.value_share);
  return s;
}

FieldElement reconstruct_mac(const Shared& x, const GroupParams& gp) {
  FieldElement s = 0;
  for (const auto& a : x) s = gp.add(s, a.mac_share);
  return s;
}

FieldElement reconstruct_key(const std::vector<MacKeyShare>& keys, const GroupParams& gp) {
  FieldElement s = 0;
  for (const auto& k : keys) s = gp.add(s, k.alpha_share);
  return s;
}

Shared input_value(int owner, const FieldElement& secret, InputMask& mask,
                   const std::vector<MacKeyShare>& keys, const GroupParams& gp,
                   FieldElement* broadcast_z) {
  if (mask.used) throw std::logic_error("input mask reused");
  if (mask.owner != owner) throw std::logic_error("input mask belongs to another party");
  mask.used = true;
  FieldElement z = gp.sub(gp.reduce(secret), mask.plain_for_owner);
  if (broadcast_z) *broadcast_z = z;
  Shared out(mask.shared.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = share_add_const(z, mask.shared[i], static_cast<int>(i), keys[i], gp);
  }
  return out;
}

// ---- session -------------------------------------------------------------

Spdz::Spdz(const GroupParams& gp, Bus& bus, int n_parties, PreprocessingPool pool,
           std::vector<Rng> party_rngs, MpcHooks hooks)
    : gp_(gp),
      bus_(bus),
      n_(n_parties),
      pool_(std::move(pool)),
      rngs_(std::move(party_rngs)),
      hooks_(std::move(hooks)),
      next_mask_(static_cast<size_t>(n_parties), 0) {
  if (n_ < 3) throw InputError("SPDZ session needs at least 3 parties");
  if (static_cast<int>(pool_.mac_key_shares.size()) != n_ ||
      static_cast<int>(rngs_.size()) != n_ || static_cast<int>(pool_.masks.size()) != n_) {
    throw InputError("SPDZ session: pool or rng count does not match parties");
  }
}

InputMask& Spdz::take_mask(int owner) {
  auto& list = pool_.masks[static_cast<size_t>(owner)];
  size_t& k = next_mask_[static_cast<size_t>(owner)];
  if (k >= list.size()) throw PoolExhausted("input masks exhausted");
  return list[k++];
}

Triple& Spdz::take_triple() {
  if (next_triple_ >= pool_.triples.size()) throw PoolExhausted("triples exhausted");
  Triple& t = pool_.triples[next_triple_++];
  if (t.used) throw std::logic_error("triple reused");
  t.used = true;
  return t;
}

size_t Spdz::triples_left() const { return pool_.triples.size() - next_triple_; }

size_t Spdz::masks_left(int owner) const {
  return pool_.masks[static_cast<size_t>(owner)].size() - next_mask_[static_cast<size_t>(owner)];
}

std::vector<Shared> Spdz::input(int owner, std::span<const FieldElement> secrets) {
  std::vector<InputMask*> masks;
  masks.reserve(secrets.size());
  for (size_t k = 0; k < secrets.size(); ++k) {
    InputMask& m = take_mask(owner);
    if (m.used) throw std::logic_error("input mask reused");
    m.used = true;
    masks.push_back(&m);
  }
  {
    auto c = bus_.clock(owner);
    std::vector<FieldElement> z(secrets.size());
    for (size_t k = 0; k < secrets.size(); ++k) {
      z[k] = gp_.sub(gp_.reduce(secrets[k]), masks[k]->plain_for_owner);
    }
    if (hooks_.on_values) hooks_.on_values(owner, "input.broadcast", z);
    bus_.broadcast(owner, "mpc.input", encode_fields(z, gp_));
  }
  bus_.barrier();

  std::vector<FieldElement> z;
  {
    auto c = bus_.clock_all(all_parties(n_));
    z = decode_fields(bus_.receive(0, owner, "mpc.input").payload, gp_);
    if (z.size() != secrets.size()) throw DecodeError("input broadcast has wrong length");
  }
  std::vector<Shared> out(secrets.size(), Shared(static_cast<size_t>(n_)));
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    std::vector<AuthShare> mine(secrets.size());
    for (size_t k = 0; k < secrets.size(); ++k) {
      mine[k] = share_add_const(z[k], masks[k]->shared[static_cast<size_t>(i)], i, key(i), gp_);
    }
    if (hooks_.on_shares) hooks_.on_shares(i, "input.local", mine, key(i));
    for (size_t k = 0; k < secrets.size(); ++k) out[k][static_cast<size_t>(i)] = mine[k];
  }
  return out;
}

Shared Spdz::input(int owner, const FieldElement& secret) {
  return input(owner, std::span(&secret, 1))[0];
}

Shared Spdz::add(const Shared& x, const Shared& y) const {
  Shared out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = share_add(x[i], y[i], gp_);
  return out;
}

Shared Spdz::sub(const Shared& x, const Shared& y) const {
  Shared out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = share_sub(x[i], y[i], gp_);
  return out;
}

Shared Spdz::scale(const FieldElement& c, const Shared& x) const {
  Shared out(x.size());
  FieldElement cc = gp_.reduce(c);
  for (size_t i = 0; i < x.size(); ++i) out[i] = share_scale(cc, x[i], gp_);
  return out;
}

Shared Spdz::add_const(const FieldElement& c, const Shared& x) const {
  Shared out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = share_add_const(c, x[i], static_cast<int>(i), key(static_cast<int>(i)), gp_);
  }
  return out;
}

Shared Spdz::zero() const { return Shared(static_cast<size_t>(n_), AuthShare{0, 0}); }

std::vector<std::vector<FieldElement>> Spdz::commit_reveal(
    std::vector<std::vector<FieldElement>> vals, std::string_view tag,
    std::string_view reveal_point, AbortKind on_mismatch, std::string_view step) {
  const uint64_t session = session_counter_++;
  const std::string commit_tag = std::string(tag) + ".commit";
  const std::string reveal_tag = std::string(tag) + ".reveal";
  auto digest = [&](int party, std::span<const uint8_t> nonce, std::span<const uint8_t> body) {
    Sha256 h;
    ByteWriter w;
    w.str(commit_tag);
    w.u32(static_cast<uint32_t>(party));
    w.u64(session);
    h.update(w.bytes()).update(nonce).update(body);
    return h.finish();
  };

  std::vector<Bytes> nonces(static_cast<size_t>(n_), Bytes(32));
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    rngs_[static_cast<size_t>(i)].fill(nonces[static_cast<size_t>(i)]);
    Bytes body = encode_fields(vals[static_cast<size_t>(i)], gp_);
    Digest d = digest(i, nonces[static_cast<size_t>(i)], body);
    bus_.broadcast(i, commit_tag, Bytes(d.begin(), d.end()));
  }
  bus_.barrier();
  std::vector<Bytes> commitments;
  for (int i = 0; i < n_; ++i) commitments.push_back(bus_.receive(0, i, commit_tag).payload);
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    auto& mine = vals[static_cast<size_t>(i)];
    if (hooks_.on_values) hooks_.on_values(i, reveal_point, mine);
    ByteWriter w;
    w.raw(nonces[static_cast<size_t>(i)]);
    w.raw(encode_fields(mine, gp_));
    bus_.broadcast(i, reveal_tag, std::move(w).take());
  }
  bus_.barrier();

  auto c = bus_.clock_all(all_parties(n_));
  std::vector<std::vector<FieldElement>> revealed(static_cast<size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    const Bytes& commitment = commitments[static_cast<size_t>(i)];
    const Bytes& reveal = bus_.receive(0, i, reveal_tag).payload;
    bool ok = reveal.size() >= 32;
    if (ok) {
      std::span<const uint8_t> all(reveal);
      Digest d = digest(i, all.first(32), all.subspan(32));
      ok = commitment.size() == d.size() && std::equal(d.begin(), d.end(), commitment.begin());
      if (ok) revealed[static_cast<size_t>(i)] = decode_fields(all.subspan(32), gp_);
    }
    if (!ok) {
      // Every honest party sees the same mismatch; the lowest id announces.
      int detector = i == 0 ? 1 : 0;
      bus_.abort_now(detector, {stage_number_, std::string(step), on_mismatch, -1,
                                "commitment of party " + std::to_string(i) + " does not open"});
    }
  }
  return revealed;
}

std::vector<FieldElement> Spdz::open(const std::vector<Shared>& xs) {
  std::vector<std::vector<FieldElement>> vals(static_cast<size_t>(n_));
  std::vector<Shared> held = xs;
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    const size_t ii = static_cast<size_t>(i);
    if (hooks_.on_shares) {
      std::vector<AuthShare> mine(xs.size());
      for (size_t k = 0; k < xs.size(); ++k) mine[k] = xs[k][ii];
      hooks_.on_shares(i, "open.share", mine, key(i));
      for (size_t k = 0; k < xs.size(); ++k) held[k][ii] = mine[k];
    }
    vals[ii].reserve(xs.size());
    for (size_t k = 0; k < xs.size(); ++k) vals[ii].push_back(held[k][ii].value_share);
  }
  auto revealed = commit_reveal(std::move(vals), "mpc.open", "open.reveal",
                                AbortKind::kMacFailed, "open");
  std::vector<FieldElement> out(xs.size(), FieldElement(0));
  {
    auto c = bus_.clock_all(all_parties(n_));
    for (int i = 0; i < n_; ++i) {
      const auto& r = revealed[static_cast<size_t>(i)];
      if (r.size() != xs.size()) throw DecodeError("opening has wrong length");
      for (size_t k = 0; k < xs.size(); ++k) out[k] = gp_.add(out[k], r[k]);
    }
  }
  for (size_t k = 0; k < xs.size(); ++k) pending_.push_back({out[k], std::move(held[k])});
  return out;
}

FieldElement Spdz::open(const Shared& x) { return open(std::vector<Shared>{x})[0]; }

std::vector<Shared> Spdz::mul(const std::vector<Shared>& xs, const std::vector<Shared>& ys) {
  if (xs.size() != ys.size()) throw InputError("mul: batch sizes differ");
  std::vector<Triple*> ts;
  std::vector<Shared> masked;
  for (size_t k = 0; k < xs.size(); ++k) {
    Triple& t = take_triple();
    ts.push_back(&t);
    masked.push_back(sub(xs[k], t.a));  // epsilon
    masked.push_back(sub(ys[k], t.b));  // delta
  }
  std::vector<FieldElement> opened = open(masked);
  std::vector<Shared> out;
  out.reserve(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) {
    const FieldElement& eps = opened[2 * k];
    const FieldElement& del = opened[2 * k + 1];
    Shared z = add(ts[k]->c, add(scale(eps, ts[k]->b), scale(del, ts[k]->a)));
    out.push_back(add_const(gp_.mul(eps, del), z));
  }
  return out;
}

Shared Spdz::mul(const Shared& x, const Shared& y) {
  return mul(std::vector<Shared>{x}, std::vector<Shared>{y})[0];
}

std::vector<FieldElement> Spdz::coin_toss(size_t k, std::string_view label) {
  std::vector<std::vector<FieldElement>> vals(static_cast<size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    auto& v = vals[static_cast<size_t>(i)];
    v.reserve(k);
    for (size_t j = 0; j < k; ++j) v.push_back(rngs_[static_cast<size_t>(i)].below(gp_.order_q));
  }
  auto revealed = commit_reveal(std::move(vals), "mpc.coin." + std::string(label), "coin.reveal",
                                AbortKind::kCoinTossMismatch, "coin-toss");
  auto c = bus_.clock_all(all_parties(n_));
  std::vector<FieldElement> out(k, FieldElement(0));
  for (const auto& r : revealed) {
    if (r.size() != k) throw DecodeError("coin reveal has wrong length");
    for (size_t j = 0; j < k; ++j) out[j] = gp_.add(out[j], r[j]);
  }
  return out;
}

void Spdz::mac_check(std::string_view step) {
  if (pending_.empty()) return;
  const size_t k = pending_.size();
  FieldElement seed = coin_toss("mac");
  std::vector<FieldElement> coeff(k);
  {
    auto c = bus_.clock_all(all_parties(n_));
    Rng expand(to_fixed_bytes(seed, gp_.field_bytes()));
    for (auto& x : coeff) x = gp_.add(expand.below(gp_.order_q - 1), 1);
  }
  std::vector<std::vector<FieldElement>> sigma(static_cast<size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    const size_t ii = static_cast<size_t>(i);
    const FieldElement& alpha = key(i).alpha_share;
    FieldElement s = 0;
    for (size_t j = 0; j < k; ++j) {
      const AuthShare& sh = pending_[j].shares[ii];
      FieldElement term = gp_.sub(sh.mac_share, gp_.mul(alpha, pending_[j].value));
      s = gp_.add(s, gp_.mul(coeff[j], term));
    }
    sigma[ii] = {s};
    if (hooks_.on_values) hooks_.on_values(i, "mac.sigma", sigma[ii]);
  }
  auto revealed = commit_reveal(std::move(sigma), "mpc.mac", "mac.reveal",
                                AbortKind::kMacFailed, step);
  pending_.clear();
  FieldElement total = 0;
  {
    auto c = bus_.clock_all(all_parties(n_));
    for (const auto& r : revealed) {
      if (r.size() != 1) throw DecodeError("MAC reveal has wrong length");
      total = gp_.add(total, r[0]);
    }
  }
  if (total != 0) {
    bus_.abort_now(0, {stage_number_, std::string(step), AbortKind::kMacFailed, -1,
                       "MAC check sum is nonzero"});
  }
}

// ---- distributed proofs --------------------------------------------------

DistributedCmResult distributed_prove_cm(Spdz& mpc, std::span<const SharedCmWitness> items,
                                         std::span<const FieldElement> betas) {
  const GroupParams& gp = mpc.params();
  if (betas.size() != items.size()) throw InputError("one challenge per statement");
  std::vector<Shared> zs;
  zs.reserve(2 * items.size());
  for (size_t k = 0; k < items.size(); ++k) {
    zs.push_back(mpc.add(items[k].mask_value, mpc.scale(betas[k], items[k].value)));
    zs.push_back(mpc.add(items[k].mask_rand, mpc.scale(betas[k], items[k].rand)));
  }
  std::vector<FieldElement> opened = mpc.open(zs);
  DistributedCmResult res;
  res.z_value.resize(items.size());
  res.z_rand.resize(items.size());
  res.accepted.resize(items.size());
  std::vector<int> everyone;
  for (int i = 0; i < mpc.n(); ++i) everyone.push_back(i);
  auto c = mpc.bus().clock_all(everyone);
  for (size_t k = 0; k < items.size(); ++k) {
    res.z_value[k] = opened[2 * k];
    res.z_rand[k] = opened[2 * k + 1];
    res.accepted[k] = cm_check(items[k].commitment, items[k].announce, res.z_value[k],
                               res.z_rand[k], betas[k], gp);
  }
  return res;
}

DistributedSumResult distributed_prove_sum(Spdz& mpc,
                                           std::span<const Commitment> payment_commitments,
                                           std::span<const Shared> rands,
                                           std::span<const Commitment> mask_announces,
                                           std::span<const Shared> mask_rands,
                                           const FieldElement& public_total, Transcript& t) {
  const GroupParams& gp = mpc.params();
  std::vector<int> everyone;
  for (int i = 0; i < mpc.n(); ++i) everyone.push_back(i);
  Commitment announce = identity_commitment();
  FieldElement beta;
  {
    auto c = mpc.bus().clock_all(everyone);
    for (const auto& a : mask_announces) announce = combine(announce, a, gp);
    sum_append_statement(t, payment_commitments, public_total, gp);
    t.append_commitment("sum.C'", announce, gp);
    beta = draw_challenge(t, gp);
  }
  Shared z = mpc.zero();
  for (const auto& r : mask_rands) z = mpc.add(z, r);
  Shared rsum = mpc.zero();
  for (const auto& r : rands) rsum = mpc.add(rsum, r);
  z = mpc.add(z, mpc.scale(beta, rsum));
  DistributedSumResult res;
  res.proof.announce = announce;
  res.proof.challenge = beta;
  res.proof.z_rand = mpc.open(z);
  auto c = mpc.bus().clock_all(everyone);
  res.accepted = sum_check(payment_commitments, public_total, announce, res.proof.z_rand, beta, gp);
  return res;
}

}  // namespace pess
