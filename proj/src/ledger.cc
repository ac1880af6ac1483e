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

#include "pess/ledger.h"

#include <stdexcept>

#include "pess/hash.h"

namespace pess {

using nlohmann::json;

namespace {

std::string hex_group(const GroupElement& x, const GroupParams& gp) {
  return to_hex(to_fixed_bytes(x, gp.group_bytes()));
}

std::string hex_field(const FieldElement& x, const GroupParams& gp) {
  return to_hex(to_fixed_bytes(x, gp.field_bytes()));
}

Commitment commitment_from_hex(const std::string& s, const GroupParams& gp) {
  Bytes b = from_hex(s);
  ByteReader r(b);
  Commitment c = read_commitment(r, gp);
  r.expect_done();
  return c;
}

FieldElement field_from_hex(const std::string& s, const GroupParams& gp) {
  Bytes b = from_hex(s);
  ByteReader r(b);
  FieldElement x = gp.read_field(r);
  r.expect_done();
  return x;
}

template <typename Proof, typename Reader>
Proof proof_from_hex(const std::string& s, const GroupParams& gp, Reader read) {
  Bytes b = from_hex(s);
  ByteReader r(b);
  Proof p = read(r, gp);
  r.expect_done();
  return p;
}

void write_entries(ByteWriter& w, const std::vector<MtxEntry>& entries, const GroupParams& gp) {
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    w.str(e.sender);
    w.str(e.recipient);
    write_commitment(w, e.value, gp);
  }
}

json entries_json(const std::vector<MtxEntry>& entries, const GroupParams& gp) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"sender", e.sender}, {"recipient", e.recipient},
                   {"value", hex_group(e.value.point, gp)}});
  }
  return out;
}

std::string chain_hash(const std::string& prev, const json& body) {
  Sha256 h;
  h.update(prev).update(body.dump());
  Digest d = h.finish();
  return to_hex(d);
}

}  // namespace

std::string address_of(std::span<const uint8_t> public_key) {
  return to_hex(sha256(public_key));
}

std::string mtx_id(const std::vector<MtxEntry>& entries, const FieldElement& public_total,
                   const GroupParams& gp) {
  ByteWriter w;
  w.str("pess/mtx/id");
  write_entries(w, entries, gp);
  gp.write_field(w, public_total);
  return to_hex(sha256(w.bytes()));
}

Bytes mtx_body(const MultiTransaction& mtx, const GroupParams& gp) {
  ByteWriter w;
  w.str("pess/mtx/body");
  w.str(mtx.id);
  write_entries(w, mtx.entries, gp);
  gp.write_field(w, mtx.public_total);
  write_proof(w, mtx.sum_proof, gp);
  return std::move(w).take();
}

Transcript mtx_sum_transcript(const std::string& id) {
  Transcript t("pess/mtx/sum");
  t.append("mtx", Bytes(id.begin(), id.end()));
  return t;
}

Transcript balance_transcript(const std::string& id, const std::string& sender) {
  Transcript t("pess/mtx/balance");
  t.append("mtx", Bytes(id.begin(), id.end()));
  t.append("sender", Bytes(sender.begin(), sender.end()));
  return t;
}

Bytes confirmation_message(const MultiTransaction& mtx, const std::string& sender, uint64_t nonce,
                           const ProofNN& proof, const GroupParams& gp) {
  ByteWriter w;
  w.str("pess/mtx/confirm");
  Digest body = sha256(mtx_body(mtx, gp));
  w.raw(body);
  w.str(sender);
  w.u64(nonce);
  write_proof(w, proof, gp);
  return std::move(w).take();
}

Bytes receipt_message(const Receipt& r, const GroupParams& gp) {
  ByteWriter w;
  w.str("pess/receipt");
  w.str(r.mtx_id);
  w.str(r.issuer);
  w.str(r.user);
  w.u32(r.slot);
  write_commitment(w, r.commitment, gp);
  return std::move(w).take();
}

Bytes demand_upload_message(const std::string& user, const std::vector<Commitment>& cs,
                            const GroupParams& gp) {
  ByteWriter w;
  w.str("pess/demand-upload");
  w.str(user);
  w.u32(static_cast<uint32_t>(cs.size()));
  for (const auto& c : cs) write_commitment(w, c, gp);
  return std::move(w).take();
}

Bytes vnm_claim_message(const VnmClaim& c, const GroupParams& gp) {
  ByteWriter w;
  w.str("pess/vnm-claim");
  w.str(c.claimant);
  w.u32(static_cast<uint32_t>(c.items.size()));
  for (const auto& it : c.items) {
    w.str(it.receipt_user);
    w.u32(it.slot);
    gp.write_field(w, it.opening.value);
    gp.write_field(w, it.opening.randomness);
  }
  return std::move(w).take();
}

// ---- ledger ----------------------------------------------------------------

Ledger::Ledger(const GroupParams& gp, Rng rng) : gp_(gp), rng_(std::move(rng)) {}

void Ledger::append_log(std::string type, json payload) {
  std::string prev = log_.empty() ? std::string(64, '0') : log_.back()["hash"].get<std::string>();
  json body = {{"seq", log_.size()}, {"type", std::move(type)}, {"prev", prev},
               {"payload", std::move(payload)}};
  std::string h = chain_hash(prev, body);
  body["hash"] = h;
  log_.push_back(std::move(body));
}

std::string Ledger::create_account(const Bytes& public_key) {
  std::string addr = address_of(public_key);
  if (accounts_.count(addr)) throw std::invalid_argument("account already exists");
  Account a{addr, public_key, identity_commitment(), 0};
  accounts_.emplace(addr, a);
  append_log("account", {{"address", addr}, {"public_key", to_hex(public_key)}});
  return addr;
}

Opening Ledger::top_up(const std::string& address, const mpz_class& amount) {
  if (amount < 0) throw std::invalid_argument("top-up amount must be non-negative");
  auto it = accounts_.find(address);
  if (it == accounts_.end()) throw std::invalid_argument("unknown account");
  Opening o;
  Commitment c = commit_random(gp_.reduce(amount), rng_, gp_, &o);
  it->second.balance = combine(it->second.balance, c, gp_);
  append_log("top_up", {{"address", address},
                        {"amount", amount.get_str()},
                        {"commitment", hex_group(c.point, gp_)},
                        {"balance", hex_group(it->second.balance.point, gp_)}});
  return o;
}

const Account& Ledger::account(const std::string& address) const {
  auto it = accounts_.find(address);
  if (it == accounts_.end()) throw std::invalid_argument("unknown account");
  return it->second;
}

LedgerVerdict Ledger::upload_demand_commitments(const std::string& user,
                                                std::vector<Commitment> cs,
                                                const Bytes& signature) {
  auto it = accounts_.find(user);
  if (it == accounts_.end()) return LedgerVerdict::fail("unknown-account", user);
  if (!verify_sig(demand_upload_message(user, cs, gp_), signature, it->second.public_key)) {
    return LedgerVerdict::fail("signature", "demand upload signature");
  }
  json arr = json::array();
  for (const auto& c : cs) arr.push_back(hex_group(c.point, gp_));
  demand_uploads_[user] = std::move(cs);
  append_log("demand_upload", {{"user", user},
                               {"commitments", arr},
                               {"signature", to_hex(signature)},
                               {"public_key", to_hex(it->second.public_key)}});
  return LedgerVerdict::pass();
}

const std::vector<Commitment>* Ledger::demand_commitments(const std::string& user) const {
  auto it = demand_uploads_.find(user);
  return it == demand_uploads_.end() ? nullptr : &it->second;
}

LedgerVerdict Ledger::submit_mtx(const MultiTransaction& mtx, const std::string& submitter) {
  if (done_.count(mtx.id)) return LedgerVerdict::fail("replay", "transaction id already used");
  if (mtx.id != mtx_id(mtx.entries, mtx.public_total, gp_)) {
    return LedgerVerdict::fail("malformed", "transaction id does not match its entries");
  }
  bool is_sender = false;
  for (const auto& e : mtx.entries) {
    if (!accounts_.count(e.sender) || !accounts_.count(e.recipient)) {
      return LedgerVerdict::fail("unknown-account", e.sender);
    }
    is_sender |= e.sender == submitter;
  }
  if (!is_sender) return LedgerVerdict::fail("not-a-sender", submitter);
  Bytes body = mtx_body(mtx, gp_);
  auto it = pending_.find(mtx.id);
  if (it == pending_.end()) {
    Pending p{mtx, body, {}, {}};
    it = pending_.emplace(mtx.id, std::move(p)).first;
  } else if (it->second.body != body) {
    // Senders must all submit the same sum proof.
    return LedgerVerdict::fail("mismatch", "submission differs from the pending transaction");
  }
  it->second.submitted[submitter] = true;
  return LedgerVerdict::pass();
}

LedgerVerdict Ledger::confirm_mtx(const std::string& id, const Confirmation& c) {
  auto it = pending_.find(id);
  if (it == pending_.end()) return LedgerVerdict::fail("unknown-mtx", id);
  if (!it->second.submitted.count(c.sender)) {
    return LedgerVerdict::fail("not-submitted", c.sender);
  }
  it->second.confirmations[c.sender] = c;
  return LedgerVerdict::pass();
}

LedgerVerdict Ledger::execute_mtx(const std::string& id) {
  if (done_.count(id)) return LedgerVerdict::fail("replay", "transaction id already used");
  auto it = pending_.find(id);
  if (it == pending_.end()) return LedgerVerdict::fail("unknown-mtx", id);
  const Pending& p = it->second;
  const MultiTransaction& mtx = p.mtx;
  for (const auto& e : mtx.entries) {
    if (!p.submitted.count(e.sender) || !p.confirmations.count(e.sender)) {
      return LedgerVerdict::fail("pending", "waiting for " + e.sender);
    }
  }

  auto reject = [&](std::string code, std::string detail) {
    append_log("mtx_rejected", {{"id", id}, {"code", code}, {"detail", detail}});
    done_[id] = false;
    pending_.erase(id);
    return LedgerVerdict::fail(std::move(code), std::move(detail));
  };

  // Validate everything before touching any balance.
  std::vector<Commitment> values;
  for (const auto& e : mtx.entries) values.push_back(e.value);
  {
    Transcript t = mtx_sum_transcript(id);
    if (!verify_sum(values, mtx.public_total, mtx.sum_proof, gp_, t)) {
      return reject("sum-proof", "sum proof does not verify");
    }
  }
  if (decode_raw(mtx.public_total, gp_) < 0) return reject("total", "negative public total");

  std::map<std::string, Commitment> debit;
  for (const auto& e : mtx.entries) {
    auto d = debit.find(e.sender);
    debit[e.sender] = d == debit.end() ? e.value : combine(d->second, e.value, gp_);
  }
  json confs = json::array();
  for (const auto& [sender, total] : debit) {
    const Confirmation& c = p.confirmations.at(sender);
    const Account& acct = accounts_.at(sender);
    if (c.nonce != acct.nonce) return reject("nonce", "stale nonce for " + sender);
    Bytes msg = confirmation_message(mtx, sender, c.nonce, c.balance_proof, gp_);
    if (!verify_sig(msg, c.signature, acct.public_key)) {
      return reject("signature", "bad signature from " + sender);
    }
    Commitment remaining = divide(acct.balance, total, gp_);
    Transcript t = balance_transcript(id, sender);
    if (!verify_nn(remaining, c.balance_proof, kRangeBits, gp_, t)) {
      return reject("balance-proof", "balance proof fails for " + sender);
    }
    confs.push_back({{"sender", sender},
                     {"nonce", c.nonce},
                     {"balance_before", hex_group(acct.balance.point, gp_)},
                     {"public_key", to_hex(acct.public_key)},
                     {"balance_proof", to_hex(serialize(c.balance_proof, gp_))},
                     {"signature", to_hex(c.signature)}});
  }

  for (const auto& e : mtx.entries) {
    Account& s = accounts_.at(e.sender);
    Account& r = accounts_.at(e.recipient);
    s.balance = divide(s.balance, e.value, gp_);
    r.balance = combine(r.balance, e.value, gp_);
  }
  for (const auto& [sender, total] : debit) accounts_.at(sender).nonce++;
  append_log("mtx_executed", {{"id", id},
                              {"entries", entries_json(mtx.entries, gp_)},
                              {"public_total", hex_field(mtx.public_total, gp_)},
                              {"sum_proof", to_hex(serialize(mtx.sum_proof, gp_))},
                              {"confirmations", confs}});
  done_[id] = true;
  pending_.erase(id);
  return LedgerVerdict::pass();
}

LedgerVerdict Ledger::attach_receipt(const Receipt& r) {
  if (!executed(r.mtx_id)) return LedgerVerdict::fail("unexecuted", "service not paid");
  auto issuer = accounts_.find(r.issuer);
  if (issuer == accounts_.end()) return LedgerVerdict::fail("unknown-account", r.issuer);
  if (!accounts_.count(r.user)) return LedgerVerdict::fail("unknown-account", r.user);
  if (!verify_sig(receipt_message(r, gp_), r.signature, issuer->second.public_key)) {
    return LedgerVerdict::fail("signature", "receipt not signed by issuer");
  }
  receipts_[{r.user, r.slot}] = r;
  append_log("receipt", {{"mtx_id", r.mtx_id},
                         {"issuer", r.issuer},
                         {"issuer_key", to_hex(issuer->second.public_key)},
                         {"user", r.user},
                         {"slot", r.slot},
                         {"commitment", hex_group(r.commitment.point, gp_)},
                         {"signature", to_hex(r.signature)}});
  return LedgerVerdict::pass();
}

const Receipt* Ledger::find_receipt(const std::string& user, uint32_t slot) const {
  auto it = receipts_.find({user, slot});
  return it == receipts_.end() ? nullptr : &it->second;
}

size_t Ledger::receipt_count(const std::string& user) const {
  size_t n = 0;
  for (const auto& [key, r] : receipts_) n += key.first == user;
  return n;
}

std::string Ledger::state_digest() const {
  ByteWriter w;
  for (const auto& [addr, a] : accounts_) {
    w.str(addr);
    write_commitment(w, a.balance, gp_);
    w.u64(a.nonce);
  }
  return to_hex(sha256(w.bytes()));
}

Commitment Ledger::balance_product() const {
  Commitment c = identity_commitment();
  for (const auto& [addr, a] : accounts_) c = combine(c, a.balance, gp_);
  return c;
}

// ---- VNM audit ---------------------------------------------------------------

VnmDecision audit_vnm(const Ledger& ledger, const std::string& operator_address,
                      const VnmClaim& claim, const std::vector<Rational>& aggregate_export,
                      const std::vector<Rational>& prices, const mpz_class& denominator,
                      std::vector<mpz_class>& claimed) {
  const GroupParams& gp = ledger.params();
  auto reject = [](std::string why) { return VnmDecision{false, 0, std::move(why)}; };
  if (!ledger.has_account(claim.claimant)) return reject("unknown claimant");
  if (!verify_sig(vnm_claim_message(claim, gp), claim.signature,
                  ledger.account(claim.claimant).public_key)) {
    return reject("claim signature invalid");
  }
  const Bytes& op_key = ledger.account(operator_address).public_key;
  std::vector<mpz_class> add(aggregate_export.size(), 0);
  Rational credit = 0;
  for (const auto& it : claim.items) {
    if (it.receipt_user != claim.claimant) return reject("receipt belongs to another account");
    if (it.slot >= aggregate_export.size()) return reject("slot out of range");
    const Receipt* r = ledger.find_receipt(it.receipt_user, it.slot);
    if (!r) return reject("no receipt for slot " + std::to_string(it.slot));
    if (r->issuer != operator_address || !verify_sig(receipt_message(*r, gp), r->signature, op_key)) {
      return reject("receipt signature invalid");
    }
    if (!verify_opening(r->commitment, it.opening, gp)) {
      return reject("opening does not match receipt at slot " + std::to_string(it.slot));
    }
    mpz_class v = it.opening.value;
    if (2 * v >= gp.order_q) return reject("negative discharge claimed");
    add[it.slot] += v;
    credit += ratio(v, denominator) * prices[it.slot];
  }
  for (size_t t = 0; t < add.size(); ++t) {
    if (ratio(claimed[t] + add[t], denominator) > aggregate_export[t]) {
      return reject("claims exceed exported energy at slot " + std::to_string(t));
    }
  }
  for (size_t t = 0; t < add.size(); ++t) claimed[t] += add[t];
  return {true, credit, ""};
}

// ---- replay ------------------------------------------------------------------

LogReplay replay_ledger_log(const std::vector<json>& log, const GroupParams& gp) {
  LogReplay out;
  std::string prev(64, '0');
  for (const auto& entry : log) {
    ++out.entries;
    const std::string seq = std::to_string(out.entries - 1);
    try {
      json body = entry;
      std::string h = body.at("hash").get<std::string>();
      body.erase("hash");
      if (body.at("prev").get<std::string>() != prev || chain_hash(prev, body) != h) {
        out.chain_ok = false;
        out.failures.push_back("hash chain broken at entry " + seq);
      }
      prev = h;
      const std::string type = entry.at("type");
      const json& p = entry.at("payload");
      if (type == "mtx_executed") {
        MultiTransaction mtx;
        mtx.id = p.at("id");
        for (const auto& e : p.at("entries")) {
          mtx.entries.push_back({e.at("sender"), e.at("recipient"),
                                 commitment_from_hex(e.at("value"), gp)});
        }
        mtx.public_total = field_from_hex(p.at("public_total"), gp);
        mtx.sum_proof = proof_from_hex<ProofSum>(p.at("sum_proof"), gp, read_proof_sum);
        std::vector<Commitment> values;
        for (const auto& e : mtx.entries) values.push_back(e.value);
        Transcript ts = mtx_sum_transcript(mtx.id);
        ++out.proofs_checked;
        if (mtx.id != mtx_id(mtx.entries, mtx.public_total, gp) ||
            !verify_sum(values, mtx.public_total, mtx.sum_proof, gp, ts)) {
          out.failures.push_back("sum proof fails at entry " + seq);
        }
        for (const auto& c : p.at("confirmations")) {
          std::string sender = c.at("sender");
          Bytes pk = from_hex(c.at("public_key").get<std::string>());
          ProofNN nn = proof_from_hex<ProofNN>(c.at("balance_proof"), gp, read_proof_nn);
          Commitment total = identity_commitment();
          for (const auto& e : mtx.entries) {
            if (e.sender == sender) total = combine(total, e.value, gp);
          }
          Commitment before = commitment_from_hex(c.at("balance_before"), gp);
          Transcript tb = balance_transcript(mtx.id, sender);
          ++out.proofs_checked;
          if (!verify_nn(divide(before, total, gp), nn, kRangeBits, gp, tb)) {
            out.failures.push_back("balance proof fails at entry " + seq);
          }
          ++out.signatures_checked;
          Bytes msg = confirmation_message(mtx, sender, c.at("nonce").get<uint64_t>(), nn, gp);
          if (address_of(pk) != sender ||
              !verify_sig(msg, from_hex(c.at("signature").get<std::string>()), pk)) {
            out.failures.push_back("confirmation signature fails at entry " + seq);
          }
        }
      } else if (type == "receipt") {
        Receipt r;
        r.mtx_id = p.at("mtx_id");
        r.issuer = p.at("issuer");
        r.user = p.at("user");
        r.slot = p.at("slot");
        r.commitment = commitment_from_hex(p.at("commitment"), gp);
        Bytes pk = from_hex(p.at("issuer_key").get<std::string>());
        ++out.signatures_checked;
        if (address_of(pk) != r.issuer ||
            !verify_sig(receipt_message(r, gp), from_hex(p.at("signature").get<std::string>()), pk)) {
          out.failures.push_back("receipt signature fails at entry " + seq);
        }
      } else if (type == "demand_upload") {
        std::vector<Commitment> cs;
        for (const auto& c : p.at("commitments")) cs.push_back(commitment_from_hex(c, gp));
        Bytes pk = from_hex(p.at("public_key").get<std::string>());
        ++out.signatures_checked;
        if (address_of(pk) != p.at("user").get<std::string>() ||
            !verify_sig(demand_upload_message(p.at("user"), cs, gp),
                        from_hex(p.at("signature").get<std::string>()), pk)) {
          out.failures.push_back("demand upload signature fails at entry " + seq);
        }
      }
    } catch (const std::exception& e) {
      out.failures.push_back("entry " + seq + " malformed: " + e.what());
    }
  }
  return out;
}

}  // namespace pess
