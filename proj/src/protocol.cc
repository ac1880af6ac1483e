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

#include "pess/protocol.h"

#include <chrono>
#include <memory>
#include <stdexcept>

#include "pess/errors.h"
#include "pess/ledger.h"
#include "pess/mpc.h"
#include "pess/signature.h"
#include "pess/zkp.h"

namespace pess {

using nlohmann::json;

void validate_config(const ProtocolConfig& cfg) {
  if (cfg.n_users() < 3) throw InputError("protocol needs at least 3 users");
  const size_t T = cfg.slots();
  if (T == 0) throw InputError("price plan is empty");
  for (const auto& d : cfg.demands) {
    if (d.size() != T) throw InputError("demand profile length differs from the price plan");
    for (const auto& v : d) {
      if (v < 0) throw InputError("demands must be non-negative");
    }
  }
  validate_inputs(aggregate_demand(cfg.demands), cfg.prices, cfg.storage);
  if (!cfg.initial_balance.empty() && cfg.initial_balance.size() != cfg.n_users()) {
    throw InputError("one initial balance per user");
  }
  if (cfg.scale < 0) throw InputError("scale must be positive");
  if (cfg.epsilon && *cfg.epsilon <= 0) throw InputError("epsilon must be positive");
  for (const auto& a : cfg.adversary) {
    if (a.party < 0 || a.party > static_cast<int>(cfg.n_users())) {
      throw InputError("adversary party out of range");
    }
    if (a.slot >= T) throw InputError("adversary slot out of range");
  }
}

bool visible_to(const Message& m, int party) {
  return m.sender == party || m.recipient == kBroadcast || m.recipient == party;
}

std::string ProtocolRun::failure_kind() const {
  if (abort) return std::string(abort_kind_name(abort->kind));
  if (!rejections.empty()) return std::string(abort_kind_name(rejections.front().kind));
  return "";
}

DemandProfiles quantize_demands(const DemandProfiles& d, int64_t scale) {
  DemandProfiles out = d;
  const mpz_class s(static_cast<long>(scale));
  for (auto& row : out) {
    for (auto& v : row) v = ratio(round_half_away(v * s), s);
  }
  return out;
}

Transcript demand_range_transcript(int user, size_t slot) {
  Transcript t("pess/stage1/nn");
  ByteWriter w;
  w.u32(static_cast<uint32_t>(user));
  w.u32(static_cast<uint32_t>(slot));
  t.append("slot", w.bytes());
  return t;
}

GroupParams protocol_group(const ProtocolConfig& cfg) {
  GroupParams gp = group_by_name(cfg.group);
  if (cfg.scale > 0) gp.fixed_point_scale = cfg.scale;
  return gp;
}

PlainOutcome run_plaintext(const ProtocolConfig& cfg) {
  validate_config(cfg);
  const GroupParams gp = protocol_group(cfg);
  PlainOutcome out;
  DemandProfiles q = quantize_demands(cfg.demands, gp.fixed_point_scale);
  out.aggregate_demand = aggregate_demand(q);
  out.schedule = solve_p2(out.aggregate_demand, cfg.prices, cfg.storage);
  out.costs = cost_sharing(out.schedule, q, cfg.prices, cfg.storage, cfg.scheme);
  for (const auto& u : disaggregate(out.schedule, q)) {
    Rational c = 0;
    for (size_t t = 0; t < u.discharge.size(); ++t) c += u.discharge[t] * cfg.prices.prices[t];
    out.credits.push_back(c);
  }
  return out;
}

namespace {

constexpr std::string_view kMutations[] = {
    "negative-demand", "share-mismatch", "tamper-share",   "tamper-coin",   "stale-prices",
    "commit-mismatch", "drain-balance",  "tamper-receipt", "inflate-claim",
};

void write_commitments(ByteWriter& w, std::span<const Commitment> cs, const GroupParams& gp) {
  w.u32(static_cast<uint32_t>(cs.size()));
  for (const auto& c : cs) write_commitment(w, c, gp);
}

std::vector<Commitment> read_commitments(ByteReader& r, const GroupParams& gp) {
  std::vector<Commitment> out(r.u32());
  for (auto& c : out) c = read_commitment(r, gp);
  return out;
}

json rationals_json(std::span<const Rational> xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(x.get_str());
  return a;
}

std::vector<Rational> rationals_from(const json& a) {
  std::vector<Rational> out;
  for (const auto& x : a) out.push_back(parse_rational(x.get<std::string>()));
  return out;
}

Bytes json_bytes(const json& j) {
  std::string s = j.dump();
  return Bytes(s.begin(), s.end());
}

json bytes_json(const Bytes& b) { return json::parse(b.begin(), b.end()); }

class Runner {
 public:
  explicit Runner(const ProtocolConfig& cfg)
      : cfg_(cfg),
        gp_(protocol_group(cfg)),
        ids_{static_cast<int>(cfg.n_users())},
        n_(static_cast<int>(cfg.n_users())),
        T_(cfg.slots()),
        root_(cfg.seed),
        bus_(ids_.total()),
        ledger_(gp_, root_.fork("ledger")) {
    for (const auto& a : cfg.adversary) {
      bool known = false;
      for (auto m : kMutations) known |= a.mutation == m;
      if (!known) throw InputError("unknown adversary mutation '" + a.mutation + "'");
    }
    for (int p = 0; p < ids_.total(); ++p) rngs_.push_back(root_.fork("party/" + std::to_string(p)));
    users_.resize(static_cast<size_t>(n_));
    scale_ = mpz_class(static_cast<long>(gp_.fixed_point_scale));
  }

  ProtocolRun run();

 private:
  struct UserState {
    std::vector<FieldElement> demand;
    std::vector<Opening> demand_open;
    Opening balance{0, 0};
    Opening payment{0, 0};
    FieldElement sum_mask = 0;
    Rational payment_value;
    std::vector<Rational> discharge;
    Rational credit = 0;
    bool credited = false;
  };

  const AdversaryAction* adversary(int party, std::string_view mutation) const {
    for (const auto& a : cfg_.adversary) {
      if (a.party == party && a.mutation == mutation) return &a;
    }
    return nullptr;
  }
  bool scripted_here(int party, std::string_view mutation) const {
    const AdversaryAction* a = adversary(party, mutation);
    return a && a->stage == stage_ && a->step == step_;
  }

  void enter(int stage, std::string step) {
    stage_ = stage;
    step_ = std::move(step);
    if (mpc_) mpc_->set_stage_number(stage);
  }
  [[noreturn]] void fail(int detector, AbortKind kind, std::string detail) {
    bus_.abort_now(detector, {stage_, step_, kind, -1, std::move(detail)});
  }
  std::vector<int> user_ids() const {
    std::vector<int> v(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i) v[static_cast<size_t>(i)] = i;
    return v;
  }
  Rng& rng(int party) { return rngs_[static_cast<size_t>(party)]; }
  UserState& user(int i) { return users_[static_cast<size_t>(i)]; }

  void stage0();
  void stage1();
  void stage2();
  void stage3();
  void make_mpc();

  const ProtocolConfig& cfg_;
  GroupParams gp_;
  PartyIds ids_;
  int n_;
  size_t T_;
  Rng root_;
  Bus bus_;
  Ledger ledger_;
  std::unique_ptr<Spdz> mpc_;
  std::vector<Rng> rngs_;
  mpz_class scale_;
  int stage_ = 0;
  std::string step_ = "setup";

  std::vector<KeyPair> keys_;
  std::vector<std::string> addr_;
  std::vector<UserState> users_;

  // Public state, identical at every honest party.
  std::vector<std::vector<Commitment>> demand_cm_;
  std::vector<Rational> aggregate_;
  ScheduleSolution schedule_;
  CostBreakdown public_costs_;
  std::vector<Commitment> payment_cm_;
  FieldElement payment_total_ = 0;
  FieldElement payment_rand_total_ = 0;
  MultiTransaction mtx_;

  // Storage operator and grid operator state.
  std::vector<Rational> op_aggregate_;
  ScheduleSolution op_schedule_;
  std::vector<Rational> grid_export_;
  Opening operator_balance_{0, 0};
  std::vector<VnmClaim> claims_;
  std::vector<int> claim_user_;

  ProtocolRun out_;
};

void Runner::make_mpc() {
  Rng dealer = root_.fork("dealer");
  // Per user: a, r, a', r' per slot, then P, r, r' for the payment.
  PreprocessingPool pool = deal_preprocessing(gp_, n_, 0, 4 * T_ + 3, dealer);
  std::vector<Rng> party_rngs;
  for (int i = 0; i < n_; ++i) party_rngs.push_back(rng(i).fork("mpc"));
  MpcHooks hooks;
  hooks.on_shares = [this](int party, std::string_view point, std::vector<AuthShare>& shares,
                           const MacKeyShare&) {
    if (point == "open.share" && !shares.empty() && scripted_here(party, "tamper-share")) {
      shares[0].value_share = gp_.add(shares[0].value_share, 1);
    }
  };
  hooks.on_values = [this](int party, std::string_view point, std::vector<FieldElement>& vals) {
    if (point == "coin.reveal" && !vals.empty() && scripted_here(party, "tamper-coin")) {
      vals[0] = gp_.add(vals[0], 1);
    }
  };
  mpc_ = std::make_unique<Spdz>(gp_, bus_, n_, std::move(pool), std::move(party_rngs),
                                std::move(hooks));
}

void Runner::stage0() {
  bus_.set_stage("setup");
  enter(0, "keys");
  for (int p = 0; p < ids_.total(); ++p) {
    auto c = bus_.clock(p);
    keys_.push_back(generate_keypair(rng(p)));
  }
  // Users and the storage operator register with the ledger.
  for (int p = 0; p <= ids_.op(); ++p) bus_.send(p, ids_.ledger(), "s0.register", keys_[p].public_key);
  {
    json params = {{"prices", rationals_json(cfg_.prices.prices)},
                   {"capacity", rationals_json(cfg_.storage.capacity)},
                   {"service_fee", cfg_.storage.service_fee.get_str()},
                   {"eff_charge", cfg_.storage.eff_charge.get_str()},
                   {"eff_discharge", cfg_.storage.eff_discharge.get_str()},
                   {"rate_charge", cfg_.storage.rate_charge.get_str()},
                   {"rate_discharge", cfg_.storage.rate_discharge.get_str()},
                   {"vnm_fee_fraction", cfg_.storage.vnm_fee_fraction.get_str()}};
    bus_.broadcast(ids_.op(), "s0.params", json_bytes(params));
  }
  bus_.barrier();
  {
    auto c = bus_.clock(ids_.ledger());
    for (int p = 0; p <= ids_.op(); ++p) {
      addr_.push_back(ledger_.create_account(bus_.receive(ids_.ledger(), p, "s0.register").payload));
    }
  }

  enter(0, "funding");
  for (int i = 0; i < n_; ++i) {
    if (adversary(i, "drain-balance")) continue;
    Rational amount;
    if (!cfg_.initial_balance.empty()) {
      amount = cfg_.initial_balance[static_cast<size_t>(i)];
    } else {
      amount = 1;
      for (size_t t = 0; t < T_; ++t) amount += cfg_.demands[i][t] * cfg_.prices.prices[t];
    }
    mpz_class raw = round_half_away(amount * scale_);
    if (raw < 0) throw InputError("initial balance must be non-negative");
    Opening o = ledger_.top_up(addr_[i], raw);
    auto c = bus_.clock(i);
    user(i).balance = combine(user(i).balance, o, gp_);
  }
}

void Runner::stage1() {
  bus_.set_stage("stage1");
  make_mpc();
  const std::vector<int> users = user_ids();

  enter(1, "commit");
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    UserState& u = user(i);
    const AdversaryAction* neg = scripted_here(i, "negative-demand") ? adversary(i, "negative-demand")
                                                                      : nullptr;
    ByteWriter w;
    w.u32(static_cast<uint32_t>(T_));
    for (size_t t = 0; t < T_; ++t) {
      FieldElement v = encode_fixed(cfg_.demands[i][t], gp_);
      bool forge = neg && neg->slot == t;
      if (forge) v = encode_raw(-gp_.fixed_point_scale, gp_);
      Opening o;
      Commitment cm = commit_random(v, rng(i), gp_, &o);
      Transcript tr = demand_range_transcript(i, t);
      ProofNN proof =
          forge ? prove_nn_with_bits(o, bit_decompose(gp_.from_int(gp_.fixed_point_scale), kRangeBits),
                                     gp_, tr, rng(i))
                : prove_nn(o, kRangeBits, gp_, tr, rng(i));
      u.demand.push_back(v);
      u.demand_open.push_back(o);
      write_commitment(w, cm, gp_);
      write_proof(w, proof, gp_);
    }
    bus_.broadcast(i, "s1.commit", std::move(w).take());
  }
  bus_.barrier();
  {
    // Checked once, charged to every user.
    auto c = bus_.clock_all(users);
    demand_cm_.assign(static_cast<size_t>(n_), {});
    for (int i = 0; i < n_; ++i) {
      ByteReader r(bus_.receive(0, i, "s1.commit").payload);
      if (r.u32() != T_) fail(i == 0 ? 1 : 0, AbortKind::kNnProofFailed, "wrong slot count");
      for (size_t t = 0; t < T_; ++t) {
        Commitment cm = read_commitment(r, gp_);
        ProofNN proof = read_proof_nn(r, gp_);
        Transcript tr = demand_range_transcript(i, t);
        if (!verify_nn(cm, proof, kRangeBits, gp_, tr)) {
          fail(i == 0 ? 1 : 0, AbortKind::kNnProofFailed,
               "range proof of user " + std::to_string(i) + " slot " + std::to_string(t));
        }
        demand_cm_[i].push_back(cm);
      }
      r.expect_done();
    }
  }

  enter(1, "input");
  std::vector<std::vector<Shared>> sh_a(n_), sh_r(n_), sh_ma(n_), sh_mr(n_);
  for (int i = 0; i < n_; ++i) {
    std::vector<FieldElement> secrets;
    {
      auto c = bus_.clock(i);
      const UserState& u = user(i);
      const AdversaryAction* mis = scripted_here(i, "share-mismatch")
                                       ? adversary(i, "share-mismatch")
                                       : nullptr;
      for (size_t t = 0; t < T_; ++t) {
        FieldElement v = u.demand_open[t].value;
        if (mis && mis->slot == t) v = gp_.add(v, 1);
        secrets.push_back(v);
      }
      for (size_t t = 0; t < T_; ++t) secrets.push_back(u.demand_open[t].randomness);
    }
    auto shared = mpc_->input(i, secrets);
    sh_a[i].assign(shared.begin(), shared.begin() + static_cast<long>(T_));
    sh_r[i].assign(shared.begin() + static_cast<long>(T_), shared.end());
  }

  enter(1, "zkpcm");
  std::vector<std::vector<Commitment>> announce(n_);
  std::vector<std::vector<FieldElement>> mask_secrets(n_);
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    std::vector<FieldElement> mv, mr;
    for (size_t t = 0; t < T_; ++t) {
      mv.push_back(rng(i).below(gp_.order_q));
      mr.push_back(rng(i).below(gp_.order_q));
      announce[i].push_back(commit(mv.back(), mr.back(), gp_));
    }
    mask_secrets[i] = mv;
    mask_secrets[i].insert(mask_secrets[i].end(), mr.begin(), mr.end());
    ByteWriter w;
    write_commitments(w, announce[i], gp_);
    bus_.broadcast(i, "s1.cm.announce", std::move(w).take());
  }
  bus_.barrier();
  {
    auto c = bus_.clock_all(users);
    for (int i = 0; i < n_; ++i) {
      ByteReader r(bus_.receive(0, i, "s1.cm.announce").payload);
      announce[i] = read_commitments(r, gp_);
      r.expect_done();
      if (announce[i].size() != T_) throw DecodeError("announce has wrong length");
    }
  }
  for (int i = 0; i < n_; ++i) {
    auto shared = mpc_->input(i, mask_secrets[i]);
    sh_ma[i].assign(shared.begin(), shared.begin() + static_cast<long>(T_));
    sh_mr[i].assign(shared.begin() + static_cast<long>(T_), shared.end());
  }
  // All announces are on the bus before the challenge is drawn.
  std::vector<FieldElement> beta = mpc_->coin_toss(T_, "beta");
  std::vector<SharedCmWitness> items;
  std::vector<FieldElement> betas;
  for (int i = 0; i < n_; ++i) {
    for (size_t t = 0; t < T_; ++t) {
      items.push_back({demand_cm_[i][t], announce[i][t], sh_a[i][t], sh_r[i][t], sh_ma[i][t],
                       sh_mr[i][t]});
      betas.push_back(beta[t]);
    }
  }
  DistributedCmResult cm = distributed_prove_cm(*mpc_, items, betas);
  mpc_->mac_check(step_);
  for (size_t k = 0; k < items.size(); ++k) {
    if (!cm.accepted[k]) {
      fail(0, AbortKind::kZkpCmFailed,
           "user " + std::to_string(k / T_) + " slot " + std::to_string(k % T_));
    }
  }

  enter(1, "aggregate");
  std::vector<Shared> total(T_, mpc_->zero());
  for (int i = 0; i < n_; ++i) {
    for (size_t t = 0; t < T_; ++t) total[t] = mpc_->add(total[t], sh_a[i][t]);
  }
  std::vector<FieldElement> opened = mpc_->open(total);
  mpc_->mac_check(step_);
  {
    auto c = bus_.clock_all(users);
    for (const auto& v : opened) aggregate_.push_back(decode_fixed(v, gp_));
  }

  enter(1, "solve");
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    ScheduleSolution sol = solve_p2(aggregate_, cfg_.prices, cfg_.storage);
    CostBreakdown costs = cost_sharing(sol, {aggregate_}, cfg_.prices, cfg_.storage, cfg_.scheme);
    if (i == 0) {
      schedule_ = std::move(sol);
      public_costs_ = std::move(costs);
    } else if (sol.discharge != schedule_.discharge || sol.charge != schedule_.charge ||
               costs.cost_ess != public_costs_.cost_ess) {
      throw std::logic_error("users disagree on the public schedule");
    }
  }
}

void Runner::stage2() {
  bus_.set_stage("stage2");
  const std::vector<int> users = user_ids();

  enter(2, "payment");
  std::vector<Commitment> mask_cm(static_cast<size_t>(n_));
  payment_cm_.assign(static_cast<size_t>(n_), {});
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    UserState& u = user(i);
    std::vector<Rational> own;
    for (const auto& v : u.demand) own.push_back(decode_fixed(v, gp_));
    const std::vector<Rational>& p_hat = scripted_here(i, "stale-prices")
                                             ? cfg_.prices.prices
                                             : public_costs_.effective_prices;
    Rational p = user_payment(own, p_hat, public_costs_.cost_ess, public_costs_.cost_org,
                              static_cast<size_t>(n_), cfg_.scheme);
    u.payment = {encode_fixed(p, gp_), rng(i).below(gp_.order_q)};
    u.payment_value = decode_fixed(u.payment.value, gp_);
    u.sum_mask = rng(i).below(gp_.order_q);
    Opening committed = u.payment;
    if (scripted_here(i, "commit-mismatch")) committed.value = gp_.add(committed.value, 1);
    ByteWriter w;
    write_commitment(w, commit(committed, gp_), gp_);
    write_commitment(w, commit(0, u.sum_mask, gp_), gp_);
    bus_.broadcast(i, "s2.payment", std::move(w).take());
  }
  bus_.barrier();
  {
    auto c = bus_.clock_all(users);
    for (int i = 0; i < n_; ++i) {
      ByteReader r(bus_.receive(0, i, "s2.payment").payload);
      payment_cm_[i] = read_commitment(r, gp_);
      mask_cm[i] = read_commitment(r, gp_);
      r.expect_done();
    }
  }
  std::vector<Shared> sh_p, sh_r, sh_m;
  for (int i = 0; i < n_; ++i) {
    const UserState& u = user(i);
    std::vector<FieldElement> secrets{u.payment.value, u.payment.randomness, u.sum_mask};
    auto shared = mpc_->input(i, secrets);
    sh_p.push_back(shared[0]);
    sh_r.push_back(shared[1]);
    sh_m.push_back(shared[2]);
  }

  enter(2, "cost-check");
  Shared sum_p = mpc_->zero(), sum_r = mpc_->zero();
  for (int i = 0; i < n_; ++i) {
    sum_p = mpc_->add(sum_p, sh_p[i]);
    sum_r = mpc_->add(sum_r, sh_r[i]);
  }
  std::vector<FieldElement> opened = mpc_->open(std::vector<Shared>{sum_p, sum_r});
  mpc_->mac_check(step_);
  payment_total_ = opened[0];
  payment_rand_total_ = opened[1];
  {
    auto c = bus_.clock_all(users);
    Rational eps = cfg_.epsilon ? *cfg_.epsilon
                                : ratio(mpz_class(static_cast<long>(n_ + T_)), scale_);
    Rational diff = decode_fixed(payment_total_, gp_) - public_costs_.cost_ess;
    if (abs(diff) >= eps) {
      fail(0, AbortKind::kCostMismatch,
           "payments sum to " + to_decimal(decode_fixed(payment_total_, gp_)) + ", expected " +
               to_decimal(public_costs_.cost_ess));
    }
  }

  enter(2, "sum-proof");
  for (int i = 0; i < n_; ++i) mtx_.entries.push_back({addr_[i], addr_[ids_.op()], payment_cm_[i]});
  mtx_.public_total = payment_total_;
  mtx_.id = mtx_id(mtx_.entries, payment_total_, gp_);
  {
    Transcript tr = mtx_sum_transcript(mtx_.id);
    DistributedSumResult sum =
        distributed_prove_sum(*mpc_, payment_cm_, sh_r, mask_cm, sh_m, payment_total_, tr);
    mpc_->mac_check(step_);
    if (!sum.accepted) fail(0, AbortKind::kSumProofFailed, "payment commitments do not sum to the total");
    mtx_.sum_proof = sum.proof;
  }

  enter(2, "balance-proof");
  std::vector<Confirmation> confirmations;
  const mpz_class limit = mpz_class(1) << kRangeBits;
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    const UserState& u = user(i);
    Opening rest = divide(u.balance, u.payment, gp_);
    Transcript tr = balance_transcript(mtx_.id, addr_[i]);
    // Short of funds: the truncated bits cannot verify.
    ProofNN proof = rest.value < limit
                        ? prove_nn(rest, kRangeBits, gp_, tr, rng(i))
                        : prove_nn_with_bits(rest, bit_decompose(rest.value, kRangeBits), gp_, tr,
                                             rng(i));
    uint64_t nonce = ledger_.account(addr_[i]).nonce;
    Confirmation conf{addr_[i], nonce, proof,
                      sign(confirmation_message(mtx_, addr_[i], nonce, proof, gp_), keys_[i])};
    bus_.send(i, ids_.ledger(), "s2.submit", mtx_body(mtx_, gp_));
    ByteWriter w;
    w.str(conf.sender);
    w.u64(conf.nonce);
    write_proof(w, conf.balance_proof, gp_);
    w.blob(conf.signature);
    bus_.send(i, ids_.ledger(), "s2.confirm", std::move(w).take());
    confirmations.push_back(std::move(conf));
  }
  bus_.barrier();

  enter(2, "execute");
  {
    auto c = bus_.clock(ids_.ledger());
    for (int i = 0; i < n_; ++i) {
      ByteReader r(bus_.receive(ids_.ledger(), i, "s2.confirm").payload);
      Confirmation conf;
      conf.sender = r.str();
      conf.nonce = r.u64();
      conf.balance_proof = read_proof_nn(r, gp_);
      conf.signature = r.blob();
      r.expect_done();
      if (bus_.receive(ids_.ledger(), i, "s2.submit").payload != mtx_body(mtx_, gp_)) {
        throw std::logic_error("submitted transaction differs from the agreed one");
      }
      LedgerVerdict v = ledger_.submit_mtx(mtx_, addr_[i]);
      if (v.ok) v = ledger_.confirm_mtx(mtx_.id, conf);
      if (!v.ok) throw std::logic_error("ledger refused submission: " + v.code);
    }
  }
  LedgerVerdict verdict;
  out_.ledger_digest_before_execute = ledger_.state_digest();
  {
    auto c = bus_.clock(ids_.ledger());
    verdict = ledger_.execute_mtx(mtx_.id);
  }
  if (!verdict.ok) {
    AbortKind kind = verdict.code == "balance-proof" ? AbortKind::kBalanceProofFailed
                     : verdict.code == "sum-proof"   ? AbortKind::kSumProofFailed
                                                     : throw std::logic_error(
                                                           "ledger rejected: " + verdict.code);
    fail(ids_.ledger(), kind, verdict.detail);
  }
  bus_.broadcast(ids_.ledger(), "s2.executed", Bytes(mtx_.id.begin(), mtx_.id.end()));
  bus_.barrier();
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    user(i).balance = divide(user(i).balance, user(i).payment, gp_);
  }
  operator_balance_ = combine(operator_balance_, {payment_total_, payment_rand_total_}, gp_);
  {
    Opening sum = operator_balance_;
    for (int i = 0; i < n_; ++i) sum = combine(sum, user(i).balance, gp_);
    out_.conserved = verify_opening(ledger_.balance_product(), sum, gp_);
  }

  enter(2, "handover");
  {
    json sched = {{"demand", rationals_json(aggregate_)},
                  {"charge", rationals_json(schedule_.charge)},
                  {"discharge", rationals_json(schedule_.discharge)},
                  {"residual", rationals_json(schedule_.residual)}};
    bus_.send(0, ids_.op(), "s2.schedule", json_bytes(sched));
  }
  bus_.barrier();
  {
    auto c = bus_.clock(ids_.op());
    json sched = bytes_json(bus_.receive(ids_.op(), 0, "s2.schedule").payload);
    op_aggregate_ = rationals_from(sched.at("demand"));
    op_schedule_.charge = rationals_from(sched.at("charge"));
    op_schedule_.discharge = rationals_from(sched.at("discharge"));
    op_schedule_.residual = rationals_from(sched.at("residual"));
  }
}

void Runner::stage3() {
  bus_.set_stage("stage3");

  enter(3, "upload");
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    Bytes sig = sign(demand_upload_message(addr_[i], demand_cm_[i], gp_), keys_[i]);
    ByteWriter w;
    write_commitments(w, demand_cm_[i], gp_);
    w.blob(sig);
    bus_.send(i, ids_.ledger(), "s3.upload", std::move(w).take());
  }
  bus_.barrier();
  {
    auto c = bus_.clock(ids_.ledger());
    for (int i = 0; i < n_; ++i) {
      ByteReader r(bus_.receive(ids_.ledger(), i, "s3.upload").payload);
      auto cs = read_commitments(r, gp_);
      Bytes sig = r.blob();
      r.expect_done();
      if (!ledger_.upload_demand_commitments(addr_[i], std::move(cs), sig).ok) {
        throw std::logic_error("ledger refused an honest demand upload");
      }
    }
  }

  enter(3, "receipt");
  const std::string& op_addr = addr_[ids_.op()];
  std::vector<Receipt> receipts;
  {
    auto c = bus_.clock(ids_.op());
    DischargeRatios rho = quantize_ratios(op_schedule_, op_aggregate_, scale_);
    const AdversaryAction* bad =
        scripted_here(ids_.op(), "tamper-receipt") ? adversary(ids_.op(), "tamper-receipt") : nullptr;
    for (int i = 0; i < n_; ++i) {
      const auto* cs = ledger_.demand_commitments(addr_[i]);
      for (size_t t = 0; t < T_; ++t) {
        mpz_class k = rho.ratio[t];
        if (bad && bad->target == i && bad->slot == t) k += 1;
        Receipt r{mtx_.id, op_addr, addr_[i], static_cast<uint32_t>(t),
                  scale((*cs)[t], gp_.reduce(k), gp_), {}};
        r.signature = sign(receipt_message(r, gp_), keys_[ids_.op()]);
        receipts.push_back(std::move(r));
      }
    }
    ByteWriter w;
    w.u32(static_cast<uint32_t>(receipts.size()));
    for (const auto& r : receipts) {
      w.raw(receipt_message(r, gp_));
      w.blob(r.signature);
    }
    bus_.send(ids_.op(), ids_.ledger(), "s3.receipts", std::move(w).take());
    bus_.send(ids_.op(), ids_.grid(), "s3.export",
              json_bytes(json{{"discharge", rationals_json(op_schedule_.discharge)}}));
  }
  bus_.barrier();
  {
    auto c = bus_.clock(ids_.ledger());
    for (const auto& r : receipts) {
      if (!ledger_.attach_receipt(r).ok) throw std::logic_error("ledger refused a receipt");
    }
  }
  {
    auto c = bus_.clock(ids_.grid());
    grid_export_ = rationals_from(
        bytes_json(bus_.receive(ids_.grid(), ids_.op(), "s3.export").payload).at("discharge"));
  }

  enter(3, "verify-receipt");
  const Bytes& op_key = ledger_.account(op_addr).public_key;
  DischargeRatios rho;
  std::vector<bool> rejected(static_cast<size_t>(n_), false);
  for (int i = 0; i < n_; ++i) {
    auto c = bus_.clock(i);
    if (i == 0) rho = quantize_ratios(schedule_, aggregate_, scale_);
    for (size_t t = 0; t < T_; ++t) {
      const Receipt* r = ledger_.find_receipt(addr_[i], static_cast<uint32_t>(t));
      bool ok = r && r->issuer == op_addr && verify_sig(receipt_message(*r, gp_), r->signature, op_key) &&
                r->commitment == scale(demand_cm_[i][t], gp_.reduce(rho.ratio[t]), gp_);
      if (!ok) {
        out_.rejections.push_back({3, step_, AbortKind::kReceiptInvalid, i,
                                   "receipt for slot " + std::to_string(t) + " does not match"});
        rejected[static_cast<size_t>(i)] = true;
        break;
      }
    }
  }

  enter(3, "claim");
  const mpz_class denom = scale_ * rho.unit;
  for (int i = 0; i < n_; ++i) {
    if (rejected[static_cast<size_t>(i)]) continue;
    auto c = bus_.clock(i);
    UserState& u = user(i);
    VnmClaim claim{addr_[i], {}, {}};
    for (size_t t = 0; t < T_; ++t) {
      Opening o = scale(u.demand_open[t], gp_.reduce(rho.ratio[t]), gp_);
      u.discharge.push_back(ratio(o.value, denom));
      if (scripted_here(i, "inflate-claim") && adversary(i, "inflate-claim")->slot == t) {
        o.value = gp_.add(o.value, 1);
      }
      claim.items.push_back({addr_[i], static_cast<uint32_t>(t), o});
    }
    claim.signature = sign(vnm_claim_message(claim, gp_), keys_[i]);
    ByteWriter w;
    w.raw(vnm_claim_message(claim, gp_));
    w.blob(claim.signature);
    bus_.send(i, ids_.grid(), "s3.claim", std::move(w).take());
    claims_.push_back(std::move(claim));
    claim_user_.push_back(i);
  }
  bus_.barrier();
  {
    auto c = bus_.clock(ids_.grid());
    std::vector<mpz_class> claimed(T_, 0);
    for (size_t k = 0; k < claims_.size(); ++k) {
      const int i = claim_user_[k];
      VnmDecision d =
          audit_vnm(ledger_, op_addr, claims_[k], grid_export_, cfg_.prices.prices, denom, claimed);
      if (d.approved) {
        user(i).credit = d.credit;
        user(i).credited = true;
        bus_.send(ids_.grid(), i, "s3.credit", Bytes{});
      } else {
        out_.rejections.push_back({3, step_, AbortKind::kVnmRejected, ids_.grid(),
                                   "user " + std::to_string(i) + ": " + d.detail});
        bus_.send(ids_.grid(), i, "s3.rejected", Bytes{});
      }
    }
  }
  bus_.barrier();
}

ProtocolRun Runner::run() {
  out_.n_users = n_;
  out_.seed = cfg_.seed;
  using clk = std::chrono::steady_clock;
  std::string current = "setup";
  auto mark = clk::now();
  auto close_stage = [&](const std::string& next) {
    auto now = clk::now();
    out_.stages[current].wall_seconds += std::chrono::duration<double>(now - mark).count();
    mark = now;
    current = next;
  };
  try {
    stage0();
    close_stage("stage1");
    stage1();
    close_stage("stage2");
    stage2();
    close_stage("stage3");
    stage3();
    close_stage("");
    out_.settled = true;
  } catch (const ProtocolAbort& a) {
    close_stage("");
    out_.abort = a.reason();
  }

  out_.aggregate_demand = aggregate_;
  out_.schedule = schedule_;
  out_.cost_ess = public_costs_.cost_ess;
  out_.cost_org = public_costs_.cost_org;
  out_.effective_prices = public_costs_.effective_prices;
  out_.payment_total = decode_fixed(payment_total_, gp_);
  for (int i = 0; i < n_; ++i) {
    const UserState& u = user(i);
    out_.users.push_back({addr_.empty() ? "" : addr_[i], u.payment_value, u.credit, u.credited,
                          u.discharge, u.balance});
  }
  out_.operator_balance = operator_balance_;
  out_.transcript = bus_.transcript();
  out_.ledger_log = ledger_.log();
  out_.ledger_digest_final = ledger_.state_digest();
  for (auto& [stage, stats] : out_.stages) {
    auto it = bus_.traffic().find(stage);
    if (it != bus_.traffic().end()) stats.traffic = it->second;
    for (int p = 0; p < ids_.total(); ++p) {
      stats.max_party_seconds = std::max(stats.max_party_seconds, bus_.party_seconds(p, stage));
    }
  }
  return out_;
}

}  // namespace

ProtocolRun run_full(const ProtocolConfig& cfg) {
  validate_config(cfg);
  Runner r(cfg);
  return r.run();
}

}  // namespace pess
