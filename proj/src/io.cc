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

#include "pess/io.h"

#include <fstream>
#include <sstream>

#include "pess/hash.h"
#include "pess/ledger.h"

namespace pess {

using nlohmann::json;
namespace fs = std::filesystem;

ParseError::ParseError(const std::string& source, size_t line, const std::string& what)
    : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Rational rational_from_json(const json& v, const std::string& what) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.dump());
    if (v.is_number()) return parse_rational(v.dump());
  } catch (const std::exception& e) {
    throw InputError(what + ": " + e.what());
  }
  throw InputError(what + ": expected a number");
}

json decimals(std::span<const Rational> xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(to_decimal(x));
  return a;
}

json exact(std::span<const Rational> xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(x.get_str());
  return a;
}

json abort_json(const AbortReason& r) {
  return {{"kind", abort_kind_name(r.kind)},
          {"stage", r.stage},
          {"step", r.step},
          {"detected_by", r.detected_by},
          {"detail", r.detail}};
}

}  // namespace

Table parse_table(std::string_view text, const std::string& source) {
  Table t;
  size_t line_no = 0, pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    auto cells = split(body);
    if (!have_header) {
      t.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(t.header.size()) + " columns, found " +
                           std::to_string(cells.size()));
    }
    std::vector<Rational> row;
    for (const auto& c : cells) {
      try {
        row.push_back(parse_rational(c));
      } catch (const std::exception&) {
        throw ParseError(source, line_no, "not a number: '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(source, line_no, "missing header row");
  return t;
}

Table read_table(const fs::path& path) { return parse_table(slurp(path), path.string()); }

DemandProfiles demands_from_table(const Table& t, const std::string& source) {
  if (t.rows.empty()) throw InputError(source + ": no timeslot rows");
  DemandProfiles d(t.header.size());
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) d[i].push_back(row[i]);
  }
  return d;
}

std::vector<Rational> column_from_table(const Table& t, const std::string& source) {
  if (t.header.size() != 1) throw InputError(source + ": expected a single column");
  if (t.rows.empty()) throw InputError(source + ": no timeslot rows");
  std::vector<Rational> out;
  for (const auto& row : t.rows) out.push_back(row[0]);
  return out;
}

StorageParams storage_from_json(const json& j, size_t slots, const fs::path& base) {
  if (!j.is_object()) throw InputError("storage: expected an object");
  StorageParams s;
  const json& cap = j.contains("capacity") ? j.at("capacity") : json();
  if (cap.is_array()) {
    for (const auto& v : cap) s.capacity.push_back(rational_from_json(v, "storage.capacity"));
  } else if (cap.is_string() && cap.get<std::string>().ends_with(".csv")) {
    fs::path p = base / cap.get<std::string>();
    s.capacity = column_from_table(read_table(p), p.string());
  } else if (!cap.is_null()) {
    s.capacity.assign(slots, rational_from_json(cap, "storage.capacity"));
  } else {
    throw InputError("storage: capacity is required");
  }
  auto field = [&](const char* key, Rational& dst) {
    if (j.contains(key)) dst = rational_from_json(j.at(key), std::string("storage.") + key);
  };
  field("service_fee", s.service_fee);
  field("eff_charge", s.eff_charge);
  field("eff_discharge", s.eff_discharge);
  field("rate_charge", s.rate_charge);
  field("rate_discharge", s.rate_discharge);
  field("vnm_fee_fraction", s.vnm_fee_fraction);
  return s;
}

StorageParams read_storage(const fs::path& path, size_t slots) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return storage_from_json(j, slots, path.parent_path());
}

ProtocolConfig scenario_from_json(const json& j, const fs::path& base) {
  try {
    ProtocolConfig cfg;
    cfg.group = j.value("group", "prod");
    cfg.scale = j.value("scale", int64_t{0});
    cfg.scheme = parse_scheme(j.value("scheme", "proportional"));
    if (j.contains("epsilon")) cfg.epsilon = rational_from_json(j.at("epsilon"), "epsilon");
    cfg.seed = j.value("seed", uint64_t{1});

    fs::path demands = base / j.at("demands").get<std::string>();
    cfg.demands = demands_from_table(read_table(demands), demands.string());
    fs::path prices = base / j.at("prices").get<std::string>();
    cfg.prices.prices = column_from_table(read_table(prices), prices.string());
    const json& st = j.at("storage");
    cfg.storage = st.is_string() ? read_storage(base / st.get<std::string>(), cfg.slots())
                                 : storage_from_json(st, cfg.slots(), base);
    if (j.contains("initial_balance")) {
      for (const auto& v : j.at("initial_balance")) {
        cfg.initial_balance.push_back(rational_from_json(v, "initial_balance"));
      }
    }
    for (const auto& a : j.value("adversary", json::array())) {
      AdversaryAction act;
      act.party = a.at("party");
      act.stage = a.at("stage");
      act.step = a.at("step");
      act.mutation = a.at("mutation");
      act.target = a.value("target", 0);
      act.slot = a.value("slot", 0u);
      cfg.adversary.push_back(std::move(act));
    }
    validate_config(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario: ") + e.what());
  }
}

ProtocolConfig read_scenario(const fs::path& path) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

json schedule_report(const ScheduleSolution& sol, std::span<const Rational> demand,
                     const CostBreakdown& costs, Scheme scheme) {
  json users = json::array();
  for (size_t i = 0; i < costs.payments.size(); ++i) {
    users.push_back({{"user", i},
                     {"original_cost", to_decimal(costs.user_costs[i])},
                     {"payment", to_decimal(costs.payments[i])},
                     {"saving", to_decimal(costs.savings[i])}});
  }
  return {{"scheme", scheme_name(scheme)},
          {"schedule",
           {{"demand", decimals(demand)},
            {"charge", decimals(sol.charge)},
            {"discharge", decimals(sol.discharge)},
            {"residual", decimals(sol.residual)},
            {"soc", decimals(sol.soc)},
            {"objective", to_decimal(sol.objective)}}},
          {"costs",
           {{"cost_ess", to_decimal(costs.cost_ess)},
            {"cost_org", to_decimal(costs.cost_org)},
            {"effective_prices", decimals(costs.effective_prices)}}},
          {"users", users}};
}

json run_report(const ProtocolConfig& cfg, const ProtocolRun& run) {
  json r;
  r["format"] = "pess-report/1";
  r["seed"] = run.seed;
  r["group"] = cfg.group;
  r["scale"] = protocol_group(cfg).fixed_point_scale;
  r["scheme"] = scheme_name(cfg.scheme);
  r["n_users"] = run.n_users;
  r["slots"] = cfg.slots();
  r["outcome"] = run.settled ? "settled" : "aborted";
  r["abort"] = run.abort ? abort_json(*run.abort) : json();
  r["rejections"] = json::array();
  for (const auto& x : run.rejections) r["rejections"].push_back(abort_json(x));

  if (!run.aggregate_demand.empty() && !run.schedule.discharge.empty()) {
    r["schedule"] = {{"demand", decimals(run.aggregate_demand)},
                     {"charge", decimals(run.schedule.charge)},
                     {"discharge", decimals(run.schedule.discharge)},
                     {"residual", decimals(run.schedule.residual)},
                     {"soc", decimals(run.schedule.soc)},
                     {"objective", to_decimal(run.schedule.objective)},
                     {"exact",
                      {{"demand", exact(run.aggregate_demand)},
                       {"charge", exact(run.schedule.charge)},
                       {"discharge", exact(run.schedule.discharge)},
                       {"residual", exact(run.schedule.residual)}}}};
    r["costs"] = {{"cost_ess", to_decimal(run.cost_ess)},
                  {"cost_org", to_decimal(run.cost_org)},
                  {"effective_prices", decimals(run.effective_prices)},
                  {"payment_total", to_decimal(run.payment_total)}};
  }

  json commitments = {{"ledger_head", run.ledger_log.empty() ? "" : run.ledger_log.back()["hash"]}};
  for (const auto& e : run.ledger_log) {
    if (e["type"] != "mtx_executed") continue;
    commitments["mtx_id"] = e["payload"]["id"];
    json digests = json::array();
    for (const auto& entry : e["payload"]["entries"]) {
      digests.push_back(to_hex(sha256(entry["value"].get<std::string>())));
    }
    commitments["payment_commitment_digests"] = digests;
  }
  r["commitments"] = commitments;

  // Owner-only sections: each holds what one party learns privately.
  json priv = json::object();
  for (size_t i = 0; i < run.users.size(); ++i) {
    const UserOutcome& u = run.users[i];
    priv["user/" + std::to_string(i)] = {{"owner", u.address},
                                         {"payment", to_decimal(u.payment)},
                                         {"credit", to_decimal(u.credit)},
                                         {"credited", u.credited},
                                         {"discharge", decimals(u.discharge)},
                                         {"balance", u.balance.value.get_str()}};
  }
  priv["operator"] = {{"balance", run.operator_balance.value.get_str()}};
  r["private"] = priv;

  json stages = json::object();
  for (const auto& [name, s] : run.stages) {
    stages[name] = {{"wall_seconds", s.wall_seconds},
                    {"max_party_seconds", s.max_party_seconds},
                    {"messages", s.traffic.messages},
                    {"bytes", s.traffic.bytes}};
  }
  r["stages"] = stages;
  return r;
}

void write_transcript(std::ostream& out, const ProtocolConfig& cfg, const ProtocolRun& run) {
  json header = {{"type", "header"},
                 {"format", "pess-transcript/1"},
                 {"group", cfg.group},
                 {"scale", protocol_group(cfg).fixed_point_scale},
                 {"n_users", run.n_users},
                 {"slots", cfg.slots()},
                 {"seed", run.seed}};
  out << header.dump() << '\n';
  for (const Message& m : run.transcript) {
    json line = {{"type", "message"},       {"round", m.round},
                 {"stage", m.stage},        {"sender", m.sender},
                 {"recipient", m.recipient}, {"tag", m.tag},
                 {"payload", to_hex(m.payload)}};
    out << line.dump() << '\n';
  }
  for (const auto& e : run.ledger_log) out << json{{"type", "ledger"}, {"entry", e}}.dump() << '\n';
}

json public_summary(const json& report) {
  json s;
  s["outcome"] = report.at("outcome");
  s["abort_kind"] = report.at("abort").is_null() ? json() : report["abort"]["kind"];
  json traffic = json::object();
  for (const auto& [name, st] : report.at("stages").items()) {
    if (st["messages"].get<uint64_t>() == 0) continue;
    traffic[name] = {{"messages", st["messages"]}, {"bytes", st["bytes"]}};
  }
  s["traffic"] = traffic;
  s["schedule"] = report.at("outcome") == "settled" ? report.at("schedule").at("exact") : json();
  return s;
}

ReplayResult replay_transcript(std::istream& in) {
  ReplayResult res;
  std::string line;
  if (!std::getline(in, line)) {
    res.failures.push_back("empty transcript");
    return res;
  }
  json header = json::parse(line);
  if (header.value("type", "") != "header") {
    res.failures.push_back("missing header");
    return res;
  }
  GroupParams gp = group_by_name(header.at("group"));
  gp.fixed_point_scale = header.at("scale");
  const int n_parties = header.at("n_users").get<int>() + 3;
  const size_t slots = header.at("slots");

  std::vector<json> ledger_log;
  json traffic = json::object();
  json abort;
  json schedule;
  bool executed = false;
  uint64_t last_round = 0;
  size_t range_proofs = 0, range_failures = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (j.at("type") == "ledger") {
        ledger_log.push_back(j.at("entry"));
        continue;
      }
      const uint64_t round = j.at("round");
      const int sender = j.at("sender");
      const std::string tag = j.at("tag");
      const std::string stage = j.at("stage");
      Bytes payload = from_hex(j.at("payload").get<std::string>());
      if (round < last_round) res.failures.push_back("round goes backwards at line " + std::to_string(line_no));
      last_round = round;
      if (sender < 0 || sender >= n_parties) res.failures.push_back("bad sender at line " + std::to_string(line_no));
      auto& t = traffic[stage];
      if (t.is_null()) t = {{"messages", uint64_t{0}}, {"bytes", uint64_t{0}}};
      t["messages"] = t["messages"].get<uint64_t>() + 1;
      t["bytes"] = t["bytes"].get<uint64_t>() + payload.size();

      if (tag == "abort") {
        ByteReader r(payload);
        abort = r.str();
      } else if (tag == "s2.executed") {
        executed = true;
      } else if (tag == "s2.schedule") {
        schedule = json::parse(payload.begin(), payload.end());
      } else if (tag == "s1.commit") {
        ByteReader r(payload);
        if (r.u32() != slots) throw DecodeError("wrong slot count");
        for (size_t s = 0; s < slots; ++s) {
          Commitment c = read_commitment(r, gp);
          ProofNN proof = read_proof_nn(r, gp);
          Transcript tr = demand_range_transcript(sender, s);
          ++range_proofs;
          if (!verify_nn(c, proof, kRangeBits, gp, tr)) ++range_failures;
        }
        r.expect_done();
      }
    } catch (const std::exception& e) {
      res.failures.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  LogReplay lr = replay_ledger_log(ledger_log, gp);
  if (!lr.chain_ok) res.failures.push_back("ledger hash chain broken");
  for (const auto& f : lr.failures) res.failures.push_back("ledger: " + f);
  // A failing range proof is only acceptable when the run aborted on it.
  if (range_failures > 0 && abort != "NN-proof-failed") {
    res.failures.push_back(std::to_string(range_failures) + " range proofs fail without an abort");
  }
  if (range_failures == 0 && abort == "NN-proof-failed") {
    res.failures.push_back("abort on range proofs that all verify");
  }

  const bool settled = abort.is_null() && executed;
  res.summary = {{"outcome", settled ? "settled" : "aborted"},
                 {"abort_kind", abort},
                 {"traffic", traffic},
                 {"schedule", settled ? schedule : json()},
                 {"range_proofs_checked", range_proofs},
                 {"ledger_proofs_checked", lr.proofs_checked},
                 {"signatures_checked", lr.signatures_checked},
                 {"ledger_entries", lr.entries}};
  res.ok = res.failures.empty();
  return res;
}

}  // namespace pess
