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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pess/errors.h"
#include "pess/protocol.h"
#include "pess/scheduler.h"

namespace pess {

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, size_t line, const std::string& what);
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Comma-separated, one header row (column names with units), then one row
// per timeslot. Blank lines and lines starting with '#' are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Rational>> rows;
};

Table parse_table(std::string_view text, const std::string& source);
Table read_table(const std::filesystem::path& path);

// Columns are users.
DemandProfiles demands_from_table(const Table& t, const std::string& source);
std::vector<Rational> column_from_table(const Table& t, const std::string& source);

// {"capacity": number | [numbers] | "file.csv", "service_fee", "eff_charge",
//  "eff_discharge", "rate_charge", "rate_discharge", "vnm_fee_fraction"}
// Numbers may be JSON numbers or exact strings ("3/8", "0.25").
StorageParams storage_from_json(const nlohmann::json& j, size_t slots,
                                const std::filesystem::path& base);
StorageParams read_storage(const std::filesystem::path& path, size_t slots);

// Scenario file: group, scale, scheme, epsilon, seed, demands (csv path),
// prices (csv path), storage (object or json path), initial_balance,
// adversary [{party, stage, step, mutation, target, slot}]. Paths are
// relative to the scenario file.
ProtocolConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base);
ProtocolConfig read_scenario(const std::filesystem::path& path);

nlohmann::json schedule_report(const ScheduleSolution& sol, std::span<const Rational> demand,
                               const CostBreakdown& costs, Scheme scheme);
nlohmann::json run_report(const ProtocolConfig& cfg, const ProtocolRun& run);

// Line-delimited JSON: a header, every bus message, then the ledger log.
void write_transcript(std::ostream& out, const ProtocolConfig& cfg, const ProtocolRun& run);

struct ReplayResult {
  bool ok = false;
  nlohmann::json summary;  // outcome, traffic, schedule, proof counts
  std::vector<std::string> failures;
};

// Re-verifies the ledger hash chain, every ledger proof and signature, and
// every stage-1 range proof, and rebuilds the public part of the report.
ReplayResult replay_transcript(std::istream& in);

// The public fields of a run report that a replay must reproduce.
nlohmann::json public_summary(const nlohmann::json& report);

}  // namespace pess
