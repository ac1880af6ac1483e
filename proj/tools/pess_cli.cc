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

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pess/bench.h"
#include "pess/io.h"
#include "pess/random.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path output_dir(const std::string& flag) {
  fs::path dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("PESS_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw pess::InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw pess::InputError(path.string() + ": " + e.what());
  }
}

struct ScheduleArgs {
  std::string scenario, demands, prices, storage, scheme, out;
};

int cmd_schedule(const ScheduleArgs& a) {
  pess::DemandProfiles demands;
  pess::PricePlan prices;
  pess::StorageParams storage;
  pess::Scheme scheme = pess::Scheme::kProportional;
  if (!a.scenario.empty()) {
    pess::ProtocolConfig cfg = pess::read_scenario(a.scenario);
    demands = pess::quantize_demands(cfg.demands, pess::protocol_group(cfg).fixed_point_scale);
    prices = cfg.prices;
    storage = cfg.storage;
    scheme = cfg.scheme;
  } else {
    if (a.demands.empty() || a.prices.empty() || a.storage.empty()) {
      throw pess::InputError("schedule needs --scenario or all of --demands, --prices, --storage");
    }
    demands = pess::demands_from_table(pess::read_table(a.demands), a.demands);
    prices.prices = pess::column_from_table(pess::read_table(a.prices), a.prices);
    storage = pess::read_storage(a.storage, prices.prices.size());
  }
  if (!a.scheme.empty()) scheme = pess::parse_scheme(a.scheme);
  for (const auto& d : demands) {
    if (d.size() != prices.prices.size()) throw pess::InputError("demand and price rows differ");
  }
  std::vector<pess::Rational> total = pess::aggregate_demand(demands);
  pess::ScheduleSolution sol = pess::solve_p2(total, prices, storage);
  pess::CostBreakdown costs = pess::cost_sharing(sol, demands, prices, storage, scheme);
  json report = pess::schedule_report(sol, total, costs, scheme);
  std::cout << report.dump(2) << '\n';
  if (!a.out.empty() || std::getenv("PESS_OUT_DIR")) {
    write_json(output_dir(a.out) / "schedule.json", report);
  }
  return 0;
}

struct RunArgs {
  std::string scenario, scheme, group, epsilon, out;
  std::optional<uint64_t> seed;
};

int cmd_run(const RunArgs& a) {
  json scenario = read_json(a.scenario);
  pess::ProtocolConfig cfg = pess::scenario_from_json(scenario, fs::path(a.scenario).parent_path());
  if (!a.scheme.empty()) cfg.scheme = pess::parse_scheme(a.scheme);
  if (!a.group.empty()) cfg.group = a.group;
  if (!a.epsilon.empty()) cfg.epsilon = pess::parse_rational(a.epsilon);
  if (a.seed) {
    cfg.seed = *a.seed;
  } else if (!scenario.contains("seed")) {
    pess::Rng::from_os_entropy(&cfg.seed);
  }
  pess::ProtocolRun run = pess::run_full(cfg);
  json report = pess::run_report(cfg, run);
  fs::path dir = output_dir(a.out);
  write_json(dir / "report.json", report);
  {
    std::ofstream t(dir / "transcript.jsonl");
    pess::write_transcript(t, cfg, run);
  }
  std::cout << "seed " << run.seed << '\n';
  if (run.abort) {
    std::cout << "aborted: " << pess::abort_kind_name(run.abort->kind) << " (stage "
              << run.abort->stage << ", " << run.abort->step << ", announced by party "
              << run.abort->detected_by << "): " << run.abort->detail << '\n';
    return 2;
  }
  std::cout << "settled: cost_ess " << pess::to_decimal(run.cost_ess, 4) << ", payments "
            << pess::to_decimal(run.payment_total, 4) << '\n';
  for (const auto& r : run.rejections) {
    std::cout << "rejected: " << pess::abort_kind_name(r.kind) << " (" << r.step << "): " << r.detail
              << '\n';
  }
  std::cout << "report " << (dir / "report.json").string() << '\n';
  return run.rejections.empty() ? 0 : 3;
}

int cmd_replay(const std::string& transcript, const std::string& report_path) {
  std::ifstream in(transcript);
  if (!in) throw pess::InputError("cannot open " + transcript);
  pess::ReplayResult r = pess::replay_transcript(in);
  for (const auto& f : r.failures) std::cout << "failure: " << f << '\n';
  std::cout << r.summary.dump(2) << '\n';
  bool ok = r.ok;
  if (!report_path.empty()) {
    json expected = pess::public_summary(read_json(report_path));
    json got = r.summary;
    for (auto key : {"range_proofs_checked", "ledger_proofs_checked", "signatures_checked",
                     "ledger_entries"}) {
      got.erase(key);
    }
    if (got != expected) {
      std::cout << "report does not match the replayed transcript\n";
      ok = false;
    }
  }
  std::cout << (ok ? "replay ok" : "replay FAILED") << '\n';
  return ok ? 0 : 1;
}

struct BenchArgs {
  std::vector<int> n_values{5, 10, 15, 20, 25};
  int slots = 144;
  std::string group = "prod", scheme, out;
  int repetitions = 20;
  std::optional<uint64_t> seed;
};

int cmd_bench(const BenchArgs& a) {
  pess::BenchOptions opt;
  opt.n_values = a.n_values;
  opt.slots = a.slots;
  opt.group = a.group;
  opt.repetitions = a.repetitions;
  if (!a.scheme.empty()) opt.scheme = pess::parse_scheme(a.scheme);
  if (a.seed) {
    opt.seed = *a.seed;
  } else {
    pess::Rng::from_os_entropy(&opt.seed);
  }
  std::cout << "seed " << opt.seed << ", T=" << opt.slots << ", " << opt.repetitions
            << " repetition(s)\n";
  std::cout << std::setw(4) << "N" << std::setw(12) << "s1 sec" << std::setw(12) << "s2 sec"
            << std::setw(12) << "s3 sec" << std::setw(14) << "s1 bytes" << std::setw(14)
            << "s2 bytes" << std::setw(14) << "s3 bytes" << '\n';
  auto get = [](const std::map<std::string, double>& m, const char* k) {
    return m.count(k) ? m.at(k) : 0.0;
  };
  pess::BenchResult res = pess::run_bench(opt, [&](const pess::BenchRow& r) {
    std::cout << std::setw(4) << r.n_users << std::fixed << std::setprecision(3) << std::setw(12)
              << get(r.party_seconds, "stage1") << std::setw(12) << get(r.party_seconds, "stage2")
              << std::setw(12) << get(r.party_seconds, "stage3") << std::setprecision(0)
              << std::setw(14) << get(r.bytes, "stage1") << std::setw(14) << get(r.bytes, "stage2")
              << std::setw(14) << get(r.bytes, "stage3") << (r.settled ? "" : "  (aborted)")
              << std::endl;
  });
  std::cout << std::setprecision(4);
  for (const auto& [k, f] : res.fits) {
    std::cout << std::left << std::setw(22) << k << std::right << " slope " << std::setw(12)
              << f.slope << "  R^2 " << f.r2 << '\n';
  }
  if (!a.out.empty() || std::getenv("PESS_OUT_DIR")) {
    write_json(output_dir(a.out) / "bench.json", pess::bench_report(opt, res));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving shared energy storage: scheduler, protocol simulator, replay"};
  app.require_subcommand(1);

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "Plaintext schedule and cost sharing");
  schedule->add_option("--scenario", sa.scenario, "Scenario file supplying the inputs");
  schedule->add_option("--demands", sa.demands, "CSV, one column per user");
  schedule->add_option("--prices", sa.prices, "CSV, one price column");
  schedule->add_option("--storage", sa.storage, "Storage parameters (JSON)");
  schedule->add_option("--scheme", sa.scheme, "proportional or egalitarian");
  schedule->add_option("--out", sa.out, "Output directory");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run the full protocol on a scenario");
  run->add_option("--scenario", ra.scenario, "Scenario file")->required();
  run->add_option("--seed", ra.seed, "RNG seed (default: OS entropy, recorded in the report)");
  run->add_option("--scheme", ra.scheme, "proportional or egalitarian");
  run->add_option("--group", ra.group, "tiny or prod");
  run->add_option("--epsilon", ra.epsilon, "Tolerance for the payment total check");
  run->add_option("--out", ra.out, "Output directory (default $PESS_OUT_DIR or .)");

  std::string transcript, report;
  auto* replay = app.add_subcommand("replay", "Re-verify a transcript");
  replay->add_option("transcript", transcript, "transcript.jsonl")->required();
  replay->add_option("--report", report, "Report to check against the replay");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Scaling benchmark over the number of users");
  bench->add_option("--n", ba.n_values, "User counts")->delimiter(',');
  bench->add_option("--slots", ba.slots, "Timeslots per day");
  bench->add_option("--group", ba.group, "tiny or prod");
  bench->add_option("--scheme", ba.scheme, "proportional or egalitarian");
  bench->add_option("--repetitions", ba.repetitions, "Runs averaged per point");
  bench->add_option("--seed", ba.seed, "RNG seed");
  bench->add_option("--out", ba.out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*schedule) return cmd_schedule(sa);
    if (*run) return cmd_run(ra);
    if (*replay) return cmd_replay(transcript, report);
    if (*bench) return cmd_bench(ba);
  } catch (const pess::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
