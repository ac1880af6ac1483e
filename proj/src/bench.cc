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

#include "pess/bench.h"

#include <cmath>
#include <random>

#include "pess/errors.h"

namespace pess {

ProtocolConfig synthetic_scenario(int n_users, int slots, uint64_t seed, Scheme scheme,
                                  const std::string& group) {
  if (n_users < 3 || slots < 1) throw InputError("synthetic scenario needs N >= 3 and T >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> noise(0, 40);
  ProtocolConfig cfg;
  cfg.group = group;
  cfg.scheme = scheme;
  cfg.seed = seed;
  const double per_hour = slots / 24.0;
  for (int t = 0; t < slots; ++t) {
    double hour = t / per_hour;
    long cents = hour < 7 ? 8 : (hour >= 17 && hour < 21 ? 30 : 15);
    cfg.prices.prices.push_back(ratio(cents, 100));
  }
  // Load in 0.001 kWh units per slot, scaled so a day is ~10 kWh per user.
  const double slot_scale = 24.0 / slots;
  cfg.demands.assign(static_cast<size_t>(n_users), {});
  for (auto& row : cfg.demands) {
    double shift = std::uniform_real_distribution<double>(-1.5, 1.5)(gen);
    for (int t = 0; t < slots; ++t) {
      double hour = t / per_hour;
      double evening = std::exp(-std::pow((hour - 19 - shift) / 2.0, 2));
      double morning = 0.5 * std::exp(-std::pow((hour - 8 - shift) / 1.5, 2));
      double kw = 0.2 + 0.8 * evening + morning;
      long milli = std::lround(kw * slot_scale * 1000) + noise(gen);
      row.push_back(ratio(milli, 1000));
    }
  }
  cfg.storage.capacity.assign(static_cast<size_t>(slots), Rational(2 * n_users));
  cfg.storage.service_fee = ratio(1, 100);
  cfg.storage.eff_charge = ratio(95, 100);
  cfg.storage.eff_discharge = ratio(105, 100);
  cfg.storage.rate_charge = ratio(n_users, 2) * ratio(24, slots);
  cfg.storage.rate_discharge = cfg.storage.rate_charge;
  return cfg;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

BenchResult run_bench(const BenchOptions& opt,
                      const std::function<void(const BenchRow&)>& progress) {
  if (opt.repetitions < 1) throw InputError("repetitions must be positive");
  BenchResult res;
  for (int n : opt.n_values) {
    BenchRow row;
    row.n_users = n;
    for (int rep = 0; rep < opt.repetitions; ++rep) {
      ProtocolConfig cfg = synthetic_scenario(n, opt.slots, opt.seed + 1000 * rep + n, opt.scheme,
                                              opt.group);
      ProtocolRun run = run_full(cfg);
      row.settled = row.settled && run.settled;
      for (const auto& [stage, s] : run.stages) {
        row.party_seconds[stage] += s.max_party_seconds / opt.repetitions;
        row.wall_seconds[stage] += s.wall_seconds / opt.repetitions;
        row.bytes[stage] += static_cast<double>(s.traffic.bytes) / opt.repetitions;
        row.messages[stage] += static_cast<double>(s.traffic.messages) / opt.repetitions;
      }
    }
    if (progress) progress(row);
    res.rows.push_back(std::move(row));
  }
  if (res.rows.size() >= 2) {
    std::vector<double> xs;
    for (const auto& r : res.rows) xs.push_back(r.n_users);
    for (const char* stage : {"stage1", "stage2", "stage3"}) {
      std::vector<double> sec, wall, bytes;
      for (const auto& r : res.rows) {
        sec.push_back(r.party_seconds.count(stage) ? r.party_seconds.at(stage) : 0);
        wall.push_back(r.wall_seconds.count(stage) ? r.wall_seconds.at(stage) : 0);
        bytes.push_back(r.bytes.count(stage) ? r.bytes.at(stage) : 0);
      }
      res.fits[std::string(stage) + ".seconds"] = fit_line(xs, sec);
      res.fits[std::string(stage) + ".wall_seconds"] = fit_line(xs, wall);
      res.fits[std::string(stage) + ".bytes"] = fit_line(xs, bytes);
    }
  }
  return res;
}

nlohmann::json bench_report(const BenchOptions& opt, const BenchResult& res) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : res.rows) {
    rows.push_back({{"n_users", r.n_users},
                    {"settled", r.settled},
                    {"party_seconds", r.party_seconds},
                    {"wall_seconds", r.wall_seconds},
                    {"bytes", r.bytes},
                    {"messages", r.messages}});
  }
  nlohmann::json fits = nlohmann::json::object();
  for (const auto& [k, f] : res.fits) {
    fits[k] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
  }
  return {{"slots", opt.slots},
          {"group", opt.group},
          {"repetitions", opt.repetitions},
          {"seed", opt.seed},
          {"rows", rows},
          {"fits", fits}};
}

}  // namespace pess
