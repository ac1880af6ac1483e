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

#include "pess/scheduler.h"

#include <gtest/gtest.h>

#include "pess/errors.h"
#include "pess/lp.h"
#include "scheduler_oracles.h"

namespace pess {
namespace {

using test::Instance;

Rational R(long n, long d = 1) { return ratio(n, d); }

StorageParams simple_storage(size_t T, Rational cap, Rational rate) {
  StorageParams s;
  s.capacity.assign(T, cap);
  s.rate_charge = rate;
  s.rate_discharge = rate;
  return s;
}

TEST(Scheduler, TwoSlotArbitrage) {
  std::vector<Rational> a{R(0), R(5)};
  PricePlan p{{R(1), R(10)}};
  auto sol = solve_p2(a, p, simple_storage(2, R(10), R(10)));
  EXPECT_EQ(sol.objective, 5);
  EXPECT_EQ(sol.charge, (std::vector<Rational>{R(5), R(0)}));
  EXPECT_EQ(sol.discharge, (std::vector<Rational>{R(0), R(5)}));
  EXPECT_EQ(sol.residual, (std::vector<Rational>{R(0), R(0)}));
  ASSERT_EQ(sol.soc.size(), 4u);
  EXPECT_EQ(sol.soc, (std::vector<Rational>{R(0), R(0), R(5), R(0)}));
  EXPECT_NEAR(test::brute_force_objective(a, p, simple_storage(2, R(10), R(10))), 5.0, 1e-9);
}

TEST(Scheduler, FlatPricesWithFeeLeaveStorageIdle) {
  std::vector<Rational> a{R(3), R(1), R(4)};
  PricePlan p{{R(2), R(2), R(2)}};
  auto s = simple_storage(3, R(10), R(10));
  s.service_fee = R(1, 10);
  auto sol = solve_p2(a, p, s);
  for (size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(sol.charge[t], 0);
    EXPECT_EQ(sol.residual[t], a[t]);
  }
  EXPECT_EQ(sol.objective, 16);
}

TEST(Scheduler, ZeroDemand) {
  std::vector<Rational> a{R(0), R(0), R(0)};
  auto sol = solve_p2(a, PricePlan{{R(1), R(9), R(3)}}, simple_storage(3, R(5), R(5)));
  EXPECT_EQ(sol.objective, 0);
  for (size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(sol.charge[t], 0);
    EXPECT_EQ(sol.discharge[t], 0);
  }
}

TEST(Scheduler, RejectsBadInputs) {
  std::vector<Rational> a{R(1), R(1)};
  EXPECT_THROW(solve_p2(a, PricePlan{{R(1)}}, simple_storage(2, R(1), R(1))), InputError);
  EXPECT_THROW(solve_p2(a, PricePlan{{R(1), R(1)}}, simple_storage(3, R(1), R(1))), InputError);
  std::vector<Rational> neg{R(1), R(-1)};
  EXPECT_THROW(solve_p2(neg, PricePlan{{R(1), R(1)}}, simple_storage(2, R(1), R(1))), InputError);
  auto s = simple_storage(2, R(1), R(1));
  s.eff_discharge = R(1, 2);
  EXPECT_THROW(solve_p2(a, PricePlan{{R(1), R(1)}}, s), InputError);
  std::vector<Rational> empty;
  EXPECT_THROW(solve_p2(empty, PricePlan{}, StorageParams{}), InputError);
}

TEST(Scheduler, MatchesBruteForceOnGridInstances) {
  Rng rng(42);
  int storage_used = 0;
  for (int k = 0; k < 60; ++k) {
    Instance in = test::grid_instance(rng, 4, 3);
    auto a = aggregate_demand(in.profiles);
    auto sol = solve_p2(a, in.prices, in.storage);
    double oracle = test::brute_force_objective(a, in.prices, in.storage);
    EXPECT_NEAR(to_double(sol.objective), oracle, 1e-6) << "instance " << k;
    for (auto& c : sol.charge) storage_used += c > 0;
  }
  EXPECT_GT(storage_used, 10);
}

TEST(Scheduler, NeverWorseThanBruteForceOnLossyInstances) {
  Rng rng(43);
  for (int k = 0; k < 40; ++k) {
    Instance in = test::lossy_instance(rng, 4, 3);
    auto a = aggregate_demand(in.profiles);
    auto sol = solve_p2(a, in.prices, in.storage);
    EXPECT_LE(to_double(sol.objective), test::brute_force_objective(a, in.prices, in.storage) + 1e-6);
  }
}

void expect_p2_feasible(const ScheduleSolution& sol, const std::vector<Rational>& a,
                        const StorageParams& s) {
  const size_t T = a.size();
  const Rational drain = s.eff_discharge / (1 - s.vnm_fee_fraction);
  ASSERT_EQ(sol.soc.size(), T + 2);
  EXPECT_EQ(sol.soc[0], 0);
  EXPECT_EQ(sol.soc[1], 0);
  EXPECT_EQ(sol.soc[T + 1], 0);
  for (size_t t = 0; t < T; ++t) {
    EXPECT_EQ(sol.soc[t + 2] - sol.soc[t + 1], s.eff_charge * sol.charge[t] - drain * sol.discharge[t]);
    EXPECT_GE(sol.soc[t + 1], 0);
    EXPECT_LE(sol.soc[t + 1], s.capacity[t]);
    EXPECT_GE(sol.charge[t], 0);
    EXPECT_LE(sol.charge[t], s.rate_charge);
    EXPECT_GE(sol.discharge[t], 0);
    EXPECT_LE(sol.discharge[t], s.rate_discharge);
    EXPECT_GE(sol.residual[t], 0);
    EXPECT_EQ(sol.discharge[t] + sol.residual[t], a[t]);
  }
}

TEST(Scheduler, SolutionIsFeasibleAndConservesEnergy) {
  Rng rng(44);
  for (int k = 0; k < 50; ++k) {
    Instance in = test::rational_instance(rng, 6, 4);
    auto a = aggregate_demand(in.profiles);
    auto sol = solve_p2(a, in.prices, in.storage);
    expect_p2_feasible(sol, a, in.storage);
    Rational in_e = 0, out_e = 0;
    for (size_t t = 0; t < a.size(); ++t) {
      in_e += in.storage.eff_charge * sol.charge[t];
      out_e += in.storage.eff_discharge * sol.discharge[t] / (1 - in.storage.vnm_fee_fraction);
    }
    EXPECT_EQ(in_e, out_e);
  }
}

TEST(Scheduler, DisaggregationIsP1OptimalAndFeasible) {
  Rng rng(45);
  for (int k = 0; k < 100; ++k) {
    Instance in = test::rational_instance(rng, 5, 4);
    auto a = aggregate_demand(in.profiles);
    auto sol = solve_p2(a, in.prices, in.storage);
    auto users = disaggregate(sol, in.profiles);
    for (size_t t = 0; t < a.size(); ++t) {
      Rational xm = 0;
      for (size_t i = 0; i < users.size(); ++i) {
        EXPECT_EQ(users[i].discharge[t] + users[i].residual[t], in.profiles[i][t]);
        EXPECT_GE(users[i].discharge[t], 0);
        EXPECT_GE(users[i].residual[t], 0);
        xm += users[i].discharge[t];
      }
      EXPECT_EQ(xm, sol.discharge[t]);
    }
    EXPECT_EQ(p1_objective(sol, users, in.prices, in.storage), sol.objective);
  }
}

TEST(Scheduler, DisaggregationEdgeCases) {
  std::vector<Rational> a{R(0), R(5)};
  auto sol = solve_p2(a, PricePlan{{R(1), R(10)}}, simple_storage(2, R(10), R(10)));
  auto one = disaggregate(sol, {{R(0), R(5)}});
  EXPECT_EQ(one[0].discharge, sol.discharge);
  EXPECT_EQ(one[0].residual, sol.residual);
  auto two = disaggregate(sol, {{R(0), R(5, 2)}, {R(0), R(5, 2)}});
  EXPECT_EQ(two[0].discharge, two[1].discharge);
  EXPECT_EQ(two[0].discharge[1], R(5, 2));
  EXPECT_EQ(two[0].discharge[0], 0);
  EXPECT_THROW(disaggregate(sol, {{R(0), R(4)}}), InputError);
}

TEST(Scheduler, CostSharingProperties) {
  Rng rng(46);
  int used = 0;
  for (int k = 0; k < 100; ++k) {
    Instance in = test::rational_instance(rng, 5, 4);
    auto sol = solve_p2(aggregate_demand(in.profiles), in.prices, in.storage);
    for (Scheme sch : {Scheme::kProportional, Scheme::kEgalitarian}) {
      auto cb = cost_sharing(sol, in.profiles, in.prices, in.storage, sch);
      EXPECT_GE(cb.cost_org, cb.cost_ess);
      Rational sum = 0;
      for (auto& p : cb.payments) sum += p;
      if (cb.cost_org == 0) {
        for (auto& p : cb.payments) EXPECT_EQ(p, 0);
        continue;
      }
      ++used;
      EXPECT_EQ(sum, cb.cost_ess);
      for (size_t i = 0; i < cb.payments.size(); ++i) {
        EXPECT_LE(cb.payments[i], cb.user_costs[i]);
        EXPECT_GE(cb.savings[i], 0);
        EXPECT_EQ(cb.savings[i], cb.user_costs[i] - cb.payments[i]);
      }
      if (sch == Scheme::kProportional) {
        std::optional<Rational> ratio;
        for (size_t i = 0; i < cb.payments.size(); ++i) {
          EXPECT_GE(cb.payments[i], 0);
          if (cb.user_costs[i] == 0) continue;
          Rational r = cb.savings[i] / cb.user_costs[i];
          if (ratio) EXPECT_EQ(r, *ratio);
          ratio = r;
        }
      } else {
        for (size_t i = 1; i < cb.savings.size(); ++i) EXPECT_EQ(cb.savings[i], cb.savings[0]);
      }
    }
  }
  EXPECT_GT(used, 50);
}

TEST(Scheduler, EgalitarianCanChargeNegative) {
  // User 0 only consumes in the cheap slot, user 1 in the expensive one.
  DemandProfiles prof{{R(2), R(0)}, {R(0), R(4)}};
  PricePlan p{{R(1), R(5)}};
  auto s = simple_storage(2, R(10), R(10));
  auto sol = solve_p2(aggregate_demand(prof), p, s);
  auto cb = cost_sharing(sol, prof, p, s, Scheme::kEgalitarian);
  // x+ = (4,0), x- = (0,4): Cost_ess = 4, Cost_org = 20, savings 8 each.
  EXPECT_EQ(cb.cost_ess, 4);
  EXPECT_EQ(cb.cost_org, 20);
  EXPECT_EQ(cb.payments[0], -8);
  EXPECT_EQ(cb.payments[1], 12);
  auto pp = cost_sharing(sol, prof, p, s, Scheme::kProportional);
  EXPECT_EQ(pp.payments[0], 0);
  EXPECT_EQ(pp.payments[1], 4);
  EXPECT_EQ(pp.cost_ess, cb.cost_ess);
}

TEST(Scheduler, UnusedStorageGivesZeroPayments) {
  DemandProfiles prof{{R(1), R(1)}, {R(2), R(2)}};
  PricePlan p{{R(3), R(3)}};
  auto s = simple_storage(2, R(10), R(10));
  auto sol = solve_p2(aggregate_demand(prof), p, s);
  auto cb = cost_sharing(sol, prof, p, s, Scheme::kEgalitarian);
  EXPECT_EQ(cb.cost_org, 0);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(cb.payments[i], 0);
    EXPECT_EQ(cb.savings[i], 0);
  }
}

TEST(Scheduler, ServiceFeeMonotonicity) {
  Rng rng(47);
  for (int k = 0; k < 30; ++k) {
    Instance in = test::rational_instance(rng, 5, 3);
    auto a = aggregate_demand(in.profiles);
    Rational prev = solve_p2(a, in.prices, in.storage).objective;
    for (int step = 0; step < 3; ++step) {
      in.storage.service_fee += R(1, 3);
      Rational cur = solve_p2(a, in.prices, in.storage).objective;
      EXPECT_GE(cur, prev);
      prev = cur;
    }
  }
}

TEST(Scheduler, VnmFeeRaisesDischargeCost) {
  std::vector<Rational> a{R(0), R(5)};
  PricePlan p{{R(1), R(10)}};
  auto s = simple_storage(2, R(10), R(10));
  s.vnm_fee_fraction = R(1, 5);
  auto sol = solve_p2(a, p, s);
  // Each unit discharged drains 1/(1-0.2) = 1.25 units: charge 6.25 for 5.
  EXPECT_EQ(sol.charge[0], R(25, 4));
  EXPECT_EQ(sol.discharge[1], 5);
  EXPECT_EQ(sol.objective, R(25, 4));
}

TEST(Scheduler, QuantizedRatios) {
  const mpz_class scale = 10000;
  std::vector<Rational> a{R(0), R(5), R(3)};
  ScheduleSolution sol;
  sol.discharge = {R(0), R(5), R(1)};
  auto r = quantize_ratios(sol, a, scale);
  EXPECT_EQ(r.unit, scale * scale);
  EXPECT_EQ(r.ratio[0], 0);
  EXPECT_EQ(r.ratio[1], r.unit);
  EXPECT_EQ(r.ratio[2], mpz_class(33333333));
}

TEST(Scheduler, QuantizedBillingErrorIsBounded) {
  Rng rng(48);
  const mpz_class scale = 10000;
  for (int k = 0; k < 40; ++k) {
    Instance in = test::rational_instance(rng, 6, 4);
    // Demands on the fixed-point grid, as the protocol encodes them.
    for (auto& p : in.profiles) {
      for (auto& v : p) v = ratio(round_half_away(v * Rational(scale)), scale);
    }
    auto a = aggregate_demand(in.profiles);
    auto sol = solve_p2(a, in.prices, in.storage);
    auto users = disaggregate(sol, in.profiles);
    auto q = quantize_ratios(sol, a, scale);
    const size_t T = a.size(), N = in.profiles.size();
    for (size_t i = 0; i < N; ++i) {
      Rational billed = 0, exact = 0;
      for (size_t t = 0; t < T; ++t) {
        mpz_class raw = mpz_class(in.profiles[i][t] * Rational(scale));
        billed += ratio(raw * q.ratio[t], scale * q.unit) * in.prices.prices[t];
        exact += users[i].discharge[t] * in.prices.prices[t];
      }
      EXPECT_LE(abs(billed - exact), ratio(static_cast<long>(T), 10000));
      EXPECT_LE(billed, exact);
    }
    for (size_t t = 0; t < T; ++t) {
      mpz_class total = 0;
      for (size_t i = 0; i < N; ++i) total += mpz_class(in.profiles[i][t] * Rational(scale)) * q.ratio[t];
      EXPECT_LE(ratio(total, scale * q.unit), sol.discharge[t]);
    }
  }
}

TEST(Lp, BoundFlipsAndDegeneracy) {
  // min -x0 - x1 s.t. x0 - x1 + s = 0 with x0 <= 2, x1 <= 3, s in [0, 1].
  BoundedLp<Rational> lp;
  lp.a = {{R(1), R(-1), R(1)}};
  lp.b = {R(0)};
  lp.c = {R(-1), R(-1), R(0)};
  lp.lower = {R(0), R(0), R(0)};
  lp.upper = {R(2), R(3), R(1)};
  auto r = solve_bounded_lp(lp, {2});
  EXPECT_EQ(r.objective, -5);
  EXPECT_EQ(r.x[0], 2);
  EXPECT_EQ(r.x[1], 3);
  EXPECT_EQ(r.x[2], 1);
}

TEST(Lp, DoubleInstantiationAgrees) {
  Rng rng(49);
  for (int k = 0; k < 20; ++k) {
    Instance in = test::rational_instance(rng, 6, 3);
    auto a = aggregate_demand(in.profiles);
    auto sol = solve_p2(a, in.prices, in.storage);
    // Same LP in doubles through the template.
    const size_t T = a.size();
    BoundedLp<double> lp;
    lp.a.assign(T, std::vector<double>(3 * T, 0.0));
    lp.b.assign(T, 0.0);
    lp.c.assign(3 * T, 0.0);
    lp.lower.assign(3 * T, 0.0);
    lp.upper.assign(3 * T, std::nullopt);
    const double drain = to_double(in.storage.eff_discharge / (1 - in.storage.vnm_fee_fraction));
    double base = 0;
    for (size_t t = 0; t < T; ++t) {
      lp.a[t][2 * T + t] = 1;
      if (t > 0) lp.a[t][2 * T + t - 1] = -1;
      lp.a[t][t] = -to_double(in.storage.eff_charge);
      lp.a[t][T + t] = drain;
      lp.c[t] = to_double(in.prices.prices[t] + in.storage.service_fee);
      lp.c[T + t] = -to_double(in.prices.prices[t]);
      lp.upper[t] = to_double(in.storage.rate_charge);
      lp.upper[T + t] = std::min(to_double(a[t]), to_double(in.storage.rate_discharge));
      lp.upper[2 * T + t] = t + 1 < T ? to_double(in.storage.capacity[t + 1]) : 0.0;
      base += to_double(in.prices.prices[t] * a[t]);
    }
    std::vector<size_t> basis;
    for (size_t t = 0; t < T; ++t) basis.push_back(2 * T + t);
    auto r = solve_bounded_lp(lp, basis);
    EXPECT_NEAR(r.objective + base, to_double(sol.objective), 1e-6);
  }
}

}  // namespace
}  // namespace pess
