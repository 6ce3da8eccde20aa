#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "thzuav/optimizer.hpp"
#include "thzuav/scenario_io.hpp"
#include "test_util.hpp"

namespace {

using namespace thzuav;

Scenario make_scenario(int n_users, std::uint64_t seed, double q_budget) {
  ScenarioParams params;
  params.n_users = n_users;
  params.seed = seed;
  params.q_budget_j = q_budget;
  return generate_scenario(params);
}

bool traces_equal(const SolveTrace& a, const SolveTrace& b) {
  if (a.iterations.size() != b.iterations.size()) return false;
  if (a.converged != b.converged) return false;
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const TraceEntry& ta = a.iterations[i];
    const TraceEntry& tb = b.iterations[i];
    if (ta.k != tb.k || ta.objective_s != tb.objective_s || ta.x != tb.x ||
        ta.y != tb.y || ta.max_power_change_w != tb.max_power_change_w ||
        ta.max_bandwidth_change_hz != tb.max_bandwidth_change_hz ||
        ta.convexity_certificate != tb.convexity_certificate) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("a lone user overhead is a fixed point", "[optimizer]") {
  Scenario s = make_scenario(1, 42, 8.0);
  s.users[0].x = 25.0;
  s.users[0].y = 25.0;
  const Decision init = make_initial_decision(s);
  REQUIRE(init.x == 25.0);
  REQUIRE(init.y == 25.0);

  const OptimizeResult res = optimize(s, init);
  CHECK(res.trace.converged);
  CHECK(res.trace.iterations.size() <= 2);
  const TraceEntry& first = res.trace.iterations.front();
  CHECK(first.max_power_change_w == 0.0);
  CHECK(first.x == 25.0);
  CHECK(first.y == 25.0);
  CHECK(first.max_bandwidth_change_hz <= 1e-5 * s.total_bandwidth);
  CHECK(res.objective_s ==
        Catch::Approx(res.initial_objective_s).epsilon(1e-12));
}

TEST_CASE("descent is monotone and ends feasible across regimes",
          "[optimizer]") {
  for (double q_budget : {2.0, 8.0}) {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
      for (int n_users : {4, 8, 14}) {
        const Scenario s = make_scenario(n_users, seed, q_budget);
        const Decision init = make_initial_decision(s);
        const OptimizeResult res = optimize(s, init);

        CHECK(res.trace.converged);
        REQUIRE(!res.trace.iterations.empty());
        CHECK(res.trace.iterations.front().k == 1);
        double prev = res.initial_objective_s;
        for (const TraceEntry& row : res.trace.iterations) {
          CHECK(row.objective_s <= prev + 1e-9);
          prev = row.objective_s;
        }
        CHECK(res.objective_s <= res.initial_objective_s + 1e-9);
        CHECK(constraint_report(s, res.decision).feasible);
      }
    }
  }
}

TEST_CASE("every block hand-off stays feasible", "[optimizer]") {
  for (std::uint64_t seed : {11, 12, 13}) {
    const Scenario s = make_scenario(6, seed, 8.0);
    Decision dec = make_initial_decision(s);
    REQUIRE(constraint_report(s, dec).feasible);
    double obj = total_objective(s, dec);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> p_new = solve_power_all(s, dec.x, dec.y, dec.w);
      Decision cand = dec;
      cand.p = p_new;
      if (total_objective(s, cand) <= obj) {
        dec = cand;
        obj = total_objective(s, dec);
      }
      CHECK(constraint_report(s, dec).feasible);

      const LocationSolution loc = solve_location(s, dec.p, dec.w, dec.x,
                                                  dec.y);
      cand = dec;
      cand.x = loc.x;
      cand.y = loc.y;
      if (total_objective(s, cand) <= obj) {
        dec = cand;
        obj = total_objective(s, dec);
      }
      CHECK(constraint_report(s, dec).feasible);

      std::vector<double> w_new = solve_bandwidth(s, dec.p, dec.x, dec.y);
      cand = dec;
      cand.w = w_new;
      if (total_objective(s, cand) <= obj) {
        dec = cand;
        obj = total_objective(s, dec);
      }
      CHECK(constraint_report(s, dec).feasible);
    }
  }
}

TEST_CASE("identical inputs give bit-identical runs", "[optimizer]") {
  const Scenario s = make_scenario(8, 321, 8.0);
  const Decision init = make_initial_decision(s);
  const OptimizeResult a = optimize(s, init);
  const OptimizeResult b = optimize(s, init);
  CHECK(a.objective_s == b.objective_s);
  CHECK(a.decision.x == b.decision.x);
  CHECK(a.decision.y == b.decision.y);
  CHECK(a.decision.p == b.decision.p);
  CHECK(a.decision.w == b.decision.w);
  CHECK(traces_equal(a.trace, b.trace));

  const OptimizeResult e1 = run_baseline(s, BaselineMode::exh, init);
  const OptimizeResult e2 = run_baseline(s, BaselineMode::exh, init);
  CHECK(e1.objective_s == e2.objective_s);
  CHECK(e1.decision.p == e2.decision.p);
}

TEST_CASE("the full descent dominates every single-block baseline",
          "[optimizer]") {
  for (double q_budget : {2.0, 8.0}) {
    for (std::uint64_t seed : {21, 22, 23, 24, 25}) {
      const Scenario s = make_scenario(5, seed, q_budget);
      const Decision init = make_initial_decision(s);
      const double full = run_baseline(s, BaselineMode::proposed, init)
                              .objective_s;
      for (BaselineMode mode :
           {BaselineMode::ol, BaselineMode::op, BaselineMode::ow}) {
        const OptimizeResult res = run_baseline(s, mode, init);
        CHECK(full <= res.objective_s * (1.0 + 1e-12));
        CHECK(constraint_report(s, res.decision).feasible);
      }
    }
  }
}

TEST_CASE("bandwidth-only on symmetric users keeps the equal split",
          "[optimizer]") {
  Scenario s = make_scenario(4, 7, 8.0);
  for (UserSpec& u : s.users) {
    u.x = 20.0;
    u.y = 30.0;
    u.d_bits = 8e12;
    u.e_bits = 6.4e12;
  }
  const Decision init = make_initial_decision(s);
  const OptimizeResult res = run_baseline(s, BaselineMode::ow, init);
  const double share = s.total_bandwidth / 4.0;
  for (double w : res.decision.w) {
    CHECK(w == Catch::Approx(share).epsilon(1e-9));
  }
}

TEST_CASE("grid reference picks the cell nearest a lone user", "[optimizer]") {
  Scenario s = make_scenario(1, 9, 8.0);
  s.users[0].x = 25.2;
  s.users[0].y = 25.4;

  const Decision grid_only = exhaustive_search(s, 0.5, 0);
  CHECK(grid_only.x == 25.0);
  CHECK(grid_only.y == 25.5);

  const Decision polished = exhaustive_search(s, 0.5, 3);
  CHECK(total_objective(s, polished) <=
        total_objective(s, grid_only) * (1.0 + 1e-12));

  const Decision coarse = exhaustive_search(s, 2.0, 0);
  CHECK(total_objective(s, grid_only) <=
        total_objective(s, coarse) * (1.0 + 1e-12));
}

TEST_CASE("hopeless energy budgets are rejected up front", "[optimizer]") {
  Scenario s = make_scenario(3, 5, 8.0);
  for (UserSpec& u : s.users) u.q_joules = 0.05;
  CHECK_THROWS_AS(make_initial_decision(s), InfeasibleInit);

  const Scenario ok = make_scenario(3, 5, 8.0);
  Decision bad = make_initial_decision(ok);
  bad.w[0] = ok.total_bandwidth;  // now the split exceeds the band
  CHECK_THROWS_AS(optimize(ok, bad), InfeasibleInit);
}
