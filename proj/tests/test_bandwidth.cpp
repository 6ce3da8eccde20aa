#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "thzuav/bandwidth_solver.hpp"
#include "thzuav/lambert_w.hpp"
#include "thzuav/model.hpp"
#include "thzuav/scenario_io.hpp"
#include "test_util.hpp"

namespace {

using namespace thzuav;

// All oracle math here is written from the raw model formulas with
// std::log2, independently of the solver's internals.

double kappa_of(const Scenario& s, int n, double x, double y) {
  const double d = distance(s.users[n], x, y, s.altitude);
  return s.radio.h0 * channel_gain(d, s.radio.a) / s.radio.sigma2;
}

double delay_user_oracle(const Scenario& s, int n, double p, double w,
                         double x, double y) {
  const double kappa = kappa_of(s, n, x, y);
  const double r_up = w * std::log2(1.0 + kappa * p / w);
  const double r_dn = w * std::log2(1.0 + kappa * s.q_uav / w);
  return s.users[n].d_bits / r_up + s.users[n].e_bits / r_dn;
}

double energy_oracle(const Scenario& s, int n, double p, double w, double x,
                     double y) {
  const double kappa = kappa_of(s, n, x, y);
  const double r_up = w * std::log2(1.0 + kappa * p / w);
  return s.users[n].d_bits * p / r_up;
}

// Closed-form floor: energy equals the budget where ln(1+u) = c*u with
// u the uplink snr, so u* comes from the negative Lambert branch and
// the floor is kappa*p/u*. Returns +inf when no finite band suffices.
double wmin_lambert_oracle(const Scenario& s, int n, double p, double x,
                           double y) {
  const double kappa = kappa_of(s, n, x, y);
  const double c = s.users[n].d_bits * 0.69314718055994530941723212145818 /
                   (s.users[n].q_joules * kappa);
  if (c >= 1.0) return std::numeric_limits<double>::infinity();
  const double u =
      -lambert_w(WBranch::negative, -c * std::exp(-c)) / c - 1.0;
  return kappa * p / u;
}

double total_delay(const Scenario& s, const std::vector<double>& p,
                   const std::vector<double>& w, double x, double y) {
  double sum = 0.0;
  for (int n = 0; n < s.n(); ++n) {
    sum += delay_user_oracle(s, n, p[n], w[n], x, y);
  }
  return sum;
}

Scenario two_user_scenario() {
  ScenarioParams params;
  params.n_users = 2;
  params.q_budget_j = 8.0;
  Scenario s = generate_scenario(params);
  s.users[0].x = 10.0;
  s.users[0].y = 10.0;
  s.users[1].x = 40.0;
  s.users[1].y = 40.0;
  return s;
}

// Euclidean projection onto {v >= 0, sum v = budget}, sort-based.
std::vector<double> project_simplex(std::vector<double> v, double budget) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  int rho = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - budget) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) { rho = static_cast<int>(j + 1); tau = t; }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

// Independent reference: projected gradient on the shifted simplex
// with a finite-difference gradient and adaptive step.
std::vector<double> projected_gradient_allocation(const Scenario& s,
                                                  const std::vector<double>& p,
                                                  double x, double y) {
  const int n_users = s.n();
  std::vector<double> wmin(n_users);
  double wmin_sum = 0.0;
  for (int n = 0; n < n_users; ++n) {
    wmin[n] = min_bandwidth(s, n, p[n], x, y);
    wmin_sum += wmin[n];
  }
  const double budget = s.total_bandwidth - wmin_sum;
  REQUIRE(budget > 0.0);

  std::vector<double> v(n_users, budget / n_users);
  auto obj_of = [&](const std::vector<double>& vv) {
    double sum = 0.0;
    for (int n = 0; n < n_users; ++n) {
      sum += delay_user_oracle(s, n, p[n], wmin[n] + vv[n], x, y);
    }
    return sum;
  };
  double obj = obj_of(v);
  double eta = 0.05 * budget;
  for (int it = 0; it < 6000 && eta > 1e-13 * budget; ++it) {
    std::vector<double> grad(n_users);
    double gmax = 0.0;
    for (int n = 0; n < n_users; ++n) {
      const double w = wmin[n] + v[n];
      const double h = 1e-6 * std::max(w, 1.0);
      grad[n] = (delay_user_oracle(s, n, p[n], w + h, x, y) -
                 delay_user_oracle(s, n, p[n], w - h, x, y)) /
                (2.0 * h);
      gmax = std::max(gmax, std::fabs(grad[n]));
    }
    if (gmax == 0.0) break;
    std::vector<double> trial(n_users);
    for (int n = 0; n < n_users; ++n) trial[n] = v[n] - eta * grad[n] / gmax;
    trial = project_simplex(trial, budget);
    const double trial_obj = obj_of(trial);
    if (trial_obj < obj) {
      v = trial;
      obj = trial_obj;
      eta *= 1.2;
    } else {
      eta *= 0.5;
    }
  }
  std::vector<double> w(n_users);
  for (int n = 0; n < n_users; ++n) w[n] = wmin[n] + v[n];
  return w;
}

}  // namespace

TEST_CASE("bandwidth floor lands on the energy budget from the feasible side",
          "[bandwidth]") {
  ScenarioParams params;
  params.n_users = 1;
  Scenario s = generate_scenario(params);
  s.users[0].x = 25.0;
  s.users[0].y = 25.0;
  const double x = 30.0, y = 20.0;
  // pick a budget 20% above the large-band limit so the floor binds
  const double kappa = kappa_of(s, 0, x, y);
  s.users[0].q_joules =
      1.2 * s.users[0].d_bits * 0.69314718055994530941723212145818 / kappa;
  const double p = 5e-5;  // keeps the floor well inside the band

  const double wmin = min_bandwidth(s, 0, p, x, y);
  const double e = energy_oracle(s, 0, p, wmin, x, y);
  CHECK(e <= s.users[0].q_joules * (1.0 + 1e-12));
  CHECK(e >= s.users[0].q_joules * (1.0 - 1e-5));

  const double wmin_ref = wmin_lambert_oracle(s, 0, p, x, y);
  CHECK(wmin == Catch::Approx(wmin_ref).epsilon(1e-6));
}

TEST_CASE("bandwidth floor collapses to the bracket edge when the budget "
          "never binds",
          "[bandwidth]") {
  ScenarioParams params;
  params.n_users = 1;
  Scenario s = generate_scenario(params);
  s.users[0].q_joules = 1e12;
  CHECK(min_bandwidth(s, 0, 0.01, 25.0, 25.0) == 1.0);
}

TEST_CASE("bandwidth floor shrinks when the energy budget doubles",
          "[bandwidth]") {
  std::mt19937_64 rng(401);
  ScenarioParams params;
  params.n_users = 1;
  Scenario base = generate_scenario(params);
  int binding = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Scenario s = base;
    s.users[0].x = testutil::uniform(rng, 0.0, 50.0);
    s.users[0].y = testutil::uniform(rng, 0.0, 50.0);
    const double kappa = kappa_of(s, 0, 25.0, 25.0);
    const double c_target = testutil::uniform(rng, 0.3, 0.9);
    s.users[0].q_joules = s.users[0].d_bits *
                          0.69314718055994530941723212145818 /
                          (c_target * kappa);
    const double p = testutil::log_uniform(rng, 1e-4, 5e-3);
    double w1 = 0.0;
    try {
      w1 = min_bandwidth(s, 0, p, 25.0, 25.0);
    } catch (const EnergyInfeasible&) {
      continue;  // floor above the band at this draw
    }
    Scenario s2 = s;
    s2.users[0].q_joules *= 2.0;
    const double w2 = min_bandwidth(s2, 0, p, 25.0, 25.0);
    if (w1 > 1.0) {
      ++binding;
      CHECK(w2 < w1);
    }
  }
  CHECK(binding >= 10);
}

TEST_CASE("bandwidth floor reports users the band cannot save", "[bandwidth]") {
  ScenarioParams params;
  params.n_users = 1;
  Scenario s = generate_scenario(params);
  s.users[0].x = 25.0;
  s.users[0].y = 25.0;

  SECTION("budget below the infinite-band limit") {
    const double kappa = kappa_of(s, 0, 25.0, 25.0);
    s.users[0].q_joules =
        0.9 * s.users[0].d_bits * 0.69314718055994530941723212145818 / kappa;
    try {
      min_bandwidth(s, 0, 0.01, 25.0, 25.0);
      FAIL("expected EnergyInfeasible");
    } catch (const EnergyInfeasible& ex) {
      REQUIRE(ex.users == std::vector<int>{0});
    }
  }
  SECTION("floor above the total band at high power") {
    const double kappa = kappa_of(s, 0, 25.0, 25.0);
    s.users[0].q_joules =
        1.2 * s.users[0].d_bits * 0.69314718055994530941723212145818 / kappa;
    const double wmin_ref = wmin_lambert_oracle(s, 0, 0.1, 25.0, 25.0);
    REQUIRE(wmin_ref > s.total_bandwidth);  // the case is genuinely out of reach
    CHECK_THROWS_AS(min_bandwidth(s, 0, 0.1, 25.0, 25.0), EnergyInfeasible);
  }
}

TEST_CASE("allocation matches a fine two-user grid search", "[bandwidth]") {
  Scenario s = two_user_scenario();
  const double x = 25.0, y = 25.0;
  const std::vector<double> p = {0.02, 0.012};

  const std::vector<double> w = solve_bandwidth(s, p, x, y);
  const double obj = total_delay(s, p, w, x, y);

  const double w1_min = min_bandwidth(s, 0, p[0], x, y);
  const double w2_min = min_bandwidth(s, 1, p[1], x, y);
  const double lo = w1_min;
  const double hi = s.total_bandwidth - w2_min;
  REQUIRE(hi > lo);
  const double step = 1e-5 * s.total_bandwidth;
  double best = std::numeric_limits<double>::infinity();
  for (double w1 = lo; w1 <= hi; w1 += step) {
    const double cand =
        delay_user_oracle(s, 0, p[0], w1, x, y) +
        delay_user_oracle(s, 1, p[1], s.total_bandwidth - w1, x, y);
    best = std::min(best, cand);
  }
  CHECK(obj <= best * (1.0 + 1e-8));
  CHECK(obj >= best * (1.0 - 1e-8) - 1e-8 * best);
}

TEST_CASE("free users equalize their marginal delay gains", "[bandwidth]") {
  ScenarioParams params;
  params.n_users = 5;
  params.seed = 77;
  Scenario s = generate_scenario(params);
  const double x = 22.0, y = 28.0;
  const std::vector<double> p = {0.02, 0.015, 0.01, 0.008, 0.018};

  const std::vector<double> w = solve_bandwidth(s, p, x, y);

  std::vector<double> marginals;
  for (int n = 0; n < s.n(); ++n) {
    const double wmin = min_bandwidth(s, n, p[n], x, y);
    const bool free_user =
        w[n] > wmin * (1.0 + 1e-9) && w[n] < s.total_bandwidth * (1.0 - 1e-9);
    if (!free_user) continue;
    const double h = 1e-6 * w[n];
    const double m = -(delay_user_oracle(s, n, p[n], w[n] + h, x, y) -
                       delay_user_oracle(s, n, p[n], w[n] - h, x, y)) /
                     (2.0 * h);
    marginals.push_back(m);
  }
  REQUIRE(marginals.size() >= 2);
  const double m_lo = *std::min_element(marginals.begin(), marginals.end());
  const double m_hi = *std::max_element(marginals.begin(), marginals.end());
  CHECK((m_hi - m_lo) / m_hi <= 2e-6);
}

TEST_CASE("allocation dominates every feasible equal split", "[bandwidth]") {
  std::mt19937_64 rng(402);
  for (int trial = 0; trial < 10; ++trial) {
    ScenarioParams params;
    params.n_users = 3 + static_cast<int>(rng() % 6);
    params.seed = 500 + trial;
    Scenario s = generate_scenario(params);
    const double x = testutil::uniform(rng, 10.0, 40.0);
    const double y = testutil::uniform(rng, 10.0, 40.0);
    std::vector<double> p(s.n());
    for (double& pn : p) pn = testutil::log_uniform(rng, 2e-3, 2e-2);

    const std::vector<double> w_eq = make_feasible_equal_split(s, p, x, y);
    const std::vector<double> w = solve_bandwidth(s, p, x, y);

    double eq_sum = std::accumulate(w_eq.begin(), w_eq.end(), 0.0);
    CHECK(std::fabs(eq_sum - s.total_bandwidth) <= 1e-9 * s.total_bandwidth);
    for (int n = 0; n < s.n(); ++n) {
      const double wmin = min_bandwidth(s, n, p[n], x, y);
      CHECK(w_eq[n] >= wmin * (1.0 - 1e-12));
    }
    const double obj = total_delay(s, p, w, x, y);
    const double obj_eq = total_delay(s, p, w_eq, x, y);
    CHECK(obj <= obj_eq * (1.0 + 1e-12));
  }
}

TEST_CASE("identical users get identical shares", "[bandwidth]") {
  ScenarioParams params;
  params.n_users = 4;
  Scenario s = generate_scenario(params);
  for (UserSpec& u : s.users) {
    u.x = 12.0;
    u.y = 34.0;
    u.d_bits = 8e12;
    u.e_bits = 6.4e12;
    u.q_joules = 8.0;
  }
  const std::vector<double> p(4, 0.015);
  const std::vector<double> w = solve_bandwidth(s, p, 20.0, 30.0);
  const double share = s.total_bandwidth / 4.0;
  for (double wn : w) CHECK(wn == Catch::Approx(share).epsilon(1e-9));
}

TEST_CASE("allocation agrees with a projected-gradient reference",
          "[bandwidth]") {
  std::mt19937_64 rng(403);
  for (int trial = 0; trial < 5; ++trial) {
    ScenarioParams params;
    params.n_users = 4;
    params.seed = 600 + trial;
    Scenario s = generate_scenario(params);
    const double x = testutil::uniform(rng, 15.0, 35.0);
    const double y = testutil::uniform(rng, 15.0, 35.0);
    std::vector<double> p(s.n());
    for (double& pn : p) pn = testutil::log_uniform(rng, 3e-3, 2e-2);

    const std::vector<double> w = solve_bandwidth(s, p, x, y);
    const std::vector<double> w_pg = projected_gradient_allocation(s, p, x, y);
    const double obj = total_delay(s, p, w, x, y);
    const double obj_pg = total_delay(s, p, w_pg, x, y);
    CHECK(obj <= obj_pg * (1.0 + 1e-9));
    CHECK(std::fabs(obj - obj_pg) <= 1e-6 * obj);
  }
}

TEST_CASE("total delay falls as the band widens", "[bandwidth]") {
  ScenarioParams params;
  params.n_users = 6;
  params.seed = 9;
  Scenario s = generate_scenario(params);
  const double x = 25.0, y = 25.0;
  std::vector<double> p(s.n(), 0.01);

  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 1.5, 2.0}) {
    Scenario sc = s;
    sc.total_bandwidth = scale * s.total_bandwidth;
    const std::vector<double> w = solve_bandwidth(sc, p, x, y);
    const double obj = total_delay(sc, p, w, x, y);
    CHECK(obj < prev);
    prev = obj;
  }
}

TEST_CASE("allocation exhausts the band and honors floors and budgets",
          "[bandwidth]") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    ScenarioParams params;
    params.n_users = 3 + static_cast<int>(rng() % 6);
    params.seed = 700 + trial;
    Scenario s = generate_scenario(params);
    const double x = testutil::uniform(rng, 5.0, 45.0);
    const double y = testutil::uniform(rng, 5.0, 45.0);
    std::vector<double> p(s.n());
    for (double& pn : p) pn = testutil::log_uniform(rng, 2e-3, 2e-2);

    const std::vector<double> w = solve_bandwidth(s, p, x, y);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(std::fabs(sum - s.total_bandwidth) <= 1e-9 * s.total_bandwidth);
    for (int n = 0; n < s.n(); ++n) {
      const double wmin = min_bandwidth(s, n, p[n], x, y);
      CHECK(w[n] >= wmin * (1.0 - 1e-12));
      CHECK(energy_oracle(s, n, p[n], w[n], x, y) <=
            s.users[n].q_joules * (1.0 + 1e-9));
    }
    Decision dec{x, y, p, w};
    CHECK(constraint_report(s, dec).feasible);
  }
}
