#pragma once

#include <cmath>
#include <vector>

#include "thzuav/lambert_w.hpp"
#include "thzuav/model.hpp"

namespace thzuav {

// Largest power meeting the uplink energy budget:
//   log2(1 + k p)/p >= l  with  l = D/(w Q).
// The delay is decreasing in p, so the optimum is the most power the
// budget and the cap allow. Substituting y = 1 + k p turns the tight
// budget into y e^{-c y} = e^{-c}, c = l ln2 / k, whose nontrivial root
// lives on the negative Lambert branch:
//   p* = -W_{-1}(-c e^{-c}) / (l ln2) - 1/k.
// The principal branch solves the same equation but returns y = 1,
// i.e. the spurious p = 0 root. c >= 1 means even p -> 0+ violates the
// budget: no positive power is feasible.
inline double solve_power_single(double k, double l, double p_cap) {
  if (k <= 0.0 || l <= 0.0 || p_cap <= 0.0) {
    throw std::domain_error("solve_power_single: k, l, P must be positive");
  }
  const double lam = l * kLn2;
  const double c = lam / k;
  if (c >= 1.0 - 1e-12) {
    throw EnergyInfeasible({});
  }
  const double y = -lambert_w(WBranch::negative, -c * std::exp(-c)) / c;
  double p = (y - 1.0) / k;

  // Newton on F(p) = log1p(k p) - lam p removes the cancellation the
  // subtraction above suffers when c -> 1 (y -> 1).
  for (int i = 0; i < 3; ++i) {
    const double f = std::log1p(k * p) - lam * p;
    const double fp = k / (1.0 + k * p) - lam;
    if (fp == 0.0) break;
    const double next = p - f / fp;
    if (!(next > 0.0) || next == p) break;
    p = next;
  }
  // land a hair inside the budget so downstream feasibility checks see
  // a nonnegative slack; tightness stays far within 1e-9 relative
  p *= 1.0 - 1e-12;
  return std::min(p, p_cap);
}

// Per-user power at a fixed position and bandwidth split. Infeasible
// users are collected so the error names every offender at once.
inline std::vector<double> solve_power_all(const Scenario& s, double x,
                                           double y,
                                           const std::vector<double>& w) {
  std::vector<double> p(s.users.size(), 0.0);
  std::vector<int> infeasible;
  for (int n = 0; n < s.n(); ++n) {
    const double d = distance(s.users[n], x, y, s.altitude);
    const double k = snr_coefficient(w[n], d, s.radio);
    const double l = s.users[n].d_bits / (w[n] * s.users[n].q_joules);
    try {
      p[n] = solve_power_single(k, l, s.p_max);
    } catch (const EnergyInfeasible&) {
      infeasible.push_back(n);
    }
  }
  if (!infeasible.empty()) throw EnergyInfeasible(infeasible);
  return p;
}

}  // namespace thzuav
