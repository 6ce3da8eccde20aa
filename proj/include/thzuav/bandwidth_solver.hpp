#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "thzuav/model.hpp"

namespace thzuav {
namespace bwdetail {

// Per-user pieces as functions of that user's bandwidth w, with the
// geometry folded into c = h0*gain*power/sigma2 (Hz): rate is
// w*log1p(c/w)/ln2, increasing and concave, so delay M/rate is convex
// and strictly decreasing.
inline double rate_of_w(double w, double c) {
  return w * std::log1p(c / w) / kLn2;
}

inline double rate_slope(double w, double c) {
  return (std::log1p(c / w) - c / (w + c)) / kLn2;
}

struct UserCurve {
  double c_up = 0.0;   // kappa * p_n, Hz
  double c_dn = 0.0;   // kappa * q, Hz
  double d_bits = 0.0;
  double e_bits = 0.0;
};

inline double user_delay(const UserCurve& u, double w) {
  return u.d_bits / rate_of_w(w, u.c_up) + u.e_bits / rate_of_w(w, u.c_dn);
}

// -d(delay)/dw: positive, strictly decreasing in w.
inline double marginal(const UserCurve& u, double w) {
  const double r_up = rate_of_w(w, u.c_up);
  const double r_dn = rate_of_w(w, u.c_dn);
  return u.d_bits * rate_slope(w, u.c_up) / (r_up * r_up) +
         u.e_bits * rate_slope(w, u.c_dn) / (r_dn * r_dn);
}

inline UserCurve curve_for(const Scenario& s, int n, double p, double x,
                           double y) {
  const double d = distance(s.users[n], x, y, s.altitude);
  const double kappa = s.radio.h0 * channel_gain(d, s.radio.a) / s.radio.sigma2;
  UserCurve u;
  u.c_up = kappa * p;
  u.c_dn = kappa * s.q_uav;
  u.d_bits = s.users[n].d_bits;
  u.e_bits = s.users[n].e_bits;
  return u;
}

}  // namespace bwdetail

// Least bandwidth at which user n's uplink energy t_up * p fits the
// budget, at fixed power and position. Energy is decreasing in w, so
// bisection on [1 Hz, B_W] brackets the crossing; the feasible-side
// endpoint is returned. 1 Hz means the budget never binds.
inline double min_bandwidth(const Scenario& s, int n, double p, double x,
                            double y) {
  if (p <= 0.0) throw std::domain_error("min_bandwidth: p must be positive");
  const bwdetail::UserCurve u = bwdetail::curve_for(s, n, p, x, y);
  const double q_budget = s.users[n].q_joules;
  auto energy = [&](double w) {
    return s.users[n].d_bits * p / bwdetail::rate_of_w(w, u.c_up);
  };
  double lo = 1.0;
  double hi = s.total_bandwidth;
  if (energy(hi) > q_budget) throw EnergyInfeasible({n});
  if (energy(lo) <= q_budget) return lo;
  // tight tolerance: any bandwidth already meeting the budget must land
  // at or above the returned floor, or stacked floors could appear to
  // exceed the band at exactly-tight operating points
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (energy(mid) > q_budget) lo = mid; else hi = mid;
  }
  return hi;  // energy(hi) <= Q
}

// Equal split pushed onto the feasible set: users whose floor exceeds
// the common level keep their floor, everyone else shares the rest
// evenly. Classic water level, at most N rounds.
inline std::vector<double> make_feasible_equal_split(
    const Scenario& s, const std::vector<double>& p, double x, double y) {
  const int n_users = s.n();
  std::vector<double> wmin(n_users);
  double wmin_sum = 0.0;
  for (int n = 0; n < n_users; ++n) {
    wmin[n] = min_bandwidth(s, n, p[n], x, y);
    wmin_sum += wmin[n];
  }
  if (wmin_sum > s.total_bandwidth * (1.0 + 1e-12)) throw EnergyInfeasible({});
  std::vector<bool> pinned(n_users, false);
  for (int round = 0; round < n_users; ++round) {
    double pinned_sum = 0.0;
    int free_count = 0;
    for (int n = 0; n < n_users; ++n) {
      if (pinned[n]) pinned_sum += wmin[n]; else ++free_count;
    }
    if (free_count == 0) break;
    const double level = (s.total_bandwidth - pinned_sum) / free_count;
    bool grew = false;
    for (int n = 0; n < n_users; ++n) {
      if (!pinned[n] && wmin[n] >= level) { pinned[n] = true; grew = true; }
    }
    if (!grew) {
      std::vector<double> w(n_users);
      for (int n = 0; n < n_users; ++n) w[n] = pinned[n] ? wmin[n] : level;
      return w;
    }
  }
  return wmin;  // everything pinned: the floors exhaust the band
}

// Split B_W across users to minimize total delay at fixed power and
// position. Delay is separable, convex, decreasing per user, so the
// optimum equalizes marginal gains: free users share one multiplier
// lambda, floor-bound users sit at their energy minimum. Outer
// bisection on lambda, inner bisection for each user's w(lambda).
inline std::vector<double> solve_bandwidth(const Scenario& s,
                                           const std::vector<double>& p,
                                           double x, double y) {
  using namespace bwdetail;
  const int n_users = s.n();
  std::vector<UserCurve> curves(n_users);
  std::vector<double> wmin(n_users);
  double wmin_sum = 0.0;
  for (int n = 0; n < n_users; ++n) {
    curves[n] = curve_for(s, n, p[n], x, y);
    wmin[n] = min_bandwidth(s, n, p[n], x, y);
    wmin_sum += wmin[n];
  }
  const double band = s.total_bandwidth;
  if (wmin_sum > band * (1.0 + 1e-12)) throw EnergyInfeasible({});
  if (wmin_sum >= band * (1.0 - 1e-12)) return wmin;  // floors use it all

  auto w_of_lambda = [&](int n, double lambda) {
    if (marginal(curves[n], wmin[n]) <= lambda) return wmin[n];
    if (marginal(curves[n], band) >= lambda) return band;
    double lo = wmin[n], hi = band;
    for (int it = 0; it < 90 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (marginal(curves[n], mid) > lambda) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto total_at = [&](double lambda) {
    double sum = 0.0;
    for (int n = 0; n < n_users; ++n) sum += w_of_lambda(n, lambda);
    return sum;
  };

  double lam_hi = 0.0, lam_lo = std::numeric_limits<double>::infinity();
  for (int n = 0; n < n_users; ++n) {
    lam_hi = std::max(lam_hi, marginal(curves[n], wmin[n]));
    lam_lo = std::min(lam_lo, marginal(curves[n], band));
  }
  // sum(lam_lo) >= B_W >= sum(lam_hi); shrink until the budget matches
  double lambda = lam_hi;
  for (int it = 0; it < 200; ++it) {
    lambda = 0.5 * (lam_lo + lam_hi);
    const double sum = total_at(lambda);
    if (std::fabs(sum - band) <= 1e-10 * band) break;
    if (sum > band) lam_lo = lambda; else lam_hi = lambda;
    if (lam_hi - lam_lo <= 1e-15 * lam_hi) break;
  }

  std::vector<double> w(n_users);
  double sum = 0.0, slack = 0.0;
  for (int n = 0; n < n_users; ++n) {
    w[n] = w_of_lambda(n, lambda);
    sum += w[n];
    slack += w[n] - wmin[n];
  }
  // exact finish: spread the residual over the users above their
  // floors, proportionally to their headroom (keeps w >= wmin)
  const double residual = band - sum;
  if (slack > 0.0 && residual != 0.0) {
    for (int n = 0; n < n_users; ++n) {
      w[n] += residual * (w[n] - wmin[n]) / slack;
    }
  }
  return w;
}

}  // namespace thzuav
