#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "thzuav/model.hpp"

namespace thzuav {

// One payload's delay as a function of the hover point, with analytic
// first and second derivatives. Writing e = 1 + snr(d), the delay is
// bits*ln2/(w*ln e) and everything chains through d(x, y).
struct TermDerivs {
  double value = 0.0;  // seconds
  double e = 1.0;      // 1 + snr, the convexity-analysis variable
  double gx = 0.0, gy = 0.0;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
};

inline TermDerivs delay_term_derivatives(const UserSpec& u, double altitude,
                                         const RadioConstants& rc, double bits,
                                         double power, double w, double x,
                                         double y) {
  if (power <= 0.0 || w <= 0.0) {
    throw std::domain_error("delay_term_derivatives: power and w must be > 0");
  }
  const double dx = x - u.x;
  const double dy = y - u.y;
  const double d = std::sqrt(dx * dx + dy * dy + altitude * altitude);
  const double kappa = rc.h0 * channel_gain(d, rc.a) / rc.sigma2;
  const double snr = kappa * power / w;
  const double ln_e = std::log1p(snr);
  const double e = 1.0 + snr;
  const double scale = bits * kLn2 / w;

  TermDerivs out;
  out.e = e;
  out.value = scale / ln_e;
  const double tp = -scale / (e * ln_e * ln_e);               // dt/de
  const double tpp = scale * (ln_e + 2.0) / (e * e * ln_e * ln_e * ln_e);
  const double ad = rc.a * d;
  const double ep = -snr * (ad + 2.0) / d;                    // de/dd
  const double epp = snr * (ad * ad + 4.0 * ad + 6.0) / (d * d);
  const double dtdd = tp * ep;                                // dt/dd > 0
  const double q2 = tpp * ep * ep + tp * epp;                 // d2t/dd2
  const double d2 = d * d;
  const double d3 = d2 * d;
  out.gx = dtdd * dx / d;
  out.gy = dtdd * dy / d;
  out.hxx = q2 * (dx * dx) / d2 + dtdd * (d2 - dx * dx) / d3;
  out.hyy = q2 * (dy * dy) / d2 + dtdd * (d2 - dy * dy) / d3;
  out.hxy = q2 * (dx * dy) / d2 - dtdd * (dx * dy) / d3;
  return out;
}

struct LocationSolution {
  double x = 0.0;
  double y = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  // true when every link's e stays below 24 even directly overhead, so
  // the objective and all energy constraints are certifiably convex
  // and the returned point is a global minimum of the subproblem
  bool convexity_certificate = false;
  // true when the start sits on energy boundaries that block every
  // direction (the solution is the start itself) or no strictly
  // feasible descent step could be taken from the boundary
  bool stalled = false;
  int iterations = 0;
};

namespace locdetail {

struct PointEval {
  double f = 0.0;
  double gx = 0.0, gy = 0.0;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  std::vector<double> t_up;  // per-user uplink delay and derivatives,
  std::vector<double> ugx;   // needed for the energy slacks/barrier
  std::vector<double> ugy;
  std::vector<double> uhxx, uhxy, uhyy;
};

inline PointEval evaluate(const Scenario& s, const std::vector<double>& p,
                          const std::vector<double>& w, double x, double y) {
  const int n_users = s.n();
  PointEval ev;
  ev.t_up.resize(n_users);
  ev.ugx.resize(n_users);
  ev.ugy.resize(n_users);
  ev.uhxx.resize(n_users);
  ev.uhxy.resize(n_users);
  ev.uhyy.resize(n_users);
  for (int n = 0; n < n_users; ++n) {
    const UserSpec& u = s.users[n];
    const TermDerivs up = delay_term_derivatives(u, s.altitude, s.radio,
                                                 u.d_bits, p[n], w[n], x, y);
    const TermDerivs dn = delay_term_derivatives(u, s.altitude, s.radio,
                                                 u.e_bits, s.q_uav, w[n], x, y);
    ev.f += up.value + dn.value;
    ev.gx += up.gx + dn.gx;
    ev.gy += up.gy + dn.gy;
    ev.hxx += up.hxx + dn.hxx;
    ev.hxy += up.hxy + dn.hxy;
    ev.hyy += up.hyy + dn.hyy;
    ev.t_up[n] = up.value;
    ev.ugx[n] = up.gx;
    ev.ugy[n] = up.gy;
    ev.uhxx[n] = up.hxx;
    ev.uhxy[n] = up.hxy;
    ev.uhyy[n] = up.hyy;
  }
  return ev;
}

inline double slack_of(const Scenario& s, const std::vector<double>& p,
                       const PointEval& ev, int n) {
  return s.users[n].q_joules - p[n] * ev.t_up[n];
}

// Barrier value; +inf outside the strictly feasible region.
inline double barrier_value(const Scenario& s, const std::vector<double>& p,
                            const PointEval& ev, double mu) {
  double phi = ev.f;
  for (int n = 0; n < s.n(); ++n) {
    const double sn = slack_of(s, p, ev, n);
    if (!(sn > 0.0)) return std::numeric_limits<double>::infinity();
    phi -= mu * std::log(sn);
  }
  return std::isfinite(phi) ? phi
                            : std::numeric_limits<double>::infinity();
}

}  // namespace locdetail

// Minimize total delay over the hover point at fixed power and
// bandwidth, subject to each user's uplink energy budget. Interior
// path following: log barrier on the slacks, Newton steps when the
// 2x2 system is safely positive definite, steepest descent otherwise.
// A start pressed against energy boundaries first looks for a strictly
// feasible descent direction through the gap in the active constraint
// gradients; when the gradients surround the point, the start is the
// only locally feasible point and is returned as-is.
inline LocationSolution solve_location(const Scenario& s,
                                       const std::vector<double>& p,
                                       const std::vector<double>& w, double x0,
                                       double y0) {
  using locdetail::PointEval;
  const int n_users = s.n();
  if (static_cast<int>(p.size()) != n_users ||
      static_cast<int>(w.size()) != n_users) {
    throw std::invalid_argument("solve_location: p and w must have one entry "
                                "per user");
  }

  LocationSolution sol;
  // overhead bound: kappa is largest at d = altitude, so if e < 24
  // there it is < 24 everywhere in the plane, for every link
  const double kappa_peak =
      s.radio.h0 * channel_gain(s.altitude, s.radio.a) / s.radio.sigma2;
  sol.convexity_certificate = true;
  for (int n = 0; n < n_users; ++n) {
    const double e_up = 1.0 + kappa_peak * p[n] / w[n];
    const double e_dn = 1.0 + kappa_peak * s.q_uav / w[n];
    if (e_up >= 24.0 || e_dn >= 24.0) sol.convexity_certificate = false;
  }

  PointEval ev = locdetail::evaluate(s, p, w, x0, y0);
  std::vector<int> active;
  for (int n = 0; n < n_users; ++n) {
    const double sn = locdetail::slack_of(s, p, ev, n);
    if (sn < -1e-9 * s.users[n].q_joules) {
      throw InfeasibleInit("location start violates an energy budget");
    }
    if (sn <= 1e-7 * s.users[n].q_joules) active.push_back(n);
  }

  double x = x0, y = y0;
  double best_f = ev.f, best_x = x0, best_y = y0;
  sol.iterations = 0;

  if (!active.empty()) {
    // angles of the active energy-constraint gradients p_n * grad t_up
    std::vector<double> angles;
    bool degenerate = false;
    for (int n : active) {
      const double gx = p[n] * ev.ugx[n];
      const double gy = p[n] * ev.ugy[n];
      if (std::hypot(gx, gy) < 1e-300) { degenerate = true; break; }
      angles.push_back(std::atan2(gy, gx));
    }
    double psi = 0.0;
    bool escapable = false;
    if (!degenerate) {
      std::sort(angles.begin(), angles.end());
      const std::size_t k = angles.size();
      double gap_max = 2.0 * M_PI - (angles[k - 1] - angles[0]);
      psi = 0.5 * (angles[k - 1] + angles[0] + 2.0 * M_PI);
      for (std::size_t i = 0; i + 1 < k; ++i) {
        const double gap = angles[i + 1] - angles[i];
        if (gap > gap_max) {
          gap_max = gap;
          psi = 0.5 * (angles[i] + angles[i + 1]);
        }
      }
      escapable = gap_max > M_PI + 1e-12;
    }
    if (!escapable) {
      sol.x = x0;
      sol.y = y0;
      sol.objective = ev.f;
      sol.stalled = true;
      return sol;
    }
    // candidate escape directions: raw steepest descent when it points
    // strictly into the feasible cone, else the cone's own axis
    std::vector<std::pair<double, double>> dirs;
    const double g0 = std::hypot(ev.gx, ev.gy);
    if (g0 > 0.0) {
      const double vx = -ev.gx / g0, vy = -ev.gy / g0;
      bool inside = true;
      for (int n : active) {
        if (p[n] * (ev.ugx[n] * vx + ev.ugy[n] * vy) >= 0.0) {
          inside = false;
          break;
        }
      }
      if (inside) dirs.emplace_back(vx, vy);
    }
    dirs.emplace_back(std::cos(psi), std::sin(psi));
    bool moved = false;
    for (const auto& [vx, vy] : dirs) {
      double step = 1.0;
      for (int half = 0; half < 20 && !moved; ++half, step *= 0.5) {
        const PointEval trial =
            locdetail::evaluate(s, p, w, x0 + step * vx, y0 + step * vy);
        bool interior = true;
        for (int n = 0; n < n_users; ++n) {
          if (locdetail::slack_of(s, p, trial, n) <=
              1e-12 * s.users[n].q_joules) {
            interior = false;
            break;
          }
        }
        if (interior && trial.f < ev.f) {
          x = x0 + step * vx;
          y = y0 + step * vy;
          ev = trial;
          moved = true;
        }
      }
      if (moved) break;
    }
    if (!moved) {
      sol.x = x0;
      sol.y = y0;
      sol.objective = ev.f;
      sol.stalled = true;
      return sol;
    }
    if (ev.f < best_f) { best_f = ev.f; best_x = x; best_y = y; }
  }

  for (double mu = 1.0; mu >= 0.999e-8; mu *= 0.1) {
    double phi = locdetail::barrier_value(s, p, ev, mu);
    for (int iter = 0; iter < 200; ++iter) {
      // assemble barrier gradient and hessian on top of the delay's
      double gx = ev.gx, gy = ev.gy;
      double hxx = ev.hxx, hxy = ev.hxy, hyy = ev.hyy;
      for (int n = 0; n < n_users; ++n) {
        const double sn = locdetail::slack_of(s, p, ev, n);
        const double c1 = mu * p[n] / sn;
        const double c2 = mu * p[n] * p[n] / (sn * sn);
        gx += c1 * ev.ugx[n];
        gy += c1 * ev.ugy[n];
        hxx += c1 * ev.uhxx[n] + c2 * ev.ugx[n] * ev.ugx[n];
        hxy += c1 * ev.uhxy[n] + c2 * ev.ugx[n] * ev.ugy[n];
        hyy += c1 * ev.uhyy[n] + c2 * ev.ugy[n] * ev.ugy[n];
      }
      const double gnorm = std::hypot(gx, gy);
      if (gnorm <= 1e-8) break;

      double ux, uy;
      const double det = hxx * hyy - hxy * hxy;
      if (hxx > 0.0 && hyy > 0.0 && det > 0.0 && std::isfinite(det)) {
        ux = -(hyy * gx - hxy * gy) / det;
        uy = -(hxx * gy - hxy * gx) / det;
      } else {
        ux = -gx / gnorm;
        uy = -gy / gnorm;
      }
      double m = gx * ux + gy * uy;
      if (!(m < 0.0)) {  // numerically non-descent: fall back
        ux = -gx / gnorm;
        uy = -gy / gnorm;
        m = gx * ux + gy * uy;
      }
      const double unorm = std::hypot(ux, uy);
      if (unorm > 100.0) {  // keep trial points sane far from curvature
        ux *= 100.0 / unorm;
        uy *= 100.0 / unorm;
        m *= 100.0 / unorm;
      }

      double step = 1.0;
      bool accepted = false;
      for (int half = 0; half < 60; ++half, step *= 0.5) {
        const PointEval trial =
            locdetail::evaluate(s, p, w, x + step * ux, y + step * uy);
        const double phi_trial = locdetail::barrier_value(s, p, trial, mu);
        if (phi_trial <= phi + 1e-4 * step * m) {
          x += step * ux;
          y += step * uy;
          ev = trial;
          phi = phi_trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      ++sol.iterations;
      if (ev.f < best_f) { best_f = ev.f; best_x = x; best_y = y; }
    }
  }

  sol.x = best_x;
  sol.y = best_y;
  sol.objective = best_f;
  return sol;
}

}  // namespace thzuav
