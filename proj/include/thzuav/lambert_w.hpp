#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace thzuav {

// Real branches of the Lambert W function, w*exp(w) = x.
//   principal: W0  on [-1/e, inf),  W0  >= -1
//   negative:  W-1 on [-1/e, 0),    W-1 <= -1
enum class WBranch { principal, negative };

namespace wdetail {

inline constexpr double kInvE = 0.36787944117144232159552377016146;

// Series around the branch point x = -1/e in q = +-sqrt(2(e*x + 1)).
// Truncation error ~ q^7, so for |q| <= 1e-2 the result is correct to
// machine precision and no iteration can improve it (f' vanishes there).
inline double branch_series(double q) {
  return -1.0
      + q * (1.0
      + q * (-1.0 / 3.0
      + q * (11.0 / 72.0
      + q * (-43.0 / 540.0
      + q * (769.0 / 17280.0
      + q * (-221.0 / 8505.0))))));
}

inline double newton_polish(double w, double x, int steps) {
  for (int i = 0; i < steps; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double fp = ew * (w + 1.0);
    if (fp == 0.0 || !std::isfinite(f)) break;
    w -= f / fp;
  }
  return w;
}

// Halley on f(w) = w e^w - x, clamped to the branch half-line.
// Returns NaN on stall so the caller can fall back to bisection.
inline double halley(double w, double x, bool principal) {
  const double fscale = std::max(1.0, std::fabs(x));
  double best_w = w;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (!std::isfinite(f)) return std::numeric_limits<double>::quiet_NaN();
    const double af = std::fabs(f);
    if (af < best_f) { best_f = af; best_w = w; }
    if (af <= 1e-15 * fscale) return w;
    const double fp = ew * (w + 1.0);
    const double fpp = ew * (w + 2.0);
    const double denom = fp - 0.5 * f * fpp / (fp == 0.0 ? 1.0 : fp);
    if (denom == 0.0) break;
    double next = w - f / denom;
    // keep the iterate on its branch
    if (principal && next < -1.0) next = -1.0 + 0.5 * (w + 1.0);
    if (!principal && next > -1.0) next = -1.0 + 0.5 * (w + 1.0);
    if (next == w) return w;
    w = next;
  }
  if (best_f <= 1e-12 * fscale) return best_w;
  return std::numeric_limits<double>::quiet_NaN();
}

// Monotone bisection fallback; f is strictly monotone on each branch
// half-line, so 200 halvings pin the root to machine precision.
inline double bisect_w(double x, bool principal) {
  double lo, hi;  // invariant: root in [lo, hi]
  if (principal) {
    lo = -1.0;
    hi = 2.0;
    while (hi * std::exp(hi) < x && hi < 750.0) hi *= 2.0;
  } else {
    lo = -746.0;
    hi = -1.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = mid * std::exp(mid) - x;
    const bool go_right = principal ? (fm < 0.0) : (fm > 0.0);
    if (go_right) lo = mid; else hi = mid;
  }
  return newton_polish(0.5 * (lo + hi), x, 2);
}

// Solve w + ln(|w|) = ln(|x|), same root, overflow-proof for |x| huge
// (principal) or tiny (negative branch).
inline double log_space_newton(double w, double x, bool principal) {
  const double target = std::log(std::fabs(x));
  for (int i = 0; i < 60; ++i) {
    const double h = w + std::log(std::fabs(w)) - target;
    const double hp = 1.0 + 1.0 / w;
    if (hp == 0.0) break;
    const double next = w - h / hp;
    if (!std::isfinite(next) || next == w) break;
    if (principal && next < -1.0) break;
    if (!principal && next > -1.0) break;
    w = next;
    if (std::fabs(h) <= 1e-15 * std::max(1.0, std::fabs(target))) break;
  }
  return w;
}

}  // namespace wdetail

inline double lambert_w(WBranch branch, double x) {
  using namespace wdetail;
  const bool principal = (branch == WBranch::principal);

  // t = e*x + 1, the branch-point offset; fma keeps it accurate where
  // the direct expression cancels.
  double t = std::fma(x, M_E, 1.0);
  if (t < 0.0) {
    if (t < -1e-12) {
      throw std::domain_error("lambert_w: x below -1/e");
    }
    t = 0.0;  // roundoff landing just below the branch point
  }
  if (!principal && x >= 0.0) {
    throw std::domain_error("lambert_w: negative branch needs x < 0");
  }
  if (principal && x == 0.0) return 0.0;

  const double q = principal ? std::sqrt(2.0 * t) : -std::sqrt(2.0 * t);
  if (std::fabs(q) <= 1e-2) return branch_series(q);

  double w;
  if (principal) {
    if (x >= 1e150) return log_space_newton(std::log(x), x, true);
    if (t <= 0.25) {
      w = branch_series(q);
    } else if (x <= 1.0) {
      w = x;  // |x| < 1/e region away from the branch point
    } else {
      w = std::log1p(x);  // above-root seed, Newton-safe on convex f
    }
  } else {
    if (x >= -1e-150) {
      const double l1 = std::log(-x);
      return log_space_newton(l1 - std::log(-l1), x, false);
    }
    if (t <= 0.25) {
      w = branch_series(q);
    } else {
      const double l1 = std::log(-x);
      const double l2 = std::log(-l1);
      w = l1 - l2 + l2 / l1;
    }
  }

  const double h = halley(w, x, principal);
  if (std::isfinite(h)) return h;
  return bisect_w(x, principal);
}

}  // namespace thzuav
