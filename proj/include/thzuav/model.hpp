#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace thzuav {

inline constexpr double kLn2 = 0.69314718055994530941723212145818;

// Feasibility tolerances used everywhere a decision is checked.
inline constexpr double kPowerTolW = 1e-12;       // p_n <= P + tol
inline constexpr double kEnergyTolJ = 1e-9;       // t_up*p <= Q + tol
inline constexpr double kBandwidthTolRel = 1e-9;  // |sum w - B_W| <= tol*B_W

// Link-budget constants. The linear fields drive all math; the dB/dBm
// originals are kept so serialization reproduces the input bytes.
struct RadioConstants {
  double h0 = 1e-4;          // reference gain at 1 m, linear
  double sigma2 = 0.0;       // noise PSD, W/Hz
  double a = 0.005;          // molecular absorption, 1/m
  double f = 1.2e12;         // carrier, Hz (informational)
  double h0_db = -40.0;
  double sigma2_dbm_per_hz = -174.0;

  static RadioConstants from_db(double h0_db, double sigma2_dbm_per_hz,
                                double a, double f) {
    RadioConstants rc;
    rc.h0_db = h0_db;
    rc.sigma2_dbm_per_hz = sigma2_dbm_per_hz;
    rc.h0 = std::pow(10.0, h0_db / 10.0);
    rc.sigma2 = std::pow(10.0, (sigma2_dbm_per_hz - 30.0) / 10.0);
    rc.a = a;
    rc.f = f;
    return rc;
  }
};

struct UserSpec {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double d_bits = 0.0;   // uplink payload
  double e_bits = 0.0;   // downlink payload
  double q_joules = 0.0; // uplink energy budget
};

struct Scenario {
  std::vector<UserSpec> users;
  RadioConstants radio;
  double altitude = 20.0;   // UAV height H, m
  double q_uav = 2.0;       // downlink transmit power, W
  double p_max = 0.1;       // per-user uplink power cap, W
  double total_bandwidth = 1e11;  // B_W, Hz
  double area_side = 50.0;  // users live in [0, area_side]^2
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(users.size()); }
};

// One candidate operating point: UAV position plus per-user power and
// bandwidth. Invariants (checked by constraint_report, not here):
// sum(w) = B_W, 0 < p_n <= P, energy within budget.
struct Decision {
  double x = 0.0;
  double y = 0.0;
  std::vector<double> p;  // W
  std::vector<double> w;  // Hz
};

// Raised when no positive power can meet an energy budget (c_n >= 1).
class EnergyInfeasible : public std::runtime_error {
 public:
  explicit EnergyInfeasible(std::vector<int> users_in)
      : std::runtime_error("energy budget unattainable for user(s)"),
        users(std::move(users_in)) {}
  std::vector<int> users;
};

class InfeasibleInit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double distance(const UserSpec& u, double x, double y, double altitude) {
  const double dx = x - u.x;
  const double dy = y - u.y;
  return std::sqrt(dx * dx + dy * dy + altitude * altitude);
}

// Path gain d^-2 * exp(-a d): spreading loss times molecular absorption.
inline double channel_gain(double d, double a) {
  if (d <= 0.0) throw std::domain_error("channel_gain: d must be positive");
  return std::exp(-a * d) / (d * d);
}

// k_n: received SNR per watt of transmit power at bandwidth w.
inline double snr_coefficient(double w, double d, const RadioConstants& rc) {
  if (w <= 0.0) throw std::domain_error("snr_coefficient: w must be positive");
  return rc.h0 * channel_gain(d, rc.a) / (w * rc.sigma2);
}

// Shared rate kernel: both link directions are w*log2(1 + k*power),
// they differ only in which power they plug in.
inline double link_rate(double w, double k, double power) {
  if (w <= 0.0) throw std::domain_error("link_rate: w must be positive");
  if (power < 0.0) throw std::domain_error("link_rate: power must be >= 0");
  return w * std::log1p(k * power) / kLn2;
}

// Delay of pushing `bits` through `rate`; a dead link is reported as
// +inf rather than an error so objectives stay comparable.
inline double payload_delay(double bits, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return bits / rate;
}

// Everything downstream solvers need about one user at one decision.
struct LinkDerived {
  double dist_m = 0.0;
  double gain = 0.0;
  double k_per_w = 0.0;   // SNR per watt
  double l = 0.0;         // D/(w*Q), energy-constraint slope
  double e = 0.0;         // 1 + k*p
  double rate_up = 0.0;   // bits/s
  double rate_dn = 0.0;
  double t_up = 0.0;      // s
  double t_dn = 0.0;
  double energy_j = 0.0;  // t_up * p
};

inline LinkDerived link_derive(const Scenario& s, const Decision& dec, int n) {
  const UserSpec& u = s.users[n];
  LinkDerived ld;
  ld.dist_m = distance(u, dec.x, dec.y, s.altitude);
  ld.gain = channel_gain(ld.dist_m, s.radio.a);
  const double w = dec.w[n];
  const double p = dec.p[n];
  ld.k_per_w = snr_coefficient(w, ld.dist_m, s.radio);
  ld.l = u.d_bits / (w * u.q_joules);
  ld.e = 1.0 + ld.k_per_w * p;
  ld.rate_up = link_rate(w, ld.k_per_w, p);
  ld.rate_dn = link_rate(w, ld.k_per_w, s.q_uav);
  ld.t_up = payload_delay(u.d_bits, ld.rate_up);
  ld.t_dn = payload_delay(u.e_bits, ld.rate_dn);
  ld.energy_j = std::isfinite(ld.t_up) ? ld.t_up * p : (p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return ld;
}

// Sum of uplink and downlink delays over all users, in seconds.
// +inf when any link is dead.
inline double total_objective(const Scenario& s, const Decision& dec) {
  double total = 0.0;
  for (int n = 0; n < s.n(); ++n) {
    const LinkDerived ld = link_derive(s, dec, n);
    total += ld.t_up + ld.t_dn;
  }
  return total;
}

struct ConstraintReport {
  bool feasible = true;
  double bandwidth_residual_rel = 0.0;  // |sum w - B_W| / B_W
  std::vector<int> power_violations;    // p_n > P + tol or p_n <= 0
  std::vector<int> energy_violations;   // t_up*p > Q + tol
  std::vector<int> bandwidth_violations;  // w_n <= 0
  double worst_energy_excess_j = 0.0;
};

inline ConstraintReport constraint_report(const Scenario& s,
                                          const Decision& dec) {
  ConstraintReport rep;
  if (static_cast<int>(dec.p.size()) != s.n() ||
      static_cast<int>(dec.w.size()) != s.n()) {
    throw std::invalid_argument("constraint_report: decision size mismatch");
  }
  double wsum = 0.0;
  for (int n = 0; n < s.n(); ++n) {
    const double p = dec.p[n];
    const double w = dec.w[n];
    if (w <= 0.0) {
      rep.bandwidth_violations.push_back(n);
      continue;
    }
    wsum += w;
    if (p <= 0.0 || p > s.p_max + kPowerTolW) rep.power_violations.push_back(n);
    const LinkDerived ld = link_derive(s, dec, n);
    const double excess = ld.energy_j - s.users[n].q_joules;
    if (excess > kEnergyTolJ) {
      rep.energy_violations.push_back(n);
      rep.worst_energy_excess_j = std::max(rep.worst_energy_excess_j, excess);
    }
  }
  rep.bandwidth_residual_rel =
      std::fabs(wsum - s.total_bandwidth) / s.total_bandwidth;
  rep.feasible = rep.power_violations.empty() && rep.energy_violations.empty() &&
                 rep.bandwidth_violations.empty() &&
                 rep.bandwidth_residual_rel <= kBandwidthTolRel;
  return rep;
}

}  // namespace thzuav
