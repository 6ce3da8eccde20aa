#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

#include "thzuav/model.hpp"

namespace thzuav {

// Simulation defaults; payloads cycle through four classes so mixed
// loads appear at every N.
struct ScenarioParams {
  std::uint64_t seed = 1;
  int n_users = 14;
  double area_side = 50.0;
  double altitude = 20.0;
  double q_uav = 2.0;
  double p_max = 0.1;
  double total_bandwidth = 1e11;
  double q_budget_j = 8.0;
  double h0_db = -40.0;
  double sigma2_dbm_per_hz = -174.0;
  double absorption = 0.005;
  double carrier_hz = 1.2e12;
};

inline constexpr std::array<double, 4> kUplinkPayloadCycle = {1e13, 8e12, 6e12,
                                                              4e12};
inline constexpr std::array<double, 4> kDownlinkPayloadCycle = {8e12, 6.4e12,
                                                                4.8e12, 3.2e12};

namespace ioetail {
// 53-bit uniform in [0,1) from raw engine words; the distribution
// object in <random> is implementation-defined, this is not.
inline double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }
}  // namespace ioetail

// Deterministic: the same params produce bit-identical scenarios on
// every run and platform.
inline Scenario generate_scenario(const ScenarioParams& params) {
  if (params.n_users <= 0) {
    throw std::invalid_argument("generate_scenario: n_users must be positive");
  }
  Scenario s;
  s.radio = RadioConstants::from_db(params.h0_db, params.sigma2_dbm_per_hz,
                                    params.absorption, params.carrier_hz);
  s.altitude = params.altitude;
  s.q_uav = params.q_uav;
  s.p_max = params.p_max;
  s.total_bandwidth = params.total_bandwidth;
  s.area_side = params.area_side;
  s.seed = params.seed;
  std::mt19937_64 rng(params.seed);
  s.users.reserve(params.n_users);
  for (int n = 0; n < params.n_users; ++n) {
    UserSpec u;
    u.x = ioetail::u01(rng) * params.area_side;
    u.y = ioetail::u01(rng) * params.area_side;
    u.d_bits = kUplinkPayloadCycle[n % 4];
    u.e_bits = kDownlinkPayloadCycle[n % 4];
    u.q_joules = params.q_budget_j;
    s.users.push_back(u);
  }
  return s;
}

namespace ioetail {

inline void require_keys(const nlohmann::ordered_json& obj,
                         std::initializer_list<const char*> allowed,
                         const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) { ok = true; break; }
    }
    if (!ok) {
      throw std::invalid_argument(std::string("scenario json: unknown key '") +
                                  it.key() + "' in " + where);
    }
  }
  for (const char* key : allowed) {
    if (!obj.contains(key)) {
      throw std::invalid_argument(std::string("scenario json: missing key '") +
                                  key + "' in " + where);
    }
  }
}

}  // namespace ioetail

// dB and dBm fields are converted to linear exactly once, here.
inline Scenario parse_scenario(const std::string& text) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
  ioetail::require_keys(j,
                        {"users", "radio", "H_m", "q_watts", "P_watts",
                         "B_W_hz", "area_side_m", "seed"},
                        "top level");
  const auto& radio = j.at("radio");
  ioetail::require_keys(radio, {"h0_db", "sigma2_dbm_per_hz", "a_per_m", "f_hz"},
                        "radio");
  Scenario s;
  s.radio = RadioConstants::from_db(
      radio.at("h0_db").get<double>(),
      radio.at("sigma2_dbm_per_hz").get<double>(),
      radio.at("a_per_m").get<double>(), radio.at("f_hz").get<double>());
  s.altitude = j.at("H_m").get<double>();
  s.q_uav = j.at("q_watts").get<double>();
  s.p_max = j.at("P_watts").get<double>();
  s.total_bandwidth = j.at("B_W_hz").get<double>();
  s.area_side = j.at("area_side_m").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("users").is_array() || j.at("users").empty()) {
    throw std::invalid_argument("scenario json: users must be a nonempty array");
  }
  for (const auto& ju : j.at("users")) {
    ioetail::require_keys(ju, {"x_m", "y_m", "D_bits", "E_bits", "Q_joules"},
                          "user");
    UserSpec u;
    u.x = ju.at("x_m").get<double>();
    u.y = ju.at("y_m").get<double>();
    u.d_bits = ju.at("D_bits").get<double>();
    u.e_bits = ju.at("E_bits").get<double>();
    u.q_joules = ju.at("Q_joules").get<double>();
    s.users.push_back(u);
  }
  if (s.altitude <= 0.0 || s.q_uav <= 0.0 || s.p_max <= 0.0 ||
      s.total_bandwidth <= 0.0 || s.area_side <= 0.0) {
    throw std::invalid_argument("scenario json: scalar fields must be positive");
  }
  return s;
}

inline std::string serialize_scenario(const Scenario& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json users = nlohmann::ordered_json::array();
  for (const UserSpec& u : s.users) {
    nlohmann::ordered_json ju;
    ju["x_m"] = u.x;
    ju["y_m"] = u.y;
    ju["D_bits"] = u.d_bits;
    ju["E_bits"] = u.e_bits;
    ju["Q_joules"] = u.q_joules;
    users.push_back(ju);
  }
  j["users"] = users;
  j["radio"] = {{"h0_db", s.radio.h0_db},
                {"sigma2_dbm_per_hz", s.radio.sigma2_dbm_per_hz},
                {"a_per_m", s.radio.a},
                {"f_hz", s.radio.f}};
  j["H_m"] = s.altitude;
  j["q_watts"] = s.q_uav;
  j["P_watts"] = s.p_max;
  j["B_W_hz"] = s.total_bandwidth;
  j["area_side_m"] = s.area_side;
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

}  // namespace thzuav
