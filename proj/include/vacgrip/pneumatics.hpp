/*
 * Copyright (c) 2026 The vacgrip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/**
 * First-order model of one arm's suction line.
 *
 * Two cups share a single line behind one pump and one solenoid valve. With
 * the valve open the line vents to ambient:
 *
 *   dP/dt = k_vent * (0 - P)
 *
 * With the valve closed and the pump running the pump pulls toward p_min
 * while every cup leaks air back in:
 *
 *   dP/dt = k_pump * (p_min - P) + K_leak * (0 - P)
 *   K_leak = sum over cups of (sealed ? leak_coeff(material) : k_open_cup)
 *
 * so the plateau is P_ss = p_min * k_pump / (k_pump + K_leak). Pressures are
 * gauge kPa (0 = ambient, negative under vacuum).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vacgrip/device_state.hpp"
#include "vacgrip/geometry.hpp"

namespace vacgrip {

inline constexpr double kGravity = 9.81;
inline constexpr int kCupsPerChannel = 2;

struct MaterialProfile {
  std::string name;
  double leak_coeff = 0.0;  // s^-1 per sealed cup
  bool suctionable = false;
  friend bool operator==(const MaterialProfile&, const MaterialProfile&) = default;
};

/// Named material records. The default table orders leak rates
/// glass < plastic < leather < cardboard.
class MaterialTable {
 public:
  static MaterialTable defaults();
  /// JSON file: [{"name": ..., "leak_coeff": ..., "suctionable": ...}, ...]
  static MaterialTable load(const std::string& path);

  void add(MaterialProfile m);
  const MaterialProfile& at(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }
  std::vector<MaterialProfile> all() const;

 private:
  std::map<std::string, MaterialProfile> by_name_;
};

template <typename Scalar>
struct PneumaticParams {
  Scalar p_min = Scalar(-60);      // kPa, pump rating
  Scalar k_pump = Scalar(5);       // s^-1
  Scalar k_vent = Scalar(20);      // s^-1
  Scalar k_open_cup = Scalar(15);  // s^-1, leak of an unsealed cup
  Scalar cup_diameter = Scalar(0.015);
  Scalar dt = Scalar(0.001);       // step length for step_pressure, <= 10 ms

  bool valid() const {
    return p_min < 0 && k_pump > 0 && k_vent > 0 && k_open_cup > 0 && cup_diameter > 0 && dt > 0;
  }
};

struct CupContact {
  bool sealed = false;
  std::optional<MaterialProfile> material;
  friend bool operator==(const CupContact&, const CupContact&) = default;
};

template <typename Scalar>
struct PressureState {
  Scalar gauge_kpa = Scalar(0);
  std::array<CupContact, kCupsPerChannel> cups{};

  int sealed_count() const {
    return static_cast<int>(std::count_if(cups.begin(), cups.end(), [](const CupContact& c) { return c.sealed; }));
  }
  friend bool operator==(const PressureState&, const PressureState&) = default;
};

using PneumaticParamsd = PneumaticParams<double>;
using PressureStated = PressureState<double>;

template <typename Scalar>
Scalar leak_rate(const PressureState<Scalar>& ps, const PneumaticParams<Scalar>& params) {
  Scalar k = 0;
  for (const auto& cup : ps.cups) {
    k += (cup.sealed && cup.material) ? Scalar(cup.material->leak_coeff) : params.k_open_cup;
  }
  return k;
}

/// Plateau pressure the line settles to for the given device state and cups.
template <typename Scalar>
Scalar steady_state_pressure(const PressureState<Scalar>& ps, const DeviceState& dev,
                             const PneumaticParams<Scalar>& params) {
  if (!dev.valve_closed || !dev.pump_on) return Scalar(0);
  return params.p_min * params.k_pump / (params.k_pump + leak_rate(ps, params));
}

/// One forward-Euler step of length params.dt (at most 10 ms), taken as
/// substeps of at most 1 ms so the update stays monotone.
template <typename Scalar>
PressureState<Scalar> step_pressure(PressureState<Scalar> ps, const DeviceState& dev,
                                    const PneumaticParams<Scalar>& params) {
  const Scalar max_sub = Scalar(0.001);
  const int n = std::max(1, static_cast<int>(std::ceil(params.dt / max_sub - Scalar(1e-9))));
  const Scalar h = params.dt / Scalar(n);
  const Scalar k_leak = leak_rate(ps, params);
  for (int i = 0; i < n; ++i) {
    const Scalar P = ps.gauge_kpa;
    Scalar dPdt;
    if (!dev.valve_closed) {
      dPdt = params.k_vent * (Scalar(0) - P);
    } else if (dev.pump_on) {
      dPdt = params.k_pump * (params.p_min - P) + k_leak * (Scalar(0) - P);
    } else {
      // Closed valve with the pump off is unreachable through the firmware;
      // the line just leaks back toward ambient.
      dPdt = k_leak * (Scalar(0) - P);
    }
    ps.gauge_kpa = std::clamp(P + h * dPdt, params.p_min, Scalar(0));
  }
  return ps;
}

/// Advances by an arbitrary duration in step_pressure calls of at most 10 ms.
template <typename Scalar>
PressureState<Scalar> advance_pressure(PressureState<Scalar> ps, const DeviceState& dev,
                                       PneumaticParams<Scalar> params, Scalar duration) {
  const int n = std::max(1, static_cast<int>(std::ceil(duration / Scalar(0.01) - Scalar(1e-9))));
  params.dt = duration / Scalar(n);
  for (int i = 0; i < n; ++i) ps = step_pressure(ps, dev, params);
  return ps;
}

template <typename Scalar>
Scalar cup_area(const PneumaticParams<Scalar>& params) {
  const Scalar r = params.cup_diameter / Scalar(2);
  return Scalar(kPi) * r * r;
}

/// Newtons held by the sealed cups at the current line pressure.
template <typename Scalar>
Scalar suction_force(const PressureState<Scalar>& ps, const PneumaticParams<Scalar>& params) {
  return Scalar(ps.sealed_count()) * std::abs(ps.gauge_kpa) * Scalar(1000) * cup_area(params);
}

template <typename Scalar>
bool holds_payload(const PressureState<Scalar>& ps, Scalar mass_kg, const PneumaticParams<Scalar>& params,
                   Scalar safety_factor = Scalar(1.5)) {
  return suction_force(ps, params) >= mass_kg * Scalar(kGravity) * safety_factor;
}

struct TraceSample {
  double t_s = 0.0;
  std::string phase;
  double pressure_kpa = 0.0;
  double force_n = 0.0;
};

/// Bench trace of one line with both cups on `material`: gripper closed with
/// the pump off, cups opened onto the surface with the pump off, then suction.
/// Sampled every `sample_dt` seconds, starting at t = 0.
std::vector<TraceSample> phase_trace(const MaterialProfile& material, const PneumaticParamsd& params = {},
                                     double close_s = 1.0, double open_s = 2.0, double suction_s = 3.0,
                                     double sample_dt = 0.01);

template <typename Scalar>
struct CupPose {
  Vec3<Scalar> position = Vec3<Scalar>::Zero();
  Vec3<Scalar> axis = -Vec3<Scalar>::UnitZ();  // direction the cup mouth faces
};

template <typename Scalar>
struct SealTolerance {
  Scalar max_angle = deg2rad(Scalar(10));
  Scalar max_standoff = Scalar(0.003);
  Scalar cup_radius = Scalar(0.0075);  // cup must sit this far inside the patch edge
};

/// A cup seals when the material takes suction, the cup faces into the
/// surface within the angular tolerance, its center lies on the patch and it
/// is within the standoff tolerance of the plane.
template <typename Scalar>
bool seal_check(const CupPose<Scalar>& cup, const FacePatch<Scalar>& surface, const MaterialProfile& material,
                const SealTolerance<Scalar>& tol = {}) {
  if (!material.suctionable) return false;
  const Scalar cos_angle = std::clamp(cup.axis.normalized().dot(-surface.normal.normalized()), Scalar(-1), Scalar(1));
  if (std::acos(cos_angle) > tol.max_angle) return false;
  if (!surface.contains_projection(cup.position, tol.cup_radius)) return false;
  return std::abs(surface.signed_distance(cup.position)) <= tol.max_standoff;
}

}  // namespace vacgrip
