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

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

namespace vacgrip {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
using Pose = Eigen::Transform<Scalar, 3, Eigen::Isometry>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Posed = Pose<double>;

inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
Scalar deg2rad(Scalar deg) {
  return deg * Scalar(kPi) / Scalar(180);
}

/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
template <typename Scalar>
Mat3<Scalar> rotation_from_rpy(const Vec3<Scalar>& rpy) {
  using AA = Eigen::AngleAxis<Scalar>;
  return (AA(rpy.z(), Vec3<Scalar>::UnitZ()) * AA(rpy.y(), Vec3<Scalar>::UnitY()) *
          AA(rpy.x(), Vec3<Scalar>::UnitX()))
      .toRotationMatrix();
}

template <typename Scalar>
Pose<Scalar> make_pose(const Vec3<Scalar>& position, const Mat3<Scalar>& rotation) {
  Pose<Scalar> p = Pose<Scalar>::Identity();
  p.linear() = rotation;
  p.translation() = position;
  return p;
}

template <typename Scalar>
Pose<Scalar> make_pose(const Vec3<Scalar>& position, Scalar yaw = Scalar(0)) {
  return make_pose<Scalar>(position, rotation_from_rpy<Scalar>(Vec3<Scalar>(0, 0, yaw)));
}

/// Angle wrapped to [-pi, pi).
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2 * kPi);
  a = std::fmod(a + Scalar(kPi), two_pi);
  if (a < 0) a += two_pi;
  return a - Scalar(kPi);
}

/// Roll/pitch/yaw of R (inverse of rotation_from_rpy). Of the two equivalent
/// triples, and of their 2*pi shifts, returns the one closest to `ref` so a
/// sampled rotation path maps to continuous joint values.
template <typename Scalar>
Vec3<Scalar> rpy_near(const Mat3<Scalar>& R, const Vec3<Scalar>& ref) {
  const Scalar pitch = std::asin(std::clamp(-R(2, 0), Scalar(-1), Scalar(1)));
  Scalar roll = std::atan2(R(2, 1), R(2, 2));
  Scalar yaw = std::atan2(R(1, 0), R(0, 0));
  if (std::abs(std::cos(pitch)) < Scalar(1e-9)) {
    // Gimbal lock: only roll -/+ yaw is defined; keep the reference yaw.
    yaw = ref.z();
    const Scalar s = pitch > 0 ? Scalar(1) : Scalar(-1);
    roll = std::atan2(R(0, 1), R(1, 1)) * s + yaw * s;
  }
  const auto unwrap = [](Scalar a, Scalar r) { return r + wrap_angle(a - r); };
  const Vec3<Scalar> a(unwrap(roll, ref.x()), unwrap(pitch, ref.y()), unwrap(yaw, ref.z()));
  const Vec3<Scalar> b(unwrap(roll + Scalar(kPi), ref.x()), unwrap(Scalar(kPi) - pitch, ref.y()),
                       unwrap(yaw + Scalar(kPi), ref.z()));
  return (a - ref).squaredNorm() <= (b - ref).squaredNorm() ? a : b;
}

/// Heading of the body x axis projected on the ground plane.
template <typename Scalar>
Scalar yaw_of(const Pose<Scalar>& p) {
  const Vec3<Scalar> x = p.linear().col(0);
  return std::atan2(x.y(), x.x());
}

/// A flat rectangular patch: center, outward normal, in-plane axes u/v and
/// half extents along them.
template <typename Scalar>
struct FacePatch {
  Vec3<Scalar> center = Vec3<Scalar>::Zero();
  Vec3<Scalar> normal = Vec3<Scalar>::UnitZ();
  Vec3<Scalar> u = Vec3<Scalar>::UnitX();
  Vec3<Scalar> v = Vec3<Scalar>::UnitY();
  Scalar half_u = 0;
  Scalar half_v = 0;

  FacePatch transformed(const Pose<Scalar>& T) const {
    FacePatch out = *this;
    out.center = T * center;
    out.normal = T.linear() * normal;
    out.u = T.linear() * u;
    out.v = T.linear() * v;
    return out;
  }

  Scalar signed_distance(const Vec3<Scalar>& p) const { return (p - center).dot(normal); }

  /// True if the projection of p lies inside the patch shrunk by `margin`.
  bool contains_projection(const Vec3<Scalar>& p, Scalar margin = Scalar(0)) const {
    const Vec3<Scalar> d = p - center;
    return std::abs(d.dot(u)) <= half_u - margin && std::abs(d.dot(v)) <= half_v - margin;
  }
};

using FacePatchd = FacePatch<double>;

/// Face of an axis-aligned box (local frame) selected by a tag such as "+z"
/// or "-x".
template <typename Scalar>
FacePatch<Scalar> box_face(const Vec3<Scalar>& half_extents, int axis, int sign) {
  FacePatch<Scalar> f;
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  f.normal = Vec3<Scalar>::Unit(axis) * Scalar(sign);
  f.center = f.normal * half_extents[axis];
  f.u = Vec3<Scalar>::Unit(a);
  f.v = Vec3<Scalar>::Unit(b);
  f.half_u = half_extents[a];
  f.half_v = half_extents[b];
  return f;
}

}  // namespace vacgrip
