#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace articulate {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using PointCloud = std::vector<Vec3>;

// true when R is orthonormal with determinant +1 (within tol)
bool is_rotation(const Mat3& r, double tol = 1e-9);

// Rodrigues rotation about a unit axis.
Mat3 rotation_about_axis(const Vec3& unit_axis, double angle);

// exp of so(3): rotation by |w| about w/|w|
Mat3 exp_so3(const Vec3& w);

// Similarity transform x -> scale * rotation * x + translation.
// Part poses (NPCS -> camera), camera extrinsics and forward-kinematics
// results all use this one type; rigid transforms simply carry scale 1.
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const {
    return scale * (rotation * x) + translation;
  }

  // composition this * other: apply `other` first
  SimilarityTransform compose(const SimilarityTransform& other) const {
    return {scale * other.scale, rotation * other.rotation,
            apply(other.translation)};
  }

  SimilarityTransform inverse() const {
    const double inv_s = 1.0 / scale;
    const Mat3 rt = rotation.transpose();
    return {inv_s, rt, -inv_s * (rt * translation)};
  }

  static SimilarityTransform identity() { return {}; }
};

// Infinite line: point + unit direction.
struct Line3 {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 half_extents = Vec3::Ones();

  double volume() const {
    return 8.0 * half_extents.x() * half_extents.y() * half_extents.z();
  }
  std::vector<Vec3> corners() const;
  bool contains(const Vec3& p) const;
};

}  // namespace articulate
