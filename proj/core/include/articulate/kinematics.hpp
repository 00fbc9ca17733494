#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "articulate/types.hpp"

namespace articulate {

enum class JointType { revolute, prismatic };

// Single-DOF joint; the child part moves relative to the parent.
// Axis and pivot live in the canonical object frame (rest configuration).
struct Joint {
  int id = 0;
  JointType type = JointType::revolute;
  int parent_part = 0;
  int child_part = 1;
  Vec3 axis_direction = Vec3::UnitZ();
  std::optional<Vec3> pivot;  // revolute only
  double state_min = 0.0;
  double state_max = 1.0;
  double rest_state = 0.0;
};

// Surface samples of one rigid part in the object frame at rest.
// Area weights are positive and sum to 1 per part; they turn sample
// visibility counts into area ratios for occlusion accounting.
struct PartGeometry {
  int id = 0;
  PointCloud canonical_points;
  std::vector<double> canonical_area_weights;
};

struct KinematicModel {
  std::string category_name;
  int root_part = 0;
  std::vector<PartGeometry> parts;
  std::vector<Joint> joints;

  std::size_t part_count() const { return parts.size(); }
  std::size_t joint_count() const { return joints.size(); }
};

// Per-joint states theta_k, one entry per joint in model order.
using JointStateVector = std::vector<double>;

enum class Category { two_part_revolute, eyeglasses_like, drawer_like };

// Throws UnknownCategory for unrecognized names.
Category category_from_string(const std::string& name);
std::string category_to_string(Category c);

struct ShapeParams {
  int points_per_part = 1200;
  double size_jitter = 0.25;    // relative instance-size variation
  double aspect_jitter = 0.12;  // relative per-dimension variation
};

// Checks that joints form a tree over the parts rooted at root_part, axes
// are unit length, ranges contain the rest states, and every part has area
// weights summing to 1. Throws DegenerateInput on violation.
void validate_model(const KinematicModel& model);

// Rest-relative rigid motion of every part in the object frame: the root
// part maps to the identity, each child composes its parent's transform
// with the joint motion for (state - rest_state). Revolute joints rotate
// about (axis through pivot), prismatic joints translate along the axis.
// Throws CountMismatch for a wrong state count, StateOutOfRange when a
// state leaves its joint's range.
std::vector<SimilarityTransform> forward_kinematics(
    const KinematicModel& model, const JointStateVector& states);

// Camera-frame part poses: camera composed with each FK transform. Every
// returned pose carries the camera's scale component.
std::vector<SimilarityTransform> pose_in_camera(
    const KinematicModel& model, const JointStateVector& states,
    const SimilarityTransform& camera);

// Deterministic procedural instance of a category; the same seed yields a
// bit-identical model. Categories:
//   two_part_revolute - slab base plus a lid hinged along one edge (M=2)
//   eyeglasses_like   - frame plus two temples on parallel vertical
//                       revolute axes, rest state at right angles (M=3)
//   drawer_like       - cabinet shell plus three prismatic drawers,
//                       rest state closed (M=4)
KinematicModel make_procedural_model(Category category, std::uint64_t seed,
                                     const ShapeParams& params = {});

}  // namespace articulate
