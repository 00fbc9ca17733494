#pragma once

#include <optional>
#include <vector>

#include "articulate/kinematics.hpp"
#include "articulate/types.hpp"

namespace articulate {

// Object-level canonical space: the rest-state object zero-centered and
// scaled to unit tight-box diagonal. Maps rest-frame x to g = scale*x+offset.
struct NaocsFrame {
  double object_scale = 1.0;
  Vec3 object_offset = Vec3::Zero();
  std::vector<PointCloud> per_point_naocs;  // g_i per part, model order

  Vec3 map(const Vec3& x) const { return object_scale * x + object_offset; }
};

// Part-level canonical space: one part zero-centered with unit diagonal,
// orientation unchanged. g_i = g_scale * c_i + g_offset recovers NAOCS.
struct PartNpcs {
  PointCloud points;  // c_i, parallel to the part's NAOCS points
  double g_scale = 1.0;
  Vec3 g_offset = Vec3::Zero();
};
using NpcsFrame = std::vector<PartNpcs>;

struct JointParamsNaocs {
  Vec3 axis = Vec3::UnitZ();  // unit direction u'
  std::optional<Vec3> pivot;  // q', revolute joints only
};
using NaocsJointParams = std::vector<JointParamsNaocs>;

// Per-part NPCS->NAOCS map (g = scale * c + offset) without the points.
struct GTransform {
  double scale = 1.0;
  Vec3 offset = Vec3::Zero();
};

// Per-part, per-point joint labels. 0 means unassociated; label k refers to
// the joint with id k-1.
using JointAssociation = std::vector<std::vector<int>>;

// Normalize the rest-state object: forward kinematics at rest, zero-center,
// scale the tight bounding box diagonal to 1. Orientation is preserved.
NaocsFrame build_naocs(const KinematicModel& model);

// Per-part normalization inside NAOCS: g_offset = part tight-box center,
// g_scale = part tight-box diagonal, c_i = (g_i - g_offset) / g_scale.
// Throws DegeneratePart when a part's diagonal is below 1e-9.
NpcsFrame build_npcs(const NaocsFrame& naocs);

// Joint parameters carried into NAOCS: directions are invariant under the
// scale-plus-offset map, pivots map like points.
NaocsJointParams naocs_joint_params(const KinematicModel& model,
                                    const NaocsFrame& naocs);

// Association heuristic for one NAOCS point belonging to `part`: points of
// a revolute joint's two connecting parts within NAOCS distance sigma of
// its axis get that joint's label; prismatic joints claim every point of
// their moving part. A prismatic claim beats a revolute one; among
// revolute claims the smaller axis distance wins. Returns 0 for
// unassociated, k for the joint with id k-1.
int associate_point(const Vec3& g_naocs, int part, const KinematicModel& model,
                    const NaocsJointParams& params, double sigma = 0.2);

// The heuristic applied to every canonical sample point.
JointAssociation associate_points_to_joints(const NaocsFrame& naocs,
                                            const KinematicModel& model,
                                            double sigma = 0.2);

// Similarity transform from a part's NPCS into the rest-state object frame
// (identity rotation; undoes both normalizations).
SimilarityTransform npcs_to_object(const NaocsFrame& naocs,
                                   const PartNpcs& part);

}  // namespace articulate
