#pragma once

#include <optional>
#include <span>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/kinematics.hpp"
#include "articulate/types.hpp"

namespace articulate {

struct JointEstimate {
  int joint_id = 0;
  Vec3 axis_camera = Vec3::UnitZ();  // unit
  std::optional<Vec3> pivot_camera;  // revolute only
  // radians for revolute, camera length units for prismatic; unsigned
  // offset from the rest state
  double state = 0.0;
};

// Camera-space parameters of a revolute joint from the two optimized part
// poses: axis u = normalize((R_a + R_b) u'), pivot q = mean over both
// parts of (s/G_s) R (q' - G_t) + t, state = relative rotation angle.
// Throws DegenerateAxis when ||(R_a + R_b) u'|| < 1e-9.
JointEstimate recover_revolute(const SimilarityTransform& pose_a,
                               const GTransform& g_a,
                               const SimilarityTransform& pose_b,
                               const GTransform& g_b,
                               const JointParamsNaocs& naocs);

// Prismatic counterpart: same axis formula, no pivot, state = ||delta||
// with delta the camera-space displacement of the two parts' NAOCS
// origins.
JointEstimate recover_prismatic(const SimilarityTransform& pose_a,
                                const GTransform& g_a,
                                const SimilarityTransform& pose_b,
                                const GTransform& g_b, const Vec3& axis_naocs);

// Closed-form recovery for every joint of a model given per-part poses,
// per-part G transforms, and NAOCS joint parameters.
std::vector<JointEstimate> recover_joints(
    const std::vector<SimilarityTransform>& poses,
    const std::vector<GTransform>& g, const KinematicModel& model,
    const NaocsJointParams& params);

// Oriented box of the part's NPCS coordinates carried into camera space by
// the pose. NPCS is zero-centered, so the half extents are the per-axis
// abs-max of the coordinates and the center is the image of the origin.
// Feed it the canonical part cloud for the full amodal box; an observed
// subset covers only the extents the view reaches.
OrientedBox amodal_box(const SimilarityTransform& pose,
                       std::span<const Vec3> npcs_points);

}  // namespace articulate
