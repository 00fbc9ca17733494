#include "articulate/recover.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "articulate/errors.hpp"
#include "articulate/geometry.hpp"
#include "articulate/solve.hpp"

namespace articulate {

namespace {

Vec3 recover_axis(const Mat3& ra, const Mat3& rb, const Vec3& axis_naocs) {
  const Vec3 sum = (ra + rb) * axis_naocs;
  const double norm = sum.norm();
  if (norm < 1e-9)
    throw DegenerateAxis("part rotations flip the joint axis");
  return sum / norm;
}

}  // namespace

JointEstimate recover_revolute(const SimilarityTransform& pose_a,
                               const GTransform& g_a,
                               const SimilarityTransform& pose_b,
                               const GTransform& g_b,
                               const JointParamsNaocs& naocs) {
  JointEstimate out;
  out.axis_camera = recover_axis(pose_a.rotation, pose_b.rotation, naocs.axis);
  const Vec3 q = *naocs.pivot;
  const Vec3 qa = (pose_a.scale / g_a.scale) *
                      (pose_a.rotation * (q - g_a.offset)) +
                  pose_a.translation;
  const Vec3 qb = (pose_b.scale / g_b.scale) *
                      (pose_b.rotation * (q - g_b.offset)) +
                  pose_b.translation;
  out.pivot_camera = 0.5 * (qa + qb);
  out.state = rotation_geodesic_deg(pose_a.rotation, pose_b.rotation) *
              std::numbers::pi / 180.0;
  return out;
}

JointEstimate recover_prismatic(const SimilarityTransform& pose_a,
                                const GTransform& g_a,
                                const SimilarityTransform& pose_b,
                                const GTransform& g_b,
                                const Vec3& axis_naocs) {
  JointEstimate out;
  out.axis_camera = recover_axis(pose_a.rotation, pose_b.rotation, axis_naocs);
  out.state = prismatic_delta(pose_a, g_a, pose_b, g_b).norm();
  return out;
}

std::vector<JointEstimate> recover_joints(
    const std::vector<SimilarityTransform>& poses,
    const std::vector<GTransform>& g, const KinematicModel& model,
    const NaocsJointParams& params) {
  if (params.size() != model.joints.size())
    throw CountMismatch("joint parameter count != model joint count");
  std::vector<JointEstimate> out;
  out.reserve(model.joints.size());
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    const Joint& joint = model.joints[k];
    const SimilarityTransform& pa = poses.at(joint.parent_part);
    const SimilarityTransform& pb = poses.at(joint.child_part);
    const GTransform& ga = g.at(joint.parent_part);
    const GTransform& gb = g.at(joint.child_part);
    JointEstimate est =
        joint.type == JointType::revolute
            ? recover_revolute(pa, ga, pb, gb, params[k])
            : recover_prismatic(pa, ga, pb, gb, params[k].axis);
    est.joint_id = joint.id;
    out.push_back(est);
  }
  return out;
}

OrientedBox amodal_box(const SimilarityTransform& pose,
                       std::span<const Vec3> npcs_points) {
  if (npcs_points.empty()) throw TooFewPoints("amodal box needs points");
  // NPCS is zero-centered, so one visible face per dimension fixes the
  // full extent: half extent = max |c_d|, center = image of the origin.
  // A plain tight box of the observed coordinates would under-cover every
  // dimension whose far face is occluded.
  Vec3 extent = Vec3::Zero();
  for (const Vec3& c : npcs_points) extent = extent.cwiseMax(c.cwiseAbs());
  OrientedBox box;
  box.center = pose.apply(Vec3::Zero());
  box.rotation = pose.rotation;
  box.half_extents = (pose.scale * extent).cwiseMax(1e-12);
  return box;
}

}  // namespace articulate
