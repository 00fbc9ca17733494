#include "articulate/canonical.hpp"

#include <cmath>
#include <limits>

#include "articulate/errors.hpp"
#include "articulate/geometry.hpp"

namespace articulate {

namespace {

struct Bounds {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void add(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return (hi - lo).norm(); }
};

}  // namespace

NaocsFrame build_naocs(const KinematicModel& model) {
  JointStateVector rest(model.joints.size());
  for (std::size_t k = 0; k < rest.size(); ++k)
    rest[k] = model.joints[k].rest_state;
  const std::vector<SimilarityTransform> fk = forward_kinematics(model, rest);

  Bounds box;
  for (std::size_t j = 0; j < model.parts.size(); ++j)
    for (const Vec3& p : model.parts[j].canonical_points)
      box.add(fk[j].apply(p));
  const double diag = box.diagonal();
  if (!(diag > 1e-9)) throw DegenerateInput("rest object has zero extent");

  NaocsFrame out;
  out.object_scale = 1.0 / diag;
  out.object_offset = -out.object_scale * box.center();
  out.per_point_naocs.resize(model.parts.size());
  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    out.per_point_naocs[j].reserve(model.parts[j].canonical_points.size());
    for (const Vec3& p : model.parts[j].canonical_points)
      out.per_point_naocs[j].push_back(out.map(fk[j].apply(p)));
  }
  return out;
}

NpcsFrame build_npcs(const NaocsFrame& naocs) {
  NpcsFrame out(naocs.per_point_naocs.size());
  for (std::size_t j = 0; j < naocs.per_point_naocs.size(); ++j) {
    Bounds box;
    for (const Vec3& g : naocs.per_point_naocs[j]) box.add(g);
    const double diag = box.diagonal();
    if (!(diag > 1e-9))
      throw DegeneratePart("part " + std::to_string(j) +
                           " has zero extent in NAOCS");
    out[j].g_scale = diag;
    out[j].g_offset = box.center();
    out[j].points.reserve(naocs.per_point_naocs[j].size());
    for (const Vec3& g : naocs.per_point_naocs[j])
      out[j].points.push_back((g - out[j].g_offset) / out[j].g_scale);
  }
  return out;
}

NaocsJointParams naocs_joint_params(const KinematicModel& model,
                                    const NaocsFrame& naocs) {
  NaocsJointParams out(model.joints.size());
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    out[k].axis = model.joints[k].axis_direction;
    if (model.joints[k].pivot)
      out[k].pivot = naocs.map(*model.joints[k].pivot);
  }
  return out;
}

int associate_point(const Vec3& g_naocs, int part, const KinematicModel& model,
                    const NaocsJointParams& params, double sigma) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    const Joint& joint = model.joints[k];
    if (joint.type == JointType::prismatic) {
      if (part == joint.child_part) return static_cast<int>(k) + 1;
      continue;
    }
    if (part != joint.parent_part && part != joint.child_part) continue;
    const Vec3 rel = g_naocs - *params[k].pivot;
    const double dist =
        (rel - rel.dot(params[k].axis) * params[k].axis).norm();
    if (dist < sigma && dist < best_dist) {
      best = static_cast<int>(k) + 1;
      best_dist = dist;
    }
  }
  return best;
}

JointAssociation associate_points_to_joints(const NaocsFrame& naocs,
                                            const KinematicModel& model,
                                            double sigma) {
  if (naocs.per_point_naocs.size() != model.parts.size())
    throw CountMismatch("NAOCS frame does not match model part count");
  const NaocsJointParams params = naocs_joint_params(model, naocs);

  JointAssociation labels(model.parts.size());
  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    const PointCloud& pts = naocs.per_point_naocs[j];
    labels[j].reserve(pts.size());
    for (const Vec3& g : pts)
      labels[j].push_back(
          associate_point(g, static_cast<int>(j), model, params, sigma));
  }
  return labels;
}

SimilarityTransform npcs_to_object(const NaocsFrame& naocs,
                                   const PartNpcs& part) {
  SimilarityTransform out;
  out.scale = part.g_scale / naocs.object_scale;
  out.translation = (part.g_offset - naocs.object_offset) / naocs.object_scale;
  return out;
}

}  // namespace articulate
