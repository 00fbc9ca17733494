#include "articulate/predict.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "articulate/errors.hpp"
#include "articulate/rng.hpp"

namespace articulate {

namespace {

Vec3 any_unit_perpendicular(const Vec3& unit) {
  const Vec3 helper =
      std::abs(unit.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return unit.cross(helper).normalized();
}

}  // namespace

Vec3 perturb_direction(const Vec3& unit, double sigma_rad, RngStream& rng) {
  Vec3 tangent = rng.unit_vector();
  tangent -= tangent.dot(unit) * unit;
  while (tangent.norm() < 1e-6) {
    tangent = rng.unit_vector();
    tangent -= tangent.dot(unit) * unit;
  }
  tangent.normalize();
  const double angle = sigma_rad * rng.normal();
  return std::cos(angle) * unit + std::sin(angle) * tangent;
}

Vec3 mean_axis_direction(const std::vector<Vec3>& axes) {
  if (axes.size() < 3)
    throw InsufficientVotes("need at least 3 axis votes");
  // sign-align against the principal direction so antipodal votes do not
  // cancel; the reference is permutation-invariant up to rounding
  Mat3 scatter = Mat3::Zero();
  for (const Vec3& a : axes) scatter += a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  Vec3 ref = eig.eigenvectors().col(2);
  int dominant = 0;
  ref.cwiseAbs().maxCoeff(&dominant);
  if (ref(dominant) < 0.0) ref = -ref;

  Vec3 mean = Vec3::Zero();
  for (const Vec3& a : axes) mean += a.dot(ref) < 0.0 ? -a : a;
  const double norm = mean.norm();
  if (norm < 1e-12) throw DegenerateAxis("axis votes cancel out");
  return mean / norm;
}

PredictionRecord simulate_prediction(const Scene& scene,
                                     const KinematicModel& model,
                                     const NoiseConfig& noise,
                                     std::uint64_t rng_seed,
                                     double assoc_sigma) {
  const std::size_t n = scene.points.size();
  const std::size_t m = model.parts.size();
  const std::size_t k_joints = model.joints.size();
  const NaocsJointParams& params = scene.gt_joint_params_naocs;

  PredictionRecord pred;
  pred.scene_id = scene.scene_id;
  pred.labels = scene.gt_part_labels;
  pred.npcs = scene.gt_npcs;
  pred.g_scale.resize(n);
  pred.g_offset.resize(n);
  pred.assoc.resize(n);
  pred.votes.assign(n, JointVote{});

  for (std::size_t i = 0; i < n; ++i) {
    const GTransform& g = scene.gt_g[scene.gt_part_labels[i]];
    pred.g_scale[i] = g.scale;
    pred.g_offset[i] = g.offset;
    const Vec3 g_naocs = g.scale * scene.gt_npcs[i] + g.offset;
    pred.assoc[i] = associate_point(g_naocs, scene.gt_part_labels[i], model,
                                    params, assoc_sigma);
    if (pred.assoc[i] == 0) continue;

    const std::size_t k = static_cast<std::size_t>(pred.assoc[i]) - 1;
    const Vec3& axis = params[k].axis;
    JointVote& v = pred.votes[i];
    v[0] = axis.x();
    v[1] = axis.y();
    v[2] = axis.z();
    if (model.joints[k].type == JointType::revolute) {
      const Vec3 rel = g_naocs - *params[k].pivot;
      const Vec3 offset = rel.dot(axis) * axis - rel;  // to the projection
      const double dist = offset.norm();
      const Vec3 dir =
          dist > 1e-12 ? Vec3(offset / dist) : any_unit_perpendicular(axis);
      v[3] = dir.x();
      v[4] = dir.y();
      v[5] = dir.z();
      v[6] = dist;
    }
  }

  RngStream rng(rng_seed);

  for (std::size_t i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d)
      pred.npcs[i](d) += noise.npcs_sigma * rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d)
      pred.g_offset[i](d) += noise.g_offset_sigma * rng.normal();
    pred.g_scale[i] *= std::exp(noise.g_scale_rel_sigma * rng.normal());
  }

  const double axis_sigma_rad =
      noise.axis_angle_sigma_deg * std::numbers::pi / 180.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pred.assoc[i] == 0) continue;
    JointVote& v = pred.votes[i];
    const Vec3 axis =
        perturb_direction(Vec3(v[0], v[1], v[2]), axis_sigma_rad, rng);
    v[0] = axis.x();
    v[1] = axis.y();
    v[2] = axis.z();
    const std::size_t k = static_cast<std::size_t>(pred.assoc[i]) - 1;
    if (model.joints[k].type == JointType::revolute)
      v[6] += noise.pivot_sigma * rng.normal();
  }

  // segmentation flips, biased to part boundaries: only the 10% of points
  // closest to another part's points are eligible
  if (noise.seg_flip_prob > 0.0 && m > 1) {
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (scene.gt_part_labels[i] != scene.gt_part_labels[j])
          nearest[i] = std::min(nearest[i],
                                (scene.points[i] - scene.points[j]).norm());
    std::vector<double> sorted = nearest;
    std::sort(sorted.begin(), sorted.end());
    const double threshold = sorted[static_cast<std::size_t>(
        0.1 * static_cast<double>(n - 1))];
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] > threshold) continue;
      if (rng.uniform() >= noise.seg_flip_prob) continue;
      const std::size_t other = rng.index(m - 1);
      pred.labels[i] = static_cast<int>(
          other >= static_cast<std::size_t>(pred.labels[i]) ? other + 1
                                                            : other);
    }
  }

  if (noise.assoc_flip_prob > 0.0 && k_joints > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() >= noise.assoc_flip_prob) continue;
      const std::size_t other = rng.index(k_joints);  // k_joints+1 labels
      pred.assoc[i] = static_cast<int>(
          other >= static_cast<std::size_t>(pred.assoc[i]) ? other + 1
                                                           : other);
    }
  }
  return pred;
}

std::vector<GTransform> aggregate_part_transforms(const PredictionRecord& pred,
                                                  std::size_t part_count) {
  std::vector<GTransform> out(part_count, GTransform{0.0, Vec3::Zero()});
  std::vector<std::size_t> counts(part_count, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int label = pred.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= part_count)
      throw CountMismatch("part label outside model range");
    out[label].scale += pred.g_scale[i];
    out[label].offset += pred.g_offset[i];
    ++counts[label];
  }
  for (std::size_t j = 0; j < part_count; ++j) {
    if (counts[j] == 0)
      throw EmptyPart("part " + std::to_string(j) + " has no points");
    out[j].scale /= static_cast<double>(counts[j]);
    out[j].offset /= static_cast<double>(counts[j]);
  }
  return out;
}

NaocsJointParams aggregate_joint_votes(const PredictionRecord& pred,
                                       const KinematicModel& model) {
  const std::size_t k_joints = model.joints.size();
  std::vector<std::vector<Vec3>> axes(k_joints);
  std::vector<Vec3> pivot_sum(k_joints, Vec3::Zero());

  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred.assoc[i] <= 0) continue;
    const std::size_t k = static_cast<std::size_t>(pred.assoc[i]) - 1;
    if (k >= k_joints) throw CountMismatch("joint label outside model range");
    const JointVote& v = pred.votes[i];
    axes[k].push_back(Vec3(v[0], v[1], v[2]));
    const Vec3 g = pred.g_scale[i] * pred.npcs[i] + pred.g_offset[i];
    pivot_sum[k] += g + v[6] * Vec3(v[3], v[4], v[5]);
  }

  NaocsJointParams out(k_joints);
  for (std::size_t k = 0; k < k_joints; ++k) {
    if (axes[k].size() < 3)
      throw InsufficientVotes("joint " + std::to_string(k) +
                              " has fewer than 3 votes");
    out[k].axis = mean_axis_direction(axes[k]);
    if (model.joints[k].type == JointType::revolute)
      out[k].pivot = pivot_sum[k] / static_cast<double>(axes[k].size());
  }
  return out;
}

}  // namespace articulate
