#include "articulate/observe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "articulate/errors.hpp"
#include "articulate/rng.hpp"

namespace articulate {

namespace {

// World -> camera rigid transform with +z forward, +x right, +y down.
SimilarityTransform look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up_hint = Vec3::UnitZ();
  if (std::abs(forward.dot(up_hint)) > 0.99) up_hint = Vec3::UnitX();
  const Vec3 right = forward.cross(up_hint).normalized();
  const Vec3 down = forward.cross(right);

  SimilarityTransform cam;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -(cam.rotation * eye);
  return cam;
}

void validate_camera_config(const CameraConfig& c) {
  if (!(c.distance_min > 0.0) || c.distance_max < c.distance_min)
    throw DegenerateInput("camera distance range invalid");
  if (c.image_width < 32 || c.image_height < 32)
    throw DegenerateInput("visibility buffer must be at least 32x32");
  if (c.sample_count < 64)
    throw DegenerateInput("sample count must be at least 64");
  if (!(c.focal > 0.0)) throw DegenerateInput("focal length must be positive");
}

}  // namespace

VisibilityResult compute_visibility(const KinematicModel& model,
                                    const JointStateVector& states,
                                    const SimilarityTransform& camera,
                                    const CameraConfig& config) {
  const std::vector<SimilarityTransform> to_camera =
      pose_in_camera(model, states, camera);

  const int w = config.image_width, h = config.image_height;
  std::vector<double> depth(static_cast<std::size_t>(w) * h,
                            std::numeric_limits<double>::infinity());
  std::vector<std::pair<int, int>> winner(static_cast<std::size_t>(w) * h,
                                          {-1, -1});

  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    const PointCloud& pts = model.parts[j].canonical_points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec3 p = to_camera[j].apply(pts[i]);
      if (p.z() <= 0.0) continue;
      const int u = static_cast<int>(
          std::floor(config.focal * p.x() / p.z() + w / 2.0));
      const int v = static_cast<int>(
          std::floor(config.focal * p.y() / p.z() + h / 2.0));
      if (u < 0 || u >= w || v < 0 || v >= h) continue;
      const std::size_t pix = static_cast<std::size_t>(v) * w + u;
      if (p.z() < depth[pix]) {
        depth[pix] = p.z();
        winner[pix] = {static_cast<int>(j), static_cast<int>(i)};
      }
    }
  }

  VisibilityResult out;
  out.visible.resize(model.parts.size());
  for (std::size_t j = 0; j < model.parts.size(); ++j)
    out.visible[j].assign(model.parts[j].canonical_points.size(), false);
  for (const auto& [part, idx] : winner)
    if (part >= 0) out.visible[part][idx] = true;

  out.occlusion.assign(model.parts.size(), 0.0);
  for (std::size_t j = 0; j < model.parts.size(); ++j)
    for (std::size_t i = 0; i < out.visible[j].size(); ++i)
      if (out.visible[j][i])
        out.occlusion[j] += model.parts[j].canonical_area_weights[i];
  return out;
}

Scene sample_scene(const KinematicModel& model, const CameraConfig& config,
                   std::uint64_t rng_seed) {
  validate_camera_config(config);
  RngStream rng(rng_seed);

  Scene scene;
  scene.joint_states.resize(model.joints.size());
  for (std::size_t k = 0; k < model.joints.size(); ++k)
    scene.joint_states[k] =
        rng.uniform(model.joints[k].state_min, model.joints[k].state_max);

  const NaocsFrame naocs = build_naocs(model);
  const NpcsFrame npcs = build_npcs(naocs);
  const std::vector<SimilarityTransform> fk =
      forward_kinematics(model, scene.joint_states);

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t j = 0; j < model.parts.size(); ++j)
    for (const Vec3& p : model.parts[j].canonical_points) {
      const Vec3 q = fk[j].apply(p);
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  const Vec3 center = 0.5 * (lo + hi);
  const double diagonal = (hi - lo).norm();

  VisibilityResult vis;
  std::vector<std::pair<int, int>> chosen;
  const std::size_t n = static_cast<std::size_t>(config.sample_count);
  bool found = false;
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    const double dist =
        rng.uniform(config.distance_min, config.distance_max) * diagonal;
    const double elev = rng.uniform(config.elevation_min, config.elevation_max);
    const double azim = rng.uniform(config.azimuth_min, config.azimuth_max);
    const Vec3 dir(std::cos(elev) * std::cos(azim),
                   std::cos(elev) * std::sin(azim), std::sin(elev));
    scene.camera = look_at(center + dist * dir, center);
    vis = compute_visibility(model, scene.joint_states, scene.camera, config);
    if (std::any_of(vis.visible.begin(), vis.visible.end(),
                    [](const std::vector<bool>& v) {
                      return std::find(v.begin(), v.end(), true) == v.end();
                    }))
      continue;

    // deterministic flat list of visible samples, then uniform subsampling
    std::vector<std::pair<int, int>> pool;
    for (std::size_t j = 0; j < vis.visible.size(); ++j)
      for (std::size_t i = 0; i < vis.visible[j].size(); ++i)
        if (vis.visible[j][i])
          pool.push_back({static_cast<int>(j), static_cast<int>(i)});

    chosen.clear();
    chosen.reserve(n);
    bool with_replacement = false;
    if (pool.size() >= n) {
      for (std::size_t i = 0; i < n; ++i) {
        std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
        chosen.push_back(pool[i]);
      }
    } else {
      with_replacement = true;
      for (std::size_t i = 0; i < n; ++i)
        chosen.push_back(pool[rng.index(pool.size())]);
    }

    // the subsample is the observation that actually ships; a part missing
    // from it is completely occluded for every consumer, so the visibility
    // requirement applies here too
    std::vector<bool> hit(model.parts.size(), false);
    for (const auto& [j, i] : chosen) hit[static_cast<std::size_t>(j)] = true;
    if (std::find(hit.begin(), hit.end(), false) != hit.end()) continue;
    scene.sampled_with_replacement = with_replacement;
    found = true;
  }
  if (!found)
    throw ResampleLimitExceeded(
        "no viewpoint with all parts visible after 100 attempts");
  scene.occlusion = vis.occlusion;

  scene.gt_g.resize(npcs.size());
  scene.gt_part_poses.resize(npcs.size());
  std::vector<SimilarityTransform> rest_to_camera(model.parts.size());
  for (std::size_t j = 0; j < npcs.size(); ++j) {
    scene.gt_g[j] = {npcs[j].g_scale, npcs[j].g_offset};
    rest_to_camera[j] = scene.camera.compose(fk[j]);
    scene.gt_part_poses[j] =
        rest_to_camera[j].compose(npcs_to_object(naocs, npcs[j]));
  }

  scene.gt_joint_params_naocs = naocs_joint_params(model, naocs);
  scene.gt_joint_params_camera.resize(model.joints.size());
  scene.gt_joint_states.resize(model.joints.size());
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    const Joint& joint = model.joints[k];
    const SimilarityTransform& parent = rest_to_camera[joint.parent_part];
    scene.gt_joint_params_camera[k].axis =
        parent.rotation * joint.axis_direction;
    if (joint.pivot)
      scene.gt_joint_params_camera[k].pivot = parent.apply(*joint.pivot);
    scene.gt_joint_states[k] =
        std::abs(scene.joint_states[k] - joint.rest_state);
  }

  scene.points.reserve(n);
  scene.gt_npcs.reserve(n);
  scene.gt_part_labels.reserve(n);
  for (const auto& [j, i] : chosen) {
    scene.points.push_back(
        rest_to_camera[j].apply(model.parts[j].canonical_points[i]));
    scene.gt_npcs.push_back(npcs[j].points[i]);
    scene.gt_part_labels.push_back(j);
  }
  return scene;
}

double occlusion_level(const Scene& scene, int part) {
  return scene.occlusion.at(static_cast<std::size_t>(part));
}

}  // namespace articulate
