#include "articulate/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "articulate/errors.hpp"
#include "articulate/geometry.hpp"
#include "articulate/rng.hpp"

namespace articulate {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double axis_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())),
                              0.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double mean_skip_nan(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n == 0 ? kNan : sum / static_cast<double>(n);
}

// NPCS -> camera ground truth recast as NAOCS -> camera for the naocs
// method (same rotation, translation moves to the NAOCS origin's image).
SimilarityTransform gt_pose_for(const SceneEstimate& est, const Scene& scene,
                                std::size_t part) {
  const SimilarityTransform& gt = scene.gt_part_poses[part];
  if (est.method != Method::naocs) return gt;
  const GTransform& g = scene.gt_g[part];
  return gt.compose(SimilarityTransform{1.0 / g.scale, Mat3::Identity(),
                                        -g.offset / g.scale});
}

}  // namespace

Method method_from_string(const std::string& name) {
  if (name == "npcs") return Method::npcs;
  if (name == "naocs") return Method::naocs;
  if (name == "ancsh") return Method::ancsh;
  throw SchemaError("unknown method '" + name + "'");
}

std::string method_to_string(Method m) {
  switch (m) {
    case Method::npcs:
      return "npcs";
    case Method::naocs:
      return "naocs";
    case Method::ancsh:
      return "ancsh";
  }
  throw SchemaError("unknown method value");
}

SceneEstimate fit_scene(Method method, const Scene& scene,
                        const PredictionRecord& pred,
                        const KinematicModel& model, const FitConfig& cfg,
                        std::uint64_t rng_seed) {
  if (pred.size() != scene.points.size())
    throw LengthMismatch("prediction and scene point counts differ");
  if (pred.scene_id != scene.scene_id)
    throw SchemaError("prediction belongs to a different scene");
  const std::size_t m = model.part_count();

  SceneEstimate out;
  out.scene_id = scene.scene_id;
  out.method = method;

  std::vector<GTransform> g;
  if (method == Method::naocs) {
    // fit the per-point NAOCS coordinates directly; the poses then map
    // NAOCS -> camera and the NPCS -> NAOCS step collapses to identity
    PredictionRecord naocs_pred = pred;
    for (std::size_t i = 0; i < pred.size(); ++i)
      naocs_pred.npcs[i] =
          pred.g_scale[i] * pred.npcs[i] + pred.g_offset[i];
    out.pose =
        fit_parts_ransac(naocs_pred, scene.points, m, cfg.ransac, rng_seed);
    g.assign(m, GTransform{});
  } else {
    out.pose = fit_parts_ransac(pred, scene.points, m, cfg.ransac, rng_seed);
    g = aggregate_part_transforms(pred, m);
  }

  if (method == Method::ancsh) {
    const NaocsJointParams params = aggregate_joint_votes(pred, model);
    const std::vector<ConstraintJoint> joints =
        make_constraint_joints(model, params);
    out.pose = refine_constrained(out.pose, pred, scene.points, joints, g,
                                  cfg.weights, cfg.solver);
    out.joints = recover_joints(out.pose.poses, g, model, params);
    out.has_joint_params = true;
  } else {
    // states need no axis: revolute from the relative rotation angle,
    // prismatic from the NAOCS-origin displacement
    out.joints.reserve(model.joint_count());
    for (const Joint& joint : model.joints) {
      const SimilarityTransform& pa = out.pose.poses[joint.parent_part];
      const SimilarityTransform& pb = out.pose.poses[joint.child_part];
      JointEstimate je;
      je.joint_id = joint.id;
      je.axis_camera = Vec3::UnitZ();
      if (joint.type == JointType::revolute)
        je.state = rotation_geodesic_deg(pa.rotation, pb.rotation) *
                   std::numbers::pi / 180.0;
      else
        je.state = prismatic_delta(pa, g[joint.parent_part], pb,
                                   g[joint.child_part])
                       .norm();
      out.joints.push_back(je);
    }
  }

  if (method != Method::naocs) {
    // boxes come from the poses and the category's canonical part clouds;
    // extents taken from the observed points alone under-cover whichever
    // faces the viewpoint hides, so the box would score occlusion rather
    // than pose quality
    const NpcsFrame canonical = build_npcs(build_naocs(model));
    out.has_boxes = true;
    out.boxes.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
      out.boxes.push_back(amodal_box(out.pose.poses[j], canonical[j].points));
  }
  return out;
}

SceneMetrics score_scene(const SceneEstimate& estimate, const Scene& scene,
                         const NpcsFrame& canonical_npcs) {
  const std::size_t m = estimate.pose.poses.size();
  if (scene.gt_part_poses.size() != m || canonical_npcs.size() != m)
    throw CountMismatch("estimate, scene, and model part counts differ");
  const std::size_t k = scene.gt_joint_params_camera.size();
  if (estimate.joints.size() != k || scene.gt_joint_states.size() != k)
    throw CountMismatch("estimate and scene joint counts differ");

  SceneMetrics out;
  out.rotation_error_deg.resize(m);
  out.translation_error.resize(m);
  out.iou_3d.assign(m, kNan);
  out.ad_value.resize(m);
  out.part_diameter.resize(m);
  out.ad_hit.resize(m);
  out.state_error.resize(k);
  out.axis_angle_error_deg.assign(k, kNan);
  out.pivot_line_distance.assign(k, kNan);
  out.occlusion = scene.occlusion;

  for (std::size_t j = 0; j < m; ++j) {
    const SimilarityTransform& est = estimate.pose.poses[j];
    const SimilarityTransform gt = gt_pose_for(estimate, scene, j);
    out.rotation_error_deg[j] =
        rotation_geodesic_deg(est.rotation, gt.rotation);
    out.translation_error[j] = (est.translation - gt.translation).norm();

    if (estimate.has_boxes) {
      const OrientedBox gt_box =
          amodal_box(scene.gt_part_poses[j], canonical_npcs[j].points);
      out.iou_3d[j] = box_iou_3d(estimate.boxes[j], gt_box);
    }

    // mean camera-space distance over the part's full canonical samples
    double sum = 0.0;
    if (estimate.method == Method::naocs) {
      const GTransform& gj = scene.gt_g[j];
      for (const Vec3& c : canonical_npcs[j].points) {
        const Vec3 gx = gj.scale * c + gj.offset;
        sum += (est.apply(gx) - gt.apply(gx)).norm();
      }
    } else {
      for (const Vec3& c : canonical_npcs[j].points)
        sum += (est.apply(c) - gt.apply(c)).norm();
    }
    out.ad_value[j] =
        sum / static_cast<double>(canonical_npcs[j].points.size());
    // NPCS has unit diagonal, so the gt scale is the camera-space diameter
    out.part_diameter[j] = scene.gt_part_poses[j].scale;
    out.ad_hit[j] = out.ad_value[j] < 0.10 * out.part_diameter[j];
  }

  for (std::size_t i = 0; i < k; ++i) {
    const JointEstimate& je = estimate.joints[i];
    const JointParamsCamera& gt = scene.gt_joint_params_camera[i];
    out.state_error[i] = std::abs(je.state - scene.gt_joint_states[i]);
    if (!estimate.has_joint_params) continue;
    out.axis_angle_error_deg[i] = axis_angle_deg(je.axis_camera, gt.axis);
    if (je.pivot_camera && gt.pivot)
      out.pivot_line_distance[i] =
          line_to_line_distance(Line3{*je.pivot_camera, je.axis_camera},
                                Line3{*gt.pivot, gt.axis});
  }
  return out;
}

std::vector<double> ad_accuracy(const std::vector<SceneMetrics>& metrics,
                                double threshold_fraction) {
  if (metrics.empty()) return {};
  const std::size_t m = metrics.front().ad_value.size();
  std::vector<double> out(m, 0.0);
  for (const SceneMetrics& sm : metrics) {
    if (sm.ad_value.size() != m)
      throw CountMismatch("metrics have inconsistent part counts");
    for (std::size_t j = 0; j < m; ++j)
      if (sm.ad_value[j] < threshold_fraction * sm.part_diameter[j])
        out[j] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(metrics.size());
  return out;
}

MethodReport summarize(Method method, std::vector<SceneMetrics> per_scene) {
  MethodReport r;
  r.method = method;
  r.scene_count = per_scene.size();
  r.ad_fraction = ad_accuracy(per_scene, 0.10);
  r.per_scene = std::move(per_scene);
  if (r.per_scene.empty()) return r;

  const std::size_t m = r.per_scene.front().rotation_error_deg.size();
  const std::size_t k = r.per_scene.front().state_error.size();
  const auto column = [&](std::size_t idx, auto field) {
    std::vector<double> vals;
    vals.reserve(r.per_scene.size());
    for (const SceneMetrics& sm : r.per_scene)
      vals.push_back((sm.*field)[idx]);
    return mean_skip_nan(vals);
  };
  for (std::size_t j = 0; j < m; ++j) {
    r.mean_rotation_deg.push_back(column(j, &SceneMetrics::rotation_error_deg));
    r.mean_translation.push_back(column(j, &SceneMetrics::translation_error));
    r.mean_iou.push_back(column(j, &SceneMetrics::iou_3d));
  }
  for (std::size_t i = 0; i < k; ++i) {
    r.mean_state_error.push_back(column(i, &SceneMetrics::state_error));
    r.mean_axis_deg.push_back(column(i, &SceneMetrics::axis_angle_error_deg));
    r.mean_pivot_distance.push_back(
        column(i, &SceneMetrics::pivot_line_distance));
  }
  return r;
}

MethodReport run_baseline(Method method, const std::vector<Scene>& scenes,
                          const KinematicModel& model,
                          const NoiseConfig& noise, const FitConfig& cfg,
                          std::uint64_t master_seed) {
  const NaocsFrame naocs = build_naocs(model);
  const NpcsFrame npcs = build_npcs(naocs);
  std::vector<SceneMetrics> metrics;
  metrics.reserve(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    // prediction seeds depend on the scene index only, so every method
    // fits the identical prediction (paired comparisons)
    const PredictionRecord pred = simulate_prediction(
        scenes[i], model, noise, derive_seed(master_seed, "predict", i),
        cfg.assoc_sigma);
    const SceneEstimate est =
        fit_scene(method, scenes[i], pred, model, cfg,
                  derive_seed(master_seed, "fit", i));
    metrics.push_back(score_scene(est, scenes[i], npcs));
  }
  return summarize(method, std::move(metrics));
}

ComparisonReport compare_methods(const std::vector<Method>& methods,
                                 const std::vector<Scene>& scenes,
                                 const KinematicModel& model,
                                 const NoiseConfig& noise,
                                 const FitConfig& cfg,
                                 std::uint64_t master_seed) {
  ComparisonReport report;
  report.master_seed = master_seed;
  for (Method m : methods)
    report.methods.push_back(
        run_baseline(m, scenes, model, noise, cfg, master_seed));
  return report;
}

std::vector<JointVotingRow> joint_voting_comparison(
    const std::vector<Scene>& scenes, const KinematicModel& model,
    const NoiseConfig& noise, const FitConfig& cfg, std::uint64_t master_seed,
    double direct_dispersion) {
  const std::size_t k_joints = model.joint_count();
  const NaocsFrame naocs = build_naocs(model);
  // camera poses have unit scale, so one NAOCS unit spans the rest-state
  // object diagonal in camera units; distance noise scales with it
  const double naocs_to_camera = 1.0 / naocs.object_scale;
  const double axis_sigma_rad = noise.axis_angle_sigma_deg *
                                std::numbers::pi / 180.0 * direct_dispersion;

  std::vector<JointVotingRow> rows(k_joints);
  std::vector<std::size_t> axis_n(k_joints, 0), pivot_n(k_joints, 0);
  for (std::size_t k = 0; k < k_joints; ++k)
    rows[k].joint_id = model.joints[k].id;

  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const Scene& scene = scenes[s];
    const PredictionRecord pred = simulate_prediction(
        scene, model, noise, derive_seed(master_seed, "predict", s),
        cfg.assoc_sigma);
    const SceneEstimate est =
        fit_scene(Method::ancsh, scene, pred, model, cfg,
                  derive_seed(master_seed, "fit", s));

    // direct pathway: the same votes, but cast in the camera frame
    RngStream rng(derive_seed(master_seed, "direct_vote", s));
    std::vector<std::vector<Vec3>> axes(k_joints);
    std::vector<Vec3> pivot_sum(k_joints, Vec3::Zero());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred.assoc[i] <= 0) continue;
      const std::size_t k = static_cast<std::size_t>(pred.assoc[i]) - 1;
      if (k >= k_joints)
        throw CountMismatch("joint label outside model range");
      const JointParamsCamera& gt = scene.gt_joint_params_camera[k];
      axes[k].push_back(perturb_direction(gt.axis, axis_sigma_rad, rng));
      if (model.joints[k].type != JointType::revolute) continue;
      const Vec3 rel = scene.points[i] - *gt.pivot;
      const Vec3 offset = rel.dot(gt.axis) * gt.axis - rel;
      double dist = offset.norm();
      Vec3 dir = dist > 1e-12 ? Vec3(offset / dist) : Vec3(axes[k].back());
      dist += noise.pivot_sigma * naocs_to_camera * direct_dispersion *
              rng.normal();
      pivot_sum[k] += scene.points[i] + dist * dir;
    }

    for (std::size_t k = 0; k < k_joints; ++k) {
      const JointParamsCamera& gt = scene.gt_joint_params_camera[k];
      const JointEstimate& je = est.joints[k];
      rows[k].canonical_axis_deg += axis_angle_deg(je.axis_camera, gt.axis);
      const Vec3 direct_axis = mean_axis_direction(axes[k]);
      rows[k].direct_axis_deg += axis_angle_deg(direct_axis, gt.axis);
      ++axis_n[k];
      if (!gt.pivot || !je.pivot_camera) continue;
      const Vec3 direct_pivot =
          pivot_sum[k] / static_cast<double>(axes[k].size());
      rows[k].canonical_pivot_distance +=
          line_to_line_distance(Line3{*je.pivot_camera, je.axis_camera},
                                Line3{*gt.pivot, gt.axis});
      rows[k].direct_pivot_distance += line_to_line_distance(
          Line3{direct_pivot, direct_axis}, Line3{*gt.pivot, gt.axis});
      ++pivot_n[k];
    }
  }

  for (std::size_t k = 0; k < k_joints; ++k) {
    if (axis_n[k] > 0) {
      rows[k].canonical_axis_deg /= static_cast<double>(axis_n[k]);
      rows[k].direct_axis_deg /= static_cast<double>(axis_n[k]);
    }
    if (pivot_n[k] > 0) {
      rows[k].canonical_pivot_distance /= static_cast<double>(pivot_n[k]);
      rows[k].direct_pivot_distance /= static_cast<double>(pivot_n[k]);
    } else {
      rows[k].canonical_pivot_distance = kNan;
      rows[k].direct_pivot_distance = kNan;
    }
  }
  return rows;
}

std::vector<OcclusionBin> occlusion_analysis(
    const std::vector<SceneMetrics>& metrics,
    const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2)
    throw DegenerateInput("need at least two occlusion bin edges");
  for (std::size_t b = 1; b < bin_edges.size(); ++b)
    if (!(bin_edges[b] > bin_edges[b - 1]))
      throw DegenerateInput("occlusion bin edges must increase strictly");

  const std::size_t nbins = bin_edges.size() - 1;
  std::vector<OcclusionBin> bins(nbins);
  std::vector<double> rot_sum(nbins, 0.0), trans_sum(nbins, 0.0);
  for (std::size_t b = 0; b < nbins; ++b) {
    bins[b].lo = bin_edges[b];
    bins[b].hi = bin_edges[b + 1];
  }

  for (const SceneMetrics& sm : metrics) {
    for (std::size_t j = 0; j < sm.occlusion.size(); ++j) {
      const double occ = sm.occlusion[j];
      if (occ < bin_edges.front() || occ > bin_edges.back()) continue;
      std::size_t b = nbins - 1;  // top edge closes the last bin
      for (std::size_t c = 0; c + 1 < nbins; ++c)
        if (occ < bin_edges[c + 1]) {
          b = c;
          break;
        }
      ++bins[b].count;
      rot_sum[b] += sm.rotation_error_deg[j];
      trans_sum[b] += sm.translation_error[j];
    }
  }

  for (std::size_t b = 0; b < nbins; ++b) {
    if (bins[b].count == 0) {
      bins[b].mean_rotation_deg = kNan;
      bins[b].mean_translation = kNan;
    } else {
      bins[b].mean_rotation_deg =
          rot_sum[b] / static_cast<double>(bins[b].count);
      bins[b].mean_translation =
          trans_sum[b] / static_cast<double>(bins[b].count);
    }
  }
  return bins;
}

namespace {

// average ranks, ties get the mean of their positions (1-based)
std::vector<double> fractional_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size())
    throw CountMismatch("spearman inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateInput("spearman needs at least two pairs");
  const std::vector<double> rx = fractional_ranks(x);
  const std::vector<double> ry = fractional_ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw DegenerateInput("spearman input has no rank variance");
  return sxy / std::sqrt(sxx * syy);
}

double sign_test_p_value(std::size_t wins, std::size_t trials) {
  if (wins > trials)
    throw DegenerateInput("sign test wins exceed trials");
  if (trials == 0) return 1.0;
  const double n = static_cast<double>(trials);
  double p = 0.0;
  for (std::size_t j = wins; j <= trials; ++j) {
    const double k = static_cast<double>(j);
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0) - n * std::numbers::ln2);
  }
  return std::min(p, 1.0);
}

}  // namespace articulate
