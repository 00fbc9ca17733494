#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/errors.hpp"
#include "articulate/evaluate.hpp"
#include "articulate/geometry.hpp"
#include "articulate/kinematics.hpp"
#include "articulate/observe.hpp"
#include "articulate/predict.hpp"
#include "articulate/recover.hpp"
#include "articulate/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace articulate;
namespace th = testing_helpers;
namespace to = testing_oracles;

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

std::vector<Scene> make_scenes(const KinematicModel& model, std::size_t count,
                               std::uint64_t base_seed, int samples = 256) {
  CameraConfig cc;
  cc.sample_count = samples;
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    scenes.push_back(sample_scene(model, cc, base_seed + i));
  return scenes;
}

SceneEstimate gt_estimate(const Scene& scene, const KinematicModel& model,
                          const NpcsFrame& canonical) {
  SceneEstimate est;
  est.scene_id = scene.scene_id;
  est.method = Method::ancsh;
  est.pose.poses = scene.gt_part_poses;
  est.pose.inliers.assign(scene.points.size(), true);
  est.joints = recover_joints(scene.gt_part_poses, scene.gt_g, model,
                              scene.gt_joint_params_naocs);
  est.has_joint_params = true;
  est.has_boxes = true;
  for (std::size_t j = 0; j < model.parts.size(); ++j)
    est.boxes.push_back(
        amodal_box(scene.gt_part_poses[j], canonical[j].points));
  return est;
}

double geodesic_oracle_deg(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0,
                              -1.0, 1.0);
  return std::acos(c) * kDegPerRad;
}

}  // namespace

TEST_CASE("ground truth scores as the zero-error element") {
  const KinematicModel model =
      make_procedural_model(Category::eyeglasses_like, 21);
  const NpcsFrame canonical = build_npcs(build_naocs(model));
  const Scene scene = make_scenes(model, 1, 201)[0];
  const SceneEstimate est = gt_estimate(scene, model, canonical);

  const SceneMetrics sm = score_scene(est, scene, canonical);
  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    CHECK(sm.rotation_error_deg[j] < 1e-9);
    CHECK(sm.translation_error[j] < 1e-12);
    CHECK(sm.iou_3d[j] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sm.ad_value[j] < 1e-12);
    CHECK(sm.ad_hit[j]);
    CHECK(sm.part_diameter[j] == scene.gt_part_poses[j].scale);
    CHECK(sm.occlusion[j] == scene.occlusion[j]);
  }
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    CHECK(sm.state_error[k] < 1e-9);
    CHECK(sm.axis_angle_error_deg[k] < 1e-5);
    CHECK(sm.pivot_line_distance[k] < 1e-9);
  }
}

TEST_CASE("a pure rotation offset scores as exactly that rotation") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 23);
  const NpcsFrame canonical = build_npcs(build_naocs(model));
  const Scene scene = make_scenes(model, 1, 203)[0];

  SceneEstimate est = gt_estimate(scene, model, canonical);
  est.has_boxes = false;
  est.boxes.clear();
  est.has_joint_params = false;
  const Mat3 rz5 =
      rotation_about_axis(Vec3::UnitZ(), 5.0 / kDegPerRad);
  for (auto& pose : est.pose.poses) pose.rotation = rz5 * pose.rotation;

  const SceneMetrics sm = score_scene(est, scene, canonical);
  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    CHECK(sm.rotation_error_deg[j] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(sm.translation_error[j] == 0.0);
    CHECK(std::isnan(sm.iou_3d[j]));
  }
  for (std::size_t k = 0; k < model.joints.size(); ++k)
    CHECK(std::isnan(sm.axis_angle_error_deg[k]));
}

TEST_CASE("scene scores agree with a direct recomputation") {
  const KinematicModel model = make_procedural_model(Category::drawer_like, 25);
  const NpcsFrame canonical = build_npcs(build_naocs(model));
  const Scene scene = make_scenes(model, 1, 205)[0];

  RngStream rng(801);
  SceneEstimate est = gt_estimate(scene, model, canonical);
  for (auto& pose : est.pose.poses) {
    pose.rotation =
        rotation_about_axis(rng.unit_vector(), rng.uniform(0.0, 0.05)) *
        pose.rotation;
    pose.translation +=
        0.02 * Vec3(rng.normal(), rng.normal(), rng.normal());
  }
  est.joints = recover_joints(est.pose.poses, scene.gt_g, model,
                              scene.gt_joint_params_naocs);
  est.boxes.clear();
  for (std::size_t j = 0; j < model.parts.size(); ++j)
    est.boxes.push_back(amodal_box(est.pose.poses[j], canonical[j].points));

  const SceneMetrics sm = score_scene(est, scene, canonical);
  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    const SimilarityTransform& ep = est.pose.poses[j];
    const SimilarityTransform& gp = scene.gt_part_poses[j];
    CHECK(sm.rotation_error_deg[j] ==
          doctest::Approx(geodesic_oracle_deg(ep.rotation, gp.rotation))
              .epsilon(1e-9));
    CHECK(sm.translation_error[j] ==
          doctest::Approx((ep.translation - gp.translation).norm())
              .epsilon(1e-12));

    const OrientedBox gt_box = amodal_box(gp, canonical[j].points);
    CHECK(std::abs(sm.iou_3d[j] -
                   to::voxel_box_iou(est.boxes[j], gt_box)) < 0.01);

    double ad = 0.0;
    for (const Vec3& c : canonical[j].points)
      ad += (ep.apply(c) - gp.apply(c)).norm();
    ad /= static_cast<double>(canonical[j].points.size());
    CHECK(sm.ad_value[j] == doctest::Approx(ad).epsilon(1e-12));
    CHECK(sm.ad_hit[j] == (ad < 0.10 * gp.scale));
  }
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    CHECK(sm.state_error[k] ==
          doctest::Approx(
              std::abs(est.joints[k].state - scene.gt_joint_states[k]))
              .epsilon(1e-12));
    const Vec3& gt_axis = scene.gt_joint_params_camera[k].axis;
    const double dot = std::clamp(
        std::abs(est.joints[k].axis_camera.normalized().dot(
            gt_axis.normalized())),
        0.0, 1.0);
    CHECK(sm.axis_angle_error_deg[k] ==
          doctest::Approx(std::acos(dot) * kDegPerRad).epsilon(1e-9));
    // prismatic joints carry no pivot
    CHECK(std::isnan(sm.pivot_line_distance[k]));
  }
}

TEST_CASE("score_scene rejects mismatched counts") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 27);
  const NpcsFrame canonical = build_npcs(build_naocs(model));
  const Scene scene = make_scenes(model, 1, 207)[0];
  SceneEstimate est = gt_estimate(scene, model, canonical);
  est.pose.poses.pop_back();
  CHECK_THROWS_AS(score_scene(est, scene, canonical), CountMismatch);
}

TEST_CASE("ad accuracy counts threshold hits") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 29);
  const NpcsFrame canonical = build_npcs(build_naocs(model));
  const Scene scene = make_scenes(model, 1, 209)[0];
  const SceneEstimate exact = gt_estimate(scene, model, canonical);

  SUBCASE("exact estimates hit everywhere") {
    std::vector<SceneMetrics> ms(5, score_scene(exact, scene, canonical));
    for (const double f : ad_accuracy(ms)) CHECK(f == 1.0);
  }
  SUBCASE("a uniform offset of a fifth of the diameter misses everywhere") {
    std::vector<SceneMetrics> ms;
    for (int r = 0; r < 5; ++r) {
      SceneEstimate est = exact;
      for (std::size_t j = 0; j < est.pose.poses.size(); ++j)
        est.pose.poses[j].translation +=
            0.2 * scene.gt_part_poses[j].scale * Vec3::UnitX();
      ms.push_back(score_scene(est, scene, canonical));
    }
    for (const double f : ad_accuracy(ms)) CHECK(f == 0.0);
  }
  SUBCASE("a constructed half split scores one half") {
    std::vector<SceneMetrics> ms;
    for (int r = 0; r < 10; ++r) {
      SceneEstimate est = exact;
      if (r % 2 == 1) {
        const Mat3 off = rotation_about_axis(Vec3::UnitY(), 0.5 * std::numbers::pi);
        for (auto& pose : est.pose.poses) pose.rotation = off * pose.rotation;
      }
      ms.push_back(score_scene(est, scene, canonical));
    }
    for (const double f : ad_accuracy(ms)) CHECK(f == 0.5);
  }
}

TEST_CASE("summary means match an independent recomputation") {
  const KinematicModel model = make_procedural_model(Category::drawer_like, 31);
  NoiseConfig noise;
  noise.npcs_sigma = 0.01;
  noise.g_offset_sigma = 0.005;
  const std::vector<Scene> scenes = make_scenes(model, 5, 211);
  const MethodReport report =
      run_baseline(Method::ancsh, scenes, model, noise, FitConfig{}, 77);

  REQUIRE(report.scene_count == scenes.size());
  REQUIRE(report.per_scene.size() == scenes.size());

  const auto mean_skip_reverse = [](std::vector<double> vals) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto it = vals.rbegin(); it != vals.rend(); ++it) {
      if (std::isnan(*it)) continue;
      sum += *it;
      ++n;
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : sum / static_cast<double>(n);
  };
  const auto check_column = [&](double reported, auto field, std::size_t idx) {
    std::vector<double> vals;
    for (const SceneMetrics& sm : report.per_scene)
      vals.push_back((sm.*field)[idx]);
    const double expect = mean_skip_reverse(vals);
    if (std::isnan(expect))
      CHECK(std::isnan(reported));
    else
      CHECK(reported == doctest::Approx(expect).epsilon(1e-12));
  };

  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    check_column(report.mean_rotation_deg[j],
                 &SceneMetrics::rotation_error_deg, j);
    check_column(report.mean_translation[j],
                 &SceneMetrics::translation_error, j);
    check_column(report.mean_iou[j], &SceneMetrics::iou_3d, j);
  }
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    check_column(report.mean_state_error[k], &SceneMetrics::state_error, k);
    check_column(report.mean_axis_deg[k],
                 &SceneMetrics::axis_angle_error_deg, k);
    // prismatic pivots are undefined, so the column must stay NaN
    CHECK(std::isnan(report.mean_pivot_distance[k]));
  }
  const std::vector<double> ad = ad_accuracy(report.per_scene);
  for (std::size_t j = 0; j < ad.size(); ++j)
    CHECK(report.ad_fraction[j] == ad[j]);
}

TEST_CASE("noise-free baselines land on the ground truth") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 33);
  const std::vector<Scene> scenes = make_scenes(model, 6, 213);

  SUBCASE("full pipeline") {
    const MethodReport r = run_baseline(Method::ancsh, scenes, model,
                                        NoiseConfig{}, FitConfig{}, 11);
    for (std::size_t j = 0; j < model.parts.size(); ++j) {
      CHECK(r.mean_rotation_deg[j] < 1e-3);
      CHECK(r.mean_translation[j] < 1e-6);
      CHECK(r.mean_iou[j] > 0.999);
      CHECK(r.ad_fraction[j] == 1.0);
    }
    CHECK(r.mean_state_error[0] < 1e-3 / kDegPerRad);
    CHECK(r.mean_axis_deg[0] < 1e-3);
    CHECK(r.mean_pivot_distance[0] < 1e-6);
  }
  SUBCASE("coordinate fit without constraints") {
    const MethodReport r = run_baseline(Method::npcs, scenes, model,
                                        NoiseConfig{}, FitConfig{}, 11);
    for (std::size_t j = 0; j < model.parts.size(); ++j) {
      CHECK(r.mean_rotation_deg[j] < 1e-3);
      CHECK(r.mean_iou[j] > 0.999);
    }
    CHECK(std::isnan(r.mean_axis_deg[0]));
  }
  SUBCASE("object-level coordinate fit has no boxes") {
    const MethodReport r = run_baseline(Method::naocs, scenes, model,
                                        NoiseConfig{}, FitConfig{}, 11);
    for (std::size_t j = 0; j < model.parts.size(); ++j) {
      CHECK(r.mean_rotation_deg[j] < 1e-3);
      CHECK(r.mean_translation[j] < 1e-6);
      CHECK(std::isnan(r.mean_iou[j]));
    }
  }
}

TEST_CASE("transform noise hurts the object-level fit most") {
  const KinematicModel model =
      make_procedural_model(Category::eyeglasses_like, 35);
  const std::vector<Scene> scenes = make_scenes(model, 20, 215);
  NoiseConfig noise;
  noise.g_offset_sigma = 0.02;
  noise.g_scale_rel_sigma = 0.02;

  const ComparisonReport report = compare_methods(
      {Method::npcs, Method::naocs}, scenes, model, noise, FitConfig{}, 13);
  REQUIRE(report.methods.size() == 2);
  const MethodReport& npcs = report.methods[0];
  const MethodReport& naocs = report.methods[1];
  CHECK(naocs.mean_translation[0] > npcs.mean_translation[0]);
}

TEST_CASE("method comparisons are deterministic") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 37);
  const std::vector<Scene> scenes = make_scenes(model, 4, 217);
  NoiseConfig noise;
  noise.npcs_sigma = 0.01;
  noise.seg_flip_prob = 0.02;

  const ComparisonReport a = compare_methods(
      {Method::npcs, Method::ancsh}, scenes, model, noise, FitConfig{}, 99);
  const ComparisonReport b = compare_methods(
      {Method::npcs, Method::ancsh}, scenes, model, noise, FitConfig{}, 99);

  REQUIRE(a.methods.size() == 2);
  CHECK(a.master_seed == 99);
  CHECK(a.methods[0].method == Method::npcs);
  CHECK(a.methods[1].method == Method::ancsh);
  for (std::size_t m = 0; m < a.methods.size(); ++m) {
    for (std::size_t j = 0; j < a.methods[m].mean_rotation_deg.size(); ++j) {
      CHECK(a.methods[m].mean_rotation_deg[j] ==
            b.methods[m].mean_rotation_deg[j]);
      CHECK(a.methods[m].mean_translation[j] ==
            b.methods[m].mean_translation[j]);
    }
    for (std::size_t s = 0; s < a.methods[m].per_scene.size(); ++s)
      for (std::size_t j = 0;
           j < a.methods[m].per_scene[s].rotation_error_deg.size(); ++j)
        CHECK(a.methods[m].per_scene[s].rotation_error_deg[j] ==
              b.methods[m].per_scene[s].rotation_error_deg[j]);
  }
}

TEST_CASE("joint voting table is exact without noise") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 39);
  const std::vector<Scene> scenes = make_scenes(model, 6, 219);
  const std::vector<JointVotingRow> rows = joint_voting_comparison(
      scenes, model, NoiseConfig{}, FitConfig{}, 15);

  REQUIRE(rows.size() == model.joints.size());
  for (const JointVotingRow& row : rows) {
    CHECK(row.canonical_axis_deg < 1e-3);
    CHECK(row.direct_axis_deg < 1e-3);
    CHECK(row.canonical_pivot_distance < 1e-6);
    CHECK(row.direct_pivot_distance < 1e-6);
  }

  // prismatic joints report axis errors but no pivots
  const KinematicModel drawers =
      make_procedural_model(Category::drawer_like, 39);
  const std::vector<Scene> dscenes = make_scenes(drawers, 3, 221);
  const std::vector<JointVotingRow> drows = joint_voting_comparison(
      dscenes, drawers, NoiseConfig{}, FitConfig{}, 15);
  for (const JointVotingRow& row : drows) {
    CHECK(row.canonical_axis_deg < 1e-3);
    CHECK(row.direct_axis_deg < 1e-3);
    CHECK(std::isnan(row.canonical_pivot_distance));
    CHECK(std::isnan(row.direct_pivot_distance));
  }
}

TEST_CASE("canonical voting beats direct voting under matched noise") {
  const KinematicModel model =
      make_procedural_model(Category::two_part_revolute, 41);
  NoiseConfig noise;
  noise.axis_angle_sigma_deg = 5.0;

  double canonical = 0.0, direct = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<Scene> scenes =
        make_scenes(model, 20, 4000 + 100 * seed);
    const std::vector<JointVotingRow> rows = joint_voting_comparison(
        scenes, model, noise, FitConfig{}, 60 + seed);
    canonical += rows[0].canonical_axis_deg;
    direct += rows[0].direct_axis_deg;
  }
  CHECK(canonical < direct);
}

TEST_CASE("occlusion bins partition the metric rows") {
  const auto make_metric = [](double occ, double rot) {
    SceneMetrics sm;
    sm.occlusion = {occ};
    sm.rotation_error_deg = {rot};
    sm.translation_error = {rot / 10.0};
    return sm;
  };

  SUBCASE("fully visible parts land in the top bin") {
    std::vector<SceneMetrics> ms;
    for (int i = 0; i < 4; ++i) ms.push_back(make_metric(1.0, 2.0 + i));
    const auto bins = occlusion_analysis(ms, {0.0, 0.5, 1.0});
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].count == 0);
    CHECK(std::isnan(bins[0].mean_rotation_deg));
    CHECK(bins[1].count == 4);
    CHECK(bins[1].mean_rotation_deg == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(bins[1].lo == 0.5);
    CHECK(bins[1].hi == 1.0);
  }
  SUBCASE("a two-level set fills exactly two bins") {
    std::vector<SceneMetrics> ms;
    for (int i = 0; i < 3; ++i) ms.push_back(make_metric(0.1, 0.9));
    for (int i = 0; i < 5; ++i) ms.push_back(make_metric(0.9, 0.1));
    const auto bins = occlusion_analysis(ms, {0.0, 0.5, 1.0});
    CHECK(bins[0].count == 3);
    CHECK(bins[0].mean_rotation_deg == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(bins[0].mean_translation == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(bins[1].count == 5);
    CHECK(bins[1].mean_rotation_deg == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("values outside the edges are ignored") {
    std::vector<SceneMetrics> ms{make_metric(0.1, 1.0),
                                 make_metric(0.8, 2.0)};
    const auto bins = occlusion_analysis(ms, {0.5, 1.0});
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].count == 1);
    CHECK(bins[0].mean_rotation_deg == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("edges must increase strictly") {
    const std::vector<SceneMetrics> ms{make_metric(0.5, 1.0)};
    CHECK_THROWS_AS(occlusion_analysis(ms, {0.5, 0.5}), DegenerateInput);
    CHECK_THROWS_AS(occlusion_analysis(ms, {0.5}), DegenerateInput);
    CHECK_THROWS_AS(occlusion_analysis(ms, {0.8, 0.2}), DegenerateInput);
  }
}

TEST_CASE("spearman correlation handles monotone data and ties") {
  CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spearman_rho({1, 2, 3, 4}, {5, 4, 3, 2}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  // x has a tie at rank 2.5; Pearson on fractional ranks gives sqrt(0.9)
  CHECK(spearman_rho({1, 2, 2, 3}, {1, 2, 3, 4}) ==
        doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
  CHECK_THROWS_AS(spearman_rho({1, 2}, {1, 2, 3}), CountMismatch);
  CHECK_THROWS_AS(spearman_rho({1}, {1}), DegenerateInput);
}

TEST_CASE("sign test p-values are exact binomial tails") {
  CHECK(sign_test_p_value(10, 10) ==
        doctest::Approx(1.0 / 1024.0).epsilon(1e-12));
  CHECK(sign_test_p_value(5, 10) ==
        doctest::Approx(638.0 / 1024.0).epsilon(1e-12));
  CHECK(sign_test_p_value(0, 10) == doctest::Approx(1.0).epsilon(1e-12));
}
