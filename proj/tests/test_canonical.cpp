#include <algorithm>
#include <cmath>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/errors.hpp"
#include "articulate/kinematics.hpp"
#include "articulate/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace articulate;
namespace th = testing_helpers;

namespace {

// model with a frozen prismatic joint, so the rest shape is the whole story
KinematicModel static_two_part_model(PointCloud part0, PointCloud part1) {
  KinematicModel model;
  model.category_name = "hand_static";
  model.root_part = 0;
  model.parts.push_back(th::make_part(0, std::move(part0)));
  model.parts.push_back(th::make_part(1, std::move(part1)));
  Joint j;
  j.id = 0;
  j.type = JointType::prismatic;
  j.parent_part = 0;
  j.child_part = 1;
  j.axis_direction = Vec3::UnitX();
  j.state_min = 0.0;
  j.state_max = 0.0;
  j.rest_state = 0.0;
  model.joints.push_back(j);
  return model;
}

struct Extent {
  Vec3 lo, hi;
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return (hi - lo).norm(); }
};

Extent tight_box(const std::vector<PointCloud>& clouds) {
  Extent e{clouds.front().front(), clouds.front().front()};
  for (const PointCloud& cloud : clouds)
    for (const Vec3& p : cloud) {
      e.lo = e.lo.cwiseMin(p);
      e.hi = e.hi.cwiseMax(p);
    }
  return e;
}

}  // namespace

TEST_CASE("naocs scales a 3-4-12 box by its diagonal 13") {
  PointCloud part0 = th::box_cloud(Vec3(1.0, 2.0, 3.0), Vec3(0.9, 1.8, 2.9),
                                   60, 31);
  part0.emplace_back(0, 0, 0);
  part0.emplace_back(3, 4, 12);  // exact extreme corners
  PointCloud part1 = th::box_cloud(Vec3(2.0, 2.0, 9.0), Vec3(0.8, 1.5, 2.5),
                                   60, 32);
  const KinematicModel model =
      static_two_part_model(std::move(part0), std::move(part1));

  const NaocsFrame naocs = build_naocs(model);
  CHECK(naocs.object_scale == doctest::Approx(1.0 / 13.0).epsilon(1e-12));

  const Extent box = tight_box(naocs.per_point_naocs);
  CHECK(box.diagonal() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(box.center().norm() < 1e-9);
}

TEST_CASE("naocs is invariant under translating the model") {
  KinematicModel model = static_two_part_model(
      th::box_cloud(Vec3(0, 0, 0), Vec3(0.5, 0.4, 0.3), 70, 33),
      th::box_cloud(Vec3(1, 0, 0), Vec3(0.3, 0.4, 0.5), 70, 34));
  const NaocsFrame before = build_naocs(model);

  for (PartGeometry& part : model.parts)
    for (Vec3& p : part.canonical_points) p += Vec3(5, 5, 5);
  const NaocsFrame after = build_naocs(model);

  for (std::size_t j = 0; j < before.per_point_naocs.size(); ++j)
    for (std::size_t i = 0; i < before.per_point_naocs[j].size(); ++i)
      CHECK((before.per_point_naocs[j][i] - after.per_point_naocs[j][i])
                .norm() < 1e-12);
}

TEST_CASE("generated models satisfy the naocs and npcs invariants") {
  for (const Category c : {Category::two_part_revolute,
                           Category::eyeglasses_like, Category::drawer_like}) {
    const KinematicModel model = make_procedural_model(c, 17);
    const NaocsFrame naocs = build_naocs(model);

    const Extent box = tight_box(naocs.per_point_naocs);
    CHECK(box.diagonal() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(box.center().norm() < 1e-9);

    const NpcsFrame npcs = build_npcs(naocs);
    REQUIRE(npcs.size() == model.parts.size());
    for (std::size_t j = 0; j < npcs.size(); ++j) {
      const Extent part_box = tight_box({npcs[j].points});
      CHECK(part_box.diagonal() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(part_box.center().norm() < 1e-9);
      // reconstruction identity g = G_s c + G_t
      for (std::size_t i = 0; i < npcs[j].points.size(); ++i) {
        const Vec3 g = npcs[j].g_scale * npcs[j].points[i] + npcs[j].g_offset;
        CHECK((g - naocs.per_point_naocs[j][i]).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("npcs of a part that spans the whole object is the identity") {
  PointCloud cloud = th::box_cloud(Vec3::Zero(), Vec3(0.4, 0.3, 0.2), 60, 35);
  const Extent box = tight_box({cloud});
  const double diag = box.diagonal();
  const Vec3 center = box.center();
  for (Vec3& p : cloud) p = (p - center) / diag;

  NaocsFrame naocs;
  naocs.per_point_naocs = {cloud};
  const NpcsFrame npcs = build_npcs(naocs);
  CHECK(npcs[0].g_scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(npcs[0].g_offset.norm() < 1e-12);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK((npcs[0].points[i] - cloud[i]).norm() < 1e-12);
}

TEST_CASE("npcs keeps the naocs orientation") {
  const KinematicModel model =
      make_procedural_model(Category::eyeglasses_like, 23);
  const NaocsFrame naocs = build_naocs(model);
  const NpcsFrame npcs = build_npcs(naocs);
  RngStream rng(504);
  for (std::size_t j = 0; j < npcs.size(); ++j) {
    CHECK(npcs[j].g_scale > 0.0);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t a = rng.index(npcs[j].points.size());
      const std::size_t b = rng.index(npcs[j].points.size());
      const Vec3 dc = npcs[j].points[a] - npcs[j].points[b];
      const Vec3 dg =
          naocs.per_point_naocs[j][a] - naocs.per_point_naocs[j][b];
      CHECK((dg - npcs[j].g_scale * dc).norm() < 1e-12);
    }
  }
}

TEST_CASE("npcs rejects parts with no extent") {
  NaocsFrame naocs;
  naocs.per_point_naocs = {PointCloud(5, Vec3(0.1, 0.2, 0.3))};
  CHECK_THROWS_AS(build_npcs(naocs), DegeneratePart);
}

TEST_CASE("joint parameters carry into naocs") {
  const KinematicModel model = th::two_part_hinge_model();
  const NaocsFrame naocs = build_naocs(model);
  const NaocsJointParams params = naocs_joint_params(model, naocs);
  REQUIRE(params.size() == 1);
  CHECK(params[0].axis.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((params[0].axis - model.joints[0].axis_direction).norm() < 1e-12);
  REQUIRE(params[0].pivot.has_value());

  // points on the object-frame axis stay on the naocs axis line
  for (int s = -10; s < 10; ++s) {
    const Vec3 p =
        *model.joints[0].pivot + 0.2 * static_cast<double>(s) *
                                     model.joints[0].axis_direction;
    const Vec3 mapped = naocs.map(p);
    const Vec3 rel = mapped - *params[0].pivot;
    const Vec3 off = rel - rel.dot(params[0].axis) * params[0].axis;
    CHECK(off.norm() < 1e-12);
  }
}

TEST_CASE("a pivot at the rest-shape center maps to the naocs origin") {
  PointCloud part0 = th::box_cloud(Vec3(-0.5, 0, 0), Vec3(0.3, 0.3, 0.2),
                                   60, 36);
  PointCloud part1;
  for (const Vec3& p : part0) part1.push_back(-p);  // exact mirror

  KinematicModel model;
  model.category_name = "hand_mirror";
  model.root_part = 0;
  model.parts.push_back(th::make_part(0, std::move(part0)));
  model.parts.push_back(th::make_part(1, std::move(part1)));
  Joint j;
  j.id = 0;
  j.type = JointType::revolute;
  j.parent_part = 0;
  j.child_part = 1;
  j.axis_direction = Vec3::UnitZ();
  j.pivot = Vec3::Zero();
  j.state_min = -1.0;
  j.state_max = 1.0;
  j.rest_state = 0.0;
  model.joints.push_back(j);

  const NaocsFrame naocs = build_naocs(model);
  const NaocsJointParams params = naocs_joint_params(model, naocs);
  CHECK(params[0].pivot->norm() < 1e-12);
}

TEST_CASE("association labels revolute points by axis distance") {
  const KinematicModel model = th::two_part_hinge_model();
  const NaocsFrame naocs = build_naocs(model);
  const NaocsJointParams params = naocs_joint_params(model, naocs);

  const Vec3 on_axis = *params[0].pivot;
  CHECK(associate_point(on_axis, 0, model, params) == 1);
  CHECK(associate_point(on_axis, 1, model, params) == 1);

  const Vec3 far_point = *params[0].pivot + Vec3(0.5, 0, 0);
  CHECK(associate_point(far_point, 0, model, params) == 0);
}

TEST_CASE("prismatic joints claim exactly their moving parts") {
  const KinematicModel model = make_procedural_model(Category::drawer_like,
                                                     29);
  const NaocsFrame naocs = build_naocs(model);
  const JointAssociation assoc = associate_points_to_joints(naocs, model);
  REQUIRE(assoc.size() == model.parts.size());

  for (std::size_t j = 0; j < model.parts.size(); ++j) {
    REQUIRE(assoc[j].size() == model.parts[j].canonical_points.size());
    int expected = 0;
    for (const Joint& joint : model.joints)
      if (joint.child_part == static_cast<int>(j)) expected = joint.id + 1;
    for (const int label : assoc[j]) CHECK(label == expected);
  }
}

TEST_CASE("association resolves conflicts toward the nearer axis") {
  const KinematicModel model =
      make_procedural_model(Category::eyeglasses_like, 31);
  const NaocsFrame naocs = build_naocs(model);
  const NaocsJointParams params = naocs_joint_params(model, naocs);
  const JointAssociation assoc = associate_points_to_joints(naocs, model);
  const double sigma = 0.2;

  for (std::size_t j = 0; j < naocs.per_point_naocs.size(); ++j) {
    for (std::size_t i = 0; i < naocs.per_point_naocs[j].size(); ++i) {
      const Vec3 g = naocs.per_point_naocs[j][i];
      int expected = 0;
      double best = sigma;
      for (const Joint& joint : model.joints) {
        if (joint.parent_part != static_cast<int>(j) &&
            joint.child_part != static_cast<int>(j))
          continue;
        const Vec3 rel = g - *params[joint.id].pivot;
        const double dist =
            (rel - rel.dot(params[joint.id].axis) * params[joint.id].axis)
                .norm();
        if (dist < best) {
          best = dist;
          expected = joint.id + 1;
        }
      }
      CHECK(assoc[j][i] == expected);
      CHECK(assoc[j][i] >= 0);
      CHECK(assoc[j][i] <= static_cast<int>(model.joints.size()));
    }
  }
}
