#pragma once

// Shared scaffolding for the test suites: random geometric objects, small
// hand-built kinematic models, and a temp-directory guard for file tests.

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "articulate/kinematics.hpp"
#include "articulate/rng.hpp"
#include "articulate/types.hpp"

namespace testing_helpers {

using articulate::KinematicModel;
using articulate::Line3;
using articulate::Mat3;
using articulate::OrientedBox;
using articulate::PartGeometry;
using articulate::PointCloud;
using articulate::RngStream;
using articulate::SimilarityTransform;
using articulate::Vec3;

inline Mat3 random_rotation(RngStream& rng) {
  return articulate::rotation_about_axis(
      rng.unit_vector(), rng.uniform(0.0, 2.0 * std::numbers::pi));
}

inline SimilarityTransform random_similarity(RngStream& rng,
                                             double scale_min = 0.5,
                                             double scale_max = 2.0) {
  SimilarityTransform t;
  t.scale = rng.uniform(scale_min, scale_max);
  t.rotation = random_rotation(rng);
  t.translation =
      Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
  return t;
}

inline OrientedBox random_box(RngStream& rng) {
  OrientedBox box;
  box.center = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                    rng.uniform(-0.5, 0.5));
  box.rotation = random_rotation(rng);
  box.half_extents = Vec3(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                          rng.uniform(0.2, 0.8));
  return box;
}

// Pairs with frequent partial overlap: the second box is a moderate
// perturbation of the first.
inline std::pair<OrientedBox, OrientedBox> random_box_pair(RngStream& rng) {
  OrientedBox a = random_box(rng);
  OrientedBox b = a;
  b.center += Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                   rng.uniform(-0.5, 0.5));
  b.rotation =
      articulate::rotation_about_axis(rng.unit_vector(),
                                      rng.uniform(-0.6, 0.6)) *
      b.rotation;
  b.half_extents = Vec3(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                        rng.uniform(0.2, 0.8));
  return {a, b};
}

// Line pairs whose minimizing parameters stay inside the grid oracle's
// first search window (directions bounded away from parallel).
inline std::pair<Line3, Line3> random_line_pair(RngStream& rng) {
  Line3 a, b;
  a.point = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  a.direction = rng.unit_vector();
  b.point = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  do {
    b.direction = rng.unit_vector();
  } while (std::abs(a.direction.dot(b.direction)) > 0.9);
  return {a, b};
}

// Regular grid over an axis-aligned rectangle in the plane z = depth.
inline PointCloud plane_grid(double half_x, double half_y, double depth,
                             int per_side) {
  PointCloud pts;
  pts.reserve(static_cast<std::size_t>(per_side) * per_side);
  for (int i = 0; i < per_side; ++i)
    for (int j = 0; j < per_side; ++j) {
      const double fx = (i + 0.5) / per_side, fy = (j + 0.5) / per_side;
      pts.emplace_back(-half_x + 2.0 * half_x * fx,
                       -half_y + 2.0 * half_y * fy, depth);
    }
  return pts;
}

inline PartGeometry make_part(int id, PointCloud points) {
  PartGeometry part;
  part.id = id;
  part.canonical_points = std::move(points);
  part.canonical_area_weights.assign(
      part.canonical_points.size(),
      1.0 / static_cast<double>(part.canonical_points.size()));
  return part;
}

// Scattered box-shaped cloud, at least 50 points so models validate.
inline PointCloud box_cloud(const Vec3& center, const Vec3& half, int count,
                            std::uint64_t seed) {
  RngStream rng(seed);
  PointCloud pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i)
    pts.emplace_back(center.x() + half.x() * rng.uniform(-1, 1),
                     center.y() + half.y() * rng.uniform(-1, 1),
                     center.z() + half.z() * rng.uniform(-1, 1));
  return pts;
}

// Two parts joined by one revolute joint about z through the origin.
inline KinematicModel two_part_hinge_model() {
  KinematicModel model;
  model.category_name = "hand_hinge";
  model.root_part = 0;
  model.parts.push_back(
      make_part(0, box_cloud(Vec3(-0.6, 0, 0), Vec3(0.5, 0.4, 0.1), 80, 11)));
  model.parts.push_back(
      make_part(1, box_cloud(Vec3(0.6, 0, 0), Vec3(0.5, 0.4, 0.1), 80, 12)));
  articulate::Joint j;
  j.id = 0;
  j.type = articulate::JointType::revolute;
  j.parent_part = 0;
  j.child_part = 1;
  j.axis_direction = Vec3::UnitZ();
  j.pivot = Vec3::Zero();
  j.state_min = -std::numbers::pi;
  j.state_max = std::numbers::pi;
  j.rest_state = 0.0;
  model.joints.push_back(j);
  return model;
}

// Star of three prismatic sliders along x off one base part.
inline KinematicModel prismatic_star_model() {
  KinematicModel model;
  model.category_name = "hand_sliders";
  model.root_part = 0;
  model.parts.push_back(
      make_part(0, box_cloud(Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5), 90, 21)));
  for (int c = 1; c <= 3; ++c) {
    model.parts.push_back(make_part(
        c, box_cloud(Vec3(0.2, 0, -0.4 + 0.4 * (c - 1)),
                     Vec3(0.3, 0.3, 0.15), 80, 21 + c)));
    articulate::Joint j;
    j.id = c - 1;
    j.type = articulate::JointType::prismatic;
    j.parent_part = 0;
    j.child_part = c;
    j.axis_direction = Vec3::UnitX();
    j.state_min = 0.0;
    j.state_max = 1.0;
    j.rest_state = 0.0;
    model.joints.push_back(j);
  }
  return model;
}

// Unique directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("articulate_test_" + tag + "_" + std::to_string(::getpid()) +
            "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testing_helpers
