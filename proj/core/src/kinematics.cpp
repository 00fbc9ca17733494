#include "articulate/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "articulate/errors.hpp"
#include "articulate/geometry.hpp"
#include "articulate/rng.hpp"

namespace articulate {

Category category_from_string(const std::string& name) {
  if (name == "two_part_revolute") return Category::two_part_revolute;
  if (name == "eyeglasses_like") return Category::eyeglasses_like;
  if (name == "drawer_like") return Category::drawer_like;
  throw UnknownCategory("unknown category: " + name);
}

std::string category_to_string(Category c) {
  switch (c) {
    case Category::two_part_revolute: return "two_part_revolute";
    case Category::eyeglasses_like: return "eyeglasses_like";
    case Category::drawer_like: return "drawer_like";
  }
  throw UnknownCategory("invalid category enum value");
}

void validate_model(const KinematicModel& model) {
  const std::size_t m = model.parts.size();
  if (m < 2) throw DegenerateInput("model needs at least 2 parts");
  if (model.joints.size() != m - 1)
    throw DegenerateInput("model needs exactly M-1 joints");
  if (model.root_part < 0 || static_cast<std::size_t>(model.root_part) >= m)
    throw DegenerateInput("root_part out of range");

  std::vector<int> parent_joint(m, -1);
  for (const Joint& j : model.joints) {
    if (j.parent_part == j.child_part ||
        j.parent_part < 0 || static_cast<std::size_t>(j.parent_part) >= m ||
        j.child_part < 0 || static_cast<std::size_t>(j.child_part) >= m)
      throw DegenerateInput("joint references invalid parts");
    if (j.child_part == model.root_part)
      throw DegenerateInput("root part cannot be a joint child");
    if (parent_joint[j.child_part] != -1)
      throw DegenerateInput("part has two parent joints");
    parent_joint[j.child_part] = j.id;
    if (std::abs(j.axis_direction.norm() - 1.0) > 1e-9)
      throw DegenerateInput("joint axis not unit length");
    if (j.type == JointType::revolute && !j.pivot)
      throw DegenerateInput("revolute joint without pivot");
    if (!(j.state_min <= j.rest_state && j.rest_state <= j.state_max))
      throw DegenerateInput("rest state outside joint range");
  }
  // connectivity: every non-root part must reach the root through parents
  for (std::size_t p = 0; p < m; ++p) {
    if (static_cast<int>(p) == model.root_part) continue;
    int cur = static_cast<int>(p);
    for (std::size_t hops = 0; cur != model.root_part; ++hops) {
      if (hops > m || parent_joint[cur] < 0)
        throw DegenerateInput("joints do not form a tree rooted at root");
      cur = model.joints[parent_joint[cur]].parent_part;
    }
  }
  for (const PartGeometry& part : model.parts) {
    if (part.canonical_points.size() < 50)
      throw DegenerateInput("part needs at least 50 sample points");
    if (part.canonical_area_weights.size() != part.canonical_points.size())
      throw DegenerateInput("area weight count != point count");
    double sum = 0.0;
    for (double w : part.canonical_area_weights) {
      if (!(w > 0.0)) throw DegenerateInput("non-positive area weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DegenerateInput("area weights do not sum to 1");
  }
}

std::vector<SimilarityTransform> forward_kinematics(
    const KinematicModel& model, const JointStateVector& states) {
  if (states.size() != model.joints.size())
    throw CountMismatch("state count != joint count");
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Joint& j = model.joints[k];
    if (states[k] < j.state_min - 1e-12 || states[k] > j.state_max + 1e-12)
      throw StateOutOfRange("joint " + std::to_string(j.id) +
                            " state outside range");
  }

  const std::size_t m = model.parts.size();
  std::vector<SimilarityTransform> out(m);
  std::vector<bool> done(m, false);
  done[model.root_part] = true;

  // joints form a tree, so repeatedly expanding ready edges terminates
  std::size_t placed = 1;
  while (placed < m) {
    const std::size_t before = placed;
    for (std::size_t k = 0; k < model.joints.size(); ++k) {
      const Joint& j = model.joints[k];
      if (done[j.child_part] || !done[j.parent_part]) continue;
      const double offset = states[k] - j.rest_state;
      SimilarityTransform motion;
      if (j.type == JointType::revolute) {
        motion.rotation = rotation_about_axis(j.axis_direction, offset);
        motion.translation = *j.pivot - motion.rotation * (*j.pivot);
      } else {
        motion.translation = offset * j.axis_direction;
      }
      out[j.child_part] = out[j.parent_part].compose(motion);
      done[j.child_part] = true;
      ++placed;
    }
    if (placed == before)
      throw DegenerateInput("joints do not form a tree rooted at root");
  }
  return out;
}

std::vector<SimilarityTransform> pose_in_camera(
    const KinematicModel& model, const JointStateVector& states,
    const SimilarityTransform& camera) {
  std::vector<SimilarityTransform> poses = forward_kinematics(model, states);
  for (SimilarityTransform& p : poses) p = camera.compose(p);
  return poses;
}

namespace {

// Axis-aligned slab in the object frame; parts are unions of slabs sampled
// on their surfaces.
struct Slab {
  Vec3 lo, hi;
};

void sample_part_surface(const std::vector<Slab>& slabs, int target_points,
                         RngStream& rng, PartGeometry& part) {
  struct Face {
    int slab;
    int fixed_dim;
    double fixed_value;
    double area;
  };
  std::vector<Face> faces;
  double total_area = 0.0;
  for (std::size_t s = 0; s < slabs.size(); ++s) {
    const Vec3 ext = slabs[s].hi - slabs[s].lo;
    for (int d = 0; d < 3; ++d) {
      const double area = ext((d + 1) % 3) * ext((d + 2) % 3);
      faces.push_back({static_cast<int>(s), d, slabs[s].lo(d), area});
      faces.push_back({static_cast<int>(s), d, slabs[s].hi(d), area});
      total_area += 2.0 * area;
    }
  }

  for (const Face& f : faces) {
    int count = std::max(
        4, static_cast<int>(std::lround(target_points * f.area / total_area)));
    const double weight = f.area / (count * total_area);
    const Slab& s = slabs[f.slab];
    const int d1 = (f.fixed_dim + 1) % 3, d2 = (f.fixed_dim + 2) % 3;
    for (int i = 0; i < count; ++i) {
      Vec3 p;
      p(f.fixed_dim) = f.fixed_value;
      // the first four samples are the face corners, so any visible face
      // pins the slab's full extent in all three dimensions
      if (i < 4) {
        p(d1) = (i & 1) ? s.hi(d1) : s.lo(d1);
        p(d2) = (i & 2) ? s.hi(d2) : s.lo(d2);
      } else {
        p(d1) = rng.uniform(s.lo(d1), s.hi(d1));
        p(d2) = rng.uniform(s.lo(d2), s.hi(d2));
      }
      part.canonical_points.push_back(p);
      part.canonical_area_weights.push_back(weight);
    }
  }
  // renormalize away the rounding residue so weights sum to exactly 1
  double sum = 0.0;
  for (double w : part.canonical_area_weights) sum += w;
  for (double& w : part.canonical_area_weights) w /= sum;
}

Vec3 jittered_dims(const Vec3& base, double global, double aspect_jitter,
                   RngStream& rng) {
  Vec3 out;
  for (int d = 0; d < 3; ++d)
    out(d) = base(d) * global * rng.uniform(1.0 - aspect_jitter,
                                            1.0 + aspect_jitter);
  return out;
}

KinematicModel make_two_part_revolute(std::uint64_t seed,
                                      const ShapeParams& params) {
  RngStream rng(seed);
  const double g = rng.uniform(1.0 - params.size_jitter,
                               1.0 + params.size_jitter);
  // base slab in z<0 extending +x, lid standing vertical above the hinge
  // line (the y axis); rest state is the lid at a right angle to the base
  const Vec3 base_dims = jittered_dims({0.42, 0.55, 0.035}, g,
                                       params.aspect_jitter, rng);
  const Vec3 lid_dims = jittered_dims({0.03, 0.55, 0.40}, g,
                                      params.aspect_jitter, rng);
  const double gap = 0.01 * g;

  KinematicModel model;
  model.category_name = "two_part_revolute";
  model.root_part = 0;
  model.parts.resize(2);
  model.parts[0].id = 0;
  model.parts[1].id = 1;
  sample_part_surface({{{gap, -base_dims.y() / 2, -base_dims.z()},
                        {gap + base_dims.x(), base_dims.y() / 2, -gap}}},
                      params.points_per_part, rng, model.parts[0]);
  sample_part_surface({{{-lid_dims.x(), -lid_dims.y() / 2, gap},
                        {0.0, lid_dims.y() / 2, gap + lid_dims.z()}}},
                      params.points_per_part, rng, model.parts[1]);

  Joint hinge;
  hinge.id = 0;
  hinge.type = JointType::revolute;
  hinge.parent_part = 0;
  hinge.child_part = 1;
  hinge.axis_direction = Vec3::UnitY();
  hinge.pivot = Vec3::Zero();
  hinge.rest_state = std::numbers::pi / 2;
  hinge.state_min = hinge.rest_state - 1.35;  // tip backward, opening
  hinge.state_max = hinge.rest_state + 0.35;  // toward the base, closing
  model.joints = {hinge};
  return model;
}

KinematicModel make_eyeglasses_like(std::uint64_t seed,
                                    const ShapeParams& params) {
  RngStream rng(seed);
  const double g = rng.uniform(1.0 - params.size_jitter,
                               1.0 + params.size_jitter);
  const Vec3 frame_dims = jittered_dims({0.05, 0.50, 0.16}, g,
                                        params.aspect_jitter, rng);
  // temples stay small next to the frame but thick enough that the coarse
  // visibility buffer resolves their end faces
  const Vec3 temple_dims = jittered_dims({0.46, 0.07, 0.11}, g,
                                         params.aspect_jitter, rng);
  const double gap = 0.008 * g;
  const double half_w = frame_dims.y() / 2;

  KinematicModel model;
  model.category_name = "eyeglasses_like";
  model.root_part = 0;
  model.parts.resize(3);
  for (int i = 0; i < 3; ++i) model.parts[i].id = i;

  // frame spans y, temples extend +x at rest (right angles to the frame)
  sample_part_surface({{{-frame_dims.x(), -half_w, -frame_dims.z() / 2},
                        {0.0, half_w, frame_dims.z() / 2}}},
                      params.points_per_part, rng, model.parts[0]);
  sample_part_surface(
      {{{gap, half_w - temple_dims.y(), -temple_dims.z() / 2},
        {gap + temple_dims.x(), half_w, temple_dims.z() / 2}}},
      params.points_per_part, rng, model.parts[1]);
  sample_part_surface(
      {{{gap, -half_w, -temple_dims.z() / 2},
        {gap + temple_dims.x(), -half_w + temple_dims.y(), temple_dims.z() / 2}}},
      params.points_per_part, rng, model.parts[2]);

  const double rest = std::numbers::pi / 2;
  Joint a;
  a.id = 0;
  a.type = JointType::revolute;
  a.parent_part = 0;
  a.child_part = 1;
  a.axis_direction = Vec3::UnitZ();
  a.pivot = Vec3(0.0, half_w - temple_dims.y() / 2, 0.0);
  a.rest_state = rest;
  a.state_min = rest - 1.45;  // fold inward (tip toward -y)
  a.state_max = rest + 0.10;
  Joint b = a;
  b.id = 1;
  b.child_part = 2;
  b.pivot = Vec3(0.0, -(half_w - temple_dims.y() / 2), 0.0);
  b.state_min = rest - 0.10;
  b.state_max = rest + 1.45;  // fold inward (tip toward +y)
  model.joints = {a, b};
  return model;
}

KinematicModel make_drawer_like(std::uint64_t seed,
                                const ShapeParams& params) {
  RngStream rng(seed);
  const double g = rng.uniform(1.0 - params.size_jitter,
                               1.0 + params.size_jitter);
  const Vec3 outer = jittered_dims({0.45, 0.50, 0.60}, g,
                                   params.aspect_jitter, rng);
  const double t = 0.04 * g;    // wall thickness
  const double gap = 0.01 * g;  // drawer-to-shell clearance
  const double d = outer.x(), w = outer.y(), h = outer.z();

  KinematicModel model;
  model.category_name = "drawer_like";
  model.root_part = 0;
  model.parts.resize(4);
  for (int i = 0; i < 4; ++i) model.parts[i].id = i;

  // cabinet shell: back, left, right, bottom, top panels; open front (+x)
  sample_part_surface(
      {{{-d / 2, -w / 2, 0.0}, {-d / 2 + t, w / 2, h}},
       {{-d / 2 + t, -w / 2, 0.0}, {d / 2, -w / 2 + t, h}},
       {{-d / 2 + t, w / 2 - t, 0.0}, {d / 2, w / 2, h}},
       {{-d / 2 + t, -w / 2 + t, 0.0}, {d / 2, w / 2 - t, t}},
       {{-d / 2 + t, -w / 2 + t, h - t}, {d / 2, w / 2 - t, h}}},
      params.points_per_part, rng, model.parts[0]);

  const double slot_h = (h - 2 * t) / 3;
  for (int k = 0; k < 3; ++k) {
    const double z_lo = t + k * slot_h + gap;
    const double z_hi = t + (k + 1) * slot_h - gap;
    sample_part_surface(
        {{{-d / 2 + t + gap, -w / 2 + t + gap, z_lo},
          {d / 2 + 0.02 * g, w / 2 - t - gap, z_hi}}},
        params.points_per_part, rng, model.parts[k + 1]);

    Joint slide;
    slide.id = k;
    slide.type = JointType::prismatic;
    slide.parent_part = 0;
    slide.child_part = k + 1;
    slide.axis_direction = Vec3::UnitX();
    slide.state_min = 0.0;  // rest: closed
    slide.state_max = 0.6 * d;
    slide.rest_state = 0.0;
    model.joints.push_back(slide);
  }
  return model;
}

}  // namespace

KinematicModel make_procedural_model(Category category, std::uint64_t seed,
                                     const ShapeParams& params) {
  KinematicModel model;
  switch (category) {
    case Category::two_part_revolute:
      model = make_two_part_revolute(seed, params);
      break;
    case Category::eyeglasses_like:
      model = make_eyeglasses_like(seed, params);
      break;
    case Category::drawer_like:
      model = make_drawer_like(seed, params);
      break;
    default:
      throw UnknownCategory("invalid category enum value");
  }
  validate_model(model);
  return model;
}

}  // namespace articulate
