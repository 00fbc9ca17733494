#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/observe.hpp"
#include "articulate/rng.hpp"
#include "articulate/types.hpp"

namespace articulate {

// 7D joint vote: unit axis direction (0-2), unit projection direction
// (3-5), projection distance (6). The voting point plus distance times
// projection direction reconstructs the point's projection onto the joint
// axis. Prismatic joints carry no pivot, so entries 3-6 stay zero.
using JointVote = std::array<double, 7>;

// Per-point outputs of the four prediction heads for one scene, either
// simulated from ground truth under a controlled noise model or loaded
// from file (real network outputs).
struct PredictionRecord {
  std::uint64_t scene_id = 0;
  std::vector<int> labels;      // part index per point
  PointCloud npcs;              // c_i
  std::vector<double> g_scale;  // per-point G_s,i
  PointCloud g_offset;          // per-point G_t,i
  std::vector<int> assoc;       // joint association, 0 = none, k = joint k-1
  std::vector<JointVote> votes;

  std::size_t size() const { return labels.size(); }
};

struct NoiseConfig {
  double npcs_sigma = 0.0;          // Gaussian, NPCS units
  double g_scale_rel_sigma = 0.0;   // log-normal multiplicative
  double g_offset_sigma = 0.0;      // Gaussian, NAOCS units
  double axis_angle_sigma_deg = 0.0;
  double pivot_sigma = 0.0;         // projection-distance Gaussian
  double seg_flip_prob = 0.0;       // boundary-biased label flips
  double assoc_flip_prob = 0.0;
};

// Tilt a unit vector toward a random perpendicular by a Gaussian angle of
// sigma_rad standard deviation. Exactly the input at zero sigma.
Vec3 perturb_direction(const Vec3& unit, double sigma_rad, RngStream& rng);

// Normalized sign-aligned mean of (possibly antipodal) axis directions.
// The alignment reference is the principal scatter direction, so the
// result is independent of input order up to rounding. Throws
// InsufficientVotes below 3 entries, DegenerateAxis when votes cancel.
Vec3 mean_axis_direction(const std::vector<Vec3>& axes);

// Ground-truth heads for a scene with the noise model applied on top.
// Zero noise reproduces ground truth exactly. Segmentation flips only hit
// points among the 10% closest to another part in the observed cloud.
// assoc_sigma is the axis-distance threshold of the association heuristic.
PredictionRecord simulate_prediction(const Scene& scene,
                                     const KinematicModel& model,
                                     const NoiseConfig& noise,
                                     std::uint64_t rng_seed,
                                     double assoc_sigma = 0.2);

// Arithmetic mean of the per-point G_s / G_t over each part's points.
// Throws EmptyPart when a part in [0, part_count) has no points.
std::vector<GTransform> aggregate_part_transforms(const PredictionRecord& pred,
                                                  std::size_t part_count);

// Average the votes of each joint's associated points: axis = normalized
// sign-aligned mean of vote axes; revolute pivot = mean of the per-point
// axis-projection reconstructions g_i + distance_i * direction_i, with
// g_i = G_s,i * c_i + G_t,i taken from the prediction itself.
// Throws InsufficientVotes when a joint has fewer than 3 votes.
NaocsJointParams aggregate_joint_votes(const PredictionRecord& pred,
                                       const KinematicModel& model);

// Prediction file round trip (schema in README). load_prediction checks
// internal array-length consistency and the schema version.
void write_prediction(const PredictionRecord& pred, const std::string& path);
PredictionRecord load_prediction(const std::string& path);

}  // namespace articulate
