#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/observe.hpp"
#include "articulate/predict.hpp"
#include "articulate/recover.hpp"
#include "articulate/solve.hpp"
#include "articulate/types.hpp"

namespace articulate {

// npcs  - per-part RANSAC fit of NPCS coordinates, no joint constraints;
//         joint states recovered, no joint axis/pivot, amodal boxes kept.
// naocs - per-part fit of per-point NAOCS coordinates to the camera cloud;
//         no amodal boxes (sizes are not defined in NAOCS alone).
// ancsh - full pipeline: RANSAC init, constrained refinement, closed-form
//         joint parameters and states, amodal boxes.
enum class Method { npcs, naocs, ancsh };

Method method_from_string(const std::string& name);
std::string method_to_string(Method m);

struct FitConfig {
  RansacConfig ransac;
  ConstraintWeights weights;
  SolverConfig solver;
  double assoc_sigma = 0.2;  // joint-association distance threshold
};

struct SceneEstimate {
  std::uint64_t scene_id = 0;
  Method method = Method::ancsh;
  PoseEstimate pose;
  std::vector<JointEstimate> joints;  // states always; params when flagged
  std::vector<OrientedBox> boxes;     // empty when has_boxes is false
  bool has_joint_params = false;
  bool has_boxes = false;
};

// Run one method on one scene's prediction. Deterministic per seed.
SceneEstimate fit_scene(Method method, const Scene& scene,
                        const PredictionRecord& pred,
                        const KinematicModel& model, const FitConfig& cfg,
                        std::uint64_t rng_seed);

// Per-part and per-joint errors of one estimate against scene ground
// truth. Entries that a method does not define (IoU without boxes, joint
// axis/pivot without parameters, pivots of prismatic joints) are NaN and
// skipped by every aggregation.
struct SceneMetrics {
  std::vector<double> rotation_error_deg;  // per part
  std::vector<double> translation_error;   // camera units
  std::vector<double> iou_3d;
  std::vector<double> ad_value;       // mean model-point distance
  std::vector<double> part_diameter;  // camera units, from the gt pose
  std::vector<bool> ad_hit;           // ad_value < 0.10 * diameter
  std::vector<double> state_error;    // per joint
  std::vector<double> axis_angle_error_deg;
  std::vector<double> pivot_line_distance;
  std::vector<double> occlusion;  // copied from the scene
};

// canonical_npcs must come from the scene's model (full sample sets); it
// provides ground-truth amodal boxes and the AD point sets.
SceneMetrics score_scene(const SceneEstimate& estimate, const Scene& scene,
                         const NpcsFrame& canonical_npcs);

// Fraction of scenes per part whose mean model-point distance stays below
// threshold_fraction times the part diameter.
std::vector<double> ad_accuracy(const std::vector<SceneMetrics>& metrics,
                                double threshold_fraction = 0.10);

struct MethodReport {
  Method method = Method::ancsh;
  std::size_t scene_count = 0;
  std::vector<SceneMetrics> per_scene;
  // NaN-skipping means, one entry per part
  std::vector<double> mean_rotation_deg;
  std::vector<double> mean_translation;
  std::vector<double> mean_iou;
  std::vector<double> ad_fraction;  // at the 10% threshold
  // one entry per joint
  std::vector<double> mean_state_error;
  std::vector<double> mean_axis_deg;
  std::vector<double> mean_pivot_distance;
};

struct ComparisonReport {
  std::uint64_t master_seed = 0;
  std::vector<MethodReport> methods;
};

MethodReport summarize(Method method, std::vector<SceneMetrics> per_scene);

// Simulate predictions for every scene (seeded by scene index, so all
// methods see identical predictions), fit, and score. Sequential and
// deterministic.
MethodReport run_baseline(Method method, const std::vector<Scene>& scenes,
                          const KinematicModel& model,
                          const NoiseConfig& noise, const FitConfig& cfg,
                          std::uint64_t master_seed);

ComparisonReport compare_methods(const std::vector<Method>& methods,
                                 const std::vector<Scene>& scenes,
                                 const KinematicModel& model,
                                 const NoiseConfig& noise,
                                 const FitConfig& cfg,
                                 std::uint64_t master_seed);

// Mean per-joint camera-space axis/pivot errors of two vote pathways under
// matched noise: canonical-space votes carried through estimated poses
// versus direct camera-space voting (noise applied in the camera frame,
// scaled by direct_dispersion).
struct JointVotingRow {
  int joint_id = 0;
  double canonical_axis_deg = 0.0;
  double canonical_pivot_distance = 0.0;
  double direct_axis_deg = 0.0;
  double direct_pivot_distance = 0.0;
};

std::vector<JointVotingRow> joint_voting_comparison(
    const std::vector<Scene>& scenes, const KinematicModel& model,
    const NoiseConfig& noise, const FitConfig& cfg, std::uint64_t master_seed,
    double direct_dispersion = 1.0);

// Per-part metric entries grouped by occlusion-ratio bins. Empty bins
// report NaN means.
struct OcclusionBin {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 0;
  double mean_rotation_deg = 0.0;
  double mean_translation = 0.0;
};

std::vector<OcclusionBin> occlusion_analysis(
    const std::vector<SceneMetrics>& metrics,
    const std::vector<double>& bin_edges = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0});

// Spearman rank correlation (average ranks for ties).
double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y);

// One-sided sign test: probability of at least `wins` successes in
// `trials` fair coin flips.
double sign_test_p_value(std::size_t wins, std::size_t trials);

}  // namespace articulate
