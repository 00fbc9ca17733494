#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/kinematics.hpp"
#include "articulate/types.hpp"

namespace articulate {

struct CameraConfig {
  // viewing distance in units of the articulated tight-box diagonal
  double distance_min = 1.5;
  double distance_max = 3.0;
  double elevation_min = -1.1;  // radians
  double elevation_max = 1.1;
  double azimuth_min = -3.14159265358979323846;
  double azimuth_max = 3.14159265358979323846;
  int image_width = 160;  // visibility buffer resolution
  int image_height = 120;
  double focal = 140.0;  // pixels
  int sample_count = 1024;  // observed points per scene
};

struct JointParamsCamera {
  Vec3 axis = Vec3::UnitZ();  // unit, camera frame
  std::optional<Vec3> pivot;  // revolute joints only
};

// One synthetic observation with complete ground truth. Points are the
// camera-frame partial cloud; parallel arrays carry per-point truth.
// joint_states are the sampled absolute states; gt_joint_states are the
// unsigned offsets from rest (what closed-form recovery reports).
struct Scene {
  std::uint64_t scene_id = 0;
  std::string model_ref;
  JointStateVector joint_states;
  SimilarityTransform camera;  // object frame -> camera frame, scale 1
  PointCloud points;
  std::vector<int> gt_part_labels;
  PointCloud gt_npcs;
  std::vector<GTransform> gt_g;  // per part
  std::vector<SimilarityTransform> gt_part_poses;  // NPCS -> camera
  NaocsJointParams gt_joint_params_naocs;
  std::vector<JointParamsCamera> gt_joint_params_camera;
  std::vector<double> gt_joint_states;
  std::vector<double> occlusion;  // per-part visible-area ratio
  bool sampled_with_replacement = false;
};

// Point-sample z-buffer: project every part sample through the camera onto
// the pixel grid, keep the nearest sample per pixel.
struct VisibilityResult {
  std::vector<std::vector<bool>> visible;  // per part, per sample
  std::vector<double> occlusion;  // per part, area-weighted visible ratio
};

VisibilityResult compute_visibility(const KinematicModel& model,
                                    const JointStateVector& states,
                                    const SimilarityTransform& camera,
                                    const CameraConfig& config);

// Random joint states (uniform within ranges) and a random viewpoint from
// the config; viewpoints where some part is completely occluded are
// rejected and redrawn. Deterministic per seed.
// Throws ResampleLimitExceeded after 100 rejected viewpoints.
Scene sample_scene(const KinematicModel& model, const CameraConfig& config,
                   std::uint64_t rng_seed);

// Stored area-weighted visible ratio of one part.
double occlusion_level(const Scene& scene, int part);

// JSON-lines dataset: a header line with the schema version, then one
// scene per line. Lossless round trip of every field.
void write_dataset(const std::vector<Scene>& scenes, const std::string& path);
std::vector<Scene> read_dataset(const std::string& path);

}  // namespace articulate
