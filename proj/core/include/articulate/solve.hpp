#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "articulate/canonical.hpp"
#include "articulate/kinematics.hpp"
#include "articulate/predict.hpp"
#include "articulate/types.hpp"

namespace articulate {

struct RansacConfig {
  int max_iters = 200;
  // inlier threshold as a fraction of the fitted part diameter (the NPCS
  // diagonal is 1, so the fit scale is the diameter in camera units)
  double inlier_threshold = 0.05;
  int min_sample = 3;
  double confidence = 0.99;  // adaptive early-exit target
};

struct ConstraintWeights {
  double lambda = 1.0;  // weight of the joint terms
  double mu = 1.0;      // weight of the prismatic rotation-identity term
};

struct SolverConfig {
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double relative_energy_tolerance = 1e-12;
};

struct PoseEstimate {
  std::vector<SimilarityTransform> poses;  // per part, NPCS -> camera
  std::vector<bool> inliers;               // over the scene's points
  double energy = 0.0;
  int iterations = 0;
  bool converged = true;
};

// One kinematic constraint for the refinement: joint type, the two part
// indices it connects, and the predicted NAOCS axis direction u'.
struct ConstraintJoint {
  JointType type = JointType::revolute;
  int part_a = 0;
  int part_b = 1;
  Vec3 axis_naocs = Vec3::UnitZ();
};

std::vector<ConstraintJoint> make_constraint_joints(
    const KinematicModel& model, const NaocsJointParams& params);

struct PartFit {
  SimilarityTransform pose;
  std::vector<bool> inliers;  // over the part's points
};

// RANSAC around the similarity fit: 3-point minimal samples, consensus by
// reprojection distance below threshold * fitted scale, adaptive trial
// count from the confidence, final refit on the consensus set. Trial RNG
// streams are derived from the seed by trial index, so results do not
// depend on evaluation order.
// Throws TooFewPoints (< 3 points) or DegenerateInput (no valid sample).
PartFit fit_part_ransac(std::span<const Vec3> points_j,
                        std::span<const Vec3> npcs_j,
                        const RansacConfig& cfg, std::uint64_t rng_seed);

// fit_part_ransac per part over a scene's prediction, assembling the
// global inlier mask and the vanilla energy.
PoseEstimate fit_parts_ransac(const PredictionRecord& pred,
                              const PointCloud& points,
                              std::size_t part_count, const RansacConfig& cfg,
                              std::uint64_t rng_seed);

// Sum over parts of the mean squared reprojection error
// e_j = (1/|S_j|) sum ||p_i - (s R c_i + t)||^2; an optional mask
// restricts each part's point set.
double energy_vanilla(const std::vector<SimilarityTransform>& poses,
                      const PredictionRecord& pred, const PointCloud& points,
                      const std::vector<bool>* inlier_mask = nullptr);

// Camera-space displacement between two parts' NAOCS origins:
// delta = t_b - t_a + (s_a/G_s,a) R_a G_t,a - (s_b/G_s,b) R_b G_t,b.
// For ground-truth poses of a prismatic pair this equals the slide offset
// times the camera-space axis, so its norm is the joint state.
Vec3 prismatic_delta(const SimilarityTransform& pose_a, const GTransform& g_a,
                     const SimilarityTransform& pose_b, const GTransform& g_b);

// energy_vanilla plus lambda times the joint terms: revolute
// e_k = ||R_a u' - R_b u'||^2; prismatic e_k = mu ||R_a R_b^T - I||_F^2
// + sum_{j in {a,b}} ||skew(R_j u') delta||^2.
double energy_constrained(const std::vector<SimilarityTransform>& poses,
                          const PredictionRecord& pred,
                          const PointCloud& points,
                          const std::vector<ConstraintJoint>& joints,
                          const std::vector<GTransform>& g,
                          const ConstraintWeights& weights,
                          const std::vector<bool>* inlier_mask = nullptr);

// The constrained least-squares problem over per-part local increments
// [omega_j, dt_j] (rotations retracted through exp; scales stay fixed).
// Exposed so tests can compare the analytic Jacobian against finite
// differences block by block.
class ConstrainedProblem {
 public:
  // part_data[j] holds (camera point, npcs coordinate) pairs for part j.
  ConstrainedProblem(std::vector<std::vector<std::pair<Vec3, Vec3>>> part_data,
                     std::vector<ConstraintJoint> joints,
                     std::vector<GTransform> g, ConstraintWeights weights);

  std::size_t part_count() const { return part_data_.size(); }
  std::size_t residual_count() const;
  std::size_t variable_count() const { return 6 * part_data_.size(); }

  Eigen::VectorXd residuals(
      const std::vector<SimilarityTransform>& poses) const;
  Eigen::MatrixXd jacobian(
      const std::vector<SimilarityTransform>& poses) const;
  double energy(const std::vector<SimilarityTransform>& poses) const {
    return residuals(poses).squaredNorm();
  }

  // poses with [omega_j, dt_j] applied: R <- exp(omega) R, t <- t + dt.
  static std::vector<SimilarityTransform> retract(
      const std::vector<SimilarityTransform>& poses,
      const Eigen::VectorXd& dx);

 private:
  std::vector<std::vector<std::pair<Vec3, Vec3>>> part_data_;
  std::vector<ConstraintJoint> joints_;
  std::vector<GTransform> g_;
  ConstraintWeights weights_;
  std::vector<double> data_weight_;  // 1/sqrt(|S_j|) per part
};

// Damped Gauss-Newton descent of E_constrained from the RANSAC poses,
// data term restricted to the inlier mask, scales fixed. Parts with fewer
// than 3 inliers contribute joint residuals only. Never returns a higher
// energy than the initialization.
// Throws SolverDiverged when the energy turns non-finite.
PoseEstimate refine_constrained(const PoseEstimate& init,
                                const PredictionRecord& pred,
                                const PointCloud& points,
                                const std::vector<ConstraintJoint>& joints,
                                const std::vector<GTransform>& g,
                                const ConstraintWeights& weights,
                                const SolverConfig& solver_cfg);

}  // namespace articulate
