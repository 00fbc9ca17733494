#include "articulate/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "articulate/errors.hpp"
#include "articulate/geometry.hpp"
#include "articulate/rng.hpp"

namespace articulate {

std::vector<ConstraintJoint> make_constraint_joints(
    const KinematicModel& model, const NaocsJointParams& params) {
  if (params.size() != model.joints.size())
    throw CountMismatch("joint parameter count != model joint count");
  std::vector<ConstraintJoint> out(model.joints.size());
  for (std::size_t k = 0; k < model.joints.size(); ++k) {
    out[k].type = model.joints[k].type;
    out[k].part_a = model.joints[k].parent_part;
    out[k].part_b = model.joints[k].child_part;
    out[k].axis_naocs = params[k].axis;
  }
  return out;
}

PartFit fit_part_ransac(std::span<const Vec3> points_j,
                        std::span<const Vec3> npcs_j,
                        const RansacConfig& cfg, std::uint64_t rng_seed) {
  const std::size_t n = points_j.size();
  if (n != npcs_j.size())
    throw CountMismatch("point and NPCS counts differ");
  if (n < static_cast<std::size_t>(cfg.min_sample))
    throw TooFewPoints("part has fewer than 3 points");

  const auto count_inliers = [&](const SimilarityTransform& fit,
                                 std::vector<bool>& mask) {
    const double thr = cfg.inlier_threshold * fit.scale;
    std::size_t count = 0;
    mask.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if ((points_j[i] - fit.apply(npcs_j[i])).norm() <= thr) {
        mask[i] = true;
        ++count;
      }
    }
    return count;
  };

  SimilarityTransform best_fit;
  std::vector<bool> best_mask;
  std::size_t best_count = 0;
  bool have_fit = false;
  int required = cfg.max_iters;

  std::vector<Vec3> src(3), dst(3);
  std::vector<bool> mask;
  for (int trial = 0; trial < required; ++trial) {
    RngStream rng(derive_seed(rng_seed, "ransac_trial",
                              static_cast<std::uint64_t>(trial)));
    std::size_t idx[3];
    idx[0] = rng.index(n);
    do idx[1] = rng.index(n); while (idx[1] == idx[0]);
    do idx[2] = rng.index(n); while (idx[2] == idx[0] || idx[2] == idx[1]);
    for (int s = 0; s < 3; ++s) {
      src[s] = npcs_j[idx[s]];
      dst[s] = points_j[idx[s]];
    }
    SimilarityTransform fit;
    try {
      fit = umeyama_fit(src, dst);
    } catch (const DegenerateInput&) {
      continue;
    }
    const std::size_t count = count_inliers(fit, mask);
    if (count > best_count || !have_fit) {
      best_count = count;
      best_fit = fit;
      best_mask = mask;
      have_fit = true;
      // adaptive trial count: stop once an all-inlier sample is likely
      const double w =
          static_cast<double>(count) / static_cast<double>(n);
      const double p_good = w * w * w;
      if (p_good >= 1.0 - 1e-12) {
        required = trial + 1;
      } else if (p_good > 0.0) {
        const double needed =
            std::log(1.0 - cfg.confidence) / std::log(1.0 - p_good);
        required = std::min(cfg.max_iters,
                            std::max(trial + 1, static_cast<int>(
                                                    std::ceil(needed))));
      }
    }
  }
  if (!have_fit)
    throw DegenerateInput("no non-degenerate minimal sample found");

  // refit on the consensus set, then refresh the mask once so the returned
  // mask matches the returned transform
  if (best_count >= 3) {
    std::vector<Vec3> in_src, in_dst;
    in_src.reserve(best_count);
    in_dst.reserve(best_count);
    for (std::size_t i = 0; i < n; ++i) {
      if (!best_mask[i]) continue;
      in_src.push_back(npcs_j[i]);
      in_dst.push_back(points_j[i]);
    }
    try {
      const SimilarityTransform refit = umeyama_fit(in_src, in_dst);
      const std::size_t count = count_inliers(refit, mask);
      if (count >= 3) {
        best_fit = refit;
        best_mask = mask;
      }
    } catch (const DegenerateInput&) {
      // keep the minimal-sample fit
    }
  }
  return {best_fit, best_mask};
}

PoseEstimate fit_parts_ransac(const PredictionRecord& pred,
                              const PointCloud& points,
                              std::size_t part_count, const RansacConfig& cfg,
                              std::uint64_t rng_seed) {
  if (pred.size() != points.size())
    throw CountMismatch("prediction and point counts differ");

  PoseEstimate out;
  out.poses.resize(part_count);
  out.inliers.assign(points.size(), false);
  std::vector<std::vector<std::size_t>> part_indices(part_count);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int j = pred.labels[i];
    if (j >= 0 && static_cast<std::size_t>(j) < part_count)
      part_indices[static_cast<std::size_t>(j)].push_back(i);
  }

  std::vector<bool> fitted(part_count, false);
  std::vector<std::size_t> inlier_counts(part_count, 0);
  for (std::size_t j = 0; j < part_count; ++j) {
    const auto& indices = part_indices[j];
    if (indices.size() < 3) continue;
    std::vector<Vec3> part_points, part_npcs;
    part_points.reserve(indices.size());
    part_npcs.reserve(indices.size());
    for (std::size_t i : indices) {
      part_points.push_back(points[i]);
      part_npcs.push_back(pred.npcs[i]);
    }
    PartFit fit;
    try {
      fit = fit_part_ransac(part_points, part_npcs, cfg,
                            derive_seed(rng_seed, "part", j));
    } catch (const DegenerateInput&) {
      // too few distinct points for a similarity fit; fall through to the
      // sibling-based fallback below
      continue;
    }
    out.poses[j] = fit.pose;
    fitted[j] = true;
    for (std::size_t s = 0; s < indices.size(); ++s) {
      if (!fit.inliers[s]) continue;
      out.inliers[indices[s]] = true;
      ++inlier_counts[j];
    }
  }

  // Parts too sparse or too degenerate for RANSAC (a sliver of a drawer can
  // rasterize to a single pixel pair) borrow a pose from the best-supported
  // fitted part: assuming the rest-state relative placement, the two parts
  // share the same NAOCS-to-camera map, which fixes scale, rotation and
  // translation through the per-part G transforms. The refinement pulls the
  // borrowed pose toward whatever evidence the part does have.
  std::size_t ref = part_count;
  for (std::size_t j = 0; j < part_count; ++j)
    if (fitted[j] && (ref == part_count || inlier_counts[j] > inlier_counts[ref]))
      ref = j;
  const auto mean_g = [&](std::size_t j) {
    const auto& indices = part_indices[j];
    if (indices.empty())
      throw TooFewPoints("part " + std::to_string(j) + " has no points");
    GTransform g{0.0, Vec3::Zero()};
    for (std::size_t i : indices) {
      g.scale += pred.g_scale[i];
      g.offset += pred.g_offset[i];
    }
    g.scale /= static_cast<double>(indices.size());
    g.offset /= static_cast<double>(indices.size());
    return g;
  };
  for (std::size_t j = 0; j < part_count; ++j) {
    if (fitted[j]) continue;
    if (ref == part_count)
      throw DegenerateInput("no part has enough distinct points to fit");
    const GTransform gj = mean_g(j);
    const GTransform gr = mean_g(ref);
    const SimilarityTransform& pr = out.poses[ref];
    const double naocs_scale = pr.scale / gr.scale;
    SimilarityTransform pose;
    pose.scale = naocs_scale * gj.scale;
    pose.rotation = pr.rotation;
    pose.translation =
        pr.translation + naocs_scale * (pr.rotation * (gj.offset - gr.offset));
    out.poses[j] = pose;
    // the handful of points the part does have are the only evidence there
    // is; keep them all
    for (std::size_t i : part_indices[j]) out.inliers[i] = true;
  }
  out.energy = energy_vanilla(out.poses, pred, points, &out.inliers);
  return out;
}

double energy_vanilla(const std::vector<SimilarityTransform>& poses,
                      const PredictionRecord& pred, const PointCloud& points,
                      const std::vector<bool>* inlier_mask) {
  std::vector<double> sums(poses.size(), 0.0);
  std::vector<std::size_t> counts(poses.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (inlier_mask && !(*inlier_mask)[i]) continue;
    const int j = pred.labels[i];
    if (j < 0 || static_cast<std::size_t>(j) >= poses.size())
      throw CountMismatch("part label outside pose range");
    sums[j] += (points[i] - poses[j].apply(pred.npcs[i])).squaredNorm();
    ++counts[j];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < poses.size(); ++j)
    if (counts[j] > 0) total += sums[j] / static_cast<double>(counts[j]);
  return total;
}

Vec3 prismatic_delta(const SimilarityTransform& pose_a, const GTransform& g_a,
                     const SimilarityTransform& pose_b, const GTransform& g_b) {
  return pose_b.translation - pose_a.translation +
         (pose_a.scale / g_a.scale) * (pose_a.rotation * g_a.offset) -
         (pose_b.scale / g_b.scale) * (pose_b.rotation * g_b.offset);
}

double energy_constrained(const std::vector<SimilarityTransform>& poses,
                          const PredictionRecord& pred,
                          const PointCloud& points,
                          const std::vector<ConstraintJoint>& joints,
                          const std::vector<GTransform>& g,
                          const ConstraintWeights& weights,
                          const std::vector<bool>* inlier_mask) {
  double total = energy_vanilla(poses, pred, points, inlier_mask);
  for (const ConstraintJoint& joint : joints) {
    const SimilarityTransform& pa = poses.at(joint.part_a);
    const SimilarityTransform& pb = poses.at(joint.part_b);
    double ek = 0.0;
    if (joint.type == JointType::revolute) {
      ek = ((pa.rotation - pb.rotation) * joint.axis_naocs).squaredNorm();
    } else {
      ek = weights.mu *
           (pa.rotation * pb.rotation.transpose() - Mat3::Identity())
               .squaredNorm();
      const Vec3 delta = prismatic_delta(pa, g.at(joint.part_a), pb,
                                         g.at(joint.part_b));
      ek += (pa.rotation * joint.axis_naocs).cross(delta).squaredNorm();
      ek += (pb.rotation * joint.axis_naocs).cross(delta).squaredNorm();
    }
    total += weights.lambda * ek;
  }
  return total;
}

ConstrainedProblem::ConstrainedProblem(
    std::vector<std::vector<std::pair<Vec3, Vec3>>> part_data,
    std::vector<ConstraintJoint> joints, std::vector<GTransform> g,
    ConstraintWeights weights)
    : part_data_(std::move(part_data)),
      joints_(std::move(joints)),
      g_(std::move(g)),
      weights_(weights) {
  data_weight_.resize(part_data_.size(), 0.0);
  for (std::size_t j = 0; j < part_data_.size(); ++j)
    if (!part_data_[j].empty())
      data_weight_[j] =
          1.0 / std::sqrt(static_cast<double>(part_data_[j].size()));
}

std::size_t ConstrainedProblem::residual_count() const {
  std::size_t rows = 0;
  for (const auto& data : part_data_) rows += 3 * data.size();
  for (const ConstraintJoint& joint : joints_)
    rows += joint.type == JointType::revolute ? 3 : 15;
  return rows;
}

Eigen::VectorXd ConstrainedProblem::residuals(
    const std::vector<SimilarityTransform>& poses) const {
  const double sl = std::sqrt(weights_.lambda);
  const double slm = std::sqrt(weights_.lambda * weights_.mu);
  Eigen::VectorXd r(residual_count());
  Eigen::Index row = 0;
  for (std::size_t j = 0; j < part_data_.size(); ++j) {
    const double w = data_weight_[j];
    for (const auto& [p, c] : part_data_[j]) {
      r.segment<3>(row) = w * (p - poses[j].apply(c));
      row += 3;
    }
  }
  for (const ConstraintJoint& joint : joints_) {
    const SimilarityTransform& pa = poses[joint.part_a];
    const SimilarityTransform& pb = poses[joint.part_b];
    if (joint.type == JointType::revolute) {
      r.segment<3>(row) =
          sl * ((pa.rotation - pb.rotation) * joint.axis_naocs);
      row += 3;
    } else {
      const Mat3 m = pa.rotation * pb.rotation.transpose() - Mat3::Identity();
      for (int col = 0; col < 3; ++col) {
        r.segment<3>(row) = slm * m.col(col);
        row += 3;
      }
      const Vec3 delta = prismatic_delta(pa, g_[joint.part_a], pb,
                                         g_[joint.part_b]);
      r.segment<3>(row) =
          sl * (pa.rotation * joint.axis_naocs).cross(delta);
      row += 3;
      r.segment<3>(row) =
          sl * (pb.rotation * joint.axis_naocs).cross(delta);
      row += 3;
    }
  }
  return r;
}

Eigen::MatrixXd ConstrainedProblem::jacobian(
    const std::vector<SimilarityTransform>& poses) const {
  const double sl = std::sqrt(weights_.lambda);
  const double slm = std::sqrt(weights_.lambda * weights_.mu);
  Eigen::MatrixXd jac =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(residual_count()),
                            static_cast<Eigen::Index>(variable_count()));
  const auto wcol = [](int part) { return 6 * part; };
  const auto tcol = [](int part) { return 6 * part + 3; };

  Eigen::Index row = 0;
  for (std::size_t j = 0; j < part_data_.size(); ++j) {
    const double w = data_weight_[j];
    const int jj = static_cast<int>(j);
    for (const auto& [p, c] : part_data_[j]) {
      (void)p;
      // r = w (p - s R c - t): left-increment R <- exp(omega) R gives
      // d(R c) = -[R c]x omega
      jac.block<3, 3>(row, wcol(jj)) =
          w * poses[j].scale * skew(poses[j].rotation * c);
      jac.block<3, 3>(row, tcol(jj)) = -w * Mat3::Identity();
      row += 3;
    }
  }

  for (const ConstraintJoint& joint : joints_) {
    const SimilarityTransform& pa = poses[joint.part_a];
    const SimilarityTransform& pb = poses[joint.part_b];
    const int a = joint.part_a, b = joint.part_b;
    if (joint.type == JointType::revolute) {
      jac.block<3, 3>(row, wcol(a)) =
          -sl * skew(pa.rotation * joint.axis_naocs);
      jac.block<3, 3>(row, wcol(b)) =
          sl * skew(pb.rotation * joint.axis_naocs);
      row += 3;
      continue;
    }

    // rotation-identity block on M = Ra Rb^T: left-perturbing Ra gives
    // dM.col(c) = -[M.col(c)]x omega_a, perturbing Rb gives M [e_c]x omega_b
    const Mat3 m = pa.rotation * pb.rotation.transpose();
    for (int col = 0; col < 3; ++col) {
      jac.block<3, 3>(row, wcol(a)) = -slm * skew(m.col(col));
      jac.block<3, 3>(row, wcol(b)) = slm * m * skew(Vec3::Unit(col));
      row += 3;
    }

    // cross blocks r = [R_x u']x delta for x = a then x = b
    const Vec3 ua = pa.rotation * joint.axis_naocs;
    const Vec3 ub = pb.rotation * joint.axis_naocs;
    const Vec3 delta =
        prismatic_delta(pa, g_[joint.part_a], pb, g_[joint.part_b]);
    const double ca = pa.scale / g_[joint.part_a].scale;
    const double cb = pb.scale / g_[joint.part_b].scale;
    const Mat3 ddelta_wa = -ca * skew(pa.rotation * g_[joint.part_a].offset);
    const Mat3 ddelta_wb = cb * skew(pb.rotation * g_[joint.part_b].offset);

    jac.block<3, 3>(row, wcol(a)) =
        sl * (skew(delta) * skew(ua) + skew(ua) * ddelta_wa);
    jac.block<3, 3>(row, wcol(b)) = sl * skew(ua) * ddelta_wb;
    jac.block<3, 3>(row, tcol(a)) = -sl * skew(ua);
    jac.block<3, 3>(row, tcol(b)) = sl * skew(ua);
    row += 3;

    jac.block<3, 3>(row, wcol(b)) =
        sl * (skew(delta) * skew(ub) + skew(ub) * ddelta_wb);
    jac.block<3, 3>(row, wcol(a)) = sl * skew(ub) * ddelta_wa;
    jac.block<3, 3>(row, tcol(a)) = -sl * skew(ub);
    jac.block<3, 3>(row, tcol(b)) = sl * skew(ub);
    row += 3;
  }
  return jac;
}

std::vector<SimilarityTransform> ConstrainedProblem::retract(
    const std::vector<SimilarityTransform>& poses,
    const Eigen::VectorXd& dx) {
  std::vector<SimilarityTransform> out = poses;
  for (std::size_t j = 0; j < poses.size(); ++j) {
    out[j].rotation = exp_so3(dx.segment<3>(6 * j)) * poses[j].rotation;
    out[j].translation = poses[j].translation + dx.segment<3>(6 * j + 3);
  }
  return out;
}

PoseEstimate refine_constrained(const PoseEstimate& init,
                                const PredictionRecord& pred,
                                const PointCloud& points,
                                const std::vector<ConstraintJoint>& joints,
                                const std::vector<GTransform>& g,
                                const ConstraintWeights& weights,
                                const SolverConfig& solver_cfg) {
  const std::size_t m = init.poses.size();
  std::vector<std::vector<std::pair<Vec3, Vec3>>> part_data(m);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!init.inliers[i]) continue;
    const int j = pred.labels[i];
    if (j < 0 || static_cast<std::size_t>(j) >= m)
      throw CountMismatch("part label outside pose range");
    part_data[j].push_back({points[i], pred.npcs[i]});
  }
  // parts without a usable data term keep joint residuals only
  for (auto& data : part_data)
    if (data.size() < 3) data.clear();

  const ConstrainedProblem problem(std::move(part_data), joints, g, weights);

  PoseEstimate out = init;
  out.converged = false;
  double energy = problem.energy(out.poses);
  if (!std::isfinite(energy))
    throw SolverDiverged("non-finite energy at initialization");

  double damping = 1e-6;
  for (out.iterations = 0; out.iterations < solver_cfg.max_iterations;
       ++out.iterations) {
    const Eigen::VectorXd r = problem.residuals(out.poses);
    const Eigen::MatrixXd jac = problem.jacobian(out.poses);
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < solver_cfg.gradient_tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd diag = h.diagonal().cwiseMax(1e-12);

    bool stepped = false;
    while (damping < 1e15) {
      Eigen::MatrixXd damped = h;
      damped.diagonal() += damping * diag;
      const Eigen::VectorXd dx = damped.ldlt().solve(-grad);
      if (dx.allFinite()) {
        const std::vector<SimilarityTransform> cand =
            ConstrainedProblem::retract(out.poses, dx);
        const double cand_energy = problem.energy(cand);
        if (std::isfinite(cand_energy) && cand_energy < energy) {
          const double relative = (energy - cand_energy) /
                                  std::max(energy, 1e-300);
          out.poses = cand;
          energy = cand_energy;
          damping = std::max(damping * 0.3, 1e-12);
          stepped = true;
          if (relative < solver_cfg.relative_energy_tolerance)
            out.converged = true;
          break;
        }
      }
      damping *= 10.0;
    }
    if (!stepped) {
      // no descent direction left at any damping: accept the current
      // iterate as the solution
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.energy = energy;
  return out;
}

}  // namespace articulate
