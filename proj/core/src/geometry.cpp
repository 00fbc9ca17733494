#include "articulate/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "articulate/errors.hpp"

namespace articulate {

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 rotation_about_axis(const Vec3& unit_axis, double angle) {
  return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    // second-order series keeps the result orthonormal to machine precision
    const Mat3 k = skew(w);
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return rotation_about_axis(w / theta, theta);
}

std::vector<Vec3> OrientedBox::corners() const {
  std::vector<Vec3> out;
  out.reserve(8);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        out.push_back(center + rotation * Vec3(sx * half_extents.x(),
                                               sy * half_extents.y(),
                                               sz * half_extents.z()));
  return out;
}

bool OrientedBox::contains(const Vec3& p) const {
  const Vec3 local = rotation.transpose() * (p - center);
  return (local.cwiseAbs() - half_extents).maxCoeff() <= 0.0;
}

SimilarityTransform umeyama_fit(std::span<const Vec3> src,
                                std::span<const Vec3> dst,
                                bool with_scale) {
  const std::size_t n = src.size();
  if (n != dst.size()) throw DegenerateInput("umeyama_fit: size mismatch");
  if (n < 3) throw DegenerateInput("umeyama_fit: needs at least 3 points");

  Vec3 mu_src = Vec3::Zero(), mu_dst = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= static_cast<double>(n);
  mu_dst /= static_cast<double>(n);

  double var_src = 0.0;
  Mat3 cov = Mat3::Zero();  // cross-covariance dst x src
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 ds = src[i] - mu_src;
    const Vec3 dd = dst[i] - mu_dst;
    var_src += ds.squaredNorm();
    cov += dd * ds.transpose();
  }
  var_src /= static_cast<double>(n);
  cov /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0))
    throw DegenerateInput("umeyama_fit: collinear or coincident points");

  // reflection case: flip the smallest singular direction so det(R) = +1
  Vec3 sign = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    sign(2) = -1.0;

  SimilarityTransform out;
  out.rotation =
      svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();
  out.scale = with_scale ? sv.dot(sign) / var_src : 1.0;
  if (!(out.scale > 0.0))
    throw DegenerateInput("umeyama_fit: non-positive scale");
  out.translation = mu_dst - out.scale * (out.rotation * mu_src);
  return out;
}

double rotation_geodesic_deg(const Mat3& r1, const Mat3& r2) {
  const double c = ((r2 * r1.transpose()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

double line_to_line_distance(const Line3& a, const Line3& b) {
  const Vec3 n = a.direction.cross(b.direction);
  const Vec3 d = b.point - a.point;
  const double nn = n.norm();
  if (nn < 1e-9) {
    // parallel: point-to-line distance
    return (d - d.dot(a.direction) * a.direction).norm();
  }
  return std::abs(d.dot(n)) / nn;
}

namespace {

// bounding plane with outward unit normal; inside is normal . x <= offset
struct Plane {
  Vec3 normal;
  double offset;
  double signed_dist(const Vec3& p) const { return normal.dot(p) - offset; }
};

std::vector<Plane> box_planes(const OrientedBox& box) {
  std::vector<Plane> out;
  out.reserve(6);
  for (int axis = 0; axis < 3; ++axis)
    for (int s : {1, -1}) {
      const Vec3 n = s * box.rotation.col(axis);
      out.push_back({n, n.dot(box.center) + box.half_extents(axis)});
    }
  return out;
}

// Clip the segment p0 + t (p1 - p0), t in [0,1], to a box grown by slack;
// appends the clipped endpoints when the overlap is nonempty.
void clip_edge_to_box(const Vec3& p0, const Vec3& p1, const OrientedBox& box,
                      double slack, std::vector<Vec3>& pts) {
  const Vec3 q = box.rotation.transpose() * (p0 - box.center);
  const Vec3 e = box.rotation.transpose() * (p1 - p0);
  double t0 = 0.0, t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double h = box.half_extents(a) + slack;
    if (std::abs(e(a)) < 1e-30) {
      if (std::abs(q(a)) > h) return;
      continue;
    }
    double lo = (-h - q(a)) / e(a);
    double hi = (h - q(a)) / e(a);
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return;
  }
  const Vec3 d = p1 - p0;
  pts.push_back(p0 + t0 * d);
  pts.push_back(p0 + t1 * d);
}

void box_edge_points(const OrientedBox& box, const OrientedBox& other,
                     double slack, std::vector<Vec3>& pts) {
  const std::vector<Vec3> c = box.corners();
  // corners() varies z fastest, then y, then x
  static constexpr int kEdges[12][2] = {
      {0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
      {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
  };
  for (const auto& e : kEdges)
    clip_edge_to_box(c[e[0]], c[e[1]], other, slack, pts);
}

}  // namespace

double box_intersection_volume(const OrientedBox& a, const OrientedBox& b) {
  const double scale = std::max(
      {a.half_extents.maxCoeff(), b.half_extents.maxCoeff(), 1e-30});
  const double slack = 1e-9 * scale;   // keeps shared boundary geometry
  const double on_tol = 4e-9 * scale;  // point-to-plane gather tolerance

  // Every vertex of the intersection polytope involves three bounding
  // planes, at least two of which come from the same box, so it lies on a
  // box edge: clipping each box's edges to the other box enumerates all of
  // them. Plane-clipping approaches breed bowtie polygons when two faces
  // nearly coincide (the usual case for an estimated box scored against
  // ground truth); working from vertices sidesteps that.
  std::vector<Vec3> pts;
  box_edge_points(a, b, slack, pts);
  box_edge_points(b, a, slack, pts);
  if (pts.size() < 4) return 0.0;

  // candidate face planes; near-coincident pairs are merged so a shared face
  // is integrated once, and the tighter offset keeps the result conservative
  std::vector<Plane> planes = box_planes(a);
  for (const Plane& p : box_planes(b)) {
    bool merged = false;
    for (Plane& q : planes) {
      if (p.normal.dot(q.normal) >= 1.0 - 1e-10 &&
          std::abs(p.offset - q.offset) <= on_tol) {
        q.offset = std::min(q.offset, p.offset);
        merged = true;
        break;
      }
    }
    if (!merged) planes.push_back(p);
  }

  // divergence theorem over the faces; each face is the convex polygon of
  // the vertices on its plane, wound to match the outward normal
  double six_v = 0.0;
  std::vector<Vec3> face;
  for (const Plane& pl : planes) {
    face.clear();
    for (const Vec3& p : pts) {
      if (std::abs(pl.signed_dist(p)) > on_tol) continue;
      bool dup = false;
      for (const Vec3& q : face)
        if ((p - q).norm() <= 2.0 * on_tol) {
          dup = true;
          break;
        }
      if (!dup) face.push_back(p);
    }
    if (face.size() < 3) continue;
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : face) centroid += p;
    centroid /= static_cast<double>(face.size());
    // plane basis with u x v = normal, so ascending angle winds outward
    const Vec3 u = (std::abs(pl.normal.x()) < 0.9
                        ? pl.normal.cross(Vec3::UnitX())
                        : pl.normal.cross(Vec3::UnitY()))
                       .normalized();
    const Vec3 v = pl.normal.cross(u);
    std::sort(face.begin(), face.end(), [&](const Vec3& p, const Vec3& q) {
      const Vec3 dp = p - centroid, dq = q - centroid;
      return std::atan2(v.dot(dp), u.dot(dp)) <
             std::atan2(v.dot(dq), u.dot(dq));
    });
    for (std::size_t i = 1; i + 1 < face.size(); ++i)
      six_v += face[0].dot(face[i].cross(face[i + 1]));
  }
  return std::clamp(six_v / 6.0, 0.0, std::min(a.volume(), b.volume()));
}

double box_iou_3d(const OrientedBox& a, const OrientedBox& b) {
  const double inter = box_intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace articulate
