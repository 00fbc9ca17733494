#pragma once

#include <span>

#include "articulate/types.hpp"

namespace articulate {

// Least-squares similarity fit: minimizes sum ||dst_i - (s R src_i + t)||^2
// over s > 0, R in SO(3), t.  With with_scale = false, s is fixed to 1.
// Reflections are resolved by flipping the smallest singular direction so
// det(R) = +1 always holds.
// Throws DegenerateInput for fewer than 3 points or collinear/coincident
// sources (cross-covariance rank < 2).
SimilarityTransform umeyama_fit(std::span<const Vec3> src,
                                std::span<const Vec3> dst,
                                bool with_scale = true);

// Relative rotation angle in degrees, in [0, 180].
double rotation_geodesic_deg(const Mat3& r1, const Mat3& r2);

// Cross-product matrix: skew(v) * w == v x w.
Mat3 skew(const Vec3& v);

// Minimum distance between two infinite lines (parallel lines fall back to
// point-to-line distance when ||d_a x d_b|| < 1e-9).
double line_to_line_distance(const Line3& a, const Line3& b);

// Exact intersection volume of two oriented boxes: every vertex of the
// intersection polytope lies on an edge of one of the boxes, so the edges of
// each box are clipped against the other and the surviving points are grouped
// into faces per bounding plane; volume via the divergence theorem.
double box_intersection_volume(const OrientedBox& a, const OrientedBox& b);

// 3D intersection over union of two oriented boxes, in [0, 1].
double box_iou_3d(const OrientedBox& a, const OrientedBox& b);

}  // namespace articulate
