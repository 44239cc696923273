// Copyright (c) 2026 The hydrabench authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hydra/common.hpp"
#include "hydra/tensor.hpp"

namespace hydra {

// ============================================================================
// Domain types
// ============================================================================

// Pinhole camera. Convention: x_cam = R * x_world + t, camera looks along
// +z_cam, pixel = normalize(K * x_cam). Depth is the z component of x_cam.
struct CameraCalibration {
  int view_id = 0;
  Eigen::Matrix3d intrinsic = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int image_h = 0, image_w = 0;
};

// Discretization of the z=0 world plane. Cell (iy, ix) has its center at
// origin + ((ix + 0.5), (iy + 0.5)) * cell_size.
struct GroundGrid {
  Eigen::Vector2d origin = {0.0, 0.0};  // meters
  double cell_size = 1.0;               // meters per cell
  int gy = 0, gx = 0;                   // shape (G_y, G_x)

  Eigen::Vector2d cell_center(int iy, int ix) const {
    return origin + Eigen::Vector2d((ix + 0.5) * cell_size, (iy + 0.5) * cell_size);
  }
  // Continuous cell coordinates (x=column, y=row) of a world point.
  Eigen::Vector2d world_to_cell(const Eigen::Vector2d& p) const {
    return {(p.x() - origin.x()) / cell_size - 0.5,
            (p.y() - origin.y()) / cell_size - 0.5};
  }
  bool contains(const Eigen::Vector2d& p) const {
    const Eigen::Vector2d d = p - origin;
    return d.x() >= 0.0 && d.y() >= 0.0 && d.x() < gx * cell_size &&
           d.y() < gy * cell_size;
  }
};

inline void validate_grid(const GroundGrid& g) {
  if (!(g.cell_size > 0.0)) throw ConfigInvalid("GroundGrid: cell_size must be > 0");
  if (g.gy < 8 || g.gx < 8) throw ConfigInvalid("GroundGrid: shape components must be >= 8");
}

// Half-open pixel rectangle [px_min, px_max) x [py_min, py_max) on one view.
struct PatchPlacement {
  int view_id = 0;
  int instance_id = 0;
  int px_min = 0, px_max = 0, py_min = 0, py_max = 0;

  int width() const { return px_max - px_min; }
  int height() const { return py_max - py_min; }
  long area() const { return static_cast<long>(width()) * height(); }
};

inline void validate_calibration(const CameraCalibration& cam) {
  const Eigen::Matrix3d rtr = cam.rotation.transpose() * cam.rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw CalibrationInvalid("rotation is not orthonormal");
  const Eigen::Matrix3d& k = cam.intrinsic;
  if (!(k(0, 0) > 0.0) || !(k(1, 1) > 0.0))
    throw CalibrationInvalid("intrinsic focal entries must be positive");
  if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0)
    throw CalibrationInvalid("intrinsic lower triangle must be zero");
  if (cam.image_h <= 0 || cam.image_w <= 0)
    throw CalibrationInvalid("image_size must be positive");
}

// ============================================================================
// Projection
// ============================================================================

inline double camera_depth(const CameraCalibration& cam, const Eigen::Vector3d& world) {
  return (cam.rotation * world + cam.translation).z();
}

inline Eigen::Vector2d world_to_pixel(const CameraCalibration& cam,
                                      const Eigen::Vector3d& world) {
  const Eigen::Vector3d pc = cam.rotation * world + cam.translation;
  if (pc.z() <= 1e-9) throw NonPositiveDepth("point has non-positive camera depth");
  const Eigen::Vector3d uvw = cam.intrinsic * pc;
  return {uvw.x() / uvw.z(), uvw.y() / uvw.z()};
}

inline bool pixel_in_image(const CameraCalibration& cam, const Eigen::Vector2d& px) {
  return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < cam.image_w && px.y() < cam.image_h;
}

// Homography from homogeneous ground-plane coordinates (x, y, 1) to
// homogeneous pixels: the (0, 1, 3) columns of K [R | t].
inline Eigen::Matrix3d ground_homography(const CameraCalibration& cam) {
  Eigen::Matrix3d m;
  m.col(0) = cam.rotation.col(0);
  m.col(1) = cam.rotation.col(1);
  m.col(2) = cam.translation;
  const Eigen::Matrix3d h = cam.intrinsic * m;
  if (std::fabs(h.determinant()) <= 1e-12)
    throw SingularHomography("ground homography is not invertible");
  return h;
}

inline Eigen::Vector2d apply_homography(const Eigen::Matrix3d& h,
                                        const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

// ============================================================================
// Cross-view placement transfer
// ============================================================================

// Transfers a patch rectangle from a source view to a destination view.
//
// The rect is anchored at the carrier's ground position: its corners move
// with the local similarity of phi = H_dst * H_src^{-1} at the anchor pixel
// (translation to the anchor's destination pixel, isotropic scale
// sqrt(|det J_phi|)). det J of a projective map at p is det(H) / w^3 with
// w the third homogeneous coordinate, so the A->B and B->A scales are exact
// inverses and round trips reproduce the rect up to integer rounding.
// Worn patches stay upright in every view, so the rotational part of phi is
// deliberately not applied.
//
// Returns nullopt when the mapped rect, clipped to the destination image,
// covers less than 4 px^2.
inline std::optional<PatchPlacement> transfer_placement(
    const PatchPlacement& src, const CameraCalibration& src_cam,
    const CameraCalibration& dst_cam, const Eigen::Vector2d& anchor_ground) {
  const Eigen::Vector3d anchor3(anchor_ground.x(), anchor_ground.y(), 0.0);
  Eigen::Vector2d p_src, p_dst;
  try {
    p_src = world_to_pixel(src_cam, anchor3);
    p_dst = world_to_pixel(dst_cam, anchor3);
  } catch (const NonPositiveDepth&) {
    throw AnchorNotVisible("anchor is behind a camera");
  }
  if (!pixel_in_image(src_cam, p_src) || !pixel_in_image(dst_cam, p_dst))
    throw AnchorNotVisible("anchor projects outside an image");

  const Eigen::Matrix3d h_src = ground_homography(src_cam);
  const Eigen::Matrix3d h_dst = ground_homography(dst_cam);
  const Eigen::Matrix3d phi = h_dst * h_src.inverse();
  const double w = phi.row(2).dot(Eigen::Vector3d(p_src.x(), p_src.y(), 1.0));
  const double det_j = phi.determinant() / (w * w * w);
  const double scale = std::sqrt(std::fabs(det_j));

  const double x0 = p_dst.x() + scale * (src.px_min - p_src.x());
  const double x1 = p_dst.x() + scale * (src.px_max - p_src.x());
  const double y0 = p_dst.y() + scale * (src.py_min - p_src.y());
  const double y1 = p_dst.y() + scale * (src.py_max - p_src.y());

  PatchPlacement out;
  out.view_id = dst_cam.view_id;
  out.instance_id = src.instance_id;
  out.px_min = std::max(0, static_cast<int>(std::lround(std::min(x0, x1))));
  out.px_max = std::min(dst_cam.image_w, static_cast<int>(std::lround(std::max(x0, x1))));
  out.py_min = std::max(0, static_cast<int>(std::lround(std::min(y0, y1))));
  out.py_max = std::min(dst_cam.image_h, static_cast<int>(std::lround(std::max(y0, y1))));
  if (out.px_min >= out.px_max || out.py_min >= out.py_max) return std::nullopt;
  if (out.area() < 4) return std::nullopt;
  return out;
}

// ============================================================================
// Source / destination split
// ============================================================================

struct ViewSplit {
  struct Group {
    int source_view = 0;
    std::vector<int> destination_views;  // excludes the source
  };
  std::vector<Group> groups;
  bool degenerate = false;  // parity fallback was used
};

inline Eigen::Vector3d optical_axis(const CameraCalibration& cam) {
  return cam.rotation.row(2).transpose();  // camera +z in world coordinates
}

// Partitions the rig into two sets of cameras facing each other, keyed on the
// sign of the horizontal optical-axis component, and designates the
// lowest-indexed camera of each set as its source. Rigs whose axes are all
// parallel (or all on one side) cannot face each other; those fall back to an
// index-parity split and set the degenerate flag.
inline ViewSplit split_views(const std::vector<CameraCalibration>& calibs) {
  if (calibs.size() < 2) throw DegenerateRig("split_views needs at least 2 views");

  bool all_parallel = true;
  const Eigen::Vector3d a0 = optical_axis(calibs[0]);
  for (const auto& c : calibs)
    if (optical_axis(c).cross(a0).norm() > 1e-6) all_parallel = false;

  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < calibs.size(); ++i) {
    const Eigen::Vector3d ax = optical_axis(calibs[i]);
    double key = ax.x();
    if (std::fabs(key) <= 1e-6) key = ax.y();  // side-facing tie break
    (key >= 0.0 ? pos : neg).push_back(static_cast<int>(i));
  }

  ViewSplit split;
  if (all_parallel || pos.empty() || neg.empty()) {
    split.degenerate = true;
    pos.clear();
    neg.clear();
    for (std::size_t i = 0; i < calibs.size(); ++i)
      (i % 2 == 0 ? pos : neg).push_back(static_cast<int>(i));
  }
  for (const auto* set : {&pos, &neg}) {
    if (set->empty()) continue;
    ViewSplit::Group g;
    g.source_view = (*set)[0];
    for (std::size_t i = 1; i < set->size(); ++i)
      g.destination_views.push_back((*set)[i]);
    split.groups.push_back(std::move(g));
  }
  return split;
}

// ============================================================================
// Differentiable region warping (bilinear, align-corners)
// ============================================================================

namespace detail {

struct BilinearTap {
  int i0, i1;
  double w0, w1;
};

inline BilinearTap bilinear_tap(int out_i, int out_n, int src_n) {
  const double pos = (out_n == 1) ? 0.0
                                  : static_cast<double>(out_i) * (src_n - 1) / (out_n - 1);
  BilinearTap t;
  t.i0 = static_cast<int>(std::floor(pos));
  if (t.i0 > src_n - 2) t.i0 = std::max(0, src_n - 2);
  t.i1 = std::min(t.i0 + 1, src_n - 1);
  t.w1 = pos - t.i0;
  t.w0 = 1.0 - t.w1;
  return t;
}

}  // namespace detail

// Align-corners bilinear resize; equal sizes reproduce the source exactly.
inline Tensor resize_bilinear(const Tensor& src, int oh, int ow) {
  if (oh < 1 || ow < 1) throw BadSize("resize_bilinear: empty output");
  Tensor out(src.c, oh, ow);
  for (int y = 0; y < oh; ++y) {
    const auto ty = detail::bilinear_tap(y, oh, src.h);
    for (int x = 0; x < ow; ++x) {
      const auto tx = detail::bilinear_tap(x, ow, src.w);
      for (int ci = 0; ci < src.c; ++ci) {
        out.at(ci, y, x) = ty.w0 * (tx.w0 * src.at(ci, ty.i0, tx.i0) +
                                    tx.w1 * src.at(ci, ty.i0, tx.i1)) +
                           ty.w1 * (tx.w0 * src.at(ci, ty.i1, tx.i0) +
                                    tx.w1 * src.at(ci, ty.i1, tx.i1));
      }
    }
  }
  return out;
}

// Adjoint of resize_bilinear: scatters d_out back onto the source shape.
inline void resize_bilinear_backward(const Tensor& d_out, int sh, int sw,
                                     Tensor& d_src_accum) {
  if (d_src_accum.c != d_out.c || d_src_accum.h != sh || d_src_accum.w != sw)
    throw ShapeMismatch("resize_bilinear_backward");
  for (int y = 0; y < d_out.h; ++y) {
    const auto ty = detail::bilinear_tap(y, d_out.h, sh);
    for (int x = 0; x < d_out.w; ++x) {
      const auto tx = detail::bilinear_tap(x, d_out.w, sw);
      for (int ci = 0; ci < d_out.c; ++ci) {
        const double g = d_out.at(ci, y, x);
        d_src_accum.at(ci, ty.i0, tx.i0) += ty.w0 * tx.w0 * g;
        d_src_accum.at(ci, ty.i0, tx.i1) += ty.w0 * tx.w1 * g;
        d_src_accum.at(ci, ty.i1, tx.i0) += ty.w1 * tx.w0 * g;
        d_src_accum.at(ci, ty.i1, tx.i1) += ty.w1 * tx.w1 * g;
      }
    }
  }
}

inline void check_rect_in_image(const Tensor& image, const PatchPlacement& rect) {
  if (rect.px_min < 0 || rect.py_min < 0 || rect.px_min >= rect.px_max ||
      rect.py_min >= rect.py_max || rect.px_max > image.w || rect.py_max > image.h)
    throw RectOutOfBounds("placement rect outside image bounds");
}

// Resamples the patch into the rect and overwrites those pixels in place.
// d(output pixel)/d(patch value) is the corresponding bilinear weight.
inline void warp_region_inplace(Tensor& image, const Tensor& patch,
                                const PatchPlacement& rect) {
  check_rect_in_image(image, rect);
  const Tensor resized = resize_bilinear(patch, rect.height(), rect.width());
  for (int ci = 0; ci < image.c; ++ci)
    for (int y = 0; y < rect.height(); ++y)
      for (int x = 0; x < rect.width(); ++x)
        image.at(ci, rect.py_min + y, rect.px_min + x) = resized.at(ci, y, x);
}

inline Tensor warp_region(const Tensor& image, const Tensor& patch,
                          const PatchPlacement& rect) {
  Tensor out = image;
  warp_region_inplace(out, patch, rect);
  return out;
}

// Accumulates d(loss)/d(patch) given d(loss)/d(image) over the warped rect.
inline void warp_region_backward(const Tensor& d_image, const PatchPlacement& rect,
                                 Tensor& d_patch_accum) {
  check_rect_in_image(d_image, rect);
  Tensor d_rect(d_image.c, rect.height(), rect.width());
  for (int ci = 0; ci < d_image.c; ++ci)
    for (int y = 0; y < rect.height(); ++y)
      for (int x = 0; x < rect.width(); ++x)
        d_rect.at(ci, y, x) = d_image.at(ci, rect.py_min + y, rect.px_min + x);
  resize_bilinear_backward(d_rect, d_patch_accum.h, d_patch_accum.w, d_patch_accum);
}

}  // namespace hydra
