// Copyright (c) 2026 The hydrabench authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "hydra/geometry.hpp"
#include "hydra/io.hpp"
#include "hydra/tensor.hpp"

namespace hydra {

// ============================================================================
// Domain types
// ============================================================================

struct Pedestrian {
  int id = 0;
  Eigen::Vector2d ground_position = {0.0, 0.0};  // meters
  double height = 1.7;                           // meters, [1.5, 2.0]
  double width = 0.55;                           // meters, [0.4, 0.7]
  std::uint64_t appearance_seed = 0;
};

struct OccupancyMap {
  GroundGrid grid;
  Tensor scores;  // (1, G_y, G_x), values in [0, 1]
};

// Per-pedestrian, per-view annotation.
struct PedView {
  bool visible = false;          // >= visibility threshold of the body unoccluded
  PatchPlacement body_rect;      // projected body bbox clipped to the image
  Eigen::Vector2d head_pixel = {0.0, 0.0};
  Eigen::Vector2d foot_pixel = {0.0, 0.0};
  double depth = 0.0;
};

struct GroundTruth {
  OccupancyMap occupancy;                    // target g
  std::vector<Tensor> head_maps, foot_maps;  // per view, (1, H', W')
  std::vector<Pedestrian> pedestrians;
  std::vector<std::vector<PedView>> ped_views;  // [pedestrian][view]

  bool pedestrian_in_occupancy(int ped) const {
    for (const auto& pv : ped_views[static_cast<std::size_t>(ped)])
      if (pv.visible) return true;
    return false;
  }
};

struct MultiviewFrame {
  int frame_id = 0;
  std::vector<Tensor> images;  // N views, (3, H, W) in [0, 1]
  GroundTruth truth;
};

struct SceneConfig {
  int views = 4;
  int image_h = 96, image_w = 96;
  GroundGrid grid{{-3.0, -3.0}, 0.25, 24, 24};
  int min_pedestrians = 1, max_pedestrians = 5;
  int train_frames = 200, test_frames = 40;
  double min_separation = 0.6;  // meters between pedestrians
  double noise_sigma = 0.01;
  double visibility_threshold = 0.30;
  // Camera rig: cameras on a circle looking inward.
  double camera_radius = 6.0;
  double camera_height = 2.8;
  double focal = 64.0;
  double look_at_height = 0.8;
  // Ground-truth encoding.
  int map_downsample = 4;             // head/foot maps live at 1/4 image scale
  double occupancy_sigma_cells = 1.0;
  double headfoot_sigma_px = 2.0;     // at map resolution
};

struct SceneState {
  int frame_id = 0;
  std::vector<Pedestrian> pedestrians;
  std::uint64_t texture_seed = 0;
  std::uint64_t noise_seed = 0;
};

struct Dataset {
  SceneConfig config;
  std::uint64_t seed = 0;
  std::vector<CameraCalibration> rig;
  std::vector<MultiviewFrame> frames;
  int train_count = 0;

  std::vector<const MultiviewFrame*> train_frames() const {
    std::vector<const MultiviewFrame*> out;
    for (int i = 0; i < train_count; ++i) out.push_back(&frames[static_cast<std::size_t>(i)]);
    return out;
  }
  std::vector<const MultiviewFrame*> test_frames() const {
    std::vector<const MultiviewFrame*> out;
    for (std::size_t i = static_cast<std::size_t>(train_count); i < frames.size(); ++i)
      out.push_back(&frames[i]);
    return out;
  }
};

// ============================================================================
// Rig construction
// ============================================================================

namespace detail {

inline CameraCalibration lookat_camera(int view_id, const Eigen::Vector3d& position,
                                       const Eigen::Vector3d& target, double focal,
                                       int image_h, int image_w) {
  Eigen::Vector3d fwd = (target - position).normalized();
  Eigen::Vector3d up(0.0, 0.0, 1.0);
  if (fwd.cross(up).norm() < 1e-8) up = Eigen::Vector3d(0.0, 1.0, 0.0);
  const Eigen::Vector3d xc = fwd.cross(up).normalized();
  const Eigen::Vector3d yc = fwd.cross(xc);
  CameraCalibration cam;
  cam.view_id = view_id;
  cam.rotation.row(0) = xc.transpose();
  cam.rotation.row(1) = yc.transpose();
  cam.rotation.row(2) = fwd.transpose();
  cam.translation = -cam.rotation * position;
  cam.intrinsic << focal, 0.0, (image_w - 1) / 2.0,
                   0.0, focal, (image_h - 1) / 2.0,
                   0.0, 0.0, 1.0;
  cam.image_h = image_h;
  cam.image_w = image_w;
  return cam;
}

}  // namespace detail

// Cameras at the diagonal corners of the scene, evenly spaced on a circle so
// split_views gets two sets facing each other.
inline std::vector<CameraCalibration> make_rig(const SceneConfig& cfg) {
  const Eigen::Vector2d center =
      cfg.grid.origin + 0.5 * cfg.grid.cell_size *
                            Eigen::Vector2d(cfg.grid.gx, cfg.grid.gy);
  std::vector<CameraCalibration> rig;
  for (int k = 0; k < cfg.views; ++k) {
    const double ang = M_PI / 4.0 + 2.0 * M_PI * k / cfg.views;
    const Eigen::Vector3d pos(center.x() + cfg.camera_radius * std::cos(ang),
                              center.y() + cfg.camera_radius * std::sin(ang),
                              cfg.camera_height);
    const Eigen::Vector3d tgt(center.x(), center.y(), cfg.look_at_height);
    rig.push_back(detail::lookat_camera(k, pos, tgt, cfg.focal, cfg.image_h,
                                        cfg.image_w));
  }
  return rig;
}

// ============================================================================
// Procedural textures
// ============================================================================

namespace detail {

inline double lattice_noise(std::uint64_t seed, double x, double y) {
  const auto xi = static_cast<std::int64_t>(std::floor(x));
  const auto yi = static_cast<std::int64_t>(std::floor(y));
  const double fx = x - xi, fy = y - yi;
  auto corner = [&](std::int64_t cx, std::int64_t cy) {
    Rng r(mix_seed(seed, (static_cast<std::uint64_t>(cx) * 0x632BE59BD9B4E019ULL) ^
                             static_cast<std::uint64_t>(cy)));
    return r.uniform();
  };
  const double n00 = corner(xi, yi), n01 = corner(xi + 1, yi);
  const double n10 = corner(xi, yi + 1), n11 = corner(xi + 1, yi + 1);
  return (1.0 - fy) * ((1.0 - fx) * n00 + fx * n01) +
         fy * ((1.0 - fx) * n10 + fx * n11);
}

inline void ground_color(std::uint64_t seed, double wx, double wy, double* rgb) {
  const double coarse = lattice_noise(seed, wx * 1.1, wy * 1.1);
  const double fine = lattice_noise(seed ^ 0x5851F42D4C957F2DULL, wx * 3.7, wy * 3.7);
  const double v = 0.6 * coarse + 0.4 * fine - 0.5;
  rgb[0] = clamp01(0.44 + 0.22 * v);
  rgb[1] = clamp01(0.46 + 0.22 * v);
  rgb[2] = clamp01(0.42 + 0.20 * v);
}

struct PedStyle {
  double torso_a[3], torso_b[3], pants[3], skin[3];
  int stripes = 4;
  bool vertical = false;
};

inline PedStyle make_ped_style(std::uint64_t appearance_seed) {
  Rng r(mix_seed(appearance_seed, 0xA11CE5EEDULL));
  PedStyle s;
  for (double& x : s.torso_a) x = r.uniform(0.08, 0.92);
  // force contrast between the two torso colors
  for (int i = 0; i < 3; ++i) {
    s.torso_b[i] = s.torso_a[i] + (s.torso_a[i] > 0.5 ? -1.0 : 1.0) * r.uniform(0.35, 0.6);
    s.torso_b[i] = clamp01(s.torso_b[i]);
  }
  for (double& x : s.pants) x = r.uniform(0.08, 0.35);
  s.skin[0] = 0.83;
  s.skin[1] = 0.68;
  s.skin[2] = 0.57;
  s.stripes = r.uniform_int(3, 6);
  s.vertical = (r.next_u64() & 1) != 0;
  return s;
}

// Billboard silhouette + texture in normalized body coordinates
// (u across width, v from head 0 to foot 1). Returns false outside the body.
inline bool ped_color(const PedStyle& s, double u, double v, double* rgb) {
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return false;
  if (v < 0.14) {  // head
    const double du = (u - 0.5) / 0.30, dv = (v - 0.075) / 0.072;
    if (du * du + dv * dv > 1.0) return false;
    std::copy(s.skin, s.skin + 3, rgb);
    return true;
  }
  if (v < 0.17) {  // neck
    if (std::fabs(u - 0.5) > 0.08) return false;
    std::copy(s.skin, s.skin + 3, rgb);
    return true;
  }
  if (v < 0.58) {  // torso with stripes
    const double t = s.vertical ? u : (v - 0.17) / 0.41;
    const int idx = static_cast<int>(std::floor(t * s.stripes));
    const double* c = (idx % 2 == 0) ? s.torso_a : s.torso_b;
    std::copy(c, c + 3, rgb);
    return true;
  }
  // legs
  if (std::fabs(u - 0.5) > 0.40) return false;
  if (v > 0.66 && std::fabs(u - 0.5) < 0.07) return false;  // gap between legs
  std::copy(s.pants, s.pants + 3, rgb);
  return true;
}

}  // namespace detail

// ============================================================================
// Rendering
// ============================================================================

namespace detail {

struct ProjectedPed {
  int ped = 0;
  bool in_front = false;
  Eigen::Vector2d head_px, foot_px;
  double half_width_px = 0.0;
  double depth = 0.0;
};

inline ProjectedPed project_ped(const Pedestrian& p, const CameraCalibration& cam) {
  ProjectedPed out;
  out.ped = p.id;
  const Eigen::Vector3d foot(p.ground_position.x(), p.ground_position.y(), 0.0);
  const Eigen::Vector3d head(p.ground_position.x(), p.ground_position.y(), p.height);
  const double depth = camera_depth(cam, foot);
  if (depth <= 0.5) return out;  // behind or unrenderably close
  out.in_front = true;
  out.depth = depth;
  out.foot_px = world_to_pixel(cam, foot);
  out.head_px = world_to_pixel(cam, head);
  out.half_width_px = 0.5 * p.width * cam.intrinsic(0, 0) / depth;
  return out;
}

}  // namespace detail

// Painter's-algorithm rendering of one view; fills the id buffer with the
// front-most pedestrian per pixel (-1 for background).
inline Tensor render_view(const SceneConfig& cfg, const SceneState& state,
                          const CameraCalibration& cam,
                          std::vector<int>* id_buffer_out = nullptr,
                          std::vector<detail::ProjectedPed>* projections_out = nullptr) {
  Tensor image(3, cfg.image_h, cfg.image_w);
  const Eigen::Matrix3d h_inv = ground_homography(cam).inverse();

  // Ground plane and sky.
  const double sky[3] = {0.63, 0.67, 0.73};
  for (int y = 0; y < cfg.image_h; ++y)
    for (int x = 0; x < cfg.image_w; ++x) {
      const Eigen::Vector3d g = h_inv * Eigen::Vector3d(x, y, 1.0);
      double rgb[3];
      bool is_ground = std::fabs(g.z()) > 1e-12;
      if (is_ground) {
        const Eigen::Vector2d p(g.x() / g.z(), g.y() / g.z());
        const double depth =
            camera_depth(cam, Eigen::Vector3d(p.x(), p.y(), 0.0));
        if (depth <= 0.2 || p.norm() > 60.0) {
          is_ground = false;
        } else {
          detail::ground_color(state.texture_seed, p.x(), p.y(), rgb);
        }
      }
      for (int c = 0; c < 3; ++c)
        image.at(c, y, x) = is_ground ? rgb[c] : sky[c];
    }

  // Pedestrians, far to near.
  std::vector<detail::ProjectedPed> projs;
  for (const auto& ped : state.pedestrians) projs.push_back(detail::project_ped(ped, cam));
  std::vector<std::size_t> order(projs.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return projs[a].depth > projs[b].depth;
  });

  std::vector<int> id_buffer(static_cast<std::size_t>(cfg.image_h) * cfg.image_w, -1);
  for (std::size_t oi : order) {
    const auto& pp = projs[oi];
    if (!pp.in_front) continue;
    const auto& ped = state.pedestrians[oi];
    const detail::PedStyle style = detail::make_ped_style(ped.appearance_seed);
    const double body_h = pp.foot_px.y() - pp.head_px.y();
    if (body_h < 1.0 || body_h > 8.0 * cfg.image_h) continue;
    const int y0 = std::max(0, static_cast<int>(std::floor(pp.head_px.y())));
    const int y1 = std::min(cfg.image_h - 1, static_cast<int>(std::ceil(pp.foot_px.y())));
    for (int y = y0; y <= y1; ++y) {
      const double v = (y - pp.head_px.y()) / body_h;
      const double cx = pp.head_px.x() + v * (pp.foot_px.x() - pp.head_px.x());
      const int x0 = std::max(0, static_cast<int>(std::floor(cx - pp.half_width_px)));
      const int x1 = std::min(cfg.image_w - 1,
                              static_cast<int>(std::ceil(cx + pp.half_width_px)));
      for (int x = x0; x <= x1; ++x) {
        const double u = (x - (cx - pp.half_width_px)) / (2.0 * pp.half_width_px);
        double rgb[3];
        if (!detail::ped_color(style, u, v, rgb)) continue;
        for (int c = 0; c < 3; ++c) image.at(c, y, x) = rgb[c];
        id_buffer[static_cast<std::size_t>(y) * cfg.image_w + x] = ped.id;
      }
    }
  }

  // Sensor noise.
  Rng noise(mix_seed(state.noise_seed, static_cast<std::uint64_t>(cam.view_id) + 101));
  for (auto& px : image.v) px = clamp01(px + cfg.noise_sigma * noise.normal());

  if (id_buffer_out) *id_buffer_out = std::move(id_buffer);
  if (projections_out) *projections_out = std::move(projs);
  return image;
}

namespace detail {

inline void splat_max(Tensor& map, double cx, double cy, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  const int iy0 = std::max(0, static_cast<int>(std::floor(cy)) - radius);
  const int iy1 = std::min(map.h - 1, static_cast<int>(std::ceil(cy)) + radius);
  const int ix0 = std::max(0, static_cast<int>(std::floor(cx)) - radius);
  const int ix1 = std::min(map.w - 1, static_cast<int>(std::ceil(cx)) + radius);
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double d2 = (ix - cx) * (ix - cx) + (iy - cy) * (iy - cy);
      const double val = std::exp(-d2 / (2.0 * sigma * sigma));
      double& cell = map.at(0, iy, ix);
      cell = std::max(cell, val);
    }
}

// Counts body-texture pixels: total over the unclipped silhouette and the
// subset still owned by this pedestrian in the id buffer.
inline void coverage_counts(const SceneConfig& cfg, const ProjectedPed& pp,
                            const PedStyle& style, const std::vector<int>& id_buffer,
                            long* total, long* visible) {
  *total = 0;
  *visible = 0;
  const double body_h = pp.foot_px.y() - pp.head_px.y();
  if (!pp.in_front || body_h < 1.0 || body_h > 8.0 * cfg.image_h) return;
  const int y0 = static_cast<int>(std::floor(pp.head_px.y()));
  const int y1 = static_cast<int>(std::ceil(pp.foot_px.y()));
  for (int y = y0; y <= y1; ++y) {
    const double v = (y - pp.head_px.y()) / body_h;
    const double cx = pp.head_px.x() + v * (pp.foot_px.x() - pp.head_px.x());
    const int x0 = static_cast<int>(std::floor(cx - pp.half_width_px));
    const int x1 = static_cast<int>(std::ceil(cx + pp.half_width_px));
    for (int x = x0; x <= x1; ++x) {
      const double u = (x - (cx - pp.half_width_px)) / (2.0 * pp.half_width_px);
      double rgb[3];
      if (!ped_color(style, u, v, rgb)) continue;
      ++*total;
      if (y >= 0 && y < cfg.image_h && x >= 0 && x < cfg.image_w &&
          id_buffer[static_cast<std::size_t>(y) * cfg.image_w + x] == pp.ped)
        ++*visible;
    }
  }
}

}  // namespace detail

inline MultiviewFrame render_frame(const SceneConfig& cfg, const SceneState& state,
                                   const std::vector<CameraCalibration>& rig) {
  if (static_cast<int>(rig.size()) != cfg.views)
    throw ConfigInvalid("rig size does not match configured view count");

  MultiviewFrame frame;
  frame.frame_id = state.frame_id;
  frame.truth.pedestrians = state.pedestrians;
  frame.truth.ped_views.assign(state.pedestrians.size(),
                               std::vector<PedView>(rig.size()));

  const int fh = cfg.image_h / cfg.map_downsample;
  const int fw = cfg.image_w / cfg.map_downsample;

  for (std::size_t vi = 0; vi < rig.size(); ++vi) {
    std::vector<int> id_buffer;
    std::vector<detail::ProjectedPed> projs;
    frame.images.push_back(render_view(cfg, state, rig[vi], &id_buffer, &projs));

    for (std::size_t pi = 0; pi < state.pedestrians.size(); ++pi) {
      const auto& pp = projs[pi];
      PedView pv;
      if (pp.in_front) {
        pv.head_pixel = pp.head_px;
        pv.foot_pixel = pp.foot_px;
        pv.depth = pp.depth;
        pv.body_rect.view_id = static_cast<int>(vi);
        pv.body_rect.instance_id = static_cast<int>(pi);
        pv.body_rect.px_min =
            std::max(0, static_cast<int>(std::floor(pp.head_px.x() - pp.half_width_px)));
        pv.body_rect.px_max = std::min(
            cfg.image_w, static_cast<int>(std::ceil(pp.foot_px.x() + pp.half_width_px)));
        pv.body_rect.py_min = std::max(0, static_cast<int>(std::floor(pp.head_px.y())));
        pv.body_rect.py_max =
            std::min(cfg.image_h, static_cast<int>(std::ceil(pp.foot_px.y())));
        long total = 0, visible = 0;
        detail::coverage_counts(cfg, pp, detail::make_ped_style(
                                             state.pedestrians[pi].appearance_seed),
                                id_buffer, &total, &visible);
        pv.visible = total > 0 && static_cast<double>(visible) / total >=
                                      cfg.visibility_threshold;
      }
      frame.truth.ped_views[pi][vi] = pv;
    }
  }

  // Target maps.
  frame.truth.occupancy.grid = cfg.grid;
  frame.truth.occupancy.scores = Tensor(1, cfg.grid.gy, cfg.grid.gx);
  for (std::size_t vi = 0; vi < rig.size(); ++vi) {
    frame.truth.head_maps.emplace_back(1, fh, fw);
    frame.truth.foot_maps.emplace_back(1, fh, fw);
  }
  for (std::size_t pi = 0; pi < state.pedestrians.size(); ++pi) {
    if (!frame.truth.pedestrian_in_occupancy(static_cast<int>(pi))) continue;
    const Eigen::Vector2d cell =
        cfg.grid.world_to_cell(state.pedestrians[pi].ground_position);
    detail::splat_max(frame.truth.occupancy.scores, cell.x(), cell.y(),
                      cfg.occupancy_sigma_cells);
    for (std::size_t vi = 0; vi < rig.size(); ++vi) {
      const auto& pv = frame.truth.ped_views[pi][vi];
      if (!pv.visible) continue;
      detail::splat_max(frame.truth.head_maps[vi],
                        pv.head_pixel.x() / cfg.map_downsample,
                        pv.head_pixel.y() / cfg.map_downsample, cfg.headfoot_sigma_px);
      detail::splat_max(frame.truth.foot_maps[vi],
                        pv.foot_pixel.x() / cfg.map_downsample,
                        pv.foot_pixel.y() / cfg.map_downsample, cfg.headfoot_sigma_px);
    }
  }
  return frame;
}

// ============================================================================
// Dataset generation
// ============================================================================

inline void validate_scene_config(const SceneConfig& cfg) {
  validate_grid(cfg.grid);
  if (cfg.views < 2) throw ConfigInvalid("scene: need at least 2 views");
  if (cfg.image_h < 32 || cfg.image_w < 32)
    throw ConfigInvalid("scene: image size must be at least 32x32");
  if (cfg.image_h % cfg.map_downsample != 0 || cfg.image_w % cfg.map_downsample != 0)
    throw ConfigInvalid("scene: image size must be divisible by map_downsample");
  if (cfg.min_pedestrians < 0 || cfg.max_pedestrians < cfg.min_pedestrians)
    throw ConfigInvalid("scene: bad pedestrian count range");
  if (cfg.train_frames < 0 || cfg.test_frames < 0)
    throw ConfigInvalid("scene: negative frame counts");
  if (!(cfg.min_separation > 0.0)) throw ConfigInvalid("scene: min_separation must be > 0");

  const double margin = 0.3;
  const double ax = cfg.grid.gx * cfg.grid.cell_size - 2.0 * margin;
  const double ay = cfg.grid.gy * cfg.grid.cell_size - 2.0 * margin;
  if (ax <= 0.0 || ay <= 0.0 ||
      cfg.max_pedestrians * cfg.min_separation * cfg.min_separation > ax * ay)
    throw ConfigInvalid("scene: grid cannot hold max_pedestrians at min separation");
}

inline SceneState make_scene_state(const SceneConfig& cfg, std::uint64_t seed,
                                   int frame_id) {
  SceneState state;
  state.frame_id = frame_id;
  state.texture_seed = mix_seed(seed, 0x747874ULL);  // shared across frames
  state.noise_seed = mix_seed(seed, 0x6E6F69ULL + static_cast<std::uint64_t>(frame_id));

  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(frame_id) + 0xF00DULL));
  const int count = rng.uniform_int(cfg.min_pedestrians, cfg.max_pedestrians);
  const double margin = 0.3;
  const Eigen::Vector2d lo = cfg.grid.origin + Eigen::Vector2d(margin, margin);
  const Eigen::Vector2d hi =
      cfg.grid.origin +
      Eigen::Vector2d(cfg.grid.gx * cfg.grid.cell_size - margin,
                      cfg.grid.gy * cfg.grid.cell_size - margin);
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      const Eigen::Vector2d pos(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
      bool ok = true;
      for (const auto& other : state.pedestrians)
        if ((other.ground_position - pos).norm() < cfg.min_separation) ok = false;
      if (!ok) continue;
      Pedestrian p;
      p.id = i;
      p.ground_position = pos;
      p.height = rng.uniform(1.5, 2.0);
      p.width = rng.uniform(0.4, 0.7);
      p.appearance_seed = rng.next_u64();
      state.pedestrians.push_back(p);
      placed = true;
    }
    if (!placed)
      throw ConfigInvalid("scene: failed to place pedestrians at min separation");
  }
  return state;
}

inline Dataset generate_dataset(const SceneConfig& cfg, std::uint64_t seed) {
  validate_scene_config(cfg);
  Dataset ds;
  ds.config = cfg;
  ds.seed = seed;
  ds.rig = make_rig(cfg);
  ds.train_count = cfg.train_frames;
  const int total = cfg.train_frames + cfg.test_frames;
  ds.frames.resize(static_cast<std::size_t>(total));
  parallel_for(total, [&](int i) {
    ds.frames[static_cast<std::size_t>(i)] =
        render_frame(cfg, make_scene_state(cfg, seed, i), ds.rig);
  });
  return ds;
}

// ============================================================================
// Persistence
// ============================================================================

inline json scene_config_to_json(const SceneConfig& c) {
  return json{{"views", c.views},
              {"image_h", c.image_h},
              {"image_w", c.image_w},
              {"grid_origin", {c.grid.origin.x(), c.grid.origin.y()}},
              {"grid_cell_size", c.grid.cell_size},
              {"grid_shape", {c.grid.gy, c.grid.gx}},
              {"min_pedestrians", c.min_pedestrians},
              {"max_pedestrians", c.max_pedestrians},
              {"train_frames", c.train_frames},
              {"test_frames", c.test_frames},
              {"min_separation", c.min_separation},
              {"noise_sigma", c.noise_sigma},
              {"visibility_threshold", c.visibility_threshold},
              {"camera_radius", c.camera_radius},
              {"camera_height", c.camera_height},
              {"focal", c.focal},
              {"look_at_height", c.look_at_height},
              {"map_downsample", c.map_downsample},
              {"occupancy_sigma_cells", c.occupancy_sigma_cells},
              {"headfoot_sigma_px", c.headfoot_sigma_px}};
}

inline SceneConfig scene_config_from_json(const json& j) {
  SceneConfig c;
  try {
    c.views = j.at("views").get<int>();
    c.image_h = j.at("image_h").get<int>();
    c.image_w = j.at("image_w").get<int>();
    c.grid.origin = Eigen::Vector2d(j.at("grid_origin")[0].get<double>(),
                                    j.at("grid_origin")[1].get<double>());
    c.grid.cell_size = j.at("grid_cell_size").get<double>();
    c.grid.gy = j.at("grid_shape")[0].get<int>();
    c.grid.gx = j.at("grid_shape")[1].get<int>();
    c.min_pedestrians = j.at("min_pedestrians").get<int>();
    c.max_pedestrians = j.at("max_pedestrians").get<int>();
    c.train_frames = j.at("train_frames").get<int>();
    c.test_frames = j.at("test_frames").get<int>();
    c.min_separation = j.at("min_separation").get<double>();
    c.noise_sigma = j.at("noise_sigma").get<double>();
    c.visibility_threshold = j.at("visibility_threshold").get<double>();
    c.camera_radius = j.at("camera_radius").get<double>();
    c.camera_height = j.at("camera_height").get<double>();
    c.focal = j.at("focal").get<double>();
    c.look_at_height = j.at("look_at_height").get<double>();
    c.map_downsample = j.at("map_downsample").get<int>();
    c.occupancy_sigma_cells = j.at("occupancy_sigma_cells").get<double>();
    c.headfoot_sigma_px = j.at("headfoot_sigma_px").get<double>();
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("scene config: missing or bad field: ") + e.what());
  }
  return c;
}

namespace detail {

inline json truth_to_json(const GroundTruth& t) {
  json j;
  j["occupancy"] = t.occupancy.scores.v;
  json heads = json::array(), feet = json::array();
  for (const auto& m : t.head_maps) heads.push_back(m.v);
  for (const auto& m : t.foot_maps) feet.push_back(m.v);
  j["head_maps"] = heads;
  j["foot_maps"] = feet;
  json peds = json::array();
  for (const auto& p : t.pedestrians)
    peds.push_back(json{{"id", p.id},
                        {"ground_position", {p.ground_position.x(), p.ground_position.y()}},
                        {"height", p.height},
                        {"width", p.width},
                        {"appearance_seed", p.appearance_seed}});
  j["pedestrians"] = peds;
  json pviews = json::array();
  for (const auto& per_ped : t.ped_views) {
    json row = json::array();
    for (const auto& pv : per_ped)
      row.push_back(json{
          {"visible", pv.visible},
          {"body_rect", {pv.body_rect.px_min, pv.body_rect.px_max, pv.body_rect.py_min,
                         pv.body_rect.py_max}},
          {"head_pixel", {pv.head_pixel.x(), pv.head_pixel.y()}},
          {"foot_pixel", {pv.foot_pixel.x(), pv.foot_pixel.y()}},
          {"depth", pv.depth}});
    pviews.push_back(row);
  }
  j["ped_views"] = pviews;
  return j;
}

inline GroundTruth truth_from_json(const json& j, const SceneConfig& cfg) {
  GroundTruth t;
  try {
    t.occupancy.grid = cfg.grid;
    t.occupancy.scores = Tensor(1, cfg.grid.gy, cfg.grid.gx);
    t.occupancy.scores.v = j.at("occupancy").get<std::vector<double>>();
    if (t.occupancy.scores.v.size() !=
        static_cast<std::size_t>(cfg.grid.gy) * cfg.grid.gx)
      throw SchemaMismatch("occupancy size");
    const int fh = cfg.image_h / cfg.map_downsample;
    const int fw = cfg.image_w / cfg.map_downsample;
    for (const auto& m : j.at("head_maps")) {
      Tensor mt(1, fh, fw);
      mt.v = m.get<std::vector<double>>();
      if (mt.v.size() != static_cast<std::size_t>(fh) * fw)
        throw SchemaMismatch("head map size");
      t.head_maps.push_back(std::move(mt));
    }
    for (const auto& m : j.at("foot_maps")) {
      Tensor mt(1, fh, fw);
      mt.v = m.get<std::vector<double>>();
      if (mt.v.size() != static_cast<std::size_t>(fh) * fw)
        throw SchemaMismatch("foot map size");
      t.foot_maps.push_back(std::move(mt));
    }
    for (const auto& p : j.at("pedestrians")) {
      Pedestrian ped;
      ped.id = p.at("id").get<int>();
      ped.ground_position = Eigen::Vector2d(p.at("ground_position")[0].get<double>(),
                                            p.at("ground_position")[1].get<double>());
      ped.height = p.at("height").get<double>();
      ped.width = p.at("width").get<double>();
      ped.appearance_seed = p.at("appearance_seed").get<std::uint64_t>();
      t.pedestrians.push_back(ped);
    }
    for (const auto& row : j.at("ped_views")) {
      std::vector<PedView> per_ped;
      int vi = 0;
      for (const auto& e : row) {
        PedView pv;
        pv.visible = e.at("visible").get<bool>();
        const auto& r = e.at("body_rect");
        pv.body_rect =
            PatchPlacement{vi, static_cast<int>(t.ped_views.size()), r[0].get<int>(),
                           r[1].get<int>(), r[2].get<int>(), r[3].get<int>()};
        pv.head_pixel = Eigen::Vector2d(e.at("head_pixel")[0].get<double>(),
                                        e.at("head_pixel")[1].get<double>());
        pv.foot_pixel = Eigen::Vector2d(e.at("foot_pixel")[0].get<double>(),
                                        e.at("foot_pixel")[1].get<double>());
        pv.depth = e.at("depth").get<double>();
        per_ped.push_back(pv);
        ++vi;
      }
      t.ped_views.push_back(std::move(per_ped));
    }
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("truth schema: ") + e.what());
  }
  return t;
}

}  // namespace detail

inline void persist_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json meta;
  meta["schema"] = kSchemaVersion;
  meta["seed"] = ds.seed;
  meta["config"] = scene_config_to_json(ds.config);
  meta["frame_count"] = ds.frames.size();
  meta["train_count"] = ds.train_count;
  write_json_file(dir + "/meta.json", meta);
  save_rig(dir + "/calib", ds.rig);
  for (const auto& frame : ds.frames) {
    const std::string fdir = dir + "/frames/" + std::to_string(frame.frame_id);
    fs::create_directories(fdir);
    for (std::size_t vi = 0; vi < frame.images.size(); ++vi) {
      write_png_rgb8(fdir + "/view" + std::to_string(vi) + ".png", frame.images[vi]);
      write_raw_tensor(fdir + "/view" + std::to_string(vi) + ".raw", frame.images[vi]);
    }
    write_json_file(fdir + "/truth.json", detail::truth_to_json(frame.truth));
  }
}

inline Dataset load_dataset(const std::string& dir) {
  const json meta = read_json_file(dir + "/meta.json");
  if (!meta.contains("schema") || meta.at("schema").get<std::string>() != kSchemaVersion)
    throw SchemaMismatch("dataset schema version mismatch in " + dir);
  Dataset ds;
  ds.config = scene_config_from_json(meta.at("config"));
  ds.seed = meta.at("seed").get<std::uint64_t>();
  ds.train_count = meta.at("train_count").get<int>();
  const auto frame_count = meta.at("frame_count").get<std::size_t>();
  ds.rig = load_rig(dir + "/calib");
  if (static_cast<int>(ds.rig.size()) != ds.config.views)
    throw SchemaMismatch("dataset rig does not match configured view count");
  for (std::size_t fi = 0; fi < frame_count; ++fi) {
    const std::string fdir = dir + "/frames/" + std::to_string(fi);
    MultiviewFrame frame;
    frame.frame_id = static_cast<int>(fi);
    for (int vi = 0; vi < ds.config.views; ++vi) {
      const std::string raw = fdir + "/view" + std::to_string(vi) + ".raw";
      if (!std::filesystem::exists(raw))
        throw SchemaMismatch("missing view file: " + raw);
      frame.images.push_back(read_raw_tensor(raw));
    }
    frame.truth = detail::truth_from_json(read_json_file(fdir + "/truth.json"), ds.config);
    ds.frames.push_back(std::move(frame));
  }
  return ds;
}

}  // namespace hydra
