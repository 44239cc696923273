// Copyright (c) 2026 The hydrabench authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>

#include "hydra/scene.hpp"

using namespace hydra;

namespace {

SceneConfig small_config() {
  SceneConfig cfg;
  cfg.train_frames = 3;
  cfg.test_frames = 1;
  return cfg;
}

int count_local_maxima(const Tensor& map, double floor_value) {
  int count = 0;
  for (int y = 0; y < map.h; ++y)
    for (int x = 0; x < map.w; ++x) {
      const double v = map.at(0, y, x);
      if (v < floor_value) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1 && is_max; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= map.h || nx >= map.w) continue;
          if (map.at(0, ny, nx) > v) is_max = false;
        }
      if (is_max) ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("dataset generation is deterministic") {
  const SceneConfig cfg = small_config();
  const Dataset a = generate_dataset(cfg, 42);
  const Dataset b = generate_dataset(cfg, 42);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    REQUIRE(a.frames[i].images.size() == b.frames[i].images.size());
    for (std::size_t v = 0; v < a.frames[i].images.size(); ++v)
      CHECK(hash_tensor(a.frames[i].images[v]) == hash_tensor(b.frames[i].images[v]));
    CHECK(hash_tensor(a.frames[i].truth.occupancy.scores) ==
          hash_tensor(b.frames[i].truth.occupancy.scores));
  }

  const Dataset c = generate_dataset(cfg, 43);
  CHECK(hash_tensor(a.frames[0].images[0]) != hash_tensor(c.frames[0].images[0]));
}

TEST_CASE("empty scene renders background only") {
  SceneConfig cfg = small_config();
  cfg.min_pedestrians = 0;
  cfg.max_pedestrians = 0;
  const auto rig = make_rig(cfg);
  const MultiviewFrame frame = render_frame(cfg, make_scene_state(cfg, 5, 0), rig);

  CHECK(max_abs(frame.truth.occupancy.scores) == 0.0);
  CHECK(frame.truth.pedestrians.empty());
  for (const auto& m : frame.truth.head_maps) CHECK(max_abs(m) == 0.0);

  // Pure background plus noise: re-render without noise and compare spread.
  SceneConfig quiet = cfg;
  quiet.noise_sigma = 0.0;
  SceneState state = make_scene_state(cfg, 5, 0);
  const MultiviewFrame plain = render_frame(quiet, state, make_rig(quiet));
  double max_dev = 0.0;
  for (std::size_t i = 0; i < frame.images[0].v.size(); ++i)
    max_dev = std::max(max_dev, std::fabs(frame.images[0].v[i] - plain.images[0].v[i]));
  CHECK(max_dev > 0.0);
  CHECK(max_dev < 0.08);  // 6 sigma of the configured noise
}

TEST_CASE("single pedestrian at grid center is visible everywhere") {
  SceneConfig cfg = small_config();
  const auto rig = make_rig(cfg);

  SceneState state;
  state.frame_id = 0;
  state.texture_seed = 1;
  state.noise_seed = 2;
  Pedestrian p;
  p.id = 0;
  // center of grid cell (11, 11): origin + 11.5 * cell_size
  p.ground_position = Eigen::Vector2d(-0.125, -0.125);
  p.height = 1.8;
  p.width = 0.55;
  p.appearance_seed = 99;
  state.pedestrians.push_back(p);

  const MultiviewFrame frame = render_frame(cfg, state, rig);
  for (int v = 0; v < cfg.views; ++v) {
    const auto& pv = frame.truth.ped_views[0][static_cast<std::size_t>(v)];
    CHECK(pv.visible);
    const Eigen::Vector2d expected = world_to_pixel(
        rig[static_cast<std::size_t>(v)],
        {p.ground_position.x(), p.ground_position.y(), 0.0});
    CHECK((pv.foot_pixel - expected).norm() <= 1.0);
  }

  // The occupancy mode sits at the pedestrian's grid cell.
  int best_y = -1, best_x = -1;
  double best = -1.0;
  const auto& occ = frame.truth.occupancy.scores;
  for (int y = 0; y < occ.h; ++y)
    for (int x = 0; x < occ.w; ++x)
      if (occ.at(0, y, x) > best) {
        best = occ.at(0, y, x);
        best_y = y;
        best_x = x;
      }
  CHECK(best == Catch::Approx(1.0).margin(1e-9));
  CHECK(best_x == 11);
  CHECK(best_y == 11);
  CHECK(frame.truth.pedestrian_in_occupancy(0));
}

TEST_CASE("collinear pedestrians occlude in the aligned view only") {
  SceneConfig cfg = small_config();
  const auto rig = make_rig(cfg);

  // Two pedestrians on the ray from camera 0 through the scene center.
  const Eigen::Vector3d cam_pos = -rig[0].rotation.transpose() * rig[0].translation;
  const Eigen::Vector2d dir = (-cam_pos.head<2>()).normalized();

  SceneState state;
  state.frame_id = 0;
  state.texture_seed = 3;
  state.noise_seed = 4;
  for (int i = 0; i < 2; ++i) {
    Pedestrian p;
    p.id = i;
    p.ground_position = dir * (i == 0 ? -0.8 : 0.8);  // near vs far along the ray
    p.height = 1.8;
    p.width = 0.6;
    p.appearance_seed = 7 + static_cast<std::uint64_t>(i);
    state.pedestrians.push_back(p);
  }

  const MultiviewFrame frame = render_frame(cfg, state, rig);
  const auto& near_pv = frame.truth.ped_views[0];
  const auto& far_pv = frame.truth.ped_views[1];

  const double d0 = near_pv[0].depth, d1 = far_pv[0].depth;
  const std::size_t near_idx = d0 < d1 ? 0 : 1;
  const std::size_t far_idx = 1 - near_idx;
  const auto& nearer = frame.truth.ped_views[near_idx];
  const auto& farther = frame.truth.ped_views[far_idx];

  CHECK(nearer[0].visible);
  CHECK_FALSE(farther[0].visible);  // hidden behind the nearer one in view 0

  bool visible_elsewhere = false;
  for (int v = 1; v < cfg.views; ++v)
    if (farther[static_cast<std::size_t>(v)].visible) visible_elsewhere = true;
  CHECK(visible_elsewhere);
}

TEST_CASE("occupancy modes count pedestrians at >=3 cell separations") {
  SceneConfig cfg = small_config();
  cfg.min_pedestrians = 3;
  cfg.max_pedestrians = 3;
  cfg.min_separation = 3.5 * cfg.grid.cell_size;
  const auto rig = make_rig(cfg);
  for (int seed = 0; seed < 5; ++seed) {
    const SceneState state = make_scene_state(cfg, static_cast<std::uint64_t>(seed), 0);
    const MultiviewFrame frame = render_frame(cfg, state, rig);
    int in_occupancy = 0;
    for (std::size_t p = 0; p < state.pedestrians.size(); ++p)
      if (frame.truth.pedestrian_in_occupancy(static_cast<int>(p))) ++in_occupancy;
    CHECK(count_local_maxima(frame.truth.occupancy.scores, 0.5) == in_occupancy);
  }
}

TEST_CASE("impossible pedestrian density is rejected") {
  SceneConfig cfg = small_config();
  cfg.max_pedestrians = 500;
  CHECK_THROWS_AS(generate_dataset(cfg, 1), ConfigInvalid);
}

TEST_CASE("dataset persistence") {
  SceneConfig cfg = small_config();
  cfg.train_frames = 2;
  cfg.test_frames = 1;
  const Dataset ds = generate_dataset(cfg, 77);
  const std::string dir = std::filesystem::temp_directory_path() / "hydra_scene_rt";
  std::filesystem::remove_all(dir);
  persist_dataset(ds, dir);

  SECTION("raw round trip is bit exact") {
    const Dataset back = load_dataset(dir);
    REQUIRE(back.frames.size() == ds.frames.size());
    CHECK(back.train_count == ds.train_count);
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
      for (std::size_t v = 0; v < ds.frames[i].images.size(); ++v)
        CHECK(hash_tensor(back.frames[i].images[v]) ==
              hash_tensor(ds.frames[i].images[v]));
      CHECK(hash_tensor(back.frames[i].truth.occupancy.scores) ==
            hash_tensor(ds.frames[i].truth.occupancy.scores));
      REQUIRE(back.frames[i].truth.pedestrians.size() ==
              ds.frames[i].truth.pedestrians.size());
      for (std::size_t p = 0; p < ds.frames[i].truth.ped_views.size(); ++p)
        for (std::size_t v = 0; v < ds.frames[i].truth.ped_views[p].size(); ++v)
          CHECK(back.frames[i].truth.ped_views[p][v].visible ==
                ds.frames[i].truth.ped_views[p][v].visible);
    }
  }

  SECTION("png reload differs from raw by at most one quantization step") {
    const Tensor png = read_png_rgb8(std::string(dir) + "/frames/0/view0.png");
    const Tensor& raw = ds.frames[0].images[0];
    REQUIRE(png.same_shape(raw));
    double worst = 0.0;
    for (std::size_t i = 0; i < raw.v.size(); ++i)
      worst = std::max(worst, std::fabs(png.v[i] - raw.v[i]));
    CHECK(worst <= 1.0 / 255.0 + 1e-12);
  }

  SECTION("missing view file is a schema mismatch") {
    std::filesystem::remove(std::string(dir) + "/frames/1/view2.raw");
    CHECK_THROWS_AS(load_dataset(dir), SchemaMismatch);
  }

  SECTION("wrong schema version is rejected") {
    json meta = read_json_file(std::string(dir) + "/meta.json");
    meta["schema"] = "hydrabench/999";
    write_json_file(std::string(dir) + "/meta.json", meta);
    CHECK_THROWS_AS(load_dataset(dir), SchemaMismatch);
    meta["schema"] = kSchemaVersion;
    write_json_file(std::string(dir) + "/meta.json", meta);
  }

  std::filesystem::remove_all(dir);
}
