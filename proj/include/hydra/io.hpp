// Copyright (c) 2026 The hydrabench authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hydra/geometry.hpp"
#include "hydra/tensor.hpp"

namespace hydra {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "hydrabench/1";

// ============================================================================
// PNG (8-bit RGB)
// ============================================================================

inline void write_png_rgb8(const std::string& path, const Tensor& image) {
  if (image.c != 3) throw IoError("write_png_rgb8 expects a 3-channel image");
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("libpng write failure: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.w),
               static_cast<png_uint_32>(image.h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(image.w) * 3);
  for (int y = 0; y < image.h; ++y) {
    for (int x = 0; x < image.w; ++x)
      for (int c = 0; c < 3; ++c)
        row[static_cast<std::size_t>(x) * 3 + c] = static_cast<png_byte>(
            std::lround(clamp01(image.at(c, y, x)) * 255.0));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

inline Tensor read_png_rgb8(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open for reading: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    std::fclose(fp);
    throw IoError("libpng read failure: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  Tensor image(3, h, w);
  std::vector<png_byte> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        image.at(c, y, x) = row[static_cast<std::size_t>(x) * 3 + c] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return image;
}

// ============================================================================
// Raw tensor sidecar (bit-exact doubles, little-endian host assumed)
// ============================================================================

inline void write_raw_tensor(const std::string& path, const Tensor& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  const char magic[4] = {'H', 'Y', 'T', 'R'};
  const std::uint32_t version = 1;
  f.write(magic, 4);
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&t.c), 4);
  f.write(reinterpret_cast<const char*>(&t.h), 4);
  f.write(reinterpret_cast<const char*>(&t.w), 4);
  f.write(reinterpret_cast<const char*>(t.v.data()),
          static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  if (!f) throw IoError("short write: " + path);
}

inline Tensor read_raw_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  char magic[4];
  std::uint32_t version = 0;
  Tensor t;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), 4);
  if (!f || std::string(magic, 4) != "HYTR" || version != 1)
    throw SchemaMismatch("bad raw tensor header: " + path);
  f.read(reinterpret_cast<char*>(&t.c), 4);
  f.read(reinterpret_cast<char*>(&t.h), 4);
  f.read(reinterpret_cast<char*>(&t.w), 4);
  if (!f || t.c < 0 || t.h < 0 || t.w < 0)
    throw SchemaMismatch("bad raw tensor dims: " + path);
  t.v.resize(static_cast<std::size_t>(t.c) * t.h * t.w);
  f.read(reinterpret_cast<char*>(t.v.data()),
         static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  if (!f) throw SchemaMismatch("truncated raw tensor: " + path);
  return t;
}

// ============================================================================
// JSON files
// ============================================================================

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
  if (!f) throw IoError("short write: " + path);
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw SchemaMismatch(std::string("malformed json: ") + path + ": " + e.what());
  }
  return j;
}

inline std::uint64_t hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot hash missing file: " + path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    h = fnv1a64(buf, static_cast<std::size_t>(f.gcount()), h);
  }
  return h;
}

// ============================================================================
// Calibration rig serialization
// ============================================================================

inline json calibration_to_json(const CameraCalibration& cam) {
  json j;
  j["view_id"] = cam.view_id;
  auto mat9 = [](const Eigen::Matrix3d& m) {
    std::vector<double> v(9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v[static_cast<std::size_t>(r) * 3 + c] = m(r, c);
    return v;
  };
  j["intrinsic"] = mat9(cam.intrinsic);
  j["rotation"] = mat9(cam.rotation);
  j["translation"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
  j["image_size"] = {cam.image_h, cam.image_w};
  return j;
}

inline CameraCalibration calibration_from_json(const json& j) {
  CameraCalibration cam;
  try {
    cam.view_id = j.at("view_id").get<int>();
    const auto ki = j.at("intrinsic").get<std::vector<double>>();
    const auto ro = j.at("rotation").get<std::vector<double>>();
    const auto tr = j.at("translation").get<std::vector<double>>();
    const auto sz = j.at("image_size").get<std::vector<int>>();
    if (ki.size() != 9 || ro.size() != 9 || tr.size() != 3 || sz.size() != 2)
      throw SchemaMismatch("calibration vector sizes");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        cam.intrinsic(r, c) = ki[static_cast<std::size_t>(r) * 3 + c];
        cam.rotation(r, c) = ro[static_cast<std::size_t>(r) * 3 + c];
      }
    cam.translation = Eigen::Vector3d(tr[0], tr[1], tr[2]);
    cam.image_h = sz[0];
    cam.image_w = sz[1];
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("calibration schema: ") + e.what());
  }
  return cam;
}

inline void save_rig(const std::string& dir, const std::vector<CameraCalibration>& rig) {
  std::filesystem::create_directories(dir);
  for (const auto& cam : rig)
    write_json_file(dir + "/view" + std::to_string(cam.view_id) + ".json",
                    calibration_to_json(cam));
}

inline std::vector<CameraCalibration> load_rig(const std::string& dir) {
  std::vector<CameraCalibration> rig;
  for (int k = 0;; ++k) {
    const std::string path = dir + "/view" + std::to_string(k) + ".json";
    if (!std::filesystem::exists(path)) break;
    rig.push_back(calibration_from_json(read_json_file(path)));
  }
  if (rig.empty()) throw SchemaMismatch("no calibration files in " + dir);
  return rig;
}

}  // namespace hydra
