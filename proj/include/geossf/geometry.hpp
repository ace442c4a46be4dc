// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Microphone-array geometries, the centroid/reference-axis polar convention,
// and random scene sampling. All azimuths are counter-clockwise radians in
// [0, 2pi); the reference axis runs from the array centroid through the
// reference microphone and is the zero direction for every angle.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "geossf/error.hpp"

namespace geossf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class ArrayKind { kCircular, kUla, kRandom };

std::string array_kind_name(ArrayKind kind);
ArrayKind array_kind_from_name(const std::string& name);

struct ArrayGeometry {
  std::vector<Vec2> mic_xy;       // array-local planar coordinates, meters
  std::size_t reference_index = 0;
  ArrayKind kind = ArrayKind::kRandom;

  Vec2 centroid() const;
};

// Defaults match a 10 cm array footprint.
ArrayGeometry circular_array(std::size_t mics = 4, double radius = 0.05);
ArrayGeometry ula_array(std::size_t mics = 4, double spacing = 0.033);

struct PolarForm {
  std::vector<double> phi;  // per-mic azimuth from the reference axis
  std::vector<double> d;    // per-mic distance to the centroid
  double doa_theta = 0.0;   // target DOA in the same frame
};

// Wrap an angle to [0, 2pi).
double wrap_angle(double a);

// Re-express mic positions and a DOA (given in the frame of mic_xy) in the
// centroid/reference-axis polar form. Throws DegenerateError if the
// reference microphone coincides with the centroid.
PolarForm to_polar(const ArrayGeometry& geom, double doa);

struct SceneConfig {
  std::size_t mics = 4;
  double room_width_min = 2.5, room_width_max = 5.0;
  double room_length_min = 3.0, room_length_max = 9.0;
  double room_height_min = 2.2, room_height_max = 3.5;
  double t60_min = 0.2, t60_max = 0.5;
  double sir_min_db = -5.0, sir_max_db = 10.0;
  double source_height = 1.6;
  double array_height = 1.6;
  double min_separation_deg = 20.0;
  double source_wall_margin = 0.5;
  double source_array_min_dist = 0.5;
  double random_extent = 0.10;   // side of the random-array square, meters
  double circular_radius = 0.05;
  double ula_spacing = 0.033;
};

struct Scene {
  std::array<double, 3> room{};   // width (x), length (y), height (z)
  double t60 = 0.0;
  ArrayGeometry array;
  Vec2 array_center;
  double array_rotation = 0.0;    // CCW radians, local -> world
  double array_height = 1.6;
  std::array<double, 3> target_pos{};
  std::array<double, 3> interferer_pos{};
  double target_doa = 0.0;        // reference-axis frame
  double sir_db = 0.0;
  std::uint64_t seed = 0;

  // World-frame microphone positions at array height.
  std::vector<std::array<double, 3>> mic_positions() const;
  // Polar form of the array with the target DOA, world frame.
  PolarForm polar() const;
  // Reference-axis DOA of an arbitrary world point seen from the centroid.
  double doa_of(const std::array<double, 3>& pos) const;
};

ArrayGeometry sample_geometry(ArrayKind kind, const SceneConfig& cfg,
                              std::mt19937_64& rng);

// Samples a full scene: room, T60, array pose, two sources with >= 20 deg
// separation, SIR. Throws ConfigError when 1000 rejection attempts fail.
Scene sample_scene(ArrayKind kind, const SceneConfig& cfg,
                   std::mt19937_64& rng, std::uint64_t seed);

// Line-oriented structured-text (JSON) record of one scene.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

}  // namespace geossf
