// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "geossf/geometry.hpp"

#include <cmath>

#include "json.hpp"

namespace geossf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr std::size_t kMaxAttempts = 1000;
constexpr double kMinMicDistance = 0.005;  // resample threshold, 5 mm

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

std::string array_kind_name(ArrayKind kind) {
  switch (kind) {
    case ArrayKind::kCircular: return "circ";
    case ArrayKind::kUla: return "ula";
    case ArrayKind::kRandom: return "random";
  }
  return "random";
}

ArrayKind array_kind_from_name(const std::string& name) {
  if (name == "circ" || name == "circular") return ArrayKind::kCircular;
  if (name == "ula") return ArrayKind::kUla;
  if (name == "random") return ArrayKind::kRandom;
  throw ConfigError("unknown array kind '" + name + "' (circ|ula|random)");
}

Vec2 ArrayGeometry::centroid() const {
  Vec2 c;
  for (const auto& p : mic_xy) {
    c.x += p.x;
    c.y += p.y;
  }
  const double n = (double)mic_xy.size();
  return {c.x / n, c.y / n};
}

ArrayGeometry circular_array(std::size_t mics, double radius) {
  ArrayGeometry g;
  g.kind = ArrayKind::kCircular;
  g.reference_index = 0;
  for (std::size_t m = 0; m < mics; ++m) {
    const double a = kTwoPi * (double)m / (double)mics;
    g.mic_xy.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return g;
}

ArrayGeometry ula_array(std::size_t mics, double spacing) {
  ArrayGeometry g;
  g.kind = ArrayKind::kUla;
  g.reference_index = 0;
  const double half = spacing * (double)(mics - 1) / 2.0;
  for (std::size_t m = 0; m < mics; ++m)
    g.mic_xy.push_back({half - spacing * (double)m, 0.0});
  return g;
}

PolarForm to_polar(const ArrayGeometry& geom, double doa) {
  if (geom.mic_xy.size() < 2)
    throw DimensionError("array needs at least 2 microphones");
  if (geom.reference_index >= geom.mic_xy.size())
    throw DimensionError("reference microphone index out of range");
  const Vec2 c = geom.centroid();
  const Vec2 ref = geom.mic_xy[geom.reference_index];
  const double rx = ref.x - c.x, ry = ref.y - c.y;
  const double rnorm = std::hypot(rx, ry);
  if (rnorm < 1e-9)
    throw DegenerateError(
        "reference microphone coincides with the array centroid; the "
        "reference axis is undefined");
  const double axis = std::atan2(ry, rx);

  PolarForm polar;
  for (const auto& p : geom.mic_xy) {
    const double vx = p.x - c.x, vy = p.y - c.y;
    const double dist = std::hypot(vx, vy);
    polar.d.push_back(dist);
    polar.phi.push_back(dist > 0 ? wrap_angle(std::atan2(vy, vx) - axis) : 0.0);
  }
  polar.doa_theta = wrap_angle(doa - axis);
  return polar;
}

ArrayGeometry sample_geometry(ArrayKind kind, const SceneConfig& cfg,
                              std::mt19937_64& rng) {
  switch (kind) {
    case ArrayKind::kCircular:
      return circular_array(cfg.mics, cfg.circular_radius);
    case ArrayKind::kUla:
      return ula_array(cfg.mics, cfg.ula_spacing);
    case ArrayKind::kRandom:
      break;
  }
  if (cfg.random_extent <= 0) throw ConfigError("random array extent must be positive");
  const double half = cfg.random_extent / 2.0;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    ArrayGeometry g;
    g.kind = ArrayKind::kRandom;
    g.reference_index = 0;
    for (std::size_t m = 0; m < cfg.mics; ++m)
      g.mic_xy.push_back({uniform(rng, -half, half), uniform(rng, -half, half)});

    bool ok = true;
    for (std::size_t i = 0; ok && i < cfg.mics; ++i)
      for (std::size_t j = i + 1; ok && j < cfg.mics; ++j)
        ok = std::hypot(g.mic_xy[i].x - g.mic_xy[j].x,
                        g.mic_xy[i].y - g.mic_xy[j].y) >= kMinMicDistance;
    if (ok) {
      const Vec2 c = g.centroid();
      const Vec2 ref = g.mic_xy[g.reference_index];
      ok = std::hypot(ref.x - c.x, ref.y - c.y) >= kMinMicDistance;
    }
    if (ok) return g;
  }
  throw ConfigError("failed to sample a non-degenerate random array");
}

std::vector<std::array<double, 3>> Scene::mic_positions() const {
  std::vector<std::array<double, 3>> out;
  const double cr = std::cos(array_rotation), sr = std::sin(array_rotation);
  for (const auto& p : array.mic_xy)
    out.push_back({array_center.x + cr * p.x - sr * p.y,
                   array_center.y + sr * p.x + cr * p.y, array_height});
  return out;
}

PolarForm Scene::polar() const {
  // target_doa is already reference-axis relative; shift it by the local
  // axis angle so to_polar's subtraction lands back on the same value.
  const Vec2 c = array.centroid();
  const Vec2 ref = array.mic_xy[array.reference_index];
  const double axis = std::atan2(ref.y - c.y, ref.x - c.x);
  return to_polar(array, target_doa + axis);
}

double Scene::doa_of(const std::array<double, 3>& pos) const {
  const auto mics = mic_positions();
  Vec2 c{0, 0};
  for (const auto& m : mics) {
    c.x += m[0];
    c.y += m[1];
  }
  c.x /= (double)mics.size();
  c.y /= (double)mics.size();
  const auto& ref = mics[array.reference_index];
  const double axis = std::atan2(ref[1] - c.y, ref[0] - c.x);
  return wrap_angle(std::atan2(pos[1] - c.y, pos[0] - c.x) - axis);
}

Scene sample_scene(ArrayKind kind, const SceneConfig& cfg,
                   std::mt19937_64& rng, std::uint64_t seed) {
  if (cfg.room_width_min <= 2 * cfg.source_wall_margin ||
      cfg.room_length_min <= 2 * cfg.source_wall_margin)
    throw ConfigError("room too small for the source wall margin");

  Scene s;
  s.seed = seed;
  s.room = {uniform(rng, cfg.room_width_min, cfg.room_width_max),
            uniform(rng, cfg.room_length_min, cfg.room_length_max),
            uniform(rng, cfg.room_height_min, cfg.room_height_max)};
  s.t60 = uniform(rng, cfg.t60_min, cfg.t60_max);
  s.array = sample_geometry(kind, cfg, rng);
  s.array_height = cfg.array_height;

  // Keep every microphone at least 0.1 m inside the walls; the array
  // footprint stays within ~7 cm of its center.
  const double array_margin = 0.3;
  s.array_center = {uniform(rng, array_margin, s.room[0] - array_margin),
                    uniform(rng, array_margin, s.room[1] - array_margin)};
  s.array_rotation = uniform(rng, 0.0, kTwoPi);

  // Source region: room cross-section minus the wall margin, at least
  // source_array_min_dist from the array centroid, at the source height.
  const auto mics = s.mic_positions();
  Vec2 centroid{0, 0};
  for (const auto& m : mics) {
    centroid.x += m[0];
    centroid.y += m[1];
  }
  centroid.x /= (double)mics.size();
  centroid.y /= (double)mics.size();

  auto sample_source = [&](std::array<double, 3>& out) {
    for (std::size_t i = 0; i < kMaxAttempts; ++i) {
      const double x =
          uniform(rng, cfg.source_wall_margin, s.room[0] - cfg.source_wall_margin);
      const double y =
          uniform(rng, cfg.source_wall_margin, s.room[1] - cfg.source_wall_margin);
      if (std::hypot(x - centroid.x, y - centroid.y) >= cfg.source_array_min_dist) {
        out = {x, y, cfg.source_height};
        return true;
      }
    }
    return false;
  };

  if (!sample_source(s.target_pos))
    throw ConfigError("could not place the target source after 1000 attempts");

  const double min_sep = cfg.min_separation_deg * kPi / 180.0;
  bool placed = false;
  for (std::size_t i = 0; i < kMaxAttempts && !placed; ++i) {
    std::array<double, 3> cand;
    if (!sample_source(cand)) break;
    const double a_t = std::atan2(s.target_pos[1] - centroid.y,
                                  s.target_pos[0] - centroid.x);
    const double a_i = std::atan2(cand[1] - centroid.y, cand[0] - centroid.x);
    double sep = std::abs(wrap_angle(a_t - a_i));
    sep = std::min(sep, kTwoPi - sep);
    if (sep >= min_sep) {
      s.interferer_pos = cand;
      placed = true;
    }
  }
  if (!placed)
    throw ConfigError(
        "could not place the interferer with the required angular "
        "separation after 1000 attempts");

  s.target_doa = s.doa_of(s.target_pos);
  s.sir_db = uniform(rng, cfg.sir_min_db, cfg.sir_max_db);
  return s;
}

std::string scene_to_json(const Scene& s) {
  nlohmann::json j;
  j["room"] = {s.room[0], s.room[1], s.room[2]};
  j["t60"] = s.t60;
  j["array"]["kind"] = array_kind_name(s.array.kind);
  j["array"]["reference_index"] = s.array.reference_index;
  nlohmann::json mics = nlohmann::json::array();
  for (const auto& p : s.array.mic_xy) mics.push_back({p.x, p.y});
  j["array"]["mic_xy"] = mics;
  j["array"]["center"] = {s.array_center.x, s.array_center.y};
  j["array"]["rotation"] = s.array_rotation;
  j["array"]["height"] = s.array_height;
  j["target_pos"] = {s.target_pos[0], s.target_pos[1], s.target_pos[2]};
  j["interferer_pos"] = {s.interferer_pos[0], s.interferer_pos[1],
                         s.interferer_pos[2]};
  j["target_doa"] = s.target_doa;
  j["sir_db"] = s.sir_db;
  j["seed"] = s.seed;
  return j.dump();
}

Scene scene_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad scene record: ") + e.what());
  }
  try {
    Scene s;
    s.room = {j.at("room").at(0), j.at("room").at(1), j.at("room").at(2)};
    s.t60 = j.at("t60");
    const auto& a = j.at("array");
    s.array.kind = array_kind_from_name(a.at("kind"));
    s.array.reference_index = a.at("reference_index");
    for (const auto& p : a.at("mic_xy"))
      s.array.mic_xy.push_back({p.at(0), p.at(1)});
    s.array_center = {a.at("center").at(0), a.at("center").at(1)};
    s.array_rotation = a.at("rotation");
    s.array_height = a.at("height");
    s.target_pos = {j.at("target_pos").at(0), j.at("target_pos").at(1),
                    j.at("target_pos").at(2)};
    s.interferer_pos = {j.at("interferer_pos").at(0), j.at("interferer_pos").at(1),
                        j.at("interferer_pos").at(2)};
    s.target_doa = j.at("target_doa");
    s.sir_db = j.at("sir_db");
    s.seed = j.at("seed");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad scene record: ") + e.what());
  }
}

}  // namespace geossf
