// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <random>

#include "doctest.h"
#include "geossf/geometry.hpp"

using namespace geossf;

namespace {
constexpr double kPi = 3.14159265358979323846;

ArrayGeometry rotate_translate(const ArrayGeometry& g, double psi, Vec2 t) {
  ArrayGeometry out = g;
  const double c = std::cos(psi), s = std::sin(psi);
  for (auto& p : out.mic_xy)
    p = {c * p.x - s * p.y + t.x, s * p.x + c * p.y + t.y};
  return out;
}
}  // namespace

TEST_CASE("to_polar on the circular array") {
  auto g = circular_array(4, 0.05);
  auto polar = to_polar(g, 0.0);
  const double expect_phi[4] = {0.0, kPi / 2, kPi, 3 * kPi / 2};
  for (int m = 0; m < 4; ++m) {
    CHECK(polar.d[m] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(polar.phi[m] == doctest::Approx(expect_phi[m]).epsilon(1e-9));
  }
}

TEST_CASE("to_polar on the ULA: hand-worked distances and angles") {
  const double s = 0.033;
  auto g = ula_array(4, s);
  auto polar = to_polar(g, 0.0);
  const double expect_d[4] = {1.5 * s, 0.5 * s, 0.5 * s, 1.5 * s};
  const double expect_phi[4] = {0.0, 0.0, kPi, kPi};
  for (int m = 0; m < 4; ++m) {
    CHECK(polar.d[m] == doctest::Approx(expect_d[m]).epsilon(1e-12));
    CHECK(polar.phi[m] == doctest::Approx(expect_phi[m]).epsilon(1e-9));
  }
}

TEST_CASE("to_polar rejects a reference microphone at the centroid") {
  ArrayGeometry g;
  g.mic_xy = {{0.0, 0.0}, {0.03, 0.0}, {-0.03, 0.0}};  // mic 0 is the centroid
  g.reference_index = 0;
  CHECK_THROWS_AS(to_polar(g, 0.0), DegenerateError);
}

TEST_CASE("polar form is invariant under rigid motions") {
  std::mt19937_64 rng(99);
  SceneConfig cfg;
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = sample_geometry(ArrayKind::kRandom, cfg, rng);
    const double doa = angle(rng);
    auto base = to_polar(g, doa);

    const double psi = angle(rng);
    auto moved = rotate_translate(g, psi, {shift(rng), shift(rng)});
    auto rotated = to_polar(moved, doa + psi);

    CHECK(std::abs(rotated.doa_theta - base.doa_theta) < 1e-10);
    for (std::size_t m = 0; m < g.mic_xy.size(); ++m) {
      CHECK(std::abs(rotated.d[m] - base.d[m]) < 1e-10);
      double dphi = std::abs(rotated.phi[m] - base.phi[m]);
      dphi = std::min(dphi, 2 * kPi - dphi);
      CHECK(dphi < 1e-10);
    }
  }
}

TEST_CASE("sampled random arrays stay within the square extent") {
  std::mt19937_64 rng(7);
  SceneConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    auto g = sample_geometry(ArrayKind::kRandom, cfg, rng);
    for (const auto& p : g.mic_xy) {
      CHECK(std::abs(p.x) <= 0.05);
      CHECK(std::abs(p.y) <= 0.05);
    }
  }
}

TEST_CASE("circular kind distances equal the radius") {
  std::mt19937_64 rng(8);
  SceneConfig cfg;
  auto g = sample_geometry(ArrayKind::kCircular, cfg, rng);
  auto polar = to_polar(g, 1.0);
  for (double d : polar.d) CHECK(d == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("geometry sampling is deterministic per seed") {
  SceneConfig cfg;
  std::mt19937_64 a(12345), b(12345);
  auto ga = sample_geometry(ArrayKind::kRandom, cfg, a);
  auto gb = sample_geometry(ArrayKind::kRandom, cfg, b);
  REQUIRE(ga.mic_xy.size() == gb.mic_xy.size());
  for (std::size_t i = 0; i < ga.mic_xy.size(); ++i) {
    CHECK(ga.mic_xy[i].x == gb.mic_xy[i].x);
    CHECK(ga.mic_xy[i].y == gb.mic_xy[i].y);
  }
}

TEST_CASE("sampled scenes honor the configured ranges") {
  SceneConfig cfg;
  std::mt19937_64 rng(31);
  double min_sep = 1e9;
  for (int i = 0; i < 10000; ++i) {
    Scene s = sample_scene(ArrayKind::kRandom, cfg, rng, (std::uint64_t)i);
    CHECK(s.room[0] >= 2.5);
    CHECK(s.room[0] <= 5.0);
    CHECK(s.room[1] >= 3.0);
    CHECK(s.room[1] <= 9.0);
    CHECK(s.room[2] >= 2.2);
    CHECK(s.room[2] <= 3.5);
    CHECK(s.t60 >= 0.2);
    CHECK(s.t60 <= 0.5);
    CHECK(s.sir_db >= -5.0);
    CHECK(s.sir_db <= 10.0);

    // everything strictly inside with margin
    for (const auto& m : s.mic_positions()) {
      CHECK(m[0] > 0.1);
      CHECK(m[0] < s.room[0] - 0.1);
      CHECK(m[1] > 0.1);
      CHECK(m[1] < s.room[1] - 0.1);
    }
    for (const auto* p : {&s.target_pos, &s.interferer_pos}) {
      CHECK((*p)[0] >= 0.1);
      CHECK((*p)[0] <= s.room[0] - 0.1);
      CHECK((*p)[1] >= 0.1);
      CHECK((*p)[1] <= s.room[1] - 0.1);
      CHECK((*p)[2] == 1.6);
    }

    const double a_t = s.doa_of(s.target_pos);
    const double a_i = s.doa_of(s.interferer_pos);
    double sep = std::abs(a_t - a_i);
    sep = std::min(sep, 2 * kPi - sep);
    min_sep = std::min(min_sep, sep);
  }
  CHECK(min_sep >= 20.0 * kPi / 180.0 - 1e-9);
}

TEST_CASE("scene sampling is deterministic per seed") {
  SceneConfig cfg;
  std::mt19937_64 a(777), b(777);
  Scene sa = sample_scene(ArrayKind::kCircular, cfg, a, 777);
  Scene sb = sample_scene(ArrayKind::kCircular, cfg, b, 777);
  CHECK(scene_to_json(sa) == scene_to_json(sb));
}

TEST_CASE("unsatisfiable scene config fails after bounded attempts") {
  SceneConfig cfg;
  cfg.source_array_min_dist = 100.0;  // no valid source position exists
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sample_scene(ArrayKind::kRandom, cfg, rng, 1), ConfigError);
}

TEST_CASE("scene record round-trips through JSON") {
  SceneConfig cfg;
  std::mt19937_64 rng(55);
  Scene s = sample_scene(ArrayKind::kUla, cfg, rng, 55);
  Scene r = scene_from_json(scene_to_json(s));
  CHECK(scene_to_json(r) == scene_to_json(s));
  CHECK(r.target_doa == doctest::Approx(s.target_doa).epsilon(1e-15));
  CHECK(r.array.mic_xy.size() == s.array.mic_xy.size());
}

TEST_CASE("scene target_doa matches doa_of(target_pos)") {
  SceneConfig cfg;
  std::mt19937_64 rng(66);
  for (int i = 0; i < 50; ++i) {
    Scene s = sample_scene(ArrayKind::kRandom, cfg, rng, (std::uint64_t)i);
    CHECK(s.target_doa == doctest::Approx(s.doa_of(s.target_pos)).epsilon(1e-12));
  }
}
