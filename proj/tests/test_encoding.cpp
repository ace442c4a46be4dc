// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "geossf/encoding.hpp"

using namespace geossf;

namespace {
constexpr double kPi = 3.14159265358979323846;

PolarForm random_polar(std::size_t mics, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  std::uniform_real_distribution<double> dist(0.0, 0.1);
  PolarForm p;
  for (std::size_t m = 0; m < mics; ++m) {
    p.phi.push_back(angle(rng));
    p.d.push_back(dist(rng));
  }
  p.doa_theta = angle(rng);
  return p;
}
}  // namespace

TEST_CASE("doa_onehot binning") {
  auto v0 = doa_onehot(0.0);
  CHECK(v0[0] == 1.0);
  CHECK(std::count(v0.begin(), v0.end(), 1.0) == 1);

  auto v90 = doa_onehot(90.0 * kPi / 180.0);
  CHECK(v90[45] == 1.0);

  auto v359 = doa_onehot(359.0 * kPi / 180.0);
  CHECK(v359[179] == 1.0);

  // negative angles wrap
  auto vneg = doa_onehot(-kPi / 2);  // 270 deg
  CHECK(vneg[135] == 1.0);
}

TEST_CASE("mpe zero-distance microphone gives a zero column") {
  PolarForm p;
  p.phi = {0.0, 1.0};
  p.d = {0.0, 0.05};
  EncodingConfig cfg;
  auto m = mpe(p, cfg);
  for (std::size_t r = 0; r < m.rows; ++r) CHECK(m.at(r, 0) == 0.0);
}

TEST_CASE("mpe analytic K=4 case") {
  // v = [0, 0.5]; phi=0, d=1, alpha=sigma=1 -> column [1, -1, 0, 0]
  PolarForm p;
  p.phi = {0.0, 0.0};
  p.d = {1.0, 1.0};
  EncodingConfig cfg;
  cfg.alpha = 1.0;
  cfg.sigma = 1.0;
  cfg.k = 4;
  auto m = mpe(p, cfg);
  CHECK(m.at(0, 0) == doctest::Approx(1.0));
  CHECK(m.at(1, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(m.at(2, 0)) < 1e-12);
  CHECK(std::abs(m.at(3, 0)) < 1e-12);
}

TEST_CASE("mpe column norms equal alpha*d*sqrt(K/2)") {
  std::mt19937_64 rng(5);
  EncodingConfig cfg;  // alpha=7, sigma=4, K=514
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = random_polar(4, rng);
    auto m = mpe(p, cfg);
    for (std::size_t c = 0; c < m.cols; ++c) {
      double norm2 = 0.0;
      for (std::size_t r = 0; r < m.rows; ++r) norm2 += m.at(r, c) * m.at(r, c);
      const double expect = cfg.alpha * p.d[c] * std::sqrt((double)cfg.k / 2.0);
      CHECK(std::abs(std::sqrt(norm2) - expect) < 1e-10);
    }
  }
}

TEST_CASE("mpe inner products follow the cosine law") {
  std::mt19937_64 rng(6);
  EncodingConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_polar(4, rng);
    auto m = mpe(p, cfg);
    for (std::size_t a = 0; a < m.cols; ++a)
      for (std::size_t b = a + 1; b < m.cols; ++b) {
        double dot = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) dot += m.at(r, a) * m.at(r, b);
        const double expect = cfg.alpha * cfg.alpha * p.d[a] * p.d[b] *
                              ((double)cfg.k / 2.0) * std::cos(p.phi[a] - p.phi[b]);
        CHECK(std::abs(dot - expect) < 1e-8);
      }
  }
}

TEST_CASE("doa_mpe prepends the mpe columns unchanged") {
  std::mt19937_64 rng(7);
  EncodingConfig cfg;
  auto p = random_polar(4, rng);
  auto base = mpe(p, cfg);
  auto aug = doa_mpe(p, cfg);
  REQUIRE(aug.cols == base.cols + 1);
  for (std::size_t r = 0; r < base.rows; ++r)
    for (std::size_t c = 0; c < base.cols; ++c)
      CHECK(aug.at(r, c) == base.at(r, c));
}

TEST_CASE("doa_mpe analytic DOA column and 2pi periodicity") {
  PolarForm p;
  p.phi = {0.0, 1.0};
  p.d = {0.02, 0.04};
  p.doa_theta = 0.0;
  EncodingConfig cfg;
  cfg.alpha = 1.0;
  cfg.sigma = 1.0;
  cfg.k = 4;
  auto m = doa_mpe(p, cfg);
  CHECK(m.at(0, 2) == doctest::Approx(1.0));
  CHECK(m.at(1, 2) == doctest::Approx(-1.0));
  CHECK(std::abs(m.at(2, 2)) < 1e-12);
  CHECK(std::abs(m.at(3, 2)) < 1e-12);

  p.doa_theta = 1.25;
  auto m1 = doa_mpe(p, cfg);
  p.doa_theta = 1.25 + 2 * kPi;
  auto m2 = doa_mpe(p, cfg);
  for (std::size_t i = 0; i < m1.values.size(); ++i)
    CHECK(m1.values[i] == doctest::Approx(m2.values[i]).epsilon(1e-12));
}

TEST_CASE("encodings are invariant under whole-scene rotation") {
  // Rotating mics and DOA together leaves the polar form, and therefore the
  // encoding, untouched.
  std::mt19937_64 rng(8);
  SceneConfig scfg;
  EncodingConfig cfg;
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = sample_geometry(ArrayKind::kRandom, scfg, rng);
    const double doa = angle(rng);
    const double psi = angle(rng);
    ArrayGeometry rot = g;
    const double c = std::cos(psi), s = std::sin(psi);
    for (auto& q : rot.mic_xy) q = {c * q.x - s * q.y, s * q.x + c * q.y};

    auto ma = doa_mpe(to_polar(g, doa), cfg);
    auto mb = doa_mpe(to_polar(rot, doa + psi), cfg);
    for (std::size_t i = 0; i < ma.values.size(); ++i)
      CHECK(std::abs(ma.values[i] - mb.values[i]) < 1e-10);
  }
}

TEST_CASE("encoding matrix export round trip") {
  std::mt19937_64 rng(9);
  EncodingConfig cfg;
  cfg.k = 16;
  auto p = random_polar(3, rng);
  auto m = doa_mpe(p, cfg);
  const std::string path = "enc_fixture.bin";
  write_encoding_matrix(path, m);
  auto r = read_encoding_matrix(path);
  REQUIRE(r.rows == m.rows);
  REQUIRE(r.cols == m.cols);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    CHECK((float)m.values[i] == doctest::Approx((float)r.values[i]));
  std::remove(path.c_str());
}
