// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <random>

#include "doctest.h"
#include "geossf/roomsim.hpp"

using namespace geossf;

namespace {

constexpr double kPi = 3.14159265358979323846;

// A fixed scene with one mic pair and controllable source placement.
Scene fixed_scene(double t60, std::array<double, 3> src,
                  std::array<double, 3> room = {5.0, 6.0, 3.0}) {
  Scene s;
  s.room = room;
  s.t60 = t60;
  s.array = circular_array(4, 0.05);
  s.array_center = {2.0, 2.0};
  s.array_rotation = 0.0;
  s.array_height = 1.6;
  s.target_pos = src;
  s.interferer_pos = {1.0, 4.0, 1.6};
  s.target_doa = 0.0;
  s.sir_db = 0.0;
  return s;
}

double band_energy(const Signal& sig, double lo_hz, double hi_hz) {
  auto spec = stft(sig, 512, 256);
  double acc = 0.0;
  for (std::size_t f = 0; f < spec.bins; ++f) {
    const double hz = (double)f * sig.sample_rate / 512.0;
    if (hz < lo_hz || hz > hi_hz) continue;
    for (std::size_t t = 0; t < spec.frames; ++t)
      acc += spec.re[spec.index(0, f, t)] * spec.re[spec.index(0, f, t)] +
             spec.im[spec.index(0, f, t)] * spec.im[spec.index(0, f, t)];
  }
  return acc;
}

double total_energy(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

}  // namespace

TEST_CASE("direct path lands at distance/c with 1/r amplitude") {
  // mic 0 sits at (2.05, 2.0); put the source 1.715 m away -> delay
  // 1.715/343 s = 5 ms = 80 samples exactly.
  Scene s = fixed_scene(0.3, {2.05 + 1.715, 2.0, 1.6});
  auto rir = simulate_rir(s, s.target_pos, 0);
  const auto& h = rir.taps[0];

  std::size_t peak = 0;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (std::abs(h[i]) > std::abs(h[peak])) peak = i;
  CHECK(peak == 80);

  // integer delay -> single dominant tap
  for (std::size_t i = 0; i < h.size(); ++i)
    if (i != peak) CHECK(std::abs(h[i]) < 1e-6 * std::abs(h[peak]));

  // first nonzero tap is not ahead of the direct arrival
  std::size_t first = h.size();
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i] != 0.0) {
      first = i;
      break;
    }
  const double bound = std::floor(1.715 / kSpeedOfSound * kRirSampleRate) - 1;
  CHECK((double)first >= bound);

  // doubling the distance halves the peak
  Scene s2 = fixed_scene(0.3, {2.05 + 3.43, 2.0, 1.6}, {8.0, 6.0, 3.0});
  auto rir2 = simulate_rir(s2, s2.target_pos, 0);
  const auto& h2 = rir2.taps[0];
  std::size_t peak2 = 0;
  for (std::size_t i = 1; i < h2.size(); ++i)
    if (std::abs(h2[i]) > std::abs(h2[peak2])) peak2 = i;
  CHECK(peak2 == 160);
  CHECK(std::abs(h2[peak2] / h[peak] - 0.5) < 0.01 * 0.5);
}

TEST_CASE("source outside the room is rejected") {
  Scene s = fixed_scene(0.3, {10.0, 2.0, 1.6});
  CHECK_THROWS_AS(simulate_rir(s, s.target_pos, 0), PlacementError);
}

TEST_CASE("schroeder T60 tracks the request within 20 percent") {
  std::mt19937_64 rng(4);
  SceneConfig cfg;
  for (double t60 : {0.25, 0.4}) {
    cfg.t60_min = cfg.t60_max = t60;
    Scene s = sample_scene(ArrayKind::kCircular, cfg, rng, 1);
    auto rir = simulate_rir(s, s.target_pos);
    const double measured = schroeder_t60(rir.taps[0], kRirSampleRate);
    CHECK(std::abs(measured - t60) / t60 < 0.2);
  }
}

TEST_CASE("RIR energy decreases when T60 decreases") {
  Scene hi = fixed_scene(0.5, {3.5, 4.0, 1.6});
  Scene lo = fixed_scene(0.25, {3.5, 4.0, 1.6});
  auto rh = simulate_rir(hi, hi.target_pos, 12);
  auto rl = simulate_rir(lo, lo.target_pos, 12);
  CHECK(total_energy(rl.taps[0]) < total_energy(rh.taps[0]));
}

TEST_CASE("unachievable T60 clamps absorption and records it") {
  // Sabine absorption above 1: a big room with a tiny T60 request.
  Scene s = fixed_scene(0.02, {3.5, 4.0, 1.6});
  auto rir = simulate_rir(s, s.target_pos, 2);
  CHECK(rir.absorption_clamped);
}

TEST_CASE("far-field arrival-time differences match geometry") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  for (int trial = 0; trial < 10; ++trial) {
    Scene s = fixed_scene(0.3, {0, 0, 0}, {12.0, 12.0, 3.0});
    s.array_center = {6.0, 6.0};
    s.array_rotation = ang(rng);
    const double az = ang(rng);
    s.target_pos = {6.0 + 3.0 * std::cos(az), 6.0 + 3.0 * std::sin(az), 1.6};

    auto rir = simulate_rir(s, s.target_pos, 0);
    const auto mics = s.mic_positions();
    auto delay_of = [&](std::size_t m) {
      // peak location refined by quadratic interpolation is overkill at
      // the +-1 sample tolerance; use the argmax.
      const auto& h = rir.taps[m];
      std::size_t peak = 0;
      for (std::size_t i = 1; i < h.size(); ++i)
        if (std::abs(h[i]) > std::abs(h[peak])) peak = i;
      return (double)peak;
    };
    auto dist_of = [&](std::size_t m) {
      return std::hypot(std::hypot(mics[m][0] - s.target_pos[0],
                                   mics[m][1] - s.target_pos[1]),
                        mics[m][2] - s.target_pos[2]);
    };
    for (std::size_t m = 1; m < mics.size(); ++m) {
      const double measured = delay_of(m) - delay_of(0);
      const double predicted =
          (dist_of(m) - dist_of(0)) / kSpeedOfSound * kRirSampleRate;
      CHECK(std::abs(measured - predicted) <= 1.0);
    }
  }
}

TEST_CASE("render_mixture hits the requested SIR exactly") {
  std::mt19937_64 rng(21);
  SceneConfig cfg;
  cfg.t60_min = cfg.t60_max = 0.25;
  Scene s = sample_scene(ArrayKind::kRandom, cfg, rng, 3);
  s.sir_db = 4.2;
  auto target = synth_source(SourceKind::kSpeechLike, 1.0, rng);
  auto interf = synth_source(SourceKind::kSpeechLike, 1.0, rng);
  auto mix = render_mixture(s, target, interf, 6);

  const double pt = total_energy(mix.target_ref.samples[0]);
  const double pi_ = total_energy(mix.interferer_ref.samples[0]);
  const double sir = 10.0 * std::log10(pt / pi_);
  CHECK(std::abs(sir - 4.2) < 0.1);

  // additivity at the reference mic
  const std::size_t ref = s.array.reference_index;
  double resid = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < mix.noisy.length(); ++i) {
    const double r = mix.noisy.samples[ref][i] - mix.target_ref.samples[0][i] -
                     mix.interferer_ref.samples[0][i];
    resid += r * r;
    scale += mix.noisy.samples[ref][i] * mix.noisy.samples[ref][i];
  }
  CHECK(std::sqrt(resid / scale) < 1e-6);
}

TEST_CASE("render_mixture rejects silent sources") {
  std::mt19937_64 rng(22);
  SceneConfig cfg;
  Scene s = sample_scene(ArrayKind::kRandom, cfg, rng, 4);
  auto target = synth_source(SourceKind::kSpeechLike, 0.5, rng);
  Signal silent;
  silent.samples.assign(1, std::vector<double>(target.length(), 0.0));
  CHECK_THROWS_AS(render_mixture(s, target, silent, 2), DegenerateError);
}

TEST_CASE("convolution through the same RIR is superposed") {
  std::mt19937_64 rng(23);
  auto a = synth_source(SourceKind::kSpeechLike, 0.3, rng);
  auto b = synth_source(SourceKind::kToneComplex, 0.3, rng);
  Scene s = fixed_scene(0.3, {3.5, 4.0, 1.6});
  auto rir = simulate_rir(s, s.target_pos, 4);
  const auto& h = rir.taps[0];

  std::vector<double> summed(a.length());
  for (std::size_t i = 0; i < a.length(); ++i)
    summed[i] = a.samples[0][i] + b.samples[0][i];

  auto ca = fft_convolve(a.samples[0], h);
  auto cb = fft_convolve(b.samples[0], h);
  auto cs = fft_convolve(summed, h);
  for (std::size_t i = 0; i < cs.size(); ++i)
    CHECK(std::abs(cs[i] - (ca[i] + cb[i])) < 1e-8);
}

TEST_CASE("synth_source duration, determinism, and band power") {
  std::mt19937_64 rng(24);
  auto s = synth_source(SourceKind::kSpeechLike, 3.0, rng);
  CHECK(s.length() == 48000);

  std::mt19937_64 r1(99), r2(99);
  auto a = synth_source(SourceKind::kSpeechLike, 0.5, r1);
  auto b = synth_source(SourceKind::kSpeechLike, 0.5, r2);
  CHECK(a.samples[0] == b.samples[0]);

  const double band = band_energy(a, 100.0, 4000.0);
  const double all = band_energy(a, 0.0, 8000.0);
  CHECK(band > 0.0);
  CHECK(band / all > 0.5);
}
