// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Shoebox image-source room simulation at 16 kHz: per-wall reflection
// coefficients from the requested T60 via Sabine's formula, fractional
// delays via an 81-tap Hann-windowed sinc, and mixture rendering with an
// exact reverberant SIR at the reference microphone.

#pragma once

#include <cstdint>
#include <random>

#include "geossf/dsp.hpp"
#include "geossf/geometry.hpp"

namespace geossf {

constexpr double kSpeedOfSound = 343.0;  // m/s
constexpr int kRirSampleRate = 16000;

struct RoomImpulseResponse {
  std::vector<std::vector<double>> taps;  // (M, L)
  double t60_requested = 0.0;
  int max_order = 0;
  bool absorption_clamped = false;  // Sabine absorption exceeded 1

  std::size_t channels() const { return taps.size(); }
  std::size_t length() const { return taps.empty() ? 0 : taps[0].size(); }
};

struct Mixture {
  Signal noisy;           // (M)
  Signal target_ref;      // (1) reverberant target at the reference mic
  Signal interferer_ref;  // (1)
  Scene scene;
};

// Image-source RIR from every microphone of the scene's array to source_pos.
// max_order < 0 selects a default that covers the requested T60.
RoomImpulseResponse simulate_rir(const Scene& scene,
                                 const std::array<double, 3>& source_pos,
                                 int max_order = -1);

// Convolves both sources with their RIRs, scales the interferer so the
// reverberant power ratio at the reference microphone equals scene.sir_db
// exactly, and sums. Sources must be mono, equal length, 16 kHz.
Mixture render_mixture(const Scene& scene, const Signal& target_src,
                       const Signal& interferer_src, int max_order = -1);

enum class SourceKind { kSpeechLike, kToneComplex, kFile };

SourceKind source_kind_from_name(const std::string& name);
std::string source_kind_name(SourceKind kind);

// Deterministic synthetic test sources; kFile reads path as WAV.
Signal synth_source(SourceKind kind, double duration_s, std::mt19937_64& rng,
                    const std::string& path = "");

// Schroeder backward-integration T60 estimate of a single-channel RIR,
// fitted on the -5 dB .. -25 dB span of the energy decay curve.
double schroeder_t60(const std::vector<double>& rir, int sample_rate);

}  // namespace geossf
