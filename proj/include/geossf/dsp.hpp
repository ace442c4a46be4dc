// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// STFT analysis/synthesis with a square-root Hann window at 50% overlap
// (COLA-exact), complex mask application, and the adjoint of the inverse
// transform for use inside gradient computations.

#pragma once

#include <cstddef>
#include <vector>

#include "geossf/error.hpp"

namespace geossf {

struct Signal {
  std::vector<std::vector<double>> samples;  // (M, N), equal lengths
  int sample_rate = 16000;

  std::size_t channels() const { return samples.size(); }
  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }
};

// One-sided complex spectra, (M, F, T) row-major, index (m*F + f)*T + t.
struct Spectrogram {
  std::size_t channels = 0;
  std::size_t bins = 0;    // F = frame_length/2 + 1
  std::size_t frames = 0;  // T
  std::size_t frame_length = 0;
  std::size_t hop = 0;
  int sample_rate = 16000;
  std::vector<double> re, im;

  std::size_t index(std::size_t m, std::size_t f, std::size_t t) const {
    return (m * bins + f) * frames + t;
  }
  Spectrogram channel(std::size_t m) const;
};

// Periodic (DFT-even) square-root Hann window of the given length.
std::vector<double> sqrt_hann_window(std::size_t frame_length);

// Frame count for the padding-free framing: floor((N - frame)/hop) + 1.
std::size_t stft_frames(std::size_t n, std::size_t frame_length, std::size_t hop);

Spectrogram stft(const Signal& signal, std::size_t frame_length,
                 std::size_t hop);

// Overlap-add synthesis; output spans (T-1)*hop + frame_length samples.
Signal istft(const Spectrogram& spec);

// Sample range [lo, hi) of the synthesis span where the window overlap-add
// sums to exactly one (full reconstruction region).
std::pair<std::size_t, std::size_t> cola_interior(std::size_t frames,
                                                  std::size_t frame_length,
                                                  std::size_t hop);

// X_hat(f,t) = M(f,t) * Y(f,t) per bin, single-channel input.
Spectrogram apply_mask(const Spectrogram& spec,
                       const std::vector<double>& mask_re,
                       const std::vector<double>& mask_im);

// Adjoint of the linear map (re, im) -> istft output, for reverse-mode
// differentiation through synthesis. grad_signal has (T-1)*hop + frame
// samples; outputs are (F, T) arrays, index f*T + t.
void istft_adjoint(const std::vector<double>& grad_signal, std::size_t bins,
                   std::size_t frames, std::size_t frame_length,
                   std::size_t hop, std::vector<double>& grad_re,
                   std::vector<double>& grad_im);

// Real FFT helpers (double precision, FFTW-backed, thread-safe).
// Sizes must be even and >= 2; power-of-two sizes are the fast path.
void rfft(const double* in, std::size_t n, double* out_re, double* out_im);
void irfft(const double* in_re, const double* in_im, std::size_t n,
           double* out);

// Linear convolution via FFT, output length a.size() + b.size() - 1.
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace geossf
