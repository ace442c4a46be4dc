// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "geossf/dsp.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <unordered_map>

namespace geossf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cached FFTW plans keyed by transform size. Plan creation is serialized;
// execution on caller-owned buffers is thread-safe.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans p;
    return p;
  }

  fftw_plan forward(std::size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = fwd_.find(n);
    if (it != fwd_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d((int)n, in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    fwd_[n] = p;
    return p;
  }

  fftw_plan backward(std::size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = bwd_.find(n);
    if (it != bwd_.end()) return it->second;
    std::vector<fftw_complex> in(n / 2 + 1);
    std::vector<double> out(n);
    fftw_plan p = fftw_plan_dft_c2r_1d((int)n, in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_[n] = p;
    return p;
  }

 private:
  FftPlans() = default;
  std::mutex mu_;
  std::unordered_map<std::size_t, fftw_plan> fwd_, bwd_;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void rfft(const double* in, std::size_t n, double* out_re, double* out_im) {
  if (n < 2 || n % 2 != 0) throw DimensionError("rfft size must be even");
  fftw_plan plan = FftPlans::instance().forward(n);
  std::vector<double> tin(in, in + n);
  std::vector<fftw_complex> tout(n / 2 + 1);
  fftw_execute_dft_r2c(plan, tin.data(), tout.data());
  for (std::size_t f = 0; f <= n / 2; ++f) {
    out_re[f] = tout[f][0];
    out_im[f] = tout[f][1];
  }
}

void irfft(const double* in_re, const double* in_im, std::size_t n,
           double* out) {
  if (n < 2 || n % 2 != 0) throw DimensionError("irfft size must be even");
  fftw_plan plan = FftPlans::instance().backward(n);
  std::vector<fftw_complex> tin(n / 2 + 1);
  for (std::size_t f = 0; f <= n / 2; ++f) {
    tin[f][0] = in_re[f];
    tin[f][1] = in_im[f];
  }
  // DC and Nyquist are real in a Hermitian half-spectrum; drop any imaginary
  // leakage so the transform (and its adjoint) never depend on it.
  tin[0][1] = 0.0;
  tin[n / 2][1] = 0.0;
  std::vector<double> tout(n);
  fftw_execute_dft_c2r(plan, tin.data(), tout.data());
  const double inv = 1.0 / (double)n;
  for (std::size_t i = 0; i < n; ++i) out[i] = tout[i] * inv;
}

std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<double> are(n / 2 + 1), aim(n / 2 + 1), bre(n / 2 + 1),
      bim(n / 2 + 1);
  rfft(pa.data(), n, are.data(), aim.data());
  rfft(pb.data(), n, bre.data(), bim.data());
  for (std::size_t f = 0; f <= n / 2; ++f) {
    const double r = are[f] * bre[f] - aim[f] * bim[f];
    const double i = are[f] * bim[f] + aim[f] * bre[f];
    are[f] = r;
    aim[f] = i;
  }
  std::vector<double> full(n);
  irfft(are.data(), aim.data(), n, full.data());
  full.resize(out_len);
  return full;
}

std::vector<double> sqrt_hann_window(std::size_t frame_length) {
  std::vector<double> w(frame_length);
  for (std::size_t i = 0; i < frame_length; ++i)
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * kPi * (double)i / (double)frame_length));
  return w;
}

std::size_t stft_frames(std::size_t n, std::size_t frame_length,
                        std::size_t hop) {
  if (n < frame_length) return 0;
  return (n - frame_length) / hop + 1;
}

Spectrogram Spectrogram::channel(std::size_t m) const {
  if (m >= channels) throw DimensionError("channel index out of range");
  Spectrogram out;
  out.channels = 1;
  out.bins = bins;
  out.frames = frames;
  out.frame_length = frame_length;
  out.hop = hop;
  out.sample_rate = sample_rate;
  const std::size_t n = bins * frames;
  out.re.assign(re.begin() + m * n, re.begin() + (m + 1) * n);
  out.im.assign(im.begin() + m * n, im.begin() + (m + 1) * n);
  return out;
}

Spectrogram stft(const Signal& signal, std::size_t frame_length,
                 std::size_t hop) {
  if (frame_length < 2 || frame_length % 2 != 0)
    throw ConfigError("stft frame length must be even and >= 2");
  if (hop == 0) throw ConfigError("stft hop must be positive");
  if (signal.channels() == 0) throw DimensionError("stft: empty signal");
  if (signal.length() < frame_length)
    throw DimensionError("stft: signal of " + std::to_string(signal.length()) +
                         " samples is shorter than one frame (" +
                         std::to_string(frame_length) + ")");

  const std::size_t t_frames = stft_frames(signal.length(), frame_length, hop);
  const std::size_t bins = frame_length / 2 + 1;
  Spectrogram spec;
  spec.channels = signal.channels();
  spec.bins = bins;
  spec.frames = t_frames;
  spec.frame_length = frame_length;
  spec.hop = hop;
  spec.sample_rate = signal.sample_rate;
  spec.re.assign(signal.channels() * bins * t_frames, 0.0);
  spec.im.assign(signal.channels() * bins * t_frames, 0.0);

  const std::vector<double> window = sqrt_hann_window(frame_length);
  std::vector<double> frame(frame_length);
  std::vector<double> xre(bins), xim(bins);
  for (std::size_t m = 0; m < signal.channels(); ++m) {
    const auto& ch = signal.samples[m];
    if (ch.size() != signal.length())
      throw DimensionError("stft: channels of unequal length");
    for (std::size_t t = 0; t < t_frames; ++t) {
      const std::size_t start = t * hop;
      for (std::size_t i = 0; i < frame_length; ++i)
        frame[i] = ch[start + i] * window[i];
      rfft(frame.data(), frame_length, xre.data(), xim.data());
      for (std::size_t f = 0; f < bins; ++f) {
        spec.re[spec.index(m, f, t)] = xre[f];
        spec.im[spec.index(m, f, t)] = xim[f];
      }
    }
  }
  return spec;
}

Signal istft(const Spectrogram& spec) {
  if (spec.frame_length < 2 || spec.frame_length % 2 != 0 || spec.hop == 0 ||
      spec.bins != spec.frame_length / 2 + 1)
    throw ConfigError("istft: inconsistent frame/hop metadata (frame " +
                      std::to_string(spec.frame_length) + ", hop " +
                      std::to_string(spec.hop) + ", bins " +
                      std::to_string(spec.bins) + ")");
  const std::size_t n_out =
      spec.frames == 0 ? 0 : (spec.frames - 1) * spec.hop + spec.frame_length;
  Signal out;
  out.sample_rate = spec.sample_rate;
  out.samples.assign(spec.channels, std::vector<double>(n_out, 0.0));

  const std::vector<double> window = sqrt_hann_window(spec.frame_length);
  std::vector<double> xre(spec.bins), xim(spec.bins), frame(spec.frame_length);
  for (std::size_t m = 0; m < spec.channels; ++m) {
    auto& ch = out.samples[m];
    for (std::size_t t = 0; t < spec.frames; ++t) {
      for (std::size_t f = 0; f < spec.bins; ++f) {
        xre[f] = spec.re[spec.index(m, f, t)];
        xim[f] = spec.im[spec.index(m, f, t)];
      }
      irfft(xre.data(), xim.data(), spec.frame_length, frame.data());
      const std::size_t start = t * spec.hop;
      for (std::size_t i = 0; i < spec.frame_length; ++i)
        ch[start + i] += frame[i] * window[i];
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> cola_interior(std::size_t frames,
                                                  std::size_t frame_length,
                                                  std::size_t hop) {
  if (frames == 0) return {0, 0};
  const std::size_t n_out = (frames - 1) * hop + frame_length;
  const std::size_t lo = frame_length - hop;
  const std::size_t hi = n_out >= lo + (frame_length - hop)
                             ? n_out - (frame_length - hop)
                             : lo;
  return {lo, std::max(lo, hi)};
}

Spectrogram apply_mask(const Spectrogram& spec,
                       const std::vector<double>& mask_re,
                       const std::vector<double>& mask_im) {
  if (spec.channels != 1)
    throw DimensionError("apply_mask expects a single-channel spectrogram");
  const std::size_t n = spec.bins * spec.frames;
  if (mask_re.size() != n || mask_im.size() != n)
    throw DimensionError("apply_mask: mask size " +
                         std::to_string(mask_re.size()) +
                         " does not match spectrogram bins*frames " +
                         std::to_string(n));
  Spectrogram out = spec;
  for (std::size_t i = 0; i < n; ++i) {
    out.re[i] = mask_re[i] * spec.re[i] - mask_im[i] * spec.im[i];
    out.im[i] = mask_re[i] * spec.im[i] + mask_im[i] * spec.re[i];
  }
  return out;
}

void istft_adjoint(const std::vector<double>& grad_signal, std::size_t bins,
                   std::size_t frames, std::size_t frame_length,
                   std::size_t hop, std::vector<double>& grad_re,
                   std::vector<double>& grad_im) {
  const std::size_t n_out =
      frames == 0 ? 0 : (frames - 1) * hop + frame_length;
  if (grad_signal.size() != n_out)
    throw DimensionError("istft_adjoint: gradient length mismatch");
  if (bins != frame_length / 2 + 1)
    throw ConfigError("istft_adjoint: bins/frame mismatch");
  grad_re.assign(bins * frames, 0.0);
  grad_im.assign(bins * frames, 0.0);

  // Synthesis is x[t*hop+i] += w[i] * irfft(X_t)[i], and the inverse real
  // DFT weighs interior bins twice (conjugate symmetry). The adjoint is
  // therefore a windowed forward DFT of each gradient frame, with bin f
  // scaled by c_f / frame_length, c_f = 1 at DC/Nyquist and 2 elsewhere.
  const std::vector<double> window = sqrt_hann_window(frame_length);
  std::vector<double> frame(frame_length), xre(bins), xim(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < frame_length; ++i)
      frame[i] = grad_signal[start + i] * window[i];
    rfft(frame.data(), frame_length, xre.data(), xim.data());
    for (std::size_t f = 0; f < bins; ++f) {
      const double cf = (f == 0 || f == bins - 1) ? 1.0 : 2.0;
      grad_re[f * frames + t] = cf / (double)frame_length * xre[f];
      grad_im[f * frames + t] = cf / (double)frame_length * xim[f];
    }
  }
}

}  // namespace geossf
