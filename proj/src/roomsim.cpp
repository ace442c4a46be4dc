// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "geossf/roomsim.hpp"

#include <algorithm>
#include <cmath>

#include "geossf/wav.hpp"

namespace geossf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSincHalf = 40;  // 81-tap Hann-windowed sinc

// Absorption from the requested T60. The Sabine coefficient
// 0.161*V/(S*T60) overshoots the image-source decay rate once absorption is
// no longer small (measured T60 comes out ~20% short of the request at the
// 0.2 s end of the range); Eyring's mapping inverts the per-reflection
// energy loss exactly, so the simulated decay matches the request. A Sabine
// coefficient >= 1 marks the request as unachievable and is reported.
double wall_absorption(const std::array<double, 3>& room, double t60,
                       bool* clamped) {
  const double volume = room[0] * room[1] * room[2];
  const double surface = 2.0 * (room[0] * room[1] + room[0] * room[2] +
                                room[1] * room[2]);
  const double sabine = t60 > 0 ? 0.161 * volume / (surface * t60) : 50.0;
  if (sabine >= 1.0 && clamped) *clamped = true;
  return 1.0 - std::exp(-sabine);
}

// Mirror positions of coordinate s in [0, L]: 2*l*L + u*s. Reflection
// counts per Allen-Berkley: u=+1 -> 2|l|, u=-1 -> |2l - 1|.
struct AxisImage {
  double pos;
  int reflections;
};

void axis_images(double s, double box, double max_dist, int max_order,
                 std::vector<AxisImage>& out) {
  out.clear();
  const int l_max = (int)std::ceil(max_dist / (2.0 * box)) + 1;
  for (int l = -l_max; l <= l_max; ++l) {
    const int refl_pos = 2 * std::abs(l);
    if (refl_pos <= max_order)
      out.push_back({2.0 * l * box + s, refl_pos});
    const int refl_neg = std::abs(2 * l - 1);
    if (refl_neg <= max_order)
      out.push_back({2.0 * l * box - s, refl_neg});
  }
}

void add_windowed_sinc(std::vector<double>& taps, double delay_samples,
                       double amplitude) {
  const int center = (int)std::llround(delay_samples);
  for (int k = center - kSincHalf; k <= center + kSincHalf; ++k) {
    if (k < 0 || k >= (int)taps.size()) continue;
    const double x = (double)k - delay_samples;
    const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
    const double w = 0.5 * (1.0 + std::cos(kPi * x / (double)(kSincHalf + 1)));
    taps[k] += amplitude * sinc * w;
  }
}

void check_inside(const std::array<double, 3>& p,
                  const std::array<double, 3>& room, const char* what) {
  for (int i = 0; i < 3; ++i)
    if (p[i] <= 0.0 || p[i] >= room[i])
      throw PlacementError(std::string(what) + " lies outside the room");
}

double mean_power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / (double)x.size();
}

}  // namespace

RoomImpulseResponse simulate_rir(const Scene& scene,
                                 const std::array<double, 3>& source_pos,
                                 int max_order) {
  check_inside(source_pos, scene.room, "source");
  const auto mics = scene.mic_positions();
  for (const auto& m : mics) check_inside(m, scene.room, "microphone");

  RoomImpulseResponse rir;
  rir.t60_requested = scene.t60;
  const double alpha =
      wall_absorption(scene.room, scene.t60, &rir.absorption_clamped);
  const double beta = std::sqrt(std::max(0.0, 1.0 - alpha));

  double direct_max = 0.0;
  std::vector<double> direct(mics.size());
  for (std::size_t m = 0; m < mics.size(); ++m) {
    direct[m] = std::hypot(std::hypot(mics[m][0] - source_pos[0],
                                      mics[m][1] - source_pos[1]),
                           mics[m][2] - source_pos[2]);
    direct_max = std::max(direct_max, direct[m]);
  }

  // Decay tracked to roughly -45 dB past the direct arrival.
  const double tail_s = beta > 0.0 ? 0.75 * std::max(scene.t60, 0.02) : 0.005;
  const double max_dist = direct_max + tail_s * kSpeedOfSound;
  if (max_order < 0) {
    const double min_dim = std::min({scene.room[0], scene.room[1], scene.room[2]});
    max_order = 2 * ((int)std::ceil(max_dist / (2.0 * min_dim)) + 1) + 1;
  }
  rir.max_order = max_order;

  const std::size_t len =
      (std::size_t)std::ceil(max_dist / kSpeedOfSound * kRirSampleRate) +
      kSincHalf + 2;
  rir.taps.assign(mics.size(), std::vector<double>(len, 0.0));

  std::vector<AxisImage> xs, ys, zs;
  std::vector<double> betas(3 * max_order + 2, 1.0);
  for (std::size_t i = 1; i < betas.size(); ++i) betas[i] = betas[i - 1] * beta;

  for (std::size_t m = 0; m < mics.size(); ++m) {
    axis_images(source_pos[0], scene.room[0], max_dist, max_order, xs);
    axis_images(source_pos[1], scene.room[1], max_dist, max_order, ys);
    axis_images(source_pos[2], scene.room[2], max_dist, max_order, zs);
    auto& taps = rir.taps[m];
    for (const auto& ix : xs) {
      const double dx = ix.pos - mics[m][0];
      for (const auto& iy : ys) {
        const int rxy = ix.reflections + iy.reflections;
        if (rxy > max_order) continue;
        const double dy = iy.pos - mics[m][1];
        const double dxy2 = dx * dx + dy * dy;
        if (dxy2 > max_dist * max_dist) continue;
        for (const auto& iz : zs) {
          const int order = rxy + iz.reflections;
          if (order > max_order) continue;
          if (beta == 0.0 && order > 0) continue;
          const double dz = iz.pos - mics[m][2];
          const double dist = std::sqrt(dxy2 + dz * dz);
          if (dist > max_dist) continue;
          const double amp = betas[order] / std::max(dist, 0.01);
          add_windowed_sinc(taps, dist / kSpeedOfSound * kRirSampleRate, amp);
        }
      }
    }
    // Bandlimited interpolation rings ahead of the arrival; keep the RIR
    // causal up to the 1-sample tolerance of the direct-path delay.
    const std::size_t first =
        (std::size_t)std::max<std::ptrdiff_t>(
            0, (std::ptrdiff_t)std::floor(direct[m] / kSpeedOfSound *
                                          kRirSampleRate) - 1);
    for (std::size_t i = 0; i < std::min(first, taps.size()); ++i) taps[i] = 0.0;
  }
  return rir;
}

Mixture render_mixture(const Scene& scene, const Signal& target_src,
                       const Signal& interferer_src, int max_order) {
  if (target_src.channels() != 1 || interferer_src.channels() != 1)
    throw DimensionError("render_mixture expects mono sources");
  if (target_src.length() != interferer_src.length())
    throw DimensionError("render_mixture: source lengths differ");
  if (target_src.sample_rate != kRirSampleRate ||
      interferer_src.sample_rate != kRirSampleRate)
    throw ConfigError("render_mixture: sources must be 16 kHz");
  if (mean_power(target_src.samples[0]) <= 0.0)
    throw DegenerateError("target source has zero power");
  if (mean_power(interferer_src.samples[0]) <= 0.0)
    throw DegenerateError("interferer source has zero power");

  const RoomImpulseResponse rir_t = simulate_rir(scene, scene.target_pos, max_order);
  const RoomImpulseResponse rir_i =
      simulate_rir(scene, scene.interferer_pos, max_order);
  const std::size_t n = target_src.length();
  const std::size_t mics = rir_t.channels();
  const std::size_t ref = scene.array.reference_index;

  auto render = [n](const std::vector<double>& src,
                    const std::vector<double>& h) {
    std::vector<double> out = fft_convolve(src, h);
    out.resize(n);
    return out;
  };

  std::vector<std::vector<double>> img_t(mics), img_i(mics);
  for (std::size_t m = 0; m < mics; ++m) {
    img_t[m] = render(target_src.samples[0], rir_t.taps[m]);
    img_i[m] = render(interferer_src.samples[0], rir_i.taps[m]);
  }

  const double p_t = mean_power(img_t[ref]);
  const double p_i = mean_power(img_i[ref]);
  if (p_t <= 0.0 || p_i <= 0.0)
    throw DegenerateError("reverberant image has zero power at the reference mic");
  const double gain = std::sqrt(p_t / p_i * std::pow(10.0, -scene.sir_db / 10.0));

  Mixture mix;
  mix.scene = scene;
  mix.noisy.sample_rate = kRirSampleRate;
  mix.noisy.samples.assign(mics, std::vector<double>(n, 0.0));
  double peak = 0.0;
  for (std::size_t m = 0; m < mics; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      mix.noisy.samples[m][i] = img_t[m][i] + gain * img_i[m][i];
      peak = std::max(peak, std::abs(mix.noisy.samples[m][i]));
    }
  }
  // One common gain keeps Eq.-style additivity and the SIR intact while
  // leaving float headroom in the WAV files.
  const double norm = peak > 0.0 ? 0.5 / peak : 1.0;
  for (auto& ch : mix.noisy.samples)
    for (auto& v : ch) v *= norm;

  mix.target_ref.sample_rate = kRirSampleRate;
  mix.interferer_ref.sample_rate = kRirSampleRate;
  mix.target_ref.samples.assign(1, img_t[ref]);
  mix.interferer_ref.samples.assign(1, img_i[ref]);
  for (auto& v : mix.target_ref.samples[0]) v *= norm;
  for (auto& v : mix.interferer_ref.samples[0]) v *= gain * norm;
  return mix;
}

SourceKind source_kind_from_name(const std::string& name) {
  if (name == "speech_like") return SourceKind::kSpeechLike;
  if (name == "tone_complex") return SourceKind::kToneComplex;
  if (name == "file") return SourceKind::kFile;
  throw ConfigError("unknown source kind '" + name +
                    "' (speech_like|tone_complex|file)");
}

std::string source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::kSpeechLike: return "speech_like";
    case SourceKind::kToneComplex: return "tone_complex";
    case SourceKind::kFile: return "file";
  }
  return "speech_like";
}

Signal synth_source(SourceKind kind, double duration_s, std::mt19937_64& rng,
                    const std::string& path) {
  if (kind == SourceKind::kFile) {
    Signal s = read_wav(path);
    Signal mono;
    mono.sample_rate = s.sample_rate;
    mono.samples.assign(1, s.samples[0]);
    return mono;
  }
  if (duration_s <= 0) throw ConfigError("source duration must be positive");
  const std::size_t n = (std::size_t)std::llround(duration_s * kRirSampleRate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> x(n, 0.0);
  if (kind == SourceKind::kSpeechLike) {
    // Pitch-like harmonic bursts under a syllabic envelope plus a weak
    // band-limited noise floor.
    const double f0 = 100.0 + 80.0 * unit(rng);
    const double vib_rate = 3.0 + 3.0 * unit(rng);
    const double vib_depth = 0.03 + 0.05 * unit(rng);
    const double vib_phase = 2.0 * kPi * unit(rng);
    const double syl_rate = 2.0 + 3.0 * unit(rng);
    const double syl_phase = 2.0 * kPi * unit(rng);

    std::array<double, 3> formant_c{}, formant_bw{};
    for (int i = 0; i < 3; ++i) {
      formant_c[i] = 300.0 + 2700.0 * unit(rng);
      formant_bw[i] = 150.0 + 350.0 * unit(rng);
    }
    auto formant_gain = [&](double f) {
      double g = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double z = (f - formant_c[i]) / formant_bw[i];
        g += 1.0 / (1.0 + z * z);
      }
      return g + 0.05;
    };

    const int nharm = (int)(3800.0 / f0);
    std::vector<double> amp(nharm + 1), phase(nharm + 1);
    for (int h = 1; h <= nharm; ++h) {
      amp[h] = formant_gain(h * f0) / std::pow((double)h, 0.3);
      phase[h] = 2.0 * kPi * unit(rng);
    }

    double carrier_phase = 0.0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    double lp1 = 0.0, lp2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (double)i / kRirSampleRate;
      const double inst_f0 =
          f0 * (1.0 + vib_depth * std::sin(2.0 * kPi * vib_rate * t + vib_phase));
      carrier_phase += 2.0 * kPi * inst_f0 / kRirSampleRate;
      double v = 0.0;
      for (int h = 1; h <= nharm; ++h)
        v += amp[h] * std::sin((double)h * carrier_phase + phase[h]);
      // crude 100 Hz..4 kHz noise via cascaded one-pole smoothing of white noise
      lp1 += 0.55 * (gauss(rng) - lp1);
      lp2 += 0.55 * (lp1 - lp2);
      const double env =
          0.1 + 0.9 * std::pow(0.5 - 0.5 * std::cos(2.0 * kPi * syl_rate * t + syl_phase), 1.5);
      x[i] = env * (v + 0.15 * lp2);
    }
  } else {  // tone complex
    const int tones = 6 + (int)(4.0 * unit(rng));
    std::vector<double> freq(tones), phase(tones), amp(tones);
    for (int k = 0; k < tones; ++k) {
      freq[k] = 200.0 + 3800.0 * unit(rng);
      phase[k] = 2.0 * kPi * unit(rng);
      amp[k] = 1.0 / std::sqrt((double)k + 1.0);
    }
    const double am_rate = 1.0 + 3.0 * unit(rng);
    const double am_phase = 2.0 * kPi * unit(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (double)i / kRirSampleRate;
      double v = 0.0;
      for (int k = 0; k < tones; ++k)
        v += amp[k] * std::sin(2.0 * kPi * freq[k] * t + phase[k]);
      x[i] = (0.3 + 0.7 * (0.5 - 0.5 * std::cos(2.0 * kPi * am_rate * t + am_phase))) * v;
    }
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= (double)n;
  double power = 0.0;
  for (auto& v : x) {
    v -= mean;
    power += v * v;
  }
  const double rms = std::sqrt(power / (double)n);
  if (rms > 0)
    for (auto& v : x) v *= 0.1 / rms;

  Signal out;
  out.sample_rate = kRirSampleRate;
  out.samples.assign(1, std::move(x));
  return out;
}

double schroeder_t60(const std::vector<double>& rir, int sample_rate) {
  if (rir.empty()) throw DimensionError("schroeder_t60: empty RIR");
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) throw DegenerateError("schroeder_t60: zero-energy RIR");

  std::vector<double> db(edc.size());
  for (std::size_t i = 0; i < edc.size(); ++i)
    db[i] = 10.0 * std::log10(std::max(edc[i] / edc[0], 1e-30));

  std::size_t i5 = db.size(), i25 = db.size();
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (i5 == db.size() && db[i] <= -5.0) i5 = i;
    if (db[i] <= -25.0) {
      i25 = i;
      break;
    }
  }
  if (i5 >= i25 || i25 == db.size())
    throw DegenerateError("schroeder_t60: decay range (-5,-25) dB not covered");

  // Least-squares line through the (-5, -25) dB span.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = (double)(i25 - i5 + 1);
  for (std::size_t i = i5; i <= i25; ++i) {
    const double t = (double)i / sample_rate;
    sx += t;
    sy += db[i];
    sxx += t * t;
    sxy += t * db[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  if (slope >= 0) throw DegenerateError("schroeder_t60: non-decaying EDC");
  return -60.0 / slope;
}

}  // namespace geossf
