// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "geossf/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace geossf {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatIeeeFloat = 0x0003;

struct Reader {
  std::ifstream f;
  explicit Reader(const std::string& path)
      : f(path, std::ios::binary) {
    if (!f) throw IoError("cannot open " + path);
  }
  void bytes(void* dst, std::size_t n, const char* what) {
    f.read(reinterpret_cast<char*>(dst), (std::streamsize)n);
    if ((std::size_t)f.gcount() != n)
      throw FormatError(std::string("truncated WAV file while reading ") + what);
  }
  std::uint32_t u32(const char* what) {
    std::uint8_t b[4];
    bytes(b, 4, what);
    return (std::uint32_t)b[0] | ((std::uint32_t)b[1] << 8) |
           ((std::uint32_t)b[2] << 16) | ((std::uint32_t)b[3] << 24);
  }
  std::uint16_t u16(const char* what) {
    std::uint8_t b[2];
    bytes(b, 2, what);
    return (std::uint16_t)((std::uint16_t)b[0] | ((std::uint16_t)b[1] << 8));
  }
  void skip(std::size_t n, const char* what) {
    f.seekg((std::streamoff)n, std::ios::cur);
    if (!f) throw FormatError(std::string("truncated WAV file while skipping ") + what);
    // seekg past EOF does not always fail; verify with a peek
    if (f.peek() == EOF && n > 0) f.clear();
  }
};

void put_u32(std::ofstream& f, std::uint32_t v) {
  std::uint8_t b[4] = {(std::uint8_t)(v & 0xff), (std::uint8_t)((v >> 8) & 0xff),
                       (std::uint8_t)((v >> 16) & 0xff),
                       (std::uint8_t)((v >> 24) & 0xff)};
  f.write(reinterpret_cast<char*>(b), 4);
}

void put_u16(std::ofstream& f, std::uint16_t v) {
  std::uint8_t b[2] = {(std::uint8_t)(v & 0xff), (std::uint8_t)((v >> 8) & 0xff)};
  f.write(reinterpret_cast<char*>(b), 2);
}

float le_float(const std::uint8_t* b) {
  std::uint32_t u = (std::uint32_t)b[0] | ((std::uint32_t)b[1] << 8) |
                    ((std::uint32_t)b[2] << 16) | ((std::uint32_t)b[3] << 24);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace

Signal read_wav(const std::string& path) {
  Reader r(path);
  char tag[4];
  r.bytes(tag, 4, "RIFF tag");
  if (std::memcmp(tag, "RIFF", 4) != 0)
    throw FormatError(path + ": not a RIFF file");
  r.u32("RIFF size");
  r.bytes(tag, 4, "WAVE tag");
  if (std::memcmp(tag, "WAVE", 4) != 0)
    throw FormatError(path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<std::uint8_t> payload;

  while (r.f.peek() != EOF) {
    char id[4];
    r.bytes(id, 4, "chunk id");
    const std::uint32_t size = r.u32("chunk size");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path + ": fmt chunk too small");
      format = r.u16("format");
      channels = r.u16("channels");
      sample_rate = r.u32("sample rate");
      r.u32("byte rate");
      r.u16("block align");
      bits = r.u16("bits per sample");
      if (size > 16) r.skip(size - 16, "fmt extension");
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      payload.resize(size);
      r.bytes(payload.data(), size, "data chunk");
      break;
    } else {
      r.skip(size + (size & 1), "chunk");
    }
  }

  if (!have_fmt) throw FormatError(path + ": missing fmt chunk");
  if (payload.empty()) throw FormatError(path + ": missing data chunk");
  if (channels == 0) throw FormatError(path + ": zero channels");
  if (format == kFormatPcm) {
    if (bits != 16)
      throw FormatError(path + ": unsupported PCM depth " + std::to_string(bits) +
                        " (only 16-bit PCM and float32 are supported)");
  } else if (format == kFormatIeeeFloat) {
    if (bits != 32)
      throw FormatError(path + ": unsupported float depth " + std::to_string(bits));
  } else {
    throw FormatError(path + ": unsupported WAV encoding 0x" +
                      std::to_string(format));
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  if (payload.size() % frame_bytes != 0)
    throw FormatError(path + ": data chunk not a whole number of frames");
  const std::size_t n = payload.size() / frame_bytes;

  Signal out;
  out.sample_rate = (int)sample_rate;
  out.samples.assign(channels, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = payload.data() + (i * channels + c) * bytes_per_sample;
      if (format == kFormatPcm) {
        const std::int16_t v = (std::int16_t)((std::uint16_t)p[0] |
                                              ((std::uint16_t)p[1] << 8));
        out.samples[c][i] = (double)v / 32768.0;
      } else {
        out.samples[c][i] = (double)le_float(p);
      }
    }
  }
  return out;
}

void write_wav(const std::string& path, const Signal& signal,
               WavEncoding encoding) {
  if (signal.channels() == 0 || signal.length() == 0)
    throw DimensionError("write_wav: empty signal");
  for (const auto& ch : signal.samples)
    if (ch.size() != signal.length())
      throw DimensionError("write_wav: channels of unequal length");

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot create " + path);

  const std::uint16_t channels = (std::uint16_t)signal.channels();
  const std::uint16_t bits = encoding == WavEncoding::kFloat32 ? 32 : 16;
  const std::uint16_t fmt =
      encoding == WavEncoding::kFloat32 ? kFormatIeeeFloat : kFormatPcm;
  const std::uint32_t n = (std::uint32_t)signal.length();
  const std::uint32_t data_bytes = n * channels * (bits / 8);

  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, fmt);
  put_u16(f, channels);
  put_u32(f, (std::uint32_t)signal.sample_rate);
  put_u32(f, (std::uint32_t)signal.sample_rate * channels * (bits / 8));
  put_u16(f, (std::uint16_t)(channels * (bits / 8)));
  put_u16(f, bits);
  f.write("data", 4);
  put_u32(f, data_bytes);

  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const double v = signal.samples[c][i];
      if (encoding == WavEncoding::kFloat32) {
        const float fv = (float)v;
        std::uint32_t u;
        std::memcpy(&u, &fv, 4);
        put_u32(f, u);
      } else {
        const double scaled = std::round(v * 32768.0);
        const std::int16_t q = (std::int16_t)std::clamp(scaled, -32768.0, 32767.0);
        put_u16(f, (std::uint16_t)q);
      }
    }
  }
  if (!f) throw IoError("failed writing " + path);
}

}  // namespace geossf
