// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "geossf/encoding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace geossf {

namespace {

constexpr double kPi = 3.14159265358979323846;

void fill_column(std::vector<double>& out, std::size_t cols, std::size_t col,
                 std::size_t k, double amplitude, double phase, double sigma) {
  const std::size_t half = k / 2;
  for (std::size_t j = 0; j < half; ++j) {
    const double v = 2.0 * (double)j / (double)k;
    const double arg = 2.0 * kPi * sigma * v + phase;
    out[j * cols + col] = amplitude * std::cos(arg);
    out[(half + j) * cols + col] = amplitude * std::sin(arg);
  }
}

}  // namespace

std::vector<double> doa_onehot(double theta) {
  if (!std::isfinite(theta)) throw NumericError("doa_onehot: non-finite DOA");
  const double deg = wrap_angle(theta) * 180.0 / kPi;
  std::size_t idx = (std::size_t)(deg / 2.0);
  if (idx >= kDoaBins) idx = kDoaBins - 1;
  std::vector<double> out(kDoaBins, 0.0);
  out[idx] = 1.0;
  return out;
}

EncodingMatrix mpe(const PolarForm& polar, const EncodingConfig& cfg) {
  cfg.validate();
  const std::size_t mics = polar.d.size();
  EncodingMatrix m;
  m.rows = cfg.k;
  m.cols = mics;
  m.config = cfg;
  m.values.assign(cfg.k * mics, 0.0);
  for (std::size_t c = 0; c < mics; ++c)
    fill_column(m.values, m.cols, c, cfg.k, cfg.alpha * polar.d[c],
                polar.phi[c], cfg.sigma);
  return m;
}

EncodingMatrix doa_mpe(const PolarForm& polar, const EncodingConfig& cfg) {
  cfg.validate();
  const std::size_t mics = polar.d.size();
  EncodingMatrix m;
  m.rows = cfg.k;
  m.cols = mics + 1;
  m.config = cfg;
  m.values.assign(cfg.k * (mics + 1), 0.0);
  for (std::size_t c = 0; c < mics; ++c)
    fill_column(m.values, m.cols, c, cfg.k, cfg.alpha * polar.d[c],
                polar.phi[c], cfg.sigma);
  // The distance to the target is unknown in practice, so the DOA column
  // carries unit distance.
  fill_column(m.values, m.cols, mics, cfg.k, cfg.alpha, polar.doa_theta,
              cfg.sigma);
  return m;
}

void write_encoding_matrix(const std::string& path, const EncodingMatrix& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot create " + path);
  f << m.rows << " " << m.cols << "\n";
  for (double v : m.values) {
    const float fv = (float)v;
    char b[4];
    std::memcpy(b, &fv, 4);
    f.write(b, 4);
  }
  if (!f) throw IoError("failed writing " + path);
}

EncodingMatrix read_encoding_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  EncodingMatrix m;
  f >> m.rows >> m.cols;
  if (!f || m.rows == 0 || m.cols == 0)
    throw FormatError(path + ": bad encoding matrix header");
  f.get();  // newline
  m.values.resize(m.rows * m.cols);
  for (auto& v : m.values) {
    char b[4];
    f.read(b, 4);
    if (f.gcount() != 4) throw FormatError(path + ": truncated encoding matrix");
    float fv;
    std::memcpy(&fv, b, 4);
    v = fv;
  }
  return m;
}

}  // namespace geossf
