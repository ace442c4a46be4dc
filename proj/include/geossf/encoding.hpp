// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Sinusoidal positional encodings of the microphone geometry and target
// direction. Column m is
//   p_m = alpha * d_m * [cos(2*pi*sigma*v + phi_m); sin(2*pi*sigma*v + phi_m)]
// with v = (2/K)[0..K/2-1]; the DOA column uses unit distance. The cos block
// occupies rows [0, K/2), the sin block rows [K/2, K).

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geossf/geometry.hpp"

namespace geossf {

struct EncodingConfig {
  double alpha = 7.0;
  double sigma = 4.0;
  std::size_t k = 514;  // encoding length, even

  void validate() const {
    if (k == 0 || k % 2 != 0) throw ConfigError("encoding K must be even and positive");
    if (alpha <= 0 || sigma <= 0) throw ConfigError("encoding alpha and sigma must be positive");
  }
};

struct EncodingMatrix {
  std::size_t rows = 0;  // K
  std::size_t cols = 0;  // M for MPE, M+1 for DOA-MPE
  std::vector<double> values;  // row-major (K, C)
  EncodingConfig config;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// 180-dimensional one-hot at 2-degree resolution, index floor(deg/2).
std::vector<double> doa_onehot(double theta);
constexpr std::size_t kDoaBins = 180;

EncodingMatrix mpe(const PolarForm& polar, const EncodingConfig& cfg);
EncodingMatrix doa_mpe(const PolarForm& polar, const EncodingConfig& cfg);

// Golden-file fixture format: a text header "K C\n" followed by the matrix
// as flat little-endian float32, row-major.
void write_encoding_matrix(const std::string& path, const EncodingMatrix& m);
EncodingMatrix read_encoding_matrix(const std::string& path);

}  // namespace geossf
