// Copyright 2026 geossf authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "geossf/dsp.hpp"

namespace geossf {

enum class WavEncoding { kFloat32, kPcm16 };

// RIFF/WAVE reader for PCM 16-bit and IEEE float32, mono or multichannel.
Signal read_wav(const std::string& path);

void write_wav(const std::string& path, const Signal& signal,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace geossf
