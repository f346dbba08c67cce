#pragma once

#include <filesystem>
#include <vector>

#include "avfd/errors.hpp"

namespace avfd {

struct Waveform {
  std::vector<double> samples;  // mono, in [-1, 1]
  int rate_hz = 16000;
};

/// Mono 16-bit PCM WAV.
Waveform load_wav(const std::filesystem::path& path);
void save_wav(const Waveform& wav, const std::filesystem::path& path);

}  // namespace avfd
