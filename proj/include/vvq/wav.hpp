#pragma once

#include <string>
#include <vector>

namespace vvq {

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;  // mono, scaled to [-1, 1)
};

// Reads a RIFF/WAVE file holding 16-bit PCM, mono or stereo (stereo is
// averaged to mono). Anything else raises DataError.
WavData read_wav(const std::string& path);

// Writes mono 16-bit PCM; samples are clipped to [-1, 1] and scaled by 32767.
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate);

}  // namespace vvq
