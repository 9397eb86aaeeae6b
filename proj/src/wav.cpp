#include "vvq/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "vvq/errors.hpp"

namespace vvq {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff),
                     static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff),
                     static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_wav: cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError("read_wav: '" + path + "' is not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      throw DataError("read_wav: truncated chunk in '" + path + "'");
    }
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("read_wav: malformed fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw DataError("read_wav: missing fmt or data chunk in '" + path + "'");
  }
  if (format != 1) {
    throw DataError("read_wav: unsupported encoding (only PCM is handled)");
  }
  if (bits != 16) {
    throw DataError("read_wav: unsupported sample width (16-bit only)");
  }
  if (channels != 1 && channels != 2) {
    throw DataError("read_wav: unsupported channel count (mono/stereo only)");
  }
  if (sample_rate == 0) throw DataError("read_wav: zero sample rate");

  WavData wav;
  wav.sample_rate = static_cast<int>(sample_rate);
  const std::size_t frame_bytes = 2u * channels;
  const std::size_t count = data_size / frame_bytes;
  wav.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      std::int16_t s;
      std::memcpy(&s, data + i * frame_bytes + 2 * c, 2);
      acc += static_cast<double>(s);
    }
    wav.samples[i] = acc / (channels * 32768.0);
  }
  return wav;
}

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate) {
  if (sample_rate <= 0) throw DataError("write_wav: sample rate must be > 0");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_wav: cannot open '" + path + "'");

  const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits per sample
  out.write("data", 4);
  put_u32(out, data_size);
  for (double x : samples) {
    const double clipped = x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
    const auto s = static_cast<std::int16_t>(std::lrint(clipped * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }
  if (!out) throw DataError("write_wav: write failed for '" + path + "'");
}

}  // namespace vvq
