#include "avfd/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace avfd {

namespace {

std::uint32_t read_u32(std::istream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  std::uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open audio: " + path.string());
  char tag[4];
  in.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) {
    throw ParseError("not a RIFF file: " + path.string());
  }
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) {
    throw ParseError("not a WAVE file: " + path.string());
  }

  Waveform wav;
  bool have_fmt = false;
  while (in.read(tag, 4)) {
    const std::uint32_t size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const std::uint16_t format = read_u16(in);
      const std::uint16_t channels = read_u16(in);
      wav.rate_hz = static_cast<int>(read_u32(in));
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      const std::uint16_t bits = read_u16(in);
      if (format != 1 || channels != 1 || bits != 16) {
        throw ParseError("only mono 16-bit PCM supported: " + path.string());
      }
      if (size > 16) in.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("data before fmt in " + path.string());
      const std::size_t n = size / 2;
      wav.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint16_t raw = read_u16(in);
        const auto v = static_cast<std::int16_t>(raw);
        wav.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return wav;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  throw ParseError("no data chunk in " + path.string());
}

void save_wav(const Waveform& wav, const std::filesystem::path& path) {
  if (wav.rate_hz <= 0) throw InvalidSpec("sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write audio: " + path.string());
  const auto n = static_cast<std::uint32_t>(wav.samples.size());
  out.write("RIFF", 4);
  write_u32(out, 36 + 2 * n);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<std::uint32_t>(wav.rate_hz));
  write_u32(out, static_cast<std::uint32_t>(wav.rate_hz) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, 2 * n);
  for (const double s : wav.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    write_u16(out, static_cast<std::uint16_t>(v));
  }
  if (!out) throw IoError("write failure: " + path.string());
}

}  // namespace avfd
