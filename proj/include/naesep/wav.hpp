#ifndef NAESEP_WAV_HPP
#define NAESEP_WAV_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace naesep {

/// Mono waveform, samples nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 0.0;
};

namespace wav_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace wav_detail

/// Reads a RIFF/WAVE file: PCM 16-bit or IEEE float 32-bit. Multichannel
/// input is downmixed to mono by averaging (with a warning on stderr).
inline Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

  using namespace wav_detail;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data_ptr = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t len = get_u32(bytes.data() + pos + 4);
    if (pos + 8 + len > bytes.size()) break;
    if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
      format = get_u16(bytes.data() + pos + 8);
      channels = get_u16(bytes.data() + pos + 10);
      rate = get_u32(bytes.data() + pos + 12);
      bits = get_u16(bytes.data() + pos + 22);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_ptr = bytes.data() + pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word aligned
  }
  if (!data_ptr || channels == 0 || rate == 0)
    throw std::runtime_error("read_wav: missing fmt/data chunk in " + path);
  const bool pcm16 = format == 1 && bits == 16;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !f32)
    throw std::runtime_error("read_wav: unsupported format in " + path +
                             " (PCM16 and float32 only)");
  if (channels > 1)
    std::cerr << "read_wav: warning: downmixing " << channels << " channels to mono ("
              << path << ")\n";

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_len / frame_bytes;
  Waveform w;
  w.sample_rate = static_cast<double>(rate);
  w.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data_ptr + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += static_cast<double>(v);
      }
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

/// Writes a mono WAV. PCM16 clips to [-1, 1]; float32 writes samples as-is.
inline void write_wav(const std::string& path, const Waveform& w, bool float32 = false) {
  using namespace wav_detail;
  const std::uint32_t rate = static_cast<std::uint32_t>(w.sample_rate);
  const std::uint16_t bits = float32 ? 32 : 16;
  const std::uint32_t data_len =
      static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, float32 ? 3 : 1);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * (bits / 8));
  put_u16(out, static_cast<std::uint16_t>(bits / 8));
  put_u16(out, bits);
  out.append("data");
  put_u32(out, data_len);
  for (double s : w.samples) {
    if (float32) {
      const float f = static_cast<float>(s);
      char buf[4];
      std::memcpy(buf, &f, 4);
      out.append(buf, 4);
    } else {
      double c = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
      const std::int16_t v = static_cast<std::int16_t>(std::lround(c * 32767.0));
      put_u16(out, static_cast<std::uint16_t>(v));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_wav: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace naesep

#endif  // NAESEP_WAV_HPP
