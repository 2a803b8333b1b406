#include "foagen/wav.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "foagen/error.hpp"

namespace foagen {

namespace {

static_assert(std::endian::native == std::endian::little, "WAV IO assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(where + "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const auto size = read_le<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a data chunk whose declared size overruns the file.
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes.data() + body;
        data_size = bytes.size() - body;
        break;
      }
      throw FormatError(where + "truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(where + "fmt chunk too short");
      format = read_le<std::uint16_t>(chunk + 8);
      channels = read_le<std::uint16_t>(chunk + 10);
      rate = read_le<std::uint32_t>(chunk + 12);
      bits = read_le<std::uint16_t>(chunk + 22);
      if (format == kFormatExtensible && size >= 40) {
        format = read_le<std::uint16_t>(chunk + 32);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0) throw FormatError(where + "missing fmt chunk");
  if (data == nullptr) throw FormatError(where + "missing data chunk");

  const bool is_float = format == kFormatFloat && bits == 32;
  const bool is_pcm16 = format == kFormatPcm && bits == 16;
  if (!is_float && !is_pcm16) {
    throw FormatError(where + "unsupported sample format (need 32-bit float or 16-bit PCM)");
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data_size / frame_bytes;

  WavData wav;
  wav.sample_rate = rate;
  wav.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * (bits / 8);
      wav.channels[c][i] = is_float ? static_cast<double>(read_le<float>(p))
                                    : read_le<std::int16_t>(p) / 32768.0;
    }
  }
  return wav;
}

void write_wav(const std::filesystem::path& path, const WavData& wav) {
  if (wav.channels.empty()) throw ConfigError("write_wav: no channels");
  const std::size_t frames = wav.channels[0].size();
  for (const auto& ch : wav.channels) {
    if (ch.size() != frames) throw ConfigError("write_wav: channels differ in length");
  }
  const auto channels = static_cast<std::uint16_t>(wav.channels.size());
  const auto rate = static_cast<std::uint32_t>(wav.sample_rate);
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * channels * 4);

  std::string out;
  out.reserve(58 + data_size);
  out += "RIFF";
  put_le<std::uint32_t>(out, 50 + data_size);
  out += "WAVE";
  out += "fmt ";
  put_le<std::uint32_t>(out, 18);
  put_le<std::uint16_t>(out, kFormatFloat);
  put_le<std::uint16_t>(out, channels);
  put_le<std::uint32_t>(out, rate);
  put_le<std::uint32_t>(out, rate * channels * 4);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(channels * 4));
  put_le<std::uint16_t>(out, 32);
  put_le<std::uint16_t>(out, 0);
  out += "fact";
  put_le<std::uint32_t>(out, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(frames));
  out += "data";
  put_le<std::uint32_t>(out, data_size);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : wav.channels) put_le<float>(out, static_cast<float>(ch[i]));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path.string());
}

FoaWaveform read_foa_wav(const std::filesystem::path& path) {
  WavData wav = read_wav(path);
  if (wav.channels.size() != kFoaChannels) {
    throw ConfigError(path.string() + ": expected 4 channels (W,Y,Z,X), found " +
                      std::to_string(wav.channels.size()));
  }
  return FoaWaveform({std::move(wav.channels[0]), std::move(wav.channels[1]),
                      std::move(wav.channels[2]), std::move(wav.channels[3])},
                     wav.sample_rate);
}

void write_foa_wav(const std::filesystem::path& path, const FoaWaveform& a) {
  WavData wav;
  wav.sample_rate = a.sample_rate();
  wav.channels.assign(a.channels().begin(), a.channels().end());
  write_wav(path, wav);
}

}  // namespace foagen
