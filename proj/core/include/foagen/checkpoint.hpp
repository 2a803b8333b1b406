#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foagen/conditioning.hpp"
#include "foagen/model.hpp"
#include "foagen/stft.hpp"

namespace foagen {

inline constexpr char kCheckpointMagic[4] = {'S', 'A', 'G', 'E'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Everything needed to resume training or to sample.
//
// File layout (little-endian):
//   "SAGE" | u32 version | u32 n + n bytes of key=value config text |
//   u32 tensor count | per tensor: u32 name length, name, u8 dtype (1 = f64),
//   u8 rank, u32 dims[rank], raw values.
// Model tensors keep their names; encoder tensors are prefixed "cond.";
// optimizer moments, when present, are stored as "adam.m.<name>" and
// "adam.v.<name>".
struct Checkpoint {
  ModelConfig model_config;
  ParamSet model_params;
  EncoderParams encoder;
  double sigma_data = 1.0;
  StftConfig stft;
  std::vector<std::string> vocabulary;
  std::uint64_t step = 0;
  // Optional; empty when the checkpoint carries no optimizer state.
  ParamSet adam_m;
  ParamSet adam_v;

  friend bool operator==(const Checkpoint& a, const Checkpoint& b) {
    return a.model_config == b.model_config && a.model_params == b.model_params &&
           a.encoder.config == b.encoder.config && a.encoder.params == b.encoder.params &&
           a.sigma_data == b.sigma_data && a.stft == b.stft && a.vocabulary == b.vocabulary &&
           a.step == b.step && a.adam_m == b.adam_m && a.adam_v == b.adam_v;
  }
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Writes to "<path>.tmp" and renames over path.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws FormatError("not a checkpoint"), FormatError("unsupported version"),
// or FormatError("truncated checkpoint") as appropriate; IoError if unreadable.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace foagen
