#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "foagen/doa.hpp"
#include "foagen/flow.hpp"
#include "foagen/model.hpp"
#include "foagen/room.hpp"
#include "foagen/stft.hpp"
#include "foagen/trainer.hpp"

namespace foagen {

enum class ValueSource { kDefault, kFile, kFlag };

// Flat key=value configuration covering every module. Keys are fixed by a
// schema; unknown keys and unparsable or out-of-range values are rejected
// when set. Precedence: flag > file > default.
class RunConfig {
 public:
  RunConfig();

  struct Key {
    std::string name;
    std::string default_value;
    std::string help;
  };
  static const std::vector<Key>& schema();

  void set(const std::string& key, const std::string& value, ValueSource source);
  void load_file(const std::filesystem::path& path);
  void parse_text(const std::string& text, const std::string& origin = "<config>");

  const std::string& get(const std::string& key) const;
  ValueSource source(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  StftConfig stft() const;
  ModelConfig model() const;
  EncoderConfig encoder(int num_classes) const;
  SamplerConfig sampler() const;
  TrainConfig train() const;
  RoomSpec room() const;
  std::size_t grid_size() const;
  DecodeWeighting weighting() const;

  // Canonical "key = value" text of the full configuration.
  std::string dump() const;

 private:
  struct Entry {
    std::string value;
    ValueSource source = ValueSource::kDefault;
  };
  std::map<std::string, Entry> values_;
};

// "30x20x10" -> metres; each side must be > 0.
Eigen::Vector3d parse_room_dims(const std::string& text);

}  // namespace foagen
