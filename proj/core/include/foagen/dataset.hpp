#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foagen/conditioning.hpp"
#include "foagen/geometry.hpp"
#include "foagen/room.hpp"
#include "foagen/synth.hpp"

namespace foagen {

enum class RenderMode { kAnalytic, kSimulated };
std::string render_name(RenderMode m);
RenderMode parse_render(const std::string& name);

enum class DirectionMode { kFibonacci, kRandom };

struct DirectionSpec {
  DirectionMode mode = DirectionMode::kRandom;
  std::size_t fibonacci_points = 900;  // used by kFibonacci
};

inline constexpr char kConditionsFile[] = "conditions.txt";
inline constexpr char kTrainSplitFile[] = "train.txt";
inline constexpr char kTestSplitFile[] = "test.txt";

struct ClipEntry {
  std::string filename;
  int class_id = 0;
  Direction direction;
  RenderMode render = RenderMode::kAnalytic;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  double sample_rate = 16000.0;
  double duration = 1.0;
  RenderMode render = RenderMode::kAnalytic;
  std::uint64_t seed = 0;
  std::vector<ClipEntry> clips;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

struct DatasetConfig {
  std::vector<SynthClassSpec> classes;
  int per_class = 0;
  DirectionSpec directions;
  RenderMode render = RenderMode::kAnalytic;
  RoomSpec room;
  std::uint64_t seed = 0;
  double sample_rate = 16000.0;
  double duration = 1.0;
};

// Uniform on the sphere: azimuth uniform, sin(elevation) uniform.
Direction random_direction(Rng& rng);

// Clip list without rendering: names, labels, directions and per-clip seeds.
DatasetManifest plan_dataset(const DatasetConfig& cfg);

// Renders every clip of the plan into out_dir as 4-channel float WAV and
// writes conditions.txt, train.txt and test.txt.
DatasetManifest build_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);

// Per class, the first round(0.8 n) clips in seed-stable hash order go to
// train, the rest to test.
void split_dataset(DatasetManifest& m);

// Sidecar IO. Header lines start with '#'; each other line is
// "<filename> <class_id> <azimuth_deg> <elevation_deg>".
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

std::vector<std::string> read_name_list(const std::filesystem::path& path);

}  // namespace foagen
