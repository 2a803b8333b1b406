#include "foagen/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "foagen/ambisonics.hpp"
#include "foagen/error.hpp"
#include "foagen/trainer.hpp"
#include "foagen/wav.hpp"

namespace foagen {

std::string render_name(RenderMode m) {
  return m == RenderMode::kAnalytic ? "analytic" : "simulated";
}

RenderMode parse_render(const std::string& name) {
  if (name == "analytic") return RenderMode::kAnalytic;
  if (name == "simulated") return RenderMode::kSimulated;
  throw ConfigError("unknown render mode '" + name + "' (expected analytic or simulated)");
}

Direction random_direction(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double az = -kPi + 2.0 * kPi * u(rng);
  const double el = std::asin(std::clamp(2.0 * u(rng) - 1.0, -1.0, 1.0));
  return Direction(az, el);
}

namespace {

std::string clip_name(int class_id, int index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "c%02d_%04d.wav", class_id, index);
  return buf;
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix_seed(h, seed);
}

}  // namespace

DatasetManifest plan_dataset(const DatasetConfig& cfg) {
  if (cfg.classes.empty()) throw ConfigError("dataset: no classes");
  if (cfg.per_class < 1) throw ConfigError("dataset: per-class count must be >= 1");
  if (cfg.per_class > 9999) throw ConfigError("dataset: per-class count must be <= 9999");
  for (const auto& c : cfg.classes) c.validate(cfg.sample_rate);
  if (cfg.render == RenderMode::kSimulated) cfg.room.validate();

  DatasetManifest m;
  m.sample_rate = cfg.sample_rate;
  m.duration = cfg.duration;
  m.render = cfg.render;
  m.seed = cfg.seed;

  SphereGrid grid;
  if (cfg.directions.mode == DirectionMode::kFibonacci)
    grid = fibonacci_grid(cfg.directions.fibonacci_points);
  Rng dir_rng(mix_seed(cfg.seed, 0xD1EC7ULL));

  std::size_t global = 0;
  for (const auto& spec : cfg.classes) {
    for (int i = 0; i < cfg.per_class; ++i, ++global) {
      ClipEntry e;
      e.filename = clip_name(spec.class_id, i);
      e.class_id = spec.class_id;
      e.render = cfg.render;
      e.seed = mix_seed(cfg.seed, global);
      e.direction = cfg.directions.mode == DirectionMode::kFibonacci
                        ? grid.points[global % grid.size()]
                        : random_direction(dir_rng);
      m.clips.push_back(e);
    }
  }
  split_dataset(m);
  return m;
}

void split_dataset(DatasetManifest& m) {
  std::map<int, std::vector<std::pair<std::uint64_t, std::string>>> by_class;
  for (const auto& c : m.clips) by_class[c.class_id].push_back({fnv1a(c.filename, m.seed), c.filename});
  m.train.clear();
  m.test.clear();
  for (auto& [cls, items] : by_class) {
    std::sort(items.begin(), items.end());
    const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(items.size())));
    for (std::size_t i = 0; i < items.size(); ++i)
      (i < n_train ? m.train : m.test).push_back(items[i].second);
  }
  std::sort(m.train.begin(), m.train.end());
  std::sort(m.test.begin(), m.test.end());
}

namespace {

void write_names(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& n : names) out << n << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

DatasetManifest build_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir) {
  DatasetManifest m = plan_dataset(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::map<int, const SynthClassSpec*> specs;
  for (const auto& s : cfg.classes) specs[s.class_id] = &s;
  const ArraySpec array = ArraySpec::tetrahedral();
  for (const auto& clip : m.clips) {
    const auto mono = synth_mono(*specs.at(clip.class_id), clip.seed, cfg.sample_rate, cfg.duration);
    const FoaWaveform a = clip.render == RenderMode::kAnalytic
                              ? encode_foa(mono, clip.direction, cfg.sample_rate)
                              : simulate_baseline(mono, clip.direction, cfg.room, array);
    try {
      write_foa_wav(out_dir / clip.filename, a);
    } catch (const IoError& e) {
      throw IoError(clip.filename + ": " + e.what());
    }
  }
  write_manifest(out_dir / kConditionsFile, m);
  write_names(out_dir / kTrainSplitFile, m.train);
  write_names(out_dir / kTestSplitFile, m.test);
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ostringstream s;
  s << "# sample_rate=" << fmt_double(m.sample_rate) << '\n'
    << "# duration=" << fmt_double(m.duration) << '\n'
    << "# render=" << render_name(m.render) << '\n'
    << "# seed=" << m.seed << '\n'
    << "# clips=" << m.clips.size() << '\n';
  for (const auto& c : m.clips)
    s << c.filename << ' ' << c.class_id << ' ' << fmt_double(rad_to_deg(c.direction.azimuth()))
      << ' ' << fmt_double(rad_to_deg(c.direction.elevation())) << '\n';
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp);
    out << s.str();
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing condition sidecar: " + path.string());
  DatasetManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(" \t"));
      const std::string val = line.substr(eq + 1);
      try {
        if (key == "sample_rate") m.sample_rate = std::stod(val);
        else if (key == "duration") m.duration = std::stod(val);
        else if (key == "render") m.render = parse_render(val);
        else if (key == "seed") m.seed = std::stoull(val);
      } catch (const std::logic_error&) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad header value");
      }
      continue;
    }
    std::istringstream ls(line);
    ClipEntry e;
    double az = 0, el = 0;
    if (!(ls >> e.filename >> e.class_id >> az >> el) || e.class_id < 0 || !std::isfinite(az) ||
        !std::isfinite(el) || std::abs(el) > 90.0)
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected '<filename> <class_id> <azimuth_deg> <elevation_deg>'");
    e.direction = Direction::from_degrees(az, el);
    e.render = m.render;
    m.clips.push_back(e);
  }
  return m;
}

std::vector<std::string> read_name_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace foagen
