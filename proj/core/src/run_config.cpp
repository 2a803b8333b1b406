#include "foagen/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "foagen/error.hpp"

namespace foagen {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

long long as_int(const std::string& key, const std::string& v) {
  long long x = 0;
  if (!parse_number(v, x)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

double as_double(const std::string& key, const std::string& v) {
  double x = 0;
  if (!parse_number(v, x) || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

using Check = std::function<void(const std::string& key, const std::string& value)>;

Check int_range(long long lo, long long hi) {
  return [lo, hi](const std::string& k, const std::string& v) {
    const long long x = as_int(k, v);
    if (x < lo || x > hi)
      throw ConfigError(k + ": " + v + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  };
}

Check real_range(double lo, double hi, bool lo_open = false) {
  return [lo, hi, lo_open](const std::string& k, const std::string& v) {
    const double x = as_double(k, v);
    if ((lo_open ? x <= lo : x < lo) || x > hi) throw ConfigError(k + ": " + v + " out of range");
  };
}

Check u64() {
  return [](const std::string& k, const std::string& v) {
    std::uint64_t x = 0;
    if (!parse_number(v, x)) throw ConfigError(k + ": expected an unsigned integer, got '" + v + "'");
  };
}

struct SchemaEntry {
  RunConfig::Key key;
  Check check;
};

const std::vector<SchemaEntry>& full_schema() {
  static const std::vector<SchemaEntry> s = {
      {{"seed", "0", "global seed"}, u64()},
      {{"stft.preset", "hann-128", "hann-128 or paper-shape"},
       [](const std::string&, const std::string& v) { StftConfig::from_preset(v); }},
      {{"model.embed_dim", "192", "transformer width"}, int_range(4, 4096)},
      {{"model.depth", "6", "transformer blocks"}, int_range(1, 64)},
      {{"model.heads", "6", "attention heads"}, int_range(1, 64)},
      {{"model.cond_dim", "256", "condition vector width"}, int_range(1, 4096)},
      {{"model.time_freq_dim", "256", "sinusoidal time feature width"}, int_range(2, 4096)},
      {{"model.mlp_ratio", "4", "MLP expansion"}, int_range(1, 16)},
      {{"model.patch_t", "2", "patch size along time"}, int_range(1, 64)},
      {{"model.patch_f", "2", "patch size along frequency"}, int_range(1, 64)},
      {{"encoder.angle_freqs", "16", "sinusoidal frequencies per angle"}, int_range(1, 64)},
      {{"sampler.steps", "250", "ODE steps"}, int_range(1, 100000)},
      {{"sampler.cfg_scale", "4", "guidance scale"}, real_range(0.0, 1e6)},
      {{"sampler.integrator", "euler", "euler or heun"},
       [](const std::string&, const std::string& v) { parse_integrator(v); }},
      {{"train.lr", "0.0001", "Adam learning rate"}, real_range(0.0, 10.0, true)},
      {{"train.beta1", "0.9", "Adam beta1"}, real_range(0.0, 0.999999999)},
      {{"train.beta2", "0.999", "Adam beta2"}, real_range(0.0, 0.999999999)},
      {{"train.batch_size", "8", "items per step"}, int_range(1, 1 << 20)},
      {{"train.epochs", "200", "epochs"}, int_range(0, 1 << 24)},
      {{"train.p_drop", "0.1", "condition drop probability"}, real_range(0.0, 1.0)},
      {{"room.dims", "30x20x10", "room size in metres, LxWxH"},
       [](const std::string&, const std::string& v) { parse_room_dims(v); }},
      {{"room.absorption", "0.5", "wall absorption"}, real_range(0.0, 1.0)},
      {{"room.order", "6", "maximum image order"}, int_range(0, 64)},
      {{"room.sound_speed", "343", "m/s"}, real_range(0.0, 1e5, true)},
      {{"doa.grid_size", "900", "Fibonacci grid points"}, int_range(2, 1 << 20)},
      {{"doa.weighting", "basic", "basic or max-re"},
       [](const std::string&, const std::string& v) { parse_weighting(v); }},
  };
  return s;
}

const SchemaEntry* find_entry(const std::string& key) {
  for (const auto& e : full_schema())
    if (e.key.name == key) return &e;
  return nullptr;
}

}  // namespace

Eigen::Vector3d parse_room_dims(const std::string& text) {
  Eigen::Vector3d d;
  std::string rest = text;
  for (int i = 0; i < 3; ++i) {
    const auto x = rest.find_first_of("xX");
    const std::string part = i < 2 ? rest.substr(0, x) : rest;
    if ((i < 2 && x == std::string::npos) || !parse_number(part, d[i]) || !std::isfinite(d[i]))
      throw ConfigError("room dims must look like LxWxH, got '" + text + "'");
    if (!(d[i] > 0.0)) throw ConfigError("room dims must be > 0, got '" + text + "'");
    if (i < 2) rest = rest.substr(x + 1);
  }
  return d;
}

const std::vector<RunConfig::Key>& RunConfig::schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    for (const auto& e : full_schema()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& e : full_schema()) values_[e.key.name] = {e.key.default_value, ValueSource::kDefault};
}

void RunConfig::set(const std::string& key, const std::string& value, ValueSource source) {
  const SchemaEntry* e = find_entry(key);
  if (!e) throw ConfigError("unknown config key '" + key + "'");
  const std::string v = trim(value);
  e->check(key, v);
  Entry& cur = values_[key];
  if (static_cast<int>(source) < static_cast<int>(cur.source)) return;
  cur = {v, source};
}

void RunConfig::parse_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1), ValueSource::kFile);
    } catch (const ConfigError& err) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + err.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  parse_text(s.str(), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.value;
}

ValueSource RunConfig::source(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.source;
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(as_int(key, get(key)));
}

double RunConfig::get_double(const std::string& key) const { return as_double(key, get(key)); }

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  std::uint64_t x = 0;
  parse_number(get(key), x);
  return x;
}

StftConfig RunConfig::stft() const { return StftConfig::from_preset(get("stft.preset")); }

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.embed_dim = get_int("model.embed_dim");
  m.depth = get_int("model.depth");
  m.heads = get_int("model.heads");
  m.cond_dim = get_int("model.cond_dim");
  m.time_freq_dim = get_int("model.time_freq_dim");
  m.mlp_ratio = get_int("model.mlp_ratio");
  m.patch_t = get_int("model.patch_t");
  m.patch_f = get_int("model.patch_f");
  m.seed = get_u64("seed");
  m.validate();
  return m;
}

EncoderConfig RunConfig::encoder(int num_classes) const {
  EncoderConfig e;
  e.num_classes = num_classes;
  e.cond_dim = get_int("model.cond_dim");
  e.angle_freqs = get_int("encoder.angle_freqs");
  e.seed = get_u64("seed");
  e.validate();
  return e;
}

SamplerConfig RunConfig::sampler() const {
  SamplerConfig s;
  s.steps = get_int("sampler.steps");
  s.cfg_scale = get_double("sampler.cfg_scale");
  s.integrator = parse_integrator(get("sampler.integrator"));
  s.seed = get_u64("seed");
  s.validate();
  return s;
}

TrainConfig RunConfig::train() const {
  TrainConfig t;
  t.adam.lr = get_double("train.lr");
  t.adam.beta1 = get_double("train.beta1");
  t.adam.beta2 = get_double("train.beta2");
  t.batch_size = get_int("train.batch_size");
  t.epochs = get_int("train.epochs");
  t.p_drop = get_double("train.p_drop");
  t.seed = get_u64("seed");
  t.validate();
  return t;
}

RoomSpec RunConfig::room() const {
  RoomSpec r;
  r.dimensions = parse_room_dims(get("room.dims"));
  r.absorption = get_double("room.absorption");
  r.max_image_order = get_int("room.order");
  r.speed_of_sound = get_double("room.sound_speed");
  r.validate();
  return r;
}

std::size_t RunConfig::grid_size() const {
  return static_cast<std::size_t>(get_int("doa.grid_size"));
}

DecodeWeighting RunConfig::weighting() const { return parse_weighting(get("doa.weighting")); }

std::string RunConfig::dump() const {
  std::ostringstream s;
  for (const auto& k : schema()) s << k.name << " = " << get(k.name) << '\n';
  return s.str();
}

}  // namespace foagen
