#include "foagen/checkpoint.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "foagen/error.hpp"

namespace foagen {

namespace {

constexpr std::uint8_t kDtypeF64 = 1;

std::string exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void get_doubles(std::vector<double>& out) {
    need(out.size() * sizeof(double));
    std::memcpy(out.data(), bytes_.data() + pos_, out.size() * sizeof(double));
    pos_ += out.size() * sizeof(double);
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated checkpoint");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void write_tensors(std::string& out, const ParamSet& set, const std::string& prefix) {
  for (const auto& t : set.tensors()) {
    const std::string name = prefix + t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint8_t>(out, kDtypeF64);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (int dim : t.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
  }
}

std::string config_text(const Checkpoint& c) {
  std::ostringstream os;
  const auto& m = c.model_config;
  os << "model.in_channels=" << m.in_channels << '\n'
     << "model.patch_t=" << m.patch_t << '\n'
     << "model.patch_f=" << m.patch_f << '\n'
     << "model.embed_dim=" << m.embed_dim << '\n'
     << "model.depth=" << m.depth << '\n'
     << "model.heads=" << m.heads << '\n'
     << "model.cond_dim=" << m.cond_dim << '\n'
     << "model.time_freq_dim=" << m.time_freq_dim << '\n'
     << "model.mlp_ratio=" << m.mlp_ratio << '\n'
     << "model.seed=" << m.seed << '\n';
  const auto& e = c.encoder.config;
  os << "encoder.num_classes=" << e.num_classes << '\n'
     << "encoder.cond_dim=" << e.cond_dim << '\n'
     << "encoder.angle_freqs=" << e.angle_freqs << '\n'
     << "encoder.seed=" << e.seed << '\n';
  const auto& s = c.stft;
  os << "stft.n_fft=" << s.n_fft << '\n'
     << "stft.win_length=" << s.win_length << '\n'
     << "stft.hop=" << s.hop << '\n'
     << "stft.window=" << window_name(s.window) << '\n'
     << "stft.frames=" << s.frames << '\n'
     << "stft.sample_rate=" << exact(s.sample_rate) << '\n';
  os << "sigma_data=" << exact(c.sigma_data) << '\n' << "step=" << c.step << '\n';
  os << "vocab.count=" << c.vocabulary.size() << '\n';
  for (std::size_t i = 0; i < c.vocabulary.size(); ++i) os << "vocab." << i << '=' << c.vocabulary[i] << '\n';
  return os.str();
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("malformed checkpoint config line: " + line);
      values_[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw FormatError("checkpoint config is missing '" + key + "'");
    return it->second;
  }

  template <typename T>
  T num(const std::string& key) const {
    const std::string& s = str(key);
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw FormatError("checkpoint config value for '" + key + "' is invalid: " + s);
    }
    return v;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string text = config_text(ckpt);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out += text;

  const std::size_t count = ckpt.model_params.tensors().size() + ckpt.encoder.params.tensors().size() +
                            ckpt.adam_m.tensors().size() + ckpt.adam_v.tensors().size();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(count));
  write_tensors(out, ckpt.model_params, "");
  write_tensors(out, ckpt.encoder.params, "");
  write_tensors(out, ckpt.adam_m, "adam.m.");
  write_tensors(out, ckpt.adam_v, "adam.v.");
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("not a checkpoint");
  }
  Reader r(bytes);
  r.get_string(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const auto text_len = r.get<std::uint32_t>();
  const KeyValues kv(r.get_string(text_len));

  Checkpoint c;
  auto& m = c.model_config;
  m.in_channels = kv.num<int>("model.in_channels");
  m.patch_t = kv.num<int>("model.patch_t");
  m.patch_f = kv.num<int>("model.patch_f");
  m.embed_dim = kv.num<int>("model.embed_dim");
  m.depth = kv.num<int>("model.depth");
  m.heads = kv.num<int>("model.heads");
  m.cond_dim = kv.num<int>("model.cond_dim");
  m.time_freq_dim = kv.num<int>("model.time_freq_dim");
  m.mlp_ratio = kv.num<int>("model.mlp_ratio");
  m.seed = kv.num<std::uint64_t>("model.seed");
  m.validate();

  auto& e = c.encoder.config;
  e.num_classes = kv.num<int>("encoder.num_classes");
  e.cond_dim = kv.num<int>("encoder.cond_dim");
  e.angle_freqs = kv.num<int>("encoder.angle_freqs");
  e.seed = kv.num<std::uint64_t>("encoder.seed");
  e.validate();

  auto& s = c.stft;
  s.n_fft = kv.num<int>("stft.n_fft");
  s.win_length = kv.num<int>("stft.win_length");
  s.hop = kv.num<int>("stft.hop");
  s.window = parse_window(kv.str("stft.window"));
  s.frames = kv.num<int>("stft.frames");
  s.sample_rate = kv.num<double>("stft.sample_rate");
  s.validate();

  c.sigma_data = kv.num<double>("sigma_data");
  c.step = kv.num<std::uint64_t>("step");
  const auto vocab = kv.num<std::size_t>("vocab.count");
  for (std::size_t i = 0; i < vocab; ++i) c.vocabulary.push_back(kv.str("vocab." + std::to_string(i)));

  c.model_params = make_model_params(m);
  c.encoder.params = init_encoder(e).params;
  std::map<std::string, ParamTensor> table;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    ParamTensor t;
    t.name = r.get_string(r.get<std::uint32_t>());
    if (r.get<std::uint8_t>() != kDtypeF64) throw FormatError("unsupported tensor dtype for " + t.name);
    const auto rank = r.get<std::uint8_t>();
    std::size_t n = 1;
    for (int k = 0; k < rank; ++k) {
      t.shape.push_back(static_cast<int>(r.get<std::uint32_t>()));
      n *= static_cast<std::size_t>(t.shape.back());
    }
    t.data.resize(n);
    r.get_doubles(t.data);
    table[t.name] = std::move(t);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint tensor table");

  auto fill = [&](ParamSet& set, const std::string& prefix, bool required) {
    bool any = false;
    for (auto& t : set.tensors()) {
      auto it = table.find(prefix + t.name);
      if (it == table.end()) {
        if (required) throw FormatError("checkpoint is missing tensor " + prefix + t.name);
        continue;
      }
      if (it->second.shape != t.shape) throw FormatError("shape mismatch for tensor " + prefix + t.name);
      t.data = std::move(it->second.data);
      table.erase(it);
      any = true;
    }
    return any;
  };
  fill(c.model_params, "", true);
  fill(c.encoder.params, "", true);

  ParamSet layout_m = c.model_params.zeros_like();
  for (const auto& t : c.encoder.params.tensors()) layout_m.add(t.name, t.shape);
  ParamSet layout_v = layout_m.zeros_like();
  const bool has_m = fill(layout_m, "adam.m.", false);
  const bool has_v = fill(layout_v, "adam.v.", false);
  if (has_m != has_v) throw FormatError("checkpoint optimizer state is incomplete");
  if (has_m) {
    c.adam_m = std::move(layout_m);
    c.adam_v = std::move(layout_v);
  }
  if (!table.empty()) throw FormatError("checkpoint has unexpected tensor " + table.begin()->first);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace foagen
