#include "foagen/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "foagen/dataset.hpp"
#include "foagen/embedding.hpp"
#include "foagen/error.hpp"
#include "foagen/frechet.hpp"
#include "foagen/wav.hpp"

namespace foagen {

const MetricRow& EvalReport::at(const std::string& metric) const {
  for (const auto& r : rows)
    if (r.metric == metric) return r;
  throw ConfigError("no metric '" + metric + "' in report");
}

namespace {

struct LoadedSet {
  std::vector<ClipEntry> clips;
  std::vector<FoaWaveform> audio;
};

LoadedSet load_set(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  const auto sidecar = dir / kConditionsFile;
  if (!std::filesystem::exists(sidecar))
    throw ConfigError("missing condition sidecar: " + sidecar.string());
  DatasetManifest m = read_manifest(sidecar);
  if (m.clips.empty()) throw ConfigError("empty condition sidecar: " + sidecar.string());
  std::sort(m.clips.begin(), m.clips.end(),
            [](const ClipEntry& a, const ClipEntry& b) { return a.filename < b.filename; });
  LoadedSet s;
  s.clips = m.clips;
  for (const auto& c : s.clips) s.audio.push_back(read_foa_wav(dir / c.filename));
  return s;
}

struct DoaSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

DoaSummary mean_doa_error(const LoadedSet& s, const SphereGrid& grid, DecodeWeighting w) {
  double sum = 0.0;
  DoaSummary out;
  for (std::size_t i = 0; i < s.clips.size(); ++i) {
    try {
      sum += doa_error(estimate_doa(s.audio[i], grid, w).direction, s.clips[i].direction);
      ++out.count;
    } catch (const NoSignalError&) {
      // Silent clips have no direction; they are left out of the mean.
    }
  }
  if (out.count) out.mean = sum / static_cast<double>(out.count);
  return out;
}

EmbeddingStats stats_of(const LoadedSet& s, const Embedder& e) {
  std::vector<Eigen::VectorXd> emb;
  emb.reserve(s.audio.size());
  for (const auto& a : s.audio) emb.push_back(e.embed(a.channel(kW)));
  return compute_stats(emb);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

EvalReport eval_report(const std::filesystem::path& gen_dir, const std::filesystem::path& ref_dir,
                       const EvalOptions& opts) {
  const LoadedSet gen = load_set(gen_dir);
  const LoadedSet ref = load_set(ref_dir);
  const SphereGrid grid = fibonacci_grid(opts.grid_size);
  EvalReport r;

  ClassifierOracle oracle;
  {
    std::vector<std::vector<double>> clips;
    std::vector<int> labels;
    for (std::size_t i = 0; i < ref.clips.size(); ++i) {
      clips.push_back(ref.audio[i].channel(kW));
      labels.push_back(ref.clips[i].class_id);
    }
    oracle.fit(clips, labels);
  }
  std::vector<std::vector<double>> gen_post;
  std::vector<int> gen_labels;
  for (std::size_t i = 0; i < gen.clips.size(); ++i) {
    gen_post.push_back(oracle.posterior(gen.audio[i].channel(kW)));
    gen_labels.push_back(gen.clips[i].class_id);
  }
  r.rows.push_back({"accuracy", class_accuracy(gen_post, gen_labels), gen.clips.size()});

  const DoaSummary dg = mean_doa_error(gen, grid, opts.weighting);
  const DoaSummary dr = mean_doa_error(ref, grid, opts.weighting);
  r.rows.push_back({"doa_error_deg", dg.mean, dg.count});
  r.rows.push_back({"doa_ref_deg", dr.mean, dr.count});

  const auto fd_e = fd_embedder();
  const auto fad_e = fad_embedder();
  const bool enough = gen.clips.size() >= 2 && ref.clips.size() >= 2;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.rows.push_back({"fd", enough ? frechet_distance(stats_of(gen, fd_e), stats_of(ref, fd_e)) : nan,
                    gen.clips.size()});
  r.rows.push_back(
      {"fad", enough ? frechet_distance(stats_of(gen, fad_e), stats_of(ref, fad_e)) : nan,
       gen.clips.size()});

  std::map<std::string, std::size_t> ref_index;
  for (std::size_t i = 0; i < ref.clips.size(); ++i) ref_index[ref.clips[i].filename] = i;
  std::vector<std::vector<double>> kg, kr;
  for (std::size_t i = 0; i < gen.clips.size(); ++i) {
    auto it = ref_index.find(gen.clips[i].filename);
    if (it == ref_index.end()) continue;
    kg.push_back(gen_post[i]);
    kr.push_back(oracle.posterior(ref.audio[it->second].channel(kW)));
  }
  r.rows.push_back({"kl", kg.empty() ? nan : kl_divergence(kg, kr), kg.size()});
  return r;
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream s;
  s << "metric,value,count\n";
  for (const auto& row : r.rows) {
    char buf[64];
    std::string v = "nan";
    if (!std::isnan(row.value)) {
      auto res = std::to_chars(buf, buf + sizeof buf, row.value);
      v.assign(buf, res.ptr);
    }
    s << row.metric << ',' << v << ',' << row.count << '\n';
  }
  return s.str();
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << report_csv(r);
  if (!out) throw IoError("write failed: " + path.string());
}

std::string report_table(const EvalReport& r) {
  std::size_t w0 = 6, w1 = 5;
  for (const auto& row : r.rows) {
    w0 = std::max(w0, row.metric.size());
    w1 = std::max(w1, fmt(row.value).size());
  }
  std::ostringstream s;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %*s  %s\n", static_cast<int>(w0), "metric",
                static_cast<int>(w1), "value", "count");
  s << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-*s  %*s  %zu\n", static_cast<int>(w0), row.metric.c_str(),
                  static_cast<int>(w1), fmt(row.value).c_str(), row.count);
    s << line;
  }
  return s.str();
}

}  // namespace foagen
