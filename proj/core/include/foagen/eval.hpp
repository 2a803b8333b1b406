#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "foagen/doa.hpp"

namespace foagen {

struct MetricRow {
  std::string metric;
  double value = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<MetricRow> rows;

  // Throws ConfigError for an unknown metric name.
  const MetricRow& at(const std::string& metric) const;
};

struct EvalOptions {
  std::size_t grid_size = kDefaultGridSize;
  DecodeWeighting weighting = DecodeWeighting::kBasic;
};

// Both directories carry conditions.txt. Metrics are computed on the W
// channel except DoA:
//   accuracy        oracle fitted on ref, scored on gen labels (%)
//   doa_error_deg   mean DoA error of gen against its conditioned directions
//   doa_ref_deg     same for ref (estimator self-consistency)
//   fd, fad         Frechet distance under the 32- and 16-band embedders
//   kl              posteriors paired by filename
EvalReport eval_report(const std::filesystem::path& gen_dir, const std::filesystem::path& ref_dir,
                       const EvalOptions& opts = {});

// CSV with header "metric,value,count".
std::string report_csv(const EvalReport& r);
void write_report_csv(const std::filesystem::path& path, const EvalReport& r);

// Aligned plain-text table.
std::string report_table(const EvalReport& r);

}  // namespace foagen
