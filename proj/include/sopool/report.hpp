#pragma once

// Human-readable, JSON and CSV renderings of benchmark results.

#include "pipeline.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace sopool {

inline std::string percent_pm(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f \xC2\xB1 %.1f", 100.0 * mean, 100.0 * std);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Wall-clock fields are left out unless asked for, so identical inputs
/// give byte-identical JSON.
inline nlohmann::ordered_json to_json(const BenchmarkReport& r, bool include_timings = false) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : config_entries(r.config)) cfg[k] = v;
  j["config"] = cfg;
  j["subjects"] = r.subjects;
  j["excluded_subjects"] = nlohmann::ordered_json::array();
  for (const auto& e : r.excluded) j["excluded_subjects"].push_back({{"subject", e.subject_id}, {"images", e.image_count}});
  j["split_fingerprint"] = hex64(r.split_fingerprint);
  j["accuracies"] = r.accuracies;
  j["mean"] = r.mean;
  j["std"] = r.std;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : r.runs) {
    j["runs"].push_back({{"accuracy", run.accuracy},
                         {"correct", run.correct},
                         {"total", run.total},
                         {"confusion", {{"labels", run.confusion.labels}, {"counts", run.confusion.counts}}}});
  }
  if (include_timings) {
    nlohmann::ordered_json t;
    for (const auto& [stage, s] : r.stage_seconds) t[stage] = s;
    j["stage_seconds"] = t;
    j["total_seconds"] = r.total_seconds;
  }
  return j;
}

inline nlohmann::ordered_json to_json(const EncodingAblation& a, bool include_timings = false) {
  nlohmann::ordered_json j;
  j["shared_splits"] = a.shared_splits;
  j["with_encoding"] = to_json(a.with_encoding, include_timings);
  j["without_encoding"] = to_json(a.without_encoding, include_timings);
  return j;
}

inline nlohmann::ordered_json to_json(const GridAblation& g, bool include_timings = false) {
  nlohmann::ordered_json j;
  j["dict_sizes"] = g.dict_sizes;
  j["pyramid_levels"] = g.depths;
  j["cells"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < g.depths.size(); ++r)
    for (std::size_t c = 0; c < g.dict_sizes.size(); ++c) {
      auto cell = to_json(g.cells[r][c], include_timings);
      cell["pyramid_levels"] = g.depths[r];
      cell["dict_size"] = g.dict_sizes[c];
      j["cells"].push_back(std::move(cell));
    }
  return j;
}

inline void write_text(std::ostream& out, const BenchmarkReport& r, bool include_timings = false) {
  out << "subjects: " << r.subjects << " (" << r.excluded.size() << " excluded)\n";
  for (const auto& e : r.excluded) out << "  excluded " << e.subject_id << " with " << e.image_count << " images\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "run %zu: %.2f%% (%zu/%zu)\n", i, 100.0 * r.runs[i].accuracy, r.runs[i].correct,
                  r.runs[i].total);
    out << buf;
  }
  out << "accuracy: " << percent_pm(r.mean, r.std) << " %\n";
  if (include_timings) {
    out << "stage seconds:\n";
    for (const auto& [stage, s] : r.stage_seconds) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  %-18s %9.3f\n", stage.c_str(), s);
      out << buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-18s %9.3f\n", "total", r.total_seconds);
    out << buf;
  }
}

/// Rows are pyramid depths, columns dictionary sizes; cells "mean ± std" in percent.
inline void write_grid_csv(std::ostream& out, const GridAblation& g) {
  out << "pyramid_levels";
  for (int k : g.dict_sizes) out << ',' << k;
  out << '\n';
  for (std::size_t r = 0; r < g.depths.size(); ++r) {
    out << g.depths[r];
    for (std::size_t c = 0; c < g.dict_sizes.size(); ++c)
      out << ',' << percent_pm(g.cells[r][c].mean, g.cells[r][c].std);
    out << '\n';
  }
}

}  // namespace sopool
