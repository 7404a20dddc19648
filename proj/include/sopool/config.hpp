#pragma once

#include "common.hpp"
#include "pooling.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sopool {

enum class EncodingMode { encode, passthrough };

inline std::string to_string(EncodingMode m) { return m == EncodingMode::encode ? "encode" : "passthrough"; }

inline EncodingMode parse_encoding_mode(const std::string& s) {
  if (s == "encode") return EncodingMode::encode;
  if (s == "passthrough") return EncodingMode::passthrough;
  throw Error("config", "encoding mode must be 'encode' or 'passthrough', got '" + s + "'");
}

/// Every knob of the pipeline. Defaults follow the reference setup:
/// 64×64 images, 6×6 patches at stride 1, 20 atoms, α = 0.25 and a
/// 5-level pyramid.
struct PipelineConfig {
  int target_side = 64;
  int target_cols = 0;  // 0: square images
  int patch_side = 6;
  int stride = 1;
  int dict_size = 20;
  double alpha = 0.25;
  std::vector<int> grids{1, 2, 4, 6, 8};
  double eps_zca = 0.1;
  double eps_spd = 1e-3;
  double lambda = 1.0;
  bool l2_normalize = true;
  EncodingMode encoding = EncodingMode::encode;
  std::uint64_t seed = 0;
  int runs = 5;
  int train_per_subject = 5;
  int test_per_subject = 2;
  int kmeans_iters = 100;
  bool normalize_atoms = true;
  std::int64_t max_sample_patches = 500'000;
  bool shared_dictionary = false;

  int image_cols() const { return target_cols > 0 ? target_cols : target_side; }

  PyramidConfig pyramid() const { return PyramidConfig{grids, eps_spd, l2_normalize}; }

  /// Width of the pooled code vectors: 2K when encoding, r² otherwise.
  Eigen::Index code_width() const {
    return encoding == EncodingMode::encode ? 2 * static_cast<Eigen::Index>(dict_size)
                                            : static_cast<Eigen::Index>(patch_side) * patch_side;
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw Error("config", msg); };
    if (patch_side < 1) fail("patch_side must be >= 1");
    if (stride < 1) fail("stride must be >= 1");
    if (target_side < patch_side + 1) fail("target_side must be at least patch_side + 1");
    if (target_cols != 0 && target_cols < patch_side + 1) fail("target_cols must be at least patch_side + 1");
    if (encoding == EncodingMode::encode && dict_size < 1) fail("dict_size must be >= 1");
    if (!(alpha >= 0.0)) fail("alpha must be >= 0");
    if (!(eps_zca >= 0.0)) fail("eps_zca must be >= 0");
    if (!(lambda > 0.0)) fail("lambda must be > 0");
    if (runs < 1) fail("runs must be >= 1");
    if (train_per_subject < 1 || test_per_subject < 1) fail("per-subject split counts must be >= 1");
    if (kmeans_iters < 0) fail("kmeans_iters must be >= 0");
    if (max_sample_patches < 1) fail("max_sample_patches must be >= 1");
    pyramid().validate();
  }
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_grids(const std::vector<int>& grids) {
  std::string s;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(grids[i]);
  }
  return s;
}

inline std::vector<int> parse_grids(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw Error("config", "bad grid list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error("config", "empty grid list");
  return out;
}

/// Ordered key=value pairs; doubles use 17 significant digits so the
/// round trip is exact.
inline std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& c) {
  return {
      {"target_side", std::to_string(c.target_side)},
      {"target_cols", std::to_string(c.target_cols)},
      {"patch_side", std::to_string(c.patch_side)},
      {"stride", std::to_string(c.stride)},
      {"dict_size", std::to_string(c.dict_size)},
      {"alpha", format_double(c.alpha)},
      {"grids", format_grids(c.grids)},
      {"eps_zca", format_double(c.eps_zca)},
      {"eps_spd", format_double(c.eps_spd)},
      {"lambda", format_double(c.lambda)},
      {"l2_normalize", c.l2_normalize ? "true" : "false"},
      {"encoding", to_string(c.encoding)},
      {"seed", std::to_string(c.seed)},
      {"runs", std::to_string(c.runs)},
      {"train_per_subject", std::to_string(c.train_per_subject)},
      {"test_per_subject", std::to_string(c.test_per_subject)},
      {"kmeans_iters", std::to_string(c.kmeans_iters)},
      {"normalize_atoms", c.normalize_atoms ? "true" : "false"},
      {"max_sample_patches", std::to_string(c.max_sample_patches)},
      {"shared_dictionary", c.shared_dictionary ? "true" : "false"},
  };
}

inline std::string serialize_config(const PipelineConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
  return out;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error("config", "bad value '" + value + "' for " + key);
  return v;
}

inline double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size())
    throw Error("config", "bad value '" + value + "' for " + key);
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error("config", "bad boolean '" + value + "' for " + key);
}

}  // namespace detail

/// Applies one key=value setting; unknown keys are an error.
inline void set_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_number;
  using detail::parse_real;
  if (key == "target_side") c.target_side = parse_number<int>(key, value);
  else if (key == "target_cols") c.target_cols = parse_number<int>(key, value);
  else if (key == "patch_side") c.patch_side = parse_number<int>(key, value);
  else if (key == "stride") c.stride = parse_number<int>(key, value);
  else if (key == "dict_size") c.dict_size = parse_number<int>(key, value);
  else if (key == "alpha") c.alpha = parse_real(key, value);
  else if (key == "grids") c.grids = parse_grids(value);
  else if (key == "eps_zca") c.eps_zca = parse_real(key, value);
  else if (key == "eps_spd") c.eps_spd = parse_real(key, value);
  else if (key == "lambda") c.lambda = parse_real(key, value);
  else if (key == "l2_normalize") c.l2_normalize = parse_bool(key, value);
  else if (key == "encoding") c.encoding = parse_encoding_mode(value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "runs") c.runs = parse_number<int>(key, value);
  else if (key == "train_per_subject") c.train_per_subject = parse_number<int>(key, value);
  else if (key == "test_per_subject") c.test_per_subject = parse_number<int>(key, value);
  else if (key == "kmeans_iters") c.kmeans_iters = parse_number<int>(key, value);
  else if (key == "normalize_atoms") c.normalize_atoms = parse_bool(key, value);
  else if (key == "max_sample_patches") c.max_sample_patches = parse_number<std::int64_t>(key, value);
  else if (key == "shared_dictionary") c.shared_dictionary = parse_bool(key, value);
  else throw Error("config", "unknown config key '" + key + "'");
}

inline PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config", "malformed config line '" + line + "'");
    set_config_value(c, line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

}  // namespace sopool
