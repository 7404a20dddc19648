#pragma once

// End-to-end pipeline: patch sampling, whitening and dictionary fitting,
// descriptor extraction, ridge training, evaluation and the split-based
// benchmark / ablation protocols.

#include "binary_io.hpp"
#include "classifier.hpp"
#include "common.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "dictionary.hpp"
#include "encoding.hpp"
#include "parallel.hpp"
#include "patches.hpp"
#include "pooling.hpp"
#include "rng.hpp"
#include "whitening.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace sopool {

// ---------------------------------------------------------------------------
// Stage timing

/// Lap timer: each lap() charges the time since the previous lap to a
/// stage, so the stage totals cover the whole timed span.
class StageTimer {
 public:
  using Clock = std::chrono::steady_clock;

  StageTimer() : start_(Clock::now()), last_(start_) {}

  void lap(const std::string& stage) {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    for (auto& [name, total] : stages_) {
      if (name == stage) {
        total += s;
        return;
      }
    }
    stages_.emplace_back(stage, s);
  }

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  const std::vector<std::pair<std::string, double>>& stages() const { return stages_; }

 private:
  Clock::time_point start_;
  Clock::time_point last_;
  std::vector<std::pair<std::string, double>> stages_;
};

// ---------------------------------------------------------------------------
// Feature extraction

/// Everything needed to turn an image into a pooled descriptor.
struct FeatureExtractor {
  PipelineConfig config;
  ZcaTransform zca;
  Dictionary dictionary;  // empty in passthrough mode

  /// Whitened, encoded (or passed-through) codes for one image.
  RowMatrix codes(const RowMatrix& pixels, PatchSet* geometry = nullptr) const {
    PatchSet ps = extract_patches(pixels, config.patch_side, config.stride);
    normalize_rows(ps.vectors);
    RowMatrix white = apply_zca(zca, ps.vectors);
    RowMatrix out = config.encoding == EncodingMode::encode
                        ? encode(white, dictionary, config.alpha).codes
                        : passthrough(white).codes;
    if (geometry) {
      ps.vectors.resize(0, 0);
      *geometry = std::move(ps);
    }
    return out;
  }

  PooledDescriptor describe(const RowMatrix& pixels, const PyramidConfig& pyramid) const {
    PatchSet geometry;
    const RowMatrix c = codes(pixels, &geometry);
    return pool_pyramid(c, geometry.grid_coords, geometry.grid_rows, geometry.grid_cols, pyramid);
  }

  PooledDescriptor describe(const RowMatrix& pixels) const { return describe(pixels, config.pyramid()); }

  Eigen::Index descriptor_dim() const { return descriptor_length(config.code_width(), config.grids); }
};

/// Descriptors for images[indices[k]] as rows, computed across the worker
/// pool. One matrix per pyramid, sharing the per-image codes.
inline std::vector<RowMatrix> describe_images(const FeatureExtractor& fx, const std::vector<GrayImage>& images,
                                              const std::vector<std::size_t>& indices,
                                              const std::vector<PyramidConfig>& pyramids) {
  std::vector<RowMatrix> out;
  for (const auto& p : pyramids) {
    p.validate();
    out.emplace_back(static_cast<Eigen::Index>(indices.size()), descriptor_length(fx.config.code_width(), p.grids));
  }
  parallel_for(indices.size(), [&](std::size_t k) {
    const GrayImage& img = images.at(indices[k]);
    PatchSet geometry;
    const RowMatrix c = with_stage("descriptors", [&] { return fx.codes(img.pixels, &geometry); });
    for (std::size_t p = 0; p < pyramids.size(); ++p) {
      const PooledDescriptor d = with_stage("pooling", [&] {
        return pool_pyramid(c, geometry.grid_coords, geometry.grid_rows, geometry.grid_cols, pyramids[p]);
      });
      out[p].row(static_cast<Eigen::Index>(k)) = d.values.transpose();
    }
  });
  return out;
}

inline RowMatrix describe_images(const FeatureExtractor& fx, const std::vector<GrayImage>& images,
                                 const std::vector<std::size_t>& indices) {
  return std::move(describe_images(fx, images, indices, {fx.config.pyramid()}).front());
}

/// Selection sampling (Knuth's Algorithm S): `want` of `total` positions in
/// ascending order, uniformly at random.
inline std::vector<std::int64_t> sample_positions(std::int64_t total, std::int64_t want, std::uint64_t key) {
  std::vector<std::int64_t> out;
  if (want >= total) {
    out.resize(static_cast<std::size_t>(total));
    std::iota(out.begin(), out.end(), std::int64_t{0});
    return out;
  }
  out.reserve(static_cast<std::size_t>(want));
  CounterRng rng(key);
  for (std::int64_t t = 0; t < total && static_cast<std::int64_t>(out.size()) < want; ++t) {
    const auto remaining = static_cast<double>(total - t);
    const auto needed = static_cast<double>(want - static_cast<std::int64_t>(out.size()));
    if (remaining * rng.uniform01() < needed) out.push_back(t);
  }
  return out;
}

/// Contrast-normalized patches from the training images, subsampled to at
/// most cfg.max_sample_patches with a generator keyed on cfg.seed.
inline RowMatrix sample_training_patches(const std::vector<GrayImage>& images,
                                         const std::vector<std::size_t>& indices, const PipelineConfig& cfg) {
  std::vector<std::int64_t> offsets(indices.size() + 1, 0);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const GrayImage& img = images.at(indices[k]);
    const std::int64_t gr = grid_extent(img.rows(), cfg.patch_side, cfg.stride);
    const std::int64_t gc = grid_extent(img.cols(), cfg.patch_side, cfg.stride);
    offsets[k + 1] = offsets[k] + gr * gc;
  }
  const std::vector<std::int64_t> picks =
      sample_positions(offsets.back(), cfg.max_sample_patches, combine_keys(cfg.seed, hash_string("patch-sample")));

  const Eigen::Index dim = static_cast<Eigen::Index>(cfg.patch_side) * cfg.patch_side;
  RowMatrix sample(static_cast<Eigen::Index>(picks.size()), dim);
  parallel_for(indices.size(), [&](std::size_t k) {
    auto first = std::lower_bound(picks.begin(), picks.end(), offsets[k]);
    const auto last = std::lower_bound(picks.begin(), picks.end(), offsets[k + 1]);
    if (first == last) return;
    PatchSet ps = extract_patches(images.at(indices[k]).pixels, cfg.patch_side, cfg.stride);
    for (; first != last; ++first) {
      const auto row = static_cast<Eigen::Index>(first - picks.begin());
      sample.row(row) = ps.vectors.row(*first - offsets[k]);
      normalize_patch_inplace(sample.row(row));
    }
  });
  return sample;
}

/// Fits whitening and (when encoding) the K-means dictionary on the
/// training images.
inline FeatureExtractor fit_extractor(const std::vector<GrayImage>& images, const std::vector<std::size_t>& indices,
                                      const PipelineConfig& cfg, StageTimer* timer = nullptr) {
  cfg.validate();
  if (indices.empty()) throw Error("pipeline", "no training images");
  auto lap = [&](const char* stage) {
    if (timer) timer->lap(stage);
  };
  FeatureExtractor fx;
  fx.config = cfg;
  const RowMatrix sample = with_stage("patches", [&] { return sample_training_patches(images, indices, cfg); });
  lap("patches");
  fx.zca = with_stage("whitening", [&] { return fit_zca(sample, cfg.eps_zca); });
  lap("whitening");
  if (cfg.encoding == EncodingMode::encode) {
    fx.dictionary = with_stage("dictionary", [&] {
      const RowMatrix white = apply_zca(fx.zca, sample);
      return train_kmeans(white, cfg.dict_size, cfg.kmeans_iters, cfg.seed, cfg.normalize_atoms);
    });
    lap("dictionary");
  }
  return fx;
}

// ---------------------------------------------------------------------------
// Model

struct Model {
  FeatureExtractor extractor;
  RidgeModel ridge;

  const PipelineConfig& config() const { return extractor.config; }
};

inline std::vector<std::string> labels_of(const std::vector<GrayImage>& images, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(images.at(i).subject_id);
  return out;
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

/// Ridge classifier over descriptors of the given images.
inline RidgeModel enroll(const FeatureExtractor& fx, const std::vector<GrayImage>& images,
                         const std::vector<std::size_t>& indices, StageTimer* timer = nullptr) {
  const RowMatrix x = describe_images(fx, images, indices);
  if (timer) timer->lap("train_descriptors");
  RidgeModel ridge = with_stage("classifier", [&] { return train_ridge(x, labels_of(images, indices), fx.config.lambda); });
  if (timer) timer->lap("ridge");
  return ridge;
}

/// patches → whitening → dictionary → encoding → pooling → ridge.
inline Model fit_pipeline(const std::vector<GrayImage>& images, const std::vector<std::size_t>& indices,
                          const PipelineConfig& cfg, StageTimer* timer = nullptr) {
  std::vector<std::string> subjects = labels_of(images, indices);
  std::sort(subjects.begin(), subjects.end());
  if (std::unique(subjects.begin(), subjects.end()) - subjects.begin() < 2)
    throw Error("pipeline", "training set needs at least 2 subjects");
  Model m;
  m.extractor = fit_extractor(images, indices, cfg, timer);
  m.ridge = enroll(m.extractor, images, indices, timer);
  return m;
}

inline Model fit_pipeline(const std::vector<GrayImage>& images, const PipelineConfig& cfg) {
  return fit_pipeline(images, all_indices(images.size()), cfg);
}

inline const std::string& predict(const Model& m, const GrayImage& image) {
  const PooledDescriptor d = m.extractor.describe(image.pixels);
  return predict(m.ridge, d.values.transpose());
}

// ---------------------------------------------------------------------------
// Evaluation

/// counts[t][p]: images of true label labels[t] predicted as labels[p].
/// Labels are the sorted union of model classes and test subjects.
struct Confusion {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;
};

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  Confusion confusion;
};

inline Evaluation evaluate_descriptors(const RidgeModel& ridge, const RowMatrix& x,
                                       const std::vector<std::string>& truth) {
  if (x.rows() == 0) throw Error("evaluate", "empty test set");
  Evaluation ev;
  std::vector<std::string> labels = ridge.classes;
  labels.insert(labels.end(), truth.begin(), truth.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
  ev.confusion.labels = labels;
  ev.confusion.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const std::string& guess = predict(ridge, x.row(i));
    const std::string& actual = truth[static_cast<std::size_t>(i)];
    ++ev.confusion.counts[index[actual]][index[guess]];
    if (guess == actual) ++ev.correct;
  }
  ev.total = static_cast<std::size_t>(x.rows());
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

inline Evaluation evaluate(const Model& m, const std::vector<GrayImage>& images,
                           const std::vector<std::size_t>& indices, StageTimer* timer = nullptr) {
  if (indices.empty()) throw Error("evaluate", "empty test set");
  const RowMatrix x = describe_images(m.extractor, images, indices);
  if (timer) timer->lap("test_descriptors");
  Evaluation ev = evaluate_descriptors(m.ridge, x, labels_of(images, indices));
  if (timer) timer->lap("evaluate");
  return ev;
}

inline Evaluation evaluate(const Model& m, const std::vector<GrayImage>& images) {
  return evaluate(m, images, all_indices(images.size()));
}

// ---------------------------------------------------------------------------
// Benchmark protocol

struct RunResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  Confusion confusion;
};

struct BenchmarkReport {
  PipelineConfig config;
  std::vector<double> accuracies;
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<RunResult> runs;
  std::size_t subjects = 0;
  std::vector<ExcludedSubject> excluded;
  std::uint64_t split_fingerprint = 0;
  std::vector<std::pair<std::string, double>> stage_seconds;
  double total_seconds = 0.0;
};

/// Mean and population standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::sqrt(var)};
}

inline SplitSpec split_spec(const PipelineConfig& cfg) {
  return SplitSpec{static_cast<std::size_t>(cfg.train_per_subject), static_cast<std::size_t>(cfg.test_per_subject),
                   static_cast<std::size_t>(cfg.runs), cfg.seed};
}

namespace detail {

inline void finish_report(BenchmarkReport& r, const StageTimer& timer) {
  r.accuracies.clear();
  for (const auto& run : r.runs) r.accuracies.push_back(run.accuracy);
  std::tie(r.mean, r.std) = mean_std(r.accuracies);
  r.stage_seconds = timer.stages();
  r.total_seconds = timer.elapsed();
}

inline BenchmarkReport start_report(const PipelineConfig& cfg, const SplitSet& splits) {
  BenchmarkReport r;
  r.config = cfg;
  r.subjects = splits.subjects.size();
  r.excluded = splits.excluded;
  r.split_fingerprint = split_fingerprint(splits);
  return r;
}

inline RunResult to_run(Evaluation ev) {
  return RunResult{ev.accuracy, ev.correct, ev.total, std::move(ev.confusion)};
}

}  // namespace detail

/// Random-split protocol: per run, fit on the train split and score the
/// test split; whitening and dictionary are refit per run unless
/// cfg.shared_dictionary, in which case run 0's are reused.
inline BenchmarkReport benchmark(const std::vector<GrayImage>& images, const PipelineConfig& cfg) {
  cfg.validate();
  StageTimer timer;
  const SplitSet splits = with_stage("dataset", [&] { return make_splits(images, split_spec(cfg)); });
  timer.lap("splits");
  BenchmarkReport report = detail::start_report(cfg, splits);
  std::optional<FeatureExtractor> shared;
  for (const Split& split : splits.runs) {
    Model m;
    if (cfg.shared_dictionary && shared) {
      m.extractor = *shared;
    } else {
      m.extractor = fit_extractor(images, split.train, cfg, &timer);
      if (cfg.shared_dictionary) shared = m.extractor;
    }
    m.ridge = enroll(m.extractor, images, split.train, &timer);
    report.runs.push_back(detail::to_run(evaluate(m, images, split.test, &timer)));
  }
  detail::finish_report(report, timer);
  return report;
}

struct EncodingAblation {
  BenchmarkReport with_encoding;
  BenchmarkReport without_encoding;
  bool shared_splits = false;
};

/// The benchmark run twice, encoding on and off, everything else fixed.
inline EncodingAblation ablate_encoding(const std::vector<GrayImage>& images, const PipelineConfig& cfg) {
  PipelineConfig on = cfg, off = cfg;
  on.encoding = EncodingMode::encode;
  off.encoding = EncodingMode::passthrough;
  EncodingAblation out;
  out.with_encoding = benchmark(images, on);
  out.without_encoding = benchmark(images, off);
  out.shared_splits = out.with_encoding.split_fingerprint == out.without_encoding.split_fingerprint;
  if (!out.shared_splits) throw Error("ablation", "encoding ablation modes saw different splits");
  return out;
}

struct GridAblation {
  std::vector<int> dict_sizes;                   // columns
  std::vector<std::size_t> depths;               // rows
  std::vector<std::vector<BenchmarkReport>> cells;  // [depth][dict size]
};

/// Dictionary size × pyramid depth cross evaluation on shared splits. The
/// extractor for each (K, run) is fit once and reused across depths.
inline GridAblation ablate_grid(const std::vector<GrayImage>& images, const PipelineConfig& cfg,
                                const std::vector<int>& dict_sizes, const std::vector<std::size_t>& depths) {
  cfg.validate();
  if (dict_sizes.empty() || depths.empty()) throw Error("ablation", "grid ablation needs sizes and depths");
  GridAblation out;
  out.dict_sizes = dict_sizes;
  out.depths = depths;
  out.cells.assign(depths.size(), std::vector<BenchmarkReport>(dict_sizes.size()));
  const SplitSet splits = with_stage("dataset", [&] { return make_splits(images, split_spec(cfg)); });

  for (std::size_t kc = 0; kc < dict_sizes.size(); ++kc) {
    PipelineConfig base = cfg;
    base.encoding = EncodingMode::encode;
    base.dict_size = dict_sizes[kc];
    std::vector<PyramidConfig> pyramids;
    std::vector<StageTimer> timers(depths.size());
    for (std::size_t dr = 0; dr < depths.size(); ++dr) {
      PipelineConfig c = base;
      c.grids = pyramid_of_depth(depths[dr]);
      pyramids.push_back(c.pyramid());
      out.cells[dr][kc] = detail::start_report(c, splits);
    }
    for (const Split& split : splits.runs) {
      const FeatureExtractor fx = fit_extractor(images, split.train, base);
      const auto train = describe_images(fx, images, split.train, pyramids);
      const auto test = describe_images(fx, images, split.test, pyramids);
      const auto train_labels = labels_of(images, split.train);
      const auto test_labels = labels_of(images, split.test);
      for (std::size_t dr = 0; dr < depths.size(); ++dr) {
        const RidgeModel ridge = train_ridge(train[dr], train_labels, base.lambda);
        out.cells[dr][kc].runs.push_back(detail::to_run(evaluate_descriptors(ridge, test[dr], test_labels)));
      }
    }
    for (std::size_t dr = 0; dr < depths.size(); ++dr) {
      timers[dr].lap("grid");
      detail::finish_report(out.cells[dr][kc], timers[dr]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model file: "SOPM", u32 version, then sections, each a u64 length
// followed by its payload:
//   config      UTF-8 key=value lines
//   zca mean    u64 count, f64 values
//   zca matrix  u64 rows, u64 cols, f64 values row-major
//   atoms       u64 rows, u64 cols, f64 values row-major
//   weights     u64 rows, u64 cols, f64 values row-major
//   classes     u64 count, then (u64 length, UTF-8 bytes) per class
// All integers and reals little-endian.

inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

template <typename M>
void put_matrix(std::ostream& out, const M& m) {
  io::put_u64(out, static_cast<std::uint64_t>(m.rows()));
  io::put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::put_f64(out, m(i, j));
}

template <typename M>
M get_matrix(std::istream& in) {
  const std::uint64_t rows = io::get_u64(in);
  const std::uint64_t cols = io::get_u64(in);
  if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw Error("model", "model file matrix dimensions out of range");
  M m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = io::get_f64(in);
  return m;
}

inline void put_section(std::ostream& out, const std::string& payload) {
  io::put_u64(out, payload.size());
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

inline std::string get_section(std::istream& in) {
  const std::uint64_t len = io::get_u64(in);
  if (len > (1ULL << 40)) throw Error("model", "model file section length out of range");
  std::string payload(static_cast<std::size_t>(len), '\0');
  io::read_exact(in, payload.data(), payload.size());
  return payload;
}

}  // namespace detail

inline void write_model(std::ostream& out, const Model& m) {
  io::put_magic(out, "SOPM");
  io::put_u32(out, kModelVersion);
  auto section = [&](auto&& writer) {
    std::ostringstream buf(std::ios::binary);
    writer(buf);
    detail::put_section(out, buf.str());
  };
  section([&](std::ostream& s) { s << serialize_config(m.config()); });
  section([&](std::ostream& s) {
    io::put_u64(s, static_cast<std::uint64_t>(m.extractor.zca.mean.size()));
    for (Eigen::Index i = 0; i < m.extractor.zca.mean.size(); ++i) io::put_f64(s, m.extractor.zca.mean(i));
  });
  section([&](std::ostream& s) { detail::put_matrix(s, m.extractor.zca.matrix); });
  section([&](std::ostream& s) { detail::put_matrix(s, m.extractor.dictionary.atoms); });
  section([&](std::ostream& s) { detail::put_matrix(s, m.ridge.weights); });
  section([&](std::ostream& s) {
    io::put_u64(s, m.ridge.classes.size());
    for (const auto& c : m.ridge.classes) {
      io::put_u64(s, c.size());
      s.write(c.data(), static_cast<std::streamsize>(c.size()));
    }
  });
  if (!out) throw Error("model", "write failed");
}

inline Model read_model(std::istream& in) {
  io::expect_magic(in, "SOPM", "model");
  const std::uint32_t version = io::get_u32(in);
  if (version != kModelVersion) throw Error("model", "unsupported model version " + std::to_string(version));
  auto section = [&] { return std::istringstream(detail::get_section(in), std::ios::binary); };
  Model m;
  m.extractor.config = parse_config(detail::get_section(in));
  m.extractor.config.validate();
  m.extractor.zca.eps = m.extractor.config.eps_zca;
  {
    auto s = section();
    const std::uint64_t n = io::get_u64(s);
    if (n > (1ULL << 32)) throw Error("model", "ZCA mean length out of range");
    m.extractor.zca.mean.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < m.extractor.zca.mean.size(); ++i) m.extractor.zca.mean(i) = io::get_f64(s);
  }
  {
    auto s = section();
    m.extractor.zca.matrix = detail::get_matrix<Matrix>(s);
  }
  {
    auto s = section();
    m.extractor.dictionary.atoms = detail::get_matrix<RowMatrix>(s);
  }
  {
    auto s = section();
    m.ridge.weights = detail::get_matrix<Matrix>(s);
  }
  {
    auto s = section();
    const std::uint64_t n = io::get_u64(s);
    if (n > (1ULL << 32)) throw Error("model", "class count out of range");
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string name(static_cast<std::size_t>(io::get_u64(s)), '\0');
      io::read_exact(s, name.data(), name.size());
      m.ridge.classes.push_back(std::move(name));
    }
  }
  m.ridge.lambda = m.extractor.config.lambda;
  const auto& cfg = m.extractor.config;
  const Eigen::Index dim = static_cast<Eigen::Index>(cfg.patch_side) * cfg.patch_side;
  if (m.extractor.zca.mean.size() != dim || m.extractor.zca.matrix.rows() != dim ||
      m.extractor.zca.matrix.cols() != dim)
    throw Error("model", "ZCA section does not match the configured patch size");
  if (cfg.encoding == EncodingMode::encode &&
      (m.extractor.dictionary.size() != cfg.dict_size || m.extractor.dictionary.dim() != dim))
    throw Error("model", "dictionary section does not match the configuration");
  if (m.ridge.weights.rows() != m.extractor.descriptor_dim() ||
      m.ridge.weights.cols() != static_cast<Eigen::Index>(m.ridge.classes.size()))
    throw Error("model", "ridge weights do not match descriptor dimension or class table");
  return m;
}

inline void save_model(const std::filesystem::path& path, const Model& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("model", "cannot write " + path.string());
  write_model(out, m);
}

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("model", "cannot open " + path.string());
  return with_stage("model", [&] { return read_model(in); });
}

}  // namespace sopool
