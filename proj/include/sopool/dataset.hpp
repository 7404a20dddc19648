#pragma once

// Corpus ingestion: PGM/PNG decoding, grayscale conversion, bilinear
// resizing and reproducible per-subject train/test splits.

#include "common.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <iterator>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace sopool {

/// Decoded grayscale image, pixel values in [0, 1].
struct GrayImage {
  RowMatrix pixels;
  std::string subject_id;
  std::string source_path;

  Eigen::Index rows() const { return pixels.rows(); }
  Eigen::Index cols() const { return pixels.cols(); }
};

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("dataset", "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PngReadDeleter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadDeleter() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriteDeleter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteDeleter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_error_handler(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace detail

/// Binary PGM (P5) with maxval <= 255. Values are divided by maxval.
inline RowMatrix read_pgm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        return;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
      throw Error("dataset", "malformed PGM header in " + path.string());
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) throw Error("dataset", "PGM dimension out of range in " + path.string());
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error("dataset", "not a binary PGM (P5): " + path.string());
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  const long maxval = read_int();
  if (width <= 0 || height <= 0) throw Error("dataset", "empty PGM image: " + path.string());
  if (maxval <= 0 || maxval > 255)
    throw Error("dataset", "unsupported PGM maxval " + std::to_string(maxval) + " in " + path.string());
  ++pos;  // single whitespace byte before the raster
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + count) throw Error("dataset", "truncated PGM raster in " + path.string());
  RowMatrix out(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes[pos + i];
    if (v > static_cast<unsigned>(maxval))
      throw Error("dataset", "PGM sample exceeds maxval in " + path.string());
    out.data()[i] = v * scale;
  }
  return out;
}

/// 8-bit PNG (gray, gray+alpha, RGB, RGBA or palette). Color is reduced
/// with luma weights 0.299/0.587/0.114, alpha is dropped.
inline RowMatrix read_png(const std::filesystem::path& path) {
  detail::FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error("dataset", "cannot open " + path.string());
  std::string message;
  detail::PngReadDeleter guard;
  guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                     detail::png_error_handler, detail::png_warning_handler);
  if (!guard.png) throw Error("dataset", "libpng initialisation failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) throw Error("dataset", "libpng initialisation failed");

  png_uint_32 width = 0, height = 0;
  int channels = 0;
  std::vector<png_byte> raster;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(guard.png))) {
    throw Error("dataset", "PNG decode failed for " + path.string() + ": " + message);
  }
  png_init_io(guard.png, file.get());
  png_read_info(guard.png, guard.info);
  width = png_get_image_width(guard.png, guard.info);
  height = png_get_image_height(guard.png, guard.info);
  const int bit_depth = png_get_bit_depth(guard.png, guard.info);
  const int color_type = png_get_color_type(guard.png, guard.info);
  if (bit_depth == 16) png_set_strip_16(guard.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(guard.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(guard.png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(guard.png);
  png_read_update_info(guard.png, guard.info);
  channels = png_get_channels(guard.png, guard.info);
  const std::size_t stride = png_get_rowbytes(guard.png, guard.info);
  raster.resize(stride * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = raster.data() + y * stride;
  png_read_image(guard.png, row_ptrs.data());
  png_read_end(guard.png, nullptr);

  RowMatrix out(height, width);
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* row = row_ptrs[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      const png_byte* px = row + static_cast<std::size_t>(x) * channels;
      double v;
      if (channels >= 3) {
        v = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
      } else {
        v = px[0];
      }
      out(y, x) = v / 255.0;
    }
  }
  return out;
}

/// Dispatches on the file signature (P5 or PNG magic).
inline RowMatrix read_image(const std::filesystem::path& path) {
  unsigned char magic[8] = {};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("dataset", "cannot open " + path.string());
    in.read(reinterpret_cast<char*>(magic), sizeof magic);
  }
  static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (std::equal(std::begin(png_sig), std::end(png_sig), magic)) return read_png(path);
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
  throw Error("dataset", "unsupported image format: " + path.string());
}

/// Quantizes [0,1] pixels to 8 bits and writes a P5 PGM.
inline void write_pgm(const std::filesystem::path& path, const RowMatrix& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("dataset", "cannot write " + path.string());
  out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  std::vector<unsigned char> raster(static_cast<std::size_t>(pixels.size()));
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(pixels.data()[i], 0.0, 1.0);
    raster[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error("dataset", "write failed for " + path.string());
}

/// Writes an 8-bit PNG from interleaved samples (1 = gray, 3 = RGB).
inline void write_png(const std::filesystem::path& path, const std::vector<unsigned char>& samples,
                      std::uint32_t width, std::uint32_t height, int channels) {
  if (channels != 1 && channels != 3) throw Error("dataset", "write_png: channels must be 1 or 3");
  if (samples.size() != static_cast<std::size_t>(width) * height * channels)
    throw Error("dataset", "write_png: sample count does not match dimensions");
  detail::FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("dataset", "cannot write " + path.string());
  std::string message;
  detail::PngWriteDeleter guard;
  guard.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                      detail::png_error_handler, detail::png_warning_handler);
  if (!guard.png) throw Error("dataset", "libpng initialisation failed");
  guard.info = png_create_info_struct(guard.png);
  if (!guard.info) throw Error("dataset", "libpng initialisation failed");
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(guard.png))) throw Error("dataset", "PNG encode failed: " + message);
  png_init_io(guard.png, file.get());
  png_set_IHDR(guard.png, guard.info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(guard.png, guard.info);
  for (std::uint32_t y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(samples.data() + static_cast<std::size_t>(y) * width * channels);
  png_write_image(guard.png, rows.data());
  png_write_end(guard.png, nullptr);
}

/// Bilinear resize with corner-anchored sampling: output pixel i samples
/// source coordinate i·(src−1)/(dst−1), so the four corners are preserved.
/// A single-pixel output axis samples the source centre.
inline RowMatrix resize_bilinear(const RowMatrix& src, Eigen::Index dst_rows, Eigen::Index dst_cols) {
  if (src.size() == 0) throw Error("dataset", "resize of an empty image");
  if (dst_rows <= 0 || dst_cols <= 0) throw Error("dataset", "resize target must be positive");
  const Eigen::Index sr = src.rows(), sc = src.cols();
  auto coord = [](Eigen::Index i, Eigen::Index s, Eigen::Index d) {
    if (d == 1) return static_cast<double>(s - 1) / 2.0;
    // Integer numerator keeps the end points exact.
    return static_cast<double>(i * (s - 1)) / static_cast<double>(d - 1);
  };
  RowMatrix out(dst_rows, dst_cols);
  for (Eigen::Index i = 0; i < dst_rows; ++i) {
    const double y = coord(i, sr, dst_rows);
    const auto y0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(y), sr - 1);
    const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, sr - 1);
    const double fy = y - static_cast<double>(y0);
    for (Eigen::Index j = 0; j < dst_cols; ++j) {
      const double x = coord(j, sc, dst_cols);
      const auto x0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(x), sc - 1);
      const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, sc - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = src(y0, x0) + (src(y0, x1) - src(y0, x0)) * fx;
      const double bottom = src(y1, x0) + (src(y1, x1) - src(y1, x0)) * fx;
      out(i, j) = top + (bottom - top) * fy;
    }
  }
  return out;
}

/// Decodes one file and resizes it to rows × cols.
inline GrayImage load_image(const std::filesystem::path& path, std::string subject_id,
                            Eigen::Index rows, Eigen::Index cols) {
  GrayImage img;
  img.pixels = resize_bilinear(read_image(path), rows, cols);
  img.subject_id = std::move(subject_id);
  img.source_path = path.string();
  if (!img.pixels.allFinite()) throw Error("dataset", "non-finite pixels in " + path.string());
  return img;
}

struct LoadFailure {
  std::string path;
  std::string message;
};

struct Corpus {
  std::vector<GrayImage> images;
  std::vector<LoadFailure> failures;
};

/// Loads `root/<subject>/<image>`. Unreadable files are collected in
/// `failures`; an empty result is an error. Images are ordered by
/// (subject_id, filename). target_cols == 0 means square output.
inline Corpus load_corpus(const std::filesystem::path& root, Eigen::Index target_side,
                          Eigen::Index target_cols = 0) {
  namespace fs = std::filesystem;
  if (target_cols == 0) target_cols = target_side;
  if (!fs::is_directory(root)) throw Error("dataset", "corpus root is not a directory: " + root.string());
  struct Entry {
    std::string subject;
    std::string filename;
    fs::path path;
  };
  std::vector<Entry> entries;
  for (const auto& subject_dir : fs::directory_iterator(root)) {
    if (!subject_dir.is_directory()) continue;
    const std::string subject = subject_dir.path().filename().string();
    for (const auto& file : fs::directory_iterator(subject_dir.path())) {
      if (!file.is_regular_file()) continue;
      const std::string name = file.path().filename().string();
      if (!name.empty() && name[0] == '.') continue;
      entries.push_back({subject, name, file.path()});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.subject, a.filename) < std::tie(b.subject, b.filename);
  });

  std::vector<std::optional<GrayImage>> decoded(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    try {
      decoded[i] = load_image(entries[i].path, entries[i].subject, target_side, target_cols);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  Corpus corpus;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (decoded[i]) {
      corpus.images.push_back(std::move(*decoded[i]));
    } else {
      corpus.failures.push_back({entries[i].path.string(), errors[i]});
    }
  }
  if (corpus.images.empty()) throw Error("dataset", "no readable images under " + root.string());
  return corpus;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitSpec {
  std::size_t train_per_subject = 5;
  std::size_t test_per_subject = 2;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
};

/// Indices into the image list passed to make_splits.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct ExcludedSubject {
  std::string subject_id;
  std::size_t image_count = 0;
};

struct SplitSet {
  std::vector<Split> runs;
  std::vector<std::string> subjects;  // retained, sorted
  std::vector<ExcludedSubject> excluded;
};

/// Per run and retained subject, shuffles the subject's images (in load
/// order) with a generator keyed on (seed, run, subject_id) and takes the
/// first train_per_subject as train and the next test_per_subject as test.
inline SplitSet make_splits(const std::vector<GrayImage>& images, const SplitSpec& spec) {
  if (spec.train_per_subject == 0) throw Error("dataset", "train_per_subject must be positive");
  if (spec.test_per_subject == 0) throw Error("dataset", "test_per_subject must be positive");
  if (spec.runs == 0) throw Error("dataset", "runs must be positive");
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < images.size(); ++i) by_subject[images[i].subject_id].push_back(i);

  const std::size_t need = spec.train_per_subject + spec.test_per_subject;
  SplitSet out;
  for (const auto& [subject, idx] : by_subject) {
    if (idx.size() < need) {
      out.excluded.push_back({subject, idx.size()});
    } else {
      out.subjects.push_back(subject);
    }
  }
  if (out.subjects.empty())
    throw Error("dataset", "no subject has the " + std::to_string(need) + " images the split requires");

  out.runs.resize(spec.runs);
  for (std::size_t run = 0; run < spec.runs; ++run) {
    Split& split = out.runs[run];
    for (const auto& subject : out.subjects) {
      std::vector<std::size_t> order = by_subject.at(subject);
      CounterRng rng(combine_keys(combine_keys(spec.seed, run), hash_string(subject)));
      // Partial Fisher-Yates: only the first `need` positions are drawn.
      for (std::size_t k = 0; k < need; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.uniform_index(order.size() - k));
        std::swap(order[k], order[j]);
      }
      split.train.insert(split.train.end(), order.begin(),
                         order.begin() + static_cast<std::ptrdiff_t>(spec.train_per_subject));
      split.test.insert(split.test.end(),
                        order.begin() + static_cast<std::ptrdiff_t>(spec.train_per_subject),
                        order.begin() + static_cast<std::ptrdiff_t>(need));
    }
  }
  return out;
}

/// Hash of every run's (role, image index) assignment, used to assert that
/// two evaluations saw the same splits.
inline std::uint64_t split_fingerprint(const SplitSet& splits) {
  std::uint64_t h = hash_string("splits");
  for (const auto& run : splits.runs) {
    for (std::size_t i : run.train) h = combine_keys(h, 2 * i);
    h = combine_keys(h, ~0ULL);
    for (std::size_t i : run.test) h = combine_keys(h, 2 * i + 1);
    h = combine_keys(h, ~1ULL);
  }
  return h;
}

/// One line per image: `run,role,subject,path`.
inline void write_split_manifest(std::ostream& out, const std::vector<GrayImage>& images,
                                 const SplitSet& splits) {
  for (std::size_t run = 0; run < splits.runs.size(); ++run) {
    for (std::size_t i : splits.runs[run].train)
      out << run << ",train," << images[i].subject_id << ',' << images[i].source_path << '\n';
    for (std::size_t i : splits.runs[run].test)
      out << run << ",test," << images[i].subject_id << ',' << images[i].source_path << '\n';
  }
}

}  // namespace sopool
