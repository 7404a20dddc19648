#pragma once

// Deterministic synthetic identity corpora for desk-scale testing.
//
// identity: each subject is a smooth random blob field; images add a small
//           shift, a brightness/contrast change and pixel noise.
// texture:  subjects come in pairs sharing one random bar texture, the
//           second member polarity-inverted (1 − p). Inversion negates every
//           contrast-normalized patch, which second-order statistics of raw
//           patches cannot see but split soft-threshold codes can.

#include "common.hpp"
#include "dataset.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace sopool {

enum class SynthKind { identity, texture };

inline SynthKind parse_synth_kind(const std::string& s) {
  if (s == "identity") return SynthKind::identity;
  if (s == "texture") return SynthKind::texture;
  throw Error("synth", "kind must be 'identity' or 'texture', got '" + s + "'");
}

struct SynthSpec {
  int subjects = 20;
  int per_subject = 7;
  int side = 64;
  std::uint64_t seed = 0;
  SynthKind kind = SynthKind::identity;
  double noise = 0.02;
  int max_shift = 1;
};

namespace detail {

inline void stretch_to(RowMatrix& img, double lo, double hi) {
  const double mn = img.minCoeff(), mx = img.maxCoeff();
  if (mx - mn <= 0.0) {
    img.setConstant((lo + hi) / 2);
    return;
  }
  img = ((img.array() - mn) / (mx - mn) * (hi - lo) + lo).matrix();
}

inline RowMatrix blob_field(CounterRng& rng, int side) {
  RowMatrix img = RowMatrix::Zero(side, side);
  for (int b = 0; b < 16; ++b) {
    const double cy = rng.uniform01() * side, cx = rng.uniform01() * side;
    const double sigma = 3.0 + 7.0 * rng.uniform01();
    const double amp = rng.normal();
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        img(y, x) += amp * std::exp(-d2 / (2 * sigma * sigma));
      }
  }
  stretch_to(img, 0.15, 0.85);
  return img;
}

inline RowMatrix bar_texture(CounterRng& rng, int side) {
  RowMatrix img = RowMatrix::Zero(side, side);
  const int bars = side * side / 60;
  for (int b = 0; b < bars; ++b) {
    const double cy = rng.uniform01() * side, cx = rng.uniform01() * side;
    const double theta = rng.uniform01() * 3.141592653589793;
    const double half_len = 2.0 + 3.0 * rng.uniform01();
    const double dy = std::sin(theta), dx = std::cos(theta);
    for (int y = std::max(0, static_cast<int>(cy - 7)); y < std::min(side, static_cast<int>(cy + 8)); ++y)
      for (int x = std::max(0, static_cast<int>(cx - 7)); x < std::min(side, static_cast<int>(cx + 8)); ++x) {
        const double ry = y - cy, rx = x - cx;
        const double along = ry * dy + rx * dx;
        const double across = -ry * dx + rx * dy;
        if (std::abs(along) > half_len) continue;
        img(y, x) = std::max(img(y, x), std::exp(-across * across / 0.8));
      }
  }
  stretch_to(img, 0.2, 0.8);
  return img;
}

inline RowMatrix perturb(const RowMatrix& base, CounterRng& rng, const SynthSpec& spec) {
  const int side = static_cast<int>(base.rows());
  const int span = 2 * spec.max_shift + 1;
  const int sy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(span))) - spec.max_shift;
  const int sx = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(span))) - spec.max_shift;
  const double gain = 0.85 + 0.3 * rng.uniform01();
  const double offset = -0.05 + 0.1 * rng.uniform01();
  RowMatrix out(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const int yy = std::clamp(y - sy, 0, side - 1), xx = std::clamp(x - sx, 0, side - 1);
      const double v = (base(yy, xx) - 0.5) * gain + 0.5 + offset + spec.noise * rng.normal();
      out(y, x) = std::clamp(v, 0.0, 1.0);
    }
  return out;
}

inline std::string subject_name(int s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%03d", s);
  return buf;
}

inline std::string image_name(int i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "img_%03d.pgm", i);
  return buf;
}

}  // namespace detail

/// Images ordered by (subject, index), pixels in [0, 1]. source_path is
/// the relative path write_synthetic would use.
inline std::vector<GrayImage> generate_synthetic(const SynthSpec& spec) {
  if (spec.subjects < 2) throw Error("synth", "need at least 2 subjects");
  if (spec.per_subject < 1) throw Error("synth", "need at least 1 image per subject");
  if (spec.side < 8) throw Error("synth", "side must be >= 8");
  if (spec.max_shift < 0 || !(spec.noise >= 0.0)) throw Error("synth", "shift and noise must be >= 0");
  std::vector<GrayImage> out;
  out.reserve(static_cast<std::size_t>(spec.subjects) * spec.per_subject);
  for (int s = 0; s < spec.subjects; ++s) {
    RowMatrix base;
    if (spec.kind == SynthKind::identity) {
      CounterRng rng(combine_keys(spec.seed, hash_string("identity/" + std::to_string(s))));
      base = detail::blob_field(rng, spec.side);
    } else {
      CounterRng rng(combine_keys(spec.seed, hash_string("texture/" + std::to_string(s / 2))));
      base = detail::bar_texture(rng, spec.side);
      if (s % 2 == 1) base = (1.0 - base.array()).matrix();
    }
    const std::string subject = detail::subject_name(s);
    for (int i = 0; i < spec.per_subject; ++i) {
      CounterRng rng(combine_keys(combine_keys(spec.seed, static_cast<std::uint64_t>(s)), static_cast<std::uint64_t>(i) + 1));
      GrayImage img;
      img.pixels = detail::perturb(base, rng, spec);
      img.subject_id = subject;
      img.source_path = subject + "/" + detail::image_name(i);
      out.push_back(std::move(img));
    }
  }
  return out;
}

/// Writes the corpus as `dir/<subject>/img_NNN.pgm`.
inline std::vector<GrayImage> write_synthetic(const std::filesystem::path& dir, const SynthSpec& spec) {
  std::vector<GrayImage> images = generate_synthetic(spec);
  for (const auto& img : images) {
    const std::filesystem::path path = dir / img.source_path;
    std::filesystem::create_directories(path.parent_path());
    write_pgm(path, img.pixels);
  }
  return images;
}

}  // namespace sopool
