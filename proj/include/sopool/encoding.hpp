#pragma once

// Split soft-threshold encoding against a dictionary.

#include "common.hpp"
#include "dictionary.hpp"

#include <optional>
#include <string>

namespace sopool {

/// One code per patch. `alpha` is absent for the passthrough (raw patch) mode.
struct EncodedFeatures {
  RowMatrix codes;
  std::optional<double> alpha;

  Eigen::Index width() const { return codes.cols(); }
};

/// code[j] = max(0, ⟨d_j, x⟩ − α), code[j+K] = max(0, −⟨d_j, x⟩ − α).
inline EncodedFeatures encode(const RowMatrix& patches, const Dictionary& dict, double alpha) {
  if (patches.cols() != dict.dim()) {
    throw Error("encoding", "patch dimension " + std::to_string(patches.cols()) +
                                " does not match atom dimension " + std::to_string(dict.dim()));
  }
  if (!(alpha >= 0.0)) throw Error("encoding", "alpha must be >= 0");
  const Eigen::Index k = dict.size();
  const RowMatrix response = patches * dict.atoms.transpose();
  EncodedFeatures out;
  out.alpha = alpha;
  out.codes.resize(patches.rows(), 2 * k);
  out.codes.leftCols(k) = (response.array() - alpha).cwiseMax(0.0);
  out.codes.rightCols(k) = (-response.array() - alpha).cwiseMax(0.0);
  return out;
}

/// No-encoding mode: the (whitened) patches themselves are pooled.
inline EncodedFeatures passthrough(const RowMatrix& patches) {
  return EncodedFeatures{patches, std::nullopt};
}

}  // namespace sopool
