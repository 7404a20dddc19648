#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>

namespace sopool {

// Patch vectors, codes and descriptors are stored one sample per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Error raised by every stage of the library. `stage()` names the
/// pipeline stage (e.g. "whitening") when it is known.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Runs `fn`, rethrowing any failure as an Error tagged with `stage`.
template <typename Fn>
decltype(auto) with_stage(const std::string& stage, Fn&& fn) {
  try {
    return std::forward<Fn>(fn)();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw Error(stage, e.what());
  } catch (const std::exception& e) {
    throw Error(stage, e.what());
  }
}

}  // namespace sopool
