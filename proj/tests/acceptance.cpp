// Acceptance criteria, one PASS/FAIL line each. Exit status is non-zero if
// any criterion fails. Criterion 8 needs user-supplied data:
//   SOPOOL_LFW_DIR     one directory per subject, benchmarked with defaults
//   SOPOOL_FERET_DIR   fa/, fb/, fc/ subdirectories, one directory per subject
//                      inside each; SOPOOL_FERET_ROWS / SOPOOL_FERET_COLS set
//                      the resize target (default 150 × 130)

#include "oracles.hpp"
#include "test_util.hpp"

#include <sopool/sopool.hpp>

#include <json.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace sopool;

namespace {

struct Outcome {
  enum Kind { pass, fail, skip } kind = fail;
  std::string detail;
};

Outcome failed(std::string d) { return {Outcome::fail, std::move(d)}; }
Outcome skipped(std::string d) { return {Outcome::skip, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Outcome::pass : Outcome::fail, std::move(d)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Shell {
  int status = -1;
  std::string output;
};

Shell sh(const std::string& cmd) {
  Shell r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cli() { return SOPOOL_CLI_PATH; }

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

const sopool::testing::TempDir& scratch() {
  static sopool::testing::TempDir dir("sopool_acceptance");
  return dir;
}

// --- 1 ----------------------------------------------------------------------

Outcome descriptor_dimensionality() {
  // Independent count: Σ g² cells times p(p+1)/2 entries.
  auto closed_form = [](long p) {
    long cells = 0;
    for (long g : {1, 2, 4, 6, 8}) cells += g * g;
    return cells * p * (p + 1) / 2;
  };
  if (closed_form(40) != 99220 || closed_form(36) != 80586) return failed("closed-form count disagrees");

  // Produce real descriptors from a 64 × 64 image through the extractor.
  CounterRng rng(1);
  RowMatrix image(64, 64);
  for (Eigen::Index i = 0; i < image.size(); ++i) image.data()[i] = rng.uniform01();
  FeatureExtractor fx;
  fx.zca.mean = RowVector::Zero(36);
  fx.zca.matrix = Matrix::Identity(36, 36);
  fx.dictionary.atoms = oracle::random_matrix(20, 36, rng);
  fx.dictionary.atoms.rowwise().normalize();
  const auto encoded = fx.describe(image).values.size();
  fx.config.encoding = EncodingMode::passthrough;
  const auto raw = fx.describe(image).values.size();
  return check(encoded == 99220 && raw == 80586,
               "encode " + std::to_string(encoded) + " (want 99220), passthrough " + std::to_string(raw) +
                   " (want 80586)");
}

// --- 2 ----------------------------------------------------------------------

Outcome pooling_oracle() {
  CounterRng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform_index(8));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(50));
    const RowMatrix codes = oracle::random_matrix(n, p, rng);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; ++i) rows.push_back(i);
    const Matrix got = pool_cell(codes, rows, 1e-3);
    const Matrix want = oracle::brute_force_pool(codes, rows, 1e-3);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }
  return check(worst <= 1e-12, "200 sets, max abs diff " + fmt("%.3g", worst) + " (tol 1e-12)");
}

// --- 3 ----------------------------------------------------------------------

Outcome matrix_log() {
  CounterRng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform_index(40));
    const double cond = std::pow(10.0, 6.0 * rng.uniform01());
    const Matrix f = oracle::random_spd(p, cond, rng);
    const Matrix back = exp_symmetric(log_spd(f));
    worst = std::max(worst, (back - f).norm() / f.norm());
  }
  double log_identity = 0.0;
  for (Eigen::Index p = 1; p <= 40; ++p)
    log_identity = std::max(log_identity, log_spd(Matrix::Identity(p, p)).cwiseAbs().maxCoeff());
  return check(worst <= 1e-8 && log_identity <= 1e-12,
               "500 matrices, max rel Frobenius " + fmt("%.3g", worst) + " (tol 1e-8); max |log I| " +
                   fmt("%.3g", log_identity) + " (tol 1e-12)");
}

// --- 4 ----------------------------------------------------------------------

Outcome ridge_forms() {
  CounterRng rng(4);
  double worst_forms = 0.0, worst_gd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(49));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.uniform_index(50));
    const int c = 2 + static_cast<int>(rng.uniform_index(std::min<std::uint64_t>(4, static_cast<std::uint64_t>(n - 1))));
    const double lambda = std::array<double, 3>{0.01, 1.0, 100.0}[rng.uniform_index(3)];
    const RowMatrix x = oracle::random_matrix(n, d, rng);
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < n; ++i)
      labels.push_back("c" + std::to_string(i < c ? static_cast<int>(i) : static_cast<int>(rng.uniform_index(c))));
    const RidgeModel p = train_ridge(x, labels, lambda, RidgeForm::primal);
    const RidgeModel q = train_ridge(x, labels, lambda, RidgeForm::dual);
    worst_forms = std::max(worst_forms, (p.weights - q.weights).cwiseAbs().maxCoeff());
    const Matrix w = oracle::ridge_by_gradient_descent(x, one_hot(labels).second, lambda);
    const RidgeModel automatic = train_ridge(x, labels, lambda);
    worst_gd = std::max(worst_gd, (automatic.weights - w).cwiseAbs().maxCoeff());
  }
  return check(worst_forms <= 1e-9 && worst_gd <= 1e-5,
               "100 instances, dual vs primal " + fmt("%.3g", worst_forms) + " (tol 1e-9), vs gradient descent " +
                   fmt("%.3g", worst_gd) + " (tol 1e-5)");
}

// --- 5 and 7 ----------------------------------------------------------------

struct IdentityBenchmark {
  bool ran = false;
  std::string json;
  double seconds = 0.0;
};

IdentityBenchmark& identity_benchmark() {
  static IdentityBenchmark b;
  return b;
}

std::filesystem::path identity_corpus() { return scratch() / "identity"; }

Outcome end_to_end() {
  auto& b = identity_benchmark();
  const Shell synth = sh(cli() + " synth --subjects 20 --per-subject 7 --side 64 --out " + identity_corpus().string());
  if (synth.status != 0) return failed("synth failed: " + synth.output);
  const auto json = scratch() / "identity_t1.json";
  const auto t0 = std::chrono::steady_clock::now();
  const Shell bench = sh("SOPOOL_THREADS=1 " + cli() + " benchmark --corpus " + identity_corpus().string() +
                         " --runs 5 --train-per-subject 5 --test-per-subject 2 --json " + json.string());
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (bench.status != 0) return failed("benchmark failed: " + bench.output);
  b.ran = true;
  b.json = slurp(json);
  const auto j = nlohmann::json::parse(b.json);
  const double mean = j["mean"].get<double>(), std = j["std"].get<double>();
  return check(mean >= 0.95 && j["accuracies"].size() == 5,
               "20 x 7 synthetic, 5 runs: " + percent_pm(mean, std) + " % (need >= 95.0), " +
                   fmt("%.1f s", b.seconds));
}

Outcome determinism() {
  const auto& first = identity_benchmark();
  if (!first.ran) return failed("criterion 5 benchmark did not run");
  const auto json = scratch() / "identity_t4.json";
  const Shell bench = sh("SOPOOL_THREADS=4 " + cli() + " benchmark --corpus " + identity_corpus().string() +
                         " --runs 5 --train-per-subject 5 --test-per-subject 2 --json " + json.string());
  if (bench.status != 0) return failed("benchmark failed: " + bench.output);
  const std::string second = slurp(json);
  return check(second == first.json && !second.empty(),
               "SOPOOL_THREADS=1 vs 4: " + std::to_string(first.json.size()) + " vs " +
                   std::to_string(second.size()) + " bytes, " + (second == first.json ? "identical" : "different"));
}

// --- 6 ----------------------------------------------------------------------

Outcome encoding_direction() {
  const auto corpus = scratch() / "texture";
  const Shell synth =
      sh(cli() + " synth --kind texture --subjects 10 --per-subject 7 --side 64 --out " + corpus.string());
  if (synth.status != 0) return failed("synth failed: " + synth.output);
  const auto json = scratch() / "texture.json";
  const Shell run = sh(cli() + " ablate encoding --corpus " + corpus.string() + " --runs 5 --json " + json.string());
  if (run.status != 0) return failed("ablation failed: " + run.output);
  const auto j = nlohmann::json::parse(slurp(json));
  const double with = j["with_encoding"]["mean"].get<double>();
  const double without = j["without_encoding"]["mean"].get<double>();
  return check(with >= without && j["shared_splits"].get<bool>(),
               "texture corpus, 5 runs: with " + percent_pm(with, j["with_encoding"]["std"].get<double>()) +
                   " %, without " + percent_pm(without, j["without_encoding"]["std"].get<double>()) + " %");
}

// --- 8 ----------------------------------------------------------------------

Outcome real_corpora() {
  const std::string lfw = env_or_empty("SOPOOL_LFW_DIR"), feret = env_or_empty("SOPOOL_FERET_DIR");
  if (lfw.empty() && feret.empty()) return skipped("set SOPOOL_LFW_DIR and/or SOPOOL_FERET_DIR to run");
  std::vector<std::string> notes;
  bool ok = true;
  if (!lfw.empty()) {
    const auto json = scratch() / "lfw.json";
    const Shell run = sh(cli() + " benchmark --corpus " + lfw + " --json " + json.string());
    if (run.status != 0) return failed("LFW benchmark failed: " + run.output);
    const auto j = nlohmann::json::parse(slurp(json));
    const double mean = j["mean"].get<double>();
    const bool in_band = std::abs(100.0 * mean - 88.3) <= 3.0;
    ok = ok && in_band;
    notes.push_back("LFW-a " + percent_pm(mean, j["std"].get<double>()) + " % (target 88.3 +/- 3.0, " +
                    std::to_string(j["subjects"].get<int>()) + " subjects)");
  }
  if (!feret.empty()) {
    std::string rows = env_or_empty("SOPOOL_FERET_ROWS"), cols = env_or_empty("SOPOOL_FERET_COLS");
    if (rows.empty()) rows = "150";
    if (cols.empty()) cols = "130";
    const std::string size = " --target-side " + rows + " --target-cols " + cols;
    const auto model = scratch() / "feret.sopm";
    const Shell train = sh(cli() + " train --corpus " + feret + "/fa --out " + model.string() + size);
    if (train.status != 0) return failed("FERET training failed: " + train.output);
    for (const auto& [set, need] : {std::pair<std::string, double>{"fb", 0.97}, {"fc", 0.98}}) {
      const auto json = scratch() / ("feret_" + set + ".json");
      const Shell run = sh(cli() + " eval --model " + model.string() + " --probe " + feret + "/" + set + " --json " +
                           json.string());
      if (run.status != 0) return failed("FERET " + set + " evaluation failed: " + run.output);
      const double acc = nlohmann::json::parse(slurp(json))["accuracy"].get<double>();
      ok = ok && acc >= need;
      notes.push_back("FERET " + set + " " + fmt("%.1f", 100.0 * acc) + " % (need >= " + fmt("%.0f", 100.0 * need) +
                      ")");
    }
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return check(ok, detail);
}

// --- 9 ----------------------------------------------------------------------

Outcome invariant_suites() {
  std::vector<std::string> binaries;
  std::stringstream paths(SOPOOL_UNIT_TEST_PATHS);
  for (std::string p; std::getline(paths, p, '|');)
    if (!p.empty()) binaries.push_back(p);
  int tests = 0;
  std::vector<std::string> broken;
  for (const auto& bin : binaries) {
    const Shell run = sh(bin + " --gtest_filter='*Invariants*'");
    const auto at = run.output.find("[  PASSED  ] ");
    if (at != std::string::npos) tests += std::atoi(run.output.c_str() + at + 13);
    if (run.status != 0) broken.push_back(std::filesystem::path(bin).filename().string());
  }
  std::string detail = std::to_string(tests) + " property tests across " + std::to_string(binaries.size()) + " suites";
  for (const auto& b : broken) detail += ", failing: " + b;
  return check(broken.empty() && tests > 0 && binaries.size() == 8, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"descriptor dimensionality", descriptor_dimensionality},
      {"pooling oracle equivalence", pooling_oracle},
      {"matrix-log correctness", matrix_log},
      {"ridge dual/primal and iterative oracle", ridge_forms},
      {"end-to-end synthetic accuracy", end_to_end},
      {"encoding ablation direction", encoding_direction},
      {"determinism across thread counts", determinism},
      {"real-corpus reproduction", real_corpora},
      {"invariant suites", invariant_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = failed(std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::skip ? "SKIP" : "FAIL";
    if (o.kind == Outcome::fail) ++failures;
    std::printf("[%s] %zu %s: %s [%.1f s]\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
