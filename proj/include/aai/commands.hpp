#pragma once

// Subcommand implementations behind the `aai` executable. Each writes its
// data product to `out`, diagnostics to `log`, and throws aai::Error on
// failure; `guarded` maps exceptions to exit codes and JSON on stderr.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "aai/align.hpp"

namespace aai::cli {

struct RunConfig {
  CostMetric metric = CostMetric::euclidean;
  std::optional<int> filter_order = 5;
  double cutoff_hz = 10.0;
  bool znorm = true;
  double svm_c = 1.0;
  std::size_t svm_epochs = 200;
  std::optional<std::uint64_t> seed;
  double alpha = 0.25;
  bool clamp_negative_weights = false;

  nlohmann::ordered_json to_json() const;
  /// Keys absent from `j` keep their current values.
  void merge_json(const nlohmann::json& j);
  void load_file(const std::filesystem::path& path);
};

struct FindPairsArgs {
  std::filesystem::path dict;
  std::filesystem::path inventory;  // optional when class is "any"
  std::string class_filter = "any";
  std::size_t min_size = 2;
  std::size_t max_sets = 0;
  std::uint64_t seed = 0;
};
void find_pairs(const FindPairsArgs& args, std::ostream& out, std::ostream& log);

struct ExtractArgs {
  std::filesystem::path manifest;
  RunConfig config;
  std::optional<std::size_t> project_dim;
  unsigned threads = 1;
};
void extract_targets(const ExtractArgs& args, std::ostream& out, std::ostream& log);

struct ClassifyArgs {
  std::filesystem::path table;
  RunConfig config;
  unsigned threads = 1;
};
void classify(const ClassifyArgs& args, std::ostream& out, std::ostream& log);

struct VoicingArgs {
  std::filesystem::path table;
  std::filesystem::path spec;
  std::optional<std::string> set_id;
};
void voicing(const VoicingArgs& args, std::ostream& out, std::ostream& log);

struct SimMatrixArgs {
  std::filesystem::path manifest;
  RunConfig config;
  std::optional<std::string> set_id;
  unsigned threads = 1;
};
void similarity(const SimMatrixArgs& args, std::ostream& out, std::ostream& log);

struct ConsistencyArgs {
  std::filesystem::path y_hat;
  std::filesystem::path y_frozen;
  std::filesystem::path y_hat_star;
  std::optional<std::filesystem::path> sidecar;
  std::optional<std::filesystem::path> w;
  std::optional<std::filesystem::path> w_star;
  std::optional<std::filesystem::path> grad_y_hat;
  std::optional<std::filesystem::path> grad_y_hat_star;
  RunConfig config;
  bool alpha_from_flag = false;
};
void consistency(const ConsistencyArgs& args, std::ostream& out, std::ostream& log);

/// Runs `body`; returns 0, or the error's exit code after writing
/// {"error": {...}} to `err`.
int guarded(const std::function<void()>& body, std::ostream& err);

}  // namespace aai::cli
