#pragma once

// Experiment protocols behind the `grouse` command line tool.
//
// A run is described by an ExperimentSpec, read from a key = value text file
// ('#' starts a comment, lists are comma separated). Every key is optional;
// see kSpecKeys for the full list.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grouse/completion.hpp"
#include "grouse/csv.hpp"
#include "grouse/streamgen.hpp"
#include "grouse/tracker.hpp"

namespace grouse {

/// Bad configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { Static, Switching, Rotating, StreamCsv, Completion, Bench };

std::string_view to_string(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::Static;

  // Generative model and sampling.
  Index n = 700;
  Index d = 10;
  double noise = 0.0;
  std::vector<std::int64_t> switch_times;
  double delta = 1e-5;
  SamplingKind sampling = SamplingKind::FixedSize;
  double density = 0.17;

  TrackerConfig tracker{StepSchedule::diminishing(100.0)};

  std::int64_t horizon = 14000;
  std::int64_t report_every = 100;
  /// Times at which the estimated and true bases are dumped.
  std::vector<std::int64_t> checkpoints;
  std::uint64_t seed = 1;
  std::string output;
  std::string input;

  // Completion.
  Index rows = 700;
  Index cols = 700;
  int passes = 10;
  double early_stop = 0.0;

  // Benchmark.
  std::vector<Index> bench_sizes{500, 1000, 2000, 4000};
  std::int64_t bench_steps = 1000;
  std::int64_t bench_warmup = 200;

  void validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

extern const std::vector<std::string_view> kSpecKeys;

ExperimentSpec parse_spec(std::string_view text, const std::string& source = "<config>");
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string serialize_spec(const ExperimentSpec& spec);
/// Applies one "key=value" override.
void apply_override(ExperimentSpec& spec, std::string_view assignment);
void set_field(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Models with seeds derived from spec.seed.
GenerativeModel generative_model(const ExperimentSpec& spec);
SamplingModel sampling_model(const ExperimentSpec& spec);
std::uint64_t tracker_seed(const ExperimentSpec& spec);

/// Rows of a stream CSV, optionally thinned: when density < 1 a FixedSize
/// mask over all n coordinates is intersected with the present cells.
std::vector<MaskedVector> ingest_stream_csv(const std::filesystem::path& path,
                                            const std::optional<SamplingModel>& subsample = std::nullopt);
std::vector<MaskedVector> subsample_stream(const std::vector<MaskedVector>& rows, const SamplingModel& sampling);

struct BenchConfig {
  Index d = 10;
  std::vector<Index> sizes{500, 1000, 2000, 4000};
  double density = 0.17;
  std::int64_t steps = 1000;
  std::int64_t warmup = 200;
  std::uint64_t seed = 1;
};

struct BenchPoint {
  Index n = 0;
  Index observed = 0;
  double median_ns = 0.0;
};

/// Median wall time of grouse_step per ambient dimension. Observations are
/// generated up front; only the update is timed.
std::vector<BenchPoint> bench_linear_scaling(const BenchConfig& config);

struct Checkpoint {
  std::int64_t t = 0;
  DenseMatrix estimate;
  DenseMatrix truth;
};

struct StreamMetrics {
  /// Prediction U_t w_t for every row, n x T.
  DenseMatrix predictions;
  double reconstruction_error = 0.0;
  std::optional<double> svd_baseline;
};

struct RunSummary {
  ExperimentKind experiment = ExperimentKind::Static;
  std::int64_t steps = 0;
  double mean_ns_per_step = 0.0;
  std::optional<double> final_error;

  std::string line() const;
};

struct RunResult {
  RunSummary summary;
  std::vector<TelemetryRow> telemetry;
  std::vector<Checkpoint> checkpoints;
  std::optional<CompletionResult> completion;
  /// Relative error to the hidden matrix after each completion pass.
  std::vector<double> pass_errors;
  std::optional<StreamMetrics> stream;
  std::vector<BenchPoint> bench;
};

/// Runs the protocol and, when an output directory is configured (spec.output,
/// else $GROUSE_OUTPUT_DIR), writes telemetry.csv and the protocol's result
/// files there. Throws ConfigError, ParseError or std::runtime_error (I/O).
RunResult run_experiment(const ExperimentSpec& spec);

/// Output directory for a spec: spec.output, else $GROUSE_OUTPUT_DIR, else none.
std::optional<std::filesystem::path> output_directory(const ExperimentSpec& spec);

}  // namespace grouse
