#include "grouse/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "grouse/random.hpp"

namespace grouse {

namespace {

enum Substream : std::uint64_t {
  kModelSeed = 101,
  kSamplingSeed = 102,
  kTrackerSeed = 103,
  kCompletionTruthSeed = 104,
  kCompletionSampleSeed = 105,
  kBenchSeed = 106,
};

using Clock = std::chrono::steady_clock;

std::int64_t nanos_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  Int value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key), "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view key, std::string_view text) {
  const auto value = parse_real(text);
  if (!value) throw ConfigError(std::string(key), "expected a number, got '" + std::string(trim(text)) + "'");
  return *value;
}

template <typename Int>
std::vector<Int> parse_int_list(std::string_view key, std::string_view text) {
  std::vector<Int> out;
  text = trim(text);
  if (text.empty()) return out;
  for (auto field : split_fields(text)) out.push_back(parse_integer<Int>(key, field));
  return out;
}

template <typename Int>
std::string join(const std::vector<Int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

struct Field {
  std::function<void(ExperimentSpec&, std::string_view)> set;
  std::function<std::string(const ExperimentSpec&)> get;
};

ExperimentKind parse_experiment(std::string_view text) {
  static const std::map<std::string_view, ExperimentKind> kinds{
      {"static", ExperimentKind::Static},         {"switching", ExperimentKind::Switching},
      {"rotating", ExperimentKind::Rotating},     {"stream_csv", ExperimentKind::StreamCsv},
      {"completion", ExperimentKind::Completion}, {"bench", ExperimentKind::Bench}};
  const auto it = kinds.find(trim(text));
  if (it == kinds.end()) {
    throw ConfigError("experiment", "expected static|switching|rotating|stream_csv|completion|bench, got '" +
                                        std::string(trim(text)) + "'");
  }
  return it->second;
}

const std::map<std::string_view, Field>& fields() {
  static const std::map<std::string_view, Field> table{
      {"experiment",
       {[](ExperimentSpec& s, std::string_view v) { s.experiment = parse_experiment(v); },
        [](const ExperimentSpec& s) { return std::string(to_string(s.experiment)); }}},
      {"n",
       {[](ExperimentSpec& s, std::string_view v) { s.n = parse_integer<Index>("n", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.n); }}},
      {"d",
       {[](ExperimentSpec& s, std::string_view v) { s.d = parse_integer<Index>("d", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.d); }}},
      {"noise",
       {[](ExperimentSpec& s, std::string_view v) { s.noise = parse_double("noise", v); },
        [](const ExperimentSpec& s) { return format_real(s.noise); }}},
      {"switch_times",
       {[](ExperimentSpec& s, std::string_view v) {
          s.switch_times = parse_int_list<std::int64_t>("switch_times", v);
        },
        [](const ExperimentSpec& s) { return join(s.switch_times); }}},
      {"delta",
       {[](ExperimentSpec& s, std::string_view v) { s.delta = parse_double("delta", v); },
        [](const ExperimentSpec& s) { return format_real(s.delta); }}},
      {"sampling",
       {[](ExperimentSpec& s, std::string_view v) {
          v = trim(v);
          if (v == "fixed") {
            s.sampling = SamplingKind::FixedSize;
          } else if (v == "bernoulli") {
            s.sampling = SamplingKind::Bernoulli;
          } else {
            throw ConfigError("sampling", "expected fixed|bernoulli, got '" + std::string(v) + "'");
          }
        },
        [](const ExperimentSpec& s) { return std::string(to_string(s.sampling)); }}},
      {"density",
       {[](ExperimentSpec& s, std::string_view v) { s.density = parse_double("density", v); },
        [](const ExperimentSpec& s) { return format_real(s.density); }}},
      {"schedule",
       {[](ExperimentSpec& s, std::string_view v) {
          v = trim(v);
          if (v == "diminishing") {
            s.tracker.schedule.kind = ScheduleKind::Diminishing;
          } else if (v == "constant") {
            s.tracker.schedule.kind = ScheduleKind::Constant;
          } else {
            throw ConfigError("schedule", "expected diminishing|constant, got '" + std::string(v) + "'");
          }
        },
        [](const ExperimentSpec& s) { return std::string(to_string(s.tracker.schedule.kind)); }}},
      {"step",
       {[](ExperimentSpec& s, std::string_view v) { s.tracker.schedule.c = parse_double("step", v); },
        [](const ExperimentSpec& s) { return format_real(s.tracker.schedule.c); }}},
      {"min_samples_factor",
       {[](ExperimentSpec& s, std::string_view v) {
          s.tracker.min_samples_factor = parse_double("min_samples_factor", v);
        },
        [](const ExperimentSpec& s) { return format_real(s.tracker.min_samples_factor); }}},
      {"residual_tol",
       {[](ExperimentSpec& s, std::string_view v) { s.tracker.residual_tol = parse_double("residual_tol", v); },
        [](const ExperimentSpec& s) { return format_real(s.tracker.residual_tol); }}},
      {"rank_policy",
       {[](ExperimentSpec& s, std::string_view v) {
          v = trim(v);
          if (v == "skip") {
            s.tracker.rank_policy = RankPolicy::Skip;
          } else if (v == "min_norm") {
            s.tracker.rank_policy = RankPolicy::MinNorm;
          } else {
            throw ConfigError("rank_policy", "expected skip|min_norm, got '" + std::string(v) + "'");
          }
        },
        [](const ExperimentSpec& s) { return std::string(to_string(s.tracker.rank_policy)); }}},
      {"horizon",
       {[](ExperimentSpec& s, std::string_view v) { s.horizon = parse_integer<std::int64_t>("horizon", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.horizon); }}},
      {"report_every",
       {[](ExperimentSpec& s, std::string_view v) {
          s.report_every = parse_integer<std::int64_t>("report_every", v);
        },
        [](const ExperimentSpec& s) { return std::to_string(s.report_every); }}},
      {"checkpoints",
       {[](ExperimentSpec& s, std::string_view v) {
          s.checkpoints = parse_int_list<std::int64_t>("checkpoints", v);
        },
        [](const ExperimentSpec& s) { return join(s.checkpoints); }}},
      {"seed",
       {[](ExperimentSpec& s, std::string_view v) { s.seed = parse_integer<std::uint64_t>("seed", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.seed); }}},
      {"output",
       {[](ExperimentSpec& s, std::string_view v) { s.output = std::string(trim(v)); },
        [](const ExperimentSpec& s) { return s.output; }}},
      {"input",
       {[](ExperimentSpec& s, std::string_view v) { s.input = std::string(trim(v)); },
        [](const ExperimentSpec& s) { return s.input; }}},
      {"rows",
       {[](ExperimentSpec& s, std::string_view v) { s.rows = parse_integer<Index>("rows", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.rows); }}},
      {"cols",
       {[](ExperimentSpec& s, std::string_view v) { s.cols = parse_integer<Index>("cols", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.cols); }}},
      {"passes",
       {[](ExperimentSpec& s, std::string_view v) { s.passes = parse_integer<int>("passes", v); },
        [](const ExperimentSpec& s) { return std::to_string(s.passes); }}},
      {"early_stop",
       {[](ExperimentSpec& s, std::string_view v) { s.early_stop = parse_double("early_stop", v); },
        [](const ExperimentSpec& s) { return format_real(s.early_stop); }}},
      {"bench_sizes",
       {[](ExperimentSpec& s, std::string_view v) { s.bench_sizes = parse_int_list<Index>("bench_sizes", v); },
        [](const ExperimentSpec& s) { return join(s.bench_sizes); }}},
      {"bench_steps",
       {[](ExperimentSpec& s, std::string_view v) {
          s.bench_steps = parse_integer<std::int64_t>("bench_steps", v);
        },
        [](const ExperimentSpec& s) { return std::to_string(s.bench_steps); }}},
      {"bench_warmup",
       {[](ExperimentSpec& s, std::string_view v) {
          s.bench_warmup = parse_integer<std::int64_t>("bench_warmup", v);
        },
        [](const ExperimentSpec& s) { return std::to_string(s.bench_warmup); }}},
  };
  return table;
}

}  // namespace

const std::vector<std::string_view> kSpecKeys{
    "experiment", "n",          "d",           "noise",        "switch_times", "delta",
    "sampling",   "density",    "schedule",    "step",         "min_samples_factor",
    "residual_tol", "rank_policy", "horizon",  "report_every", "checkpoints",  "seed",
    "output",     "input",      "rows",        "cols",         "passes",       "early_stop",
    "bench_sizes", "bench_steps", "bench_warmup"};

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Static: return "static";
    case ExperimentKind::Switching: return "switching";
    case ExperimentKind::Rotating: return "rotating";
    case ExperimentKind::StreamCsv: return "stream_csv";
    case ExperimentKind::Completion: return "completion";
    case ExperimentKind::Bench: return "bench";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  if (d < 1) throw ConfigError("d", "must be >= 1");
  if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
  if (report_every < 1) throw ConfigError("report_every", "must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw ConfigError("density", "must lie in (0, 1]");
  if (!(noise >= 0.0)) throw ConfigError("noise", "must be >= 0");
  try {
    tracker.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("step", e.what());
  }
  switch (experiment) {
    case ExperimentKind::Static:
    case ExperimentKind::Switching:
    case ExperimentKind::Rotating:
      if (d >= n) throw ConfigError("d", "must be smaller than n");
      for (std::size_t i = 1; i < switch_times.size(); ++i) {
        if (switch_times[i] <= switch_times[i - 1]) throw ConfigError("switch_times", "must be strictly increasing");
      }
      if (experiment == ExperimentKind::Rotating && !(delta > 0.0)) throw ConfigError("delta", "must be positive");
      break;
    case ExperimentKind::StreamCsv:
      if (input.empty()) throw ConfigError("input", "stream_csv needs an input file");
      if (!std::filesystem::exists(input)) throw ConfigError("input", "file not found: " + input);
      break;
    case ExperimentKind::Completion:
      if (passes < 1) throw ConfigError("passes", "must be >= 1");
      if (!input.empty() && !std::filesystem::exists(input)) throw ConfigError("input", "file not found: " + input);
      if (input.empty() && d >= std::min(rows, cols)) throw ConfigError("d", "must be smaller than min(rows, cols)");
      break;
    case ExperimentKind::Bench:
      if (bench_sizes.size() < 3) throw ConfigError("bench_sizes", "need at least 3 sizes");
      for (std::size_t i = 1; i < bench_sizes.size(); ++i) {
        if (bench_sizes[i] <= bench_sizes[i - 1]) throw ConfigError("bench_sizes", "must be strictly increasing");
      }
      if (bench_sizes.front() <= d) throw ConfigError("bench_sizes", "every size must exceed d");
      if (bench_steps < 1) throw ConfigError("bench_steps", "must be >= 1");
      if (bench_warmup < 0) throw ConfigError("bench_warmup", "must be >= 0");
      break;
  }
}

void set_field(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  const auto& table = fields();
  const auto it = table.find(trim(key));
  if (it == table.end()) throw ConfigError(std::string(trim(key)), "unknown key");
  it->second.set(spec, value);
}

void apply_override(ExperimentSpec& spec, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(trim(assignment)), "override must look like key=value");
  }
  set_field(spec, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentSpec parse_spec(std::string_view text, const std::string& source) {
  ExperimentSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no), "expected key = value");
    }
    apply_override(spec, line);
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str(), path.string());
}

std::string serialize_spec(const ExperimentSpec& spec) {
  const auto& table = fields();
  std::string out;
  for (auto key : kSpecKeys) {
    out += std::string(key) + " = " + table.at(key).get(spec) + "\n";
  }
  return out;
}

GenerativeModel generative_model(const ExperimentSpec& spec) {
  GenerativeModel model;
  switch (spec.experiment) {
    case ExperimentKind::Switching: model.kind = ModelKind::Switching; break;
    case ExperimentKind::Rotating: model.kind = ModelKind::Rotating; break;
    default: model.kind = ModelKind::Static; break;
  }
  model.n = spec.n;
  model.d = spec.d;
  model.noise_std = spec.noise;
  if (model.kind == ModelKind::Switching) model.switch_times = spec.switch_times;
  model.delta = spec.delta;
  model.seed = derive_seed(spec.seed, kModelSeed, 0);
  return model;
}

SamplingModel sampling_model(const ExperimentSpec& spec) {
  return SamplingModel{spec.sampling, spec.density, derive_seed(spec.seed, kSamplingSeed, 0)};
}

std::uint64_t tracker_seed(const ExperimentSpec& spec) { return derive_seed(spec.seed, kTrackerSeed, 0); }

std::vector<MaskedVector> subsample_stream(const std::vector<MaskedVector>& rows, const SamplingModel& sampling) {
  std::vector<MaskedVector> out;
  out.reserve(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const MaskedVector& row = rows[t];
    if (sampling.density >= 1.0) {
      out.push_back(row);
      continue;
    }
    const IndexSet mask = draw_mask(sampling, row.ambient_dim, static_cast<std::int64_t>(t) + 1);
    std::vector<Index> support;
    std::vector<double> values;
    std::size_t k = 0;
    for (Index i : mask.indices()) {
      while (k < row.support.size() && row.support[k] < i) ++k;
      if (k < row.support.size() && row.support[k] == i) {
        support.push_back(i);
        values.push_back(row.values[static_cast<Index>(k)]);
      }
    }
    out.emplace_back(row.ambient_dim, IndexSet(std::move(support), row.ambient_dim),
                     Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
  }
  return out;
}

std::vector<MaskedVector> ingest_stream_csv(const std::filesystem::path& path,
                                            const std::optional<SamplingModel>& subsample) {
  StreamData data = read_stream_csv(path);
  if (!subsample) return std::move(data.rows);
  return subsample_stream(data.rows, *subsample);
}

std::vector<BenchPoint> bench_linear_scaling(const BenchConfig& config) {
  if (config.sizes.size() < 3) throw std::invalid_argument("bench_linear_scaling: need at least 3 sizes");
  for (std::size_t i = 1; i < config.sizes.size(); ++i) {
    if (config.sizes[i] <= config.sizes[i - 1]) {
      throw std::invalid_argument("bench_linear_scaling: sizes must be strictly increasing");
    }
  }
  if (config.steps < 1) throw std::invalid_argument("bench_linear_scaling: steps must be >= 1");

  std::vector<BenchPoint> points;
  const TrackerConfig tracker{StepSchedule::constant(1e-3)};
  for (Index n : config.sizes) {
    GenerativeModel model;
    model.n = n;
    model.d = config.d;
    // Noise keeps the residual away from zero, so no step is skipped.
    model.noise_std = 0.1;
    model.seed = derive_seed(config.seed, kBenchSeed, static_cast<std::uint64_t>(n));
    SubspaceStream stream(model);
    const SamplingModel sampling{SamplingKind::FixedSize, config.density, derive_seed(model.seed, kSamplingSeed, 0)};

    const std::int64_t total = config.warmup + config.steps;
    const std::int64_t pool_size = std::min<std::int64_t>(total, 256);
    std::vector<MaskedVector> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (std::int64_t t = 1; t <= pool_size; ++t) {
      pool.push_back(MaskedVector::observe(stream.next_vector(t), draw_mask(sampling, n, t)));
    }

    SubspaceEstimate state = new_tracker(n, config.d, derive_seed(model.seed, kTrackerSeed, 0));
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(config.steps));
    for (std::int64_t t = 0; t < total; ++t) {
      const MaskedVector& obs = pool[static_cast<std::size_t>(t % pool_size)];
      const auto start = Clock::now();
      grouse_step(state, obs, tracker);
      const auto elapsed = nanos_since(start);
      if (t >= config.warmup) samples.push_back(static_cast<double>(elapsed));
    }
    const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    points.push_back({n, static_cast<Index>(pool.front().support.size()), *mid});
  }
  return points;
}

std::string RunSummary::line() const {
  std::ostringstream out;
  out << "experiment=" << to_string(experiment) << " steps=" << steps;
  out << " final_error=" << (final_error ? format_real(*final_error) : std::string("n/a"));
  out << " mean_ns_per_step=" << static_cast<std::int64_t>(std::llround(mean_ns_per_step));
  return out.str();
}

std::optional<std::filesystem::path> output_directory(const ExperimentSpec& spec) {
  if (!spec.output.empty()) return std::filesystem::path(spec.output);
  if (const char* env = std::getenv("GROUSE_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

namespace {

bool is_checkpoint(const ExperimentSpec& spec, std::int64_t t) {
  return std::find(spec.checkpoints.begin(), spec.checkpoints.end(), t) != spec.checkpoints.end();
}

TelemetryRow telemetry_from(const UpdateReport& report, std::int64_t wall_nanos) {
  TelemetryRow row;
  row.t = report.t;
  row.eta = report.eta;
  row.residual_signal = residual_signal(report);
  row.cost = report.residual_norm * report.residual_norm;
  row.skipped = report.skipped;
  row.wall_nanos = wall_nanos;
  return row;
}

RunResult run_tracking(const ExperimentSpec& spec) {
  RunResult result;
  SubspaceStream stream(generative_model(spec));
  const SamplingModel sampling = sampling_model(spec);
  SubspaceEstimate state = new_tracker(spec.n, spec.d, tracker_seed(spec));

  std::int64_t total_ns = 0;
  for (std::int64_t t = 1; t <= spec.horizon; ++t) {
    const MaskedVector obs = MaskedVector::observe(stream.next_vector(t), draw_mask(sampling, spec.n, t));
    const auto start = Clock::now();
    const UpdateReport report = grouse_step(state, obs, spec.tracker);
    const std::int64_t elapsed = nanos_since(start);
    total_ns += elapsed;

    const bool checkpoint = is_checkpoint(spec, t);
    if (t % spec.report_every == 0 || checkpoint || t == spec.horizon) {
      TelemetryRow row = telemetry_from(report, elapsed);
      row.subspace_error = subspace_error(state.basis, stream.true_basis(t));
      result.telemetry.push_back(row);
      if (t == spec.horizon) result.summary.final_error = row.subspace_error;
    }
    if (checkpoint) result.checkpoints.push_back({t, state.basis, stream.true_basis(t)});
  }
  result.summary.steps = spec.horizon;
  result.summary.mean_ns_per_step = static_cast<double>(total_ns) / static_cast<double>(spec.horizon);
  return result;
}

RunResult run_stream_csv(const ExperimentSpec& spec) {
  RunResult result;
  StreamData data = read_stream_csv(spec.input);
  const Index n = data.ambient_dim();
  if (spec.d >= n) throw ConfigError("d", "must be smaller than the stream dimension " + std::to_string(n));
  const auto horizon = std::min<std::size_t>(data.rows.size(), static_cast<std::size_t>(spec.horizon));
  data.rows.erase(data.rows.begin() + static_cast<std::ptrdiff_t>(horizon), data.rows.end());
  const std::vector<MaskedVector> observed = subsample_stream(data.rows, sampling_model(spec));

  SubspaceEstimate state = new_tracker(n, spec.d, tracker_seed(spec));
  double err_sq = 0.0;
  double ref_sq = 0.0;
  StreamMetrics metrics;
  metrics.predictions.resize(n, static_cast<Index>(horizon));
  std::int64_t total_ns = 0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const auto start = Clock::now();
    const UpdateReport report = grouse_step(state, observed[k], spec.tracker);
    const std::int64_t elapsed = nanos_since(start);
    total_ns += elapsed;
    metrics.predictions.col(static_cast<Index>(k)) = report.predicted;

    // Error against every cell present in the file, observed or not.
    const MaskedVector& truth = data.rows[k];
    for (std::size_t j = 0; j < truth.support.size(); ++j) {
      const double v = truth.values[static_cast<Index>(j)];
      const double diff = report.predicted[truth.support[j]] - v;
      err_sq += diff * diff;
      ref_sq += v * v;
    }
    if (report.t % spec.report_every == 0 || k + 1 == horizon) {
      result.telemetry.push_back(telemetry_from(report, elapsed));
    }
  }
  if (ref_sq == 0.0) throw std::runtime_error("stream " + spec.input + " carries no non-zero data");

  metrics.reconstruction_error = std::sqrt(err_sq / ref_sq);
  if (const auto dense = data.dense()) metrics.svd_baseline = svd_baseline_error(*dense, spec.d);
  result.stream = std::move(metrics);
  result.summary.final_error = result.stream->reconstruction_error;
  result.summary.steps = static_cast<std::int64_t>(horizon);
  result.summary.mean_ns_per_step = horizon > 0 ? static_cast<double>(total_ns) / static_cast<double>(horizon) : 0.0;
  return result;
}

RunResult run_completion(const ExperimentSpec& spec) {
  RunResult result;
  CompletionProblem problem;
  std::optional<DenseMatrix> truth;
  std::optional<DenseMatrix> truth_basis;
  if (!spec.input.empty()) {
    problem.observed = read_entries_csv(spec.input);
    Index max_row = -1;
    Index max_col = -1;
    for (const auto& e : problem.observed) {
      max_row = std::max(max_row, e.row);
      max_col = std::max(max_col, e.col);
    }
    problem.n_rows = std::max(spec.rows, max_row + 1);
    problem.n_cols = std::max(spec.cols, max_col + 1);
    problem.rank = spec.d;
    problem.shuffle_seed = derive_seed(spec.seed, kCompletionSampleSeed, 1);
  } else {
    truth = random_low_rank(spec.rows, spec.cols, spec.d, derive_seed(spec.seed, kCompletionTruthSeed, 0));
    problem = sample_problem(*truth, spec.d, spec.density, spec.noise, derive_seed(spec.seed, kCompletionSampleSeed, 0));
    Eigen::BDCSVD<DenseMatrix> svd(*truth, Eigen::ComputeThinU);
    truth_basis = svd.matrixU().leftCols(spec.d);
  }
  problem.passes = spec.passes;
  problem.early_stop_rel = spec.early_stop;
  if (problem.rank >= std::min(problem.n_rows, problem.n_cols)) {
    throw ConfigError("d", "must be smaller than min(rows, cols)");
  }

  std::int64_t total_ns = 0;
  std::int64_t steps = 0;
  CompletionObserver observer;
  observer.on_step = [&](const UpdateReport& report, const SubspaceEstimate& state, std::int64_t nanos) {
    total_ns += nanos;
    ++steps;
    if (report.t % spec.report_every == 0) {
      TelemetryRow row = telemetry_from(report, nanos);
      if (truth_basis) row.subspace_error = subspace_error(state.basis, *truth_basis);
      result.telemetry.push_back(row);
    }
  };
  const std::vector<MaskedVector> columns = truth ? split_columns(problem) : std::vector<MaskedVector>{};
  observer.on_pass = [&](int, const SubspaceEstimate& state) {
    if (!truth) return;
    DenseMatrix coeffs = DenseMatrix::Zero(problem.rank, problem.n_cols);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (!columns[j].support.empty()) {
        coeffs.col(static_cast<Index>(j)) = masked_least_squares(state.basis, columns[j]).weights;
      }
    }
    result.pass_errors.push_back(relative_error(state.basis * coeffs, *truth));
  };

  CompletionResult completion = solve_completion(problem, spec.tracker, observer);
  if (truth) result.summary.final_error = relative_error(completion.reconstruction, *truth);
  result.summary.steps = steps;
  result.summary.mean_ns_per_step = steps > 0 ? static_cast<double>(total_ns) / static_cast<double>(steps) : 0.0;
  result.completion = std::move(completion);
  return result;
}

RunResult run_bench(const ExperimentSpec& spec) {
  RunResult result;
  BenchConfig config;
  config.d = spec.d;
  config.sizes = spec.bench_sizes;
  config.density = spec.density;
  config.steps = spec.bench_steps;
  config.warmup = spec.bench_warmup;
  config.seed = spec.seed;
  result.bench = bench_linear_scaling(config);
  double total = 0.0;
  for (const auto& p : result.bench) total += p.median_ns;
  result.summary.steps = spec.bench_steps * static_cast<std::int64_t>(result.bench.size());
  result.summary.mean_ns_per_step = total / static_cast<double>(result.bench.size());
  return result;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_outputs(const ExperimentSpec& spec, const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "config.txt");
    out << serialize_spec(spec);
  }
  if (spec.experiment != ExperimentKind::Bench) {
    auto out = open_output(dir / "telemetry.csv");
    write_telemetry_csv(out, result.telemetry);
  }
  switch (spec.experiment) {
    case ExperimentKind::Static:
    case ExperimentKind::Switching:
    case ExperimentKind::Rotating:
      for (const auto& cp : result.checkpoints) {
        write_matrix_csv(dir / ("basis_t" + std::to_string(cp.t) + ".csv"), cp.estimate);
        write_matrix_csv(dir / ("truth_t" + std::to_string(cp.t) + ".csv"), cp.truth);
      }
      break;
    case ExperimentKind::StreamCsv: {
      write_matrix_csv(dir / "predictions.csv", result.stream->predictions);
      auto out = open_output(dir / "metrics.csv");
      out << "reconstruction_error,svd_baseline\n"
          << format_real(result.stream->reconstruction_error) << ','
          << (result.stream->svd_baseline ? format_real(*result.stream->svd_baseline) : std::string()) << '\n';
      break;
    }
    case ExperimentKind::Completion: {
      const CompletionResult& c = *result.completion;
      write_matrix_csv(dir / "basis.csv", c.basis.basis);
      write_matrix_csv(dir / "coefficients.csv", c.coefficients);
      write_matrix_csv(dir / "reconstruction.csv", c.reconstruction);
      auto out = open_output(dir / "fit_history.csv");
      out << "pass,observed_rms,relative_error\n";
      for (std::size_t i = 0; i < c.fit_history.size(); ++i) {
        out << (i + 1) << ',' << format_real(c.fit_history[i]) << ',';
        if (i < result.pass_errors.size()) out << format_real(result.pass_errors[i]);
        out << '\n';
      }
      break;
    }
    case ExperimentKind::Bench: {
      auto out = open_output(dir / "bench.csv");
      out << "n,observed,median_ns\n";
      for (const auto& p : result.bench) out << p.n << ',' << p.observed << ',' << format_real(p.median_ns) << '\n';
      break;
    }
  }
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  RunResult result;
  switch (spec.experiment) {
    case ExperimentKind::Static:
    case ExperimentKind::Switching:
    case ExperimentKind::Rotating:
      result = run_tracking(spec);
      break;
    case ExperimentKind::StreamCsv:
      result = run_stream_csv(spec);
      break;
    case ExperimentKind::Completion:
      result = run_completion(spec);
      break;
    case ExperimentKind::Bench:
      result = run_bench(spec);
      break;
  }
  result.summary.experiment = spec.experiment;
  if (const auto dir = output_directory(spec)) write_outputs(spec, result, *dir);
  return result;
}

}  // namespace grouse
