// grouse: run subspace tracking and matrix completion experiments.
//
//   grouse run <config> [--set key=value ...] [--out dir] [--seed N]
//   grouse bench [--d 10] [--sizes 500,1000,2000,4000] [--density 0.17] ...
//   grouse complete <entries.csv> --rank d [--passes 10] [--step C] ...
//   grouse generate <config> --csv file.csv [--masked]
//
// Exit status: 0 on success, 2 for usage/configuration errors, 3 for input or
// output failures.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grouse/experiment.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kIoError = 3;

struct CommonOptions {
  std::vector<std::string> overrides;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--set", opts.overrides, "Override a config key (key=value); repeatable");
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--seed", opts.seed, "Master random seed");
  cmd->add_flag("--print-config", opts.print_config, "Print the effective configuration first");
}

void apply_common(grouse::ExperimentSpec& spec, const CommonOptions& opts) {
  for (const auto& o : opts.overrides) grouse::apply_override(spec, o);
  if (!opts.out.empty()) spec.output = opts.out;
  if (opts.seed) spec.seed = *opts.seed;
}

int execute(const grouse::ExperimentSpec& spec, bool print_config) {
  if (print_config) std::cout << grouse::serialize_spec(spec);
  const grouse::RunResult result = grouse::run_experiment(spec);
  if (!result.bench.empty()) {
    std::cout << "n,observed,median_ns\n";
    for (const auto& p : result.bench) {
      std::cout << p.n << ',' << p.observed << ',' << grouse::format_real(p.median_ns) << '\n';
    }
  }
  if (result.stream) {
    std::cout << "reconstruction_error=" << grouse::format_real(result.stream->reconstruction_error);
    if (result.stream->svd_baseline) {
      std::cout << " svd_baseline=" << grouse::format_real(*result.stream->svd_baseline);
    }
    std::cout << '\n';
  }
  std::cout << result.summary.line() << std::endl;
  return 0;
}

void write_generated_stream(const grouse::ExperimentSpec& spec, const std::string& path, bool masked) {
  grouse::SubspaceStream stream(grouse::generative_model(spec));
  const grouse::SamplingModel sampling = grouse::sampling_model(spec);
  std::vector<grouse::MaskedVector> rows;
  rows.reserve(static_cast<std::size_t>(spec.horizon));
  for (std::int64_t t = 1; t <= spec.horizon; ++t) {
    const grouse::Vector v = stream.next_vector(t);
    rows.push_back(grouse::MaskedVector::observe(
        v, masked ? grouse::draw_mask(sampling, spec.n, t) : grouse::IndexSet::full(spec.n)));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  grouse::write_stream_csv(out, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming subspace tracking and online matrix completion"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_config, "key = value configuration file")->required();
  add_common(run, run_opts);

  CommonOptions bench_opts;
  grouse::ExperimentSpec bench_spec;
  bench_spec.experiment = grouse::ExperimentKind::Bench;
  auto* bench = app.add_subcommand("bench", "Time grouse_step across ambient dimensions");
  bench->add_option("--d", bench_spec.d, "Subspace dimension");
  bench->add_option("--sizes", bench_spec.bench_sizes, "Ambient dimensions (strictly increasing)")->delimiter(',');
  bench->add_option("--density", bench_spec.density, "Sampling density");
  bench->add_option("--steps", bench_spec.bench_steps, "Timed steps per size");
  bench->add_option("--warmup", bench_spec.bench_warmup, "Untimed warmup steps per size");
  add_common(bench, bench_opts);

  CommonOptions complete_opts;
  std::string entries_path;
  grouse::ExperimentSpec complete_spec;
  complete_spec.experiment = grouse::ExperimentKind::Completion;
  complete_spec.rows = 0;
  complete_spec.cols = 0;
  complete_spec.tracker.schedule = grouse::StepSchedule::diminishing(0.3);
  std::string schedule = "diminishing";
  auto* complete = app.add_subcommand("complete", "Complete a matrix given as row,col,value entries");
  complete->add_option("entries", entries_path, "Entry-list CSV (row,col,value)")->required();
  complete->add_option("--rank", complete_spec.d, "Rank of the completion")->required();
  complete->add_option("--rows", complete_spec.rows, "Number of rows (default: largest row index + 1)");
  complete->add_option("--cols", complete_spec.cols, "Number of columns (default: largest column index + 1)");
  complete->add_option("--passes", complete_spec.passes, "Passes over the columns");
  complete->add_option("--step", complete_spec.tracker.schedule.c, "Step constant C");
  complete->add_option("--schedule", schedule, "diminishing | constant");
  add_common(complete, complete_opts);

  CommonOptions gen_opts;
  std::string gen_config;
  std::string gen_csv;
  bool gen_masked = false;
  auto* generate = app.add_subcommand("generate", "Write the synthetic stream of a config as stream CSV");
  generate->add_option("config", gen_config, "key = value configuration file")->required();
  generate->add_option("--csv", gen_csv, "Destination stream CSV")->required();
  generate->add_flag("--masked", gen_masked, "Leave unobserved cells empty");
  add_common(generate, gen_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      grouse::ExperimentSpec spec = grouse::load_spec(run_config);
      apply_common(spec, run_opts);
      return execute(spec, run_opts.print_config);
    }
    if (*bench) {
      apply_common(bench_spec, bench_opts);
      return execute(bench_spec, bench_opts.print_config);
    }
    if (*complete) {
      complete_spec.input = entries_path;
      grouse::set_field(complete_spec, "schedule", schedule);
      apply_common(complete_spec, complete_opts);
      return execute(complete_spec, complete_opts.print_config);
    }
    if (*generate) {
      grouse::ExperimentSpec spec = grouse::load_spec(gen_config);
      apply_common(spec, gen_opts);
      spec.validate();
      write_generated_stream(spec, gen_csv, gen_masked);
      return 0;
    }
  } catch (const grouse::ConfigError& e) {
    std::cerr << "grouse: configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const grouse::ParseError& e) {
    std::cerr << "grouse: parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "grouse: invalid argument: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "grouse: " << e.what() << '\n';
    return kIoError;
  }
  return 0;
}
