// mecs: command-line front end.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "mecs/commands.hpp"

namespace {

void add_common(CLI::App* cmd, std::string& config, std::vector<std::string>& overrides, std::string& output,
                std::string& output_dir) {
  cmd->add_option("-c,--config", config, "INI run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", overrides, "Override a config value, section.key=value (repeatable)");
  cmd->add_option("-o,--output", output, "Output CSV (default: stdout)");
  cmd->add_option("--output-dir", output_dir, "Directory for relative output paths");
}

// --tau is shorthand for --set coincidence.tau=...
void add_tau(CLI::App* cmd, std::vector<std::string>& overrides) {
  cmd->add_option_function<std::string>(
      "--tau", [&overrides](const std::string& v) { overrides.push_back("coincidence.tau=" + v); },
      "Global coincidence window in samples");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-event-class synchronization analysis"};
  app.require_subcommand(1);

  mecs::cli::AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Batch synchronization report for an event file");
  analyze_cmd->add_option("events", analyze.events, "Event CSV (time,series,class)")->required();
  add_common(analyze_cmd, analyze.config, analyze.overrides, analyze.output, analyze.output_dir);
  add_tau(analyze_cmd, analyze.overrides);

  mecs::cli::AnalyzeArgs derive;
  auto* derive_cmd = app.add_subcommand("derive", "Apply macro classes and sequence detection; write events");
  derive_cmd->add_option("events", derive.events, "Event CSV (time,series,class)")->required();
  add_common(derive_cmd, derive.config, derive.overrides, derive.output, derive.output_dir);

  mecs::cli::StreamArgs stream;
  auto* stream_cmd = app.add_subcommand("stream", "Buffered analysis, one report group per buffer");
  stream_cmd->add_option("events", stream.events, "Event CSV (time,series,class)");
  stream_cmd->add_option("--signal", stream.signals, "Signal input SERIES:CLASS:PATH; peaks become events");
  stream_cmd->add_option("--prominence", stream.prominence, "Peak prominence for --signal inputs");
  stream_cmd->add_option("--separation", stream.separation, "Peak separation for --signal inputs");
  add_common(stream_cmd, stream.config, stream.overrides, stream.output, stream.output_dir);
  add_tau(stream_cmd, stream.overrides);

  mecs::cli::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic example data set and its config");
  synth_cmd->add_option("example", synth.example, "composed | sequences | casestudy")
      ->required()
      ->check(CLI::IsMember({"composed", "sequences", "casestudy"}));
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("-o,--out", synth.out_dir, "Output directory");

  mecs::cli::BaselineArgs baseline;
  auto* baseline_cmd = app.add_subcommand("baseline", "Classical event synchronization of two series, one class");
  baseline_cmd->add_option("events", baseline.events, "Event CSV (time,series,class)")->required();
  baseline_cmd->add_option("--tau", baseline.tau, "Coincidence window in samples")->required();

  mecs::cli::BenchArgs bench;
  std::string bench_output;
  auto* bench_cmd = app.add_subcommand("bench", "Time one steady-state streaming push");
  bench_cmd->add_option("--series", bench.n_series, "Number of series");
  bench_cmd->add_option("--classes", bench.k_classes, "Number of event classes");
  bench_cmd->add_option("--merg-dim", bench.merg_dim, "Merged window length in samples");
  bench_cmd->add_option("--density", bench.density, "Probability of an event per sample");
  bench_cmd->add_option("--repeats", bench.repeats, "Timed repetitions");
  bench_cmd->add_option("--tau", bench.tau, "Coincidence window (default: half the merged window)");
  bench_cmd->add_option("--seed", bench.seed, "Random seed");
  bench_cmd->add_option("-o,--output", bench_output, "Output CSV (default: stdout)");

  mecs::cli::PeaksArgs peaks;
  auto* peaks_cmd = app.add_subcommand("peaks", "Detect peaks in a signal CSV and write them as events");
  peaks_cmd->add_option("signal", peaks.signal, "Signal CSV (sample,value)")->required();
  peaks_cmd->add_option("--prominence", peaks.prominence, "Minimum prominence");
  peaks_cmd->add_option("--separation", peaks.separation, "Minimum distance between peaks");
  peaks_cmd->add_option("--series", peaks.series, "Series index of the emitted events");
  peaks_cmd->add_option("--class", peaks.class_name, "Class name of the emitted events");
  peaks_cmd->add_option("-o,--output", peaks.output, "Output CSV (default: stdout)");
  peaks_cmd->add_option("--output-dir", peaks.output_dir, "Directory for relative output paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mecs::cli::kExitUsage;
  }

  try {
    if (*analyze_cmd) {
      mecs::cli::cmd_analyze(analyze, std::cout);
    } else if (*derive_cmd) {
      mecs::cli::cmd_derive(derive, std::cout);
    } else if (*stream_cmd) {
      if (stream.events.empty() && stream.signals.empty()) {
        std::cerr << "stream: give an events file or at least one --signal\n";
        return mecs::cli::kExitUsage;
      }
      mecs::cli::cmd_stream(stream, std::cout);
    } else if (*synth_cmd) {
      for (const auto& path : mecs::cli::cmd_synth(synth)) std::cerr << "wrote " << path.string() << '\n';
    } else if (*baseline_cmd) {
      mecs::cli::cmd_baseline(baseline, std::cout);
    } else if (*bench_cmd) {
      const auto result = mecs::cli::run_bench(bench);
      mecs::cli::detail::emit(bench_output, {}, std::cout,
                              [&](std::ostream& os) { mecs::cli::write_bench(os, result); });
    } else if (*peaks_cmd) {
      mecs::cli::cmd_peaks(peaks, std::cout);
    }
  } catch (const mecs::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mecs::cli::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mecs::cli::kExitData;
  }
  return mecs::cli::kExitOk;
}
