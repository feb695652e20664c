#pragma once

// Subcommand implementations behind the `mecs` executable. Each command
// reads its inputs from files, writes CSV to a file or a stream, and throws
// mecs::Error on failure; exit_code() maps errors to process exit codes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mecs/case_study.hpp"
#include "mecs/coincidence.hpp"
#include "mecs/config.hpp"
#include "mecs/event_model.hpp"
#include "mecs/io.hpp"
#include "mecs/macro.hpp"
#include "mecs/signal.hpp"
#include "mecs/streaming.hpp"
#include "mecs/synthetic.hpp"

namespace mecs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

inline int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPositiveTau:
    case ErrorCode::MissingTau:
    case ErrorCode::InvalidIei:
    case ErrorCode::InvalidGeometry:
    case ErrorCode::AdaptiveTauUnsupported:
    case ErrorCode::TooFewSeries:
    case ErrorCode::ZeroWeightSum:
    case ErrorCode::WeightLengthMismatch:
    case ErrorCode::EmptyMemberSet:
    case ErrorCode::EmptySequence:
      return kExitUsage;
    default:
      return kExitData;
  }
}

/// Output location: an explicit directory, else MECS_OUTPUT_DIR, else as given.
inline std::filesystem::path resolve_output(const std::string& path, const std::string& dir = {}) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (!dir.empty()) return std::filesystem::path(dir) / p;
  if (const char* env = std::getenv("MECS_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return std::filesystem::path(env) / p;
  return p;
}

namespace detail {

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  return out;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  auto in = open_in(path);
  return parse_config(in, overrides);
}

// Writes to `path` (resolved against the output directory) or to `fallback`
// when path is empty.
template <typename Writer>
void emit(const std::string& path, const std::string& dir, std::ostream& fallback, Writer&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  auto out = open_out(resolve_output(path, dir));
  write(out);
}

// Explicit flag first, then the config's output.dir.
inline std::string output_dir(const std::string& flag, const RunConfig& cfg) {
  return flag.empty() ? cfg.output_dir : flag;
}

}  // namespace detail

/// Event file with classes named in order of first appearance and the series
/// count inferred from the largest index.
struct InferredEvents {
  EventDataset dataset;
  ClassRegistry classes;
};

inline InferredEvents read_events_inferred(std::istream& in) {
  std::stringstream copy;
  copy << in.rdbuf();
  std::vector<std::string> names;
  std::size_t max_series = 0;
  std::string line;
  bool header = true;
  while (std::getline(copy, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream fields(line);
    std::string time, series, cls;
    std::getline(fields, time, ',');
    std::getline(fields, series, ',');
    std::getline(fields, cls);
    while (!cls.empty() && (cls.back() == '\r' || cls.back() == ' ')) cls.pop_back();
    if (std::find(names.begin(), names.end(), cls) == names.end() && !cls.empty()) names.push_back(cls);
    try {
      max_series = std::max<std::size_t>(max_series, std::stoul(series));
    } catch (const std::exception&) {
      // reported with a line number by the strict reader below
    }
  }
  copy.clear();
  copy.seekg(0);
  ClassRegistry registry(names);
  EventDataset ds = io::read_events(copy, registry, max_series + 1);
  return {std::move(ds), std::move(registry)};
}

// analyze

struct AnalyzeArgs {
  std::string events;
  std::string config;
  std::vector<std::string> overrides;
  std::string output;  // empty = stdout
  std::string output_dir;
};

inline std::vector<io::ReportRow> analyze_rows(const AnalyzeArgs& args) {
  const RunConfig cfg = detail::load_config(args.config, args.overrides);
  auto in = detail::open_in(args.events);
  const EventDataset raw = io::read_events(in, cfg.classes, cfg.n_series);
  const DerivedData derived = derive(raw, cfg);
  const CoincidenceParams params = coincidence_params(cfg, derived.classes);
  AnalyzeOptions options;
  options.inter = cfg.inter;
  options.weights = weights(cfg, derived.classes);
  return io::report_rows(analyze(derived.dataset, params, options), derived.classes);
}

inline void cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  const auto rows = analyze_rows(args);
  const RunConfig cfg = detail::load_config(args.config, args.overrides);
  detail::emit(args.output, detail::output_dir(args.output_dir, cfg), out, [&](std::ostream& os) {
    io::write_report_header(os);
    io::write_report_rows(os, rows);
  });
}

// derive

inline void cmd_derive(const AnalyzeArgs& args, std::ostream& out) {
  const RunConfig cfg = detail::load_config(args.config, args.overrides);
  auto in = detail::open_in(args.events);
  const DerivedData derived = derive(io::read_events(in, cfg.classes, cfg.n_series), cfg);
  detail::emit(args.output, detail::output_dir(args.output_dir, cfg), out,
               [&](std::ostream& os) { io::write_events(os, derived.dataset, derived.classes); });
}

// stream

/// Per-buffer derivation for streaming: macro channels are unions of their
/// members, sequence channels come from the incremental detector, then the
/// selected classes are kept.
class BufferDeriver {
 public:
  BufferDeriver(const RunConfig& cfg, std::size_t buff_dim, std::size_t n_overlapped) {
    auto resolve = [&](const std::string& name) { return cfg.classes.id(name); };
    std::vector<std::string> names;
    if (cfg.macros.empty()) {
      for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
        base_.push_back({c});
        names.push_back(cfg.classes.name(c));
      }
    } else {
      for (const auto& g : cfg.macros) {
        std::vector<std::size_t> members;
        for (const auto& m : g.members) members.push_back(resolve(m));
        base_.push_back(std::move(members));
        names.push_back(g.name);
      }
    }
    std::vector<SequenceSpec> specs;
    for (const auto& g : cfg.sequences) {
      SequenceSpec spec{{}, cfg.iei, g.name};
      for (const auto& m : g.members) spec.elements.push_back(EventClassId{resolve(m)});
      specs.push_back(std::move(spec));
      names.push_back(g.name);
    }
    n_sequences_ = specs.size();
    if (!specs.empty())
      detector_.emplace(cfg.n_series, cfg.classes.size(), std::move(specs), buff_dim, n_overlapped);
    const ClassRegistry all(names);
    if (cfg.select.empty()) {
      for (std::size_t c = 0; c < all.size(); ++c) keep_.push_back(c);
      classes_ = all;
    } else {
      for (const auto& name : cfg.select) {
        auto id = all.find(name);
        if (!id) throw Error(ErrorCode::Config, "analysis.classes names unknown class '" + name + "'");
        keep_.push_back(*id);
      }
      classes_ = ClassRegistry(cfg.select);
    }
  }

  const ClassRegistry& classes() const noexcept { return classes_; }

  ChannelBuffer push(const ChannelBuffer& raw) {
    const std::size_t n_all = base_.size() + n_sequences_;
    ChannelBuffer all(raw.n_series(), n_all, raw.buff_dim());
    for (std::size_t n = 0; n < raw.n_series(); ++n)
      for (std::size_t m = 0; m < base_.size(); ++m)
        for (std::size_t c : base_[m])
          for (std::size_t t = 0; t < raw.buff_dim(); ++t)
            if (raw.at(n, c, t) != 0.0) all.mark(n, m, t);
    if (detector_) {
      const ChannelBuffer seq = detector_->push(raw);
      for (std::size_t n = 0; n < raw.n_series(); ++n)
        for (std::size_t s = 0; s < n_sequences_; ++s)
          for (std::size_t t = 0; t < raw.buff_dim(); ++t)
            if (seq.at(n, s, t) != 0.0) all.mark(n, base_.size() + s, t);
    }
    ChannelBuffer out(raw.n_series(), keep_.size(), raw.buff_dim());
    for (std::size_t n = 0; n < raw.n_series(); ++n)
      for (std::size_t k = 0; k < keep_.size(); ++k)
        for (std::size_t t = 0; t < raw.buff_dim(); ++t)
          if (all.at(n, keep_[k], t) != 0.0) out.mark(n, k, t);
    return out;
  }

 private:
  std::vector<std::vector<std::size_t>> base_;
  std::size_t n_sequences_{0};
  std::optional<StreamingSequenceDetector> detector_;
  std::vector<std::size_t> keep_;
  ClassRegistry classes_;
};

struct StreamArgs {
  std::string events;                // optional
  std::vector<std::string> signals;  // "series:class:path"
  double prominence{0.0};
  std::size_t separation{1};
  std::string config;
  std::vector<std::string> overrides;
  std::string output;
  std::string output_dir;
};

inline EventDataset load_stream_events(const StreamArgs& args, const RunConfig& cfg) {
  std::vector<RawEvent> raw;
  if (!args.events.empty()) {
    auto in = detail::open_in(args.events);
    for (const auto& e : io::read_events(in, cfg.classes, cfg.n_series).events())
      raw.push_back({e.time, e.series, e.class_id.value});
  }
  for (const auto& spec : args.signals) {
    const auto first = spec.find(':');
    const auto second = first == std::string::npos ? first : spec.find(':', first + 1);
    if (second == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "--signal expects SERIES:CLASS:PATH, got '" + spec + "'");
    std::size_t series = 0;
    try {
      series = std::stoul(spec.substr(0, first));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad series index in '" + spec + "'");
    }
    if (series >= cfg.n_series) throw Error(ErrorCode::InvalidArgument, "series out of range in '" + spec + "'");
    const std::size_t cls = cfg.classes.id(spec.substr(first + 1, second - first - 1));
    auto in = detail::open_in(spec.substr(second + 1));
    const Signal signal = io::read_signal(in);
    for (Timestamp t : detect_peaks(signal, {args.prominence, args.separation})) raw.push_back({t, series, cls});
  }
  return EventDataset::from_events(cfg.n_series, cfg.classes.size(), raw);
}

inline std::vector<io::ReportRow> stream_rows(const StreamArgs& args) {
  const RunConfig cfg = detail::load_config(args.config, args.overrides);
  if (cfg.mode == TauMode::Adaptive)
    throw Error(ErrorCode::AdaptiveTauUnsupported, "streaming requires fixed coincidence windows");
  if (cfg.buff_dim == 0) throw Error(ErrorCode::Config, "stream.buff_dim is required");
  const EventDataset raw = load_stream_events(args, cfg);
  const std::size_t length =
      cfg.length.value_or(static_cast<std::size_t>(std::max<Timestamp>(raw.max_time() + 1, 1)));

  BufferDeriver deriver(cfg, cfg.buff_dim, cfg.n_overlapped);
  StreamConfig sc;
  sc.n_series = cfg.n_series;
  sc.n_classes = deriver.classes().size();
  sc.params = coincidence_params(cfg, deriver.classes());
  sc.buff_dim = cfg.buff_dim;
  sc.n_overlapped = cfg.n_overlapped;
  sc.inter = cfg.inter;
  sc.weights = weights(cfg, deriver.classes());
  sc.max_acc_dim = cfg.max_acc_dim;
  StreamEngine engine(sc);

  std::vector<io::ReportRow> rows;
  for (const auto& buffer : split_into_buffers(raw, length, cfg.buff_dim, cfg.n_overlapped)) {
    const BufferReport r = engine.push_buffer(deriver.push(buffer));
    const auto part = io::report_rows(r.report, deriver.classes(), r.buffer);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

inline void cmd_stream(const StreamArgs& args, std::ostream& out) {
  const auto rows = stream_rows(args);
  const RunConfig cfg = detail::load_config(args.config, args.overrides);
  detail::emit(args.output, detail::output_dir(args.output_dir, cfg), out, [&](std::ostream& os) {
    io::write_report_header(os);
    io::write_report_rows(os, rows);
  });
}

// synth

struct SynthArgs {
  std::string example;  // composed | sequences | casestudy
  std::uint64_t seed{7};
  std::string out_dir{"."};
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_out(path);
  out << text;
}

template <typename Writer>
void write_file_with(const std::filesystem::path& path, Writer&& write) {
  auto out = detail::open_out(path);
  write(out);
}

/// Writes the example's data files and a matching config; returns the paths.
inline std::vector<std::filesystem::path> cmd_synth(const SynthArgs& args) {
  const std::filesystem::path dir = resolve_output(args.out_dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, auto&& writer) {
    write_file_with(dir / name, writer);
    written.push_back(dir / name);
  };

  if (args.example == "composed") {
    ComposedConfig cc;
    cc.seed = args.seed;
    const ComposedSignals s = synth_composed(cc);
    put("composite.csv", [&](std::ostream& os) { io::write_signal(os, s.composite); });
    put("main.csv", [&](std::ostream& os) { io::write_signal(os, s.main); });
    put("chirp.csv", [&](std::ostream& os) { io::write_signal(os, s.chirp); });
    put("noise.csv", [&](std::ostream& os) { io::write_signal(os, s.noise); });
    put("reference.csv", [&](std::ostream& os) { io::write_signal(os, s.reference); });
    const ClassRegistry classes({"composite", "main", "chirp", "noise", "reference"});
    put("composed_events.csv", [&](std::ostream& os) { io::write_events(os, composed_events(s, cc), classes); });
    put("composed.ini", [&](std::ostream& os) {
      os << "[dataset]\nseries = 2\nclasses = composite,main,chirp,noise,reference\n\n"
         << "[coincidence]\ntau = 5\n\n"
         << "[stream]\nbuff_dim = 25\nn_overlapped = 20\nlength = " << cc.length << "\n";
    });
  } else if (args.example == "sequences") {
    const SequenceFixture f = sequence_fixture();
    put("sequences.csv", [&](std::ostream& os) { io::write_codes(os, {f.ts1, f.ts2}); });
    const ClassRegistry classes({"E1", "E2", "E3"});
    put("sequences_events.csv",
        [&](std::ostream& os) { io::write_events(os, dataset_from_codes({f.ts1, f.ts2}, 3), classes); });
    put("sequences.ini", [&](std::ostream& os) {
      os << "[dataset]\nseries = 2\nclasses = E1,E2,E3\n\n"
         << "[coincidence]\ntau = 20\niei = inf\n\n"
         << "[sequence]\nS = E1,E2,E3\n\n"
         << "[analysis]\nclasses = S\n\n"
         << "[stream]\nbuff_dim = 5\nn_overlapped = 0\nlength = " << f.ts1.size() << "\n";
    });
  } else if (args.example == "casestudy") {
    SurrogateConfig sc;
    sc.seed = args.seed;
    const case_study::PipelineConfig pc;
    const auto fluid = synth_surrogate_session(sc, false);
    const auto impulsive = synth_surrogate_session(sc, true);
    const EventDataset raw = case_study::build_raw_dataset(fluid, impulsive, sc, pc);
    const ClassRegistry classes({"KE", "RE", "IN", "EX"});
    put("casestudy_events.csv", [&](std::ostream& os) { io::write_events(os, raw, classes); });
    put("casestudy.ini", [&](std::ostream& os) {
      os << "[dataset]\nseries = 4\nclasses = KE,RE,IN,EX\n\n"
         << "[coincidence]\ntau = 15\niei = " << pc.iei << "\n\n"
         << "[sequence]\nIN_RE = IN,RE\nEX_RE = EX,RE\n\n"
         << "[analysis]\nclasses = KE,IN_RE,EX_RE\n\n"
         << "[stream]\nbuff_dim = " << pc.buff_dim << "\nn_overlapped = " << pc.n_overlapped << "\n";
    });
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown example '" + args.example + "' (composed, sequences, casestudy)");
  }
  return written;
}

// baseline

struct BaselineArgs {
  std::string events;
  double tau{1.0};
};

struct BaselineResult {
  double quiroga{0.0};
  double mecs{0.0};
};

inline BaselineResult run_baseline(const BaselineArgs& args) {
  auto in = detail::open_in(args.events);
  const auto loaded = read_events_inferred(in);
  const EventDataset& ds = loaded.dataset;
  if (ds.n_series() != 2 || ds.n_classes() != 1)
    throw Error(ErrorCode::InvalidArgument, "baseline needs exactly 2 series and 1 class, got " +
                                                std::to_string(ds.n_series()) + " series and " +
                                                std::to_string(ds.n_classes()) + " classes");
  BaselineResult r;
  r.quiroga = quiroga_es(ds.times(0, 0), ds.times(1, 0), args.tau);
  r.mecs = pairwise_sync(ds, 0, 1, 0, 0, CoincidenceParams::fixed(args.tau));
  return r;
}

inline void cmd_baseline(const BaselineArgs& args, std::ostream& out) {
  const BaselineResult r = run_baseline(args);
  out << "measure,value\n"
      << "quiroga_Q," << io::format_double(r.quiroga) << '\n'
      << "mecs_S," << io::format_double(r.mecs) << '\n';
}

// bench

struct BenchArgs {
  std::size_t n_series{2};
  std::size_t k_classes{4};
  std::size_t merg_dim{10000};
  double density{1.0};
  std::size_t repeats{10};
  double tau{0.0};  // 0 = half the merged window
  std::uint64_t seed{1};
};

struct BenchResult {
  BenchArgs args;
  BufferGeometry geometry;
  double tau{0.0};
  double mean_s{0.0};
  double stddev_s{0.0};
  double min_s{0.0};
  std::size_t credited_pairs{0};
};

inline constexpr double kReferenceSeconds = 6.8;

/// Times one steady-state push: a full accumulator followed by a fresh
/// buffer, so the merged window spans `merg_dim` samples.
inline BenchResult run_bench(const BenchArgs& args) {
  if (args.merg_dim < 2) throw Error(ErrorCode::InvalidArgument, "merged dimension must be at least 2");
  if (args.repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be positive");
  if (args.density < 0.0 || args.density > 1.0) throw Error(ErrorCode::InvalidArgument, "density must be in [0, 1]");
  const double tau = args.tau > 0.0 ? args.tau : std::floor(static_cast<double>(args.merg_dim) / 2.0);
  const auto acc = static_cast<std::size_t>(std::ceil(tau));
  if (acc >= args.merg_dim) throw Error(ErrorCode::InvalidArgument, "tau must be smaller than the merged dimension");

  StreamConfig sc;
  sc.n_series = args.n_series;
  sc.n_classes = args.k_classes;
  sc.params = CoincidenceParams::fixed(tau);
  sc.buff_dim = args.merg_dim - acc;
  sc.n_overlapped = 0;

  std::mt19937_64 rng(args.seed);
  std::vector<ChannelBuffer> buffers(2, ChannelBuffer(args.n_series, args.k_classes, sc.buff_dim));
  for (auto& b : buffers)
    for (std::size_t n = 0; n < args.n_series; ++n)
      for (std::size_t c = 0; c < args.k_classes; ++c)
        for (std::size_t t = 0; t < sc.buff_dim; ++t)
          if (mecs::detail::unit_uniform(rng) < args.density) b.mark(n, c, t);

  BenchResult result;
  result.args = args;
  result.tau = tau;
  std::vector<double> seconds;
  for (std::size_t r = 0; r < args.repeats; ++r) {
    StreamEngine engine(sc);
    result.geometry = engine.geometry();
    engine.push_buffer(buffers[0]);
    const std::size_t before = engine.state().credited_pairs;
    const auto t0 = std::chrono::steady_clock::now();
    engine.push_buffer(buffers[1]);
    const auto t1 = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    result.credited_pairs = engine.state().credited_pairs - before;
  }
  double sum = 0.0;
  for (double s : seconds) sum += s;
  result.mean_s = sum / static_cast<double>(seconds.size());
  double var = 0.0;
  for (double s : seconds) var += (s - result.mean_s) * (s - result.mean_s);
  result.stddev_s = seconds.size() > 1 ? std::sqrt(var / static_cast<double>(seconds.size() - 1)) : 0.0;
  result.min_s = *std::min_element(seconds.begin(), seconds.end());
  return result;
}

inline void write_bench(std::ostream& out, const BenchResult& r) {
  out << "n_series,k_classes,merg_dim,buff_dim,acc_dim,tau,density,repeats,mean_s,stddev_s,min_s,"
         "credited_pairs,reference_s,ratio\n";
  out << r.args.n_series << ',' << r.args.k_classes << ',' << r.geometry.merg_dim << ',' << r.geometry.buff_dim << ','
      << r.geometry.acc_dim << ',' << io::format_double(r.tau) << ',' << io::format_double(r.args.density) << ','
      << r.args.repeats << ',' << io::format_double(r.mean_s) << ',' << io::format_double(r.stddev_s) << ','
      << io::format_double(r.min_s) << ',' << r.credited_pairs << ',' << io::format_double(kReferenceSeconds) << ','
      << io::format_double(r.mean_s / kReferenceSeconds) << '\n';
}

// peaks

struct PeaksArgs {
  std::string signal;
  double prominence{0.0};
  std::size_t separation{1};
  std::size_t series{0};
  std::string class_name{"peak"};
  std::string output;
  std::string output_dir;
};

inline void cmd_peaks(const PeaksArgs& args, std::ostream& out) {
  auto in = detail::open_in(args.signal);
  const Signal signal = io::read_signal(in);
  std::vector<RawEvent> raw;
  for (Timestamp t : detect_peaks(signal, {args.prominence, args.separation})) raw.push_back({t, args.series, 0});
  const EventDataset ds = EventDataset::from_events(args.series + 1, 1, raw);
  detail::emit(args.output, args.output_dir, out,
               [&](std::ostream& os) { io::write_events(os, ds, ClassRegistry({args.class_name})); });
}

}  // namespace mecs::cli
