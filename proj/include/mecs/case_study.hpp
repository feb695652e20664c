#pragma once

// Respiration / movement condition scores on the surrogate recordings.
//
// Four series: fluid kinetic (0), fluid respiration (1), impulsive kinetic
// (2), impulsive respiration (3). Respiration series carry energy peaks and
// inhale / exhale onsets; the onsets are folded into (onset, energy peak)
// sequences before synchronization is measured against kinetic peaks.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mecs/coincidence.hpp"
#include "mecs/macro.hpp"
#include "mecs/signal.hpp"
#include "mecs/streaming.hpp"
#include "mecs/synthetic.hpp"

namespace mecs::case_study {

// Original classes.
inline constexpr std::size_t kKinetic = 0;
inline constexpr std::size_t kEnergy = 1;
inline constexpr std::size_t kInhale = 2;
inline constexpr std::size_t kExhale = 3;

// Classes after sequence folding.
inline constexpr std::size_t kSeqInhale = 1;
inline constexpr std::size_t kSeqExhale = 2;

struct PipelineConfig {
  std::size_t envelope_frames{8};
  PeakDetectorConfig energy_peaks{0.2, 10};
  PeakDetectorConfig kinetic_peaks{0.3, 10};
  std::int64_t iei{25};
  std::size_t buff_dim{50};
  std::size_t n_overlapped{0};
};

struct Condition {
  std::string name;
  std::size_t series_i;
  std::size_t series_j;
  std::size_t class_b;      // sequence class paired with kinetic peaks
  std::size_t occurrences;  // onsets of the respiration phase involved
  std::vector<double> per_buffer_s;
  double score{0.0};
};

struct Result {
  EventDataset raw;      // kinetic, energy, inhale, exhale
  EventDataset derived;  // kinetic, (inhale, energy), (exhale, energy)
  std::array<Condition, 4> conditions;
};

inline std::vector<Timestamp> energy_peak_frames(const SurrogateSession& s, const SurrogateConfig& sc,
                                                 const PipelineConfig& pc) {
  const Signal energy = envelope(rms_energy(s.audio, sc.frame_len), pc.envelope_frames);
  return detect_peaks(energy, pc.energy_peaks);
}

inline std::vector<Timestamp> kinetic_peak_frames(const SurrogateSession& s, const SurrogateConfig& sc,
                                                  const PipelineConfig& pc) {
  const double frame_rate = sc.audio_rate / static_cast<double>(sc.frame_len);
  const auto factor = static_cast<std::size_t>(std::lround(s.kinetic.rate / frame_rate));
  return detect_peaks(decimate(s.kinetic, factor), pc.kinetic_peaks);
}

inline EventDataset build_raw_dataset(const SurrogateSession& fluid, const SurrogateSession& impulsive,
                                      const SurrogateConfig& sc, const PipelineConfig& pc) {
  auto respiration = [&](const SurrogateSession& s) {
    return std::vector<std::vector<Timestamp>>{{}, energy_peak_frames(s, sc, pc), s.inhale_starts, s.exhale_starts};
  };
  auto kinetic = [&](const SurrogateSession& s) {
    return std::vector<std::vector<Timestamp>>{kinetic_peak_frames(s, sc, pc), {}, {}, {}};
  };
  return EventDataset::from_trains({kinetic(fluid), respiration(fluid), kinetic(impulsive), respiration(impulsive)});
}

inline EventDataset fold_sequences(const EventDataset& raw, std::int64_t iei) {
  const std::vector<SequenceSpec> specs{
      {{EventClassId{kInhale}, EventClassId{kEnergy}}, iei, "IN_RE"},
      {{EventClassId{kExhale}, EventClassId{kEnergy}}, iei, "EX_RE"},
  };
  const std::size_t keep[] = {kKinetic};
  const std::vector<EventDataset> parts{select_classes(raw, keep), detect_sequences(raw, specs)};
  return concat_classes(parts);
}

/// Per-buffer S for the four conditions and their thresholded scores.
inline Result evaluate(const SurrogateConfig& sc, double tau, const PipelineConfig& pc = {}) {
  const SurrogateSession fluid = synth_surrogate_session(sc, false);
  const SurrogateSession impulsive = synth_surrogate_session(sc, true);

  Result result;
  result.raw = build_raw_dataset(fluid, impulsive, sc, pc);
  result.derived = fold_sequences(result.raw, pc.iei);

  StreamConfig stream;
  stream.n_series = 4;
  stream.n_classes = 3;
  stream.params = CoincidenceParams::fixed(tau);
  stream.buff_dim = pc.buff_dim;
  stream.n_overlapped = pc.n_overlapped;
  stream.class_pairs = {{kKinetic, kSeqInhale}, {kKinetic, kSeqExhale}};

  result.conditions = {
      Condition{"C1", 0, 1, kSeqInhale, fluid.inhale_starts.size(), {}, 0.0},
      Condition{"C2", 0, 1, kSeqExhale, fluid.exhale_starts.size(), {}, 0.0},
      Condition{"C3", 2, 3, kSeqInhale, impulsive.inhale_starts.size(), {}, 0.0},
      Condition{"C4", 2, 3, kSeqExhale, impulsive.exhale_starts.size(), {}, 0.0},
  };

  const auto length = static_cast<std::size_t>(std::max<Timestamp>(result.derived.max_time() + 1, 1));
  const auto buffers = split_into_buffers(result.derived, length, pc.buff_dim, pc.n_overlapped);
  for (const auto& report : run_stream(stream, buffers))
    for (const auto& s : report.report.s_pairwise)
      for (auto& cond : result.conditions)
        if (s.series_i == cond.series_i && s.series_j == cond.series_j && s.class_a == kKinetic &&
            s.class_b == cond.class_b)
          cond.per_buffer_s.push_back(s.value);

  for (auto& cond : result.conditions) cond.score = threshold_sync_score(cond.per_buffer_s, cond.occurrences);
  return result;
}

}  // namespace mecs::case_study
