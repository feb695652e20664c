#pragma once

// Deterministic synthetic workloads: the composed-sine signal set, the
// two-series sequence fixture, and a respiration / movement surrogate for the
// fluid-vs-impulsive comparison.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <numbers>
#include <random>
#include <vector>

#include "mecs/event_model.hpp"
#include "mecs/signal.hpp"

namespace mecs {

namespace detail {

// Portable uniform draw in [0, 1): std::mt19937_64 output is fully specified,
// the standard distributions are not.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(rng() % span);
}

}  // namespace detail

struct ComposedConfig {
  std::size_t length{2000};
  double rate{100.0};
  double main_amplitude{1.0};
  double main_period{40.0};  // samples
  double chirp_amplitude{0.15};
  double chirp_start_period{12.0};
  double chirp_end_period{60.0};
  double noise_amplitude{0.05};
  std::uint64_t seed{7};
};

struct ComposedSignals {
  Signal composite;
  Signal main;       // constant-frequency sine
  Signal chirp;      // sine with decreasing frequency
  Signal noise;      // uniform white noise
  Signal reference;  // same frequency and amplitude as `main`
};

/// Composite = main + chirp + noise, sample by sample.
inline ComposedSignals synth_composed(const ComposedConfig& config = {}) {
  ComposedSignals out;
  for (Signal* s : {&out.composite, &out.main, &out.chirp, &out.noise, &out.reference}) {
    s->rate = config.rate;
    s->samples.resize(config.length);
  }
  std::mt19937_64 rng(config.seed);
  const double two_pi = 2.0 * std::numbers::pi;
  const double f0 = 1.0 / config.chirp_start_period;
  const double f1 = 1.0 / config.chirp_end_period;
  const double len = static_cast<double>(config.length);
  for (std::size_t i = 0; i < config.length; ++i) {
    const double t = static_cast<double>(i);
    const double main = config.main_amplitude * std::sin(two_pi * t / config.main_period);
    const double chirp_phase = two_pi * (f0 * t + 0.5 * (f1 - f0) * t * t / len);
    const double chirp = config.chirp_amplitude * std::sin(chirp_phase);
    const double noise = config.noise_amplitude * (2.0 * detail::unit_uniform(rng) - 1.0);
    out.main.samples[i] = main;
    out.reference.samples[i] = main;
    out.chirp.samples[i] = chirp;
    out.noise.samples[i] = noise;
    out.composite.samples[i] = main + chirp + noise;
  }
  return out;
}

/// Peak events of the composed set: series 0 holds the composite and its
/// three components as classes 0..3, series 1 holds the reference as class 4.
inline EventDataset composed_events(const ComposedSignals& signals, const ComposedConfig& config = {}) {
  const auto half_period = static_cast<std::size_t>(std::max(1.0, std::floor(config.main_period / 2.0)));
  const PeakDetectorConfig tonal{0.5 * config.main_amplitude, half_period};
  const PeakDetectorConfig chirp{0.5 * config.chirp_amplitude, 1};
  const PeakDetectorConfig noise{0.0, 1};
  const std::vector<std::vector<std::vector<Timestamp>>> trains{
      {detect_peaks(signals.composite, tonal), detect_peaks(signals.main, tonal), detect_peaks(signals.chirp, chirp),
       detect_peaks(signals.noise, noise), {}},
      {{}, {}, {}, {}, detect_peaks(signals.reference, tonal)}};
  return EventDataset::from_trains(trains);
}

/// Two series of per-sample class codes (0 = no event, 1..3 = E1..E3), each
/// holding three E1 -> E2 -> E3 occurrences among non-matching distractors.
struct SequenceFixture {
  std::vector<int> ts1;
  std::vector<int> ts2;
};

inline SequenceFixture sequence_fixture() {
  SequenceFixture f;
  f.ts1.assign(40, 0);
  f.ts2.assign(40, 0);
  auto put = [](std::vector<int>& ts, std::initializer_list<std::pair<std::size_t, int>> events) {
    for (auto [at, code] : events) ts[at] = code;
  };
  // Matches complete at 12, 27 and 30.
  put(f.ts1, {{1, 2}, {2, 3}, {6, 1}, {10, 2}, {12, 3}, {15, 1}, {17, 3}, {20, 2},
              {25, 1}, {26, 2}, {27, 3}, {28, 1}, {29, 2}, {30, 3}, {36, 3}});
  // Matches complete at 3, 29 and 33.
  put(f.ts2, {{0, 1}, {2, 2}, {3, 3}, {8, 3}, {12, 1}, {14, 1}, {17, 3}, {20, 2},
              {22, 2}, {26, 1}, {28, 2}, {29, 3}, {31, 1}, {32, 2}, {33, 3}, {38, 2}});
  return f;
}

/// Converts per-sample class codes (one vector per series) into a dataset
/// with `n_classes` classes; code c > 0 marks class c - 1.
inline EventDataset dataset_from_codes(const std::vector<std::vector<int>>& series, std::size_t n_classes) {
  std::vector<RawEvent> raw;
  for (std::size_t n = 0; n < series.size(); ++n)
    for (std::size_t t = 0; t < series[n].size(); ++t) {
      const int code = series[n][t];
      if (code < 0 || static_cast<std::size_t>(code) > n_classes)
        throw Error(ErrorCode::IndexOutOfRange, "class code " + std::to_string(code) + " out of range");
      if (code > 0) raw.push_back({static_cast<Timestamp>(t), n, static_cast<std::size_t>(code - 1)});
    }
  return EventDataset::from_events(series.size(), n_classes, raw);
}

// Respiration / movement surrogate.

struct SurrogateConfig {
  double seconds{45.0};
  double audio_rate{48000.0};
  std::size_t frame_len{1920};      // audio samples per energy frame (25 fps at 48 kHz)
  double kinetic_rate{50.0};        // decimated by 2 to the frame rate
  std::size_t min_phase_frames{60};
  std::size_t max_phase_frames{80};
  double impulse_fraction{0.75};    // impulsive session: phases carrying a kinetic impulse
  std::int64_t max_impulse_offset{6};  // frames between impulse and respiration peak
  std::uint64_t seed{11};
};

struct SurrogateSession {
  Signal audio;
  Signal kinetic;  // at config.kinetic_rate
  std::vector<Timestamp> inhale_starts;  // frame indices
  std::vector<Timestamp> exhale_starts;
};

/// One recording. In an impulsive session a sharp kinetic peak lands within
/// `max_impulse_offset` frames of the respiration-energy peak that follows a
/// phase onset; in a fluid session smooth kinetic bumps sit mid-phase.
inline SurrogateSession synth_surrogate_session(const SurrogateConfig& config, bool impulsive) {
  std::mt19937_64 rng(config.seed + (impulsive ? 1000 : 0));
  const auto frames = static_cast<std::size_t>(config.seconds * config.audio_rate / static_cast<double>(config.frame_len));
  const double frame_rate = config.audio_rate / static_cast<double>(config.frame_len);
  const double kin_per_frame = config.kinetic_rate / frame_rate;

  SurrogateSession s;
  std::vector<double> amplitude(frames, 0.05);
  s.kinetic.rate = config.kinetic_rate;
  s.kinetic.samples.assign(static_cast<std::size_t>(static_cast<double>(frames) * kin_per_frame), 0.0);
  for (std::size_t i = 0; i < s.kinetic.size(); ++i)
    s.kinetic.samples[i] = 0.05 * (1.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 200.0)) +
                           0.01 * detail::unit_uniform(rng);

  auto bump = [](std::vector<double>& y, double center, double width, double height) {
    const auto lo = static_cast<std::int64_t>(std::floor(center - 4.0 * width));
    const auto hi = static_cast<std::int64_t>(std::ceil(center + 4.0 * width));
    for (std::int64_t i = std::max<std::int64_t>(lo, 0); i <= hi && i < static_cast<std::int64_t>(y.size()); ++i) {
      const double z = (static_cast<double>(i) - center) / width;
      y[static_cast<std::size_t>(i)] += height * std::exp(-z * z);
    }
  };

  bool inhale = true;
  for (std::size_t start = 10; start + config.max_phase_frames < frames;) {
    const auto len = static_cast<std::size_t>(detail::uniform_int(
        rng, static_cast<std::int64_t>(config.min_phase_frames), static_cast<std::int64_t>(config.max_phase_frames)));
    (inhale ? s.inhale_starts : s.exhale_starts).push_back(static_cast<Timestamp>(start));
    const double peak = static_cast<double>(start) + static_cast<double>(detail::uniform_int(rng, 3, 6));
    bump(amplitude, peak, 3.0, 0.8);
    if (impulsive) {
      if (detail::unit_uniform(rng) < config.impulse_fraction) {
        const auto offset = detail::uniform_int(rng, -config.max_impulse_offset, config.max_impulse_offset);
        bump(s.kinetic.samples, (peak + static_cast<double>(offset)) * kin_per_frame, 1.5, 1.0);
      }
    } else {
      bump(s.kinetic.samples, (static_cast<double>(start) + 0.5 * static_cast<double>(len)) * kin_per_frame, 8.0, 0.6);
    }
    start += len;
    inhale = !inhale;
  }

  s.audio.rate = config.audio_rate;
  s.audio.samples.resize(frames * config.frame_len);
  for (std::size_t i = 0; i < s.audio.size(); ++i) {
    const double a = amplitude[i / config.frame_len];
    s.audio.samples[i] = a * (2.0 * detail::unit_uniform(rng) - 1.0);
  }
  return s;
}

}  // namespace mecs
