#pragma once

// Continuous-signal front end: peak events, frame energy, envelopes, and the
// thresholded per-window synchronization score.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <set>
#include <span>
#include <vector>

#include "mecs/event_model.hpp"

namespace mecs {

struct Signal {
  std::vector<double> samples;
  double rate{1.0};  // samples per second

  std::size_t size() const noexcept { return samples.size(); }

  void validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
    for (double v : samples)
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "signal contains non-finite samples");
  }
};

struct PeakDetectorConfig {
  double min_prominence{0.0};
  std::size_t min_separation{1};
};

namespace detail {

// Topographic prominence of the maximum whose flat top spans [first, last].
inline double prominence(std::span<const double> x, std::size_t first, std::size_t last) {
  const double h = x[first];
  double left_min = h;
  for (std::size_t i = first; i-- > 0;) {
    if (x[i] > h) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = last + 1; i < x.size(); ++i) {
    if (x[i] > h) break;
    right_min = std::min(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace detail

/// Local maxima with at least `min_prominence`, thinned so that kept peaks are
/// at least `min_separation` samples apart (taller first, earlier on ties).
/// A flat-topped maximum is reported at its first sample; endpoints never
/// qualify.
inline std::vector<Timestamp> detect_peaks(std::span<const double> x, const PeakDetectorConfig& config = {}) {
  if (config.min_separation == 0) throw Error(ErrorCode::InvalidArgument, "peak separation must be >= 1");
  if (config.min_prominence < 0.0) throw Error(ErrorCode::InvalidArgument, "prominence must be >= 0");
  struct Candidate {
    std::size_t index;
    double height;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) continue;
    std::size_t last = i;
    while (last + 1 < x.size() && x[last + 1] == x[i]) ++last;
    if (last + 1 < x.size() && x[last + 1] < x[i] &&
        detail::prominence(x, i, last) >= config.min_prominence)
      candidates.push_back({i, x[i]});
    i = last;
  }
  if (config.min_separation == 1) {
    std::vector<Timestamp> out;
    for (const auto& c : candidates) out.push_back(static_cast<Timestamp>(c.index));
    return out;
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.height > b.height; });
  std::set<std::size_t> kept;
  for (const auto& c : candidates) {
    auto next = kept.lower_bound(c.index);
    if (next != kept.end() && *next - c.index < config.min_separation) continue;
    if (next != kept.begin() && c.index - *std::prev(next) < config.min_separation) continue;
    kept.insert(c.index);
  }
  return {kept.begin(), kept.end()};
}

inline std::vector<Timestamp> detect_peaks(const Signal& signal, const PeakDetectorConfig& config = {}) {
  if (signal.samples.empty()) throw Error(ErrorCode::InvalidArgument, "signal is empty");
  return detect_peaks(std::span<const double>(signal.samples), config);
}

/// Root-mean-square energy of consecutive non-overlapping frames. A trailing
/// partial frame is dropped.
inline Signal rms_energy(const Signal& signal, std::size_t frame_len) {
  if (frame_len == 0) throw Error(ErrorCode::InvalidArgument, "frame length must be >= 1");
  Signal out;
  out.rate = signal.rate / static_cast<double>(frame_len);
  const std::size_t frames = signal.size() / frame_len;
  out.samples.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (std::size_t i = f * frame_len; i < (f + 1) * frame_len; ++i) sum += signal.samples[i] * signal.samples[i];
    out.samples.push_back(std::sqrt(sum / static_cast<double>(frame_len)));
  }
  return out;
}

/// Trailing sliding maximum over `window` frames.
inline Signal envelope(const Signal& energy, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::InvalidArgument, "envelope window must be >= 1");
  Signal out;
  out.rate = energy.rate;
  out.samples.resize(energy.size());
  std::deque<std::size_t> candidates;  // indices with decreasing values
  for (std::size_t t = 0; t < energy.size(); ++t) {
    while (!candidates.empty() && energy.samples[candidates.back()] <= energy.samples[t]) candidates.pop_back();
    candidates.push_back(t);
    if (candidates.front() + window <= t) candidates.pop_front();
    out.samples[t] = energy.samples[candidates.front()];
  }
  return out;
}

/// Fraction of windows showing any synchronization (S > 0), normalized by
/// the number of occurrences `y` of the reference event.
inline double threshold_sync_score(std::span<const double> per_window_s, std::size_t y) {
  if (y == 0) throw Error(ErrorCode::ZeroOccurrences, "occurrence count must be positive");
  const auto positive = std::count_if(per_window_s.begin(), per_window_s.end(), [](double s) { return s > 0.0; });
  return static_cast<double>(positive) / static_cast<double>(y);
}

/// Keeps every `factor`-th sample, starting with the first.
inline Signal decimate(const Signal& signal, std::size_t factor) {
  if (factor == 0) throw Error(ErrorCode::InvalidArgument, "decimation factor must be >= 1");
  Signal out;
  out.rate = signal.rate / static_cast<double>(factor);
  for (std::size_t i = 0; i < signal.size(); i += factor) out.samples.push_back(signal.samples[i]);
  return out;
}

}  // namespace mecs
