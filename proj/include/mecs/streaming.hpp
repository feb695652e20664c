#pragma once

// Buffered online evaluation. Each incoming buffer is prepended with an
// accumulator holding the tail of the already-seen stream, event positions
// are converted to absolute sample positions, and one windowed report is
// produced per buffer.
//
// Every sample position is "owned" by exactly one buffer: the first buffer in
// which it appears outside the overlap with its predecessor. An event pair is
// credited to the buffer owning its later event; earlier events that only sit
// in the accumulator or the overlap act as coincidence partners. Summed over
// the stream, the credited pair contributions equal the batch computation as
// long as coincident pairs are no further apart than the largest window.
//
// A buffer's report normalizes its credited total by the event counts of the
// whole merged window, so windowed values stay in [0, 1]. The cumulative
// report normalizes by owned counts, where every event is counted once.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mecs/coincidence.hpp"
#include "mecs/event_model.hpp"
#include "mecs/macro.hpp"

namespace mecs {

struct BufferGeometry {
  std::size_t buff_dim{0};
  std::size_t n_overlapped{0};
  std::size_t acc_dim{0};
  std::size_t merg_dim{0};

  static constexpr std::size_t kDefaultMaxAccDim = std::size_t{1} << 24;

  /// Accumulator sized to the smallest carry-over that keeps every pair
  /// within `tau_max` visible: max(0, ceil(tau_max) - n_overlapped).
  static BufferGeometry make(std::size_t buff_dim, std::size_t n_overlapped, double tau_max,
                             std::size_t max_acc_dim = kDefaultMaxAccDim) {
    if (buff_dim == 0) throw Error(ErrorCode::InvalidGeometry, "buffer dimension must be positive");
    if (n_overlapped >= buff_dim)
      throw Error(ErrorCode::InvalidGeometry, "overlap must be smaller than the buffer dimension");
    if (!(tau_max >= 0.0) || !std::isfinite(tau_max))
      throw Error(ErrorCode::InvalidGeometry, "window length must be finite");
    const auto reach = static_cast<std::size_t>(std::ceil(tau_max));
    const std::size_t acc = reach > n_overlapped ? reach - n_overlapped : 0;
    if (acc > max_acc_dim)
      throw Error(ErrorCode::InvalidGeometry, "accumulator of " + std::to_string(acc) +
                                                  " samples exceeds the configured bound");
    return {buff_dim, n_overlapped, acc, buff_dim + acc};
  }

  // Stream advance per buffer.
  std::size_t hop() const noexcept { return buff_dim - n_overlapped; }

  Timestamp buffer_start(std::size_t n_buffers) const noexcept {
    return static_cast<Timestamp>(n_buffers * hop());
  }

  friend bool operator==(const BufferGeometry&, const BufferGeometry&) = default;
};

/// One incoming block: N series x K channels x buff_dim samples. A nonzero
/// sample marks an event of that channel's class.
class ChannelBuffer {
 public:
  ChannelBuffer() = default;
  ChannelBuffer(std::size_t n_series, std::size_t n_classes, std::size_t buff_dim)
      : n_series_(n_series), n_classes_(n_classes), buff_dim_(buff_dim),
        samples_(n_series * n_classes * buff_dim, 0.0) {}

  std::size_t n_series() const noexcept { return n_series_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t buff_dim() const noexcept { return buff_dim_; }

  double& at(std::size_t series, std::size_t cls, std::size_t sample) {
    return samples_[offset(series, cls) + sample];
  }
  double at(std::size_t series, std::size_t cls, std::size_t sample) const {
    return samples_[offset(series, cls) + sample];
  }
  std::span<const double> channel(std::size_t series, std::size_t cls) const {
    return {samples_.data() + offset(series, cls), buff_dim_};
  }
  void mark(std::size_t series, std::size_t cls, std::size_t sample, double value = 1.0) {
    at(series, cls, sample) = value;
  }

 private:
  std::size_t offset(std::size_t series, std::size_t cls) const noexcept {
    return (series * n_classes_ + cls) * buff_dim_;
  }

  std::size_t n_series_{0};
  std::size_t n_classes_{0};
  std::size_t buff_dim_{0};
  std::vector<double> samples_;
};

/// Number of buffers needed to cover samples [0, length).
inline std::size_t buffer_count(std::size_t length, std::size_t buff_dim, std::size_t n_overlapped) {
  if (buff_dim == 0 || n_overlapped >= buff_dim)
    throw Error(ErrorCode::InvalidGeometry, "invalid buffer geometry");
  if (length <= buff_dim) return 1;
  const std::size_t hop = buff_dim - n_overlapped;
  return 1 + (length - buff_dim + hop - 1) / hop;
}

/// Cuts an event dataset into consecutive (possibly overlapping) buffers
/// covering [0, length). Events at or beyond `length` are dropped.
inline std::vector<ChannelBuffer> split_into_buffers(const EventDataset& ds, std::size_t length,
                                                     std::size_t buff_dim, std::size_t n_overlapped) {
  const std::size_t count = buffer_count(length, buff_dim, n_overlapped);
  const std::size_t hop = buff_dim - n_overlapped;
  std::vector<ChannelBuffer> out(count, ChannelBuffer(ds.n_series(), ds.n_classes(), buff_dim));
  for (std::size_t n = 0; n < ds.n_series(); ++n)
    for (std::size_t c = 0; c < ds.n_classes(); ++c)
      for (Timestamp t : ds.times(n, c)) {
        const auto pos = static_cast<std::size_t>(t);
        if (pos >= length) continue;
        // Every buffer whose span covers pos.
        const std::size_t last = pos / hop;
        for (std::size_t b = last + 1; b-- > 0;) {
          const std::size_t start = b * hop;
          if (pos >= start + buff_dim) break;
          if (b < count) out[b].mark(n, c, pos - start);
        }
      }
  return out;
}

/// Absolute event positions per (class, series) for the current merged window.
class EventClassMatrix {
 public:
  EventClassMatrix() = default;
  EventClassMatrix(std::size_t n_series, std::size_t n_classes)
      : n_classes_(n_classes), positions_(n_series * n_classes) {}

  std::span<const Timestamp> positions(std::size_t cls, std::size_t series) const {
    return positions_[series * n_classes_ + cls];
  }

  void insert(std::size_t cls, std::size_t series, Timestamp pos) {
    auto& list = positions_[series * n_classes_ + cls];
    if (!list.empty() && pos <= list.back())
      throw Error(ErrorCode::InvalidArgument, "event positions must be strictly increasing");
    list.push_back(pos);
  }

  /// Forgets positions older than `window_start`.
  void drop_before(Timestamp window_start) {
    for (auto& list : positions_) {
      auto keep = std::lower_bound(list.begin(), list.end(), window_start);
      list.erase(list.begin(), keep);
    }
  }

 private:
  std::size_t n_classes_{0};
  std::vector<std::vector<Timestamp>> positions_;
};

struct StreamConfig {
  std::size_t n_series{0};
  std::size_t n_classes{0};
  CoincidenceParams params;
  std::size_t buff_dim{0};
  std::size_t n_overlapped{0};
  // Evaluate every ordered class pair instead of the diagonal only.
  bool inter{false};
  // Explicit (class_a, class_b) list; overrides `inter` when non-empty.
  std::vector<std::pair<std::size_t, std::size_t>> class_pairs;
  std::optional<WeightVector> weights;
  std::size_t max_acc_dim{BufferGeometry::kDefaultMaxAccDim};
};

/// One credited event pair, for auditing the stream against a batch run.
struct Contribution {
  std::size_t series_i{0};
  std::size_t series_j{0};
  std::size_t class_a{0};
  std::size_t class_b{0};
  Timestamp time_x{0};
  Timestamp time_y{0};
  double amount{0.0};

  friend auto operator<=>(const Contribution&, const Contribution&) = default;
};

struct BufferReport {
  std::size_t buffer{0};
  Timestamp window_start{0};  // first sample of the merged window (may be negative early on)
  Timestamp owned_from{0};    // first sample owned by this buffer
  Timestamp end{0};           // one past the last sample
  SyncReport report;
};

struct StreamState {
  std::size_t n_buffers{0};
  BufferGeometry geometry;
  EventClassMatrix ecm;
  // Summed credited coincidence, [class-pair index][series-pair index].
  std::vector<std::vector<double>> sync_acc;
  // Owned events seen so far, [series][class].
  std::vector<std::vector<std::size_t>> owned_totals;
  // Event pairs credited within their window so far.
  std::size_t credited_pairs{0};
};

class StreamEngine {
 public:
  explicit StreamEngine(StreamConfig config) : config_(std::move(config)) {
    if (config_.params.is_adaptive())
      throw Error(ErrorCode::AdaptiveTauUnsupported, "streaming requires fixed coincidence windows");
    if (config_.n_series < 2) throw Error(ErrorCode::TooFewSeries, "synchronization needs at least two series");
    if (config_.class_pairs.empty()) {
      for (std::size_t a = 0; a < config_.n_classes; ++a)
        for (std::size_t b = 0; b < config_.n_classes; ++b)
          if (config_.inter || a == b) config_.class_pairs.emplace_back(a, b);
    }
    for (const auto& [a, b] : config_.class_pairs) {
      if (a >= config_.n_classes || b >= config_.n_classes)
        throw Error(ErrorCode::IndexOutOfRange, "class pair out of range");
      taus_.push_back(config_.params.tau(a, b));
    }
    const double tau_max = taus_.empty() ? 0.0 : *std::max_element(taus_.begin(), taus_.end());
    state_.geometry = BufferGeometry::make(config_.buff_dim, config_.n_overlapped, tau_max, config_.max_acc_dim);
    state_.ecm = EventClassMatrix(config_.n_series, config_.n_classes);
    pairs_ = series_pairs(config_.n_series);
    state_.sync_acc.assign(config_.class_pairs.size(), std::vector<double>(pairs_.size(), 0.0));
    state_.owned_totals.assign(config_.n_series, std::vector<std::size_t>(config_.n_classes, 0));
    owned_.assign(config_.n_series, std::vector<std::size_t>(config_.n_classes, 0));
  }

  const StreamState& state() const noexcept { return state_; }
  const BufferGeometry& geometry() const noexcept { return state_.geometry; }
  const StreamConfig& config() const noexcept { return config_; }

  /// Every credited pair within its window is appended to `sink` (may be null).
  void set_contribution_sink(std::vector<Contribution>* sink) noexcept { sink_ = sink; }

  BufferReport push_buffer(const ChannelBuffer& buffer) {
    const auto& geo = state_.geometry;
    if (buffer.n_series() != config_.n_series || buffer.n_classes() != config_.n_classes ||
        buffer.buff_dim() != geo.buff_dim)
      throw Error(ErrorCode::GeometryMismatch, "buffer shape differs from the configured geometry");

    const Timestamp start = geo.buffer_start(state_.n_buffers);
    const std::size_t first_owned = state_.n_buffers == 0 ? 0 : geo.n_overlapped;
    const Timestamp owned_from = start + static_cast<Timestamp>(first_owned);
    const Timestamp window_start = start - static_cast<Timestamp>(geo.acc_dim);

    // Init: carried positions are already in the matrix; add the owned samples.
    for (std::size_t n = 0; n < config_.n_series; ++n)
      for (std::size_t c = 0; c < config_.n_classes; ++c) {
        owned_[n][c] = 0;
        const auto samples = buffer.channel(n, c);
        for (std::size_t rel = first_owned; rel < samples.size(); ++rel)
          if (samples[rel] != 0.0) {
            state_.ecm.insert(c, n, start + static_cast<Timestamp>(rel));
            ++owned_[n][c];
          }
        state_.owned_totals[n][c] += owned_[n][c];
      }

    // Compute and finalize.
    BufferReport out;
    out.buffer = state_.n_buffers;
    out.window_start = window_start;
    out.owned_from = owned_from;
    out.end = start + static_cast<Timestamp>(geo.buff_dim);
    SyncReport& report = out.report;
    const std::size_t k = config_.n_classes;
    report.q_per_class.assign(k, 0.0);
    report.q_inter.assign(k, std::vector<double>(k, 0.0));
    const double n_pairs = static_cast<double>(pairs_.size());

    for (std::size_t cp = 0; cp < config_.class_pairs.size(); ++cp) {
      const auto [ka, kb] = config_.class_pairs[cp];
      double q_sum = 0.0;
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const auto [i, j] = pairs_[p];
        const double total = credited_total(i, j, ka, kb, taus_[cp], owned_from);
        state_.sync_acc[cp][p] += total;
        const std::size_t mi = state_.ecm.positions(ka, i).size();
        const std::size_t mj = state_.ecm.positions(kb, j).size();
        const double s = pairwise_from_total(total, mi, mj);
        q_sum += s;
        report.s_pairwise.push_back({i, j, ka, kb, s});
        if (s > 0.0 && std::max(mi, mj) > 1) report.averaging_dilution = true;
      }
      report.q_inter[ka][kb] = q_sum / n_pairs;
      if (ka == kb) report.q_per_class[ka] = report.q_inter[ka][kb];
    }
    report.si_global = global_sync(report.q_per_class);
    if (config_.weights) report.si_weighted = global_sync(report.q_per_class, *config_.weights);

    // Keep only what the next merged window can still see.
    ++state_.n_buffers;
    state_.ecm.drop_before(geo.buffer_start(state_.n_buffers) - static_cast<Timestamp>(geo.acc_dim));
    return out;
  }

  /// Report over everything pushed so far, using the running accumulators.
  /// Matches the batch analysis of the whole stream when every coincident
  /// pair fits in the accumulator.
  SyncReport cumulative_report() const {
    const std::size_t k = config_.n_classes;
    SyncReport report;
    report.q_per_class.assign(k, 0.0);
    report.q_inter.assign(k, std::vector<double>(k, 0.0));
    const double n_pairs = static_cast<double>(pairs_.size());
    for (std::size_t cp = 0; cp < config_.class_pairs.size(); ++cp) {
      const auto [ka, kb] = config_.class_pairs[cp];
      double q_sum = 0.0;
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const auto [i, j] = pairs_[p];
        const auto mi = state_.owned_totals[i][ka];
        const auto mj = state_.owned_totals[j][kb];
        const double s = pairwise_from_total(state_.sync_acc[cp][p], mi, mj);
        q_sum += s;
        report.s_pairwise.push_back({i, j, ka, kb, s});
        if (s > 0.0 && std::max(mi, mj) > 1) report.averaging_dilution = true;
      }
      report.q_inter[ka][kb] = q_sum / n_pairs;
      if (ka == kb) report.q_per_class[ka] = report.q_inter[ka][kb];
    }
    report.si_global = global_sync(report.q_per_class);
    if (config_.weights) report.si_weighted = global_sync(report.q_per_class, *config_.weights);
    return report;
  }

 private:
  // (C(i|j) + C(j|i)) / (m_i + m_j) where both overall coincidences share the
  // same pair total; an empty side contributes 0.
  static double pairwise_from_total(double total, std::size_t mi, std::size_t mj) {
    if (mi + mj == 0) return 0.0;
    const double forward = mj == 0 ? 0.0 : total / static_cast<double>(mj);
    const double backward = mi == 0 ? 0.0 : total / static_cast<double>(mi);
    return (forward + backward) / static_cast<double>(mi + mj);
  }

  // Sum of c(x, y) over pairs whose later event is owned by this buffer.
  double credited_total(std::size_t i, std::size_t j, std::size_t ka, std::size_t kb, double tau,
                        Timestamp owned_from) {
    const auto xs = state_.ecm.positions(ka, i);
    const auto ys = state_.ecm.positions(kb, j);
    if (xs.empty() || ys.empty()) return 0.0;
    const auto reach = static_cast<Timestamp>(std::floor(tau));
    double total = 0.0;
    for (Timestamp tx : xs) {
      const Timestamp lo = tx < owned_from ? std::max(tx - reach, owned_from) : tx - reach;
      auto it = std::lower_bound(ys.begin(), ys.end(), lo);
      double row = 0.0;
      const auto first = it;
      for (; it != ys.end() && *it <= tx + reach; ++it) {
        const double c = coincidence_amount(static_cast<double>(temporal_distance(tx, *it)), tau);
        row += c;
        if (sink_) sink_->push_back({i, j, ka, kb, tx, *it, c});
      }
      state_.credited_pairs += static_cast<std::size_t>(it - first);
      total += row;
    }
    return total;
  }

  StreamConfig config_;
  StreamState state_;
  std::vector<SeriesPair> pairs_;
  std::vector<double> taus_;
  std::vector<std::vector<std::size_t>> owned_;
  std::vector<Contribution>* sink_{nullptr};
};

/// One report per buffer, in arrival order.
template <typename BufferRange>
std::vector<BufferReport> run_stream(const StreamConfig& config, const BufferRange& buffers) {
  StreamEngine engine(config);
  std::vector<BufferReport> out;
  for (const ChannelBuffer& b : buffers) out.push_back(engine.push_buffer(b));
  return out;
}

/// Turns a stream of raw channel buffers into buffers of detected macro
/// events (one channel per sequence spec). In-progress matches carry over
/// between buffers; a macro event is emitted at its completing sample.
class StreamingSequenceDetector {
 public:
  StreamingSequenceDetector(std::size_t n_series, std::size_t n_classes, std::vector<SequenceSpec> specs,
                            std::size_t buff_dim, std::size_t n_overlapped)
      : n_series_(n_series), n_classes_(n_classes), specs_(std::move(specs)),
        geometry_(BufferGeometry::make(buff_dim, n_overlapped, 0.0)),
        emitted_(n_series * specs_.size()) {
    for (const auto& spec : specs_)
      for (auto c : spec.elements)
        if (c.value >= n_classes) throw Error(ErrorCode::IndexOutOfRange, "sequence element out of range");
    for (std::size_t n = 0; n < n_series; ++n)
      for (const auto& spec : specs_) matchers_.emplace_back(spec);
  }

  ChannelBuffer push(const ChannelBuffer& buffer) {
    if (buffer.n_series() != n_series_ || buffer.n_classes() != n_classes_ ||
        buffer.buff_dim() != geometry_.buff_dim)
      throw Error(ErrorCode::GeometryMismatch, "buffer shape differs from the configured geometry");
    const Timestamp start = geometry_.buffer_start(n_buffers_);
    const std::size_t first_owned = n_buffers_ == 0 ? 0 : geometry_.n_overlapped;
    ChannelBuffer out(n_series_, specs_.size(), geometry_.buff_dim);
    std::vector<std::size_t> group;

    for (std::size_t n = 0; n < n_series_; ++n)
      for (std::size_t s = 0; s < specs_.size(); ++s) {
        auto& emitted = emitted_[n * specs_.size() + s];
        // Replay earlier detections that fall in the overlap.
        emitted.erase(emitted.begin(), std::lower_bound(emitted.begin(), emitted.end(), start));
        for (Timestamp t : emitted) out.mark(n, s, static_cast<std::size_t>(t - start));

        auto& matcher = matchers_[n * specs_.size() + s];
        for (std::size_t rel = first_owned; rel < geometry_.buff_dim; ++rel) {
          group.clear();
          for (std::size_t c = 0; c < n_classes_; ++c)
            if (buffer.at(n, c, rel) != 0.0 && specs_[s].contains(c)) group.push_back(c);
          const Timestamp t = start + static_cast<Timestamp>(rel);
          if (matcher.feed(t, group)) {
            out.mark(n, s, rel);
            emitted.push_back(t);
          }
        }
        matcher.expire(start + static_cast<Timestamp>(geometry_.buff_dim));
      }
    ++n_buffers_;
    return out;
  }

 private:
  std::size_t n_series_;
  std::size_t n_classes_;
  std::vector<SequenceSpec> specs_;
  BufferGeometry geometry_;
  std::size_t n_buffers_{0};
  std::vector<SequenceMatcher> matchers_;
  std::vector<std::vector<Timestamp>> emitted_;
};

}  // namespace mecs
