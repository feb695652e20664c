#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mecs {

// Sample-index timestamp. Real-time conversion is left to the caller.
using Timestamp = std::int64_t;

enum class ErrorCode {
  DuplicateEvent,
  IndexOutOfRange,
  NegativeTime,
  NonPositiveTau,
  MissingTau,
  InvalidIei,
  TooFewSeries,
  ZeroWeightSum,
  WeightLengthMismatch,
  NoEvents,
  EmptyMemberSet,
  EmptySequence,
  GeometryMismatch,
  InvalidGeometry,
  AdaptiveTauUnsupported,
  ZeroOccurrences,
  InvalidArgument,
  Parse,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct EventClassId {
  std::size_t value{0};

  constexpr EventClassId() = default;
  constexpr explicit EventClassId(std::size_t v) : value(v) {}
  friend constexpr auto operator<=>(EventClassId, EventClassId) = default;
};

struct EventRecord {
  Timestamp time{0};
  std::size_t series{0};
  EventClassId class_id{};
  // 1-based rank among events of the same (series, class).
  std::size_t ordinal{0};

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Unvalidated input triple, as read from a file or produced by a detector.
struct RawEvent {
  Timestamp time{0};
  std::size_t series{0};
  std::size_t class_id{0};
};

/// N series x K classes of event occurrence times.
///
/// Immutable after construction; every (series, class) train is strictly
/// increasing. Different classes of one series may share a timestamp.
class EventDataset {
 public:
  EventDataset() = default;

  EventDataset(std::size_t n_series, std::size_t n_classes)
      : n_series_(n_series), n_classes_(n_classes), trains_(n_series * n_classes) {}

  /// Validates and sorts `raw`. Throws DuplicateEvent, IndexOutOfRange or NegativeTime.
  static EventDataset from_events(std::size_t n_series, std::size_t n_classes,
                                  std::span<const RawEvent> raw) {
    EventDataset ds(n_series, n_classes);
    for (const auto& e : raw) {
      if (e.series >= n_series)
        throw Error(ErrorCode::IndexOutOfRange,
                    "series index " + std::to_string(e.series) + " >= " + std::to_string(n_series));
      if (e.class_id >= n_classes)
        throw Error(ErrorCode::IndexOutOfRange,
                    "class index " + std::to_string(e.class_id) + " >= " + std::to_string(n_classes));
      if (e.time < 0)
        throw Error(ErrorCode::NegativeTime, "negative event time " + std::to_string(e.time));
      ds.trains_[ds.slot(e.series, e.class_id)].push_back(e.time);
    }
    for (std::size_t s = 0; s < ds.trains_.size(); ++s) {
      auto& train = ds.trains_[s];
      std::sort(train.begin(), train.end());
      auto dup = std::adjacent_find(train.begin(), train.end());
      if (dup != train.end())
        throw Error(ErrorCode::DuplicateEvent,
                    "duplicate event at time " + std::to_string(*dup) + " in series " +
                        std::to_string(s / n_classes) + ", class " + std::to_string(s % n_classes));
    }
    return ds;
  }

  /// Builds directly from per-(series, class) trains, indexed [series][class].
  static EventDataset from_trains(const std::vector<std::vector<std::vector<Timestamp>>>& trains) {
    const std::size_t n = trains.size();
    const std::size_t k = n == 0 ? 0 : trains.front().size();
    std::vector<RawEvent> raw;
    for (std::size_t i = 0; i < n; ++i) {
      if (trains[i].size() != k)
        throw Error(ErrorCode::InvalidArgument, "ragged class dimension in trains");
      for (std::size_t c = 0; c < k; ++c)
        for (Timestamp t : trains[i][c]) raw.push_back({t, i, c});
    }
    return from_events(n, k, raw);
  }

  std::size_t n_series() const noexcept { return n_series_; }
  std::size_t n_classes() const noexcept { return n_classes_; }

  std::span<const Timestamp> times(std::size_t series, std::size_t class_id) const {
    check(series, class_id);
    return trains_[slot(series, class_id)];
  }

  std::size_t count(std::size_t series, std::size_t class_id) const {
    return times(series, class_id).size();
  }

  std::size_t total_events() const noexcept {
    std::size_t total = 0;
    for (const auto& t : trains_) total += t.size();
    return total;
  }

  bool empty() const noexcept { return total_events() == 0; }

  /// All events ordered by (series, class, time), with ordinals filled in.
  std::vector<EventRecord> events() const {
    std::vector<EventRecord> out;
    out.reserve(total_events());
    for (std::size_t i = 0; i < n_series_; ++i)
      for (std::size_t c = 0; c < n_classes_; ++c) {
        std::size_t h = 0;
        for (Timestamp t : trains_[slot(i, c)]) out.push_back({t, i, EventClassId{c}, ++h});
      }
    return out;
  }

  /// Largest timestamp in the dataset, or -1 when empty.
  Timestamp max_time() const noexcept {
    Timestamp m = -1;
    for (const auto& t : trains_)
      if (!t.empty()) m = std::max(m, t.back());
    return m;
  }

  friend bool operator==(const EventDataset&, const EventDataset&) = default;

 private:
  std::size_t slot(std::size_t series, std::size_t class_id) const noexcept {
    return series * n_classes_ + class_id;
  }
  void check(std::size_t series, std::size_t class_id) const {
    if (series >= n_series_ || class_id >= n_classes_)
      throw Error(ErrorCode::IndexOutOfRange, "series/class index out of range");
  }

  std::size_t n_series_{0};
  std::size_t n_classes_{0};
  std::vector<std::vector<Timestamp>> trains_;
};

inline EventDataset validate_dataset(std::size_t n_series, std::size_t n_classes,
                                     std::span<const RawEvent> raw) {
  return EventDataset::from_events(n_series, n_classes, raw);
}

// Names for class ids. Position in `names` is the id.
class ClassRegistry {
 public:
  ClassRegistry() = default;
  explicit ClassRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) throw Error(ErrorCode::Config, "empty class name");
      if (!index_.emplace(names_[i], i).second)
        throw Error(ErrorCode::Config, "duplicate class name '" + names_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t id(const std::string& name) const {
    auto found = find(name);
    if (!found) throw Error(ErrorCode::Config, "unknown class name '" + name + "'");
    return *found;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
};

enum class TauMode { FixedPerClass, FixedPerClassPair, Adaptive };

/// Coincidence-window policy plus the inter-event interval used by sequences.
///
/// Window lookup for a class pair (k1, k2), in order: an explicit pair entry;
/// for k1 == k2 the class entry; for k1 != k2 the larger of the two class
/// entries; the global default. Adaptive mode computes windows per event pair
/// and uses `fallback_tau` only when no neighbour gap exists.
class CoincidenceParams {
 public:
  static constexpr std::int64_t kUnboundedIei = std::numeric_limits<std::int64_t>::max();

  CoincidenceParams() = default;

  static CoincidenceParams fixed(double tau) {
    CoincidenceParams p;
    p.set_default_tau(tau);
    return p;
  }

  static CoincidenceParams adaptive(double fallback) {
    CoincidenceParams p;
    p.mode_ = TauMode::Adaptive;
    p.set_fallback_tau(fallback);
    return p;
  }

  TauMode mode() const noexcept { return mode_; }
  void set_mode(TauMode m) noexcept { mode_ = m; }

  void set_default_tau(double tau) {
    require_positive(tau);
    default_tau_ = tau;
  }
  void set_class_tau(std::size_t k, double tau) {
    require_positive(tau);
    class_tau_[k] = tau;
  }
  void set_pair_tau(std::size_t k1, std::size_t k2, double tau) {
    require_positive(tau);
    pair_tau_[std::minmax(k1, k2)] = tau;
  }
  void set_fallback_tau(double tau) {
    require_positive(tau);
    fallback_tau_ = tau;
  }
  void set_iei(std::int64_t iei) {
    if (iei <= 0) throw Error(ErrorCode::InvalidIei, "IEI must be positive");
    iei_ = iei;
  }
  void set_iei_unbounded() noexcept { iei_ = kUnboundedIei; }

  double fallback_tau() const noexcept { return fallback_tau_; }
  std::int64_t iei() const noexcept { return iei_; }
  bool iei_unbounded() const noexcept { return iei_ == kUnboundedIei; }
  bool is_adaptive() const noexcept { return mode_ == TauMode::Adaptive; }

  /// Fixed window for a class pair. Throws MissingTau when nothing applies.
  double tau(std::size_t k1, std::size_t k2) const {
    if (auto it = pair_tau_.find(std::minmax(k1, k2)); it != pair_tau_.end()) return it->second;
    auto a = class_tau_.find(k1);
    auto b = class_tau_.find(k2);
    if (k1 == k2 && a != class_tau_.end()) return a->second;
    if (k1 != k2 && a != class_tau_.end() && b != class_tau_.end())
      return std::max(a->second, b->second);
    if (default_tau_) return *default_tau_;
    throw Error(ErrorCode::MissingTau, "no coincidence window configured for classes " +
                                           std::to_string(k1) + "," + std::to_string(k2));
  }

  /// Largest configured fixed window; sizes the streaming accumulator.
  double max_tau() const noexcept {
    double m = default_tau_.value_or(0.0);
    for (const auto& [k, t] : class_tau_) m = std::max(m, t);
    for (const auto& [k, t] : pair_tau_) m = std::max(m, t);
    return m;
  }

  /// Multiplies every window by `factor`.
  CoincidenceParams scaled(double factor) const {
    CoincidenceParams p = *this;
    if (p.default_tau_) *p.default_tau_ *= factor;
    for (auto& [k, t] : p.class_tau_) t *= factor;
    for (auto& [k, t] : p.pair_tau_) t *= factor;
    p.fallback_tau_ *= factor;
    return p;
  }

 private:
  static void require_positive(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw Error(ErrorCode::NonPositiveTau, "coincidence window must be positive and finite");
  }

  TauMode mode_{TauMode::FixedPerClass};
  std::optional<double> default_tau_;
  std::map<std::size_t, double> class_tau_;
  std::map<std::pair<std::size_t, std::size_t>, double> pair_tau_;
  double fallback_tau_{1.0};
  std::int64_t iei_{kUnboundedIei};
};

struct WeightVector {
  std::vector<double> weights;
};

struct PairwiseValue {
  std::size_t series_i{0};
  std::size_t series_j{0};
  std::size_t class_a{0};
  std::size_t class_b{0};
  double value{0.0};

  friend bool operator==(const PairwiseValue&, const PairwiseValue&) = default;
};

struct SyncReport {
  std::vector<double> q_per_class;
  // q_inter[k1][k2]: class k1 taken from the lower-indexed series of each pair.
  std::vector<std::vector<double>> q_inter;
  std::vector<PairwiseValue> s_pairwise;
  double si_global{0.0};
  std::optional<double> si_weighted;
  // Set when some pair scored below 1 only because several events share the
  // 1/m averaging (at least one side has more than one event).
  bool averaging_dilution{false};
};

}  // namespace mecs
