#pragma once

// Derived event classes: macro classes (unions of original classes) and
// macro events (ordered sequences detected within one series).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mecs/event_model.hpp"

namespace mecs {

struct MacroClassSpec {
  std::vector<EventClassId> members;
  std::string name;
};

/// Relabels `ds` so that class m of the result holds every event whose
/// original class belongs to specs[m]. An event appears once in each macro
/// class containing its class. Events of two member classes sharing a
/// timestamp collapse into one macro event.
inline EventDataset apply_macro_classes(const EventDataset& ds, std::span<const MacroClassSpec> specs) {
  if (specs.empty()) throw Error(ErrorCode::EmptyMemberSet, "no macro classes given");
  std::vector<RawEvent> raw;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const auto& members = specs[m].members;
    if (members.empty())
      throw Error(ErrorCode::EmptyMemberSet, "macro class '" + specs[m].name + "' has no members");
    for (auto c : members)
      if (c.value >= ds.n_classes())
        throw Error(ErrorCode::IndexOutOfRange, "macro class member " + std::to_string(c.value) + " out of range");
    for (std::size_t n = 0; n < ds.n_series(); ++n) {
      std::vector<Timestamp> merged;
      for (auto c : members) {
        auto t = ds.times(n, c.value);
        merged.insert(merged.end(), t.begin(), t.end());
      }
      std::sort(merged.begin(), merged.end());
      merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
      for (Timestamp t : merged) raw.push_back({t, n, m});
    }
  }
  return EventDataset::from_events(ds.n_series(), specs.size(), raw);
}

struct SequenceSpec {
  std::vector<EventClassId> elements;
  // Largest gap between consecutive matched elements; nullopt = unbounded.
  std::optional<std::int64_t> iei;
  std::string name;

  bool contains(std::size_t class_id) const noexcept {
    return std::any_of(elements.begin(), elements.end(),
                       [class_id](EventClassId c) { return c.value == class_id; });
  }
};

/// Incremental greedy matcher for one series.
///
/// Feed timestamps in increasing order together with the classes (restricted
/// to the sequence's classes) that fire at that time. A match extends when
/// the next expected class fires within the IEI of the previous element; any
/// other firing of a sequence class aborts the match, and the aborting group
/// may start a new match if it holds the first element. The completion time
/// of each match is returned.
class SequenceMatcher {
 public:
  explicit SequenceMatcher(SequenceSpec spec) : spec_(std::move(spec)) {
    if (spec_.elements.empty()) throw Error(ErrorCode::EmptySequence, "sequence needs at least one element");
    if (spec_.iei && *spec_.iei <= 0) throw Error(ErrorCode::InvalidIei, "IEI must be positive");
  }

  const SequenceSpec& spec() const noexcept { return spec_; }

  /// Matched prefix length of the in-progress match (0 when idle).
  std::size_t progress() const noexcept { return progress_; }

  /// Drops an in-progress match that can no longer be extended at `now`.
  void expire(Timestamp now) noexcept {
    if (progress_ > 0 && spec_.iei && now - last_ > *spec_.iei) progress_ = 0;
  }

  /// `classes` are the sequence classes firing at time `t`; other classes must
  /// be filtered out by the caller. Returns true when a match completes at t.
  /// An event consumed by a match never starts another one.
  bool feed(Timestamp t, std::span<const std::size_t> classes) {
    if (classes.empty()) return false;
    if (progress_ > 0 && t <= last_)
      throw Error(ErrorCode::InvalidArgument, "sequence matcher fed out of order");
    auto fires = [&](std::size_t c) { return std::find(classes.begin(), classes.end(), c) != classes.end(); };

    bool completed = false;
    std::optional<std::size_t> consumed;
    if (progress_ > 0) {
      const std::size_t want = spec_.elements[progress_].value;
      const bool in_reach = !spec_.iei || t - last_ <= *spec_.iei;
      if (in_reach && fires(want)) {
        consumed = want;
        ++progress_;
        last_ = t;
        if (progress_ == spec_.elements.size()) {
          completed = true;
          progress_ = 0;
        }
      } else {
        progress_ = 0;
      }
    }
    const std::size_t first = spec_.elements.front().value;
    if (progress_ == 0 && consumed != first && fires(first)) {
      progress_ = 1;
      last_ = t;
      if (spec_.elements.size() == 1) {
        completed = true;
        progress_ = 0;
      }
    }
    return completed;
  }

 private:
  SequenceSpec spec_;
  std::size_t progress_{0};
  Timestamp last_{0};
};

/// Completion times of every detected occurrence of `spec` in one series.
inline std::vector<Timestamp> detect_sequence_times(const EventDataset& ds, std::size_t series,
                                                    const SequenceSpec& spec) {
  for (auto c : spec.elements)
    if (c.value >= ds.n_classes())
      throw Error(ErrorCode::IndexOutOfRange, "sequence element " + std::to_string(c.value) + " out of range");

  // (time, class) for every event of a class in the sequence, time-ordered.
  std::vector<std::pair<Timestamp, std::size_t>> stream;
  std::vector<std::size_t> classes;
  for (auto c : spec.elements)
    if (std::find(classes.begin(), classes.end(), c.value) == classes.end()) classes.push_back(c.value);
  for (std::size_t c : classes)
    for (Timestamp t : ds.times(series, c)) stream.emplace_back(t, c);
  std::sort(stream.begin(), stream.end());

  SequenceMatcher matcher(spec);
  std::vector<Timestamp> out;
  std::vector<std::size_t> group;
  for (std::size_t at = 0; at < stream.size();) {
    const Timestamp t = stream[at].first;
    group.clear();
    for (; at < stream.size() && stream[at].first == t; ++at) group.push_back(stream[at].second);
    if (matcher.feed(t, group)) out.push_back(t);
  }
  return out;
}

/// Dataset with one class per spec, holding each series' detected macro
/// events stamped at their completion time.
inline EventDataset detect_sequences(const EventDataset& ds, std::span<const SequenceSpec> specs) {
  std::vector<RawEvent> raw;
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (std::size_t n = 0; n < ds.n_series(); ++n)
      for (Timestamp t : detect_sequence_times(ds, n, specs[s])) raw.push_back({t, n, s});
  return EventDataset::from_events(ds.n_series(), specs.size(), raw);
}

inline EventDataset detect_sequences(const EventDataset& ds, const SequenceSpec& spec) {
  return detect_sequences(ds, std::span<const SequenceSpec>(&spec, 1));
}

/// Concatenates the class dimensions of datasets sharing a series count.
inline EventDataset concat_classes(std::span<const EventDataset> parts) {
  if (parts.empty()) return {};
  const std::size_t n = parts.front().n_series();
  std::size_t k_total = 0;
  for (const auto& p : parts) {
    if (p.n_series() != n) throw Error(ErrorCode::InvalidArgument, "series count differs between datasets");
    k_total += p.n_classes();
  }
  std::vector<RawEvent> raw;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (const auto& e : p.events()) raw.push_back({e.time, e.series, offset + e.class_id.value});
    offset += p.n_classes();
  }
  return EventDataset::from_events(n, k_total, raw);
}

/// Keeps only the listed classes, renumbered in the given order.
inline EventDataset select_classes(const EventDataset& ds, std::span<const std::size_t> keep) {
  std::vector<RawEvent> raw;
  for (std::size_t out = 0; out < keep.size(); ++out) {
    if (keep[out] >= ds.n_classes()) throw Error(ErrorCode::IndexOutOfRange, "selected class out of range");
    for (std::size_t n = 0; n < ds.n_series(); ++n)
      for (Timestamp t : ds.times(n, keep[out])) raw.push_back({t, n, out});
  }
  return EventDataset::from_events(ds.n_series(), keep.size(), raw);
}

}  // namespace mecs
