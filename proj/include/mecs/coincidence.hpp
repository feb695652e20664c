#pragma once

// Batch synchronization measures: coincidence amounts, overall coincidence,
// pairwise and per-class synchronization (intra- and inter-class), global
// indices, and the classical two-series event synchronization baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mecs/event_model.hpp"

namespace mecs {

using SeriesPair = std::pair<std::size_t, std::size_t>;

/// All 2-combinations {i, j} with i < j, in lexicographic order.
inline std::vector<SeriesPair> series_pairs(std::size_t n_series) {
  std::vector<SeriesPair> pairs;
  if (n_series >= 2) pairs.reserve(n_series * (n_series - 1) / 2);
  for (std::size_t i = 0; i < n_series; ++i)
    for (std::size_t j = i + 1; j < n_series; ++j) pairs.emplace_back(i, j);
  return pairs;
}

constexpr Timestamp temporal_distance(Timestamp a, Timestamp b) noexcept {
  return a > b ? a - b : b - a;
}

/// Linear coincidence weight: 1 at d = 0 falling to 0 at d = tau.
inline double coincidence_amount(double d, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "coincidence window must be positive");
  if (d < 0.0 || d > tau) return 0.0;
  return 1.0 - d / tau;
}

/// Half the smallest neighbour gap around event `x` of train `xs` and event
/// `y` of train `ys` (0-based indices). Missing neighbours are skipped; with
/// no gap at all the fallback is returned.
inline double adaptive_tau(std::span<const Timestamp> xs, std::size_t x, std::span<const Timestamp> ys,
                           std::size_t y, double fallback) {
  std::optional<Timestamp> best;
  auto consider = [&](Timestamp gap) { best = best ? std::min(*best, gap) : gap; };
  if (x + 1 < xs.size()) consider(xs[x + 1] - xs[x]);
  if (x > 0) consider(xs[x] - xs[x - 1]);
  if (y + 1 < ys.size()) consider(ys[y + 1] - ys[y]);
  if (y > 0) consider(ys[y] - ys[y - 1]);
  if (!best) return fallback;
  return 0.5 * static_cast<double>(*best);
}

inline double adaptive_tau(const EventRecord& x, const EventRecord& y, const EventDataset& ds,
                           double fallback) {
  if (x.ordinal == 0 || y.ordinal == 0)
    throw Error(ErrorCode::InvalidArgument, "event records need 1-based ordinals");
  return adaptive_tau(ds.times(x.series, x.class_id.value), x.ordinal - 1,
                      ds.times(y.series, y.class_id.value), y.ordinal - 1, fallback);
}

namespace detail {

// Sum over y of c(x, y) for the x-th event of `xs`.
inline double coincidence_row(std::span<const Timestamp> xs, std::size_t x, std::span<const Timestamp> ys,
                              std::size_t kx, std::size_t ky, const CoincidenceParams& params) {
  const Timestamp tx = xs[x];
  double row = 0.0;
  if (params.is_adaptive()) {
    for (std::size_t y = 0; y < ys.size(); ++y) {
      const double tau = adaptive_tau(xs, x, ys, y, params.fallback_tau());
      row += coincidence_amount(static_cast<double>(temporal_distance(tx, ys[y])), tau);
    }
    return row;
  }
  const double tau = params.tau(kx, ky);
  const auto reach = static_cast<Timestamp>(std::floor(tau));
  auto first = std::lower_bound(ys.begin(), ys.end(), tx - reach);
  for (auto it = first; it != ys.end() && *it <= tx + reach; ++it)
    row += coincidence_amount(static_cast<double>(temporal_distance(tx, *it)), tau);
  return row;
}

}  // namespace detail

/// Overall coincidence of the events of class `ka` in series `a` with respect
/// to class `kb` in series `b`: each event's summed coincidence averaged over
/// the partner count, then summed. Zero when either side has no events.
inline double overall_coincidence(const EventDataset& ds, std::size_t a, std::size_t b, std::size_t ka,
                                  std::size_t kb, const CoincidenceParams& params) {
  if (a == b) throw Error(ErrorCode::InvalidArgument, "overall coincidence needs two distinct series");
  const auto xs = ds.times(a, ka);
  const auto ys = ds.times(b, kb);
  if (xs.empty() || ys.empty()) return 0.0;
  const double m_partner = static_cast<double>(ys.size());
  double total = 0.0;
  for (std::size_t x = 0; x < xs.size(); ++x)
    total += detail::coincidence_row(xs, x, ys, ka, kb, params) / m_partner;
  return total;
}

/// Pairwise synchronization of class k1 in series i against class k2 in series j.
/// Defined as 0 when neither side has events.
inline double pairwise_sync(const EventDataset& ds, std::size_t i, std::size_t j, std::size_t k1,
                            std::size_t k2, const CoincidenceParams& params) {
  if (i == j) throw Error(ErrorCode::InvalidArgument, "pairwise sync needs two distinct series");
  const std::size_t m = ds.count(i, k1) + ds.count(j, k2);
  if (m == 0) return 0.0;
  const double forward = overall_coincidence(ds, i, j, k1, k2, params);
  const double backward = overall_coincidence(ds, j, i, k2, k1, params);
  return (forward + backward) / static_cast<double>(m);
}

/// Mean pairwise synchronization over all series pairs (i < j), with class k1
/// drawn from series i and k2 from series j.
inline double class_sync(const EventDataset& ds, std::size_t k1, std::size_t k2,
                         const CoincidenceParams& params) {
  if (ds.n_series() < 2) throw Error(ErrorCode::TooFewSeries, "synchronization needs at least two series");
  const auto pairs = series_pairs(ds.n_series());
  double sum = 0.0;
  for (const auto& [i, j] : pairs) sum += pairwise_sync(ds, i, j, k1, k2, params);
  return sum / static_cast<double>(pairs.size());
}

/// Unweighted mean of `q`, or the weight-normalized mean when weights are given.
inline double global_sync(std::span<const double> q, const WeightVector* weights = nullptr) {
  if (q.empty()) return 0.0;
  if (weights == nullptr) {
    double sum = 0.0;
    for (double v : q) sum += v;
    return sum / static_cast<double>(q.size());
  }
  if (weights->weights.size() != q.size())
    throw Error(ErrorCode::WeightLengthMismatch, "weight vector length differs from class count");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double w = weights->weights[k];
    if (w < 0.0 || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "weights must be non-negative");
    num += w * q[k];
    den += w;
  }
  if (den == 0.0) throw Error(ErrorCode::ZeroWeightSum, "weights sum to zero");
  return num / den;
}

inline double global_sync(std::span<const double> q, const WeightVector& weights) {
  return global_sync(q, &weights);
}

/// Classical event synchronization of two trains (Quiroga et al.). Counts
/// events of one train that follow an event of the other within tau, with
/// simultaneous events contributing 1/2 in each direction. Not bounded by 1.
inline double quiroga_es(std::span<const Timestamp> x, std::span<const Timestamp> y, double tau) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::NoEvents, "baseline needs events in both trains");
  if (!(tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "coincidence window must be positive");
  auto directed = [tau](std::span<const Timestamp> a, std::span<const Timestamp> b) {
    double c = 0.0;
    for (Timestamp ta : a)
      for (Timestamp tb : b) {
        const Timestamp lag = ta - tb;
        if (lag == 0)
          c += 0.5;
        else if (lag > 0 && static_cast<double>(lag) <= tau)
          c += 1.0;
      }
    return c;
  };
  const double mx = static_cast<double>(x.size());
  const double my = static_cast<double>(y.size());
  return (directed(y, x) + directed(x, y)) / std::sqrt(mx * my);
}

struct AnalyzeOptions {
  // Evaluate every ordered class pair, not only the diagonal.
  bool inter{true};
  std::optional<WeightVector> weights;
};

/// Full batch report: per-class Q, the class-pair matrix, every pairwise S,
/// and the global indices.
inline SyncReport analyze(const EventDataset& ds, const CoincidenceParams& params,
                          const AnalyzeOptions& options = {}) {
  if (ds.n_series() < 2) throw Error(ErrorCode::TooFewSeries, "synchronization needs at least two series");
  const std::size_t k = ds.n_classes();
  const auto pairs = series_pairs(ds.n_series());
  const double n_pairs = static_cast<double>(pairs.size());

  SyncReport report;
  report.q_per_class.assign(k, 0.0);
  report.q_inter.assign(k, std::vector<double>(k, 0.0));

  for (std::size_t k1 = 0; k1 < k; ++k1) {
    for (std::size_t k2 = 0; k2 < k; ++k2) {
      if (!options.inter && k1 != k2) continue;
      double sum = 0.0;
      for (const auto& [i, j] : pairs) {
        const double s = pairwise_sync(ds, i, j, k1, k2, params);
        sum += s;
        report.s_pairwise.push_back({i, j, k1, k2, s});
        if (s > 0.0 && std::max(ds.count(i, k1), ds.count(j, k2)) > 1) report.averaging_dilution = true;
      }
      report.q_inter[k1][k2] = sum / n_pairs;
    }
    report.q_per_class[k1] = report.q_inter[k1][k1];
  }

  report.si_global = global_sync(report.q_per_class);
  if (options.weights) report.si_weighted = global_sync(report.q_per_class, *options.weights);
  return report;
}

}  // namespace mecs
