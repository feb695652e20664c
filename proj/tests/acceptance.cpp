// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mecs/mecs.hpp"
#include "oracle.hpp"

using namespace mecs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path source(const std::string& rel) { return fs::path(MECS_SOURCE_DIR) / rel; }

// 1. Production vs brute force on random instances.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const int instances = 1200;
  double worst = 0.0;
  std::size_t values = 0;
  for (int round = 0; round < instances; ++round) {
    const auto n = static_cast<std::size_t>(oracle::uniform_int(rng, 2, 4));
    const auto k = static_cast<std::size_t>(oracle::uniform_int(rng, 1, 3));
    const auto t = oracle::random_trains(rng, n, k, 50, oracle::uniform_int(rng, 20, 600));
    const auto ds = EventDataset::from_trains(t);

    CoincidenceParams p;
    oracle::Window w;
    const auto mode = oracle::uniform_int(rng, 0, 2);
    if (mode == 2) {
      p = CoincidenceParams::adaptive(0.5 + 10.0 * oracle::uniform01(rng));
      w = {true, {}, p.fallback_tau()};
    } else {
      p = CoincidenceParams::fixed(0.5 + 30.0 * oracle::uniform01(rng));
      for (std::size_t a = 0; a < k; ++a) {
        if (oracle::uniform01(rng) < 0.5) p.set_class_tau(a, 0.5 + 30.0 * oracle::uniform01(rng));
        if (mode == 1)
          for (std::size_t b = a; b < k; ++b)
            if (oracle::uniform01(rng) < 0.5) p.set_pair_tau(a, b, 0.5 + 30.0 * oracle::uniform01(rng));
      }
      p.set_mode(mode == 1 ? TauMode::FixedPerClassPair : TauMode::FixedPerClass);
      w = {false, [p](std::size_t a, std::size_t b) { return p.tau(a, b); }, 1.0};
    }
    const auto report = analyze(ds, p);
    for (const auto& s : report.s_pairwise) {
      worst = std::max(worst, std::abs(s.value - oracle::pairwise(t, s.series_i, s.series_j, s.class_a, s.class_b, w)));
      ++values;
    }
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        const double expect = oracle::class_q(t, a, b, w);
        worst = std::max(worst, std::abs(report.q_inter[a][b] - expect));
        if (a == b) worst = std::max(worst, std::abs(report.q_per_class[a] - expect));
        ++values;
      }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-12 && elapsed < 60.0,
          fmt("%d instances, %zu values, max |diff| = %.3g, %.2f s", instances, values, worst, elapsed)};
}

// 2. Streamed pair contributions vs the batch pair set.
Outcome streaming_equals_batch() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  const int streams = 250;
  int mismatches = 0;
  std::size_t terms = 0;
  for (int round = 0; round < streams; ++round) {
    const auto n = static_cast<std::size_t>(oracle::uniform_int(rng, 2, 4));
    const auto k = static_cast<std::size_t>(oracle::uniform_int(rng, 1, 3));
    const auto buff = static_cast<std::size_t>(oracle::uniform_int(rng, 1, 60));
    const auto nov = static_cast<std::size_t>(oracle::uniform_int(rng, 0, static_cast<std::int64_t>(buff) - 1));
    const std::int64_t length = oracle::uniform_int(rng, 1, 400);
    const auto t = oracle::random_trains(rng, n, k, 40, length);
    const auto ds = EventDataset::from_trains(t);

    StreamConfig cfg;
    cfg.n_series = n;
    cfg.n_classes = k;
    cfg.params = CoincidenceParams::fixed(0.5 + 40.0 * oracle::uniform01(rng));
    for (std::size_t a = 0; a < k; ++a)
      if (oracle::uniform01(rng) < 0.5) cfg.params.set_class_tau(a, 0.5 + 40.0 * oracle::uniform01(rng));
    cfg.buff_dim = buff;
    cfg.n_overlapped = nov;
    cfg.inter = true;
    StreamEngine engine(cfg);
    std::vector<Contribution> log;
    engine.set_contribution_sink(&log);
    for (const auto& b : split_into_buffers(ds, static_cast<std::size_t>(length), buff, nov)) engine.push_buffer(b);

    std::vector<oracle::PairTerm> streamed;
    for (const auto& c : log) streamed.push_back({c.series_i, c.series_j, c.class_a, c.class_b, c.time_x, c.time_y, c.amount});
    std::sort(streamed.begin(), streamed.end());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) pairs.emplace_back(a, b);
    const auto params = cfg.params;
    const auto batch = oracle::pair_terms(t, pairs, [&params](std::size_t a, std::size_t b) { return params.tau(a, b); });
    terms += batch.size();
    if (streamed != batch) ++mismatches;
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < 60.0,
          fmt("%d streams, %zu pair terms, %d mismatching streams, %.2f s", streams, terms, mismatches, elapsed)};
}

// Per-buffer values of one report metric, by buffer index.
std::vector<double> series_of(const std::vector<io::ReportRow>& rows, const std::string& metric, const std::string& a,
                              const std::string& b) {
  std::map<std::size_t, double> by_buffer;
  for (const auto& r : rows)
    if (r.metric == metric && r.class_a == a && r.class_b == b && r.buffer) by_buffer[*r.buffer] = r.value;
  std::vector<double> out;
  for (const auto& [buffer, v] : by_buffer) out.push_back(v);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double autocorrelation(const std::vector<double>& v, std::size_t lag) {
  const double m = mean(v);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) den += (v[i] - m) * (v[i] - m);
  for (std::size_t i = 0; i + lag < v.size(); ++i) num += (v[i] - m) * (v[i + lag] - m);
  return den == 0.0 ? 0.0 : num / den;
}

// 3. Composed signals: reference locks onto the constant-frequency component.
Outcome composed_signals() {
  cli::StreamArgs args;
  args.events = source("data/composed/composed_events.csv").string();
  args.config = source("data/composed/composed.ini").string();
  const auto rows = cli::stream_rows(args);
  std::ifstream in(args.config);
  const RunConfig cfg = parse_config(in);

  const auto main_q = series_of(rows, "Q_inter", "main", "reference");
  const auto noise_q = series_of(rows, "Q_inter", "noise", "reference");
  const auto composite_q = series_of(rows, "Q_inter", "composite", "reference");
  const double ratio = mean(noise_q) > 0.0 ? mean(main_q) / mean(noise_q) : INFINITY;

  const ComposedConfig defaults;
  const double period_lag = defaults.main_period / static_cast<double>(cfg.buff_dim - cfg.n_overlapped);
  const auto lo = static_cast<std::size_t>(std::floor(0.9 * period_lag));
  const auto hi = static_cast<std::size_t>(std::ceil(1.1 * period_lag));
  double best = -1.0;
  std::size_t best_lag = 0;
  for (std::size_t lag = std::max<std::size_t>(lo, 1); lag <= hi; ++lag)
    if (const double r = autocorrelation(composite_q, lag); r > best) {
      best = r;
      best_lag = lag;
    }
  return {ratio >= 3.0 && best > 0.5,
          fmt("tau=%g, %zu windows, mean Q main/ref = %.4f, noise/ref = %.4f, ratio = %.2f; composite/ref "
              "autocorrelation %.3f at lag %zu (period lag %.1f)",
              *cfg.tau, composite_q.size(), mean(main_q), mean(noise_q), ratio, best, best_lag, period_lag)};
}

// 4. Sequence fixture: three macro events per series; nonzero windows are
// exactly those owning a cross-series macro pair closer than tau.
Outcome sequence_fixture_stream() {
  const auto events = source("data/sequences/sequences_events.csv").string();
  const auto config = source("data/sequences/sequences.ini").string();
  std::ifstream cin(config);
  const RunConfig cfg = parse_config(cin);
  std::ifstream ein(events);
  const auto raw = io::read_events(ein, cfg.classes, cfg.n_series);
  const auto derived = derive(raw, cfg);
  const auto m0 = derived.dataset.times(0, 0);
  const auto m1 = derived.dataset.times(1, 0);

  // The shipped files hold the fixture.
  const auto f = sequence_fixture();
  const bool fixture_ok = raw == dataset_from_codes({f.ts1, f.ts2}, 3);

  cli::StreamArgs args;
  args.events = events;
  args.config = config;
  const auto s = series_of(cli::stream_rows(args), "S", "S", "S");

  const double tau = *cfg.tau;
  const auto geo = BufferGeometry::make(cfg.buff_dim, cfg.n_overlapped, tau);
  bool exact = true;
  std::string nonzero;
  for (std::size_t b = 0; b < s.size(); ++b) {
    const Timestamp start = geo.buffer_start(b);
    const Timestamp owned = b == 0 ? 0 : start + static_cast<Timestamp>(geo.n_overlapped);
    const Timestamp end = start + static_cast<Timestamp>(geo.buff_dim);
    const Timestamp window = start - static_cast<Timestamp>(geo.acc_dim);
    double total = 0.0;
    bool has_pair = false;
    for (Timestamp x : m0)
      for (Timestamp y : m1) {
        const Timestamp later = std::max(x, y);
        if (later < owned || later >= end) continue;
        const auto d = static_cast<double>(std::abs(x - y));
        if (d < tau) has_pair = true;
        total += oracle::c_amount(x, y, tau);
      }
    auto count = [&](std::span<const Timestamp> m) {
      return static_cast<double>(std::count_if(m.begin(), m.end(), [&](Timestamp t) { return t >= window && t < end; }));
    };
    const double mi = count(m0), mj = count(m1);
    const double expect = (mi == 0 || mj == 0) ? 0.0 : total / (mi * mj);
    if ((s[b] > 0.0) != has_pair || std::abs(s[b] - expect) > 1e-12) exact = false;
    if (s[b] > 0.0) nonzero += (nonzero.empty() ? "" : ",") + std::to_string(b);
  }
  return {fixture_ok && m0.size() == 3 && m1.size() == 3 && exact,
          fmt("macro events %zu/%zu, tau=%g, %zu windows, nonzero windows {%s}, oracle agreement %s", m0.size(),
              m1.size(), tau, s.size(), nonzero.c_str(), exact ? "exact" : "FAILED")};
}

// 5. Classical baseline.
Outcome baseline() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int round = 0; round < 200; ++round) {
    auto train = oracle::random_train(rng, 30, 500);
    if (train.empty()) train.push_back(3);
    // Below the smallest gap each event only meets its own copy.
    double gap = 1e9;
    for (std::size_t i = 1; i < train.size(); ++i) gap = std::min(gap, static_cast<double>(train[i] - train[i - 1]));
    const double tau = std::min(gap, 50.0) * (0.05 + 0.9 * oracle::uniform01(rng));
    worst = std::max(worst, std::abs(quiroga_es(train, train, tau) - 1.0));
  }
  const std::vector<Timestamp> x{10, 11, 12, 13};
  const std::vector<Timestamp> y{9};
  const double multi = quiroga_es(x, y, 5);
  return {worst <= 1e-12 && multi > 1.0,
          fmt("identical trains, tau below the smallest gap: max |Q-1| = %.3g; four events after one within tau: Q = %.4f", worst, multi)};
}

// 6. Timing of the dense steady-state workload.
Outcome performance() {
  cli::BenchArgs args;
  args.n_series = 2;
  args.k_classes = 4;
  args.merg_dim = 10000;
  args.density = 1.0;
  args.repeats = 10;
  const auto r = cli::run_bench(args);
  return {r.mean_s <= cli::kReferenceSeconds,
          fmt("N=2 K=4 merg_dim=%zu dense, 10 repeats: mean %.3f s (sd %.3f), %zu pairs/push, ratio to 6.8 s = %.3f",
              r.geometry.merg_dim, r.mean_s, r.stddev_s, r.credited_pairs, r.mean_s / cli::kReferenceSeconds)};
}

// 7. Surrogate recordings: impulsive beats fluid for every window length.
Outcome surrogate() {
  const SurrogateConfig sc;
  bool ok = true;
  std::string detail;
  for (double tau : {10.0, 15.0, 20.0}) {
    const auto r = case_study::evaluate(sc, tau);
    const auto& c = r.conditions;
    ok = ok && c[2].score > c[0].score && c[3].score > c[1].score;
    detail += fmt("%stau=%g: C1=%.2f C2=%.2f C3=%.2f C4=%.2f", detail.empty() ? "" : "; ", tau, c[0].score,
                  c[1].score, c[2].score, c[3].score);
  }
  return {ok, detail};
}

// 8. Shift, scale, permutation and intra/inter consistency.
Outcome invariances() {
  std::mt19937_64 rng(808);
  const int instances = 600;
  int shift_fail = 0, scale_fail = 0, perm_fail = 0, diag_fail = 0;
  auto same = [](const SyncReport& a, const SyncReport& b) {
    if (a.q_per_class != b.q_per_class || a.q_inter != b.q_inter || a.si_global != b.si_global) return false;
    for (std::size_t i = 0; i < a.s_pairwise.size(); ++i)
      if (a.s_pairwise[i].value != b.s_pairwise[i].value) return false;
    return true;
  };
  for (int round = 0; round < instances; ++round) {
    const auto n = static_cast<std::size_t>(oracle::uniform_int(rng, 2, 4));
    const auto k = static_cast<std::size_t>(oracle::uniform_int(rng, 1, 3));
    const auto t = oracle::random_trains(rng, n, k, 30, 300);
    const auto ds = EventDataset::from_trains(t);
    // Dyadic windows keep scaled products exact.
    CoincidenceParams p = CoincidenceParams::fixed(static_cast<double>(oracle::uniform_int(rng, 1, 160)) / 8.0);
    for (std::size_t a = 0; a < k; ++a)
      if (oracle::uniform01(rng) < 0.5) p.set_class_tau(a, static_cast<double>(oracle::uniform_int(rng, 1, 160)) / 8.0);
    const bool adaptive = round % 4 == 3;
    if (adaptive) p = CoincidenceParams::adaptive(static_cast<double>(oracle::uniform_int(rng, 1, 40)) / 4.0);
    const auto base = analyze(ds, p);

    const std::int64_t delta = oracle::uniform_int(rng, 1, 100000);
    const std::int64_t factor = oracle::uniform_int(rng, 2, 9);
    auto shifted = t, scaled = t;
    for (auto& series : shifted)
      for (auto& train : series)
        for (auto& v : train) v += delta;
    for (auto& series : scaled)
      for (auto& train : series)
        for (auto& v : train) v *= factor;
    if (!same(base, analyze(EventDataset::from_trains(shifted), p))) ++shift_fail;
    if (!same(base, analyze(EventDataset::from_trains(scaled), p.scaled(static_cast<double>(factor))))) ++scale_fail;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[static_cast<std::size_t>(oracle::uniform_int(rng, 0, static_cast<std::int64_t>(i)))]);
    oracle::Trains permuted(n);
    for (std::size_t i = 0; i < n; ++i) permuted[i] = t[order[i]];
    const auto perm = analyze(EventDataset::from_trains(permuted), p);
    for (std::size_t a = 0; a < k; ++a)
      if (std::abs(perm.q_per_class[a] - base.q_per_class[a]) > 1e-12) {
        ++perm_fail;
        break;
      }

    if (!adaptive) {
      // Per-pair windows equal to the per-class ones must not change the diagonal.
      CoincidenceParams pair_mode = p;
      for (std::size_t a = 0; a < k; ++a) pair_mode.set_pair_tau(a, a, p.tau(a, a));
      pair_mode.set_mode(TauMode::FixedPerClassPair);
      const auto inter = analyze(ds, pair_mode);
      for (std::size_t a = 0; a < k; ++a)
        if (base.q_per_class[a] != inter.q_inter[a][a] || base.q_per_class[a] != class_sync(ds, a, a, p)) {
          ++diag_fail;
          break;
        }
    } else {
      for (std::size_t a = 0; a < k; ++a)
        if (base.q_per_class[a] != base.q_inter[a][a]) {
          ++diag_fail;
          break;
        }
    }
  }
  return {shift_fail + scale_fail + perm_fail + diag_fail == 0,
          fmt("%d instances each: shift %d, scale %d, permutation %d, intra/inter %d failures", instances, shift_fail,
              scale_fail, perm_fail, diag_fail)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "streaming equals batch", streaming_equals_batch},
      {3, "composed signals", composed_signals},
      {4, "sequence fixture", sequence_fixture_stream},
      {5, "baseline sanity", baseline},
      {6, "performance", performance},
      {7, "surrogate conditions", surrogate},
      {8, "invariances", invariances},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
