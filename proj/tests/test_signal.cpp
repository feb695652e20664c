#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mecs/case_study.hpp"
#include "mecs/signal.hpp"
#include "mecs/synthetic.hpp"
#include "oracle.hpp"

using namespace mecs;

TEST(Peaks, SimpleMaxima) {
  const std::vector<double> x{0, 1, 0, 1, 0};
  EXPECT_EQ(detect_peaks(x, {0.5, 1}), (std::vector<Timestamp>{1, 3}));
}

TEST(Peaks, RampHasNone) {
  std::vector<double> x(50);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  EXPECT_TRUE(detect_peaks(x).empty());
}

TEST(Peaks, SineCountsOnePerPeriod) {
  for (double period : {7.3, 10.0, 25.0, 40.0}) {
    const std::size_t len = 1000;
    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i) x[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
    const auto peaks = detect_peaks(x, {0.5, 1});
    const double expected = std::floor(static_cast<double>(len) / period);
    EXPECT_LE(std::abs(static_cast<double>(peaks.size()) - expected), 1.0) << period;
  }
}

TEST(Peaks, ProminenceFilters) {
  const std::vector<double> x{0, 5, 4, 4.5, 0};
  EXPECT_EQ(detect_peaks(x, {1.0, 1}), (std::vector<Timestamp>{1}));
  EXPECT_EQ(detect_peaks(x, {0.4, 1}), (std::vector<Timestamp>{1, 3}));
}

TEST(Peaks, SeparationKeepsTallerThenEarlier) {
  const std::vector<double> x{0, 2, 0, 3, 0, 3, 0};
  EXPECT_EQ(detect_peaks(x, {0, 3}), (std::vector<Timestamp>{3}));
  EXPECT_EQ(detect_peaks(x, {0, 2}), (std::vector<Timestamp>{1, 3, 5}));
}

TEST(Peaks, PlateauReportedAtFirstSample) {
  const std::vector<double> x{0, 2, 2, 2, 0};
  EXPECT_EQ(detect_peaks(x), (std::vector<Timestamp>{1}));
}

TEST(Peaks, OutputIsSortedAndSeparated) {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> x(200);
    for (auto& v : x) v = oracle::uniform01(rng);
    const std::size_t sep = static_cast<std::size_t>(oracle::uniform_int(rng, 1, 12));
    const auto peaks = detect_peaks(x, {0.3 * oracle::uniform01(rng), sep});
    for (std::size_t i = 1; i < peaks.size(); ++i) EXPECT_GE(peaks[i] - peaks[i - 1], static_cast<Timestamp>(sep));
  }
}

TEST(Peaks, EmptySignalRejected) { EXPECT_THROW(detect_peaks(Signal{}), Error); }

TEST(Energy, ConstantAndHandFrame) {
  Signal s{{2, 2, 2, 2, 2, 2, 2}, 10};
  const auto e = rms_energy(s, 3);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_DOUBLE_EQ(e.samples[0], 2.0);
  EXPECT_DOUBLE_EQ(e.rate, 10.0 / 3.0);
  EXPECT_NEAR(rms_energy(Signal{{3, 4}, 1}, 2).samples[0], 3.5355339059327378, 1e-12);
}

TEST(Energy, FramesPerSecondAtAudioRate) {
  Signal s{std::vector<double>(48000, 0.1), 48000};
  const auto e = rms_energy(s, 1920);
  EXPECT_EQ(e.size(), 25u);
  EXPECT_DOUBLE_EQ(e.rate, 25.0);
}

TEST(Energy, ShiftEquivariantOnFrameGrid) {
  std::mt19937_64 rng(3);
  Signal s{std::vector<double>(400), 1};
  for (auto& v : s.samples) v = oracle::uniform01(rng) - 0.5;
  Signal shifted{std::vector<double>(40, 0.0), 1};
  shifted.samples.insert(shifted.samples.end(), s.samples.begin(), s.samples.end());
  const auto a = rms_energy(s, 10);
  const auto b = rms_energy(shifted, 10);
  for (std::size_t f = 0; f < a.size(); ++f) EXPECT_EQ(a.samples[f], b.samples[f + 4]);
}

TEST(Envelope, SlidingMax) {
  const Signal impulse{{0, 0, 1, 0, 0}, 1};
  EXPECT_EQ(envelope(impulse, 2).samples, (std::vector<double>{0, 0, 1, 1, 0}));
  EXPECT_EQ(envelope(impulse, 1).samples, impulse.samples);
  const Signal flat{{3, 3, 3, 3}, 1};
  EXPECT_EQ(envelope(flat, 3).samples, flat.samples);
}

TEST(Envelope, MatchesNaiveMax) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 100; ++round) {
    Signal s{std::vector<double>(60), 1};
    for (auto& v : s.samples) v = oracle::uniform01(rng);
    const std::size_t w = static_cast<std::size_t>(oracle::uniform_int(rng, 1, 10));
    const auto env = envelope(s, w);
    for (std::size_t t = 0; t < s.size(); ++t) {
      double m = s.samples[t];
      for (std::size_t back = 1; back < w && back <= t; ++back) m = std::max(m, s.samples[t - back]);
      EXPECT_EQ(env.samples[t], m);
    }
  }
}

TEST(Score, ThresholdCounting) {
  const std::vector<double> zeros{0, 0, 0};
  EXPECT_EQ(threshold_sync_score(zeros, 3), 0.0);
  const std::vector<double> s{0.2, 0, 0.7};
  EXPECT_DOUBLE_EQ(threshold_sync_score(s, 4), 0.5);
  try {
    threshold_sync_score(s, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroOccurrences);
  }
}

TEST(Composed, CompositeIsSumAndReproducible) {
  const auto a = synth_composed();
  const auto b = synth_composed();
  EXPECT_EQ(a.composite.samples, b.composite.samples);
  for (std::size_t i = 0; i < a.composite.size(); ++i)
    EXPECT_EQ(a.composite.samples[i], a.main.samples[i] + a.chirp.samples[i] + a.noise.samples[i]);
  EXPECT_EQ(a.main.samples, a.reference.samples);
}

TEST(Composed, SilencedComponentsLeaveMainSine) {
  ComposedConfig cfg;
  cfg.noise_amplitude = 0;
  cfg.chirp_amplitude = 0;
  const auto s = synth_composed(cfg);
  EXPECT_EQ(s.composite.samples, s.main.samples);
}

TEST(Composed, EventTracksFollowPeaks) {
  const ComposedConfig cfg;
  const auto s = synth_composed(cfg);
  const auto ds = composed_events(s, cfg);
  ASSERT_EQ(ds.n_series(), 2u);
  ASSERT_EQ(ds.n_classes(), 5u);
  const double periods = static_cast<double>(cfg.length) / cfg.main_period;
  EXPECT_LE(std::abs(static_cast<double>(ds.count(0, 1)) - periods), 1.0);
  EXPECT_EQ(ds.count(1, 4), ds.count(0, 1));
  EXPECT_GT(ds.count(0, 3), ds.count(0, 1));  // noise is peaky
  EXPECT_GT(ds.count(0, 2), 0u);
}

TEST(Surrogate, ImpulsiveBeatsFluid) {
  const SurrogateConfig sc;
  for (double tau : {10.0, 15.0, 20.0}) {
    const auto r = case_study::evaluate(sc, tau);
    EXPECT_GT(r.conditions[2].score, r.conditions[0].score) << tau;
    EXPECT_GT(r.conditions[3].score, r.conditions[1].score) << tau;
  }
}
