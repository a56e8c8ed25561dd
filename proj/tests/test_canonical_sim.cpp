#include "noclat/canonical_sim.hpp"

#include <cmath>

#include "doctest.h"

using namespace noclat;

namespace {

GGeoParams geometric(double rate) { return GGeoParams{rate, 1.0 - rate}; }

CanonicalSimConfig base_config() {
  CanonicalSimConfig cfg;
  cfg.classes = {geometric(0.2)};
  cfg.deflect_prob = 0.3;
  cfg.max_deflections = 64;
  cfg.horizon = 400000;
  cfg.warmup = 40000;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("same seed reproduces the run bit for bit") {
  const CanonicalSimConfig cfg = base_config();
  const CanonicalSimStats a = run_canonical_sim(cfg);
  const CanonicalSimStats b = run_canonical_sim(cfg);
  CHECK(a.injected == b.injected);
  CHECK(a.delivered == b.delivered);
  CHECK(a.mean_latency == b.mean_latency);
  CHECK(a.deflected_rate == b.deflected_rate);
  CHECK(a.class_mean_wait[0] == b.class_mean_wait[0]);

  CanonicalSimConfig other = cfg;
  other.seed = 6;
  const CanonicalSimStats c = run_canonical_sim(other);
  CHECK(a.injected != c.injected);
}

TEST_CASE("light load without deflection is pure service time") {
  CanonicalSimConfig cfg = base_config();
  cfg.classes = {geometric(0.01)};
  cfg.deflect_prob = 0.0;
  const CanonicalSimStats s = run_canonical_sim(cfg);
  CHECK(s.mean_latency == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s.mean_deflections == 0.0);
  for (uint64_t i = 1; i < s.deflection_histogram.size(); ++i) {
    CHECK(s.deflection_histogram[i] == 0);
  }
}

TEST_CASE("rejection stream rate matches lambda p over one minus p") {
  const CanonicalSimConfig cfg = base_config();
  const CanonicalSimStats s = run_canonical_sim(cfg);
  const double expected = 0.2 * 0.3 / 0.7;
  CHECK(s.deflected_rate == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("deflections per packet follow a geometric law") {
  CanonicalSimConfig cfg = base_config();
  cfg.classes = {geometric(0.1)};
  const CanonicalSimStats s = run_canonical_sim(cfg);

  const double p = cfg.deflect_prob;
  CHECK(s.mean_deflections == doctest::Approx(p / (1.0 - p)).epsilon(0.03));

  // Merge the histogram into k = 0..4 plus a tail so every expected
  // count clears the chi-square validity floor.
  double total = 0.0;
  for (uint64_t n : s.deflection_histogram) total += static_cast<double>(n);
  REQUIRE(total > 10000);
  const int kBuckets = 6;
  std::vector<double> observed(kBuckets, 0.0), expected(kBuckets, 0.0);
  for (size_t k = 0; k < s.deflection_histogram.size(); ++k) {
    const size_t b = k < 5 ? k : 5;
    observed[b] += static_cast<double>(s.deflection_histogram[k]);
  }
  for (int k = 0; k < 5; ++k) expected[k] = total * (1.0 - p) * std::pow(p, k);
  expected[5] = total * std::pow(p, 5);
  double chi2 = 0.0;
  for (int b = 0; b < kBuckets; ++b) {
    REQUIRE(expected[b] > 5.0);
    const double d = observed[b] - expected[b];
    chi2 += d * d / expected[b];
  }
  CHECK(chi2 < 15.086);  // df = 5, alpha = 0.01
}

TEST_CASE("every injected packet is delivered or still queued") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    CanonicalSimConfig cfg = base_config();
    cfg.seed = seed;
    cfg.classes = {ggeo_from_burstiness({0.15, 0.2}), geometric(0.1)};
    const CanonicalSimStats s = run_canonical_sim(cfg);
    CHECK(s.injected == s.delivered + s.live_end);
  }
}

TEST_CASE("strict priority orders the class waits") {
  CanonicalSimConfig cfg = base_config();
  cfg.classes = {geometric(0.15), geometric(0.15), geometric(0.15)};
  cfg.deflect_prob = 0.2;
  const CanonicalSimStats s = run_canonical_sim(cfg);
  REQUIRE(s.class_mean_wait.size() == 3);
  CHECK(s.class_mean_wait[0] <= s.class_mean_wait[1]);
  CHECK(s.class_mean_wait[1] <= s.class_mean_wait[2]);
  CHECK(s.class_mean_wait[2] > s.class_mean_wait[0]);
  CHECK(s.class_empty_frac[0] > s.class_empty_frac[2]);
}
