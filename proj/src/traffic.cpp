#include "noclat/traffic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace noclat {

void validate(const GGeoParams& params) {
  if (!(params.rate > 0.0) || !(params.rate < 1.0)) {
    throw std::invalid_argument("arrival rate must lie in (0,1), got " +
                                std::to_string(params.rate));
  }
  if (params.scv < 1.0 - params.rate - 1e-12) {
    throw std::invalid_argument(
        "arrival scv " + std::to_string(params.scv) +
        " below the geometric-gap floor 1-rate = " +
        std::to_string(1.0 - params.rate));
  }
}

void validate(const BurstProfile& profile) {
  if (!(profile.rate > 0.0) || !(profile.rate < 1.0)) {
    throw std::invalid_argument("arrival rate must lie in (0,1), got " +
                                std::to_string(profile.rate));
  }
  if (profile.burst_prob < 0.0 || profile.burst_prob >= 1.0) {
    throw std::invalid_argument("burst probability must lie in [0,1), got " +
                                std::to_string(profile.burst_prob));
  }
  const double beta = profile.rate * (1.0 - profile.burst_prob);
  if (!(beta > 0.0) || beta > 1.0) {
    throw std::invalid_argument("implied gap parameter outside (0,1]");
  }
}

GGeoParams ggeo_from_burstiness(const BurstProfile& profile) {
  validate(profile);
  // Gap moments: E[g] = (1-p)/beta = 1/rate,
  // E[g^2] = (1-p)(2-beta)/beta^2, so scv = (1+p)/(1-p) - rate.
  const double p = profile.burst_prob;
  return GGeoParams{profile.rate, (1.0 + p) / (1.0 - p) - profile.rate};
}

GGeoLaw ggeo_law(const GGeoParams& params) {
  validate(params);
  const double s = params.scv + params.rate;  // (1+p)/(1-p)
  GGeoLaw law;
  law.burst_prob = (s - 1.0) / (s + 1.0);
  law.beta = 2.0 * params.rate / (s + 1.0);
  return law;
}

GGeoSource::GGeoSource(const GGeoParams& params, uint64_t seed)
    : law_(ggeo_law(params)), rng_(seed) {
  // First arrival placed by a plain geometric gap from slot -1, so the
  // process has no slot-0 batch bias.
  next_ = rng_.geometric1(law_.beta) - 1;
}

uint64_t GGeoSource::draw_gap() {
  if (rng_.bernoulli(law_.burst_prob)) return 0;
  return rng_.geometric1(law_.beta);
}

uint32_t GGeoSource::arrivals_at(uint64_t slot) {
  uint32_t count = 0;
  while (next_ == slot) {
    ++count;
    next_ += draw_gap();
  }
  return count;
}

uint32_t GGeoSource::take_batch() {
  const uint64_t slot = next_;
  return arrivals_at(slot);
}

ArrivalSequence sample_arrivals(const GGeoParams& params, uint64_t seed,
                                uint64_t horizon) {
  validate(params);
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  GGeoSource source(params, seed);
  ArrivalSequence seq;
  seq.counts.resize(horizon, 0);
  while (source.next_slot() < horizon) {
    const uint64_t slot = source.next_slot();
    seq.counts[slot] = source.take_batch();
  }
  return seq;
}

SequenceMoments moments_of_sequence(const ArrivalSequence& seq) {
  // Gap list: zero gaps between batch members, slot differences between
  // consecutive occupied slots. First arrival contributes no gap.
  uint64_t arrivals = 0;
  double sum = 0.0, sumsq = 0.0;
  uint64_t gaps = 0;
  bool have_prev = false;
  uint64_t prev_slot = 0;
  for (uint64_t slot = 0; slot < seq.counts.size(); ++slot) {
    const uint32_t c = seq.counts[slot];
    if (c == 0) continue;
    if (have_prev) {
      const double g = static_cast<double>(slot - prev_slot);
      sum += g;
      sumsq += g * g;
      ++gaps;
    }
    // c-1 zero gaps inside the batch contribute nothing to sums.
    gaps += c - 1;
    arrivals += c;
    prev_slot = slot;
    have_prev = true;
  }
  if (arrivals < 2) {
    throw std::invalid_argument(
        "need at least two arrivals to measure gap moments");
  }
  SequenceMoments m;
  m.rate = static_cast<double>(arrivals) /
           static_cast<double>(seq.counts.size());
  const double n = static_cast<double>(gaps);
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  m.scv = var / (mean * mean);
  return m;
}

}  // namespace noclat
