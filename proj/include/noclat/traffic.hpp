#pragma once

#include <cstdint>
#include <vector>

#include "noclat/rng.hpp"

namespace noclat {

// Two-moment description of a slotted arrival process: mean rate and the
// squared coefficient of variation of inter-arrival gaps (zero gaps encode
// batch members landing in the same slot).
struct GGeoParams {
  double rate = 0.0;  // packets/cycle, 0 < rate < 1
  double scv = 1.0;   // >= 1 - rate
};

// Burstiness form: probability that a packet is followed by another one in
// the same slot (zero gap), plus the mean rate.
struct BurstProfile {
  double rate = 0.0;
  double burst_prob = 0.0;  // in [0,1)
};

struct ArrivalSequence {
  std::vector<uint32_t> counts;  // arrivals per slot
};

struct SequenceMoments {
  double rate = 0.0;
  double scv = 0.0;
};

// Resolved gap law: P(gap=0) = burst_prob, P(gap=k) = (1-burst_prob) *
// (1-beta)^(k-1) * beta for k >= 1, with beta = rate*(1-burst_prob) so the
// mean gap is 1/rate.
struct GGeoLaw {
  double burst_prob = 0.0;
  double beta = 0.0;
};

// Throws std::invalid_argument when invariants are violated.
void validate(const GGeoParams& params);
void validate(const BurstProfile& profile);

// Closed form: scv = (1+burst_prob)/(1-burst_prob) - rate.
GGeoParams ggeo_from_burstiness(const BurstProfile& profile);

// Inverse mapping from (rate, scv) back to the gap law.
GGeoLaw ggeo_law(const GGeoParams& params);

// Incremental sampler; slots must be queried in nondecreasing order.
class GGeoSource {
 public:
  GGeoSource(const GGeoParams& params, uint64_t seed);

  // Number of arrivals landing in `slot`.
  uint32_t arrivals_at(uint64_t slot);

  // Slot of the next pending arrival (for calendar-driven callers).
  uint64_t next_slot() const { return next_; }

  // Consumes the pending arrival batch at next_slot(); returns its size and
  // advances to the following arrival slot.
  uint32_t take_batch();

 private:
  uint64_t draw_gap();
  GGeoLaw law_;
  Rng rng_;
  uint64_t next_ = 0;
};

ArrivalSequence sample_arrivals(const GGeoParams& params, uint64_t seed,
                                uint64_t horizon);

// Sample mean rate and gap SCV; throws std::invalid_argument with fewer than
// two arrivals (no gap exists).
SequenceMoments moments_of_sequence(const ArrivalSequence& seq);

}  // namespace noclat
