#include "noclat/canonical_sim.hpp"

#include <deque>
#include <stdexcept>

#include "noclat/rng.hpp"

namespace noclat {

namespace {

struct Pkt {
  int cls = 0;
  uint64_t arrival = 0;
  uint64_t enqueue = 0;  // entry into the current queue
  int deflections = 0;
  bool reserved = false;
};

constexpr int kHistogramCap = 64;

}  // namespace

CanonicalSimStats run_canonical_sim(const CanonicalSimConfig& config) {
  if (config.warmup >= config.horizon) {
    throw std::invalid_argument("warmup must precede the horizon");
  }
  if (config.service < 1 || config.deflect_service < 1) {
    throw std::invalid_argument("service times must be >= 1 slot");
  }
  if (config.deflect_prob < 0.0 || config.deflect_prob >= 1.0) {
    throw std::invalid_argument("deflection probability must lie in [0,1)");
  }
  if (config.loop_return < 0) {
    throw std::invalid_argument("loop return delay must be >= 0");
  }
  const int n = static_cast<int>(config.classes.size());

  std::vector<GGeoSource> sources;
  sources.reserve(n);
  for (int c = 0; c < n; ++c) {
    sources.emplace_back(config.classes[c], substream_seed(config.seed, c));
  }
  Rng trial_rng(substream_seed(config.seed, 1'000'000));

  std::vector<std::deque<Pkt>> queues(n);
  std::deque<Pkt> retry;
  const uint64_t cal_size = static_cast<uint64_t>(config.loop_return) + 2;
  std::vector<std::vector<Pkt>> calendar(cal_size);

  bool serving = false;
  bool serving_retry = false;
  Pkt in_service;
  uint64_t busy_until = 0;
  uint64_t completion_slot = 0;

  CanonicalSimStats st;
  st.class_mean_wait.assign(n, 0.0);
  st.class_mean_latency.assign(n, 0.0);
  st.class_empty_frac.assign(n, 0.0);
  st.deflection_histogram.assign(kHistogramCap + 1, 0);

  std::vector<uint64_t> wait_counts(n, 0);
  std::vector<double> wait_sums(n, 0.0);
  std::vector<uint64_t> lat_counts(n, 0);
  std::vector<double> lat_sums(n, 0.0);
  std::vector<uint64_t> empty_counts(n, 0);
  double latency_sum = 0.0;
  double defl_sum = 0.0;
  double retry_wait_sum = 0.0;
  uint64_t retry_wait_count = 0;
  uint64_t rejection_events = 0;

  const uint64_t window = config.horizon - config.warmup;

  for (uint64_t s = 0; s < config.horizon; ++s) {
    // A service that finished at the end of slot s-1 faces its sink trial.
    if (serving && busy_until == s) {
      Pkt p = in_service;
      serving = false;
      const bool accept =
          p.reserved || !trial_rng.bernoulli(config.deflect_prob);
      if (accept) {
        ++st.delivered;
        if (p.arrival >= config.warmup) {
          ++st.measured_delivered;
          const double latency =
              static_cast<double>(completion_slot - p.arrival + 1);
          latency_sum += latency;
          defl_sum += p.deflections;
          lat_sums[p.cls] += latency;
          ++lat_counts[p.cls];
          const int bucket =
              p.deflections > kHistogramCap ? kHistogramCap : p.deflections;
          ++st.deflection_histogram[bucket];
        }
      } else {
        ++p.deflections;
        if (completion_slot >= config.warmup) ++rejection_events;
        if (p.deflections >= config.max_deflections) p.reserved = true;
        const uint64_t join = completion_slot + config.loop_return + 1;
        calendar[join % cal_size].push_back(p);
      }
    }

    // Return flights landing now join the retry queue.
    for (Pkt& p : calendar[s % cal_size]) {
      p.enqueue = s;
      retry.push_back(p);
    }
    calendar[s % cal_size].clear();

    // Arrivals are observed at slot start.
    for (int c = 0; c < n; ++c) {
      const uint32_t k = sources[c].arrivals_at(s);
      for (uint32_t i = 0; i < k; ++i) {
        Pkt p;
        p.cls = c;
        p.arrival = s;
        p.enqueue = s;
        queues[c].push_back(p);
        ++st.injected;
      }
    }

    // Grant: retry queue outranks every class queue.
    if (!serving) {
      if (!retry.empty()) {
        Pkt p = retry.front();
        retry.pop_front();
        if (s >= config.warmup) {
          retry_wait_sum += static_cast<double>(s - p.enqueue);
          ++retry_wait_count;
        }
        in_service = p;
        serving = true;
        serving_retry = true;
        busy_until = s + config.deflect_service;
        completion_slot = s + config.deflect_service - 1;
      } else {
        for (int c = 0; c < n; ++c) {
          if (queues[c].empty()) continue;
          Pkt p = queues[c].front();
          queues[c].pop_front();
          if (p.arrival >= config.warmup) {
            wait_sums[c] += static_cast<double>(s - p.enqueue);
            ++wait_counts[c];
          }
          in_service = p;
          serving = true;
          serving_retry = false;
          busy_until = s + config.service;
          completion_slot = s + config.service - 1;
          break;
        }
      }
    }

    // Per-class system emptiness, sampled at slot end.
    if (s >= config.warmup) {
      for (int c = 0; c < n; ++c) {
        const bool busy_with_c = serving && !serving_retry && in_service.cls == c;
        if (queues[c].empty() && !busy_with_c) ++empty_counts[c];
      }
    }
  }

  for (int c = 0; c < n; ++c) {
    st.class_mean_wait[c] =
        wait_counts[c] ? wait_sums[c] / static_cast<double>(wait_counts[c])
                       : 0.0;
    st.class_mean_latency[c] =
        lat_counts[c] ? lat_sums[c] / static_cast<double>(lat_counts[c]) : 0.0;
    st.class_empty_frac[c] =
        static_cast<double>(empty_counts[c]) / static_cast<double>(window);
  }
  st.mean_latency = st.measured_delivered
                        ? latency_sum / static_cast<double>(st.measured_delivered)
                        : 0.0;
  st.mean_deflections =
      st.measured_delivered
          ? defl_sum / static_cast<double>(st.measured_delivered)
          : 0.0;
  st.mean_wait_deflected =
      retry_wait_count ? retry_wait_sum / static_cast<double>(retry_wait_count)
                       : 0.0;
  st.deflected_rate =
      static_cast<double>(rejection_events) / static_cast<double>(window);

  uint64_t live = serving ? 1 : 0;
  live += retry.size();
  for (const auto& q : queues) live += q.size();
  for (const auto& bucket : calendar) live += bucket.size();
  st.live_end = live;
  return st;
}

}  // namespace noclat
