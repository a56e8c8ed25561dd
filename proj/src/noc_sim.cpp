#include "noclat/noc_sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <queue>
#include <stdexcept>

#include "noclat/rng.hpp"

namespace noclat {

namespace {

struct Pkt {
  int32_t cls = 0;
  uint64_t arrival = 0;
  uint64_t enqueue = 0;
  int32_t deflections = 0;
  bool reserved = false;
  int8_t stage = 0;
  int16_t link_idx = 0;
  int16_t phase = 0;
};

struct StageRuntime {
  const std::vector<int>* links = nullptr;
  int loop_id = -1;
  double deflect_prob = 0.0;
  int ret_slots = 0;  // return-path flight time after a rejection
};

struct ClassRuntime {
  std::vector<StageRuntime> stages;
};

struct LinkQueues {
  std::deque<int> egress;
  std::deque<int> transfer;
  std::deque<int> reentry;
};

constexpr int kClassHist = 512;
constexpr int kGlobalHist = 1 << 14;

double percentile_from_hist(const std::vector<uint32_t>& hist, uint64_t total,
                            double q) {
  if (total == 0) return 0.0;
  const uint64_t target =
      static_cast<uint64_t>(std::ceil(q * static_cast<double>(total)));
  uint64_t cum = 0;
  for (size_t i = 0; i < hist.size(); ++i) {
    cum += hist[i];
    if (cum >= target) return static_cast<double>(i);
  }
  return static_cast<double>(hist.size() - 1);
}

}  // namespace

NocSimStats run_noc_sim(const NocSimConfig& config) {
  if (config.warmup >= config.horizon) {
    throw std::invalid_argument("warmup must precede the horizon");
  }
  const NocTopology& topo = config.topology;
  const int P = topo.per_hop_latency;
  const LinkTable links = build_links(topo);
  const int L = links.count();
  const auto loops = loops_of(topo, config.deflect);

  std::vector<TrafficClassSpec> specs;
  specs.reserve(config.classes.size());
  for (const auto& ct : config.classes) specs.push_back(ct.spec);
  const auto routes = build_routes(topo, specs, loops, config.deflect);

  const int C = static_cast<int>(config.classes.size());
  std::vector<ClassRuntime> rt(C);
  int max_ret = 1;
  for (int c = 0; c < C; ++c) {
    for (const RouteStage& st : routes[c].stages) {
      StageRuntime s;
      s.links = &st.links;
      s.loop_id = st.loop_id;
      s.deflect_prob = st.deflect_prob;
      s.ret_slots = loops[st.loop_id].loop_time - st.hops() * P;
      if (s.ret_slots < 1) {
        throw std::invalid_argument(
            "loop time too short for the segment return path");
      }
      max_ret = std::max(max_ret, s.ret_slots);
      rt[c].stages.push_back(s);
    }
    if (rt[c].stages.empty()) {
      throw std::invalid_argument("class with an empty route");
    }
  }

  // Unique same-direction predecessor of every link, used only when links
  // take several slots to cross (conservative entry holdoff).
  std::vector<int> pred(L, -1);
  if (P > 1) {
    for (int l = 0; l < L; ++l) {
      for (int m = 0; m < L; ++m) {
        if (links.to[m] != links.from[l]) continue;
        // Same direction: displacement vectors match.
        const auto dr = [&](int lk) {
          return topo.row_of(links.to[lk]) - topo.row_of(links.from[lk]);
        };
        const auto dc = [&](int lk) {
          return topo.col_of(links.to[lk]) - topo.col_of(links.from[lk]);
        };
        if (topo.kind == TopologyKind::Ring ||
            (dr(l) == dr(m) && dc(l) == dc(m))) {
          pred[l] = m;
          break;
        }
      }
    }
  }

  std::vector<GGeoSource> sources;
  std::vector<Rng> trial_rngs;
  sources.reserve(C);
  trial_rngs.reserve(C);
  for (int c = 0; c < C; ++c) {
    sources.emplace_back(config.classes[c].arrivals,
                         substream_seed(config.seed, c));
    trial_rngs.emplace_back(substream_seed(config.seed, 1'000'000 + c));
  }

  using HeapEntry = std::pair<uint64_t, int>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  for (int c = 0; c < C; ++c) {
    if (sources[c].next_slot() < config.horizon) {
      heap.emplace(sources[c].next_slot(), c);
    }
  }

  std::vector<Pkt> pool;
  std::vector<int> free_ids;
  auto alloc_pkt = [&]() -> int {
    if (!free_ids.empty()) {
      const int id = free_ids.back();
      free_ids.pop_back();
      pool[id] = Pkt{};
      return id;
    }
    pool.emplace_back();
    return static_cast<int>(pool.size()) - 1;
  };

  std::vector<LinkQueues> queues(L);
  std::vector<int> occupant(L, -1);
  std::vector<int> flying, kept, movers;

  const uint64_t cal_size = static_cast<uint64_t>(max_ret) + 2;
  std::vector<std::vector<int>> calendar(cal_size);

  NocSimStats st;
  st.horizon = config.horizon;
  st.warmup = config.warmup;
  st.seed = config.seed;
  st.classes.assign(C, NocClassStats{});
  st.loop_deflections.assign(loops.size(), 0);
  st.link_egress_occupancy.assign(L, 0.0);
  st.link_transfer_occupancy.assign(L, 0.0);
  st.link_reentry_occupancy.assign(L, 0.0);

  std::vector<double> lat_sums(C, 0.0), defl_sums(C, 0.0);
  std::vector<double> wait_eg_sums(C, 0.0);
  std::vector<uint64_t> wait_eg_counts(C, 0);
  std::vector<std::vector<uint32_t>> class_hist(
      C, std::vector<uint32_t>(kClassHist, 0));
  std::vector<uint32_t> global_hist(kGlobalHist, 0);
  double wait_tr_sum = 0.0, wait_re_sum = 0.0, wait_eg_sum = 0.0;
  uint64_t wait_tr_count = 0, wait_re_count = 0, wait_eg_count = 0;

  // Arrival gap accumulators for measured moments.
  std::vector<uint64_t> arr_count(C, 0), gap_count(C, 0), arr_prev(C, 0);
  std::vector<double> gap_sum(C, 0.0), gap_sumsq(C, 0.0);
  std::vector<bool> arr_have_prev(C, false);

  double latency_sum = 0.0;

  auto entry_link_of = [&](const Pkt& p) {
    return rt[p.cls].stages[p.stage].links->front();
  };

  for (uint64_t s = 0; s < config.horizon; ++s) {
    // Advance in-flight packets; a crossing that completes at the end of
    // slot s-1 either continues, exits, or faces its rejection trial.
    movers.clear();
    kept.clear();
    for (const int id : flying) {
      Pkt& p = pool[id];
      ++p.phase;
      if (p.phase >= P) {
        movers.push_back(id);
      } else {
        kept.push_back(id);
      }
    }
    for (const int id : movers) {
      Pkt& p = pool[id];
      const auto& lks = *rt[p.cls].stages[p.stage].links;
      occupant[lks[p.link_idx]] = -1;
    }
    for (const int id : movers) {
      Pkt& p = pool[id];
      const StageRuntime& stage = rt[p.cls].stages[p.stage];
      const auto& lks = *stage.links;
      if (p.link_idx + 1 < static_cast<int>(lks.size())) {
        ++p.link_idx;
        p.phase = 0;
        assert(occupant[lks[p.link_idx]] == -1);
        occupant[lks[p.link_idx]] = id;
        kept.push_back(id);
        continue;
      }
      // Segment exit at the end of slot s-1.
      const uint64_t e = s - 1;
      const bool final_stage =
          p.stage + 1 == static_cast<int>(rt[p.cls].stages.size());
      const bool accept =
          p.reserved || !trial_rngs[p.cls].bernoulli(stage.deflect_prob);
      if (!accept) {
        ++p.deflections;
        if (p.deflections >= config.max_deflections) p.reserved = true;
        if (e >= config.warmup) ++st.loop_deflections[stage.loop_id];
        p.phase = 0;
        p.link_idx = 0;
        calendar[(s + stage.ret_slots) % cal_size].push_back(id);
        continue;
      }
      if (!final_stage) {
        ++p.stage;
        p.link_idx = 0;
        p.phase = 0;
        p.enqueue = s;  // transfer queue join; eligible this slot
        queues[entry_link_of(p)].transfer.push_back(id);
        continue;
      }
      ++st.delivered;
      if (p.arrival >= config.warmup) {
        ++st.measured_delivered;
        const double latency = static_cast<double>(e - p.arrival + 1 + P);
        latency_sum += latency;
        lat_sums[p.cls] += latency;
        defl_sums[p.cls] += p.deflections;
        ++st.classes[p.cls].delivered;
        const int gb = std::min<int>(static_cast<int>(latency), kGlobalHist - 1);
        ++global_hist[gb];
        const int cb = std::min<int>(static_cast<int>(latency), kClassHist - 1);
        ++class_hist[p.cls][cb];
        if (config.collect_trace) {
          st.trace.push_back(TraceRecord{p.cls, p.arrival, e + 1,
                                         p.deflections});
        }
      }
      free_ids.push_back(id);
    }
    flying.swap(kept);

    // Return flights landing now join their re-entry queue.
    for (const int id : calendar[s % cal_size]) {
      Pkt& p = pool[id];
      p.enqueue = s;
      queues[entry_link_of(p)].reentry.push_back(id);
    }
    calendar[s % cal_size].clear();

    // Source arrivals, observed at slot start.
    while (!heap.empty() && heap.top().first == s) {
      const int c = heap.top().second;
      heap.pop();
      const uint32_t k = sources[c].take_batch();
      if (arr_have_prev[c]) {
        const double g = static_cast<double>(s - arr_prev[c]);
        gap_sum[c] += g;
        gap_sumsq[c] += g * g;
        ++gap_count[c];
      }
      gap_count[c] += k - 1;
      arr_count[c] += k;
      arr_prev[c] = s;
      arr_have_prev[c] = true;
      for (uint32_t i = 0; i < k; ++i) {
        const int id = alloc_pkt();
        Pkt& p = pool[id];
        p.cls = c;
        p.arrival = s;
        p.enqueue = s;
        p.stage = 0;
        queues[entry_link_of(p)].egress.push_back(id);
        ++st.injected;
      }
      if (sources[c].next_slot() < config.horizon) {
        heap.emplace(sources[c].next_slot(), c);
      }
    }

    // Per-link arbitration: re-entries, then transfers, then injections.
    for (int l = 0; l < L; ++l) {
      if (occupant[l] != -1) continue;
      if (P > 1 && pred[l] != -1) {
        const int up = occupant[pred[l]];
        // A packet mid-crossing upstream would claim this link before a
        // fresh entry finished; hold the slot for it.
        if (up != -1 && pool[up].phase >= 1) continue;
      }
      LinkQueues& q = queues[l];
      int id = -1;
      if (!q.reentry.empty()) {
        id = q.reentry.front();
        q.reentry.pop_front();
        if (s >= config.warmup) {
          wait_re_sum += static_cast<double>(s - pool[id].enqueue);
          ++wait_re_count;
        }
      } else if (!q.transfer.empty()) {
        id = q.transfer.front();
        q.transfer.pop_front();
        if (s >= config.warmup) {
          wait_tr_sum += static_cast<double>(s - pool[id].enqueue);
          ++wait_tr_count;
        }
      } else if (!q.egress.empty()) {
        id = q.egress.front();
        q.egress.pop_front();
        if (s >= config.warmup) {
          const double w = static_cast<double>(s - pool[id].enqueue);
          wait_eg_sum += w;
          ++wait_eg_count;
          wait_eg_sums[pool[id].cls] += w;
          ++wait_eg_counts[pool[id].cls];
        }
      } else {
        continue;
      }
      Pkt& p = pool[id];
      p.phase = 0;
      p.link_idx = 0;
      occupant[l] = id;
      flying.push_back(id);
    }

    if (config.check_work_conservation) {
      for (int l = 0; l < L; ++l) {
        if (occupant[l] != -1) continue;
        if (P > 1 && pred[l] != -1) {
          const int up = occupant[pred[l]];
          if (up != -1 && pool[up].phase >= 1) continue;
        }
        const LinkQueues& q = queues[l];
        if (!q.reentry.empty() || !q.transfer.empty() || !q.egress.empty()) {
          ++st.work_conservation_violations;
        }
      }
    }

    if (s >= config.warmup) {
      for (int l = 0; l < L; ++l) {
        st.link_egress_occupancy[l] += static_cast<double>(queues[l].egress.size());
        st.link_transfer_occupancy[l] +=
            static_cast<double>(queues[l].transfer.size());
        st.link_reentry_occupancy[l] +=
            static_cast<double>(queues[l].reentry.size());
      }
    }
  }

  const double window = static_cast<double>(config.horizon - config.warmup);
  for (int l = 0; l < L; ++l) {
    st.link_egress_occupancy[l] /= window;
    st.link_transfer_occupancy[l] /= window;
    st.link_reentry_occupancy[l] /= window;
  }
  for (int c = 0; c < C; ++c) {
    NocClassStats& cs = st.classes[c];
    if (cs.delivered) {
      cs.mean_latency = lat_sums[c] / static_cast<double>(cs.delivered);
      cs.mean_deflections = defl_sums[c] / static_cast<double>(cs.delivered);
      cs.p95_latency =
          percentile_from_hist(class_hist[c], cs.delivered, 0.95);
    }
    if (wait_eg_counts[c]) {
      cs.mean_wait_egress =
          wait_eg_sums[c] / static_cast<double>(wait_eg_counts[c]);
    }
    if (arr_count[c] >= 2 && gap_count[c] > 0) {
      cs.measured_arrivals.rate = static_cast<double>(arr_count[c]) /
                                  static_cast<double>(config.horizon);
      const double n = static_cast<double>(gap_count[c]);
      const double mean = gap_sum[c] / n;
      const double var = gap_sumsq[c] / n - mean * mean;
      cs.measured_arrivals.scv = mean > 0.0 ? var / (mean * mean) : 0.0;
    }
  }
  st.mean_latency =
      st.measured_delivered
          ? latency_sum / static_cast<double>(st.measured_delivered)
          : 0.0;
  st.p95_latency = percentile_from_hist(global_hist, st.measured_delivered, 0.95);
  st.mean_wait_egress =
      wait_eg_count ? wait_eg_sum / static_cast<double>(wait_eg_count) : 0.0;
  st.mean_wait_transfer =
      wait_tr_count ? wait_tr_sum / static_cast<double>(wait_tr_count) : 0.0;
  st.mean_wait_reentry =
      wait_re_count ? wait_re_sum / static_cast<double>(wait_re_count) : 0.0;

  uint64_t live = flying.size();
  for (const auto& q : queues) {
    live += q.egress.size() + q.transfer.size() + q.reentry.size();
  }
  for (const auto& bucket : calendar) live += bucket.size();
  st.live_end = live;
  return st;
}

bool replay_check(const NocSimConfig& config) {
  const NocSimStats a = run_noc_sim(config);
  const NocSimStats b = run_noc_sim(config);
  if (a.injected != b.injected || a.delivered != b.delivered ||
      a.live_end != b.live_end || a.mean_latency != b.mean_latency ||
      a.loop_deflections != b.loop_deflections) {
    return false;
  }
  for (size_t c = 0; c < a.classes.size(); ++c) {
    if (a.classes[c].delivered != b.classes[c].delivered ||
        a.classes[c].mean_latency != b.classes[c].mean_latency) {
      return false;
    }
  }
  return true;
}

}  // namespace noclat
