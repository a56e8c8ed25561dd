#include "noclat/noc_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace noclat {

namespace {

double rel_delta(double next, double cur) {
  return std::abs(next - cur) / std::max(1.0, std::abs(cur));
}

// Loads this close to unity are saturated for every practical purpose; the
// margin keeps borderline sums from slipping past the check on rounding.
constexpr double kSaturationMargin = 1e-9;

}  // namespace

MulticlassResult solve_multiclass(const MulticlassInput& input,
                                  const SolverOptions& options) {
  const int n = static_cast<int>(input.classes.size());
  if (n == 0) throw std::invalid_argument("need at least one class");
  for (const GGeoParams& g : input.classes) validate(g);
  if (input.service.mean < 1.0 || input.deflect_service.mean < 1.0) {
    throw std::invalid_argument("service means must be >= 1 cycle");
  }
  if (input.deflect_prob < 0.0 || input.deflect_prob >= 1.0) {
    throw std::invalid_argument("deflection probability must lie in [0,1)");
  }
  if (input.loop_return < 0.0) {
    throw std::invalid_argument("loop return time must be nonnegative");
  }

  const double t_i = input.service.mean;
  const double t_d = input.deflect_service.mean;
  const double p_d = input.deflect_prob;

  std::vector<double> rate(n), scv(n), rho(n);
  double rate_d = 0.0, rho_total = 0.0;
  for (int c = 0; c < n; ++c) {
    rate[c] = input.classes[c].rate;
    scv[c] = input.classes[c].scv;
    rho[c] = rate[c] * t_i;
    rho_total += rho[c];
    rate_d += deflected_rate(rate[c], p_d);
  }
  const double rho_d = rate_d * t_d;
  rho_total += rho_d;
  if (rho_total >= 1.0 - kSaturationMargin) {
    throw InstabilityError("shared server saturated: load " +
                           std::to_string(rho_total));
  }

  MulticlassResult res;
  res.wait.assign(n, 0.0);
  res.deflected_rate = rate_d;

  int clamps = 0;
  bool clamp_flag = false;
  auto count_clamp = [&]() {
    if (clamp_flag) {
      ++clamps;
      clamp_flag = false;
    }
  };
  auto lower_flows = [&](int from) {
    std::vector<PriorityFlow> lows;
    for (int c = from; c < n; ++c) lows.push_back({rate[c], t_i, 1.0, 0.0});
    return lows;
  };

  if (p_d == 0.0) {
    std::vector<PriorityFlow> higher;
    for (int c = 0; c < n; ++c) {
      const PriorityFlow own{rate[c], t_i, scv[c], 0.0};
      res.wait[c] = wait_priority_level(higher, own, lower_flows(c + 1),
                                        &clamp_flag, "shared server");
      count_clamp();
      higher.push_back({rate[c], t_i, scv[c], res.wait[c]});
    }
    res.wait_deflected = 0.0;
    res.deflected_scv = 1.0;
    res.iterations = 1;
    res.converged = true;
  } else {
    double scv_d = 1.0;
    double w_d = 0.0;
    std::vector<double> w(n, 0.0), occ(rho);
    double occ_d = rho_d;

    const double alpha = options.damping;
    int iter = 0;
    bool converged = false;
    std::vector<double> w_next(n), occ_next(n), that(n), cdep(n);
    while (iter < options.max_iterations) {
      ++iter;
      for (int c = 0; c < n; ++c) {
        double rho_other = rho_d;
        for (int o = 0; o < n; ++o) {
          if (o != c) rho_other += rho[o];
        }
        const double p0 = empty_prob(rho[c], rho_other, occ[c], &clamp_flag);
        count_clamp();
        that[c] = modified_service_mean(p0, rate[c]);
        const double rho_eff = rate[c] * that[c];
        const double chat =
            modified_service_scv(occ[c], rho_eff, scv[c], &clamp_flag);
        count_clamp();
        cdep[c] = departure_scv(rho_eff, scv[c], chat);
      }
      double rho_classes = 0.0;
      for (int c = 0; c < n; ++c) rho_classes += rho[c];
      const double p0_d = empty_prob(rho_d, rho_classes, occ_d, &clamp_flag);
      count_clamp();
      const double that_d = modified_service_mean(p0_d, rate_d);
      const double rho_eff_d = rate_d * that_d;
      const double chat_d =
          modified_service_scv(occ_d, rho_eff_d, scv_d, &clamp_flag);
      count_clamp();
      const double cdep_d = departure_scv(rho_eff_d, scv_d, chat_d);

      double num = rate_d * cdep_d;
      double den = rate_d;
      for (int c = 0; c < n; ++c) {
        num += rate[c] * cdep[c];
        den += rate[c];
      }
      const double scv_d_next = split_scv(num / den, p_d);

      const double w_d_next =
          wait_priority_level({}, {rate_d, t_d, scv_d_next, 0.0},
                              lower_flows(0), &clamp_flag, "retry queue");
      count_clamp();
      std::vector<PriorityFlow> higher{{rate_d, t_d, scv_d_next, w_d_next}};
      for (int c = 0; c < n; ++c) {
        const PriorityFlow own{rate[c], t_i, scv[c], 0.0};
        w_next[c] = wait_priority_level(higher, own, lower_flows(c + 1),
                                        &clamp_flag, "shared server");
        count_clamp();
        higher.push_back({rate[c], t_i, scv[c], w_next[c]});
      }
      for (int c = 0; c < n; ++c) occ_next[c] = rate[c] * (w_next[c] + that[c]);
      const double occ_d_next = rate_d * (w_d_next + that_d);

      double delta = std::max(rel_delta(scv_d_next, scv_d),
                              rel_delta(w_d_next, w_d));
      for (int c = 0; c < n; ++c) {
        delta = std::max(delta, rel_delta(w_next[c], w[c]));
        delta = std::max(delta, rel_delta(occ_next[c], occ[c]));
      }

      scv_d = (1.0 - alpha) * scv_d + alpha * scv_d_next;
      w_d = (1.0 - alpha) * w_d + alpha * w_d_next;
      for (int c = 0; c < n; ++c) {
        w[c] = (1.0 - alpha) * w[c] + alpha * w_next[c];
        occ[c] = (1.0 - alpha) * occ[c] + alpha * occ_next[c];
      }
      occ_d = (1.0 - alpha) * occ_d + alpha * occ_d_next;

      if (delta < options.tolerance) {
        converged = true;
        break;
      }
    }
    res.wait = w;
    res.wait_deflected = w_d;
    res.deflected_scv = scv_d;
    res.iterations = iter;
    res.converged = converged;
  }

  res.clamp_events = clamps;
  res.latency.assign(n, 0.0);
  const double n_d = expected_deflections(p_d);
  double lat_num = 0.0, lat_den = 0.0;
  for (int c = 0; c < n; ++c) {
    res.latency[c] = res.wait[c] + t_i +
                     n_d * (input.loop_return + res.wait_deflected + t_d);
    lat_num += rate[c] * res.latency[c];
    lat_den += rate[c];
  }
  res.mean_latency = lat_num / lat_den;
  return res;
}

NocModelResult solve_noc(const NocTopology& topo,
                         const std::vector<ClassTraffic>& classes,
                         const DeflectConfig& deflect,
                         const SolverOptions& options) {
  const double t_hop = static_cast<double>(topo.per_hop_latency);
  const auto loops = loops_of(topo, deflect);
  const LinkTable links = build_links(topo);
  const int num_links = links.count();

  std::vector<TrafficClassSpec> specs;
  specs.reserve(classes.size());
  for (const ClassTraffic& ct : classes) {
    validate(ct.arrivals);
    specs.push_back(ct.spec);
  }
  const auto routes = build_routes(topo, specs, loops, deflect);
  const int num_classes = static_cast<int>(classes.size());

  NocModelResult out;
  out.links.assign(num_links, LinkChain{});
  out.loops.reserve(loops.size());
  for (const DeflectionLoop& lp : loops) {
    LoopReport rep;
    rep.loop_id = lp.id;
    rep.loop_time = lp.loop_time;
    out.loops.push_back(rep);
  }
  if (num_classes == 0) return out;

  // Flow rates per link. Every crossing of a stage starts at the stage's
  // entry link via a queue; downstream positions are pure pass-through.
  std::vector<double> through(num_links, 0.0);
  std::vector<double> re_rate(num_links, 0.0), tr_rate(num_links, 0.0),
      eg_rate(num_links, 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const double lam = classes[c].spec.rate;
    for (size_t s = 0; s < routes[c].stages.size(); ++s) {
      const RouteStage& st = routes[c].stages[s];
      const double crossings = lam / (1.0 - st.deflect_prob);
      for (size_t i = 1; i < st.links.size(); ++i) {
        through[st.links[i]] += crossings * t_hop;
      }
      const int entry = st.entry_link();
      re_rate[entry] += deflected_rate(lam, st.deflect_prob);
      if (s == 0) {
        eg_rate[entry] += lam;
      } else {
        tr_rate[entry] += lam;
      }
    }
  }

  for (int l = 0; l < num_links; ++l) {
    const double util =
        through[l] + (re_rate[l] + tr_rate[l] + eg_rate[l]) * t_hop;
    out.links[l].through_load = through[l];
    out.links[l].utilization = util;
    out.diag.max_utilization = std::max(out.diag.max_utilization, util);
    if (util >= 1.0 - kSaturationMargin) {
      throw InstabilityError("saturated server: " + links.name(l) + " (load " +
                             std::to_string(util) + ")");
    }
  }

  // Standalone retry fixed point per class and stage: shapes the deflected
  // flow's gap SCV and the accepted flow carried past the exit.
  struct StageShape {
    double defl_scv = 1.0;
    double accept_scv = 1.0;
  };
  std::vector<std::vector<StageShape>> shapes(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    for (const RouteStage& st : routes[c].stages) {
      CanonicalInput ci;
      ci.arrivals = classes[c].arrivals;
      ci.service = {t_hop, 0.0};
      ci.deflect_service = {t_hop, 0.0};
      ci.deflect_prob = st.deflect_prob;
      const CanonicalResult res = solve_canonical(ci, options);
      ++out.diag.canonical_solves;
      out.diag.total_iterations += res.iterations;
      out.diag.converged = out.diag.converged && res.converged;
      out.diag.clamp_events += res.clamp_events;
      StageShape sh;
      sh.defl_scv = res.deflected_scv;
      sh.accept_scv = split_scv(res.merged_scv, 1.0 - st.deflect_prob);
      shapes[c].push_back(sh);
    }
  }

  // Rate-weighted arrival SCVs of the three queues at every link.
  std::vector<double> re_num(num_links, 0.0), tr_num(num_links, 0.0),
      eg_num(num_links, 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const double lam = classes[c].spec.rate;
    for (size_t s = 0; s < routes[c].stages.size(); ++s) {
      const RouteStage& st = routes[c].stages[s];
      const int entry = st.entry_link();
      re_num[entry] +=
          deflected_rate(lam, st.deflect_prob) * shapes[c][s].defl_scv;
      if (s == 0) {
        eg_num[entry] += lam * classes[c].arrivals.scv;
      } else {
        tr_num[entry] += lam * shapes[c][0].accept_scv;
      }
    }
  }

  bool clamp_flag = false;
  auto count_clamp = [&]() {
    if (clamp_flag) {
      ++out.diag.clamp_events;
      clamp_flag = false;
    }
  };
  for (int l = 0; l < num_links; ++l) {
    LinkChain& lc = out.links[l];
    lc.reentry_rate = re_rate[l];
    lc.transfer_rate = tr_rate[l];
    lc.egress_rate = eg_rate[l];
    lc.reentry_scv = re_rate[l] > 0.0 ? re_num[l] / re_rate[l] : 1.0;
    lc.transfer_scv = tr_rate[l] > 0.0 ? tr_num[l] / tr_rate[l] : 1.0;
    lc.egress_scv = eg_rate[l] > 0.0 ? eg_num[l] / eg_rate[l] : 1.0;

    const PriorityFlow thr{through[l] / t_hop, t_hop, 1.0, 0.0};
    lc.wait_reentry = wait_priority_level(
        {thr}, {re_rate[l], t_hop, lc.reentry_scv, 0.0},
        {{tr_rate[l], t_hop, 1.0, 0.0}, {eg_rate[l], t_hop, 1.0, 0.0}},
        &clamp_flag, links.name(l) + " reentry");
    count_clamp();
    lc.wait_transfer = wait_priority_level(
        {thr, {re_rate[l], t_hop, 1.0, lc.wait_reentry}},
        {tr_rate[l], t_hop, lc.transfer_scv, 0.0},
        {{eg_rate[l], t_hop, 1.0, 0.0}}, &clamp_flag,
        links.name(l) + " transfer");
    count_clamp();
    lc.wait_egress = wait_priority_level(
        {thr,
         {re_rate[l], t_hop, 1.0, lc.wait_reentry},
         {tr_rate[l], t_hop, 1.0, lc.wait_transfer}},
        {eg_rate[l], t_hop, lc.egress_scv, 0.0}, {}, &clamp_flag,
        links.name(l) + " egress");
    count_clamp();
  }

  // Per-class end-to-end assembly and per-loop deflection accounting.
  std::vector<double> loop_rate(loops.size(), 0.0);
  std::vector<double> loop_wait_num(loops.size(), 0.0);
  double lat_num = 0.0, lat_den = 0.0;
  out.classes.reserve(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const ClassRoute& route = routes[c];
    ClassPrediction pred;
    pred.spec = route.spec;
    pred.wait_egress = out.links[route.stages[0].entry_link()].wait_egress;
    double lat = pred.wait_egress +
                 static_cast<double>(route.spec.static_latency) + t_hop;
    if (route.stages.size() > 1) {
      pred.wait_transfer =
          out.links[route.stages[1].entry_link()].wait_transfer;
      lat += pred.wait_transfer;
    }
    for (const RouteStage& st : route.stages) {
      const double n_d = expected_deflections(st.deflect_prob);
      const double w_re = out.links[st.entry_link()].wait_reentry;
      lat += n_d * (static_cast<double>(loops[st.loop_id].loop_time) + w_re);
      pred.deflections += n_d;
      const double ev_rate = route.spec.rate * n_d;
      loop_rate[st.loop_id] += ev_rate;
      loop_wait_num[st.loop_id] += ev_rate * w_re;
    }
    pred.latency = lat;
    lat_num += route.spec.rate * lat;
    lat_den += route.spec.rate;
    out.classes.push_back(pred);
  }
  for (size_t i = 0; i < loops.size(); ++i) {
    out.loops[i].deflection_rate = loop_rate[i];
    out.loops[i].reentry_wait =
        loop_rate[i] > 0.0 ? loop_wait_num[i] / loop_rate[i] : 0.0;
  }
  out.mean_latency = lat_den > 0.0 ? lat_num / lat_den : 0.0;
  return out;
}

}  // namespace noclat
