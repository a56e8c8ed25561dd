#include "noclat/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace noclat {

namespace {

void note_clamp(bool* flag) {
  if (flag) *flag = true;
}

void check_prob(double p, const char* what) {
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument(std::string(what) +
                                " must lie in [0,1), got " +
                                std::to_string(p));
  }
}

}  // namespace

double expected_deflections(double p_d) {
  check_prob(p_d, "deflection probability");
  return p_d / (1.0 - p_d);
}

double deflected_rate(double rate, double p_d) {
  check_prob(p_d, "deflection probability");
  if (rate < 0.0) throw std::invalid_argument("rate must be nonnegative");
  return rate * p_d / (1.0 - p_d);
}

double empty_prob(double rho_own, double rho_other, double occupancy,
                  bool* clamped) {
  if (rho_own < 0.0 || rho_other < 0.0 || occupancy < 0.0) {
    throw std::invalid_argument("loads and occupancy must be nonnegative");
  }
  if (rho_own + rho_other >= 1.0) {
    throw InstabilityError("empty probability undefined at load " +
                           std::to_string(rho_own + rho_other));
  }
  const double denom = occupancy + rho_own + rho_other;
  double p = 1.0 - rho_own;
  if (denom > 0.0) p -= rho_other * occupancy / denom;
  if (p < 0.0) {
    p = 0.0;
    note_clamp(clamped);
  } else if (p > 1.0) {
    p = 1.0;
    note_clamp(clamped);
  }
  return p;
}

double modified_service_mean(double p_empty, double rate) {
  if (rate <= 0.0) throw std::invalid_argument("rate must be positive");
  return (1.0 - p_empty) / rate;
}

double modified_service_scv(double occupancy, double rho_eff, double scv_arr,
                            bool* clamped) {
  if (rho_eff <= 0.0) return 0.0;
  const double num =
      (1.0 - rho_eff) * (2.0 * occupancy + rho_eff) - rho_eff * scv_arr;
  double scv = num / (rho_eff * rho_eff);
  if (scv < 0.0) {
    scv = 0.0;
    note_clamp(clamped);
  }
  return scv;
}

double departure_scv(double rho, double scv_arr, double scv_svc) {
  return (1.0 - rho * rho) * scv_arr + rho * rho * scv_svc;
}

double merge_scv(double rate_a, double scv_a, double rate_b, double scv_b) {
  const double total = rate_a + rate_b;
  if (total <= 0.0) throw std::invalid_argument("merged rate must be positive");
  return (rate_a * scv_a + rate_b * scv_b) / total;
}

double split_scv(double scv, double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("split probability must lie in [0,1]");
  }
  return 1.0 + p * (scv - 1.0);
}

double wait_deflected(double rho_d, double t_d, double rho_i, double t_i,
                      double scv_d, double rate_d, bool* clamped) {
  if (rate_d <= 0.0) return 0.0;
  if (rho_d >= 1.0) {
    throw InstabilityError("retry queue saturated (load " +
                           std::to_string(rho_d) + ")");
  }
  const double num = rho_d * (t_d - 1.0) + rho_i * (t_i - 1.0) +
                     t_d * (scv_d + rate_d - 1.0);
  double w = num / (2.0 * (1.0 - rho_d));
  if (w < 0.0) {
    w = 0.0;
    note_clamp(clamped);
  }
  return w;
}

double wait_class(double rho_d, double t_d, double wait_d, double rho_i,
                  double t_i, double scv_i, double rate_i, bool* clamped) {
  if (rate_i <= 0.0) return 0.0;
  if (rho_i + rho_d >= 1.0) {
    throw InstabilityError("class queue saturated (load " +
                           std::to_string(rho_i + rho_d) + ")");
  }
  const double num = rho_d * (t_d + 1.0) + 2.0 * rho_d * wait_d +
                     rho_i * (t_i - 1.0) + t_i * (scv_i + rate_i - 1.0);
  double w = num / (2.0 * (1.0 - rho_i - rho_d));
  if (w < 0.0) {
    w = 0.0;
    note_clamp(clamped);
  }
  return w;
}

double wait_priority_level(const std::vector<PriorityFlow>& higher,
                           const PriorityFlow& own,
                           const std::vector<PriorityFlow>& lower,
                           bool* clamped, const std::string& server_name) {
  if (own.rate <= 0.0) return 0.0;
  double num = 0.0;
  double rho_above = 0.0;
  for (const PriorityFlow& h : higher) {
    const double rho = h.rate * h.mean_service;
    rho_above += rho;
    num += rho * (h.mean_service + 1.0) + 2.0 * rho * h.wait;
  }
  for (const PriorityFlow& l : lower) {
    num += l.rate * l.mean_service * (l.mean_service - 1.0);
  }
  const double rho_own = own.rate * own.mean_service;
  num += rho_own * (own.mean_service - 1.0) +
         own.mean_service * (own.scv_arrival + own.rate - 1.0);
  const double denom = 2.0 * (1.0 - rho_above - rho_own);
  if (denom <= 0.0) {
    throw InstabilityError("saturated server: " + server_name + " (load " +
                           std::to_string(rho_above + rho_own) + ")");
  }
  double w = num / denom;
  if (w < 0.0) {
    w = 0.0;
    note_clamp(clamped);
  }
  return w;
}

CanonicalResult solve_canonical(const CanonicalInput& input,
                                const SolverOptions& options) {
  validate(input.arrivals);
  if (input.service.mean < 1.0 || input.deflect_service.mean < 1.0) {
    throw std::invalid_argument("service means must be >= 1 cycle");
  }
  check_prob(input.deflect_prob, "deflection probability");

  const double rate_i = input.arrivals.rate;
  const double scv_i = input.arrivals.scv;
  const double t_i = input.service.mean;
  const double t_d = input.deflect_service.mean;
  const double p_d = input.deflect_prob;
  const double rate_d = deflected_rate(rate_i, p_d);
  const double rho_i = rate_i * t_i;
  const double rho_d = rate_d * t_d;
  if (rho_i + rho_d >= 1.0) {
    throw InstabilityError("canonical system saturated: load " +
                           std::to_string(rho_i + rho_d));
  }

  CanonicalResult res;
  res.deflected_rate = rate_d;

  int clamps = 0;
  bool clamp_flag = false;
  auto count_clamp = [&]() {
    if (clamp_flag) {
      ++clamps;
      clamp_flag = false;
    }
  };

  if (p_d == 0.0) {
    // Single pass: the retry flow is empty, so the chain has no feedback.
    res.wait_defl = 0.0;
    res.wait_class =
        wait_class(0.0, t_d, 0.0, rho_i, t_i, scv_i, rate_i, &clamp_flag);
    count_clamp();
    res.empty_prob = 1.0 - rho_i;
    res.mod_service = {t_i, 0.0};
    res.occupancy = rate_i * (res.wait_class + t_i);
    res.occupancy_defl = 0.0;
    res.mod_service.scv =
        modified_service_scv(res.occupancy, rho_i, scv_i, &clamp_flag);
    count_clamp();
    res.mod_service_defl = {t_d, 0.0};
    res.depart_scv_class = departure_scv(rho_i, scv_i, res.mod_service.scv);
    res.depart_scv_defl = 1.0;
    res.merged_scv = res.depart_scv_class;
    res.deflected_scv = 1.0;
    res.iterations = 1;
    res.converged = true;
    res.clamp_events = clamps;
    return res;
  }

  // Fixed-point state.
  double scv_d = 1.0;       // retry-flow gap SCV
  double w_i = 0.0;         // class wait
  double w_d = 0.0;         // retry wait
  double occ_i = rho_i;     // class occupancy
  double occ_d = rho_d;     // retry occupancy

  double that_i = t_i, that_d = t_d;
  double chat_i = 0.0, chat_d = 0.0;
  double p0_i = 1.0 - rho_i - rho_d, p0_d = p0_i;
  double cd_i = scv_i, cd_d = 1.0, cm = scv_i;

  const double alpha = options.damping;
  int iter = 0;
  bool converged = false;
  while (iter < options.max_iterations) {
    ++iter;
    p0_i = empty_prob(rho_i, rho_d, occ_i, &clamp_flag);
    count_clamp();
    that_i = modified_service_mean(p0_i, rate_i);
    const double rho_eff_i = rate_i * that_i;
    chat_i = modified_service_scv(occ_i, rho_eff_i, scv_i, &clamp_flag);
    count_clamp();

    p0_d = empty_prob(rho_d, rho_i, occ_d, &clamp_flag);
    count_clamp();
    that_d = modified_service_mean(p0_d, rate_d);
    const double rho_eff_d = rate_d * that_d;
    chat_d = modified_service_scv(occ_d, rho_eff_d, scv_d, &clamp_flag);
    count_clamp();

    cd_i = departure_scv(rho_eff_i, scv_i, chat_i);
    cd_d = departure_scv(rho_eff_d, scv_d, chat_d);
    cm = merge_scv(rate_d, cd_d, rate_i, cd_i);
    const double scv_d_next = split_scv(cm, p_d);

    const double w_d_next =
        wait_deflected(rho_d, t_d, rho_i, t_i, scv_d_next, rate_d, &clamp_flag);
    count_clamp();
    const double w_i_next =
        wait_class(rho_d, t_d, w_d_next, rho_i, t_i, scv_i, rate_i,
                   &clamp_flag);
    count_clamp();
    const double occ_i_next = rate_i * (w_i_next + that_i);
    const double occ_d_next = rate_d * (w_d_next + that_d);

    auto rel = [](double next, double cur) {
      return std::abs(next - cur) / std::max(1.0, std::abs(cur));
    };
    const double delta =
        std::max({rel(scv_d_next, scv_d), rel(w_i_next, w_i),
                  rel(w_d_next, w_d), rel(occ_i_next, occ_i)});

    scv_d = (1.0 - alpha) * scv_d + alpha * scv_d_next;
    w_i = (1.0 - alpha) * w_i + alpha * w_i_next;
    w_d = (1.0 - alpha) * w_d + alpha * w_d_next;
    occ_i = (1.0 - alpha) * occ_i + alpha * occ_i_next;
    occ_d = (1.0 - alpha) * occ_d + alpha * occ_d_next;

    if (delta < options.tolerance) {
      converged = true;
      break;
    }
  }

  res.deflected_scv = scv_d;
  res.empty_prob = p0_i;
  res.mod_service = {that_i, chat_i};
  res.mod_service_defl = {that_d, chat_d};
  res.occupancy = occ_i;
  res.occupancy_defl = occ_d;
  res.depart_scv_class = cd_i;
  res.depart_scv_defl = cd_d;
  res.merged_scv = cm;
  res.wait_defl = w_d;
  res.wait_class = w_i;
  res.iterations = iter;
  res.converged = converged;
  res.clamp_events = clamps;
  return res;
}

}  // namespace noclat
