#ifndef BESSIM_DEGRADATION_HPP
#define BESSIM_DEGRADATION_HPP

#include <cmath>
#include <vector>

#include "bessim/rainflow.hpp"
#include "bessim/types.hpp"

namespace bessim {

// Semi-empirical stress-factor model. Defaults are the LFP parameter set
// used throughout; k_t carries 1/s.
struct degradation_params {
    double alpha_sei = 5.75e-2;
    double beta_sei = 121.0;
    double k_temp = 6.93e-2;
    double k_dod_1 = 1.40e5;
    double k_dod_2 = -5.01e-1;
    double k_dod_3 = -1.23e5;
    double k_soc = 1.04;
    double k_time_per_s = 4.14e-10;
    double t_ref_c = 25.0;
    double sigma_ref = 0.5;

    void validate() const {
        if (!(alpha_sei > 0.0 && alpha_sei < 1.0)) throw config_error("degradation: alpha_sei must be in (0,1)");
        if (!(beta_sei > 0.0)) throw config_error("degradation: beta_sei must be > 0");
        if (!(k_time_per_s > 0.0)) throw config_error("degradation: k_time_per_s must be > 0");
    }
};

// Temperature stress, unity at the reference temperature. The difference
// term is in Celsius-sized increments, the ratio in Kelvin.
inline double stress_temperature(double t_b_c, const degradation_params& p) {
    double t_ref_k = p.t_ref_c + 273.15;
    double t_b_k = t_b_c + 273.15;
    return std::exp(p.k_temp * (t_b_c - p.t_ref_c) * (t_ref_k / t_b_k));
}

// Depth-of-discharge stress per cycle. Singular at dod = 0; callers filter
// zero-range cycles.
inline double stress_dod(double dod, const degradation_params& p) {
    if (!(dod > 0.0 && dod <= 1.0)) throw data_error("stress_dod: dod must be in (0,1]");
    return 1.0 / (p.k_dod_1 * std::pow(dod, p.k_dod_2) + p.k_dod_3);
}

// Mean-SOC stress, unity at the reference SOC.
inline double stress_soc(double sigma, const degradation_params& p) {
    return std::exp(p.k_soc * (sigma - p.sigma_ref));
}

// Cycling contribution of one period: rainflow-weighted sum of the combined
// stress factors.
inline double cycle_degradation(const std::vector<cycle_record>& cycles, double t_b_c,
                                const degradation_params& p) {
    double s_t = stress_temperature(t_b_c, p);
    double acc = 0.0;
    for (const auto& c : cycles)
        acc += c.weight * s_t * stress_dod(c.dod, p) * stress_soc(c.mean_soc, p);
    return acc;
}

// Calendar contribution: linear in elapsed time.
inline double calendar_degradation(double dt_s, double mean_sigma, double t_b_c,
                                   const degradation_params& p) {
    if (dt_s < 0.0) throw data_error("calendar_degradation: dt must be >= 0");
    return stress_temperature(t_b_c, p) * stress_soc(mean_sigma, p) * p.k_time_per_s * dt_s;
}

// Two-exponential SEI capacity-loss curve; maps [0,inf) onto [0,1).
inline double capacity_loss(double f_b, const degradation_params& p) {
    if (f_b < 0.0) throw data_error("capacity_loss: f_b must be >= 0");
    return 1.0 - p.alpha_sei * std::exp(-p.beta_sei * f_b) - (1.0 - p.alpha_sei) * std::exp(-f_b);
}

// Rolling degradation state carried between optimization windows.
struct degradation_state {
    double f_b = 0.0;                // cumulative degradation factor
    double loss = 0.0;               // L, fraction of nominal capacity
    double e_b_kwh = 0.0;            // current degraded capacity
    double c_bd_eur_kwh = 0.0;       // degradation cost applied to discharge
    double discharged_total_kwh = 0.0;
    double elapsed_s = 0.0;

    static degradation_state initial(const battery_spec& battery, double capital_eur) {
        degradation_state s;
        s.e_b_kwh = battery.e_nominal_kwh;
        s.c_bd_eur_kwh = initial_degradation_cost(battery, capital_eur);
        return s;
    }

    // Initial degradation cost: battery cost spread over the warranted
    // discharge energy.
    static double initial_degradation_cost(const battery_spec& battery, double capital_eur) {
        if (!(battery.warranted_throughput_kwh > 0.0))
            throw config_error("initial_degradation_cost: warranted_throughput_kwh must be > 0");
        return capital_eur / battery.warranted_throughput_kwh;
    }
};

// Advances the state by one optimization period: accumulates cycle and
// calendar fade, re-derives capacity, and refreshes the degradation cost
// from the battery life consumed so far. With zero cumulative discharge the
// previous cost is kept (the ratio is undefined).
inline degradation_state advance_state(const degradation_state& state,
                                       const std::vector<cycle_record>& cycles, double dt_s,
                                       double t_b_c, double mean_sigma, double discharged_kwh,
                                       const battery_spec& battery, double capital_eur,
                                       const degradation_params& params) {
    if (!(dt_s > 0.0)) throw data_error("advance_state: dt must be > 0");
    degradation_state next = state;
    next.f_b += cycle_degradation(cycles, t_b_c, params) +
                calendar_degradation(dt_s, mean_sigma, t_b_c, params);
    next.loss = capacity_loss(next.f_b, params);
    next.e_b_kwh = (1.0 - next.loss) * battery.e_nominal_kwh;
    next.discharged_total_kwh += discharged_kwh;
    next.elapsed_s += dt_s;
    double f_bd = next.loss / (1.0 - battery.soh_eol);
    if (next.discharged_total_kwh > 0.0)
        next.c_bd_eur_kwh = f_bd * capital_eur / next.discharged_total_kwh;
    return next;
}

} // namespace bessim

#endif
