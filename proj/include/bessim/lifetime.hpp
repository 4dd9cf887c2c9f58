#ifndef BESSIM_LIFETIME_HPP
#define BESSIM_LIFETIME_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "bessim/degradation.hpp"
#include "bessim/dispatch.hpp"
#include "bessim/economics.hpp"
#include "bessim/rainflow.hpp"
#include "bessim/series.hpp"
#include "bessim/solver.hpp"

namespace bessim {

enum class dispatch_policy { optimal, greedy };

inline const char* to_string(dispatch_policy p) {
    return p == dispatch_policy::optimal ? "optimal" : "greedy";
}

struct lifetime_config {
    int window_days = 7;
    resolution res{60};
    int max_years = 30; // safety cap
    dispatch_policy policy = dispatch_policy::optimal;

    void validate() const {
        if (window_days < 1) throw config_error("lifetime: window_days must be >= 1");
        if (max_years <= 0) throw config_error("lifetime: max_years must be > 0");
    }
};

struct window_log_entry {
    long window_index = 0;
    double elapsed_years_end = 0.0;
    double objective_eur = 0.0;
    double import_kwh = 0.0;
    double baseline_import_kwh = 0.0;
    double discharged_kwh = 0.0;
    double cycles_weighted = 0.0;
    double f_b = 0.0;       // state after the window
    double loss = 0.0;
    double e_b_kwh = 0.0;
    double c_bd_eur_kwh = 0.0;
    double soc_end_kwh = 0.0;
    double savings_eur = 0.0; // undiscounted window savings
    double dcf_eur = 0.0;
};

enum class stop_reason { end_of_life, max_years_cap };

// Weighted cycle counts binned by depth of discharge, bin width 0.01.
constexpr std::size_t dod_histogram_bins = 100;

struct lifetime_result {
    double t_eol_years = 0.0;
    stop_reason reason = stop_reason::end_of_life;
    long windows_run = 0;
    energy_tallies tallies;
    std::vector<double> dcf_series_eur;          // one per window, whole life
    std::vector<window_log_entry> window_log;    // windows run in this call
    std::vector<double> dod_histogram = std::vector<double>(dod_histogram_bins, 0.0);
    double total_cycles_weighted = 0.0;
    degradation_state final_state;
    double final_soc_kwh = 0.0;
};

// Resumable simulation state; every accumulator the summary needs.
struct lifetime_checkpoint {
    long next_window = 0;
    double soc_kwh = 0.0;
    degradation_state state;
    energy_tallies tallies;
    std::vector<double> dcf_series_eur;
    std::vector<double> dod_histogram = std::vector<double>(dod_histogram_bins, 0.0);
    double total_cycles_weighted = 0.0;
};

struct flow_attribution {
    double pv_to_load_kwh = 0.0;
    double pv_to_battery_kwh = 0.0;
    double import_kwh = 0.0;
    double export_dc_kwh = 0.0;
    long grid_charge_steps = 0;
};

// Deterministic PV attribution on the DC bus: battery charge is sourced
// from PV first, then PV serves the load through the inverter, the
// remainder is export-bound. The split sums to the PV exactly.
inline flow_attribution attribute_flows(const window_problem& p, const dispatch_solution& s) {
    flow_attribution a;
    const double eta = p.inverter.eta_inv;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double pv = p.pv_kw[k];
        double charge = -s.p_ts_kw[k];
        double to_battery = std::min(charge, pv);
        if (charge > pv + 1e-9) ++a.grid_charge_steps;
        double load_draw_dc = std::min(s.p_fpac_kw[k], p.load_kw[k]) / eta;
        double to_load = std::min(pv - to_battery, load_draw_dc);
        double to_export = pv - to_battery - to_load;
        a.pv_to_battery_kwh += to_battery * p.t_s_h;
        a.pv_to_load_kwh += to_load * p.t_s_h;
        a.export_dc_kwh += to_export * p.t_s_h;
        a.import_kwh += s.p_fg_kw[k] * p.t_s_h;
    }
    return a;
}

namespace detail {

// Cyclic slice of the source year starting at a global step offset.
inline series_frame slice_cyclic(const series_frame& year, long long offset, std::size_t count) {
    series_frame w;
    w.res = year.res;
    w.utc_offset_min = year.utc_offset_min;
    long long n = static_cast<long long>(year.size());
    w.start_epoch_s = year.start_epoch_s + (offset % n) * 60LL * year.res.step_minutes;
    w.pv_dc_kw.reserve(count);
    w.load_ac_kw.reserve(count);
    w.price_eur_kwh.reserve(count);
    if (year.has_temperature()) w.battery_temp_c.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t k = static_cast<std::size_t>((offset + static_cast<long long>(i)) % n);
        w.pv_dc_kw.push_back(year.pv_dc_kw[k]);
        w.load_ac_kw.push_back(year.load_ac_kw[k]);
        w.price_eur_kwh.push_back(year.price_eur_kwh[k]);
        if (year.has_temperature()) w.battery_temp_c.push_back(year.battery_temp_c[k]);
    }
    return w;
}

} // namespace detail

struct lifetime_hooks {
    std::function<void(const window_log_entry&)> on_window; // streaming log
};

// Whole-life loop: rolling windows over the recycled year, dispatch by
// policy, rainflow over the window's SOC trace, degradation update, state
// carried forward; stops at end of life (loss >= 1 - SOH_EOL) or at the
// max_years cap.
inline lifetime_result simulate_lifetime(const series_frame& year, const inverter_spec& inverter,
                                         const grid_spec& grid, const battery_spec& battery,
                                         const degradation_params& params,
                                         const lifetime_config& cfg, const solver_config& solver_cfg,
                                         double capital_eur, double discount_rate,
                                         const lifetime_hooks& hooks = {},
                                         const lifetime_checkpoint* resume = nullptr) {
    cfg.validate();
    params.validate();
    battery.validate();
    year.validate();
    if (year.res != cfg.res)
        throw config_error("simulate_lifetime: data resolution " +
                           std::to_string(year.res.step_minutes) + " min does not match configured " +
                           std::to_string(cfg.res.step_minutes) + " min");
    const std::size_t steps_per_window =
        static_cast<std::size_t>(cfg.window_days) * 24 * 60 / static_cast<std::size_t>(cfg.res.step_minutes);
    if (year.size() < steps_per_window)
        throw data_error("simulate_lifetime: data covers less than one window");

    const double window_hours = static_cast<double>(steps_per_window) * cfg.res.step_hours();
    const double window_seconds = window_hours * 3600.0;
    constexpr double seconds_per_year = 365.0 * 24.0 * 3600.0;
    const double eol_loss = 1.0 - battery.soh_eol;

    lifetime_result r;
    degradation_state state;
    double soc;
    long w0;
    if (resume) {
        state = resume->state;
        soc = resume->soc_kwh;
        w0 = resume->next_window;
        r.tallies = resume->tallies;
        r.dcf_series_eur = resume->dcf_series_eur;
        r.dod_histogram = resume->dod_histogram;
        r.total_cycles_weighted = resume->total_cycles_weighted;
    } else {
        state = degradation_state::initial(battery, capital_eur);
        soc = 0.5 * battery.e_nominal_kwh; // midpoint of the allowed band
        w0 = 0;
    }

    for (long w = w0;; ++w) {
        double e_b = state.e_b_kwh;
        double smin = battery.soc_min_frac * e_b, smax = battery.soc_max_frac * e_b;
        soc = std::clamp(soc, smin, smax); // capacity fade can squeeze the carried SOC

        series_frame win = detail::slice_cyclic(year, static_cast<long long>(w) * steps_per_window,
                                                steps_per_window);
        window_problem prob =
            build_window_problem(win, inverter, grid, battery, e_b, state.c_bd_eur_kwh, soc);

        dispatch_solution sol;
        try {
            sol = cfg.policy == dispatch_policy::optimal ? solve(prob, solver_cfg)
                                                         : greedy_self_consumption_dispatch(prob);
        } catch (const solve_error& e) {
            throw solve_error("window " + std::to_string(w) + ": " + e.what());
        }

        flow_attribution flows = attribute_flows(prob, sol);
        baseline_import base = baseline_import_no_battery(win.pv_dc_kw, win.load_ac_kw, inverter, grid);

        // rainflow over the SOC trace in fractions of nominal capacity,
        // window-boundary SOC included
        std::vector<double> trace;
        trace.reserve(steps_per_window + 1);
        trace.push_back(soc / battery.e_nominal_kwh);
        for (double v : sol.soc_kwh) trace.push_back(v / battery.e_nominal_kwh);
        std::vector<cycle_record> cycles = extract_cycles(trace);
        double mean_sigma = std::accumulate(trace.begin(), trace.end(), 0.0) /
                            static_cast<double>(trace.size());
        double t_b = 25.0;
        if (win.has_temperature())
            t_b = std::accumulate(win.battery_temp_c.begin(), win.battery_temp_c.end(), 0.0) /
                  static_cast<double>(win.battery_temp_c.size());

        double discharged = 0.0, imported = 0.0, base_import = 0.0;
        for (std::size_t k = 0; k < steps_per_window; ++k) {
            discharged += sol.p_fs_kw[k] * prob.t_s_h;
            imported += sol.p_fg_kw[k] * prob.t_s_h;
            base_import += base.import_kw[k] * prob.t_s_h;
        }

        state = advance_state(state, cycles, window_seconds, t_b, mean_sigma, discharged, battery,
                              capital_eur, params);

        double start_hours = static_cast<double>(w) * window_hours;
        double dcf = discounted_savings(base.import_kw, sol.p_fg_kw, win.price_eur_kwh, prob.t_s_h,
                                        start_hours, discount_rate);
        double savings = 0.0;
        for (std::size_t k = 0; k < steps_per_window; ++k)
            savings += (base.import_kw[k] - sol.p_fg_kw[k]) * prob.t_s_h * win.price_eur_kwh[k];

        for (std::size_t k = 0; k < steps_per_window; ++k) {
            r.tallies.pv_total_kwh += win.pv_dc_kw[k] * prob.t_s_h;
            r.tallies.load_total_kwh += win.load_ac_kw[k] * prob.t_s_h;
        }
        r.tallies.pv_to_load_kwh += flows.pv_to_load_kwh;
        r.tallies.pv_to_battery_kwh += flows.pv_to_battery_kwh;
        r.tallies.export_dc_kwh += flows.export_dc_kwh;
        r.tallies.import_kwh += imported;
        r.tallies.baseline_import_kwh += base_import;
        r.tallies.grid_charge_steps += flows.grid_charge_steps;
        r.dcf_series_eur.push_back(dcf);
        for (const auto& c : cycles) {
            std::size_t bin = std::min(dod_histogram_bins - 1,
                                       static_cast<std::size_t>(c.dod * dod_histogram_bins));
            r.dod_histogram[bin] += c.weight;
            r.total_cycles_weighted += c.weight;
        }

        soc = sol.soc_kwh.back();
        ++r.windows_run;

        window_log_entry log;
        log.window_index = w;
        log.elapsed_years_end = state.elapsed_s / seconds_per_year;
        log.objective_eur = sol.objective_eur;
        log.import_kwh = imported;
        log.baseline_import_kwh = base_import;
        log.discharged_kwh = discharged;
        log.cycles_weighted = std::accumulate(cycles.begin(), cycles.end(), 0.0,
                                              [](double a, const cycle_record& c) { return a + c.weight; });
        log.f_b = state.f_b;
        log.loss = state.loss;
        log.e_b_kwh = state.e_b_kwh;
        log.c_bd_eur_kwh = state.c_bd_eur_kwh;
        log.soc_end_kwh = soc;
        log.savings_eur = savings;
        log.dcf_eur = dcf;
        r.window_log.push_back(log);
        if (hooks.on_window) hooks.on_window(log);

        if (state.loss >= eol_loss) {
            r.reason = stop_reason::end_of_life;
            break;
        }
        if (state.elapsed_s >= static_cast<double>(cfg.max_years) * seconds_per_year) {
            r.reason = stop_reason::max_years_cap;
            break;
        }
    }
    r.t_eol_years = state.elapsed_s / seconds_per_year;
    r.final_state = state;
    r.final_soc_kwh = soc;
    return r;
}

} // namespace bessim

#endif
