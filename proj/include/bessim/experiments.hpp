#ifndef BESSIM_EXPERIMENTS_HPP
#define BESSIM_EXPERIMENTS_HPP

#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bessim/economics.hpp"
#include "bessim/lifetime.hpp"
#include "bessim/series.hpp"

namespace bessim {

struct model_size {
    double e_kwh = 0.0;
    double power_kw = 0.0;
};

using model_catalog = std::vector<model_size>;

// The ten candidate models: commercial sizes 5..21.7 kWh plus hypothetical
// small ones following the same power-to-energy pattern.
inline model_catalog default_catalog() {
    return {{1.0, 0.5}, {2.0, 1.0},  {3.0, 1.5},  {4.0, 2.0},  {5.0, 2.5},
            {6.9, 3.5}, {10.0, 5.0}, {13.8, 7.0}, {15.0, 5.0}, {21.7, 10.5}};
}

// Battery parameters shared across the catalog; per-model energy and power
// come from the catalog entry.
struct battery_defaults {
    double eta_roundtrip = 0.94;
    double soc_min_frac = 0.2;
    double soc_max_frac = 0.8;
    double soh_eol = 0.8;
    double warranted_full_cycles = 8000.0; // over the usable SOC window

    battery_spec make(const model_size& m) const {
        battery_spec b;
        b.e_nominal_kwh = m.e_kwh;
        b.p_discharge_max_kw = m.power_kw;
        b.p_charge_max_kw = -m.power_kw;
        b.eta_roundtrip = eta_roundtrip;
        b.soc_min_frac = soc_min_frac;
        b.soc_max_frac = soc_max_frac;
        b.soh_eol = soh_eol;
        b.warranted_throughput_kwh =
            warranted_full_cycles * (soc_max_frac - soc_min_frac) * m.e_kwh;
        return b;
    }
};

struct plant_spec {
    inverter_spec inverter;
    grid_spec grid;
};

// One catalog entry's outcome: lifetime summary plus the economics, or the
// failure that stopped it.
struct sweep_entry {
    model_size model;
    int resolution_min = 0;
    dispatch_policy policy = dispatch_policy::optimal;
    bool failed = false;
    std::string failure;

    double t_eol_years = 0.0;
    stop_reason reason = stop_reason::end_of_life;
    long windows_run = 0;
    double scr = 0.0;
    double ssr = 0.0;
    energy_tallies tallies;
    economic_report econ;
    double f_b_final = 0.0;
    double total_cycles_weighted = 0.0;
    std::vector<double> dod_histogram;
};

struct sweep_report {
    std::vector<sweep_entry> entries;     // catalog order
    std::vector<std::size_t> ranking;     // by NPV desc; failed entries last
    std::optional<std::size_t> selected;  // argmax NPV among completed models
};

namespace detail {

// Runs f(i) for i in [0, n) on up to `jobs` workers; completion order is
// irrelevant because each index writes its own slot.
template <typename F>
inline void parallel_for(std::size_t n, int jobs, F&& f) {
    std::size_t workers = static_cast<std::size_t>(std::max(1, jobs));
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& t : pool) t.join();
}

inline sweep_entry run_model(const series_frame& year, const plant_spec& plant,
                             const model_size& model, const battery_defaults& defaults,
                             const degradation_params& params, const lifetime_config& cfg,
                             const solver_config& solver_cfg, const cost_model& cost) {
    sweep_entry e;
    e.model = model;
    e.resolution_min = cfg.res.step_minutes;
    e.policy = cfg.policy;
    try {
        battery_spec battery = defaults.make(model);
        double capital = battery_capital_cost(model.e_kwh, model.power_kw, cost);
        lifetime_result r =
            simulate_lifetime(year, plant.inverter, plant.grid, battery, params, cfg, solver_cfg,
                              capital, cost.discount_rate);
        e.t_eol_years = r.t_eol_years;
        e.reason = r.reason;
        e.windows_run = r.windows_run;
        e.tallies = r.tallies;
        e.scr = scr(r.tallies);
        e.ssr = ssr(r.tallies);
        e.f_b_final = r.final_state.f_b;
        e.total_cycles_weighted = r.total_cycles_weighted;
        e.dod_histogram = r.dod_histogram;
        e.econ.capital_eur = capital;
        e.econ.dcf_series_eur = r.dcf_series_eur;
        e.econ.npv_eur = npv(r.dcf_series_eur, capital);
        double window_years = static_cast<double>(cfg.window_days) / 365.0;
        e.econ.dpb_years = dpb(r.dcf_series_eur, window_years, capital);
        e.econ.scr = e.scr;
        e.econ.ssr = e.ssr;
    } catch (const std::exception& ex) {
        e.failed = true;
        e.failure = ex.what();
    }
    return e;
}

inline void rank_entries(sweep_report& rep) {
    rep.ranking.resize(rep.entries.size());
    for (std::size_t i = 0; i < rep.ranking.size(); ++i) rep.ranking[i] = i;
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(), [&](std::size_t a, std::size_t b) {
        const sweep_entry& ea = rep.entries[a];
        const sweep_entry& eb = rep.entries[b];
        if (ea.failed != eb.failed) return !ea.failed;
        if (ea.failed) return a < b;
        if (ea.econ.npv_eur != eb.econ.npv_eur) return ea.econ.npv_eur > eb.econ.npv_eur;
        return ea.model.e_kwh < eb.model.e_kwh; // ties toward the smaller battery
    });
    rep.selected.reset();
    if (!rep.ranking.empty() && !rep.entries[rep.ranking[0]].failed) rep.selected = rep.ranking[0];
}

} // namespace detail

// Case 1: run every catalog model through its whole life and rank by NPV.
// Per-model failures are recorded, not fatal.
inline sweep_report size_sweep(const series_frame& year, const plant_spec& plant,
                               const model_catalog& catalog, const battery_defaults& defaults,
                               const degradation_params& params, const lifetime_config& cfg,
                               const solver_config& solver_cfg, const cost_model& cost,
                               int jobs = 1) {
    if (catalog.empty()) throw config_error("size_sweep: empty catalog");
    sweep_report rep;
    rep.entries.resize(catalog.size());
    detail::parallel_for(catalog.size(), jobs, [&](std::size_t i) {
        rep.entries[i] =
            detail::run_model(year, plant, catalog[i], defaults, params, cfg, solver_cfg, cost);
    });
    detail::rank_entries(rep);
    return rep;
}

// Case 2: one model across coarser resamplings of the base data. The first
// resolution is the reference for the deltas the report writer computes.
inline sweep_report resolution_sensitivity(const series_frame& base, const plant_spec& plant,
                                           const model_size& model, const battery_defaults& defaults,
                                           const degradation_params& params, lifetime_config cfg,
                                           const solver_config& solver_cfg, const cost_model& cost,
                                           const std::vector<int>& resolutions_min = {5, 15, 30, 60},
                                           int jobs = 1) {
    if (resolutions_min.empty()) throw config_error("resolution_sensitivity: no resolutions");
    std::vector<series_frame> frames;
    frames.reserve(resolutions_min.size());
    for (int m : resolutions_min) frames.push_back(resample(base, resolution::of(m)));
    sweep_report rep;
    rep.entries.resize(frames.size());
    detail::parallel_for(frames.size(), jobs, [&](std::size_t i) {
        lifetime_config c = cfg;
        c.res = frames[i].res;
        rep.entries[i] =
            detail::run_model(frames[i], plant, model, defaults, params, c, solver_cfg, cost);
    });
    detail::rank_entries(rep);
    return rep;
}

// Case 3: cost-optimal dispatch against the self-consumption-maximizing
// policy on the same model; entry 0 optimal, entry 1 greedy.
inline sweep_report compare_hems(const series_frame& year, const plant_spec& plant,
                                 const model_size& model, const battery_defaults& defaults,
                                 const degradation_params& params, lifetime_config cfg,
                                 const solver_config& solver_cfg, const cost_model& cost,
                                 int jobs = 1) {
    sweep_report rep;
    rep.entries.resize(2);
    detail::parallel_for(2, jobs, [&](std::size_t i) {
        lifetime_config c = cfg;
        c.policy = i == 0 ? dispatch_policy::optimal : dispatch_policy::greedy;
        rep.entries[i] =
            detail::run_model(year, plant, model, defaults, params, c, solver_cfg, cost);
    });
    detail::rank_entries(rep);
    return rep;
}

} // namespace bessim

#endif
