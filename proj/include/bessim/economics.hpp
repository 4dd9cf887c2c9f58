#ifndef BESSIM_ECONOMICS_HPP
#define BESSIM_ECONOMICS_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "bessim/types.hpp"

namespace bessim {

// Unit capital costs and the discount rate.
struct cost_model {
    double eur_per_kwh = 252.37;
    double eur_per_kw = 503.30;
    double discount_rate = 0.0558; // per year

    void validate() const {
        if (eur_per_kwh < 0.0 || eur_per_kw < 0.0 || discount_rate < 0.0)
            throw config_error("cost model: all fields must be >= 0");
    }
};

inline double battery_capital_cost(double e_nominal_kwh, double power_kw, const cost_model& m) {
    if (!(e_nominal_kwh > 0.0) || !(power_kw > 0.0))
        throw config_error("battery_capital_cost: sizes must be > 0");
    return e_nominal_kwh * m.eur_per_kwh + power_kw * m.eur_per_kw;
}

// Whole-life energy tallies a lifetime simulation accumulates; the inputs
// to the technical and economic indicators.
struct energy_tallies {
    double pv_to_load_kwh = 0.0;    // P_pv-L, measured on the DC bus
    double pv_to_battery_kwh = 0.0; // P_pv-bat
    double pv_total_kwh = 0.0;
    double load_total_kwh = 0.0;
    double export_dc_kwh = 0.0;
    double import_kwh = 0.0;          // with BESS
    double baseline_import_kwh = 0.0; // PV-only plant
    long grid_charge_steps = 0;       // diagnostic: charging beyond available PV
};

// Self-consumption ratio: PV used locally (direct + stored) over PV generated.
inline double scr(const energy_tallies& t) {
    if (!(t.pv_total_kwh > 0.0)) throw data_error("scr: pv_total is zero");
    return (t.pv_to_load_kwh + t.pv_to_battery_kwh) / t.pv_total_kwh;
}

// Self-sufficiency ratio: PV used locally over household demand.
inline double ssr(const energy_tallies& t) {
    if (!(t.load_total_kwh > 0.0)) throw data_error("ssr: load_total is zero");
    return (t.pv_to_load_kwh + t.pv_to_battery_kwh) / t.load_total_kwh;
}

// Discounted savings of one stretch of steps: (baseline import - import with
// BESS) priced at the tariff, discounted by whole completed years at each
// step's start. start_hours anchors the stretch on the simulation clock.
inline double discounted_savings(const std::vector<double>& baseline_import_kw,
                                 const std::vector<double>& import_kw,
                                 const std::vector<double>& price_eur_kwh, double t_s_h,
                                 double start_hours, double discount_rate) {
    if (baseline_import_kw.size() != import_kw.size() ||
        baseline_import_kw.size() != price_eur_kwh.size())
        throw data_error("discounted_savings: misaligned series");
    constexpr double hours_per_year = 365.0 * 24.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < import_kw.size(); ++k) {
        double hours = start_hours + static_cast<double>(k) * t_s_h;
        double years = std::floor(hours / hours_per_year);
        double saving = (baseline_import_kw[k] - import_kw[k]) * t_s_h * price_eur_kwh[k];
        acc += saving / std::pow(1.0 + discount_rate, years);
    }
    return acc;
}

// NPV over the battery's life: the capital outlay against the sum of
// already-discounted cash flows.
inline double npv(const std::vector<double>& dcf_series_eur, double capital_eur) {
    double acc = -capital_eur;
    for (double v : dcf_series_eur) acc += v;
    return acc;
}

// Discounted payback: first time the cumulative DCF reaches the capital,
// interpolated linearly inside the crossing window; nullopt when the life
// ends first.
inline std::optional<double> dpb(const std::vector<double>& dcf_series_eur,
                                 double window_duration_years, double capital_eur) {
    if (capital_eur <= 0.0) return 0.0;
    double cum = 0.0;
    for (std::size_t w = 0; w < dcf_series_eur.size(); ++w) {
        double next = cum + dcf_series_eur[w];
        if (next >= capital_eur) {
            double frac = dcf_series_eur[w] > 0.0 ? (capital_eur - cum) / dcf_series_eur[w] : 1.0;
            return (static_cast<double>(w) + frac) * window_duration_years;
        }
        cum = next;
    }
    return std::nullopt;
}

// Per-model report emitted by the experiments.
struct economic_report {
    double capital_eur = 0.0;
    double npv_eur = 0.0;
    std::optional<double> dpb_years; // nullopt = "never"
    double scr = 0.0;
    double ssr = 0.0;
    std::vector<double> dcf_series_eur; // one entry per optimization window
};

} // namespace bessim

#endif
