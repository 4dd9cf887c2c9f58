#ifndef BESSIM_DISPATCH_HPP
#define BESSIM_DISPATCH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bessim/piecewise.hpp"
#include "bessim/series.hpp"
#include "bessim/types.hpp"

namespace bessim {

// One optimization window of the dispatch MILP (Eqs of the power model):
// per step a DC-bus balance, an AC-bus balance, the inverter conversion
// couplings, the SOC recursion, and direction-gated box constraints; the
// objective prices grid imports plus degraded battery energy.
struct window_problem {
    std::vector<double> pv_kw;
    std::vector<double> load_kw;
    std::vector<double> price_eur_kwh;
    double t_s_h = 1.0;
    inverter_spec inverter;
    grid_spec grid;
    battery_spec battery;
    double e_b_kwh = 0.0;       // degraded capacity in force this window
    double c_bd_eur_kwh = 0.0;  // constant degradation cost for this window
    double soc_init_kwh = 0.0;

    std::size_t size() const { return pv_kw.size(); }
    double soc_min_kwh() const { return battery.soc_min_frac * e_b_kwh; }
    double soc_max_kwh() const { return battery.soc_max_frac * e_b_kwh; }
    double sqrt_eta() const { return std::sqrt(battery.eta_roundtrip); }
};

inline window_problem build_window_problem(const series_frame& window,
                                           const inverter_spec& inverter, const grid_spec& grid,
                                           const battery_spec& battery, double e_b_kwh,
                                           double c_bd_eur_kwh, double soc_init_kwh) {
    if (window.size() == 0) throw data_error("build_window_problem: zero-length window");
    inverter.validate();
    grid.validate();
    battery.validate();
    window_problem p;
    p.pv_kw = window.pv_dc_kw;
    p.load_kw = window.load_ac_kw;
    p.price_eur_kwh = window.price_eur_kwh;
    p.t_s_h = window.res.step_hours();
    p.inverter = inverter;
    p.grid = grid;
    p.battery = battery;
    p.e_b_kwh = e_b_kwh;
    p.c_bd_eur_kwh = c_bd_eur_kwh;
    p.soc_init_kwh = soc_init_kwh;
    const double tol = 1e-9 * (1.0 + e_b_kwh);
    if (soc_init_kwh < p.soc_min_kwh() - tol || soc_init_kwh > p.soc_max_kwh() + tol)
        throw solve_error("build_window_problem: soc_init out of bounds");
    return p;
}

// Per-step power flows and state of the accepted solution. Sign
// conventions: P_FP <= 0, P_TP >= 0 (DC side of the inverter);
// P_FPac >= 0, P_TPac <= 0; P_FG >= 0 import, P_TG <= 0 export;
// P_FS >= 0 discharge, P_TS <= 0 charge.
struct dispatch_solution {
    std::vector<double> p_fp_kw, p_tp_kw;
    std::vector<double> p_fpac_kw, p_tpac_kw;
    std::vector<double> p_fg_kw, p_tg_kw;
    std::vector<double> p_fs_kw, p_ts_kw;
    std::vector<double> soc_kwh; // SOC_k after step k
    std::vector<int> i_p, i_g, i_s;
    double objective_eur = 0.0;
    bool optimal = true;
    double gap = 0.0;

    std::size_t size() const { return p_fg_kw.size(); }

    void resize(std::size_t n) {
        p_fp_kw.assign(n, 0.0); p_tp_kw.assign(n, 0.0);
        p_fpac_kw.assign(n, 0.0); p_tpac_kw.assign(n, 0.0);
        p_fg_kw.assign(n, 0.0); p_tg_kw.assign(n, 0.0);
        p_fs_kw.assign(n, 0.0); p_ts_kw.assign(n, 0.0);
        soc_kwh.assign(n, 0.0);
        i_p.assign(n, 1); i_g.assign(n, 1); i_s.assign(n, 1);
    }
};

namespace detail {

inline double ac_out(double x_dc, double eta) { return x_dc >= 0.0 ? eta * x_dc : x_dc / eta; }
// inverse of ac_out
inline double dc_for_ac(double y_ac, double eta) { return y_ac >= 0.0 ? y_ac / eta : y_ac * eta; }

inline double chop(double v) { return std::fabs(v) < 1e-12 ? 0.0 : v; }

// Net battery DC power b (discharge > 0) to SOC change over the step, and
// back. Charging stores b*sqrt(eta), discharging drains b/sqrt(eta).
inline double dsoc_of_b(double b_kw, double sr, double t_s) {
    return b_kw >= 0.0 ? -b_kw * t_s / sr : -b_kw * sr * t_s;
}
inline double b_of_dsoc(double dsoc_kwh, double sr, double t_s) {
    return dsoc_kwh <= 0.0 ? -dsoc_kwh * sr / t_s : -dsoc_kwh / (sr * t_s);
}

// Feasible net-battery-power interval for one step, with the constraint
// family that produced each end (for infeasibility reports).
struct step_interval {
    double b_lo = 0.0, b_hi = 0.0;
    std::string lo_family, hi_family;
    bool feasible = true;
};

inline step_interval step_feasible_b(const window_problem& p, std::size_t k) {
    const double eta = p.inverter.eta_inv;
    const double pv = p.pv_kw[k], load = p.load_kw[k];
    const double x_lo = std::max(p.inverter.p_dc_min_kw, -p.inverter.p_ac_max_kw * eta);
    const double x_hi = std::min(p.inverter.p_dc_max_kw, p.inverter.p_ac_max_kw / eta);

    step_interval iv;
    iv.b_lo = -(-p.battery.p_charge_max_kw);
    iv.lo_family = "battery_power";
    iv.b_hi = p.battery.p_discharge_max_kw;
    iv.hi_family = "battery_power";

    auto raise_lo = [&](double v, const char* fam) {
        if (v > iv.b_lo) { iv.b_lo = v; iv.lo_family = fam; }
    };
    auto lower_hi = [&](double v, const char* fam) {
        if (v < iv.b_hi) { iv.b_hi = v; iv.hi_family = fam; }
    };
    raise_lo(x_lo - pv, "inverter_limit");
    lower_hi(x_hi - pv, "inverter_limit");
    // import cap: load - ac_out(pv+b) <= p_import_max
    raise_lo(dc_for_ac(load - p.grid.p_import_max_kw, eta) - pv, "grid_import_cap");
    // export cap: load - ac_out(pv+b) >= p_export_max
    lower_hi(dc_for_ac(load - p.grid.p_export_max_kw, eta) - pv, "grid_export_cap");

    if (iv.b_lo > iv.b_hi + 1e-9) iv.feasible = false;
    if (iv.b_lo > iv.b_hi) iv.b_lo = iv.b_hi; // close FP slivers
    return iv;
}

inline double step_cost_of_b(const window_problem& p, std::size_t k, double b) {
    const double eta = p.inverter.eta_inv;
    double g = p.load_kw[k] - ac_out(p.pv_kw[k] + b, eta);
    return p.t_s_h * (p.price_eur_kwh[k] * std::max(0.0, g) +
                      p.c_bd_eur_kwh * std::max(0.0, b));
}

// Writes the step's fully determined flows for a chosen net battery power.
inline void reconstruct_step(const window_problem& p, std::size_t k, double b, double soc_prev,
                             dispatch_solution& out) {
    const double eta = p.inverter.eta_inv;
    double p_fs = chop(std::max(0.0, b));
    double p_ts = chop(std::min(0.0, b));
    double x = p.pv_kw[k] + p_fs + p_ts;
    double p_tp = chop(std::max(0.0, x));
    double p_fp = chop(std::min(0.0, x));
    double p_fpac = eta * p_tp;
    double p_tpac = p_fp / eta;
    double g = p.load_kw[k] - p_fpac - p_tpac;
    double p_fg = chop(std::max(0.0, g));
    double p_tg = chop(std::min(0.0, g));

    out.p_fs_kw[k] = p_fs;
    out.p_ts_kw[k] = p_ts;
    out.p_tp_kw[k] = p_tp;
    out.p_fp_kw[k] = p_fp;
    out.p_fpac_kw[k] = p_fpac;
    out.p_tpac_kw[k] = p_tpac;
    out.p_fg_kw[k] = p_fg;
    out.p_tg_kw[k] = p_tg;
    out.i_p[k] = p_fp < 0.0 ? 0 : 1;
    out.i_g[k] = p_tg < 0.0 ? 0 : 1;
    out.i_s[k] = p_ts < 0.0 ? 0 : 1;
    double sr = p.sqrt_eta();
    out.soc_kwh[k] = soc_prev + (-p_ts) * sr * p.t_s_h - p_fs * p.t_s_h / sr;
}

} // namespace detail

// Recomputes the objective of a solution under this window's prices and
// degradation cost (the comparison metric between policies).
inline double objective_of(const window_problem& p, const dispatch_solution& s) {
    double obj = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        obj += s.p_fg_kw[k] * p.t_s_h * p.price_eur_kwh[k] +
               s.p_fs_kw[k] * p.t_s_h * p.c_bd_eur_kwh;
    return obj;
}

// ---------------------------------------------------------------------------
// verification

struct residual_report {
    struct family {
        std::string name;
        double max_residual = 0.0; // kW (energy families scaled by 1/t_s)
    };
    std::vector<family> families;
    bool pass = false;

    double worst() const {
        double w = 0.0;
        for (const auto& f : families) w = std::max(w, f.max_residual);
        return w;
    }
    double residual(const std::string& name) const {
        for (const auto& f : families)
            if (f.name == name) return f.max_residual;
        return 0.0;
    }
};

// Evaluates every constraint family of the window MILP on a candidate
// solution. Reporting only; callers decide what to do with failures.
inline residual_report verify_solution(const window_problem& p, const dispatch_solution& s,
                                       double tol_kw = 1e-6) {
    residual_report r;
    auto& fam = r.families;
    fam.resize(10);
    fam[0].name = "dc_balance";
    fam[1].name = "ac_balance";
    fam[2].name = "conversion";
    fam[3].name = "soc_recursion";
    fam[4].name = "inverter_box";
    fam[5].name = "grid_box";
    fam[6].name = "battery_box";
    fam[7].name = "soc_bounds";
    fam[8].name = "binary_integrality";
    fam[9].name = "complementarity";

    const double eta = p.inverter.eta_inv;
    const double sr = p.sqrt_eta();
    const double smin = p.soc_min_kwh(), smax = p.soc_max_kwh();
    auto bump = [&](int i, double v) { fam[i].max_residual = std::max(fam[i].max_residual, v); };

    double soc_prev = p.soc_init_kwh;
    for (std::size_t k = 0; k < p.size(); ++k) {
        bump(0, std::fabs(s.p_fp_kw[k] + s.p_tp_kw[k] - p.pv_kw[k] - s.p_fs_kw[k] - s.p_ts_kw[k]));
        bump(1, std::fabs(s.p_fpac_kw[k] + s.p_tpac_kw[k] + s.p_fg_kw[k] + s.p_tg_kw[k] - p.load_kw[k]));
        bump(2, std::fabs(s.p_fpac_kw[k] - eta * s.p_tp_kw[k]));
        bump(2, std::fabs(s.p_tpac_kw[k] - s.p_fp_kw[k] / eta));
        double soc_pred = soc_prev + (-s.p_ts_kw[k]) * sr * p.t_s_h - s.p_fs_kw[k] * p.t_s_h / sr;
        bump(3, std::fabs(s.soc_kwh[k] - soc_pred) / p.t_s_h);
        soc_prev = s.soc_kwh[k];

        double ip = s.i_p[k], ig = s.i_g[k], is = s.i_s[k];
        bump(4, std::max(0.0, p.inverter.p_dc_min_kw * (1.0 - ip) - s.p_fp_kw[k]));
        bump(4, std::max(0.0, s.p_fp_kw[k]));
        bump(4, std::max(0.0, -s.p_tp_kw[k]));
        bump(4, std::max(0.0, s.p_tp_kw[k] - p.inverter.p_dc_max_kw * ip));
        bump(4, std::max(0.0, -s.p_fpac_kw[k]));
        bump(4, std::max(0.0, s.p_fpac_kw[k] - p.inverter.p_ac_max_kw * ip));
        bump(4, std::max(0.0, -p.inverter.p_ac_max_kw * (1.0 - ip) - s.p_tpac_kw[k]));
        bump(4, std::max(0.0, s.p_tpac_kw[k]));
        bump(5, std::max(0.0, -s.p_fg_kw[k]));
        bump(5, std::max(0.0, s.p_fg_kw[k] - p.grid.p_import_max_kw * ig));
        bump(5, std::max(0.0, p.grid.p_export_max_kw * (1.0 - ig) - s.p_tg_kw[k]));
        bump(5, std::max(0.0, s.p_tg_kw[k]));
        bump(6, std::max(0.0, -s.p_fs_kw[k]));
        bump(6, std::max(0.0, s.p_fs_kw[k] - p.battery.p_discharge_max_kw * is));
        bump(6, std::max(0.0, p.battery.p_charge_max_kw * (1.0 - is) - s.p_ts_kw[k]));
        bump(6, std::max(0.0, s.p_ts_kw[k]));
        bump(7, std::max(0.0, smin - s.soc_kwh[k]) / p.t_s_h);
        bump(7, std::max(0.0, s.soc_kwh[k] - smax) / p.t_s_h);
        bump(8, std::fabs(ip - std::round(ip)) + ((s.i_p[k] == 0 || s.i_p[k] == 1) ? 0.0 : 1.0));
        bump(8, (s.i_g[k] == 0 || s.i_g[k] == 1) ? 0.0 : 1.0);
        bump(8, (s.i_s[k] == 0 || s.i_s[k] == 1) ? 0.0 : 1.0);
        bump(9, std::min(std::max(0.0, s.p_fs_kw[k]), std::max(0.0, -s.p_ts_kw[k])));
        bump(9, std::min(std::max(0.0, s.p_fg_kw[k]), std::max(0.0, -s.p_tg_kw[k])));
        bump(9, std::min(std::max(0.0, s.p_tp_kw[k]), std::max(0.0, -s.p_fp_kw[k])));
    }
    r.pass = r.worst() <= tol_kw;
    return r;
}

// ---------------------------------------------------------------------------
// policies

struct baseline_import {
    std::vector<double> import_kw; // P^PV_FG
    int capped_steps = 0;          // steps where load exceeded the contracted power
};

// Grid import of the PV-only plant (no battery): deliverable PV is capped by
// the inverter, the rest of the load imports.
inline baseline_import baseline_import_no_battery(const std::vector<double>& pv_kw,
                                                  const std::vector<double>& load_kw,
                                                  const inverter_spec& inverter,
                                                  const grid_spec& grid) {
    if (pv_kw.empty() || pv_kw.size() != load_kw.size())
        throw data_error("baseline_import_no_battery: bad window");
    baseline_import out;
    out.import_kw.reserve(pv_kw.size());
    for (std::size_t k = 0; k < pv_kw.size(); ++k) {
        double deliverable = std::min(pv_kw[k] * inverter.eta_inv, inverter.p_ac_max_kw);
        double imp = std::max(0.0, load_kw[k] - deliverable);
        if (imp > grid.p_import_max_kw) {
            imp = grid.p_import_max_kw;
            ++out.capped_steps;
        }
        out.import_kw.push_back(imp);
    }
    return out;
}

// Self-consumption-maximizing rule-based policy: PV serves the load first,
// surplus charges the battery, the rest exports; deficits discharge the
// battery before importing; the battery never charges from the grid. The
// result satisfies every window constraint or the window is infeasible.
inline dispatch_solution greedy_self_consumption_dispatch(const window_problem& p) {
    const double eta = p.inverter.eta_inv;
    const double sr = p.sqrt_eta();
    const double t_s = p.t_s_h;
    const double smin = p.soc_min_kwh(), smax = p.soc_max_kwh();
    const double x_hi = std::min(p.inverter.p_dc_max_kw, p.inverter.p_ac_max_kw / eta);
    const double c_max = -p.battery.p_charge_max_kw;
    const double d_max = p.battery.p_discharge_max_kw;

    dispatch_solution s;
    s.resize(p.size());
    double soc = p.soc_init_kwh;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double pv = p.pv_kw[k], load = p.load_kw[k];
        double charge_room = std::min(c_max, std::max(0.0, (smax - soc) / (sr * t_s)));
        double b;
        double pv_ac_potential = detail::ac_out(std::min(pv, x_hi), eta);
        if (pv_ac_potential >= load) {
            // surplus: everything beyond the load's DC draw goes to the battery
            double c = std::min(std::max(0.0, pv - load / eta), charge_room);
            double x = pv - c;
            if (x > x_hi) {
                // inverter cannot pass the remainder through; charge harder
                c = std::min(c + (x - x_hi), charge_room);
                x = pv - c;
                if (x > x_hi + 1e-9)
                    throw solve_error("greedy: infeasible at step " + std::to_string(k) +
                                      " (inverter_limit, PV not absorbable)");
            }
            double g = load - detail::ac_out(x, eta);
            if (g < p.grid.p_export_max_kw) {
                // export cap binding: absorb more into the battery if possible
                double x_allowed = detail::dc_for_ac(load - p.grid.p_export_max_kw, eta);
                c = std::min(c + (x - x_allowed), charge_room);
                x = pv - c;
                if (load - detail::ac_out(x, eta) < p.grid.p_export_max_kw - 1e-9)
                    throw solve_error("greedy: infeasible at step " + std::to_string(k) +
                                      " (grid_export_cap)");
            }
            b = -c;
        } else {
            // deficit: discharge toward full load coverage
            double mandatory_charge = std::max(0.0, pv - x_hi); // PV overflow must be stored
            if (mandatory_charge > 0.0) {
                if (mandatory_charge > charge_room + 1e-9)
                    throw solve_error("greedy: infeasible at step " + std::to_string(k) +
                                      " (inverter_limit, PV not absorbable)");
                b = -mandatory_charge;
            } else {
                double discharge_room = std::min(d_max, std::max(0.0, (soc - smin) * sr / t_s));
                double d = std::min({std::max(0.0, load / eta - pv), discharge_room,
                                     std::max(0.0, x_hi - pv)});
                b = d;
            }
            double g = load - detail::ac_out(pv + b, eta);
            if (g > p.grid.p_import_max_kw + 1e-9)
                throw solve_error("greedy: infeasible at step " + std::to_string(k) +
                                  " (grid_import_cap)");
        }
        detail::reconstruct_step(p, k, b, soc, s);
        soc = std::clamp(s.soc_kwh[k], smin, smax);
        s.soc_kwh[k] = soc;
    }
    s.objective_eur = objective_of(p, s);
    s.optimal = false;
    s.gap = std::numeric_limits<double>::quiet_NaN();
    return s;
}

} // namespace bessim

#endif
