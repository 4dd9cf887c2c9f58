#ifndef BESSIM_SOLVER_HPP
#define BESSIM_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "bessim/dispatch.hpp"
#include "bessim/piecewise.hpp"
#include "bessim/types.hpp"

namespace bessim {

namespace detail {

// Cost of one step as a convex piecewise-linear function of the SOC change.
// Once a direction binary fixes each flow pair one-sided, every flow of the
// step is determined by the SOC change alone, so sampling the cost at the
// kink abscissae is exact. Non-convex samples cannot occur with
// nonnegative prices and zero export revenue; construction throws if the
// model is ever fed data violating that.
inline convex_pwl step_cost_of_dsoc(const window_problem& p, std::size_t k,
                                    const step_interval& iv) {
    const double sr = p.sqrt_eta();
    const double eta = p.inverter.eta_inv;
    std::vector<double> bs;
    bs.reserve(5);
    bs.push_back(iv.b_lo);
    auto add_interior = [&](double b) {
        if (b > iv.b_lo && b < iv.b_hi) bs.push_back(b);
    };
    add_interior(0.0);                              // battery + degradation-cost kink
    add_interior(-p.pv_kw[k]);                      // inverter direction kink
    add_interior(p.load_kw[k] / eta - p.pv_kw[k]);  // import starts/stops
    bs.push_back(iv.b_hi);
    std::sort(bs.begin(), bs.end());

    // ascending in dsoc = descending in b
    std::vector<double> xs, vs;
    xs.reserve(bs.size());
    vs.reserve(bs.size());
    for (auto it = bs.rbegin(); it != bs.rend(); ++it) {
        xs.push_back(dsoc_of_b(*it, sr, p.t_s_h));
        vs.push_back(step_cost_of_b(p, k, *it));
    }
    return convex_pwl::from_samples(xs, vs);
}

} // namespace detail

// Dispatches one window to optimality. The engine runs an exact backward
// value sweep over convex piecewise-linear cost-to-go functions of the SOC
// (the window problem is convex once each step's flows are parameterized by
// its SOC change), then recovers the flow trajectory forward. The reported
// gap is therefore zero. If the per-window time limit trips, the greedy
// policy's feasible dispatch is returned flagged non-optimal.
inline dispatch_solution solve(const window_problem& p, const solver_config& cfg) {
    cfg.validate();
    const std::size_t n = p.size();
    if (n == 0) throw data_error("solve: zero-length window");
    const double smin = p.soc_min_kwh(), smax = p.soc_max_kwh();
    if (smin > smax) throw solve_error("solve: infeasible (soc_bounds contradictory)");
    const auto t_start = std::chrono::steady_clock::now();
    auto time_left = [&]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() <
               cfg.time_limit_s;
    };

    // per-step envelopes
    std::vector<convex_pwl> psi(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto iv = detail::step_feasible_b(p, k);
        if (!iv.feasible)
            throw solve_error("solve: infeasible at step " + std::to_string(k) + " (" +
                              iv.lo_family + " conflicts with " + iv.hi_family + ")");
        psi[k] = detail::step_cost_of_dsoc(p, k, iv);
    }

    // Backward sweep with block checkpoints; w[k] = cost-to-go before step k
    // as a function of soc_{k-1}. Only block-boundary functions persist.
    const std::size_t block = 64;
    const std::size_t n_blocks = (n + block - 1) / block;
    std::vector<convex_pwl> checkpoint(n_blocks + 1);
    convex_pwl w = convex_pwl::from_samples({smin, smax}, {0.0, 0.0});
    checkpoint[n_blocks] = w;
    auto sweep_step = [&](std::size_t k, const convex_pwl& next) {
        convex_pwl conv = convex_pwl::inf_convolve(psi[k].negate_arg(), next);
        auto restricted = convex_pwl::restrict_to(conv, smin, smax);
        if (!restricted)
            throw solve_error("solve: infeasible at step " + std::to_string(k) +
                              " (soc_bounds unreachable)");
        restricted->compact(1e-14, 1e-12);
        return *restricted;
    };
    for (std::size_t k = n; k-- > 0;) {
        if (!time_left()) {
            dispatch_solution fb = greedy_self_consumption_dispatch(p);
            fb.optimal = false;
            fb.gap = std::numeric_limits<double>::infinity();
            return fb;
        }
        w = sweep_step(k, w);
        if (k % block == 0) checkpoint[k / block] = w;
    }
    {
        const double tol = 1e-9 * (1.0 + p.e_b_kwh);
        if (p.soc_init_kwh < w.lo() - tol || p.soc_init_kwh > w.hi() + tol)
            throw solve_error("solve: infeasible (no trajectory from soc_init)");
    }

    // Forward recovery, rebuilding each block's value functions from its
    // end checkpoint.
    dispatch_solution s;
    s.resize(n);
    double soc = std::clamp(p.soc_init_kwh, w.lo(), w.hi());
    std::vector<convex_pwl> local;
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
        std::size_t kb = blk * block;
        std::size_t ke = std::min(n, kb + block);
        local.assign(ke - kb + 1, convex_pwl());
        local[ke - kb] = checkpoint[blk + 1];
        for (std::size_t k = ke; k-- > kb + 1;) local[k - kb] = sweep_step(k, local[k - kb + 1]);
        for (std::size_t k = kb; k < ke; ++k) {
            const convex_pwl& next = local[k - kb + 1];
            // cost-to-go as a function of this step's dsoc at the current soc
            std::vector<double> knots = next.knots();
            for (double& x : knots) x -= soc;
            convex_pwl future = convex_pwl::from_samples(knots, next.values());
            auto h = convex_pwl::add(psi[k], future);
            if (!h)
                throw solve_error("solve: internal inconsistency at step " + std::to_string(k));
            auto m = h->minimum(0.0);
            double b = detail::b_of_dsoc(m.x, p.sqrt_eta(), p.t_s_h);
            detail::reconstruct_step(p, k, b, soc, s);
            soc = std::clamp(s.soc_kwh[k], next.lo(), next.hi());
            s.soc_kwh[k] = soc;
        }
    }
    s.objective_eur = objective_of(p, s);
    s.optimal = true;
    s.gap = 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// LP-format dump of the full MILP (external-solver debugging)

inline void dump_lp(const window_problem& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("dump_lp: cannot open " + path);
    const std::size_t n = p.size();
    const double eta = p.inverter.eta_inv;
    const double sr = p.sqrt_eta();
    char buf[256];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    out << "\\ window MILP: grid cost + degradation cost, " << n << " steps\n";
    out << "Minimize\n obj:";
    for (std::size_t k = 0; k < n; ++k) {
        out << " + " << num(p.price_eur_kwh[k] * p.t_s_h) << " PFG_" << k;
        out << " + " << num(p.c_bd_eur_kwh * p.t_s_h) << " PFS_" << k;
    }
    out << "\nSubject To\n";
    for (std::size_t k = 0; k < n; ++k) {
        std::string i = std::to_string(k);
        out << " dc_" << i << ": PFP_" << i << " + PTP_" << i << " - PFS_" << i << " - PTS_" << i
            << " = " << num(p.pv_kw[k]) << "\n";
        out << " ac_" << i << ": PFPac_" << i << " + PTPac_" << i << " + PFG_" << i << " + PTG_"
            << i << " = " << num(p.load_kw[k]) << "\n";
        out << " cvf_" << i << ": PFPac_" << i << " - " << num(eta) << " PTP_" << i << " = 0\n";
        out << " cvt_" << i << ": PTPac_" << i << " - " << num(1.0 / eta) << " PFP_" << i
            << " = 0\n";
        // SOC_k - SOC_{k-1} + ts*sr*PTS_k + (ts/sr)*PFS_k = 0
        out << " soc_" << i << ": SOC_" << i;
        if (k > 0) out << " - SOC_" << (k - 1);
        out << " + " << num(p.t_s_h * sr) << " PTS_" << i << " + " << num(p.t_s_h / sr) << " PFS_"
            << i << " = " << (k == 0 ? num(p.soc_init_kwh) : "0") << "\n";
        // direction gates
        out << " g7_" << i << ": PFP_" << i << " - " << num(p.inverter.p_dc_min_kw) << " ip_" << i
            << " >= " << num(p.inverter.p_dc_min_kw) << "\n";
        out << " g8_" << i << ": PTP_" << i << " - " << num(p.inverter.p_dc_max_kw) << " ip_" << i
            << " <= 0\n";
        out << " g9_" << i << ": PFPac_" << i << " - " << num(p.inverter.p_ac_max_kw) << " ip_"
            << i << " <= 0\n";
        out << " g10_" << i << ": PTPac_" << i << " + " << num(p.inverter.p_ac_max_kw) << " ip_"
            << i << " >= " << num(-p.inverter.p_ac_max_kw) << "\n";
        out << " g11_" << i << ": PFG_" << i << " - " << num(p.grid.p_import_max_kw) << " ig_" << i
            << " <= 0\n";
        out << " g12_" << i << ": PTG_" << i << " - " << num(p.grid.p_export_max_kw) << " ig_" << i
            << " >= " << num(p.grid.p_export_max_kw) << "\n";
        out << " g13_" << i << ": PFS_" << i << " - " << num(p.battery.p_discharge_max_kw)
            << " is_" << i << " <= 0\n";
        out << " g14_" << i << ": PTS_" << i << " - " << num(p.battery.p_charge_max_kw) << " is_"
            << i << " >= " << num(p.battery.p_charge_max_kw) << "\n";
    }
    out << "Bounds\n";
    for (std::size_t k = 0; k < n; ++k) {
        std::string i = std::to_string(k);
        out << " " << num(p.inverter.p_dc_min_kw) << " <= PFP_" << i << " <= 0\n";
        out << " 0 <= PTP_" << i << " <= " << num(p.inverter.p_dc_max_kw) << "\n";
        out << " 0 <= PFPac_" << i << " <= " << num(p.inverter.p_ac_max_kw) << "\n";
        out << " " << num(-p.inverter.p_ac_max_kw) << " <= PTPac_" << i << " <= 0\n";
        out << " 0 <= PFG_" << i << " <= " << num(p.grid.p_import_max_kw) << "\n";
        out << " " << num(p.grid.p_export_max_kw) << " <= PTG_" << i << " <= 0\n";
        out << " 0 <= PFS_" << i << " <= " << num(p.battery.p_discharge_max_kw) << "\n";
        out << " " << num(p.battery.p_charge_max_kw) << " <= PTS_" << i << " <= 0\n";
        out << " " << num(p.soc_min_kwh()) << " <= SOC_" << i << " <= " << num(p.soc_max_kwh())
            << "\n";
    }
    out << "Binaries\n";
    for (std::size_t k = 0; k < n; ++k)
        out << " ip_" << k << " ig_" << k << " is_" << k << "\n";
    out << "End\n";
}

} // namespace bessim

#endif
