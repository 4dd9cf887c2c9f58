#ifndef BESSIM_TYPES_HPP
#define BESSIM_TYPES_HPP

#include <stdexcept>
#include <string>

namespace bessim {

// Input/config problems -> CLI exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent time-series data -> CLI exit code 2.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Dispatch failures (infeasible window, time limit) -> CLI exit code 3.
struct solve_error : std::runtime_error {
    explicit solve_error(const std::string& what) : std::runtime_error(what) {}
};

// Uniform sampling step. step_minutes must divide 60.
struct resolution {
    int step_minutes = 60;

    double step_hours() const { return step_minutes / 60.0; }

    static resolution of(int minutes) {
        if (minutes <= 0 || 60 % minutes != 0)
            throw data_error("resolution: step of " + std::to_string(minutes) +
                             " min does not divide 60");
        return resolution{minutes};
    }
};

inline bool operator==(resolution a, resolution b) { return a.step_minutes == b.step_minutes; }
inline bool operator!=(resolution a, resolution b) { return !(a == b); }

// DC-coupled inverter. p_dc_min is the largest AC->DC draw (<= 0, battery
// charging through the inverter).
struct inverter_spec {
    double eta_inv = 0.978;   // constant conversion efficiency, both directions
    double p_ac_max_kw = 6.0; // rated AC output
    double p_dc_max_kw = 9.0; // max DC input (PV + battery discharge)
    double p_dc_min_kw = -6.0;

    void validate() const {
        if (!(eta_inv > 0.0 && eta_inv <= 1.0)) throw config_error("inverter: eta_inv must be in (0,1]");
        if (!(p_ac_max_kw > 0.0)) throw config_error("inverter: p_ac_max_kw must be > 0");
        if (!(p_dc_max_kw > 0.0)) throw config_error("inverter: p_dc_max_kw must be > 0");
        if (!(p_dc_min_kw <= 0.0)) throw config_error("inverter: p_dc_min_kw must be <= 0");
    }
};

// Grid connection. p_export_max_kw is a signed cap (<= 0): exports may not
// exceed its magnitude.
struct grid_spec {
    double p_import_max_kw = 0.0; // contracted power, required
    double p_export_max_kw = -6.0;

    void validate() const {
        if (!(p_import_max_kw > 0.0)) throw config_error("grid: p_import_max_kw must be > 0");
        if (!(p_export_max_kw <= 0.0)) throw config_error("grid: p_export_max_kw must be <= 0");
    }
};

struct battery_spec {
    double e_nominal_kwh = 10.0;     // E_b,0
    double p_discharge_max_kw = 5.0; // P_FS,max, >= 0
    double p_charge_max_kw = -5.0;   // P_TS,max, <= 0
    double eta_roundtrip = 0.94;
    double soc_min_frac = 0.2;
    double soc_max_frac = 0.8;
    double soh_eol = 0.8;                  // simulation stops at 80% of nominal
    double warranted_throughput_kwh = 0.0; // discharged energy covered by warranty

    // Default warranty: 8000 equivalent full cycles over the usable window.
    static double default_warranted_throughput_kwh(double e_nominal_kwh) {
        return 8000.0 * 0.6 * e_nominal_kwh;
    }

    void validate() const {
        if (!(e_nominal_kwh > 0.0)) throw config_error("battery: e_nominal_kwh must be > 0");
        if (!(p_discharge_max_kw >= 0.0)) throw config_error("battery: p_discharge_max_kw must be >= 0");
        if (!(p_charge_max_kw <= 0.0)) throw config_error("battery: p_charge_max_kw must be <= 0");
        if (!(eta_roundtrip > 0.0 && eta_roundtrip <= 1.0))
            throw config_error("battery: eta_roundtrip must be in (0,1]");
        if (!(soc_min_frac >= 0.0 && soc_min_frac < soc_max_frac && soc_max_frac <= 1.0))
            throw config_error("battery: need 0 <= soc_min_frac < soc_max_frac <= 1");
        if (!(soh_eol > 0.0 && soh_eol < 1.0)) throw config_error("battery: soh_eol must be in (0,1)");
        if (!(warranted_throughput_kwh > 0.0))
            throw config_error("battery: warranted_throughput_kwh must be > 0");
    }
};

struct solver_config {
    double rel_mip_gap = 1e-4;
    double time_limit_s = 60.0;      // per window
    double feasibility_tol_kw = 1e-6;

    void validate() const {
        if (!(rel_mip_gap >= 0.0)) throw config_error("solver: rel_mip_gap must be >= 0");
        if (!(time_limit_s > 0.0)) throw config_error("solver: time_limit_s must be > 0");
        if (!(feasibility_tol_kw > 0.0)) throw config_error("solver: feasibility_tol_kw must be > 0");
    }
};

} // namespace bessim

#endif
