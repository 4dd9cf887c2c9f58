#ifndef BESSIM_SERIES_HPP
#define BESSIM_SERIES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bessim/csv.hpp"
#include "bessim/types.hpp"

namespace bessim {

// Uniformly sampled plant time series. Immutable after construction;
// operations return new frames.
struct series_frame {
    long long start_epoch_s = 0;
    int utc_offset_min = 0;
    resolution res{60};
    std::vector<double> pv_dc_kw;   // P_pv,k >= 0
    std::vector<double> load_ac_kw; // P_L,k >= 0
    std::vector<double> price_eur_kwh;
    std::vector<double> battery_temp_c; // empty when not supplied

    std::size_t size() const { return pv_dc_kw.size(); }
    bool has_temperature() const { return !battery_temp_c.empty(); }

    void validate() const {
        std::size_t n = pv_dc_kw.size();
        if (n == 0) throw data_error("series: empty frame");
        if (load_ac_kw.size() != n || price_eur_kwh.size() != n ||
            (!battery_temp_c.empty() && battery_temp_c.size() != n))
            throw data_error("series: column length mismatch");
        for (std::size_t k = 0; k < n; ++k) {
            if (std::isnan(pv_dc_kw[k]) || std::isnan(load_ac_kw[k]) || std::isnan(price_eur_kwh[k]))
                throw data_error("series: missing value at row " + std::to_string(k));
            if (pv_dc_kw[k] < 0.0)
                throw data_error("series: negative power value pv_dc_kw at row " + std::to_string(k));
            if (load_ac_kw[k] < 0.0)
                throw data_error("series: negative power value load_ac_kw at row " + std::to_string(k));
            if (price_eur_kwh[k] < 0.0)
                throw data_error("series: negative price at row " + std::to_string(k));
        }
    }
};

// Hour-of-day tariff components. C_G,k combines the generation cost, the
// tolls/charges of the usage period, and VAT applied as a rate.
struct tariff_spec {
    std::vector<double> gc_eur_kwh; // indexed by hour of day, size 24
    std::vector<double> tc_eur_kwh; // size 24
    double vat_rate = 0.21;

    void validate() const {
        if (gc_eur_kwh.size() != 24 || tc_eur_kwh.size() != 24)
            throw data_error("tariff: need all 24 hours of gc/tc");
        for (int h = 0; h < 24; ++h)
            if (gc_eur_kwh[h] < 0.0 || tc_eur_kwh[h] < 0.0)
                throw data_error("tariff: negative component at hour " + std::to_string(h));
        if (!(vat_rate >= 0.0 && vat_rate < 1.0))
            throw data_error("tariff: vat_rate must be in [0,1)");
    }
};

// Column mapping for load_series. Empty optional names are skipped.
struct csv_schema {
    std::string timestamp = "timestamp";
    std::string pv_dc = "pv_dc_kw";
    std::string load_ac = "load_ac_kw";
    std::string price = "";  // optional in-file price column
    std::string temp = "";   // optional battery temperature column
};

// Reads and validates a data CSV. The sampling resolution is inferred from
// the timestamp spacing and must be one of {5, 15, 30, 60} minutes, strictly
// uniform across the file.
inline series_frame load_series(const std::string& path, const csv_schema& schema = {}) {
    csv::table t = csv::read_file(path);
    int c_ts = t.column(schema.timestamp);
    int c_pv = t.column(schema.pv_dc);
    int c_load = t.column(schema.load_ac);
    if (c_ts < 0) throw data_error(path + ": missing column '" + schema.timestamp + "'");
    if (c_pv < 0) throw data_error(path + ": missing column '" + schema.pv_dc + "'");
    if (c_load < 0) throw data_error(path + ": missing column '" + schema.load_ac + "'");
    int c_price = schema.price.empty() ? -1 : t.column(schema.price);
    if (!schema.price.empty() && c_price < 0)
        throw data_error(path + ": missing column '" + schema.price + "'");
    int c_temp = schema.temp.empty() ? -1 : t.column(schema.temp);
    if (!schema.temp.empty() && c_temp < 0)
        throw data_error(path + ": missing column '" + schema.temp + "'");

    if (t.rows.empty()) throw data_error(path + ": no data rows");

    series_frame f;
    std::size_t n = t.rows.size();
    f.pv_dc_kw.reserve(n);
    f.load_ac_kw.reserve(n);
    f.price_eur_kwh.assign(c_price >= 0 ? 0 : n, 0.0);
    if (c_price >= 0) f.price_eur_kwh.reserve(n);

    long long prev_epoch = 0;
    long long step_s = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& row = t.rows[k];
        auto ts = csv::parse_timestamp(row[c_ts], path + " row " + std::to_string(k + 1));
        if (k == 0) {
            f.start_epoch_s = ts.epoch_s;
            f.utc_offset_min = ts.offset_min;
        } else {
            long long gap = ts.epoch_s - prev_epoch;
            if (k == 1) {
                if (gap <= 0) throw data_error(path + ": non-uniform spacing (timestamps not strictly increasing)");
                step_s = gap;
            } else if (gap != step_s) {
                throw data_error(path + ": non-uniform spacing at row " + std::to_string(k + 1));
            }
        }
        prev_epoch = ts.epoch_s;
        f.pv_dc_kw.push_back(csv::parse_number(row[c_pv], path + " pv_dc row " + std::to_string(k + 1)));
        f.load_ac_kw.push_back(csv::parse_number(row[c_load], path + " load row " + std::to_string(k + 1)));
        if (c_price >= 0)
            f.price_eur_kwh.push_back(csv::parse_number(row[c_price], path + " price row " + std::to_string(k + 1)));
        if (c_temp >= 0)
            f.battery_temp_c.push_back(csv::parse_number(row[c_temp], path + " temp row " + std::to_string(k + 1)));
    }
    if (n == 1) step_s = 3600; // single row: resolution defaults to 60 min
    if (step_s % 60 != 0) throw data_error(path + ": timestamp spacing is not a whole minute");
    long long step_min = step_s / 60;
    if (step_min != 5 && step_min != 15 && step_min != 30 && step_min != 60)
        throw data_error(path + ": unsupported resolution " + std::to_string(step_min) + " min");
    f.res = resolution::of(static_cast<int>(step_min));
    f.validate();
    return f;
}

struct derive_load_result {
    std::vector<double> load_kw;
    int clipped = 0; // negative residuals clipped to zero
};

// Household demand from AC PV output and the metered grid exchange
// (import positive, export negative). Negative residuals are measurement
// noise and clip to zero.
inline derive_load_result derive_load(const std::vector<double>& pv_ac_kw,
                                      const std::vector<double>& grid_kw) {
    if (pv_ac_kw.size() != grid_kw.size())
        throw data_error("derive_load: length mismatch");
    derive_load_result r;
    r.load_kw.reserve(pv_ac_kw.size());
    for (std::size_t k = 0; k < pv_ac_kw.size(); ++k) {
        double v = pv_ac_kw[k] + grid_kw[k];
        if (v < 0.0) {
            v = 0.0;
            ++r.clipped;
        }
        r.load_kw.push_back(v);
    }
    return r;
}

// Block-mean aggregation to a coarser resolution. Power means preserve
// energy exactly: sum(p_i * t_s) over a block equals mean * block * t_s.
inline series_frame resample(const series_frame& f, resolution target) {
    if (target.step_minutes % f.res.step_minutes != 0)
        throw data_error("resample: target " + std::to_string(target.step_minutes) +
                         " min is not an integer multiple of " + std::to_string(f.res.step_minutes) + " min");
    std::size_t ratio = static_cast<std::size_t>(target.step_minutes / f.res.step_minutes);
    if (ratio == 1) return f;
    if (f.size() % ratio != 0)
        throw data_error("resample: length " + std::to_string(f.size()) +
                         " not divisible by ratio " + std::to_string(ratio));
    auto block_mean = [&](const std::vector<double>& src) {
        std::vector<double> out;
        out.reserve(src.size() / ratio);
        for (std::size_t b = 0; b < src.size(); b += ratio) {
            double acc = 0.0;
            for (std::size_t i = 0; i < ratio; ++i) acc += src[b + i];
            out.push_back(acc / static_cast<double>(ratio));
        }
        return out;
    };
    series_frame out;
    out.start_epoch_s = f.start_epoch_s;
    out.utc_offset_min = f.utc_offset_min;
    out.res = target;
    out.pv_dc_kw = block_mean(f.pv_dc_kw);
    out.load_ac_kw = block_mean(f.load_ac_kw);
    out.price_eur_kwh = block_mean(f.price_eur_kwh);
    if (f.has_temperature()) out.battery_temp_c = block_mean(f.battery_temp_c);
    return out;
}

// C_G,k = (GC_k + TC_k) * (1 + VAT) looked up by local hour of day.
inline std::vector<double> build_price_series(const tariff_spec& tariff, long long start_epoch_s,
                                              int utc_offset_min, resolution res, std::size_t n) {
    tariff.validate();
    std::vector<double> out;
    out.reserve(n);
    long long step_s = static_cast<long long>(res.step_minutes) * 60;
    for (std::size_t k = 0; k < n; ++k) {
        long long local = start_epoch_s + utc_offset_min * 60LL + static_cast<long long>(k) * step_s;
        long long sod = ((local % 86400) + 86400) % 86400;
        int hour = static_cast<int>(sod / 3600);
        out.push_back((tariff.gc_eur_kwh[hour] + tariff.tc_eur_kwh[hour]) * (1.0 + tariff.vat_rate));
    }
    return out;
}

// Tariff file: header hour_of_day,gc_eur_kwh,tc_eur_kwh with one row per
// hour 0..23. vat_rate comes from the run configuration.
inline tariff_spec load_tariff(const std::string& path, double vat_rate) {
    csv::table t = csv::read_file(path);
    int c_h = t.column("hour_of_day");
    int c_gc = t.column("gc_eur_kwh");
    int c_tc = t.column("tc_eur_kwh");
    if (c_h < 0 || c_gc < 0 || c_tc < 0)
        throw data_error(path + ": tariff file needs columns hour_of_day,gc_eur_kwh,tc_eur_kwh");
    tariff_spec spec;
    spec.gc_eur_kwh.assign(24, std::nan(""));
    spec.tc_eur_kwh.assign(24, std::nan(""));
    spec.vat_rate = vat_rate;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        int h = static_cast<int>(csv::parse_number(t.rows[k][c_h], path));
        if (h < 0 || h > 23) throw data_error(path + ": hour_of_day out of range");
        spec.gc_eur_kwh[h] = csv::parse_number(t.rows[k][c_gc], path);
        spec.tc_eur_kwh[h] = csv::parse_number(t.rows[k][c_tc], path);
    }
    for (int h = 0; h < 24; ++h)
        if (std::isnan(spec.gc_eur_kwh[h]) || std::isnan(spec.tc_eur_kwh[h]))
            throw data_error(path + ": tariff missing hour " + std::to_string(h));
    spec.validate();
    return spec;
}

} // namespace bessim

#endif
