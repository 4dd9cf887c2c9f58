#ifndef BESSIM_ARTIFACTS_HPP
#define BESSIM_ARTIFACTS_HPP

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bessim/csv.hpp"
#include "bessim/dispatch.hpp"
#include "bessim/lifetime.hpp"
#include "bessim/types.hpp"

namespace bessim {

using nlohmann::json;

namespace detail {

// Checkpoints round-trip doubles through hexfloat strings so a resumed run
// restores bit-identical state.
inline std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double parse_hex_double(const json& j, const char* key) {
    if (!j.contains(key)) throw data_error(std::string("checkpoint: missing key ") + key);
    const std::string s = j.at(key).get<std::string>();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw data_error("checkpoint: bad number for " + std::string(key));
    return v;
}

} // namespace detail

inline void write_checkpoint(const lifetime_checkpoint& cp, const std::string& path) {
    json j;
    j["schema"] = "bessim-checkpoint-v1";
    j["next_window"] = cp.next_window;
    j["soc_kwh"] = detail::hex_double(cp.soc_kwh);
    j["state"] = {
        {"f_b", detail::hex_double(cp.state.f_b)},
        {"loss", detail::hex_double(cp.state.loss)},
        {"e_b_kwh", detail::hex_double(cp.state.e_b_kwh)},
        {"c_bd_eur_kwh", detail::hex_double(cp.state.c_bd_eur_kwh)},
        {"discharged_total_kwh", detail::hex_double(cp.state.discharged_total_kwh)},
        {"elapsed_s", detail::hex_double(cp.state.elapsed_s)},
    };
    j["tallies"] = {
        {"pv_to_load_kwh", detail::hex_double(cp.tallies.pv_to_load_kwh)},
        {"pv_to_battery_kwh", detail::hex_double(cp.tallies.pv_to_battery_kwh)},
        {"pv_total_kwh", detail::hex_double(cp.tallies.pv_total_kwh)},
        {"load_total_kwh", detail::hex_double(cp.tallies.load_total_kwh)},
        {"export_dc_kwh", detail::hex_double(cp.tallies.export_dc_kwh)},
        {"import_kwh", detail::hex_double(cp.tallies.import_kwh)},
        {"baseline_import_kwh", detail::hex_double(cp.tallies.baseline_import_kwh)},
        {"grid_charge_steps", cp.tallies.grid_charge_steps},
    };
    json dcf = json::array();
    for (double v : cp.dcf_series_eur) dcf.push_back(detail::hex_double(v));
    j["dcf_series_eur"] = dcf;
    json hist = json::array();
    for (double v : cp.dod_histogram) hist.push_back(detail::hex_double(v));
    j["dod_histogram"] = hist;
    j["total_cycles_weighted"] = detail::hex_double(cp.total_cycles_weighted);

    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw data_error("checkpoint: cannot write " + tmp);
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

inline lifetime_checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("checkpoint: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error("checkpoint: bad JSON in " + path + ": " + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "bessim-checkpoint-v1")
        throw config_error("checkpoint: unknown schema in " + path);
    lifetime_checkpoint cp;
    try {
        cp.next_window = j.at("next_window").get<long>();
        cp.soc_kwh = detail::parse_hex_double(j, "soc_kwh");
        const json& st = j.at("state");
        cp.state.f_b = detail::parse_hex_double(st, "f_b");
        cp.state.loss = detail::parse_hex_double(st, "loss");
        cp.state.e_b_kwh = detail::parse_hex_double(st, "e_b_kwh");
        cp.state.c_bd_eur_kwh = detail::parse_hex_double(st, "c_bd_eur_kwh");
        cp.state.discharged_total_kwh = detail::parse_hex_double(st, "discharged_total_kwh");
        cp.state.elapsed_s = detail::parse_hex_double(st, "elapsed_s");
        const json& ta = j.at("tallies");
        cp.tallies.pv_to_load_kwh = detail::parse_hex_double(ta, "pv_to_load_kwh");
        cp.tallies.pv_to_battery_kwh = detail::parse_hex_double(ta, "pv_to_battery_kwh");
        cp.tallies.pv_total_kwh = detail::parse_hex_double(ta, "pv_total_kwh");
        cp.tallies.load_total_kwh = detail::parse_hex_double(ta, "load_total_kwh");
        cp.tallies.export_dc_kwh = detail::parse_hex_double(ta, "export_dc_kwh");
        cp.tallies.import_kwh = detail::parse_hex_double(ta, "import_kwh");
        cp.tallies.baseline_import_kwh = detail::parse_hex_double(ta, "baseline_import_kwh");
        cp.tallies.grid_charge_steps = ta.at("grid_charge_steps").get<long>();
        cp.dcf_series_eur.clear();
        for (const auto& v : j.at("dcf_series_eur")) {
            char* end = nullptr;
            cp.dcf_series_eur.push_back(std::strtod(v.get<std::string>().c_str(), &end));
        }
        cp.dod_histogram.assign(dod_histogram_bins, 0.0);
        std::size_t i = 0;
        for (const auto& v : j.at("dod_histogram")) {
            char* end = nullptr;
            if (i < dod_histogram_bins)
                cp.dod_histogram[i++] = std::strtod(v.get<std::string>().c_str(), &end);
        }
        cp.total_cycles_weighted = detail::parse_hex_double(j, "total_cycles_weighted");
    } catch (const json::exception& e) {
        throw config_error("checkpoint: malformed " + path + ": " + e.what());
    }
    return cp;
}

// ---------------------------------------------------------------------------
// window log CSV (streamed as the simulation runs)

inline const char* window_log_header() {
    return "window,elapsed_years,objective_eur,import_kwh,baseline_import_kwh,discharged_kwh,"
           "cycles_weighted,f_b,loss,e_b_kwh,c_bd_eur_kwh,soc_end_kwh,savings_eur,dcf_eur";
}

inline std::string window_log_row(const window_log_entry& e) {
    std::string s = std::to_string(e.window_index);
    auto push = [&](double v) { s += ","; s += csv::format_number(v); };
    push(e.elapsed_years_end);
    push(e.objective_eur);
    push(e.import_kwh);
    push(e.baseline_import_kwh);
    push(e.discharged_kwh);
    push(e.cycles_weighted);
    push(e.f_b);
    push(e.loss);
    push(e.e_b_kwh);
    push(e.c_bd_eur_kwh);
    push(e.soc_end_kwh);
    push(e.savings_eur);
    push(e.dcf_eur);
    return s;
}

// Truncates an existing window log to its first `rows` data rows (resume
// path); returns false when the file does not exist yet.
inline bool truncate_window_log(const std::string& path, long rows) {
    std::ifstream in(path);
    if (!in) return false;
    std::vector<std::string> keep;
    std::string line;
    if (!std::getline(in, line)) return false;
    keep.push_back(line);
    long n = 0;
    while (n < rows && std::getline(in, line)) {
        keep.push_back(line);
        ++n;
    }
    in.close();
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : keep) out << l << "\n";
    return n == rows;
}

// ---------------------------------------------------------------------------
// dispatch solution CSV

inline void write_solution_csv(const window_problem& p, const dispatch_solution& s,
                               long long start_epoch_s, int utc_offset_min,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "timestamp,p_fp_kw,p_tp_kw,p_fpac_kw,p_tpac_kw,p_fg_kw,p_tg_kw,p_fs_kw,p_ts_kw,"
           "i_p,i_g,i_s,soc_kwh\n";
    long long step_s = static_cast<long long>(p.t_s_h * 3600.0 + 0.5);
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << csv::format_timestamp(start_epoch_s + static_cast<long long>(k) * step_s,
                                     utc_offset_min);
        auto push = [&](double v) { out << "," << csv::format_number(v); };
        push(s.p_fp_kw[k]);
        push(s.p_tp_kw[k]);
        push(s.p_fpac_kw[k]);
        push(s.p_tpac_kw[k]);
        push(s.p_fg_kw[k]);
        push(s.p_tg_kw[k]);
        push(s.p_fs_kw[k]);
        push(s.p_ts_kw[k]);
        out << "," << s.i_p[k] << "," << s.i_g[k] << "," << s.i_s[k];
        push(s.soc_kwh[k]);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// SVG polyline plots (small, dependency-free)

struct svg_series {
    std::string label;
    std::vector<double> x, y;
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::vector<svg_series>& series, bool bars = false) {
    const int width = 720, height = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmax > xmin)) { xmax = xmin + 1.0; }
    if (!(ymax > ymin)) { ymax = ymin + 1.0; }
    double yspan = ymax - ymin;
    ymax += 0.05 * yspan;
    ymin -= 0.05 * yspan;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<text x='" << width / 2 << "' y='" << height - 10
        << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    out << "<text x='15' y='" << height / 2 << "' text-anchor='middle' font-size='12' transform='rotate(-90 15 "
        << height / 2 << ")'>" << y_label << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n";
    // horizontal gridlines with labels
    for (int i = 0; i <= 4; ++i) {
        double y = ymin + (ymax - ymin) * i / 4.0;
        out << "<line x1='" << ml << "' y1='" << py(y) << "' x2='" << width - mr << "' y2='"
            << py(y) << "' stroke='#dddddd'/>\n";
        out << "<text x='" << ml - 5 << "' y='" << py(y) + 4
            << "' text-anchor='end' font-size='10'>" << csv::format_number(y) << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        const char* color = colors[ci % 5];
        if (bars) {
            double bw = (width - ml - mr) / std::max<std::size_t>(1, s.x.size()) * 0.8;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (s.y[i] == 0.0) continue;
                out << "<rect x='" << px(s.x[i]) - bw / 2 << "' y='" << py(s.y[i]) << "' width='"
                    << bw << "' height='" << py(std::max(ymin, 0.0)) - py(s.y[i])
                    << "' fill='" << color << "' opacity='0.8'/>\n";
            }
        } else {
            out << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << px(s.x[i]) << "," << py(s.y[i]) << " ";
            out << "'/>\n";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
                    << "' r='3' fill='" << color << "'/>\n";
        }
        out << "<text x='" << width - mr - 5 << "' y='" << mt + 15 * (ci + 1)
            << "' text-anchor='end' font-size='12' fill='" << color << "'>" << s.label
            << "</text>\n";
        ++ci;
    }
    // x tick labels at data points of the first series
    if (!series.empty())
        for (std::size_t i = 0; i < series[0].x.size(); ++i)
            out << "<text x='" << px(series[0].x[i]) << "' y='" << height - mb + 15
                << "' text-anchor='middle' font-size='10'>" << csv::format_number(series[0].x[i])
                << "</text>\n";
    out << "</svg>\n";
}

} // namespace bessim

#endif
