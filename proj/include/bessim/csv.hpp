#ifndef BESSIM_CSV_HPP
#define BESSIM_CSV_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bessim/types.hpp"

namespace bessim::csv {

struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (first) {
            t.header = fields;
            first = false;
        } else {
            if (fields.size() != t.header.size())
                throw data_error(path + ": row with " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw data_error(path + ": empty file");
    return t;
}

inline double parse_number(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error("unparseable number '" + s + "' in " + context);
    }
}

// ISO-8601 "YYYY-MM-DDTHH:MM:SS" with optional "Z" or "+HH:MM" offset.
// Returns seconds since 1970-01-01T00:00:00 at the given offset, plus the
// offset itself in minutes.
struct timestamp {
    long long epoch_s = 0;  // instant (offset already applied)
    int offset_min = 0;     // recorded UTC offset
};

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline long long days_from_civil(int y, int m, int d) {
    // Howard Hinnant's algorithm
    y -= m <= 2;
    long long era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

inline timestamp parse_timestamp(const std::string& s_in, const std::string& context) {
    std::string s = trim(s_in);
    auto fail = [&]() -> timestamp {
        throw data_error("unparseable timestamp '" + s_in + "' in " + context);
    };
    int y, mo, d, h, mi, se = 0;
    if (s.size() < 16) return fail();
    char sep = s[10];
    if (sep != 'T' && sep != ' ') return fail();
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &mo, &d) != 3) return fail();
    if (std::sscanf(s.c_str() + 11, "%2d:%2d", &h, &mi) != 2) return fail();
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (std::sscanf(s.c_str() + 17, "%2d", &se) != 1) return fail();
        pos = 19;
    }
    int off = 0;
    if (pos < s.size()) {
        char c = s[pos];
        if (c == 'Z') {
            if (pos + 1 != s.size()) return fail();
        } else if (c == '+' || c == '-') {
            int oh, om;
            if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2) return fail();
            off = (oh * 60 + om) * (c == '+' ? 1 : -1);
        } else {
            return fail();
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return fail();
    timestamp t;
    t.epoch_s = days_from_civil(y, mo, d) * 86400LL + h * 3600LL + mi * 60LL + se -
                off * 60LL;
    t.offset_min = off;
    return t;
}

inline std::string format_timestamp(long long epoch_s, int offset_min) {
    long long local = epoch_s + offset_min * 60LL;
    long long days = local / 86400;
    long long sod = local % 86400;
    if (sod < 0) { sod += 86400; days -= 1; }
    // inverse of days_from_civil
    long long z = days + 719468;
    long long era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    long long y = static_cast<long long>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    unsigned d = doy - (153 * mp + 2) / 5 + 1;
    unsigned m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
    char buf[40];
    if (offset_min == 0) {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                      sod / 3600, (sod / 60) % 60, sod % 60);
    } else {
        int off = offset_min;
        char sign = off < 0 ? '-' : '+';
        if (off < 0) off = -off;
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld%c%02d:%02d", y, m,
                      d, sod / 3600, (sod / 60) % 60, sod % 60, sign, off / 60, off % 60);
    }
    return buf;
}

// Fixed numeric formatting shared by every CSV artifact so identical runs
// stay byte-identical.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace bessim::csv

#endif
