#ifndef BESSIM_RAINFLOW_HPP
#define BESSIM_RAINFLOW_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "bessim/types.hpp"

namespace bessim {

// One counted charge/discharge cycle. dod and mean_soc are fractions of
// nominal capacity; weight is 1.0 for a matched (full) cycle and 0.5 for a
// residue half cycle.
struct cycle_record {
    double dod = 0.0;
    double mean_soc = 0.0;
    double weight = 1.0;
};

// Local extrema of the trace including both endpoints; plateaus collapse to
// a single point, so consecutive values strictly alternate.
inline std::vector<double> turning_points(const std::vector<double>& trace) {
    std::vector<double> tp;
    if (trace.empty()) return tp;
    tp.push_back(trace.front());
    int dir = 0; // -1 falling, +1 rising
    for (std::size_t i = 1; i < trace.size(); ++i) {
        double v = trace[i];
        if (v == tp.back()) continue;
        int d = v > tp.back() ? 1 : -1;
        if (d == dir)
            tp.back() = v; // extend the current run
        else
            tp.push_back(v);
        dir = d;
    }
    return tp;
}

// Four-point rainflow over the turning points. Matched pairs count as full
// cycles; the leftover alternating residue counts as half cycles. The exact
// identity sum(weight * dod) == total_variation(turning points) / 2 holds by
// construction.
inline std::vector<cycle_record> extract_cycles(const std::vector<double>& soc_trace) {
    for (double v : soc_trace)
        if (!(v >= 0.0 && v <= 1.0))
            throw data_error("extract_cycles: trace value outside [0,1]");

    std::vector<cycle_record> cycles;
    std::vector<double> stack;
    auto emit = [&](double a, double b, double weight) {
        double range = std::fabs(a - b);
        if (range <= 0.0) return;
        cycles.push_back(cycle_record{range, 0.5 * (a + b), weight});
    };

    for (double point : turning_points(soc_trace)) {
        stack.push_back(point);
        while (stack.size() >= 4) {
            std::size_t n = stack.size();
            double r_prev = std::fabs(stack[n - 3] - stack[n - 4]);
            double r_mid = std::fabs(stack[n - 2] - stack[n - 3]);
            double r_next = std::fabs(stack[n - 1] - stack[n - 2]);
            if (r_mid <= r_prev && r_mid <= r_next) {
                emit(stack[n - 3], stack[n - 2], 1.0);
                stack.erase(stack.end() - 3, stack.end() - 1);
            } else {
                break;
            }
        }
    }
    // residue: alternating sequence, each leg a half cycle
    for (std::size_t i = 0; i + 1 < stack.size(); ++i) emit(stack[i], stack[i + 1], 0.5);
    return cycles;
}

} // namespace bessim

#endif
