#ifndef BESSIM_PIECEWISE_HPP
#define BESSIM_PIECEWISE_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bessim {

// Convex piecewise-linear function on a closed interval, stored as knot
// abscissae (strictly ascending) and the function values there. A
// single-knot function is a point mass. Slopes between knots must be
// nondecreasing; construction enforces it up to a small tolerance and
// rejects anything worse.
class convex_pwl {
public:
    convex_pwl() = default;

    static convex_pwl point(double x, double y) {
        convex_pwl f;
        f.x_ = {x};
        f.v_ = {y};
        return f;
    }

    // Builds from samples of a function that is linear between consecutive
    // abscissae. Duplicate abscissae collapse; slope dips below -tol throw.
    static convex_pwl from_samples(const std::vector<double>& xs, const std::vector<double>& vs,
                                   double slope_tol = 1e-7) {
        assert(xs.size() == vs.size() && !xs.empty());
        convex_pwl f;
        f.x_.reserve(xs.size());
        f.v_.reserve(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!f.x_.empty() && xs[i] <= f.x_.back() + 1e-12 * (1.0 + std::fabs(xs[i]))) {
                // collapsed knot: keep the smaller value
                f.v_.back() = std::min(f.v_.back(), vs[i]);
                continue;
            }
            f.x_.push_back(xs[i]);
            f.v_.push_back(vs[i]);
        }
        f.enforce_convexity(slope_tol);
        return f;
    }

    bool is_point() const { return x_.size() == 1; }
    double lo() const { return x_.front(); }
    double hi() const { return x_.back(); }
    double width() const { return hi() - lo(); }
    std::size_t knot_count() const { return x_.size(); }

    double eval(double x) const {
        if (x <= x_.front()) return v_.front();
        if (x >= x_.back()) return v_.back();
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        double t = (x - x_[i]) / (x_[i + 1] - x_[i]);
        return v_[i] + t * (v_[i + 1] - v_[i]);
    }

    // f(-x): mirrors the domain.
    convex_pwl negate_arg() const {
        convex_pwl g;
        g.x_.assign(x_.rbegin(), x_.rend());
        for (double& x : g.x_) x = -x;
        g.v_.assign(v_.rbegin(), v_.rend());
        return g;
    }

    // Exact infimal convolution of two convex functions: segments of both
    // operands concatenated in slope order.
    static convex_pwl inf_convolve(const convex_pwl& f, const convex_pwl& g) {
        convex_pwl r;
        std::size_t nf = f.x_.size() - 1, ng = g.x_.size() - 1;
        r.x_.reserve(nf + ng + 1);
        r.v_.reserve(nf + ng + 1);
        r.x_.push_back(f.lo() + g.lo());
        r.v_.push_back(f.v_.front() + g.v_.front());
        std::size_t i = 0, j = 0;
        while (i < nf || j < ng) {
            bool take_f;
            if (i >= nf) take_f = false;
            else if (j >= ng) take_f = true;
            else take_f = f.slope(i) <= g.slope(j);
            double dx, s;
            if (take_f) { dx = f.x_[i + 1] - f.x_[i]; s = f.slope(i); ++i; }
            else        { dx = g.x_[j + 1] - g.x_[j]; s = g.slope(j); ++j; }
            r.x_.push_back(r.x_.back() + dx);
            r.v_.push_back(r.v_.back() + s * dx);
        }
        return r;
    }

    // Pointwise sum on the intersection of the domains; nullopt when the
    // domains do not overlap.
    static std::optional<convex_pwl> add(const convex_pwl& f, const convex_pwl& g) {
        double lo = std::max(f.lo(), g.lo());
        double hi = std::min(f.hi(), g.hi());
        if (lo > hi) return std::nullopt;
        std::vector<double> knots;
        knots.reserve(f.x_.size() + g.x_.size());
        knots.push_back(lo);
        auto push_range = [&](const std::vector<double>& xs) {
            for (double x : xs)
                if (x > lo && x < hi) knots.push_back(x);
        };
        push_range(f.x_);
        push_range(g.x_);
        if (hi > lo) knots.push_back(hi);
        std::sort(knots.begin(), knots.end());
        convex_pwl r;
        for (double x : knots) {
            if (!r.x_.empty() && x <= r.x_.back() + 1e-15 * (1.0 + std::fabs(x))) continue;
            r.x_.push_back(x);
            r.v_.push_back(f.eval(x) + g.eval(x));
        }
        return r;
    }

    // Restriction to [lo, hi]; nullopt when the intersection is empty.
    static std::optional<convex_pwl> restrict_to(const convex_pwl& f, double lo, double hi) {
        double a = std::max(lo, f.lo());
        double b = std::min(hi, f.hi());
        if (a > b) return std::nullopt;
        if (a == f.lo() && b == f.hi()) return f;
        convex_pwl r;
        r.x_.push_back(a);
        r.v_.push_back(f.eval(a));
        for (std::size_t i = 0; i < f.x_.size(); ++i) {
            if (f.x_[i] > a && f.x_[i] < b) {
                r.x_.push_back(f.x_[i]);
                r.v_.push_back(f.v_[i]);
            }
        }
        if (b > a + 1e-15 * (1.0 + std::fabs(b))) {
            r.x_.push_back(b);
            r.v_.push_back(f.eval(b));
        }
        return r;
    }

    struct min_info {
        double x = 0.0;       // chosen minimizer
        double value = 0.0;
        double flat_lo = 0.0; // full minimizing interval
        double flat_hi = 0.0;
    };

    // Minimizer; within a flat optimum picks the point nearest prefer_x.
    min_info minimum(double prefer_x) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < v_.size(); ++i)
            if (v_[i] < v_[best]) best = i;
        double lo_x = x_[best], hi_x = x_[best];
        // extend across exactly-flat neighbours
        std::size_t i = best;
        while (i > 0 && v_[i - 1] == v_[best]) { --i; lo_x = x_[i]; }
        i = best;
        while (i + 1 < v_.size() && v_[i + 1] == v_[best]) { ++i; hi_x = x_[i]; }
        min_info m;
        m.flat_lo = lo_x;
        m.flat_hi = hi_x;
        m.x = std::clamp(prefer_x, lo_x, hi_x);
        m.value = v_[best];
        return m;
    }

    // Merges adjacent segments whose slopes differ by at most
    // eps_abs + eps_rel*|slope|; keeps endpoint values exact.
    void compact(double eps_abs, double eps_rel) {
        if (x_.size() < 3) return;
        std::vector<double> nx, nv;
        nx.reserve(x_.size());
        nv.reserve(v_.size());
        nx.push_back(x_.front());
        nv.push_back(v_.front());
        for (std::size_t i = 1; i + 1 < x_.size(); ++i) {
            double s0 = (v_[i] - nv.back()) / (x_[i] - nx.back());
            double s1 = slope(i);
            double tol = eps_abs + eps_rel * std::max(std::fabs(s0), std::fabs(s1));
            if (std::fabs(s1 - s0) <= tol) continue; // drop knot i
            nx.push_back(x_[i]);
            nv.push_back(v_[i]);
        }
        nx.push_back(x_.back());
        nv.push_back(v_.back());
        x_ = std::move(nx);
        v_ = std::move(nv);
    }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return v_; }

private:
    double slope(std::size_t seg) const {
        return (v_[seg + 1] - v_[seg]) / (x_[seg + 1] - x_[seg]);
    }

    void enforce_convexity(double tol) {
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
            double s = slope(i);
            double scale = 1.0 + std::max(std::fabs(s), std::fabs(prev));
            if (s < prev - tol * scale)
                throw std::logic_error("convex_pwl: samples are not convex");
            if (s < prev) {
                // flatten FP wobble
                v_[i + 1] = v_[i] + prev * (x_[i + 1] - x_[i]);
                s = prev;
            }
            prev = s;
        }
    }

    std::vector<double> x_;
    std::vector<double> v_;
};

} // namespace bessim

#endif
