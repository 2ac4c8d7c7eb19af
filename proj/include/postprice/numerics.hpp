#pragma once

#include <cmath>
#include <functional>

namespace postprice::numerics {

inline constexpr double kBisectTol = 1e-12;
inline constexpr int kBisectMaxIter = 200;

// Bisection on a predicate that is false on the left of the root and true on
// the right. Returns the right end of the final bracket, where the predicate holds.
template <class Pred>
double bisect_predicate(Pred&& right_side, double lo, double hi,
                        double tol = kBisectTol, int max_iter = kBisectMaxIter) {
    for (int i = 0; i < max_iter && hi - lo > tol * std::fmax(1.0, std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (right_side(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 48);

// Maximizer of a unimodal function on [a,b].
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10);

}  // namespace postprice::numerics
