#include "postprice/offline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "postprice/errors.hpp"

namespace postprice {

namespace {

// Utilization at which marginal cost reaches density d (capped at capacity).
double stop_level(const Setup& setup, double d) {
    if (d <= setup.c_low) return 0.0;
    if (d >= setup.c_high) return 1.0;
    return inverse_marginal(setup.cost, d);
}

}  // namespace

OfflineResult fractional_optimum(const Setup& setup, const ArrivalInstance& instance) {
    OfflineResult res;
    res.kind = OfflineResult::Kind::Fractional;
    res.allocation.assign(instance.size(), 0.0);
    std::vector<std::size_t> order(instance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return instance[a].v / instance[a].r > instance[b].v / instance[b].r;
    });
    double y = 0.0;
    double value = 0.0;
    for (std::size_t i : order) {
        const Agent& a = instance[i];
        const double d = a.v / a.r;
        if (!setup.cost.strictly_convex() && d <= setup.c_low) break;
        const double target = stop_level(setup, d);
        if (target <= y) break;
        const double x = std::min(1.0, (target - y) / a.r);
        res.allocation[i] = x;
        y += x * a.r;
        value += x * a.v;
        if (x < 1.0) break;
    }
    y = std::min(y, 1.0);
    res.total_y = y;
    res.value = value - extended_cost(setup.cost, y);
    return res;
}

OfflineResult exact_optimum(const Setup& setup, const ArrivalInstance& instance) {
    const std::size_t n = instance.size();
    if (n > kExactLimit)
        throw validation_error("exact_optimum: at most " + std::to_string(kExactLimit) +
                               " agents supported, got " + std::to_string(n));
    OfflineResult res;
    res.kind = OfflineResult::Kind::ExactBinary;
    res.allocation.assign(n, 0.0);
    // Gray-code walk: each step flips one agent.
    std::uint32_t mask = 0;
    std::uint32_t best_mask = 0;
    double sum_v = 0.0;
    double sum_r = 0.0;
    double best = 0.0;
    const std::uint32_t total = 1u << n;
    for (std::uint32_t g = 1; g < total; ++g) {
        const auto bit = static_cast<std::size_t>(__builtin_ctz(g));
        mask ^= 1u << bit;
        const double sign = (mask >> bit) & 1u ? 1.0 : -1.0;
        sum_v += sign * instance[bit].v;
        sum_r += sign * instance[bit].r;
        if (sum_r > 1.0 + 1e-12) continue;
        const double val = sum_v - extended_cost(setup.cost, std::clamp(sum_r, 0.0, 1.0));
        if (val > best) {
            best = val;
            best_mask = mask;
        }
    }
    // Recompute the winner exactly to shed accumulated rounding.
    double v = 0.0, r = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if ((best_mask >> i) & 1u) {
            res.allocation[i] = 1.0;
            v += instance[i].v;
            r += instance[i].r;
        }
    res.total_y = r;
    res.value = best_mask ? v - extended_cost(setup.cost, std::min(r, 1.0)) : 0.0;
    return res;
}

double dual_objective(const Setup& setup, const ArrivalInstance& instance, double p) {
    if (p < 0.0) throw domain_error("dual_objective: negative price");
    double total = conjugate(setup, p);
    for (const Agent& a : instance) total += std::max(a.v - p * a.r, 0.0);
    return total;
}

}  // namespace postprice
