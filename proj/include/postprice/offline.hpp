#pragma once

#include <cstddef>
#include <vector>

#include "postprice/cost_model.hpp"
#include "postprice/instance.hpp"

namespace postprice {

inline constexpr std::size_t kExactLimit = 22;

struct OfflineResult {
    enum class Kind { Fractional, ExactBinary };
    double value = 0.0;
    std::vector<double> allocation;
    double total_y = 0.0;
    Kind kind = Kind::Fractional;
};

OfflineResult fractional_optimum(const Setup& setup, const ArrivalInstance& instance);
OfflineResult exact_optimum(const Setup& setup, const ArrivalInstance& instance);
double dual_objective(const Setup& setup, const ArrivalInstance& instance, double p);

}  // namespace postprice
