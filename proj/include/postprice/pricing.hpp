#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "postprice/bvp.hpp"
#include "postprice/cost_model.hpp"

namespace postprice {

// phi(y) = scale * exp(rate * y - 1) + base with rate = 1/omega.
struct AnalyticExp {
    double base = 0.0;
    double scale = 1.0;
    double rate = 1.0;
};

// Monotone piecewise-linear interpolant through (grid, values).
struct SampledMonotone {
    std::vector<double> grid;
    std::vector<double> values;
};

// Flat at p_low on [0, omega), increasing on [omega, upper_bound], infinite beyond.
struct PricingFunction {
    double p_low = 0.0;
    double omega = 0.0;
    double upper_bound = 1.0;
    double alpha = 1.0;
    std::variant<AnalyticExp, SampledMonotone> segment;
    // Running integral of the sampled segment from grid.front(); empty for AnalyticExp.
    std::vector<double> cumulative;
};

PricingFunction make_analytic(double p_low, double omega, double q, double alpha);
PricingFunction make_sampled(double p_low, double omega, double upper_bound, double alpha,
                             std::vector<double> grid, std::vector<double> values);

// Closed-form optimum for zero and linear costs.
OptimalParams analytic_params(const Setup& setup);

PricingFunction build_optimal(const Setup& setup,
                              const std::optional<OptimalParams>& params = std::nullopt,
                              double tol = 1e-8);

// Returns +infinity beyond upper_bound.
double price_at(const PricingFunction& phi, double y);
double inverse_price(const PricingFunction& phi, double p);
// Integral of phi over [a, b] with 0 <= a <= b <= upper_bound.
double integrate_price(const PricingFunction& phi, double a, double b);

struct SufficiencyReport {
    bool flat_ok = false;
    double flat_margin = 0.0;  // F(omega) - h(p_low)/alpha
    bool ode_ok = false;
    double ode_worst_margin = 0.0;  // min of (1+slack) * rhs - phi', relative to rhs
    double ode_worst_y = 0.0;
    bool boundary_ok = false;
    double continuity_error = 0.0;  // |phi(omega) - p_low|
    double terminal_margin = 0.0;   // phi(upper_bound) - p_high
    bool passed() const { return flat_ok && ode_ok && boundary_ok; }
};

SufficiencyReport verify_sufficiency(const Setup& setup, const PricingFunction& phi,
                                     double alpha);

struct RatioBreakdown {
    double threshold_term = 0.0;
    double terminal_term = 0.0;
    double path_term = 0.0;
    double path_argmax = 0.0;
    double rho_phi = 0.0;
    double ratio = 0.0;
};

RatioBreakdown evaluate_ratio_detail(const Setup& setup, const PricingFunction& phi);
double evaluate_ratio(const Setup& setup, const PricingFunction& phi);

struct MultiSlotPricing {
    std::vector<PricingFunction> functions;
    std::vector<double> alphas;
    std::vector<Setup> effective;  // per-slot setups with inflated p_high
    double alpha() const;
};

MultiSlotPricing build_multislot(const std::vector<Setup>& slots, double tol = 1e-8);

nlohmann::json to_json(const PricingFunction& phi);
PricingFunction pricing_from_json(const nlohmann::json& doc);

}  // namespace postprice
