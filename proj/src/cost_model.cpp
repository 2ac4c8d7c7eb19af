#include "postprice/cost_model.hpp"

#include <cmath>
#include <limits>

#include "postprice/errors.hpp"
#include "postprice/numerics.hpp"

namespace postprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double y, const char* op) {
    if (!(y >= 0.0 && y <= 1.0))
        throw domain_error(std::string(op) + ": utilization " + std::to_string(y) +
                           " outside [0,1]");
}

void validate_cost(const CostModel& c) {
    switch (c.kind) {
        case CostKind::Zero:
            return;
        case CostKind::Linear:
            if (!(c.q >= 0.0) || !std::isfinite(c.q))
                throw validation_error("linear cost requires q >= 0");
            return;
        case CostKind::Quadratic:
            if (!(c.a > 0.0) || !std::isfinite(c.a))
                throw validation_error("quadratic cost requires a > 0");
            return;
        case CostKind::PowerLaw:
            if (!(c.s > 1.0) || !(c.k > 0.0) || !std::isfinite(c.s) || !std::isfinite(c.k))
                throw validation_error("power-law cost requires s > 1 and k > 0");
            return;
    }
}

}  // namespace

CostModel CostModel::zero() { return {}; }

CostModel CostModel::linear(double q) {
    CostModel c;
    c.kind = CostKind::Linear;
    c.q = q;
    validate_cost(c);
    return c;
}

CostModel CostModel::quadratic(double a) {
    CostModel c;
    c.kind = CostKind::Quadratic;
    c.a = a;
    validate_cost(c);
    return c;
}

CostModel CostModel::power_law(double s, double k) {
    CostModel c;
    c.kind = CostKind::PowerLaw;
    c.s = s;
    c.k = k;
    validate_cost(c);
    return c;
}

bool CostModel::strictly_convex() const {
    return kind == CostKind::Quadratic || kind == CostKind::PowerLaw;
}

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::Zero: return "zero";
        case CostKind::Linear: return "linear";
        case CostKind::Quadratic: return "quadratic";
        case CostKind::PowerLaw: return "power_law";
    }
    return "unknown";
}

std::string to_string(SetupCase kase) {
    switch (kase) {
        case SetupCase::Case1: return "Case1";
        case SetupCase::Case2: return "Case2";
        case SetupCase::Case3: return "Case3";
        case SetupCase::DegenerateEqualBounds: return "DegenerateEqualBounds";
    }
    return "unknown";
}

double extended_cost(const CostModel& cost, double y) {
    if (y < 0.0) throw domain_error("extended_cost: negative utilization");
    if (y > 1.0) return kInf;
    switch (cost.kind) {
        case CostKind::Zero: return 0.0;
        case CostKind::Linear: return cost.q * y;
        case CostKind::Quadratic: return 0.5 * cost.a * y * y;
        case CostKind::PowerLaw: return cost.k * std::pow(y, cost.s);
    }
    return 0.0;
}

double marginal_cost(const CostModel& cost, double y) {
    check_unit(y, "marginal_cost");
    switch (cost.kind) {
        case CostKind::Zero: return 0.0;
        case CostKind::Linear: return cost.q;
        case CostKind::Quadratic: return cost.a * y;
        case CostKind::PowerLaw: return cost.k * cost.s * std::pow(y, cost.s - 1.0);
    }
    return 0.0;
}

double inverse_marginal(const CostModel& cost, double p) {
    if (!cost.strictly_convex())
        throw unsupported_operation("inverse_marginal: marginal cost of " + to_string(cost.kind) +
                                    " cost is not invertible");
    const double c_high = marginal_cost(cost, 1.0);
    if (!(p >= 0.0 && p <= c_high))
        throw domain_error("inverse_marginal: price " + std::to_string(p) +
                           " outside [c_low, c_high]");
    if (cost.kind == CostKind::Quadratic) return p / cost.a;
    return std::pow(p / (cost.k * cost.s), 1.0 / (cost.s - 1.0));
}

Setup classify(const CostModel& cost, double p_low, double p_high) {
    validate_cost(cost);
    if (!std::isfinite(p_low) || !std::isfinite(p_high))
        throw validation_error("price bounds must be finite");
    if (p_low > p_high)
        throw validation_error("price bounds require p_low <= p_high");
    Setup s;
    s.cost = cost;
    s.p_low = p_low;
    s.p_high = p_high;
    s.c_low = marginal_cost(cost, 0.0);
    s.c_high = marginal_cost(cost, 1.0);
    if (!(s.c_low < p_low))
        throw validation_error("nice-setup condition violated: f'(0) = " + std::to_string(s.c_low) +
                               " must be below p_low = " + std::to_string(p_low));
    auto rho = [&](double p) {
        return (p > s.c_low && p < s.c_high) ? inverse_marginal(cost, p) : 1.0;
    };
    s.rho_low = rho(p_low);
    s.rho_high = rho(p_high);
    if (p_low == p_high)
        s.kase = SetupCase::DegenerateEqualBounds;
    else if (s.c_high <= p_low)
        s.kase = SetupCase::Case2;
    else if (p_high <= s.c_high)
        s.kase = SetupCase::Case3;
    else
        s.kase = SetupCase::Case1;
    return s;
}

double conjugate(const Setup& setup, double p) {
    if (p < 0.0) throw domain_error("conjugate: negative price");
    if (p < setup.c_low) return 0.0;
    if (p > setup.c_high) return p - extended_cost(setup.cost, 1.0);
    if (!setup.cost.strictly_convex()) return 0.0;  // p == q for linear cost
    const double y = inverse_marginal(setup.cost, p);
    return p * y - extended_cost(setup.cost, y);
}

double conjugate_derivative(const Setup& setup, double p) {
    if (p < setup.c_low) throw domain_error("conjugate_derivative: price below c_low");
    if (p > setup.c_high) return 1.0;
    if (!setup.cost.strictly_convex()) return 0.0;
    return inverse_marginal(setup.cost, p);
}

double profit(const Setup& setup, double p, double y) {
    if (y > 1.0)
        throw domain_error("profit: utilization beyond capacity has infinite cost");
    if (y < 0.0) throw domain_error("profit: negative utilization");
    return p * y - extended_cost(setup.cost, y);
}

double profit_inverse(const Setup& setup, double target) {
    const double p = setup.p_low;
    const double top = profit(setup, p, setup.rho_low);
    if (target < 0.0 || target > top * (1.0 + 1e-15) + 1e-300)
        throw domain_error("profit_inverse: target " + std::to_string(target) +
                           " outside [0, F(rho_low)]");
    if (target >= top) return setup.rho_low;
    switch (setup.cost.kind) {
        case CostKind::Zero:
        case CostKind::Linear:
            return target / (p - setup.cost.q);
        case CostKind::Quadratic: {
            const double a = setup.cost.a;
            // Smaller root of a*y^2/2 - p*y + target = 0, in cancellation-free form.
            const double disc = std::sqrt(std::fmax(p * p - 2.0 * a * target, 0.0));
            return 2.0 * target / (p + disc);
        }
        case CostKind::PowerLaw:
            break;
    }
    return numerics::bisect_predicate(
        [&](double y) { return profit(setup, p, y) >= target; }, 0.0, setup.rho_low);
}

}  // namespace postprice
