#pragma once

#include <string>

namespace postprice {

enum class CostKind { Zero, Linear, Quadratic, PowerLaw };

// Supply cost f on [0,1]. Quadratic means f(y) = a*y^2/2, PowerLaw means f(y) = k*y^s.
struct CostModel {
    CostKind kind = CostKind::Zero;
    double q = 0.0;  // Linear: price per unit
    double a = 0.0;  // Quadratic: curvature
    double s = 0.0;  // PowerLaw: exponent > 1
    double k = 0.0;  // PowerLaw: scale

    static CostModel zero();
    static CostModel linear(double q);
    static CostModel quadratic(double a);
    static CostModel power_law(double s, double k);

    bool strictly_convex() const;
};

enum class SetupCase { Case1, Case2, Case3, DegenerateEqualBounds };

// Supplier prior {f, p_low, p_high} plus derived constants.
struct Setup {
    CostModel cost;
    double p_low = 0.0;
    double p_high = 0.0;
    double c_low = 0.0;   // f'(0)
    double c_high = 0.0;  // f'(1)
    double rho_low = 1.0;
    double rho_high = 1.0;
    SetupCase kase = SetupCase::Case2;
};

std::string to_string(CostKind kind);
std::string to_string(SetupCase kase);

// f(y) for y in [0,1]; +infinity beyond capacity.
double extended_cost(const CostModel& cost, double y);
double marginal_cost(const CostModel& cost, double y);
double inverse_marginal(const CostModel& cost, double p);

Setup classify(const CostModel& cost, double p_low, double p_high);

// h(p) = sup_{y>=0} p*y - f(y).
double conjugate(const Setup& setup, double p);
double conjugate_derivative(const Setup& setup, double p);
// F_p(y) = p*y - f(y).
double profit(const Setup& setup, double p, double y);
// The unique omega in [0, rho_low] with F_{p_low}(omega) = target.
double profit_inverse(const Setup& setup, double target);

}  // namespace postprice
