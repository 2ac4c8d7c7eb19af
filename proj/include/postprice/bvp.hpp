#pragma once

#include <optional>
#include <vector>

#include "postprice/cost_model.hpp"

namespace postprice {

inline constexpr int kDefaultShootingSteps = 2000;
inline constexpr double kDenominatorGuard = 1e-12;
inline constexpr double kInitialUpperBracket = 64.0;
inline constexpr double kUpperBracketCap = 1024.0;

// Backward RK4 solution of phi' = alpha (phi - f') / h'(phi) on a uniform grid.
struct IvpSolution {
    std::vector<double> grid;
    std::vector<double> values;
    double step = 0.0;
};

struct OptimalParams {
    double alpha_star = 1.0;
    double omega_star = 0.0;
    std::optional<double> u_star;
    SetupCase kase = SetupCase::Case2;
    // |h(p_low) - alpha * F(omega)|
    double threshold_residual = 0.0;
    // |Gamma_1(omega,u) - Gamma_2(u)| in Case1, |alpha - Gamma_hat(omega)| in Case2/Case3.
    double gamma_residual = 0.0;
};

// Terminal value c_high at u, integrated leftward to omega.
IvpSolution solve_ivp_case1(const Setup& setup, double omega, double u, double alpha,
                            int steps);
// Terminal value p_high at rho, integrated leftward to omega.
IvpSolution solve_ivp_case3(const Setup& setup, double omega, double rho, double alpha,
                            int steps);

// The Gamma functions return the smallest alpha >= 1 meeting the boundary condition;
// when the exact root lies below 1 the result is 1.
double gamma1(const Setup& setup, double omega, double u, double tol,
              int steps = kDefaultShootingSteps);
double gamma2(const Setup& setup, double u, double tol);
double gamma2_hat(const Setup& setup, double omega, double tol);
double gamma1_hat(const Setup& setup, double omega, double rho, double tol,
                  int steps = kDefaultShootingSteps);

// Terminal value phi(1) of phi' = alpha (phi - f'), phi(start) = anchor.
double exp_segment_terminal(const Setup& setup, double start, double anchor, double alpha);
// Same solution sampled on an ascending grid starting at grid.front().
std::vector<double> exp_segment_values(const Setup& setup, const std::vector<double>& grid,
                                       double anchor, double alpha);

// Defining equation of Gamma_2 written in exponential-integral form:
// int_u^1 G f'(y) e^{-yG} dy - c_high e^{-uG} + p_high e^{-G}.
double gamma2_equation_residual(const Setup& setup, double u, double gamma);
// Same with (p_low, omega) in place of (c_high, u).
double gamma2_hat_equation_residual(const Setup& setup, double omega, double gamma);

OptimalParams solve_optimal(const Setup& setup, double tol);

}  // namespace postprice
