#include "postprice/bvp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/numeric/odeint/algebra/vector_space_algebra.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "postprice/errors.hpp"
#include "postprice/numerics.hpp"

namespace postprice {

namespace {

namespace odeint = boost::numeric::odeint;
using Stepper = odeint::runge_kutta4<double, double, double, double, odeint::vector_space_algebra>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExpCap = 700.0;

struct Shot {
    double value = 0.0;
    bool failed = false;
    std::string reason;
};

// Integrates phi' = alpha (phi - f') / h'(phi) from (right, terminal) down to left.
Shot shoot(const Setup& setup, double left, double right, double terminal, double alpha,
           int steps, IvpSolution* out) {
    Shot shot;
    const double h = (right - left) / steps;
    bool degenerate = false;
    auto rhs = [&](const double& phi, double& dphi, double y) {
        y = std::fmin(std::fmax(y, 0.0), 1.0);
        if (!(phi > setup.c_low + kDenominatorGuard)) {
            degenerate = true;
            dphi = 0.0;
            return;
        }
        const double hp = conjugate_derivative(setup, phi);
        if (!(hp > kDenominatorGuard)) {
            degenerate = true;
            dphi = 0.0;
            return;
        }
        dphi = alpha * (phi - marginal_cost(setup.cost, y)) / hp;
    };
    if (out) {
        out->grid.assign(steps + 1, 0.0);
        out->values.assign(steps + 1, 0.0);
        out->step = h;
        out->grid[steps] = right;
        out->values[steps] = terminal;
    }
    Stepper stepper;
    double phi = terminal;
    const double cap = setup.c_high + kDenominatorGuard;
    for (int i = steps - 1; i >= 0; --i) {
        const double y_from = left + (i + 1) * h;
        stepper.do_step(rhs, phi, y_from, -h);
        const double y = i == 0 ? left : left + i * h;
        if (degenerate || !std::isfinite(phi)) {
            shot.failed = true;
            shot.reason = "denominator degeneracy near y=" + std::to_string(y);
            return shot;
        }
        if (phi < marginal_cost(setup.cost, y) + kDenominatorGuard) {
            shot.failed = true;
            shot.reason = "solution fell to the marginal cost at y=" + std::to_string(y);
            return shot;
        }
        if (phi > cap) {
            shot.failed = true;
            shot.reason = "solution exceeded c_high at y=" + std::to_string(y);
            return shot;
        }
        if (out) {
            out->grid[i] = y;
            out->values[i] = phi;
        }
    }
    shot.value = phi;
    return shot;
}

IvpSolution solve_backward(const Setup& setup, double omega, double right, double terminal,
                           double alpha, int steps, const char* op) {
    if (!setup.cost.strictly_convex())
        throw unsupported_operation(std::string(op) + ": requires a strictly convex cost");
    if (!(omega >= 0.0 && omega < right && right <= 1.0))
        throw domain_error(std::string(op) + ": requires 0 <= omega < end <= 1");
    if (!(alpha >= 1.0)) throw domain_error(std::string(op) + ": requires alpha >= 1");
    if (steps < 1000) throw validation_error(std::string(op) + ": requires steps >= 1000");
    IvpSolution sol;
    const Shot shot = shoot(setup, omega, right, terminal, alpha, steps, &sol);
    if (shot.failed) throw integration_failure(std::string(op) + ": " + shot.reason);
    return sol;
}

double bisect_tol(double tol) { return std::fmax(tol * 1e-3, 1e-15); }

// Smallest alpha >= 1 at which right_side holds, assuming right_side is monotone in alpha.
template <class Pred>
double minimal_alpha(Pred&& right_side, double tol, const std::string& name) {
    if (right_side(1.0)) return 1.0;
    double lo = 1.0;
    double hi = kInitialUpperBracket;
    while (!right_side(hi)) {
        if (hi >= kUpperBracketCap)
            throw bracket_failure(name + ": no root below alpha = " + std::to_string(hi));
        lo = hi;
        hi *= 2.0;
    }
    return numerics::bisect_predicate(right_side, lo, hi, bisect_tol(tol));
}

double quad(const std::function<double(double)>& f, double a, double b, double abs_tol) {
    if (b <= a) return 0.0;
    // Coarse estimate sets the scale so the absolute tolerance stays meaningful
    // when the exponential weight is large.
    const int panels = 16;
    const double w = (b - a) / panels;
    double coarse = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + i * w;
        coarse += w / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * w) + f(x0 + w));
    }
    return numerics::adaptive_simpson(f, a, b, abs_tol * std::fmax(1.0, std::fabs(coarse)), 30);
}

bool shot_at_or_below(const Shot& s, double target) { return s.failed || s.value <= target; }

}  // namespace

IvpSolution solve_ivp_case1(const Setup& setup, double omega, double u, double alpha,
                            int steps) {
    return solve_backward(setup, omega, u, setup.c_high, alpha, steps, "solve_ivp_case1");
}

IvpSolution solve_ivp_case3(const Setup& setup, double omega, double rho, double alpha,
                            int steps) {
    return solve_backward(setup, omega, rho, setup.p_high, alpha, steps, "solve_ivp_case3");
}

double gamma1(const Setup& setup, double omega, double u, double tol, int steps) {
    if (!setup.cost.strictly_convex()) throw unsupported_operation("gamma1: strictly convex cost required");
    if (!(omega > 0.0 && omega < u && u <= 1.0))
        throw domain_error("gamma1: requires 0 < omega < u <= 1");
    return minimal_alpha(
        [&](double a) {
            return shot_at_or_below(shoot(setup, omega, u, setup.c_high, a, steps, nullptr),
                                    setup.p_low);
        },
        tol, "gamma1");
}

double gamma1_hat(const Setup& setup, double omega, double rho, double tol, int steps) {
    if (!setup.cost.strictly_convex())
        throw unsupported_operation("gamma1_hat: strictly convex cost required");
    if (setup.p_low == setup.p_high && rho - omega <= 1e-12) return 1.0;
    if (!(omega >= 0.0 && omega < rho && rho <= setup.rho_high + 1e-12))
        throw domain_error("gamma1_hat: requires 0 <= omega < rho <= rho_high");
    return minimal_alpha(
        [&](double a) {
            return shot_at_or_below(shoot(setup, omega, rho, setup.p_high, a, steps, nullptr),
                                    setup.p_low);
        },
        tol, "gamma1_hat");
}

double exp_segment_terminal(const Setup& setup, double start, double anchor, double alpha) {
    if (alpha * (1.0 - start) > kExpCap) return kInf;
    auto integrand = [&](double y) {
        return alpha * (anchor - marginal_cost(setup.cost, y)) * std::exp(alpha * (1.0 - y));
    };
    return anchor + quad(integrand, start, 1.0, 1e-10);
}

std::vector<double> exp_segment_values(const Setup& setup, const std::vector<double>& grid,
                                       double anchor, double alpha) {
    std::vector<double> values(grid.size(), anchor);
    double excess = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double y0 = grid[i - 1];
        const double y1 = grid[i];
        auto integrand = [&](double y) {
            return alpha * (anchor - marginal_cost(setup.cost, y)) * std::exp(alpha * (y1 - y));
        };
        excess = excess * std::exp(alpha * (y1 - y0)) +
                 numerics::adaptive_simpson(integrand, y0, y1, 1e-15, 20);
        values[i] = anchor + excess;
    }
    return values;
}

double gamma2(const Setup& setup, double u, double tol) {
    if (!(setup.p_high > setup.c_high))
        throw domain_error("gamma2: requires p_high > c_high");
    if (!(u >= 0.0 && u < 1.0)) throw domain_error("gamma2: requires 0 <= u < 1");
    return minimal_alpha(
        [&](double a) { return exp_segment_terminal(setup, u, setup.c_high, a) >= setup.p_high; },
        tol, "gamma2");
}

double gamma2_hat(const Setup& setup, double omega, double tol) {
    if (!(setup.p_low >= setup.c_high))
        throw domain_error("gamma2_hat: requires p_low >= c_high");
    if (!(omega >= 0.0 && omega < 1.0)) throw domain_error("gamma2_hat: requires 0 <= omega < 1");
    return minimal_alpha(
        [&](double a) {
            return exp_segment_terminal(setup, omega, setup.p_low, a) >= setup.p_high;
        },
        tol, "gamma2_hat");
}

double gamma2_equation_residual(const Setup& setup, double u, double gamma) {
    auto integrand = [&](double y) {
        return gamma * marginal_cost(setup.cost, y) * std::exp(-y * gamma);
    };
    return numerics::adaptive_simpson(integrand, u, 1.0, 1e-13, 40) -
           setup.c_high * std::exp(-u * gamma) + setup.p_high * std::exp(-gamma);
}

double gamma2_hat_equation_residual(const Setup& setup, double omega, double gamma) {
    auto integrand = [&](double y) {
        return gamma * marginal_cost(setup.cost, y) * std::exp(-y * gamma);
    };
    return numerics::adaptive_simpson(integrand, omega, 1.0, 1e-13, 40) -
           setup.p_low * std::exp(-omega * gamma) + setup.p_high * std::exp(-gamma);
}

namespace {

OptimalParams solve_case1(const Setup& setup, double tol) {
    const double h_low = conjugate(setup, setup.p_low);
    const double inner = tol * 1e-1;
    // True when u lies at or beyond the crossing Gamma_2(u) = Gamma_1(omega(u), u).
    auto right_side = [&](double u) {
        double g2;
        try {
            g2 = gamma2(setup, u, inner);
        } catch (const bracket_failure&) {
            return true;
        }
        const double omega = profit_inverse(setup, h_low / g2);
        if (omega >= u) return false;
        double g1;
        try {
            g1 = gamma1(setup, omega, u, inner);
        } catch (const bracket_failure&) {
            return false;
        }
        return g2 - g1 > 0.0;
    };
    const double u = numerics::bisect_predicate(right_side, 0.0, 1.0, 1e-12);
    OptimalParams out;
    out.kase = SetupCase::Case1;
    out.u_star = u;
    try {
        out.alpha_star = gamma2(setup, u, inner);
    } catch (const bracket_failure& e) {
        throw bracket_failure(std::string("Case1 Gamma_2 equation at u*: ") + e.what());
    }
    out.omega_star = profit_inverse(setup, h_low / out.alpha_star);
    if (!(out.omega_star < u))
        throw bracket_failure("Case1 crossing equation: omega* did not fall below u*");
    double g1;
    try {
        g1 = gamma1(setup, out.omega_star, u, inner);
    } catch (const computation_error& e) {
        throw bracket_failure(std::string("Case1 Gamma_1 shooting at (omega*, u*): ") + e.what());
    }
    out.gamma_residual = std::fabs(g1 - out.alpha_star);
    out.threshold_residual =
        std::fabs(h_low - out.alpha_star * profit(setup, setup.p_low, out.omega_star));
    return out;
}

template <class GammaHat>
OptimalParams solve_fixed_point(const Setup& setup, double tol, GammaHat&& gamma_hat,
                                const char* name) {
    const double h_low = conjugate(setup, setup.p_low);
    auto ratio = [&](double omega) { return h_low / profit(setup, setup.p_low, omega); };
    auto right_side = [&](double omega) {
        try {
            return ratio(omega) <= gamma_hat(omega);
        } catch (const bracket_failure&) {
            return true;
        }
    };
    const double omega = numerics::bisect_predicate(right_side, 0.0, setup.rho_low, 1e-13);
    OptimalParams out;
    out.kase = setup.kase;
    out.omega_star = omega;
    out.alpha_star = ratio(omega);
    double g;
    try {
        g = gamma_hat(omega);
    } catch (const computation_error& e) {
        throw bracket_failure(std::string(name) + " at omega*: " + e.what());
    }
    out.gamma_residual = std::fabs(g - out.alpha_star);
    out.threshold_residual =
        std::fabs(h_low - out.alpha_star * profit(setup, setup.p_low, omega));
    (void)tol;
    return out;
}

}  // namespace

OptimalParams solve_optimal(const Setup& setup, double tol) {
    if (!setup.cost.strictly_convex())
        throw unsupported_operation("solve_optimal: linear and zero costs use the analytic form");
    if (!(tol >= 1e-10)) throw validation_error("solve_optimal: tol must be >= 1e-10");
    switch (setup.kase) {
        case SetupCase::DegenerateEqualBounds: {
            OptimalParams out;
            out.kase = setup.kase;
            out.alpha_star = 1.0;
            out.omega_star = setup.rho_low;
            return out;
        }
        case SetupCase::Case1:
            return solve_case1(setup, tol);
        case SetupCase::Case2:
            return solve_fixed_point(
                setup, tol, [&](double w) { return gamma2_hat(setup, w, tol * 1e-1); },
                "Case2 Gamma_hat_2 equation");
        case SetupCase::Case3:
            return solve_fixed_point(
                setup, tol,
                [&](double w) { return gamma1_hat(setup, w, setup.rho_high, tol * 1e-1); },
                "Case3 Gamma_hat_1 shooting");
    }
    throw validation_error("solve_optimal: unknown case");
}

}  // namespace postprice
