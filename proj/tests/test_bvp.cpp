#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "postprice/bvp.hpp"
#include "postprice/cost_model.hpp"
#include "postprice/errors.hpp"

using namespace postprice;
using doctest::Approx;

namespace {

const Setup& case1() {
    static const Setup s = classify(CostModel::quadratic(1.0), 0.3, 3.0);
    return s;
}

const OptimalParams& case1_params() {
    static const OptimalParams p = solve_optimal(case1(), 1e-8);
    return p;
}

// Independent root finder for the closed-form relations below.
template <class F>
double root(F f, double lo, double hi) {
    boost::math::tools::eps_tolerance<double> tol(50);
    auto r = boost::math::tools::bisect(f, lo, hi, tol);
    return 0.5 * (r.first + r.second);
}

// For f(y) = y^2/2 the segment phi' = alpha (phi - y) through phi(start) = anchor reads
// phi(y) = y + 1/alpha + (anchor - start - 1/alpha) exp(alpha (y - start)).
double quadratic_exp_terminal(double start, double anchor, double alpha) {
    return 1.0 + 1.0 / alpha + (anchor - start - 1.0 / alpha) * std::exp(alpha * (1.0 - start));
}

// Separation of variables for phi' = alpha (phi - y) / phi with eta = phi / y:
// integral of -eta / (eta^2 - alpha eta + alpha) from phi(omega)/omega to 1/u equals ln(u/omega).
double separation_residual(double phi_omega, double omega, double u, double alpha) {
    auto g = [alpha](double eta) { return -eta / (eta * eta - alpha * eta + alpha); };
    const double lhs =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, phi_omega / omega, 1.0 / u, 15, 1e-14);
    return lhs - std::log(u / omega);
}

}  // namespace

TEST_CASE("backward IVP hits the terminal value exactly") {
    const IvpSolution sol = solve_ivp_case1(case1(), 0.1, 0.6, 3.0, 10000);
    REQUIRE(sol.values.size() == 10001);
    CHECK(sol.values.back() == 1.0);
    CHECK(sol.grid.front() == Approx(0.1));
    CHECK(sol.grid.back() == Approx(0.6));
    CHECK(sol.values.front() > 0.1);
    CHECK(sol.values.front() < 1.0);
}

TEST_CASE("IVP samples are finite, non-decreasing and above marginal cost") {
    for (double alpha : {1.5, 3.0, 6.0}) {
        const IvpSolution sol = solve_ivp_case1(case1(), 0.1, 0.6, alpha, 4000);
        for (std::size_t i = 0; i < sol.values.size(); ++i) {
            CHECK(std::isfinite(sol.values[i]));
            CHECK(sol.values[i] >= marginal_cost(case1().cost, sol.grid[i]) - 1e-9);
            if (i) CHECK(sol.values[i] >= sol.values[i - 1]);
        }
    }
}

TEST_CASE("IVP agrees with the separated-variables solution") {
    for (double alpha : {2.0, 3.0, 3.9}) {
        const double omega = 0.1, u = 0.6;
        const IvpSolution sol = solve_ivp_case1(case1(), omega, u, alpha, 10000);
        CHECK(std::fabs(separation_residual(sol.values.front(), omega, u, alpha)) < 1e-8);
    }
    const auto& p = case1_params();
    const IvpSolution sol = solve_ivp_case1(case1(), p.omega_star, *p.u_star, p.alpha_star, 10000);
    CHECK(sol.values.front() == Approx(0.3).epsilon(1e-4));
    CHECK(std::fabs(separation_residual(0.3, p.omega_star, *p.u_star, p.alpha_star)) < 1e-6);
}

TEST_CASE("IVP argument validation") {
    CHECK_THROWS_AS(solve_ivp_case1(case1(), 0.1, 0.6, 3.0, 999), validation_error);
    CHECK_THROWS_AS(solve_ivp_case1(case1(), 0.1, 0.6, 0.5, 2000), domain_error);
    CHECK_THROWS_AS(solve_ivp_case1(case1(), 0.6, 0.1, 3.0, 2000), domain_error);
    const Setup lin = classify(CostModel::linear(0.1), 0.3, 3.0);
    CHECK_THROWS_AS(solve_ivp_case1(lin, 0.1, 0.6, 3.0, 2000), unsupported_operation);
}

TEST_CASE("ODE residual of the IVP at the optimum") {
    const auto& p = case1_params();
    const IvpSolution sol = solve_ivp_case1(case1(), p.omega_star, *p.u_star, p.alpha_star, 10000);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < sol.values.size(); ++i) {
        const double slope = (sol.values[i + 1] - sol.values[i - 1]) / (2.0 * sol.step);
        const double y = sol.grid[i];
        const double rhs = p.alpha_star * (sol.values[i] - y) / conjugate_derivative(case1(), sol.values[i]);
        worst = std::fmax(worst, std::fabs(slope - rhs) / rhs);
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("Gamma_2 matches the closed-form quadratic relation") {
    for (double u : {0.2, 0.4, 0.6, 0.8}) {
        const double g = gamma2(case1(), u, 1e-10);
        // exp(alpha (1-u)) (alpha (1-u) - 1) = alpha (p_high - 1) - 1
        auto rel = [u](double a) {
            return std::exp(a * (1 - u)) * (a * (1 - u) - 1) - (a * (3.0 - 1) - 1);
        };
        const double oracle = root(rel, 1.0 / (1 - u) + 1e-9, 200.0);
        CHECK(g == Approx(oracle).epsilon(1e-8));
        CHECK(quadratic_exp_terminal(u, 1.0, g) == Approx(3.0).epsilon(1e-6));
        CHECK(std::fabs(gamma2_equation_residual(case1(), u, g)) < 1e-8);
    }
}

TEST_CASE("Gamma_1 and Gamma_2 agree at the Case1 optimum") {
    const auto& p = case1_params();
    REQUIRE(p.u_star);
    CHECK(p.omega_star < *p.u_star);
    CHECK(*p.u_star < 1.0);
    const double g1 = gamma1(case1(), p.omega_star, *p.u_star, 1e-9);
    const double g2 = gamma2(case1(), *p.u_star, 1e-9);
    CHECK(std::fabs(g1 - p.alpha_star) < 1e-6);
    CHECK(std::fabs(g2 - p.alpha_star) < 1e-6);
    const double h_low = conjugate(case1(), 0.3);
    CHECK(std::fabs(h_low / profit(case1(), 0.3, p.omega_star) - g2) < 1e-6);
    CHECK(p.threshold_residual < 1e-8);
    CHECK(p.gamma_residual < 1e-6);
}

TEST_CASE("Gamma_1 grows without bound as omega approaches u") {
    // omega must stay below rho_low = 0.3 for phi(omega) = p_low to sit above marginal cost.
    const double u = 0.25;
    double prev = 0.0;
    for (double gap : {0.15, 0.1, 0.05, 0.02, 0.01}) {
        const double g = gamma1(case1(), u - gap, u, 1e-8);
        CHECK(g > prev);
        prev = g;
    }
    CHECK(prev > 100.0);
    CHECK_THROWS_AS(gamma1(case1(), u - 1e-4, u, 1e-8), bracket_failure);
}

TEST_CASE("Gamma_2 grows without bound as u approaches 1") {
    CHECK(gamma2(case1(), 0.99, 1e-8) > gamma2(case1(), 0.9, 1e-8));
    CHECK(gamma2(case1(), 0.99, 1e-8) > 100.0);
    // The root at u = 0.999 lies beyond the bracket cap.
    CHECK_THROWS_AS(gamma2(case1(), 0.999, 1e-8), bracket_failure);
}

TEST_CASE("monotonicity of Gamma_1 in u and Gamma_2 in u") {
    const double omega = 0.05;
    double prev1 = INFINITY, prev2 = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double u = 0.15 + 0.08 * j;
        const double g1 = gamma1(case1(), omega, u, 1e-8);
        const double g2 = gamma2(case1(), u, 1e-8);
        CHECK(g1 < prev1);
        CHECK(g2 > prev2);
        prev1 = g1;
        prev2 = g2;
    }
}

TEST_CASE("Gamma_1 converges under grid refinement") {
    const auto& p = case1_params();
    const double tol = 1e-8;
    const double coarse = gamma1(case1(), p.omega_star, *p.u_star, tol * 1e-2, kDefaultShootingSteps);
    const double fine = gamma1(case1(), p.omega_star, *p.u_star, tol * 1e-2, 2 * kDefaultShootingSteps);
    CHECK(std::fabs(coarse - fine) < 10 * tol);
}

TEST_CASE("Gamma_hat_2 for Case2") {
    const Setup s = classify(CostModel::quadratic(1.0), 1.1, 5.0);
    const double g = gamma2_hat(s, 0.5, 1e-10);
    CHECK(g > 1.0);
    CHECK(std::isfinite(g));
    CHECK(quadratic_exp_terminal(0.5, 1.1, g) == Approx(5.0).epsilon(1e-7));
    CHECK(std::fabs(gamma2_hat_equation_residual(s, 0.5, g)) < 1e-8);
    // Larger omega leaves less room to climb to p_high.
    double prev = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double w = 0.05 + 0.09 * j;
        const double cur = gamma2_hat(s, w, 1e-9);
        CHECK(cur > prev);
        prev = cur;
    }
    const Setup flat = classify(CostModel::quadratic(1.0), 1.1, 1.1);
    CHECK(gamma2_hat(flat, 1.0 - 1e-6, 1e-10) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Gamma_hat_1 fixed point for Case3") {
    const Setup s = classify(CostModel::quadratic(1.0), 0.3, 0.8);
    const OptimalParams p = solve_optimal(s, 1e-8);
    CHECK(p.kase == SetupCase::Case3);
    CHECK(!p.u_star);
    const double g = gamma1_hat(s, p.omega_star, s.rho_high, 1e-9);
    CHECK(std::fabs(conjugate(s, 0.3) / profit(s, 0.3, p.omega_star) - g) < 1e-6);
    const Setup eq = classify(CostModel::quadratic(1.0), 0.5, 0.5);
    CHECK(gamma1_hat(eq, 0.499, 0.5, 1e-10) == 1.0);
}

TEST_CASE("solve_optimal on degenerate and all three cases") {
    const auto q = CostModel::quadratic(1.0);
    const OptimalParams d = solve_optimal(classify(q, 0.3, 0.3), 1e-8);
    CHECK(d.alpha_star == 1.0);
    CHECK(d.omega_star == Approx(0.3));

    for (auto [lo, hi] : {std::pair{0.3, 3.0}, std::pair{1.1, 5.0}, std::pair{0.3, 0.8}}) {
        const Setup s = classify(q, lo, hi);
        const OptimalParams p = solve_optimal(s, 1e-8);
        CHECK(p.alpha_star >= 1.0);
        CHECK(p.omega_star > 0.0);
        CHECK(p.omega_star <= s.rho_low);
        CHECK(std::fabs(profit(s, lo, p.omega_star) * p.alpha_star - conjugate(s, lo)) < 1e-8);
    }
    CHECK_THROWS_AS(solve_optimal(classify(CostModel::zero(), 1.0, 2.0), 1e-8), unsupported_operation);
}

TEST_CASE("alpha* increases in p_high and decreases in p_low") {
    const auto q = CostModel::quadratic(1.0);
    double prev = 0.0;
    for (double hi : {0.3, 0.5, 0.9, 1.3, 2.0, 4.0, 7.1}) {
        const double a = solve_optimal(classify(q, 0.3, hi), 1e-8).alpha_star;
        CHECK(a > prev);
        prev = a;
    }
    prev = INFINITY;
    for (double lo : {0.2, 0.4, 0.9, 1.2, 2.0}) {
        const double a = solve_optimal(classify(q, lo, 3.0), 1e-8).alpha_star;
        CHECK(a < prev);
        prev = a;
    }
}

TEST_CASE("exponential segment terminal matches the closed form") {
    for (double alpha : {1.0, 2.5, 7.0}) {
        for (double start : {0.0, 0.3, 0.9}) {
            CHECK(exp_segment_terminal(case1(), start, 1.2, alpha) ==
                  Approx(quadratic_exp_terminal(start, 1.2, alpha)).epsilon(1e-10));
        }
    }
    const std::vector<double> grid{0.4, 0.55, 0.7, 1.0};
    const auto vals = exp_segment_values(case1(), grid, 1.0, 2.0);
    CHECK(vals.front() == 1.0);
    CHECK(vals.back() == Approx(quadratic_exp_terminal(0.4, 1.0, 2.0)).epsilon(1e-10));
}
