#include "postprice/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "postprice/errors.hpp"
#include "postprice/numerics.hpp"

namespace postprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSegmentIntervals = 10000;
constexpr double kEdgeSlack = 1e-12;

std::vector<double> uniform_grid(double a, double b, int intervals) {
    std::vector<double> g(intervals + 1);
    const double h = (b - a) / intervals;
    for (int i = 0; i <= intervals; ++i) g[i] = a + i * h;
    g.back() = b;
    return g;
}

double sampled_value(const SampledMonotone& s, double y) {
    const auto& g = s.grid;
    if (y <= g.front()) return s.values.front();
    if (y >= g.back()) return s.values.back();
    const auto it = std::upper_bound(g.begin(), g.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    const double t = (y - g[i - 1]) / (g[i] - g[i - 1]);
    return s.values[i - 1] + t * (s.values[i] - s.values[i - 1]);
}

double segment_value(const PricingFunction& phi, double y) {
    if (const auto* a = std::get_if<AnalyticExp>(&phi.segment))
        return a->scale * std::exp(a->rate * y - 1.0) + a->base;
    return sampled_value(std::get<SampledMonotone>(phi.segment), y);
}

// Integral of the increasing segment from omega to y.
double segment_integral(const PricingFunction& phi, double y) {
    if (const auto* a = std::get_if<AnalyticExp>(&phi.segment)) {
        const double w = phi.omega;
        return a->scale / a->rate * (std::exp(a->rate * y - 1.0) - std::exp(a->rate * w - 1.0)) +
               a->base * (y - w);
    }
    const auto& s = std::get<SampledMonotone>(phi.segment);
    const auto& g = s.grid;
    if (y <= g.front()) return 0.0;
    if (y >= g.back()) return phi.cumulative.back();
    const auto it = std::upper_bound(g.begin(), g.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    const double v = sampled_value(s, y);
    return phi.cumulative[i - 1] + 0.5 * (s.values[i - 1] + v) * (y - g[i - 1]);
}

void require_close(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol))
        throw inconsistency_error(what + ": got " + std::to_string(got) + ", expected " +
                                  std::to_string(want));
}

PricingFunction build_case1(const Setup& setup, const OptimalParams& p, double tol) {
    const double u = p.u_star.value();
    const double w = p.omega_star;
    const double tight = std::fmax(tol * 1e-2, 1e-12);
    const double alpha1 = gamma1(setup, w, u, tight, kSegmentIntervals);
    const double alpha2 = gamma2(setup, u, tight);
    require_close(alpha1, alpha2, 1e-6 * alpha2, "stitch mismatch between segments at u*");
    IvpSolution left = solve_ivp_case1(setup, w, u, alpha1, kSegmentIntervals);
    const auto right_grid = uniform_grid(u, 1.0, kSegmentIntervals);
    const auto right_vals = exp_segment_values(setup, right_grid, setup.c_high, alpha2);
    std::vector<double> grid = std::move(left.grid);
    std::vector<double> values = std::move(left.values);
    grid.insert(grid.end(), right_grid.begin() + 1, right_grid.end());
    values.insert(values.end(), right_vals.begin() + 1, right_vals.end());
    return make_sampled(setup.p_low, w, 1.0, p.alpha_star, std::move(grid), std::move(values));
}

PricingFunction build_case2(const Setup& setup, const OptimalParams& p, double tol) {
    const double w = p.omega_star;
    const double a = gamma2_hat(setup, w, std::fmax(tol * 1e-2, 1e-12));
    auto grid = uniform_grid(w, 1.0, kSegmentIntervals);
    auto values = exp_segment_values(setup, grid, setup.p_low, a);
    return make_sampled(setup.p_low, w, 1.0, p.alpha_star, std::move(grid), std::move(values));
}

PricingFunction build_case3(const Setup& setup, const OptimalParams& p, double tol) {
    const double w = p.omega_star;
    const double rho = setup.rho_high;
    const double a = gamma1_hat(setup, w, rho, std::fmax(tol * 1e-2, 1e-12), kSegmentIntervals);
    IvpSolution sol = solve_ivp_case3(setup, w, rho, a, kSegmentIntervals);
    return make_sampled(setup.p_low, w, rho, p.alpha_star, std::move(sol.grid),
                        std::move(sol.values));
}

}  // namespace

PricingFunction make_analytic(double p_low, double omega, double q, double alpha) {
    if (!(omega > 0.0 && omega <= 1.0)) throw validation_error("analytic pricing requires 0 < omega <= 1");
    if (!(p_low > q)) throw validation_error("analytic pricing requires p_low > q");
    PricingFunction phi;
    phi.p_low = p_low;
    phi.omega = omega;
    phi.upper_bound = 1.0;
    phi.alpha = alpha;
    phi.segment = AnalyticExp{q, p_low - q, 1.0 / omega};
    return phi;
}

PricingFunction make_sampled(double p_low, double omega, double upper_bound, double alpha,
                             std::vector<double> grid, std::vector<double> values) {
    if (grid.empty() || grid.size() != values.size())
        throw validation_error("sampled pricing requires matching non-empty grid and values");
    if (!(omega >= 0.0 && omega <= upper_bound && upper_bound <= 1.0))
        throw validation_error("sampled pricing requires 0 <= omega <= upper_bound <= 1");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || !std::isfinite(values[i]))
            throw validation_error("sampled pricing values must be finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw validation_error("sampled pricing grid must be strictly ascending");
        if (i > 0 && values[i] < values[i - 1])
            throw validation_error("sampled pricing values must be non-decreasing");
    }
    PricingFunction phi;
    phi.p_low = p_low;
    phi.omega = omega;
    phi.upper_bound = upper_bound;
    phi.alpha = alpha;
    phi.cumulative.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        phi.cumulative[i] =
            phi.cumulative[i - 1] + 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    phi.segment = SampledMonotone{std::move(grid), std::move(values)};
    return phi;
}

OptimalParams analytic_params(const Setup& setup) {
    if (setup.cost.strictly_convex())
        throw unsupported_operation("analytic_params: only zero and linear costs");
    const double q = setup.cost.kind == CostKind::Linear ? setup.cost.q : 0.0;
    OptimalParams p;
    p.kase = setup.kase;
    p.alpha_star = 1.0 + std::log((setup.p_high - q) / (setup.p_low - q));
    p.omega_star = 1.0 / p.alpha_star;
    return p;
}

PricingFunction build_optimal(const Setup& setup, const std::optional<OptimalParams>& params,
                              double tol) {
    if (!setup.cost.strictly_convex()) {
        if (params) throw validation_error("build_optimal: zero/linear costs take no parameters");
        const OptimalParams p = analytic_params(setup);
        const double q = setup.cost.kind == CostKind::Linear ? setup.cost.q : 0.0;
        return make_analytic(setup.p_low, p.omega_star, q, p.alpha_star);
    }
    const OptimalParams p = params ? *params : solve_optimal(setup, tol);
    if (p.kase != setup.kase) throw validation_error("build_optimal: parameters belong to another case");
    PricingFunction phi;
    switch (setup.kase) {
        case SetupCase::DegenerateEqualBounds:
            return make_sampled(setup.p_low, p.omega_star, setup.rho_high, 1.0, {p.omega_star},
                                {setup.p_low});
        case SetupCase::Case1:
            phi = build_case1(setup, p, tol);
            break;
        case SetupCase::Case2:
            phi = build_case2(setup, p, tol);
            break;
        case SetupCase::Case3:
            phi = build_case3(setup, p, tol);
            break;
    }
    require_close(segment_value(phi, phi.omega), setup.p_low, 1e-6,
                  "initial value of the increasing segment");
    require_close(segment_value(phi, phi.upper_bound), setup.p_high, 1e-6,
                  "terminal value of the increasing segment");
    return phi;
}

double price_at(const PricingFunction& phi, double y) {
    if (y < 0.0) throw domain_error("price_at: negative utilization");
    if (y < phi.omega) return phi.p_low;
    if (y > phi.upper_bound + kEdgeSlack) return kInf;
    return segment_value(phi, std::fmin(y, phi.upper_bound));
}

double inverse_price(const PricingFunction& phi, double p) {
    const double top = segment_value(phi, phi.upper_bound);
    if (!(p >= phi.p_low - kEdgeSlack && p <= top + kEdgeSlack))
        throw domain_error("inverse_price: price " + std::to_string(p) + " outside [p_low, phi(upper_bound)]");
    if (p <= phi.p_low) return phi.omega;
    if (const auto* a = std::get_if<AnalyticExp>(&phi.segment))
        return std::fmin((1.0 + std::log((p - a->base) / a->scale)) / a->rate, phi.upper_bound);
    const auto& s = std::get<SampledMonotone>(phi.segment);
    const auto it = std::lower_bound(s.values.begin(), s.values.end(), p);
    if (it == s.values.end()) return s.grid.back();
    const std::size_t i = static_cast<std::size_t>(it - s.values.begin());
    if (i == 0) return s.grid.front();
    const double dv = s.values[i] - s.values[i - 1];
    if (dv <= 0.0) return s.grid[i - 1];
    return s.grid[i - 1] + (p - s.values[i - 1]) / dv * (s.grid[i] - s.grid[i - 1]);
}

double integrate_price(const PricingFunction& phi, double a, double b) {
    if (!(0.0 <= a && a <= b && b <= phi.upper_bound + kEdgeSlack))
        throw domain_error("integrate_price: interval outside [0, upper_bound]");
    b = std::fmin(b, phi.upper_bound);
    auto from_zero = [&](double y) {
        if (y <= phi.omega) return phi.p_low * y;
        return phi.p_low * phi.omega + segment_integral(phi, y);
    };
    return from_zero(b) - from_zero(a);
}

SufficiencyReport verify_sufficiency(const Setup& setup, const PricingFunction& phi,
                                     double alpha) {
    constexpr double kFlatSlack = 1e-8;
    constexpr double kRelSlack = 1e-3;
    constexpr double kSpacing = 1e-3;
    constexpr double kBoundarySlack = 1e-8;
    SufficiencyReport rep;
    const double h_low = conjugate(setup, setup.p_low);
    const double f_omega = phi.omega <= 1.0 ? profit(setup, setup.p_low, phi.omega) : -kInf;
    rep.flat_margin = f_omega - h_low / alpha;
    rep.flat_ok = rep.flat_margin >= -kFlatSlack;

    rep.ode_ok = true;
    rep.ode_worst_margin = kInf;
    const double lo = phi.omega;
    const double hi = phi.upper_bound;
    const int points = static_cast<int>(std::floor((hi - lo) / kSpacing));
    for (int j = 1; j < points; ++j) {
        const double y = lo + j * kSpacing;
        const double v = segment_value(phi, y);
        const double slope = (segment_value(phi, y + kSpacing) - segment_value(phi, y - kSpacing)) /
                             (2.0 * kSpacing);
        const double rhs = alpha * (v - marginal_cost(setup.cost, y)) / conjugate_derivative(setup, v);
        const double margin = (1.0 + kRelSlack) * rhs - slope;
        const double scaled = margin / std::fmax(std::fabs(rhs), 1e-12);
        if (scaled < rep.ode_worst_margin) {
            rep.ode_worst_margin = scaled;
            rep.ode_worst_y = y;
        }
        if (margin < 0.0) rep.ode_ok = false;
    }
    if (points < 2) rep.ode_worst_margin = 0.0;

    rep.continuity_error = std::fabs(segment_value(phi, lo) - setup.p_low);
    rep.terminal_margin = segment_value(phi, hi) - setup.p_high;
    rep.boundary_ok = rep.continuity_error <= kBoundarySlack && rep.terminal_margin >= -kBoundarySlack;
    return rep;
}

RatioBreakdown evaluate_ratio_detail(const Setup& setup, const PricingFunction& phi) {
    if (!(phi.omega > 0.0 && phi.omega <= setup.rho_low + 1e-12))
        throw validation_error("evaluate_ratio: requires omega in (0, rho_low]");
    if (!(std::fabs(segment_value(phi, phi.omega) - setup.p_low) <= 1e-6))
        throw validation_error("evaluate_ratio: requires phi(omega) = p_low");
    const double phi_one = price_at(phi, 1.0);
    if (!(phi_one >= setup.c_high))
        throw validation_error("evaluate_ratio: requires phi(1) >= c_high");

    RatioBreakdown out;
    const double p_low = setup.p_low;
    const double w = phi.omega;
    const double h_low = conjugate(setup, p_low);
    const double base = p_low * w;
    auto denom = [&](double rho) {
        return base + segment_integral(phi, rho) - extended_cost(setup.cost, rho);
    };
    auto ratio_of = [&](double num, double den) { return den > 0.0 ? num / den : kInf; };

    const double top = segment_value(phi, phi.upper_bound);
    if (setup.p_high <= phi_one)
        out.rho_phi = setup.p_high <= top ? inverse_price(phi, setup.p_high) : phi.upper_bound;
    else
        out.rho_phi = 1.0;

    out.threshold_term = ratio_of(h_low, profit(setup, p_low, w));
    out.terminal_term = ratio_of(conjugate(setup, setup.p_high), denom(out.rho_phi));

    auto path = [&](double rho) { return ratio_of(conjugate(setup, segment_value(phi, rho)), denom(rho)); };
    constexpr double kScan = 1e-3;
    double best = path(w);
    double arg = w;
    const int n = static_cast<int>(std::ceil((out.rho_phi - w) / kScan));
    for (int j = 1; j <= n; ++j) {
        const double rho = std::fmin(w + j * kScan, out.rho_phi);
        const double v = path(rho);
        if (v > best) {
            best = v;
            arg = rho;
        }
    }
    if (n > 0) {
        const double a = std::fmax(w, arg - kScan);
        const double b = std::fmin(out.rho_phi, arg + kScan);
        const double refined = numerics::golden_section_max(path, a, b, 1e-9);
        if (path(refined) > best) {
            best = path(refined);
            arg = refined;
        }
    }
    out.path_term = best;
    out.path_argmax = arg;
    out.ratio = std::max({out.threshold_term, out.terminal_term, out.path_term});
    return out;
}

double evaluate_ratio(const Setup& setup, const PricingFunction& phi) {
    return evaluate_ratio_detail(setup, phi).ratio;
}

double MultiSlotPricing::alpha() const {
    return alphas.empty() ? 1.0 : *std::max_element(alphas.begin(), alphas.end());
}

MultiSlotPricing build_multislot(const std::vector<Setup>& slots, double tol) {
    if (slots.empty()) throw validation_error("build_multislot: no slots");
    const bool convex = slots.front().cost.strictly_convex();
    for (const auto& s : slots)
        if (s.cost.strictly_convex() != convex)
            throw validation_error("build_multislot: mixing strictly convex and linear costs");
    MultiSlotPricing out;
    for (std::size_t t = 0; t < slots.size(); ++t) {
        const std::string tag = "slot " + std::to_string(t) + ": ";
        try {
            double inflated = slots[t].p_high;
            for (std::size_t o = 0; o < slots.size(); ++o)
                if (o != t) inflated += conjugate(slots[o], slots[o].p_high);
            Setup eff = classify(slots[t].cost, slots[t].p_low, inflated);
            PricingFunction phi = build_optimal(eff, std::nullopt, tol);
            out.alphas.push_back(phi.alpha);
            out.functions.push_back(std::move(phi));
            out.effective.push_back(eff);
        } catch (const validation_error& e) {
            throw validation_error(tag + e.what());
        } catch (const computation_error& e) {
            throw computation_error(tag + e.what());
        }
    }
    return out;
}

nlohmann::json to_json(const PricingFunction& phi) {
    nlohmann::json doc;
    doc["p_low"] = phi.p_low;
    doc["omega"] = phi.omega;
    doc["alpha"] = phi.alpha;
    doc["upper_bound"] = phi.upper_bound;
    if (const auto* a = std::get_if<AnalyticExp>(&phi.segment)) {
        doc["segment"] = {{"kind", "analytic_exp"}, {"q", a->base}};
    } else {
        const auto& s = std::get<SampledMonotone>(phi.segment);
        doc["segment"] = {{"kind", "sampled"}, {"grid", s.grid}, {"values", s.values}};
    }
    return doc;
}

PricingFunction pricing_from_json(const nlohmann::json& doc) {
    try {
        const double p_low = doc.at("p_low").get<double>();
        const double omega = doc.at("omega").get<double>();
        const double alpha = doc.at("alpha").get<double>();
        const double upper = doc.at("upper_bound").get<double>();
        const auto& seg = doc.at("segment");
        const std::string kind = seg.at("kind").get<std::string>();
        if (kind == "analytic_exp") {
            PricingFunction phi = make_analytic(p_low, omega, seg.at("q").get<double>(), alpha);
            phi.upper_bound = upper;
            return phi;
        }
        if (kind == "sampled")
            return make_sampled(p_low, omega, upper, alpha, seg.at("grid").get<std::vector<double>>(),
                                seg.at("values").get<std::vector<double>>());
        throw validation_error("pricing JSON: unknown segment kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("pricing JSON: ") + e.what());
    }
}

}  // namespace postprice
