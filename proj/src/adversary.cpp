#include "postprice/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "postprice/errors.hpp"
#include "postprice/format.hpp"
#include "postprice/mechanism.hpp"
#include "postprice/offline.hpp"

namespace postprice {

namespace {

// Agent with density as close to d as possible while staying inside [lo, hi].
Agent make_agent(double d, double r, double lo, double hi) {
    d = std::clamp(d, lo, hi);
    double v = d * r;
    while (v / r > hi) v = std::nextafter(v, 0.0);
    while (v / r < lo) v = std::nextafter(v, INFINITY);
    return {v, r};
}

void check_density(const Setup& setup, double p, const char* op) {
    if (!(p >= setup.p_low && p <= setup.p_high))
        throw validation_error(std::string(op) + ": density " + format_number(p) +
                               " outside [p_low, p_high]");
}

std::size_t count_pieces(double total, double delta) {
    return static_cast<std::size_t>(std::ceil(total / delta - 1e-9));
}

void append_block(ArrivalInstance& out, const Setup& setup, double p, double total,
                  double delta) {
    const std::size_t n = count_pieces(total, delta);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = i + 1 < n ? delta : total - delta * static_cast<double>(n - 1);
        if (r > 0.0) out.push_back(make_agent(p, r, setup.p_low, setup.p_high));
    }
}

}  // namespace

ArrivalInstance identical_density(const Setup& setup, double p, double total, double delta) {
    check_density(setup, p, "identical_density");
    if (!(delta > 0.0 && delta <= 1.0)) throw validation_error("identical_density: delta must lie in (0,1]");
    if (!(total >= 0.0)) throw validation_error("identical_density: total must be non-negative");
    ArrivalInstance out;
    append_block(out, setup, p, total, delta);
    return out;
}

ArrivalInstance worst_case_rho(const Setup& setup, const PricingFunction& phi, double rho,
                               double delta) {
    if (!(delta > 0.0 && delta <= 1e-3)) throw validation_error("worst_case_rho: delta must lie in (0, 1e-3]");
    if (!(rho >= phi.omega && rho <= phi.upper_bound))
        throw validation_error("worst_case_rho: rho must lie in [omega, upper_bound]");
    const double top = price_at(phi, rho);
    if (top > setup.p_high * (1.0 + 1e-6))
        throw validation_error("worst_case_rho: phi(rho) = " + format_number(top) + " exceeds p_high");
    ArrivalInstance out;
    append_block(out, setup, setup.p_low, phi.omega, delta);
    const std::size_t b_count = count_pieces(rho - phi.omega, delta);
    double y = phi.omega;
    for (std::size_t b = 0; b < b_count; ++b) {
        const double r = std::min(delta, rho - y);
        if (r <= 0.0) break;
        y += r;
        out.push_back(make_agent(price_at(phi, std::min(y, rho)), r, setup.p_low, setup.p_high));
    }
    const auto i_count = static_cast<std::size_t>(std::ceil(1.0 / delta - 1e-9));
    for (std::size_t i = 0; i < i_count; ++i)
        out.push_back(make_agent(top, delta, setup.p_low, setup.p_high));
    return out;
}

WorstCaseScan scan_worst_case_rho(const Setup& setup, const PricingFunction& phi, double delta,
                                  std::size_t grid_points) {
    if (grid_points == 0) throw validation_error("scan_worst_case_rho: grid_points must be positive");
    const RatioBreakdown detail = evaluate_ratio_detail(setup, phi);
    const double lo = phi.omega;
    const double hi = std::max(lo, std::min(detail.rho_phi, phi.upper_bound));
    std::vector<double> candidates;
    for (std::size_t j = 0; j <= grid_points; ++j)
        candidates.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(grid_points));
    candidates.push_back(std::clamp(detail.path_argmax, lo, hi));

    WorstCaseScan out;
    out.ratio = -1.0;
    for (double rho : candidates) {
        const ArrivalInstance inst = worst_case_rho(setup, phi, rho, delta);
        const double online = run(setup, phi, inst).s_online();
        const double offline = fractional_optimum(setup, inst).value;
        const double ratio = online > 0.0 ? offline / online : INFINITY;
        out.samples.emplace_back(rho, ratio);
        if (ratio > out.ratio) {
            out.ratio = ratio;
            out.rho = rho;
        }
    }
    return out;
}

DensityGroups density_groups(const Setup& setup, const PricingFunction& phi, double p_end,
                             double delta, double eta_step) {
    check_density(setup, p_end, "density_groups");
    if (!(delta > 0.0 && delta <= 1.0)) throw validation_error("density_groups: delta must lie in (0,1]");
    if (eta_step <= 0.0) eta_step = delta;
    DensityGroups out;
    append_block(out.agents, setup, setup.p_low, phi.omega, delta);
    out.checkpoints.emplace_back(setup.p_low, out.agents.size());
    const std::size_t groups = count_pieces(p_end - setup.p_low, eta_step);
    for (std::size_t j = 1; j <= groups; ++j) {
        const double eta = std::min(setup.p_low + static_cast<double>(j) * eta_step, p_end);
        append_block(out.agents, setup, eta, conjugate_derivative(setup, eta), delta);
        out.checkpoints.emplace_back(eta, out.agents.size());
    }
    return out;
}

ArrivalInstance random_instance(const Setup& setup, std::uint64_t seed, std::size_t n,
                                DensityDist density, RequirementDist req) {
    if (req.kind == RequirementDist::Kind::Constant ? !(req.lo > 0.0 && req.lo <= 1.0)
                                                    : !(req.lo > 0.0 && req.lo <= req.hi && req.hi <= 1.0))
        throw validation_error("random_instance: requirement range must lie in (0,1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ArrivalInstance out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = density == DensityDist::Uniform
                             ? setup.p_low + (setup.p_high - setup.p_low) * unit(rng)
                             : (unit(rng) < 0.5 ? setup.p_low : setup.p_high);
        const double r = req.kind == RequirementDist::Kind::Constant
                             ? req.lo
                             : req.lo + (req.hi - req.lo) * unit(rng);
        out.push_back(make_agent(d, r, setup.p_low, setup.p_high));
    }
    return out;
}

MultiSlotInstance random_multislot_instance(const std::vector<Setup>& setups, std::uint64_t seed,
                                            std::size_t n, double delta) {
    const std::size_t T = setups.size();
    if (T == 0 || T > 30) throw validation_error("random_multislot_instance: 1..30 slots supported");
    if (!(delta > 0.0 && delta <= 1.0)) throw validation_error("random_multislot_instance: delta must lie in (0,1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> subset(1, (1u << T) - 1);
    MultiSlotInstance out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t mask = subset(rng);
        MultiAgent a;
        a.r.assign(T, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            if (!((mask >> t) & 1u)) continue;
            a.r[t] = delta;
            a.v += delta * (setups[t].p_low + (setups[t].p_high - setups[t].p_low) * unit(rng));
        }
        out.push_back(std::move(a));
    }
    return out;
}

void write_instance_csv(std::ostream& out, const ArrivalInstance& instance) {
    out << "v,r\n";
    for (const Agent& a : instance) out << format_number(a.v) << ',' << format_number(a.r) << '\n';
}

ArrivalInstance read_instance_csv(std::istream& in) {
    ArrivalInstance out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (lineno == 1 && line.rfind("v,r", 0) == 0)) continue;
        std::istringstream fields(line);
        fields.imbue(std::locale::classic());
        Agent a;
        char comma = 0;
        if (!(fields >> a.v >> comma >> a.r) || comma != ',')
            throw validation_error("instance CSV line " + std::to_string(lineno) + ": expected 'v,r'");
        out.push_back(a);
    }
    return out;
}

}  // namespace postprice
