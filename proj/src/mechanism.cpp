#include "postprice/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "postprice/errors.hpp"
#include "postprice/format.hpp"

namespace postprice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDensityTol = 1e-9;

double conjugate_or_inf(const Setup& setup, double p) {
    return std::isinf(p) ? kInf : conjugate(setup, p);
}

// Mechanism state between arrivals.
struct State {
    double y = 0.0;
    double price = 0.0;
    double value_sum = 0.0;
    double gamma_sum = 0.0;
};

StepRecord step(const Setup& setup, const PricingFunction& phi, State& s, const Agent& a,
                std::size_t n) {
    StepRecord rec;
    rec.n = n;
    rec.v = a.v;
    rec.r = a.r;
    const double surplus = std::isinf(s.price) ? -kInf : a.v - s.price * a.r;
    rec.utility = std::max(surplus, 0.0);
    s.gamma_sum += rec.utility;
    if (surplus >= -kAcceptSlack && s.y + a.r <= 1.0 + kCapacitySlack) {
        rec.accepted = true;
        rec.payment = s.price * a.r;
        s.y += a.r;
        s.value_sum += a.v;
        s.price = price_at(phi, s.y);
    }
    rec.y_after = s.y;
    rec.price_after = s.price;
    rec.primal = s.value_sum - extended_cost(setup.cost, std::fmin(s.y, 1.0));
    rec.dual = s.gamma_sum + conjugate_or_inf(setup, s.price);
    return rec;
}

}  // namespace

void validate_instance(const Setup& setup, const ArrivalInstance& instance) {
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const Agent& a = instance[i];
        const std::string tag = "agent " + std::to_string(i + 1) + ": ";
        if (!(a.r > 0.0 && a.r <= 1.0) || !std::isfinite(a.r))
            throw validation_error(tag + "requirement must lie in (0,1]");
        if (!(a.v >= 0.0) || !std::isfinite(a.v))
            throw validation_error(tag + "valuation must be finite and non-negative");
        if (a.v / a.r > setup.p_high * (1.0 + kDensityTol))
            throw validation_error(tag + "valuation density " + format_number(a.v / a.r) +
                                   " exceeds p_high");
    }
}

MechanismTrace run(const Setup& setup, const PricingFunction& phi, const ArrivalInstance& instance) {
    validate_instance(setup, instance);
    MechanismTrace trace;
    trace.p_low = phi.p_low;
    trace.initial_price = price_at(phi, 0.0);
    trace.initial_dual = conjugate(setup, trace.initial_price);
    trace.steps.reserve(instance.size());
    State s;
    s.price = trace.initial_price;
    for (std::size_t i = 0; i < instance.size(); ++i)
        trace.steps.push_back(step(setup, phi, s, instance[i], i + 1));
    return trace;
}

CertificateReport certificate(const MechanismTrace& trace, double alpha, double step_slack,
                              double final_slack) {
    CertificateReport rep;
    if (trace.steps.empty()) {
        rep.empty = true;
        rep.initial_margin = -trace.initial_dual / alpha;
        rep.welfare_bound = trace.initial_dual / alpha;
        return rep;
    }
    const auto& st = trace.steps;
    const std::size_t n_steps = st.size();
    // k = number of leading arrivals that saw the flat price.
    std::size_t k = 0;
    double before = trace.initial_price;
    while (k < n_steps && before <= trace.p_low) {
        before = st[k].price_after;
        ++k;
    }
    rep.k = k;
    auto primal = [&](std::size_t i) { return i == 0 ? 0.0 : st[i - 1].primal; };
    auto dual = [&](std::size_t i) { return i == 0 ? trace.initial_dual : st[i - 1].dual; };
    rep.flat_exited = k > 0 && st[k - 1].price_after > trace.p_low;
    rep.initial_margin = primal(k) - dual(k) / alpha;
    rep.initial_ok = rep.initial_margin >= -step_slack;
    rep.worst_incremental_margin = kInf;
    for (std::size_t i = k + 1; i <= n_steps; ++i) {
        const double dp = primal(i) - primal(i - 1);
        const double margin = (std::isinf(dual(i)) && std::isinf(dual(i - 1)))
                                  ? dp
                                  : dp - (dual(i) - dual(i - 1)) / alpha;
        if (margin < rep.worst_incremental_margin) {
            rep.worst_incremental_margin = margin;
            rep.worst_step = i;
        }
        if (margin < -step_slack) ++rep.incremental_violations;
    }
    if (k == n_steps) rep.worst_incremental_margin = 0.0;
    rep.incremental_ok = rep.incremental_violations == 0;
    rep.welfare_bound = st.back().dual / alpha;
    rep.final_margin = st.back().primal - rep.welfare_bound;
    rep.final_ok = rep.final_margin >= -final_slack;
    return rep;
}

std::pair<double, double> misreport_utility(const Setup& setup, const PricingFunction& phi,
                                            const ArrivalInstance& instance, std::size_t index,
                                            const Agent& reported) {
    if (index >= instance.size()) throw validation_error("misreport_utility: agent index out of range");
    validate_instance(setup, instance);
    if (!(reported.r > 0.0 && reported.r <= 1.0) || !(reported.v >= 0.0))
        throw validation_error("misreport_utility: reported type is not feasible");
    // Earlier arrivals are unaffected by agent `index`, so the prefix state is shared.
    State s;
    s.price = price_at(phi, 0.0);
    for (std::size_t i = 0; i < index; ++i) step(setup, phi, s, instance[i], i + 1);
    const Agent& truth = instance[index];
    auto outcome = [&](const Agent& report) {
        State copy = s;
        const StepRecord rec = step(setup, phi, copy, report, index + 1);
        if (!rec.accepted) return 0.0;
        const double value = report.r == truth.r ? truth.v : 0.0;
        return value - rec.payment;
    };
    return {outcome(truth), outcome(reported)};
}

MultiSlotTrace run_multislot(const std::vector<Setup>& setups,
                             const std::vector<PricingFunction>& phis,
                             const MultiSlotInstance& instance) {
    const std::size_t T = setups.size();
    if (T == 0 || phis.size() != T) throw validation_error("run_multislot: one pricing function per slot required");
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const auto& a = instance[i];
        const std::string tag = "agent " + std::to_string(i + 1) + ": ";
        if (a.r.size() != T) throw validation_error(tag + "requirement vector has wrong length");
        bool active = false;
        for (double r : a.r) {
            if (!(r >= 0.0 && r <= 1.0)) throw validation_error(tag + "requirement must lie in [0,1]");
            active = active || r > 0.0;
        }
        if (!active) throw validation_error(tag + "agent requests no slot");
        if (!(a.v >= 0.0) || !std::isfinite(a.v)) throw validation_error(tag + "invalid valuation");
    }
    MultiSlotTrace trace;
    std::vector<double> y(T, 0.0), price(T);
    for (std::size_t t = 0; t < T; ++t) {
        trace.p_low.push_back(phis[t].p_low);
        price[t] = price_at(phis[t], 0.0);
        trace.initial_dual += conjugate(setups[t], price[t]);
    }
    trace.initial_price = price;
    double value_sum = 0.0;
    double gamma_sum = 0.0;
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const auto& a = instance[i];
        MultiStepRecord rec;
        rec.n = i + 1;
        rec.v = a.v;
        rec.r = a.r;
        double posted = 0.0;
        bool fits = true;
        for (std::size_t t = 0; t < T; ++t) {
            if (a.r[t] <= 0.0) continue;
            posted += std::isinf(price[t]) ? kInf : price[t] * a.r[t];
            fits = fits && y[t] + a.r[t] <= 1.0 + kCapacitySlack;
        }
        const double surplus = std::isinf(posted) ? -kInf : a.v - posted;
        rec.utility = std::max(surplus, 0.0);
        gamma_sum += rec.utility;
        if (surplus >= -kAcceptSlack && fits) {
            rec.accepted = true;
            rec.payment = posted;
            value_sum += a.v;
            for (std::size_t t = 0; t < T; ++t) {
                if (a.r[t] <= 0.0) continue;
                y[t] += a.r[t];
                price[t] = price_at(phis[t], y[t]);
            }
        }
        rec.y_after = y;
        rec.price_after = price;
        double dual = gamma_sum;
        double primal = value_sum;
        for (std::size_t t = 0; t < T; ++t) {
            primal -= extended_cost(setups[t].cost, std::fmin(y[t], 1.0));
            dual += conjugate_or_inf(setups[t], price[t]);
        }
        rec.primal = primal;
        rec.dual = dual;
        trace.steps.push_back(std::move(rec));
    }
    return trace;
}

bool MultiSlotCertificate::passed() const {
    return final_ok && std::all_of(slots.begin(), slots.end(),
                                   [](const SlotCertificate& s) { return s.passed; });
}

MultiSlotCertificate multislot_certificate(const std::vector<Setup>& setups,
                                           const MultiSlotTrace& trace, double alpha,
                                           double step_slack, double final_slack) {
    MultiSlotCertificate rep;
    const std::size_t T = setups.size();
    const auto& st = trace.steps;
    for (std::size_t t = 0; t < T; ++t) {
        SlotCertificate sc;
        // Per-slot supplier profit and conjugate term after each arrival.
        std::vector<double> profit_t(st.size() + 1, 0.0), conj_t(st.size() + 1, 0.0);
        conj_t[0] = conjugate(setups[t], trace.initial_price[t]);
        double revenue = 0.0;
        double price_before = trace.initial_price[t];
        for (std::size_t i = 0; i < st.size(); ++i) {
            if (st[i].accepted && st[i].r[t] > 0.0) revenue += price_before * st[i].r[t];
            const double y = st[i].y_after[t];
            profit_t[i + 1] = revenue - extended_cost(setups[t].cost, std::fmin(y, 1.0));
            conj_t[i + 1] = conjugate_or_inf(setups[t], st[i].price_after[t]);
            price_before = st[i].price_after[t];
        }
        std::size_t k = 0;
        double before = trace.initial_price[t];
        while (k < st.size() && before <= trace.p_low[t]) {
            before = st[k].price_after[t];
            ++k;
        }
        sc.k = k;
        sc.flat_exited = k > 0 && st[k - 1].price_after[t] > trace.p_low[t];
        sc.initial_margin = profit_t[k] - conj_t[k] / alpha;
        sc.worst_incremental_margin = k == st.size() ? 0.0 : kInf;
        for (std::size_t i = k + 1; i <= st.size(); ++i) {
            const double dconj = (std::isinf(conj_t[i]) && std::isinf(conj_t[i - 1])) ? 0.0
                                                                                       : conj_t[i] - conj_t[i - 1];
            const double margin = profit_t[i] - profit_t[i - 1] - dconj / alpha;
            if (margin < sc.worst_incremental_margin) {
                sc.worst_incremental_margin = margin;
                sc.worst_step = i;
            }
        }
        sc.passed = sc.initial_margin >= -step_slack && sc.worst_incremental_margin >= -step_slack;
        rep.slots.push_back(sc);
    }
    const double pn = st.empty() ? 0.0 : st.back().primal;
    const double dn = st.empty() ? trace.initial_dual : st.back().dual;
    rep.final_margin = pn - dn / alpha;
    rep.final_ok = rep.final_margin >= -final_slack;
    return rep;
}

void write_trace_csv(std::ostream& out, const MechanismTrace& trace) {
    out << "n,v,r,accepted,payment,utility,y_after,price_after,P_n,D_n\n";
    for (const auto& s : trace.steps) {
        out << s.n << ',' << format_number(s.v) << ',' << format_number(s.r) << ','
            << (s.accepted ? 1 : 0) << ',' << format_number(s.payment) << ','
            << format_number(s.utility) << ',' << format_number(s.y_after) << ','
            << format_number(s.price_after) << ',' << format_number(s.primal) << ','
            << format_number(s.dual) << '\n';
    }
    std::size_t accepted = 0;
    double payments = 0.0;
    double utilities = 0.0;
    for (const auto& s : trace.steps) {
        accepted += s.accepted ? 1 : 0;
        payments += s.payment;
        utilities += s.utility;
    }
    out << "summary," << format_number(trace.s_online()) << ",," << accepted << ','
        << format_number(payments) << ',' << format_number(utilities) << ','
        << format_number(trace.final_utilization()) << ',' << format_number(trace.final_price())
        << ',' << format_number(trace.s_online()) << ',' << format_number(trace.final_dual())
        << '\n';
}

}  // namespace postprice
