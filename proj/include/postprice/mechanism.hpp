#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "postprice/cost_model.hpp"
#include "postprice/instance.hpp"
#include "postprice/pricing.hpp"

namespace postprice {

inline constexpr double kAcceptSlack = 1e-12;
inline constexpr double kCapacitySlack = 1e-12;

struct StepRecord {
    std::size_t n = 0;  // 1-based arrival index
    double v = 0.0;
    double r = 0.0;
    bool accepted = false;
    double payment = 0.0;
    double utility = 0.0;  // dual variable max(v - p r, 0) at the posted price
    double y_after = 0.0;
    double price_after = 0.0;
    double primal = 0.0;
    double dual = 0.0;
};

struct MechanismTrace {
    double p_low = 0.0;
    double initial_price = 0.0;
    double initial_dual = 0.0;  // h(p_low)
    std::vector<StepRecord> steps;

    double s_online() const { return steps.empty() ? 0.0 : steps.back().primal; }
    double final_utilization() const { return steps.empty() ? 0.0 : steps.back().y_after; }
    double final_price() const { return steps.empty() ? initial_price : steps.back().price_after; }
    double final_dual() const { return steps.empty() ? initial_dual : steps.back().dual; }
};

// Throws validation_error for malformed agents or densities above p_high.
void validate_instance(const Setup& setup, const ArrivalInstance& instance);

MechanismTrace run(const Setup& setup, const PricingFunction& phi, const ArrivalInstance& instance);

struct CertificateReport {
    bool empty = false;
    bool flat_exited = false;
    std::size_t k = 0;
    double initial_margin = 0.0;  // P_k - D_k/alpha
    double worst_incremental_margin = 0.0;
    std::size_t worst_step = 0;
    std::size_t incremental_violations = 0;
    double final_margin = 0.0;  // P_N - D_N/alpha
    double welfare_bound = 0.0;  // D_N/alpha
    bool initial_ok = false;
    bool incremental_ok = false;
    bool final_ok = false;
    bool passed() const { return empty || (initial_ok && incremental_ok && final_ok); }
};

CertificateReport certificate(const MechanismTrace& trace, double alpha, double step_slack = 1e-8,
                              double final_slack = 1e-6);

// Utilities (truthful, misreport) of agent `index` when it reports `reported` instead.
// A requirement misreport leaves the request unsatisfied, so the agent gains no value.
std::pair<double, double> misreport_utility(const Setup& setup, const PricingFunction& phi,
                                            const ArrivalInstance& instance, std::size_t index,
                                            const Agent& reported);

struct MultiStepRecord {
    std::size_t n = 0;
    double v = 0.0;
    std::vector<double> r;
    bool accepted = false;
    double payment = 0.0;
    double utility = 0.0;
    std::vector<double> y_after;
    std::vector<double> price_after;
    double primal = 0.0;
    double dual = 0.0;
};

struct MultiSlotTrace {
    std::vector<double> p_low;
    std::vector<double> initial_price;
    double initial_dual = 0.0;
    std::vector<MultiStepRecord> steps;

    double s_online() const { return steps.empty() ? 0.0 : steps.back().primal; }
};

MultiSlotTrace run_multislot(const std::vector<Setup>& setups,
                             const std::vector<PricingFunction>& phis,
                             const MultiSlotInstance& instance);

struct SlotCertificate {
    bool flat_exited = false;
    std::size_t k = 0;
    double initial_margin = 0.0;
    double worst_incremental_margin = 0.0;
    std::size_t worst_step = 0;
    bool passed = false;
};

struct MultiSlotCertificate {
    std::vector<SlotCertificate> slots;
    double final_margin = 0.0;
    bool final_ok = false;
    bool passed() const;
};

// Per-slot supplier-profit inequalities plus the aggregate final chain.
MultiSlotCertificate multislot_certificate(const std::vector<Setup>& setups,
                                           const MultiSlotTrace& trace, double alpha,
                                           double step_slack = 1e-8, double final_slack = 1e-6);

void write_trace_csv(std::ostream& out, const MechanismTrace& trace);

}  // namespace postprice
