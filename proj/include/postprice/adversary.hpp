#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "postprice/cost_model.hpp"
#include "postprice/instance.hpp"
#include "postprice/pricing.hpp"

namespace postprice {

ArrivalInstance identical_density(const Setup& setup, double p, double total, double delta);

// Three groups: density p_low up to omega, densities tracking phi up to rho, then
// at least 1/delta agents at density phi(rho).
ArrivalInstance worst_case_rho(const Setup& setup, const PricingFunction& phi, double rho,
                               double delta);

struct WorstCaseScan {
    double rho = 0.0;
    double ratio = 0.0;  // fractional offline welfare over online welfare at rho
    std::vector<std::pair<double, double>> samples;
};

// Runs worst_case_rho on an even grid over [omega, rho_phi] plus the analytic path maximizer
// and keeps the rho with the largest measured ratio.
WorstCaseScan scan_worst_case_rho(const Setup& setup, const PricingFunction& phi, double delta,
                                  std::size_t grid_points = 20);

struct DensityGroups {
    ArrivalInstance agents;
    // (eta, number of agents emitted up to and including the group at eta)
    std::vector<std::pair<double, std::size_t>> checkpoints;
};

// Group at p_low of total omega, then groups at eta ascending to p_end, each of
// total requirement h'(eta). eta_step <= 0 means eta_step = delta.
DensityGroups density_groups(const Setup& setup, const PricingFunction& phi, double p_end,
                             double delta, double eta_step = 0.0);

enum class DensityDist { Uniform, TwoPoint };

struct RequirementDist {
    enum class Kind { Constant, Uniform } kind = Kind::Constant;
    double lo = 1e-3;  // Constant uses lo
    double hi = 1e-3;
};

ArrivalInstance random_instance(const Setup& setup, std::uint64_t seed, std::size_t n,
                                DensityDist density, RequirementDist req);

// Each agent is active on a random non-empty subset of slots with requirement delta there.
MultiSlotInstance random_multislot_instance(const std::vector<Setup>& setups, std::uint64_t seed,
                                            std::size_t n, double delta);

void write_instance_csv(std::ostream& out, const ArrivalInstance& instance);
ArrivalInstance read_instance_csv(std::istream& in);

}  // namespace postprice
