#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "postprice/adversary.hpp"
#include "postprice/cost_model.hpp"

namespace postprice::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kComputational = 2 };

// Malformed or semantically invalid configuration; maps to exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SetupSpec {
    CostModel cost;
    double p_low = 0.0;
    double p_high = 0.0;
};

struct InstanceSpec {
    std::string generator;  // random | worst_case_rho | identical_density | density_groups | csv
    std::size_t n = 1000;
    DensityDist density = DensityDist::Uniform;
    RequirementDist requirement;
    bool requirement_given = false;
    std::optional<double> rho;  // absent means scan for the ratio-maximizing rho
    double p = 0.0;
    double total = 0.0;
    double p_end = 0.0;
    double eta_step = 0.0;
    std::optional<double> delta;
    std::string csv_path;
};

struct SweepSpec {
    std::string parameter = "p_high";
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 1;
};

struct RunConfig {
    std::optional<SetupSpec> setup;
    std::vector<SetupSpec> slots;
    std::optional<InstanceSpec> instance;
    std::optional<SweepSpec> sweep;
    std::string pricing_path;
    std::optional<double> alpha;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json"};
    double tol = 1e-8;
    double certificate_slack = 1e-8;
    double delta = 1e-4;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Each command writes a human-readable report to `out` and returns an exit code.
int cmd_solve(const RunConfig& cfg, std::ostream& out);
int cmd_run(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace postprice::cli
