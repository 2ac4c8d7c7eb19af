#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "postprice/bvp.hpp"
#include "postprice/errors.hpp"
#include "postprice/format.hpp"
#include "postprice/mechanism.hpp"
#include "postprice/offline.hpp"
#include "postprice/pricing.hpp"

namespace postprice::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config parsing -------------------------------------------------------

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) throw config_error(where + "." + key + ": unknown field");
}

const json& require(const json& obj, const std::string& where, const char* key) {
    if (!obj.is_object() || !obj.contains(key))
        throw config_error(where + "." + key + ": required field missing");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw config_error(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw config_error(where + ": must be finite");
    return x;
}

double number_at(const json& obj, const std::string& where, const char* key) {
    return number(require(obj, where, key), where + "." + key);
}

double number_or(const json& obj, const std::string& where, const char* key, double fallback) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

std::string string_at(const json& obj, const std::string& where, const char* key) {
    const json& v = require(obj, where, key);
    if (!v.is_string()) throw config_error(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::size_t count_at(const json& obj, const std::string& where, const char* key,
                     std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw config_error(where + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

CostModel parse_cost(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw config_error(where + ": expected an object");
    const std::string kind = string_at(obj, where, "kind");
    try {
        if (kind == "zero") {
            reject_unknown(obj, where, {"kind"});
            return CostModel::zero();
        }
        if (kind == "linear") {
            reject_unknown(obj, where, {"kind", "q"});
            return CostModel::linear(number_at(obj, where, "q"));
        }
        if (kind == "quadratic") {
            reject_unknown(obj, where, {"kind", "a"});
            return CostModel::quadratic(number_or(obj, where, "a", 1.0));
        }
        if (kind == "power_law") {
            reject_unknown(obj, where, {"kind", "s", "k"});
            return CostModel::power_law(number_at(obj, where, "s"), number_at(obj, where, "k"));
        }
    } catch (const validation_error& e) {
        throw config_error(where + ": " + e.what());
    }
    throw config_error(where + ".kind: expected zero, linear, quadratic or power_law");
}

SetupSpec parse_setup(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw config_error(where + ": expected an object");
    reject_unknown(obj, where, {"cost", "p_low", "p_high"});
    SetupSpec s;
    s.cost = parse_cost(require(obj, where, "cost"), where + ".cost");
    s.p_low = number_at(obj, where, "p_low");
    s.p_high = number_at(obj, where, "p_high");
    try {
        classify(s.cost, s.p_low, s.p_high);
    } catch (const validation_error& e) {
        throw config_error(where + ": " + e.what());
    }
    return s;
}

InstanceSpec parse_instance(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw config_error(where + ": expected an object");
    InstanceSpec spec;
    if (obj.contains("csv")) {
        reject_unknown(obj, where, {"csv"});
        spec.generator = "csv";
        const json& v = obj.at("csv");
        if (!v.is_string()) throw config_error(where + ".csv: expected a path string");
        spec.csv_path = v.get<std::string>();
        return spec;
    }
    spec.generator = string_at(obj, where, "generator");
    if (obj.contains("delta")) spec.delta = number(obj.at("delta"), where + ".delta");
    if (spec.generator == "random") {
        reject_unknown(obj, where, {"generator", "n", "density", "requirement", "delta"});
        spec.n = count_at(obj, where, "n", 1000);
        const std::string density = obj.contains("density") ? string_at(obj, where, "density") : "uniform";
        if (density == "uniform")
            spec.density = DensityDist::Uniform;
        else if (density == "two_point")
            spec.density = DensityDist::TwoPoint;
        else
            throw config_error(where + ".density: expected uniform or two_point");
        if (obj.contains("requirement")) {
            const std::string rw = where + ".requirement";
            const json& r = obj.at("requirement");
            const std::string kind = string_at(r, rw, "kind");
            spec.requirement_given = true;
            if (kind == "constant") {
                reject_unknown(r, rw, {"kind", "value"});
                spec.requirement.kind = RequirementDist::Kind::Constant;
                spec.requirement.lo = spec.requirement.hi = number_at(r, rw, "value");
            } else if (kind == "uniform") {
                reject_unknown(r, rw, {"kind", "lo", "hi"});
                spec.requirement.kind = RequirementDist::Kind::Uniform;
                spec.requirement.lo = number_at(r, rw, "lo");
                spec.requirement.hi = number_at(r, rw, "hi");
            } else {
                throw config_error(rw + ".kind: expected constant or uniform");
            }
        }
    } else if (spec.generator == "worst_case_rho") {
        reject_unknown(obj, where, {"generator", "rho", "delta"});
        const json& rho = require(obj, where, "rho");
        if (rho.is_string()) {
            if (rho.get<std::string>() != "argmax")
                throw config_error(where + ".rho: expected a number or \"argmax\"");
        } else {
            spec.rho = number(rho, where + ".rho");
        }
    } else if (spec.generator == "identical_density") {
        reject_unknown(obj, where, {"generator", "p", "total", "delta"});
        spec.p = number_at(obj, where, "p");
        spec.total = number_at(obj, where, "total");
    } else if (spec.generator == "density_groups") {
        reject_unknown(obj, where, {"generator", "p_end", "eta_step", "delta"});
        spec.p_end = number_at(obj, where, "p_end");
        spec.eta_step = number_or(obj, where, "eta_step", 0.0);
    } else {
        throw config_error(where +
                           ".generator: expected random, worst_case_rho, identical_density or "
                           "density_groups");
    }
    return spec;
}

// ---- shared helpers ---------------------------------------------------------

Setup to_setup(const SetupSpec& s) { return classify(s.cost, s.p_low, s.p_high); }

OptimalParams solve_setup(const Setup& setup, double tol) {
    return setup.cost.strictly_convex() ? solve_optimal(setup, tol) : analytic_params(setup);
}

bool wants(const RunConfig& cfg, const char* format) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

fs::path prepare_out(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::string fixed6(double x) {
    if (!std::isfinite(x)) return format_number(x);
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.setf(std::ios::fixed);
    s.precision(6);
    s << x;
    return s.str();
}

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << doc.dump(2) << '\n';
}

void report_params(std::ostream& out, const Setup& setup, const OptimalParams& p) {
    out << "case: " << to_string(setup.kase) << '\n';
    out << "alpha*: " << fixed6(p.alpha_star) << '\n';
    out << "omega*: " << fixed6(p.omega_star) << '\n';
    if (p.u_star) out << "u*: " << fixed6(*p.u_star) << '\n';
    if (!setup.cost.strictly_convex()) {
        out << "form: closed-form exponential pricing\n";
        return;
    }
    out << "residual threshold equation |h(p_low) - alpha F(omega)|: "
        << format_number(p.threshold_residual) << '\n';
    if (setup.kase == SetupCase::Case1) {
        out << "residual Gamma_1 = Gamma_2 at u*: " << format_number(p.gamma_residual) << '\n';
        out << "residual Gamma_2 integral identity: "
            << format_number(gamma2_equation_residual(setup, *p.u_star, p.alpha_star)) << '\n';
    } else if (setup.kase == SetupCase::Case2) {
        out << "residual Gamma_hat_2 fixed point: " << format_number(p.gamma_residual) << '\n';
        out << "residual Gamma_hat_2 integral identity: "
            << format_number(gamma2_hat_equation_residual(setup, p.omega_star, p.alpha_star))
            << '\n';
    } else if (setup.kase == SetupCase::Case3) {
        out << "residual Gamma_hat_1 fixed point: " << format_number(p.gamma_residual) << '\n';
    }
}

ArrivalInstance build_instance(const RunConfig& cfg, const Setup& setup, const PricingFunction& phi,
                               std::ostream& out) {
    const InstanceSpec& spec = *cfg.instance;
    const double delta = spec.delta.value_or(cfg.delta);
    if (spec.generator == "csv") {
        std::ifstream f(spec.csv_path);
        if (!f) throw validation_error("cannot open instance CSV " + spec.csv_path);
        return read_instance_csv(f);
    }
    if (spec.generator == "random") {
        RequirementDist req = spec.requirement;
        if (!spec.requirement_given) req.lo = req.hi = delta;
        return random_instance(setup, cfg.seed, spec.n, spec.density, req);
    }
    if (spec.generator == "worst_case_rho") {
        double rho;
        if (spec.rho) {
            rho = *spec.rho;
        } else {
            const WorstCaseScan scan = scan_worst_case_rho(setup, phi, delta);
            rho = scan.rho;
            out << "worst-case rho (argmax of measured ratio): " << format_number(rho) << '\n';
        }
        return worst_case_rho(setup, phi, rho, delta);
    }
    if (spec.generator == "identical_density") return identical_density(setup, spec.p, spec.total, delta);
    return density_groups(setup, phi, spec.p_end, delta, spec.eta_step).agents;
}

int run_multislot_cmd(const RunConfig& cfg, std::ostream& out) {
    std::vector<Setup> setups;
    for (const auto& s : cfg.slots) setups.push_back(to_setup(s));
    const MultiSlotPricing ms = build_multislot(setups, cfg.tol);
    if (cfg.instance && cfg.instance->generator != "random")
        throw config_error("instance.generator: multi-slot runs support only the random generator");
    const std::size_t n = cfg.instance ? cfg.instance->n : 1000;
    const double delta = cfg.instance ? cfg.instance->delta.value_or(cfg.delta) : cfg.delta;
    const MultiSlotInstance inst = random_multislot_instance(setups, cfg.seed, n, delta);
    const MultiSlotTrace trace = run_multislot(setups, ms.functions, inst);
    const MultiSlotCertificate cert =
        multislot_certificate(setups, trace, ms.alpha(), cfg.certificate_slack);

    const fs::path dir = prepare_out(cfg);
    if (wants(cfg, "csv")) {
        std::ofstream f(dir / "trace.csv");
        f << "n,v,accepted,payment,utility";
        for (std::size_t t = 0; t < setups.size(); ++t) f << ",r" << t << ",y" << t << ",price" << t;
        f << ",P_n,D_n\n";
        for (const auto& s : trace.steps) {
            f << s.n << ',' << format_number(s.v) << ',' << (s.accepted ? 1 : 0) << ','
              << format_number(s.payment) << ',' << format_number(s.utility);
            for (std::size_t t = 0; t < setups.size(); ++t)
                f << ',' << format_number(s.r[t]) << ',' << format_number(s.y_after[t]) << ','
                  << format_number(s.price_after[t]);
            f << ',' << format_number(s.primal) << ',' << format_number(s.dual) << '\n';
        }
    }
    out << "slots: " << setups.size() << '\n';
    for (std::size_t t = 0; t < setups.size(); ++t) {
        const auto& sc = cert.slots[t];
        out << "slot " << t << ": alpha=" << fixed6(ms.alphas[t])
            << " p_high_eff=" << format_number(ms.effective[t].p_high)
            << " initial_margin=" << format_number(sc.initial_margin)
            << " worst_incremental=" << format_number(sc.worst_incremental_margin) << ' '
            << verdict(sc.passed) << '\n';
    }
    out << "alpha (max over slots): " << fixed6(ms.alpha()) << '\n';
    out << "S_online: " << format_number(trace.s_online()) << '\n';
    out << "certificate final margin: " << format_number(cert.final_margin) << '\n';
    out << "certificate: " << verdict(cert.passed()) << '\n';
    return kOk;
}

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string kase;
    OptimalParams params;
    std::string error;
};

}  // namespace

// ---- public API -------------------------------------------------------------

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw config_error("config: expected a JSON object");
    reject_unknown(doc, "config",
                   {"setup", "slots", "instance", "output", "tolerances", "seed", "delta", "sweep",
                    "verify", "jobs"});
    RunConfig cfg;
    if (doc.contains("setup")) cfg.setup = parse_setup(doc.at("setup"), "setup");
    if (doc.contains("slots")) {
        const json& slots = doc.at("slots");
        if (!slots.is_array() || slots.empty()) throw config_error("slots: expected a non-empty array");
        for (std::size_t t = 0; t < slots.size(); ++t)
            cfg.slots.push_back(parse_setup(slots[t], "slots[" + std::to_string(t) + "]"));
    }
    if (cfg.setup && !cfg.slots.empty()) throw config_error("config: give either setup or slots, not both");
    if (doc.contains("instance")) cfg.instance = parse_instance(doc.at("instance"), "instance");
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        reject_unknown(o, "output", {"directory", "formats"});
        if (o.contains("directory")) cfg.out_dir = string_at(o, "output", "directory");
        if (o.contains("formats")) {
            const json& f = o.at("formats");
            if (!f.is_array()) throw config_error("output.formats: expected an array");
            cfg.formats.clear();
            for (const auto& x : f) {
                if (!x.is_string() || (x != "csv" && x != "json"))
                    throw config_error("output.formats: entries must be \"csv\" or \"json\"");
                cfg.formats.push_back(x.get<std::string>());
            }
        }
    }
    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        reject_unknown(t, "tolerances", {"solver", "certificate"});
        cfg.tol = number_or(t, "tolerances", "solver", cfg.tol);
        cfg.certificate_slack = number_or(t, "tolerances", "certificate", cfg.certificate_slack);
    }
    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned()) throw config_error("seed: expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.delta = number_or(doc, "config", "delta", cfg.delta);
    cfg.jobs = static_cast<unsigned>(count_at(doc, "config", "jobs", cfg.jobs));
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        reject_unknown(s, "sweep", {"parameter", "from", "to", "steps"});
        SweepSpec sw;
        sw.parameter = string_at(s, "sweep", "parameter");
        if (sw.parameter != "p_high" && sw.parameter != "p_low")
            throw config_error("sweep.parameter: expected p_high or p_low");
        sw.from = number_at(s, "sweep", "from");
        sw.to = number_at(s, "sweep", "to");
        sw.steps = count_at(s, "sweep", "steps", 30);
        if (sw.steps == 0) throw config_error("sweep.steps: must be positive");
        cfg.sweep = sw;
    }
    if (doc.contains("verify")) {
        const json& v = doc.at("verify");
        reject_unknown(v, "verify", {"pricing", "alpha"});
        if (v.contains("pricing")) cfg.pricing_path = string_at(v, "verify", "pricing");
        if (v.contains("alpha")) cfg.alpha = number(v.at("alpha"), "verify.alpha");
    }
    if (!(cfg.tol >= 1e-10 && cfg.tol < 1.0)) throw config_error("tolerances.solver: must lie in [1e-10, 1)");
    if (!(cfg.certificate_slack >= 0.0)) throw config_error("tolerances.certificate: must be >= 0");
    if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw config_error("delta: must lie in (0, 1]");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
    return parse_config(doc);
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.slots.empty()) {
        std::vector<Setup> setups;
        for (const auto& s : cfg.slots) setups.push_back(to_setup(s));
        const MultiSlotPricing ms = build_multislot(setups, cfg.tol);
        const fs::path dir = wants(cfg, "json") ? prepare_out(cfg) : fs::path();
        for (std::size_t t = 0; t < setups.size(); ++t) {
            const Setup& eff = ms.effective[t];
            out << "slot " << t << ": p_high_eff=" << format_number(eff.p_high) << '\n';
            report_params(out, eff, solve_setup(eff, cfg.tol));
            if (wants(cfg, "json"))
                write_json_file(dir / ("pricing_slot" + std::to_string(t) + ".json"),
                                to_json(ms.functions[t]));
        }
        out << "alpha (max over slots): " << fixed6(ms.alpha()) << '\n';
        return kOk;
    }
    if (!cfg.setup) throw config_error("setup: required for solve");
    const Setup setup = to_setup(*cfg.setup);
    const OptimalParams p = solve_setup(setup, cfg.tol);
    report_params(out, setup, p);
    const PricingFunction phi =
        setup.cost.strictly_convex() ? build_optimal(setup, p, cfg.tol) : build_optimal(setup);
    if (wants(cfg, "json")) {
        const fs::path path = prepare_out(cfg) / "pricing.json";
        write_json_file(path, to_json(phi));
        out << "pricing: " << path.string() << '\n';
    }
    return kOk;
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.slots.empty()) return run_multislot_cmd(cfg, out);
    if (!cfg.setup) throw config_error("setup: required for run");
    if (!cfg.instance) throw config_error("instance: required for run");
    const Setup setup = to_setup(*cfg.setup);
    const PricingFunction phi = build_optimal(setup, std::nullopt, cfg.tol);
    const ArrivalInstance inst = build_instance(cfg, setup, phi, out);
    validate_instance(setup, inst);
    const MechanismTrace trace = run(setup, phi, inst);
    const CertificateReport cert = certificate(trace, phi.alpha, cfg.certificate_slack);
    const double offline = fractional_optimum(setup, inst).value;
    const double online = trace.s_online();
    const double ratio = online > 0.0 ? offline / online : (offline > 0.0 ? INFINITY : 1.0);

    const fs::path dir = prepare_out(cfg);
    if (wants(cfg, "csv")) {
        std::ofstream f(dir / "trace.csv");
        write_trace_csv(f, trace);
    }
    double max_r = 0.0;
    for (const auto& a : inst) max_r = std::max(max_r, a.r);

    out << "case: " << to_string(setup.kase) << '\n';
    out << "alpha*: " << fixed6(phi.alpha) << '\n';
    out << "agents: " << inst.size() << '\n';
    if (max_r > 0.01)
        out << "note: largest requirement " << format_number(max_r)
            << " exceeds 0.01; certificate inequalities assume small requests\n";
    out << "S_online: " << format_number(online) << '\n';
    out << "S_offline (fractional): " << format_number(offline) << '\n';
    out << "ratio: " << format_number(ratio) << '\n';
    if (cert.empty) {
        out << "certificate: PASS (empty trace)\n";
        return kOk;
    }
    out << "certificate initial (k=" << cert.k << "): margin " << format_number(cert.initial_margin)
        << ' ' << verdict(cert.initial_ok) << '\n';
    out << "certificate incremental: worst margin " << format_number(cert.worst_incremental_margin)
        << " at step " << cert.worst_step << ", violations " << cert.incremental_violations << ' '
        << verdict(cert.incremental_ok) << '\n';
    out << "certificate final: margin " << format_number(cert.final_margin) << ' '
        << verdict(cert.final_ok) << '\n';
    out << "certificate: " << verdict(cert.passed()) << '\n';
    return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.setup) throw config_error("setup: required for sweep");
    if (!cfg.sweep) throw config_error("sweep: required for sweep");
    const SweepSpec& sw = *cfg.sweep;
    const bool over_high = sw.parameter == "p_high";

    std::vector<SweepRow> rows(sw.steps);
    for (std::size_t i = 0; i < sw.steps; ++i)
        rows[i].value = sw.steps == 1 ? sw.from
                                      : sw.from + (sw.to - sw.from) * static_cast<double>(i) /
                                                      static_cast<double>(sw.steps - 1);

    auto solve_row = [&](SweepRow& row) {
        try {
            const double lo = over_high ? cfg.setup->p_low : row.value;
            const double hi = over_high ? row.value : cfg.setup->p_high;
            const Setup setup = classify(cfg.setup->cost, lo, hi);
            row.kase = to_string(setup.kase);
            row.params = solve_setup(setup, cfg.tol);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) solve_row(rows[i]);
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(rows.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t failures = 0;
    std::string violation;
    const SweepRow* prev = nullptr;
    for (const auto& row : rows) {
        if (!row.ok) {
            ++failures;
            continue;
        }
        if (prev) {
            const double a0 = prev->params.alpha_star;
            const double a1 = row.params.alpha_star;
            const bool moved = row.value != prev->value;
            const bool monotone = !moved || (over_high == (row.value > prev->value) ? a1 > a0 : a1 < a0);
            if (!monotone && violation.empty())
                violation = "alpha* not strictly " +
                            std::string(over_high ? "increasing in p_high" : "decreasing in p_low") +
                            " between " + format_number(prev->value) + " (" + format_number(a0) +
                            ") and " + format_number(row.value) + " (" + format_number(a1) + ")";
        }
        prev = &row;
    }

    std::ostringstream csv;
    csv << sw.parameter << ",case,alpha_star,omega_star,u_star,error\n";
    for (const auto& row : rows) {
        csv << format_number(row.value) << ',' << row.kase << ',';
        if (row.ok) {
            csv << format_number(row.params.alpha_star) << ','
                << format_number(row.params.omega_star) << ','
                << (row.params.u_star ? format_number(*row.params.u_star) : "") << ",\n";
        } else {
            std::string msg = row.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            csv << ",,,error: " << msg << '\n';
        }
    }
    if (wants(cfg, "csv")) {
        std::ofstream f(prepare_out(cfg) / "sweep.csv");
        f << csv.str();
    }
    out << csv.str();
    out << "points: " << rows.size() << ", failed: " << failures << '\n';
    if (!violation.empty()) {
        out << "MONOTONICITY VIOLATION: " << violation << '\n';
        return kComputational;
    }
    out << "monotonicity: PASS\n";
    return failures ? kComputational : kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.setup) throw config_error("setup: required for verify");
    if (cfg.pricing_path.empty()) throw config_error("verify.pricing: pricing JSON path required");
    const Setup setup = to_setup(*cfg.setup);
    PricingFunction phi;
    {
        std::ifstream f(cfg.pricing_path);
        if (!f) throw validation_error("cannot open pricing JSON " + cfg.pricing_path);
        try {
            phi = pricing_from_json(json::parse(f));
        } catch (const json::exception& e) {
            throw validation_error(cfg.pricing_path + ": " + e.what());
        }
    }
    const double alpha = cfg.alpha.value_or(phi.alpha);
    const SufficiencyReport rep = verify_sufficiency(setup, phi, alpha);
    out << "alpha: " << fixed6(alpha) << '\n';
    out << "flat condition: margin " << format_number(rep.flat_margin) << ' ' << verdict(rep.flat_ok)
        << '\n';
    out << "ode inequality: worst relative margin " << format_number(rep.ode_worst_margin) << " at y="
        << format_number(rep.ode_worst_y) << ' ' << verdict(rep.ode_ok) << '\n';
    out << "boundary: continuity error " << format_number(rep.continuity_error)
        << ", terminal margin " << format_number(rep.terminal_margin) << ' '
        << verdict(rep.boundary_ok) << '\n';
    out << "sufficiency: " << verdict(rep.passed()) << '\n';
    try {
        const RatioBreakdown r = evaluate_ratio_detail(setup, phi);
        out << "ratio terms: threshold " << format_number(r.threshold_term) << ", terminal "
            << format_number(r.terminal_term) << ", path " << format_number(r.path_term)
            << " at rho=" << format_number(r.path_argmax) << '\n';
        out << "competitive ratio: " << fixed6(r.ratio) << '\n';
    } catch (const validation_error& e) {
        out << "competitive ratio: unavailable (" << e.what() << ")\n";
    }
    return kOk;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Posted-price construction, simulation and certification"};
    app.require_subcommand(1);
    std::string config_path, out_dir, pricing;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<double> delta, tol, alpha;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Config JSON")->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--delta", delta, "Requirement granularity");
        sub->add_option("--tol", tol, "Solver tolerance");
    };
    CLI::App* solve = app.add_subcommand("solve", "Solve for the optimal pricing function");
    CLI::App* runc = app.add_subcommand("run", "Run the mechanism on an instance");
    CLI::App* sweep = app.add_subcommand("sweep", "Sweep p_high or p_low");
    CLI::App* verify = app.add_subcommand("verify", "Check a pricing function");
    for (auto* sub : {solve, runc, sweep, verify}) common(sub);
    verify->add_option("--pricing", pricing, "Pricing JSON");
    verify->add_option("--alpha", alpha, "Claimed competitive ratio");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (jobs) cfg.jobs = *jobs;
        if (seed) cfg.seed = *seed;
        if (delta) cfg.delta = *delta;
        if (tol) cfg.tol = *tol;
        if (!pricing.empty()) cfg.pricing_path = pricing;
        if (alpha) cfg.alpha = *alpha;
        if (!(cfg.tol >= 1e-10 && cfg.tol < 1.0)) throw config_error("--tol: must lie in [1e-10, 1)");
        if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw config_error("--delta: must lie in (0, 1]");
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*solve) return cmd_solve(cfg, out);
        if (*runc) return cmd_run(cfg, out);
        if (*sweep) return cmd_sweep(cfg, out);
        return cmd_verify(cfg, out);
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kComputational;
    }
}

}  // namespace postprice::cli
