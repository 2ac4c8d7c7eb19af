#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "postprice/pricing.hpp"

using namespace postprice;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("postprice_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "postprice");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

double field(const std::string& text, const std::string& key) {
    const auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size()));
}

const char* kQuadratic = R"({"setup":{"cost":{"kind":"quadratic","a":1},"p_low":0.3,"p_high":3.0}})";

}  // namespace

TEST_CASE("config parsing reports the offending field") {
    auto parse_error = [](const std::string& text) {
        try {
            cli::parse_config(nlohmann::json::parse(text));
        } catch (const cli::config_error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(parse_error(R"({"setup":{"p_low":1,"p_high":2}})").find("setup.cost") != std::string::npos);
    CHECK(parse_error(R"({"setup":{"cost":{"kind":"cubic"},"p_low":1,"p_high":2}})").find("setup.cost.kind") != std::string::npos);
    CHECK(parse_error(R"({"setup":{"cost":{"kind":"zero"},"p_low":"x","p_high":2}})").find("setup.p_low") != std::string::npos);
    CHECK(parse_error(R"({"setup":{"cost":{"kind":"linear","q":1},"p_low":0.5,"p_high":2}})").find("nice-setup") != std::string::npos);
    CHECK(parse_error(R"({"colour":1})").find("config.colour") != std::string::npos);
    CHECK(parse_error(R"({"instance":{"generator":"worst_case_rho","rho":"max"}})").find("instance.rho") != std::string::npos);
    CHECK(parse_error(R"({"sweep":{"parameter":"q","from":1,"to":2}})").find("sweep.parameter") != std::string::npos);

    const cli::RunConfig d = cli::parse_config(nlohmann::json::parse(kQuadratic));
    CHECK(d.tol == 1e-8);
    CHECK(d.delta == 1e-4);
    CHECK(d.seed == 42u);
    CHECK(d.setup->cost.kind == CostKind::Quadratic);
}

TEST_CASE("solve prints the closed-form optimum for zero cost") {
    const fs::path dir = scratch_dir("solve_zero");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"zero"},"p_low":1,"p_high":2.718281828459045}})");
    const Result r = invoke({"solve", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("alpha*: 2.000000") != std::string::npos);
    CHECK(r.out.find("omega*: 0.500000") != std::string::npos);
    CHECK(fs::exists(dir / "pricing.json"));
}

TEST_CASE("solve on equal bounds") {
    const fs::path dir = scratch_dir("solve_eq");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":0.5,"p_high":0.5}})");
    const Result r = invoke({"solve", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("alpha*: 1.000000") != std::string::npos);
    CHECK(r.out.find("omega*: 0.500000") != std::string::npos);
}

TEST_CASE("solve reports small residuals for quadratic Case1") {
    const fs::path dir = scratch_dir("solve_q");
    const fs::path cfg = write_file(dir / "c.json", kQuadratic);
    const Result r = invoke({"solve", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("case: Case1") != std::string::npos);
    CHECK(r.out.find("u*: ") != std::string::npos);
    CHECK(std::fabs(field(r.out, "|h(p_low) - alpha F(omega)|: ")) < 1e-6);
    CHECK(std::fabs(field(r.out, "Gamma_1 = Gamma_2 at u*: ")) < 1e-6);
    CHECK(std::fabs(field(r.out, "Gamma_2 integral identity: ")) < 1e-6);
}

TEST_CASE("multi-slot solve writes one pricing file per slot") {
    const fs::path dir = scratch_dir("solve_slots");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"slots":[{"cost":{"kind":"zero"},"p_low":1,"p_high":2},{"cost":{"kind":"zero"},"p_low":1,"p_high":2}]})");
    const Result r = invoke({"solve", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "pricing_slot0.json"));
    CHECK(fs::exists(dir / "pricing_slot1.json"));
    CHECK(field(r.out, "alpha (max over slots): ") == doctest::Approx(1.0 + std::log(4.0)).epsilon(1e-6));
}

TEST_CASE("run at the maximizing rho is close to alpha*") {
    const fs::path dir = scratch_dir("run_worst");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":0.3,"p_high":3.0},
            "instance":{"generator":"worst_case_rho","rho":"argmax"}})");
    const Result r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    const double alpha = field(r.out, "alpha*: ");
    CHECK(field(r.out, "ratio: ") >= 0.95 * alpha);
    CHECK(fs::exists(dir / "trace.csv"));
}

TEST_CASE("run on a random instance passes the certificate and is reproducible") {
    const fs::path dir = scratch_dir("run_random");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":1.1,"p_high":5.0},
            "instance":{"generator":"random","n":1000,"density":"two_point","delta":0.001}})");
    const Result a = invoke({"run", "--config", cfg.string(), "--out", (dir / "a").string()});
    const Result b = invoke({"run", "--config", cfg.string(), "--out", (dir / "b").string()});
    CHECK(a.code == 0);
    CHECK(a.out.find("certificate: PASS") != std::string::npos);
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    const Result c = invoke({"run", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "7"});
    CHECK(slurp(dir / "a" / "trace.csv") != slurp(dir / "c" / "trace.csv"));
}

TEST_CASE("run on an empty instance reports ratio one") {
    const fs::path dir = scratch_dir("run_empty");
    write_file(dir / "empty.csv", "v,r\n");
    const fs::path cfg = write_file(dir / "c.json",
        std::string(R"({"setup":{"cost":{"kind":"quadratic"},"p_low":0.3,"p_high":3.0},"instance":{"csv":")") +
            (dir / "empty.csv").string() + "\"}}");
    const Result r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("S_online: 0\n") != std::string::npos);
    CHECK(r.out.find("ratio: 1\n") != std::string::npos);
}

TEST_CASE("run flags large requests and rejects invalid instances") {
    const fs::path dir = scratch_dir("run_invalid");
    write_file(dir / "big.csv", "v,r\n0.1,0.05\n");
    write_file(dir / "bad.csv", "v,r\n9,0.5\n");
    const std::string head = R"({"setup":{"cost":{"kind":"zero"},"p_low":1,"p_high":3},"instance":{"csv":")";
    const fs::path big = write_file(dir / "big.json", head + (dir / "big.csv").string() + "\"}}");
    const fs::path bad = write_file(dir / "bad.json", head + (dir / "bad.csv").string() + "\"}}");
    const Result r1 = invoke({"run", "--config", big.string(), "--out", dir.string()});
    CHECK(r1.code == 0);
    CHECK(r1.out.find("exceeds 0.01") != std::string::npos);
    const Result r2 = invoke({"run", "--config", bad.string(), "--out", dir.string()});
    CHECK(r2.code == 2);
    CHECK(r2.err.find("exceeds p_high") != std::string::npos);
}

TEST_CASE("multi-slot run") {
    const fs::path dir = scratch_dir("run_slots");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"slots":[{"cost":{"kind":"zero"},"p_low":1,"p_high":2},{"cost":{"kind":"zero"},"p_low":1,"p_high":2}],
            "instance":{"generator":"random","n":150000,"delta":2e-5}})");
    const Result r = invoke({"run", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("certificate: PASS") != std::string::npos);
}

TEST_CASE("sweep over p_high is ordered and strictly increasing") {
    const fs::path dir = scratch_dir("sweep");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":1.1,"p_high":1.1},
            "sweep":{"parameter":"p_high","from":1.1,"to":12.1,"steps":6}})");
    const Result r = invoke({"sweep", "--config", cfg.string(), "--out", dir.string(), "--jobs", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("monotonicity: PASS") != std::string::npos);
    std::istringstream csv(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "p_high,case,alpha_star,omega_star,u_star,error");
    std::vector<double> xs, alphas;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string x, kase, a;
        std::getline(row, x, ',');
        std::getline(row, kase, ',');
        std::getline(row, a, ',');
        xs.push_back(std::stod(x));
        alphas.push_back(std::stod(a));
        if (xs.size() > 1) CHECK(kase == "Case2");
    }
    REQUIRE(xs.size() == 6);
    CHECK(alphas[0] == 1.0);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        CHECK(xs[i] > xs[i - 1]);
        CHECK(alphas[i] > alphas[i - 1]);
    }
}

TEST_CASE("sweep over p_low decreases and a single point matches solve") {
    const fs::path dir = scratch_dir("sweep_low");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":0.3,"p_high":3.0},
            "sweep":{"parameter":"p_low","from":0.3,"to":2.0,"steps":4}})");
    CHECK(invoke({"sweep", "--config", cfg.string(), "--out", dir.string()}).code == 0);

    const fs::path one = write_file(dir / "one.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":0.3,"p_high":3.0},
            "sweep":{"parameter":"p_high","from":3.0,"to":3.0,"steps":1}})");
    const Result sweep = invoke({"sweep", "--config", one.string(), "--out", dir.string()});
    const fs::path solo = write_file(dir / "solo.json", kQuadratic);
    const Result solve = invoke({"solve", "--config", solo.string(), "--out", dir.string()});
    std::istringstream csv(sweep.out);
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(row.rfind("3,Case1,", 0) == 0);
    const double a_sweep = std::stod(row.substr(8));
    CHECK(a_sweep == doctest::Approx(field(solve.out, "alpha*: ")).epsilon(1e-6));
}

TEST_CASE("sweep records failing points and keeps going") {
    const fs::path dir = scratch_dir("sweep_fail");
    const fs::path cfg = write_file(dir / "c.json",
        R"({"setup":{"cost":{"kind":"quadratic"},"p_low":0.3,"p_high":3.0},
            "sweep":{"parameter":"p_high","from":0.1,"to":3.0,"steps":3}})");
    const Result r = invoke({"sweep", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.out.find("error: ") != std::string::npos);
    CHECK(r.out.find("points: 3, failed: 1") != std::string::npos);
}

TEST_CASE("verify an exported pricing function") {
    const fs::path dir = scratch_dir("verify");
    const fs::path cfg = write_file(dir / "c.json", kQuadratic);
    REQUIRE(invoke({"solve", "--config", cfg.string(), "--out", dir.string()}).code == 0);
    const std::string pricing = (dir / "pricing.json").string();

    const Result ok = invoke({"verify", "--config", cfg.string(), "--pricing", pricing});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("sufficiency: PASS") != std::string::npos);
    const double alpha = field(ok.out, "alpha: ");
    CHECK(std::fabs(field(ok.out, "competitive ratio: ") - alpha) < 1e-3);

    const Result low = invoke({"verify", "--config", cfg.string(), "--pricing", pricing, "--alpha",
                               std::to_string(0.9 * alpha)});
    CHECK(low.out.find("flat condition: margin -") != std::string::npos);
    CHECK(low.out.find("sufficiency: FAIL") != std::string::npos);

    // Straight ramp from the floor price at omega* to p_high at full capacity.
    const std::string ramp = write_file(dir / "ramp.json",
        R"({"p_low":0.3,"omega":0.0547,"alpha":3.1,"upper_bound":1,
            "segment":{"kind":"sampled","grid":[0.0547,1],"values":[0.3,3.0]}})").string();
    const Result r = invoke({"verify", "--config", cfg.string(), "--pricing", ramp});
    CHECK(r.code == 0);
    const double ratio = field(r.out, "competitive ratio: ");
    CHECK(std::isfinite(ratio));
    CHECK(ratio > alpha);

    const std::string broken = write_file(dir / "broken.json", "{\"p_low\": 0.3,").string();
    CHECK(invoke({"verify", "--config", cfg.string(), "--pricing", broken}).code == 2);
}

TEST_CASE("usage errors exit with code one") {
    const fs::path dir = scratch_dir("usage");
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"solve"}).code == 1);
    CHECK(invoke({"bogus"}).code == 1);
    CHECK(invoke({"solve", "--config", (dir / "missing.json").string()}).code == 1);
    const fs::path bad = write_file(dir / "bad.json", "{ not json");
    CHECK(invoke({"solve", "--config", bad.string()}).code == 1);
    const fs::path cfg = write_file(dir / "c.json", kQuadratic);
    CHECK(invoke({"solve", "--config", cfg.string(), "--tol", "0"}).code == 1);
    CHECK(invoke({"run", "--config", cfg.string(), "--out", dir.string()}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
}
