#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "dmrate/errors.hpp"
#include "dmrate/scan.hpp"

using namespace dmrate;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"(
# two distances, two amplitudes
[channel]
distances_km = [10, 40]
xi = 0.01
[detector]
eta_d = 0.719
nu_el = 0.01
[protocol]
alpha = [0.6, 0.75]
[solver]
cutoff = 6
)";

std::string csv_text(const std::vector<ResultRow>& rows) {
    std::ostringstream ss;
    write_csv(ss, rows);
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "dmrate_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(const std::string& args) {
    const char* bin = std::getenv("DMRATE_BIN");
    REQUIRE(bin != nullptr);
    const int status = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing and defaults") {
    const auto cfg = parse_config(kTiny);
    CHECK(cfg.distances_km == std::vector<double>{10, 40});
    CHECK(cfg.detector == DetectorModel::symmetric(0.719, 0.01));
    CHECK(cfg.alphas == std::vector<double>{0.6, 0.75});
    CHECK(cfg.deltas == std::vector<double>{0.0});
    CHECK(cfg.beta == 0.95);
    CHECK(cfg.cutoff == 6);
    CHECK(cfg.modes == std::vector<Mode>{Mode::trusted});
    CHECK(cfg.grid_size() == 4);

    const auto def = ScanConfig::default_alpha_grid();
    REQUIRE(def.size() == 9);
    CHECK(def.front() == 0.5);
    CHECK(def[3] == 0.65);
    CHECK(def.back() == 0.9);

    const auto r = inclusive_range(0.0, 1.0, 0.05);
    REQUIRE(r.size() == 21);
    CHECK(r[3] == 0.15);
    CHECK(r[7] == 0.35);
    CHECK(r.back() == 1.0);

    const auto full = parse_config(R"(
[channel]
eta_t = [0.5, 0.25]
xi = 0.02
[detector]
eta1 = 0.8
eta2 = 0.6
nu1 = 0.02
nu2 = 0.05
[protocol]
alpha = range(0.5, 0.7, 0.1)
delta_a = range(0, 0.2, 0.1)
beta = 0.9
[solver]
cutoff = 8
gap_tol = 1e-5
max_iters = 50
mode = [trusted, "untrusted"]
[output]
path = out.csv
format = pretty
best_alpha = false
)");
    CHECK(full.eta_t == std::vector<double>{0.5, 0.25});
    CHECK(full.detector == DetectorModel{0.8, 0.6, 0.02, 0.05});
    CHECK(full.alphas == std::vector<double>{0.5, 0.6, 0.7});
    CHECK(full.deltas == std::vector<double>{0.0, 0.1, 0.2});
    CHECK(full.modes == std::vector<Mode>{Mode::trusted, Mode::untrusted});
    CHECK(full.output == "out.csv");
    CHECK(full.format == "pretty");
    CHECK_FALSE(full.best_alpha);
    CHECK(full.grid_size() == 2 * 2 * 3 * 3);
}

TEST_CASE("config validation errors") {
    const std::string base = "[channel]\ndistances_km = [10]\n";
    CHECK_THROWS_AS(parse_config(base + "[protocol]\nalpha = []\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[protocol]\ndelta_a = []\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[channel]\nxi = 0.01\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "eta_t = [0.5]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[plot]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "xi = 0.01\nxi = 0.02\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "xi = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "xi = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[solver]\ncutoff = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[solver]\ncutoff = 7.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[solver]\nmode = sceptical\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[detector]\neta_d = 0.7\neta1 = 0.8\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[detector]\neta1 = 0.8\neta2 = 0.6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[output]\nformat = xml\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "[protocol]\nalpha = range(0.9, 0.5, 0.1)\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("distances_km = [1]\n"), ConfigError);
    try {
        parse_config(base + "[protocol]\nalpha = [0.5,, 0.6]\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/dmrate.conf"), ConfigError);
}

TEST_CASE("CSV header, round trip and pretty output") {
    std::ostringstream empty;
    write_csv(empty, {});
    CHECK(empty.str() ==
          "L_km,eta_t,xi,eta_d,nu_el,alpha,delta_a,mode,primal,lower_bound,delta_EC,p_pass,rate,iterations,residual,"
          "wall_time_s,status,kind\n");

    ResultRow a;
    a.L_km = 20;
    a.eta_t = 0.398107170553;
    a.xi = 0.01;
    a.eta_d = 0.719;
    a.nu_el = 0.01;
    a.alpha = 0.75;
    a.delta_a = 0.35;
    a.primal = 1.90873572213;
    a.lower_bound = 1.9087355389;
    a.delta_ec = 1.86600912;
    a.p_pass = 1.0;
    a.rate = 0.0427262;
    a.iterations = 6;
    a.residual = 4.4e-16;
    a.status = "converged";
    ResultRow b = a;
    b.L_km = std::numeric_limits<double>::quiet_NaN();
    b.mode = Mode::untrusted;
    b.primal = b.lower_bound = std::numeric_limits<double>::quiet_NaN();
    b.rate = 0.0;
    b.status = "infeasible";
    b.kind = "best_alpha";

    const std::string text = csv_text({a, b});
    std::istringstream in(text);
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == a);
    CHECK(std::isnan(rows[1].L_km));
    CHECK(rows[1].mode == Mode::untrusted);
    CHECK(rows[1].status == "infeasible");
    CHECK(rows[1].kind == "best_alpha");
    CHECK(csv_text(rows) == text);

    std::istringstream bad("L_km,eta_t\n1,2\n");
    CHECK_THROWS_AS(parse_csv(bad), std::invalid_argument);

    std::ostringstream pretty;
    write_pretty(pretty, {a});
    CHECK(pretty.str().find(" 0.0427 ") != std::string::npos);
}

TEST_CASE("scan: row count, best-alpha rows, determinism across worker counts") {
    const auto cfg = parse_config(kTiny);
    ScanOptions one;
    one.jobs = 1;
    const auto rows = run_scan(cfg, one);
    REQUIRE(rows.size() == cfg.grid_size() + 2);
    CHECK(all_converged(rows));
    for (std::size_t b = 0; b < rows.size(); b += 3) {
        CHECK(rows[b].kind == "grid");
        CHECK(rows[b + 1].kind == "grid");
        CHECK(rows[b + 2].kind == "best_alpha");
        CHECK(rows[b + 2].rate == std::max(rows[b].rate, rows[b + 1].rate));
        CHECK(rows[b].L_km == rows[b + 1].L_km);
    }
    for (const auto& r : rows) {
        CHECK(r.rate >= 0.0);
        CHECK(r.wall_time_s == 0.0);
        CHECK(r.lower_bound <= r.primal + 1e-8);
    }
    CHECK(rows[0].rate > rows[3].rate);

    ScanOptions three;
    three.jobs = 3;
    std::size_t calls = 0;
    three.progress = [&](const ResultRow&, std::size_t done, std::size_t total) {
        ++calls;
        CHECK(done <= total);
    };
    CHECK(csv_text(run_scan(cfg, three)) == csv_text(rows));
    CHECK(calls == cfg.grid_size());

    ScanConfig no_best = cfg;
    no_best.best_alpha = false;
    no_best.alphas = {0.75};
    CHECK(run_scan(no_best, one).size() == 2);
}

TEST_CASE("scan records per-point failures without aborting") {
    auto cfg = parse_config(kTiny);
    cfg.alphas = {0.75};
    cfg.deltas = {0.0, 40.0};  // nothing survives postselection at the second radius
    const auto rows = run_scan(cfg);
    REQUIRE(rows.size() == 2 * 2 * 2);
    CHECK(rows[0].status == "converged");
    CHECK(rows[2].status == "error");
    CHECK(rows[2].rate == 0.0);
    CHECK(std::isnan(rows[2].lower_bound));
    CHECK_FALSE(all_converged(rows));
}

TEST_CASE("command line exit codes") {
    const auto good = scratch("good.conf"), empty = scratch("empty.conf"), capped = scratch("capped.conf");
    const auto out = scratch("out.csv");
    write_file(good, kTiny);
    write_file(empty, "[channel]\ndistances_km = [10]\n[protocol]\nalpha = []\n");
    write_file(capped, std::string(kTiny) + "max_iters = 1\n");

    fs::remove(out);
    CHECK(run_cli("scan --config " + good.string() + " --jobs 2 --out " + out.string()) == 0);
    std::ifstream in(out);
    const auto rows = parse_csv(in);
    CHECK(rows.size() == 6);

    CHECK(run_cli("scan --config " + empty.string()) == 1);
    CHECK(run_cli("scan --config /nonexistent/x.conf") == 1);
    CHECK(run_cli("scan") == 1);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("scan --config " + good.string() + " --format xml") == 1);
    CHECK(run_cli("scan --config " + capped.string() + " --quiet") == 2);
    CHECK(run_cli("selftest") == 0);
    CHECK(run_cli("oracle-check --n-samples 6") == 0);
    CHECK(run_cli("--help") == 0);
}
