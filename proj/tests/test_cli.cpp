#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trafficpinn/csv.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TRAFFICPINN_CLI_PATH;
const std::string kScenarios = TRAFFICPINN_SCENARIO_DIR;
const std::string kData = TRAFFICPINN_TEST_DATA_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("trafficpinn_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Exit code of the CLI; stderr goes to `err`.
int run(const std::string& args, const fs::path& err) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("simulate is reproducible and records the schedule") {
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    REQUIRE(run("simulate --config " + kScenarios + "/smoke.ini --out " + a.string(), a / "err") == 0);
    REQUIRE(run("simulate --config " + kScenarios + "/smoke.ini --out " + b.string(), b / "err") == 0);
    CHECK(slurp(a / "truth.csv") == slurp(b / "truth.csv"));
    CHECK(slurp(a / "probes.csv") == slurp(b / "probes.csv"));
    CHECK(slurp(a / "manifest.txt") == slurp(b / "manifest.txt"));
    CHECK(slurp(a / "manifest.txt").find("free_flow_kmh = 0:37.5, 1.5:25") != std::string::npos);

    const auto c = scratch("sim_c");
    REQUIRE(run("simulate --config " + kScenarios + "/smoke.ini --seed 99 --out " + c.string(), c / "err") == 0);
    CHECK(slurp(a / "probes.csv") != slurp(c / "probes.csv"));

    const auto full = scratch("sim_full");
    REQUIRE(run("simulate --config " + kScenarios + "/greenshield.ini --out " + full.string(), full / "err") == 0);
    CHECK(slurp(full / "manifest.txt").find("free_flow_kmh = 0:37.5, 10:18.75, 18:30") != std::string::npos);
}

TEST_CASE("estimate ingests simulated probe files") {
    const auto sim = scratch("ext_sim");
    REQUIRE(run("simulate --config " + kScenarios + "/smoke.ini --out " + sim.string(), sim / "err") == 0);
    const auto ini = sim / "external.ini";
    {
        std::ofstream out(ini);
        out << "[run]\nmode = external-data\nprobe_csv = probes.csv\ntruth_csv = truth.csv\n\n"
               "[domain]\nhorizon_min = 3\n\n[online]\nlookback_min = 2\nvelocity_window_min = 2\n\n"
               "[trainer]\nepochs = 10\nn_colloc = 200\n";
    }
    const auto out = scratch("ext_out");
    REQUIRE(run("estimate --replay --config " + ini.string() + " --out " + out.string(), out / "err") == 0);
    const auto table = tpinn::csv::read_file((out / "metrics.csv").string());
    REQUIRE_FALSE(table.rows.empty());
    for (const auto& row : table.rows) {
        const double c = tpinn::csv::parse_double(row[1], "cee");
        CHECK(std::isfinite(c));
        CHECK(c >= 0.0);
    }
    CHECK(fs::exists(out / "snapshots.csv"));
    CHECK(fs::exists(out / "last_snapshot.ckpt"));
}

TEST_CASE("compare in replay mode is byte-identical") {
    const auto a = scratch("cmp_a"), b = scratch("cmp_b");
    REQUIRE(run("compare --config " + kScenarios + "/smoke.ini --out " + a.string(), a / "err") == 0);
    REQUIRE(run("compare --replay --config " + kScenarios + "/smoke.ini --out " + b.string(), b / "err") == 0);
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
    CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));
    CHECK(slurp(a / "summary.txt").find("[0,1.5)") != std::string::npos);
}

TEST_CASE("exit codes and messages") {
    const auto dir = scratch("errors");
    CHECK(run("", dir / "e0") == 2);
    CHECK(run("simulate", dir / "e1") == 2);
    CHECK(run("simulate --config /no/such/file.ini", dir / "e2") == 2);
    CHECK(run("compare --replay --realtime --config " + kScenarios + "/smoke.ini", dir / "e3") == 2);

    const auto bad = dir / "bad.ini";
    {
        std::ofstream out(bad);
        out << "[domain]\nlength_km = 5\n\n[solver]\nnx = many\n";
    }
    CHECK(run("simulate --config " + bad.string() + " --out " + (dir / "o").string(), dir / "e4") == 2);
    CHECK(slurp(dir / "e4").find("bad.ini:5:") != std::string::npos);

    const auto typo = dir / "typo.ini";
    {
        std::ofstream out(typo);
        out << "[domain]\nlenght_km = 5\n";
    }
    CHECK(run("simulate --config " + typo.string() + " --out " + (dir / "o").string(), dir / "e5") == 2);
    CHECK(slurp(dir / "e5").find("typo.ini:2: unknown key 'domain.lenght_km'") != std::string::npos);

    CHECK(run("estimate --config " + kData + "/no_rho.ini --out " + (dir / "o").string(), dir / "e6") == 3);
    CHECK(slurp(dir / "e6").find("missing required column 'rho'") != std::string::npos);
}
