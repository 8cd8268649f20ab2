#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trafficpinn/scenario.hpp"

using namespace tpinn;

namespace {

const std::string kScenarios = TRAFFICPINN_SCENARIO_DIR;

ConfigFile parse(const std::string& text) {
    std::istringstream in(text);
    return ConfigFile::parse(in, "test.ini");
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("config file syntax") {
    const auto f = parse("# comment\n[a]\nx = 1.5  # trailing\nname = hello\n\n[b]\nlist = 1, 2,3\npairs = 0:1, 2.5:0.5\n");
    CHECK(f.get_double("a", "x", 0) == 1.5);
    CHECK(f.get_string("a", "name", "") == "hello");
    CHECK(f.get_double("a", "missing", 7) == 7);
    CHECK(f.get_list("b", "list") == std::vector<double>{1, 2, 3});
    CHECK(f.get_pairs("b", "pairs") == std::vector<std::pair<double, double>>{{0, 1}, {2.5, 0.5}});
    CHECK_NOTHROW(f.reject_unknown());

    CHECK(error_of([] { parse("[a]\nx = 1\nx = 2\n"); }).find("test.ini:3:") != std::string::npos);
    CHECK(error_of([] { parse("x = 1\n"); }).find("test.ini:1:") != std::string::npos);
    CHECK(error_of([] { parse("[a\n"); }).find("test.ini:1:") != std::string::npos);
    CHECK(error_of([] { parse("[a]\njunk\n"); }).find("test.ini:2:") != std::string::npos);

    const auto bad = parse("[a]\n\nx = twelve\nflag = yes\nn = 1.5\n");
    CHECK(error_of([&] { bad.get_double("a", "x", 0); }).find("test.ini:3:") != std::string::npos);
    CHECK(error_of([&] { bad.get_bool("a", "flag", false); }).find("test.ini:4:") != std::string::npos);
    CHECK(error_of([&] { bad.get_int("a", "n", 0); }).find("test.ini:5:") != std::string::npos);

    const auto extra = parse("[a]\nx = 1\ntypo = 2\n");
    extra.get_double("a", "x", 0);
    CHECK(error_of([&] { extra.reject_unknown(); }).find("test.ini:3: unknown key 'a.typo'") != std::string::npos);
}

TEST_CASE("scenario files load and validate") {
    const auto full = ScenarioConfig::load(kScenarios + "/greenshield.ini");
    const auto& segs = full.free_flow.segments();
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].start_min == 0.0);
    CHECK(segs[0].vf_kmh == 37.5);
    CHECK(segs[1].start_min == 10.0);
    CHECK(segs[1].vf_kmh == 18.75);
    CHECK(segs[2].vf_kmh == 30.0);
    CHECK(full.domain.horizon_min == 30.0);
    CHECK(full.online.trainer.epochs == 100);
    CHECK(full.fleet.sample_rate_hz == 3.0);

    CHECK(error_of([] {
              std::istringstream in("[online]\nstep_min = 0.3\nlookback_min = 0.2\n");
              ScenarioConfig::from_file(ConfigFile::parse(in, "x.ini"));
          }).find("x.ini") != std::string::npos);
    CHECK_THROWS_AS(([] {
                        std::istringstream in("[run]\nmode = external-data\n");
                        ScenarioConfig::from_file(ConfigFile::parse(in, "x.ini"));
                    }()),
                    ConfigError);
}

TEST_CASE("seed derivation") {
    ScenarioConfig a, b;
    a.apply_seed(5);
    b.apply_seed(5);
    CHECK(a.fleet.seed == b.fleet.seed);
    CHECK(a.online.trainer.seed == b.online.trainer.seed);
    CHECK(a.fleet.seed != a.online.trainer.seed);
    b.apply_seed(6);
    CHECK(a.fleet.seed != b.fleet.seed);
}

TEST_CASE("manifest records the schedule") {
    const auto full = ScenarioConfig::load(kScenarios + "/greenshield.ini");
    const auto path = std::filesystem::temp_directory_path() / "trafficpinn_manifest_test.txt";
    write_manifest(path.string(), full, "compare", ScheduleMode::replay);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str().find("free_flow_kmh = 0:37.5, 10:18.75, 18:30\n") != std::string::npos);
    CHECK(text.str().find("schedule = replay\n") != std::string::npos);
    CHECK(text.str().find("seed = 1\n") != std::string::npos);
    std::filesystem::remove(path);
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("interval means use half-open intervals") {
    std::vector<MetricsRow> rows;
    for (int k = 0; k <= 4; ++k) rows.push_back({k * 1.0, static_cast<double>(k), 10.0 * k, 37.5, 37.5, k, 0.0});
    const auto open = interval_mean(rows, 1.0, 3.0, true);
    CHECK(open.samples == 2);
    CHECK(open.pinn == 1.5);
    CHECK(open.observer == 15.0);
    const auto closed = interval_mean(rows, 1.0, 3.0, false);
    CHECK(closed.samples == 3);
    CHECK(closed.pinn == 2.0);
}

TEST_CASE("metrics CSV omits timing in replay mode") {
    std::vector<MetricsRow> rows{{0.6, 0.1, std::nullopt, 37.5, 36.0, 1, 0.25}};
    std::ostringstream replay, realtime;
    write_metrics_csv(replay, rows, false);
    write_metrics_csv(realtime, rows, true);
    CHECK(replay.str() == "t_min,cee_pinn,cee_observer,vf_true_kmh,vf_learned_kmh,window_index,train_seconds\n"
                          "0.6,0.1,,37.5,36,1,\n");
    CHECK(realtime.str().find(",1,0.25\n") != std::string::npos);
}

TEST_CASE("smoke scenario end to end") {
    const auto cfg = ScenarioConfig::load(kScenarios + "/smoke.ini");
    const auto a = run_compare(cfg, {});
    const auto b = run_compare(cfg, {});
    std::ostringstream sa, sb;
    write_metrics_csv(sa, a.rows, false);
    write_metrics_csv(sb, b.rows, false);
    CHECK(sa.str() == sb.str());
    REQUIRE_FALSE(a.rows.empty());
    for (const auto& r : a.rows) {
        CHECK(std::isfinite(r.cee_pinn));
        CHECK(r.cee_pinn >= 0.0);
        REQUIRE(r.cee_observer);
        CHECK(*r.cee_observer >= 0.0);
    }

    std::stringstream probes;
    write_probe_csv(probes, a.truth.probes);
    CHECK(read_probe_csv(probes, "mem") == a.truth.probes);

    const auto field = estimate_field(a.online.estimate, cfg.domain, cfg.solver.nx, cfg.solver.output_dt_min);
    CHECK(field.t0() == doctest::Approx(0.6));
    CHECK(field.t_end() == doctest::Approx(3.0));
    CHECK(field.values().minCoeff() >= 0.0);
    CHECK(field.values().maxCoeff() <= 1.0);
}

TEST_CASE("sweep rows cover every budget and mode") {
    const auto cfg = ScenarioConfig::load(kScenarios + "/smoke.ini");
    const auto r = run_sweep(cfg);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].mode == "online");
    CHECK(r.rows[0].mean_cee == r.rows[1].mean_cee);
    CHECK(r.rows[2].step_min == doctest::Approx(0.6));
    CHECK(r.rows[3].step_min == doctest::Approx(0.3));
    CHECK(r.cee_from_min == doctest::Approx(1.2));
    for (const auto& row : r.rows) CHECK(std::isfinite(row.mean_cee));
}
