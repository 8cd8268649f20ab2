#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "trafficpinn/csv.hpp"
#include "trafficpinn/scenario.hpp"

namespace fs = std::filesystem;
using namespace tpinn;

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    bool replay = false;
    bool realtime = false;
};

ScenarioConfig load_config(const Options& o) {
    ScenarioConfig cfg = ScenarioConfig::load(o.config);
    if (o.seed) cfg.apply_seed(*o.seed);
    return cfg;
}

ScheduleOptions schedule_of(const Options& o, const ScenarioConfig& cfg) {
    return {o.realtime ? ScheduleMode::realtime : ScheduleMode::replay, cfg.realtime_seconds_per_min};
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

double trapezoid_mass(const DensityField& f, Eigen::Index k) {
    const auto r = f.row(k);
    return f.dx() * (r.sum() - 0.5 * (r(0) + r(r.size() - 1)));
}

int cmd_simulate(const Options& o) {
    const ScenarioConfig cfg = load_config(o);
    fs::create_directories(o.out);
    const TruthRun run = simulate_truth(cfg);
    {
        auto out = open_out(fs::path(o.out) / "truth.csv");
        write_field_csv(out, run.field);
    }
    {
        auto out = open_out(fs::path(o.out) / "probes.csv");
        write_probe_csv(out, run.probes);
    }
    write_manifest((fs::path(o.out) / "manifest.txt").string(), cfg, "simulate", ScheduleMode::replay);
    std::cout << "grid: " << run.field.nt() << " times x " << run.field.n_nodes() << " nodes, solver dt "
              << csv::format(run.report.dt_min) << " min over " << run.report.steps << " steps\n"
              << "mass (veh-normalized km): initial " << csv::format(trapezoid_mass(run.field, 0)) << ", final "
              << csv::format(trapezoid_mass(run.field, run.field.nt() - 1)) << '\n'
              << "probes: " << run.probes.trajectories.size() << " vehicles, " << run.probes.sample_count()
              << " samples\n";
    return 0;
}

void write_snapshots(const fs::path& dir, const OnlineRun& run) {
    auto out = open_out(dir / "snapshots.csv");
    out << "window_index,valid_from_min,valid_to_min,vf_learned_kmh,vf_stale,data_points,latest_measurement_min,"
           "data_starved,lambda_pde,lambda_mono\n";
    for (const auto& s : run.estimate.snapshots())
        out << s.index << ',' << csv::format(s.valid_from) << ',' << csv::format(s.valid_to) << ','
            << csv::format(s.vf_kmh) << ',' << (s.vf_stale ? "true" : "false") << ',' << s.n_data << ','
            << (s.n_data ? csv::format(s.latest_measurement) : std::string()) << ','
            << (s.data_starved ? "true" : "false") << ',' << csv::format(s.weights.pde) << ','
            << csv::format(s.weights.mono) << '\n';
    if (!run.estimate.empty()) {
        auto ck = open_out(dir / "last_snapshot.ckpt");
        write_checkpoint(ck, run.estimate.snapshots().back().state.density);
    }
    if (!run.overruns.empty()) {
        auto ov = open_out(dir / "overruns.csv");
        ov << "window_index,train_seconds,budget_seconds,windows_skipped\n";
        for (const auto& e : run.overruns)
            ov << e.window << ',' << csv::format(e.train_seconds) << ',' << csv::format(e.budget_seconds) << ','
               << e.windows_skipped << '\n';
    }
}

int cmd_estimate(const Options& o) {
    const ScenarioConfig cfg = load_config(o);
    const auto schedule = schedule_of(o, cfg);
    fs::create_directories(o.out);

    ProbeDataset probes;
    std::optional<DensityField> truth;
    if (!cfg.probe_csv.empty()) {
        probes = read_probe_csv(cfg.probe_csv);
        if (!cfg.truth_csv.empty()) truth = read_field_csv(cfg.truth_csv);
    } else {
        TruthRun run = simulate_truth(cfg);
        probes = std::move(run.probes);
        truth = std::move(run.field);
    }

    const OnlineRun run = run_online(probes, cfg.domain, cfg.online, schedule, [](const EstimateSnapshot& s) {
        std::cerr << "window " << s.index << ": v_f " << csv::format(s.vf_kmh) << " km/h, " << s.n_data
                  << " samples" << (s.data_starved ? " (data starved)" : "") << '\n';
    });
    write_snapshots(o.out, run);
    write_manifest((fs::path(o.out) / "manifest.txt").string(), cfg, "estimate", schedule.mode);

    if (truth) {
        auto out = open_out(fs::path(o.out) / "metrics.csv");
        write_metrics_csv(out, online_metrics(*truth, run, cfg.free_flow), schedule.mode == ScheduleMode::realtime);
    } else if (!run.estimate.empty()) {
        auto out = open_out(fs::path(o.out) / "estimate.csv");
        write_field_csv(out, estimate_field(run.estimate, cfg.domain, cfg.solver.nx, cfg.solver.output_dt_min));
    }
    std::cout << run.estimate.snapshots().size() << " snapshots, " << run.overruns.size() << " overruns\n";
    return 0;
}

int cmd_compare(const Options& o) {
    const ScenarioConfig cfg = load_config(o);
    const auto schedule = schedule_of(o, cfg);
    fs::create_directories(o.out);
    const CompareResult r = run_compare(cfg, schedule);
    {
        auto out = open_out(fs::path(o.out) / "metrics.csv");
        write_metrics_csv(out, r.rows, schedule.mode == ScheduleMode::realtime);
    }
    {
        auto out = open_out(fs::path(o.out) / "summary.txt");
        write_compare_summary(out, r, cfg);
    }
    write_snapshots(o.out, r.online);
    write_manifest((fs::path(o.out) / "manifest.txt").string(), cfg, "compare", schedule.mode);
    write_compare_summary(std::cout, r, cfg);
    return 0;
}

int cmd_sweep(const Options& o) {
    const ScenarioConfig cfg = load_config(o);
    fs::create_directories(o.out);
    const SweepResult r = run_sweep(cfg);
    {
        auto out = open_out(fs::path(o.out) / "sweep.csv");
        write_sweep_csv(out, r.rows);
    }
    write_manifest((fs::path(o.out) / "manifest.txt").string(), cfg, "sweep-iterations", ScheduleMode::replay);
    write_sweep_csv(std::cout, r.rows);
    std::cout << "mean CEE averaged from t = " << csv::format(r.cee_from_min) << " min\n"
              << "fitted cost model: alpha " << csv::format(r.cost.alpha) << " s per collocation point-epoch, beta "
              << csv::format(r.cost.beta) << " s per data point-epoch\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online PINN traffic density estimation"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool schedule) {
        sub->add_option("--config", o.config, "Scenario configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Override the scenario seed");
        if (schedule) {
            auto* g = sub->add_option_group("schedule");
            g->add_flag("--replay", o.replay, "Run windows back to back (default)");
            g->add_flag("--realtime", o.realtime, "Align windows with the wall clock");
            g->require_option(0, 1);
        }
    };

    auto* simulate = app.add_subcommand("simulate", "Generate a truth field and probe measurements");
    add_common(simulate, false);
    auto* estimate = app.add_subcommand("estimate", "Run the online estimator on probe data");
    add_common(estimate, true);
    auto* compare = app.add_subcommand("compare", "Compare the online estimator with the observer");
    add_common(compare, true);
    auto* sweep = app.add_subcommand("sweep-iterations", "Online versus offline training-budget sweep");
    add_common(sweep, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(o);
        if (*estimate) return cmd_estimate(o);
        if (*compare) return cmd_compare(o);
        if (*sweep) return cmd_sweep(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
