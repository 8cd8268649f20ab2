#include "trafficpinn/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "trafficpinn/csv.hpp"
#include "trafficpinn/seeding.hpp"

#ifndef TRAFFICPINN_VERSION
#define TRAFFICPINN_VERSION "0.0.0"
#endif

namespace tpinn {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string join_key(const std::string& section, const std::string& key) { return section + "." + key; }

} // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source_name) {
    ConfigFile cfg;
    cfg.source_ = source_name;
    std::string line, section;
    std::size_t number = 0;
    std::ostringstream raw;
    while (std::getline(in, line)) {
        ++number;
        raw << line << '\n';
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        auto where = [&] { return source_name + ":" + std::to_string(number) + ": "; };
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(where() + "unterminated section header");
            section = trim(std::string_view(body).substr(1, body.size() - 2));
            if (section.empty()) throw ConfigError(where() + "empty section name");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where() + "expected `key = value`");
        if (section.empty()) throw ConfigError(where() + "key outside of any section");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) throw ConfigError(where() + "empty key");
        const std::string full = join_key(section, key);
        if (cfg.entries_.count(full)) throw ConfigError(where() + "duplicate key '" + full + "'");
        cfg.entries_[full] = {trim(std::string_view(body).substr(eq + 1)), number};
    }
    cfg.text_ = raw.str();
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
    const std::string full = join_key(section, key);
    used_[full] = true;
    auto it = entries_.find(full);
    return it == entries_.end() ? nullptr : &it->second;
}

void ConfigFile::fail(const Entry& e, const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(e.line) + ": " + what);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return entries_.count(join_key(section, key)) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    try {
        return csv::parse_double(e->value, key);
    } catch (const DataError&) {
        fail(*e, "'" + join_key(section, key) + "' expects a number, got '" + e->value + "'");
    }
}

long ConfigFile::get_int(const std::string& section, const std::string& key, long fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    long v = 0;
    const char* end = e->value.data() + e->value.size();
    const auto r = std::from_chars(e->value.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        fail(*e, "'" + join_key(section, key) + "' expects an integer, got '" + e->value + "'");
    return v;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const char* end = e->value.data() + e->value.size();
    const auto r = std::from_chars(e->value.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        fail(*e, "'" + join_key(section, key) + "' expects an unsigned integer, got '" + e->value + "'");
    return v;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(*e, "'" + join_key(section, key) + "' expects true or false, got '" + e->value + "'");
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    std::vector<double> out;
    if (!e || e->value.empty()) return out;
    for (auto part : csv::split(e->value)) {
        try {
            out.push_back(csv::parse_double(trim(part), key));
        } catch (const DataError&) {
            fail(*e, "'" + join_key(section, key) + "' has a non-numeric entry '" + trim(part) + "'");
        }
    }
    return out;
}

std::vector<std::pair<double, double>> ConfigFile::get_pairs(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    std::vector<std::pair<double, double>> out;
    if (!e || e->value.empty()) return out;
    for (auto part : csv::split(e->value)) {
        const std::string item = trim(part);
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            fail(*e, "'" + join_key(section, key) + "' expects start:value pairs, got '" + item + "'");
        try {
            out.emplace_back(csv::parse_double(trim(std::string_view(item).substr(0, colon)), key),
                             csv::parse_double(trim(std::string_view(item).substr(colon + 1)), key));
        } catch (const DataError&) {
            fail(*e, "'" + join_key(section, key) + "' has a non-numeric pair '" + item + "'");
        }
    }
    return out;
}

void ConfigFile::reject_unknown() const {
    for (const auto& [full, entry] : entries_)
        if (!used_.count(full)) fail(entry, "unknown key '" + full + "'");
}

namespace {

std::vector<PiecewiseTrace::Piece> to_pieces(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<PiecewiseTrace::Piece> out;
    for (const auto& [a, b] : pairs) out.push_back({a, b});
    return out;
}

// Runs `build` and prefixes configuration errors with the key's location.
template <typename F>
auto anchored(const ConfigFile& file, const std::string& section, const std::string& key, F build) {
    try {
        return build();
    } catch (const ConfigError& e) {
        throw ConfigError(file.source() + ": [" + section + "] " + key + ": " + e.what());
    }
}

} // namespace

ScenarioConfig ScenarioConfig::from_file(const ConfigFile& f) {
    ScenarioConfig c;
    c.config_text = f.text();

    const std::string mode = f.get_string("run", "mode", "greenshield");
    if (mode == "greenshield") c.mode = ScenarioMode::greenshield;
    else if (mode == "external-data") c.mode = ScenarioMode::external_data;
    else throw ConfigError(f.source() + ": [run] mode must be greenshield or external-data, got '" + mode + "'");
    c.realtime_seconds_per_min = f.get_double("run", "realtime_seconds_per_min", c.realtime_seconds_per_min);
    c.probe_csv = f.get_string("run", "probe_csv", "");
    c.truth_csv = f.get_string("run", "truth_csv", "");

    c.domain.length_km = f.get_double("domain", "length_km", c.domain.length_km);
    c.domain.horizon_min = f.get_double("domain", "horizon_min", c.domain.horizon_min);
    c.domain.viscosity = f.get_double("domain", "viscosity", c.domain.viscosity);

    c.solver.nx = static_cast<int>(f.get_int("solver", "nx", c.solver.nx));
    c.solver.cfl_safety = f.get_double("solver", "cfl_safety", c.solver.cfl_safety);
    c.solver.output_dt_min = f.get_double("solver", "output_dt_min", c.solver.output_dt_min);
    if (f.has("solver", "initial"))
        c.solver.initial = anchored(f, "solver", "initial",
                                    [&] { return PiecewiseTrace(to_pieces(f.get_pairs("solver", "initial"))); });

    const std::string bmode = f.get_string("boundary", "mode", "random");
    if (bmode != "random" && bmode != "explicit")
        throw ConfigError(f.source() + ": [boundary] mode must be random or explicit, got '" + bmode + "'");
    c.random_boundary = bmode == "random";
    c.boundary_dwell_min = f.get_double("boundary", "dwell_min", c.boundary_dwell_min);
    if (!c.random_boundary) {
        c.boundary.left = anchored(f, "boundary", "left",
                                   [&] { return PiecewiseTrace(to_pieces(f.get_pairs("boundary", "left"))); });
        c.boundary.right = anchored(f, "boundary", "right",
                                    [&] { return PiecewiseTrace(to_pieces(f.get_pairs("boundary", "right"))); });
    }

    if (f.has("free_flow", "schedule"))
        c.free_flow = anchored(f, "free_flow", "schedule", [&] {
            std::vector<FreeFlowSchedule::Segment> segs;
            for (const auto& [t, v] : f.get_pairs("free_flow", "schedule")) segs.push_back({t, v});
            return FreeFlowSchedule(std::move(segs));
        });

    c.fleet.spawn_times = f.get_list("fleet", "spawn_times");
    c.fleet.mean_spawn_gap_min = f.get_double("fleet", "mean_spawn_gap_min", c.fleet.mean_spawn_gap_min);
    c.fleet.sample_rate_hz = f.get_double("fleet", "sample_rate_hz", c.fleet.sample_rate_hz);
    c.fleet.rho_noise_std = f.get_double("fleet", "rho_noise_std", c.fleet.rho_noise_std);
    c.fleet.v_noise_std_kmh = f.get_double("fleet", "v_noise_std_kmh", c.fleet.v_noise_std_kmh);

    auto& o = c.online;
    o.step_min = f.get_double("online", "step_min", o.step_min);
    o.lookback_min = f.get_double("online", "lookback_min", o.lookback_min);
    o.velocity_window_min = f.get_double("online", "velocity_window_min", o.velocity_window_min);
    o.warm_start = f.get_bool("online", "warm_start", o.warm_start);
    const std::string vmode = f.get_string("online", "velocity_mode", "greenshield");
    if (vmode == "greenshield") o.velocity_mode = VelocityMode::greenshield_learnable;
    else if (vmode == "learned") o.velocity_mode = VelocityMode::learned_closure;
    else throw ConfigError(f.source() + ": [online] velocity_mode must be greenshield or learned, got '" + vmode + "'");
    o.initial_vf_kmh = f.get_double("online", "initial_vf_kmh", o.initial_vf_kmh);
    o.density_shape.width = static_cast<int>(f.get_int("online", "width", o.density_shape.width));
    o.density_shape.hidden_layers = static_cast<int>(f.get_int("online", "hidden_layers", o.density_shape.hidden_layers));
    o.closure_shape.width = static_cast<int>(f.get_int("online", "closure_width", o.closure_shape.width));
    o.closure_shape.hidden_layers =
        static_cast<int>(f.get_int("online", "closure_hidden_layers", o.closure_shape.hidden_layers));

    auto& t = o.trainer;
    t.epochs = static_cast<int>(f.get_int("trainer", "epochs", t.epochs));
    t.n_colloc = static_cast<int>(f.get_int("trainer", "n_colloc", t.n_colloc));
    t.lr_density = f.get_double("trainer", "lr_density", t.lr_density);
    t.lr_closure = f.get_double("trainer", "lr_closure", t.lr_closure);
    t.lr_vf = f.get_double("trainer", "lr_vf", t.lr_vf);
    t.lr_lambda = f.get_double("trainer", "lr_lambda", t.lr_lambda);
    t.beta1 = f.get_double("trainer", "beta1", t.beta1);
    t.beta2 = f.get_double("trainer", "beta2", t.beta2);
    t.adam_eps = f.get_double("trainer", "adam_eps", t.adam_eps);
    t.lambda_min = f.get_double("trainer", "lambda_min", t.lambda_min);
    t.lambda_max = f.get_double("trainer", "lambda_max", t.lambda_max);
    t.velocity_window_min = o.velocity_window_min;

    c.observer.assumed_vf_kmh = f.get_double("observer", "assumed_vf_kmh", c.observer.assumed_vf_kmh);
    c.observer.injection_radius = static_cast<int>(f.get_int("observer", "injection_radius", c.observer.injection_radius));
    c.observer.initial_density = f.get_double("observer", "initial_density", c.observer.initial_density);
    c.observer.initial_from_truth = f.get_bool("observer", "initial_from_truth", c.observer.initial_from_truth);
    c.observer.cfl_safety = f.get_double("observer", "cfl_safety", c.observer.cfl_safety);

    if (f.has("sweep", "epochs")) {
        c.sweep.epochs.clear();
        for (double e : f.get_list("sweep", "epochs")) {
            if (e < 1 || e != std::floor(e)) throw ConfigError(f.source() + ": [sweep] epochs must be positive integers");
            c.sweep.epochs.push_back(static_cast<int>(e));
        }
    }
    c.sweep.anchor_epochs = static_cast<int>(f.get_int("sweep", "anchor_epochs", c.sweep.anchor_epochs));
    c.sweep.horizon_min = f.get_double("sweep", "horizon_min", c.sweep.horizon_min);

    c.apply_seed(f.get_u64("run", "seed", c.seed));
    f.reject_unknown();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(f.source() + ": " + e.what());
    }
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    ScenarioConfig c = from_file(ConfigFile::load(path));
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    resolve(c.probe_csv);
    resolve(c.truth_csv);
    return c;
}

void ScenarioConfig::apply_seed(std::uint64_t s) {
    seed = s;
    fleet.seed = mix_seed(s, 2);
    online.trainer.seed = mix_seed(s, 3);
}

BoundarySchedule ScenarioConfig::resolved_boundary() const {
    return random_boundary ? BoundarySchedule::random(domain.horizon_min, boundary_dwell_min, mix_seed(seed, 1))
                           : boundary;
}

void ScenarioConfig::validate() const {
    domain.validate();
    solver.validate();
    fleet.validate();
    online.validate();
    observer.validate();
    if (!(boundary_dwell_min > 0.0)) throw ConfigError("boundary dwell time must be positive");
    if (!(realtime_seconds_per_min > 0.0)) throw ConfigError("realtime_seconds_per_min must be positive");
    if (free_flow.segments().empty()) throw ConfigError("free-flow schedule is empty");
    if (sweep.epochs.empty() || sweep.anchor_epochs < 1) throw ConfigError("sweep needs epochs and a positive anchor");
    if (sweep.horizon_min < 0.0) throw ConfigError("sweep horizon must be >= 0");
    if (mode == ScenarioMode::external_data && probe_csv.empty())
        throw ConfigError("external-data mode requires run.probe_csv");
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string code_version() { return TRAFFICPINN_VERSION; }

void write_manifest(const std::string& path, const ScenarioConfig& config, const std::string& command,
                    ScheduleMode mode) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest '" + path + "'");
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.config_text);
    out << "command = " << command << '\n'
        << "config_hash = " << hash.str() << '\n'
        << "seed = " << config.seed << '\n'
        << "code_version = " << code_version() << '\n'
        << "schedule = " << (mode == ScheduleMode::replay ? "replay" : "realtime") << '\n'
        << "free_flow_kmh =";
    const auto& segs = config.free_flow.segments();
    for (std::size_t k = 0; k < segs.size(); ++k)
        out << (k ? ", " : " ") << csv::format(segs[k].start_min) << ':' << csv::format(segs[k].vf_kmh);
    out << '\n';
}

TruthRun simulate_truth(const ScenarioConfig& config) {
    if (config.mode != ScenarioMode::greenshield) throw ConfigError("simulation requires greenshield mode");
    TruthRun run;
    run.field = simulate(config.domain, config.solver, config.resolved_boundary(), config.free_flow, &run.report);
    run.probes = run_fleet(run.field, config.free_flow, config.fleet);
    return run;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, bool include_timing) {
    out << "t_min,cee_pinn,cee_observer,vf_true_kmh,vf_learned_kmh,window_index,train_seconds\n";
    for (const auto& r : rows) {
        out << csv::format(r.t_min) << ',' << csv::format(r.cee_pinn) << ','
            << (r.cee_observer ? csv::format(*r.cee_observer) : std::string()) << ',' << csv::format(r.vf_true_kmh)
            << ',' << csv::format(r.vf_learned_kmh) << ',' << r.window_index << ','
            << (include_timing ? csv::format(r.train_seconds) : std::string()) << '\n';
    }
}

std::vector<MetricsRow> online_metrics(const DensityField& truth, const OnlineRun& run, const FreeFlowSchedule& vf) {
    std::vector<MetricsRow> rows;
    for (const auto& s : cee_trace(truth, run.estimate)) {
        const auto& snap = run.estimate.select(s.t_min);
        rows.push_back({s.t_min, s.cee, std::nullopt, vf.vf_kmh(s.t_min), snap.vf_kmh, s.window_index,
                        snap.train_seconds});
    }
    return rows;
}

CompareResult run_compare(const ScenarioConfig& config, const ScheduleOptions& schedule) {
    CompareResult r;
    r.truth = simulate_truth(config);
    r.online = run_online(r.truth.probes, config.domain, config.online, schedule);
    const Eigen::VectorXd truth_initial = r.truth.field.row(0).transpose();
    r.observer = run_observer(r.truth.probes, config.domain, config.solver.nx, config.solver.output_dt_min,
                              config.observer, config.observer.initial_from_truth ? &truth_initial : nullptr);
    r.rows = online_metrics(r.truth.field, r.online, config.free_flow);
    for (auto& row : r.rows)
        row.cee_observer = cee(r.truth.field, [&](double t, double x) { return sample_field(r.observer, t, x); }, row.t_min);
    return r;
}

IntervalMean interval_mean(const std::vector<MetricsRow>& rows, double from, double to, bool to_open) {
    IntervalMean m{from, to, 0.0, 0.0, 0};
    std::size_t n_obs = 0;
    for (const auto& r : rows) {
        if (r.t_min < from - 1e-9) continue;
        if (to_open ? r.t_min >= to - 1e-9 : r.t_min > to + 1e-9) continue;
        m.pinn += r.cee_pinn;
        if (r.cee_observer) {
            m.observer += *r.cee_observer;
            ++n_obs;
        }
        ++m.samples;
    }
    m.pinn = m.samples ? m.pinn / static_cast<double>(m.samples) : std::numeric_limits<double>::quiet_NaN();
    m.observer = n_obs ? m.observer / static_cast<double>(n_obs) : std::numeric_limits<double>::quiet_NaN();
    return m;
}

void write_compare_summary(std::ostream& out, const CompareResult& result, const ScenarioConfig& config) {
    const auto& segs = config.free_flow.segments();
    out << "mean CEE per free-flow interval (no estimate before t = " << csv::format(2.0 * config.online.step_min)
        << " min; those times are excluded)\n";
    out << "interval_min,mean_cee_pinn,mean_cee_observer,samples\n";
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const double from = segs[k].start_min;
        const bool last = k + 1 == segs.size();
        const double to = last ? config.domain.horizon_min : segs[k + 1].start_min;
        const auto m = interval_mean(result.rows, from, to, !last);
        out << '[' << csv::format(from) << ',' << csv::format(to) << (last ? "]" : ")") << ',' << csv::format(m.pinn)
            << ',' << csv::format(m.observer) << ',' << m.samples << '\n';
    }
    out << "\nlearned free-flow velocity per window\n";
    out << "window_index,trained_at_min,vf_learned_kmh,stale,data_points\n";
    for (const auto& s : result.online.estimate.snapshots())
        out << s.index << ',' << csv::format(static_cast<double>(s.index) * config.online.step_min) << ','
            << csv::format(s.vf_kmh) << ',' << (s.vf_stale ? "true" : "false") << ',' << s.n_data << '\n';
}

DensityField estimate_field(const OnlineEstimate& estimate, const RoadDomain& domain, int nx, double output_dt_min) {
    if (estimate.empty()) throw NotYetAvailable("no snapshots to sample");
    if (nx < 1 || !(output_dt_min > 0.0)) throw ConfigError("invalid estimate grid");
    const auto k0 = static_cast<long>(std::ceil(estimate.available_from() / output_dt_min - 1e-9));
    const auto k1 = static_cast<long>(std::floor(domain.horizon_min / output_dt_min + 1e-9));
    if (k1 < k0) throw NotYetAvailable("horizon ends before the first estimate");
    const double dx = domain.length_km / nx;
    Eigen::ArrayXd xs(nx + 1);
    for (int j = 0; j <= nx; ++j) xs[j] = dx * j;
    RowMatrixXd values(k1 - k0 + 1, nx + 1);
    for (long k = k0; k <= k1; ++k)
        values.row(k - k0) = estimate.evaluate_row(static_cast<double>(k) * output_dt_min, xs).transpose();
    return DensityField(static_cast<double>(k0) * output_dt_min, output_dt_min, dx, std::move(values));
}

SweepResult run_sweep(const ScenarioConfig& config) {
    ScenarioConfig base = config;
    if (config.sweep.horizon_min > 0.0) {
        base.domain.horizon_min = config.sweep.horizon_min;
        base.domain.validate();
    }
    const TruthRun truth = simulate_truth(base);
    const double step = base.online.step_min;

    double max_step = step;
    for (int e : config.sweep.epochs)
        max_step = std::max(max_step, step * e / static_cast<double>(config.sweep.anchor_epochs));

    SweepResult result;
    result.cee_from_min = 2.0 * max_step;
    std::vector<CostRecord> records;

    auto run_one = [&](int epochs, double run_step, const std::string& mode) {
        OnlineConfig oc = base.online;
        oc.trainer.epochs = epochs;
        oc.step_min = run_step;
        if (!(oc.lookback_min > run_step))
            throw ConfigError("sweep: online step " + csv::format(run_step) + " min does not fit the look-back window");
        const OnlineRun run = run_online(truth.probes, base.domain, oc);
        double sum = 0.0, seconds = 0.0;
        std::size_t n = 0;
        for (const auto& s : cee_trace(truth.field, run.estimate)) {
            if (s.t_min < result.cee_from_min - 1e-9) continue;
            sum += s.cee;
            ++n;
        }
        for (const auto& snap : run.estimate.snapshots()) {
            seconds += snap.train_seconds;
            if (mode == "offline")
                records.push_back({static_cast<double>(oc.trainer.n_colloc), static_cast<double>(snap.n_data),
                                   static_cast<double>(epochs), snap.train_seconds});
        }
        const double windows = static_cast<double>(std::max<std::size_t>(1, run.estimate.snapshots().size()));
        return SweepRow{epochs, mode, run_step, n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(),
                        seconds / windows};
    };

    for (int e : config.sweep.epochs) {
        const SweepRow offline = run_one(e, step, "offline");
        const double online_step = step * e / static_cast<double>(config.sweep.anchor_epochs);
        SweepRow online = online_step == step ? SweepRow{e, "online", step, offline.mean_cee, offline.mean_train_seconds}
                                              : run_one(e, online_step, "online");
        result.rows.push_back(online);
        result.rows.push_back(offline);
    }
    try {
        result.cost = fit_cost_model(records);
    } catch (const DataError&) {
        result.cost = {};
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "epochs,mode,step_min,mean_cee,mean_train_seconds\n";
    for (const auto& r : rows)
        out << r.epochs << ',' << r.mode << ',' << csv::format(r.step_min) << ',' << csv::format(r.mean_cee) << ','
            << csv::format(r.mean_train_seconds) << '\n';
}

} // namespace tpinn
