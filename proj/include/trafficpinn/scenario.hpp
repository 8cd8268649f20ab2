#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trafficpinn/domain.hpp"
#include "trafficpinn/lwr.hpp"
#include "trafficpinn/observer.hpp"
#include "trafficpinn/online.hpp"
#include "trafficpinn/probes.hpp"

namespace tpinn {

// `[section]` headers and `key = value` lines; `#` starts a comment. Every lookup
// is recorded so that leftover (unknown) keys can be reported with their line.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& source_name);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // Comma-separated reals.
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    // Comma-separated `start:value` pairs.
    std::vector<std::pair<double, double>> get_pairs(const std::string& section, const std::string& key) const;

    // Throws ConfigError for the first key never looked up.
    void reject_unknown() const;
    const std::string& source() const { return source_; }
    const std::string& text() const { return text_; }

private:
    struct Entry {
        std::string value;
        std::size_t line;
    };
    const Entry* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void fail(const Entry& e, const std::string& what) const;

    std::string source_;
    std::string text_;
    std::map<std::string, Entry> entries_; // "section.key"
    mutable std::map<std::string, bool> used_;
};

enum class ScenarioMode { greenshield, external_data };

struct SweepConfig {
    std::vector<int> epochs{100, 200, 300, 400};
    int anchor_epochs = 100;  // online step equals the configured step at this budget
    double horizon_min = 0.0; // 0 uses the scenario horizon
};

struct ScenarioConfig {
    ScenarioMode mode = ScenarioMode::greenshield;
    std::uint64_t seed = 1;
    RoadDomain domain;
    SolverConfig solver;
    bool random_boundary = true;
    double boundary_dwell_min = 2.0;
    BoundarySchedule boundary = BoundarySchedule::constant(0.0, 0.0);
    FreeFlowSchedule free_flow = FreeFlowSchedule({{0.0, 37.5}, {10.0, 18.75}, {18.0, 30.0}});
    FleetConfig fleet;
    OnlineConfig online;
    ObserverConfig observer;
    SweepConfig sweep;
    double realtime_seconds_per_min = 60.0;
    std::string probe_csv;  // external-data input
    std::string truth_csv;  // optional truth for external-data runs
    std::string config_text; // raw file contents (hashed into the manifest)

    static ScenarioConfig from_file(const ConfigFile& file);
    static ScenarioConfig load(const std::string& path);

    // Re-derives every child seed from `seed`.
    void apply_seed(std::uint64_t seed);
    BoundarySchedule resolved_boundary() const;
    void validate() const;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string code_version();
void write_manifest(const std::string& path, const ScenarioConfig& config, const std::string& command,
                    ScheduleMode mode);

struct TruthRun {
    DensityField field;
    ProbeDataset probes;
    SimulationReport report;
};

TruthRun simulate_truth(const ScenarioConfig& config);

struct MetricsRow {
    double t_min;
    double cee_pinn;
    std::optional<double> cee_observer;
    double vf_true_kmh;
    double vf_learned_kmh;
    long window_index;
    double train_seconds;
};

// Replay-mode rows leave train_seconds empty so the file is reproducible.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, bool include_timing);

struct IntervalMean {
    double from;
    double to;
    double pinn;
    double observer;
    std::size_t samples;
};

struct CompareResult {
    TruthRun truth;
    OnlineRun online;
    DensityField observer;
    std::vector<MetricsRow> rows;
};

CompareResult run_compare(const ScenarioConfig& config, const ScheduleOptions& schedule);

// Mean CEE of both estimators over rows with t in [from, to] (to_open excludes the end).
IntervalMean interval_mean(const std::vector<MetricsRow>& rows, double from, double to, bool to_open);
void write_compare_summary(std::ostream& out, const CompareResult& result, const ScenarioConfig& config);

// Metrics rows for an online run against a truth field (no observer column).
std::vector<MetricsRow> online_metrics(const DensityField& truth, const OnlineRun& run, const FreeFlowSchedule& vf);

// Stitched online estimate sampled on an nx-interval grid from 2 * step to the horizon.
DensityField estimate_field(const OnlineEstimate& estimate, const RoadDomain& domain, int nx, double output_dt_min);

struct SweepRow {
    int epochs;
    std::string mode; // "online" or "offline"
    double step_min;
    double mean_cee;
    double mean_train_seconds;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double cee_from_min; // common start of the CEE average
    TrainingCostModel cost; // fitted on the offline runs
};

// Offline rows keep the configured step; online rows scale it with the training
// cost, step * epochs / anchor_epochs, since cost is linear in the epoch count.
SweepResult run_sweep(const ScenarioConfig& config);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

} // namespace tpinn
