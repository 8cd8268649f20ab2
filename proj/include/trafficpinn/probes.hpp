#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trafficpinn/domain.hpp"

namespace tpinn {

struct ProbeSample {
    double t_min;
    double x_km;
    double v_kmh;
    double rho;

    bool operator==(const ProbeSample&) const = default;
};

struct ProbeTrajectory {
    std::int64_t probe_id = 0;
    std::vector<ProbeSample> samples;

    // Throws DataError naming the violated invariant.
    void validate() const;
    bool operator==(const ProbeTrajectory&) const = default;
};

// Union of per-probe measurement sets, ordered by probe id.
struct ProbeDataset {
    std::vector<ProbeTrajectory> trajectories;

    std::size_t sample_count() const;
    bool empty() const { return sample_count() == 0; }
    // Largest sample time, or nullopt when empty.
    std::optional<double> latest_time() const;
    bool operator==(const ProbeDataset&) const = default;
};

struct FleetConfig {
    std::vector<double> spawn_times;  // explicit entry times at x = 0; used when non-empty
    double mean_spawn_gap_min = 0.5;  // exponential inter-arrival otherwise; <= 0 disables spawning
    double sample_rate_hz = 3.0;
    double rho_noise_std = 0.02;
    double v_noise_std_kmh = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
    // Explicit times, or seeded exponential arrivals on [0, horizon).
    std::vector<double> resolve_spawn_times(double horizon_min) const;
};

// Explicit Euler step of dx/dt = v_f (1 - rho(t, x)), clamped to [0, length].
double advance_probe(double x, const DensityField& field, double vf_kmpm, double t, double dt);

// Samples are taken on the global clock t_k = k / (60 f_s) for t_k in [spawn, t_end).
ProbeDataset run_fleet(const DensityField& field, const FreeFlowSchedule& vf, const FleetConfig& config);

// Keeps samples with t in [t1, t2] (both inclusive); drops emptied trajectories.
ProbeDataset window(const ProbeDataset& dataset, double t1, double t2);

// Measurement CSV: `t_min,probe_id,x_km,v_kmh,rho`, rows ordered by time then probe id.
void write_probe_csv(std::ostream& out, const ProbeDataset& dataset);
ProbeDataset read_probe_csv(std::istream& in, const std::string& source_name);
ProbeDataset read_probe_csv(const std::string& path);

} // namespace tpinn
