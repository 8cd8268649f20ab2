#pragma once

#include <Eigen/Dense>

#include <vector>

#include "trafficpinn/domain.hpp"
#include "trafficpinn/lwr.hpp"
#include "trafficpinn/probes.hpp"

namespace tpinn {

// Open-loop propagate-and-inject observer: the nominal viscous Greenshield model
// with a fixed assumed v_f, overwritten near probes by their measured densities.
struct ObserverConfig {
    double assumed_vf_kmh = 37.5;
    int injection_radius = 1;       // cells on each side of the nearest node
    double initial_density = 0.0;   // uniform starting state
    bool initial_from_truth = false; // start from the true initial profile instead
    double cfl_safety = 0.9;

    void validate() const;
};

struct ObserverState {
    Eigen::VectorXd row; // densities on the node grid
    double dx = 0.0;
    double assumed_vf_kmh = 37.5;
    int injection_radius = 1;
};

struct PointMeasurement {
    double x_km;
    double rho;
};

// Overwrites nodes within the injection radius of each measurement (in order).
void inject(ObserverState& state, const std::vector<PointMeasurement>& measurements);

// One solver step with the assumed v_f and zero-gradient ends, then injection.
ObserverState observer_step(const ObserverState& state, const std::vector<PointMeasurement>& measurements, double dt,
                            double gamma);

// Runs the observer over the horizon on an nx-interval grid, storing rows at the
// given output cadence. Each step injects, per probe, the latest sample taken
// since the previous step. `initial_row` (nx + 1 nodes) overrides the uniform
// starting state when given.
DensityField run_observer(const ProbeDataset& probes, const RoadDomain& domain, int nx, double output_dt_min,
                          const ObserverConfig& config, const Eigen::VectorXd* initial_row = nullptr);

struct FieldCee {
    double t_min;
    double cee;
};

// CEE of an estimate field against the truth at every truth output time in [from, to].
std::vector<FieldCee> field_cee_trace(const DensityField& truth, const DensityField& estimate, double from_min,
                                      double to_min);

} // namespace tpinn
