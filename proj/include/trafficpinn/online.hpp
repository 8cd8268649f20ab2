#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "trafficpinn/domain.hpp"
#include "trafficpinn/pinn.hpp"
#include "trafficpinn/probes.hpp"

namespace tpinn {

struct OnlineConfig {
    double step_min = 0.3;            // retraining period
    double lookback_min = 3.0;        // data window
    double velocity_window_min = 3.0; // speed-fit window, <= lookback
    TrainerConfig trainer;
    bool warm_start = true;
    VelocityMode velocity_mode = VelocityMode::greenshield_learnable;
    MlpShape density_shape{2, 32, 2, 1};
    MlpShape closure_shape{1, 16, 1, 1};
    double initial_vf_kmh = 37.5; // starting point of the learnt free-flow velocity

    void validate() const;
};

struct EstimateSnapshot {
    long index = 0;
    TrainableState state;
    LagrangeWeights weights;
    InputScaler scaler;
    double valid_from = 0.0; // (i + 1) * step
    double valid_to = 0.0;   // (i + 2) * step, later if following windows were skipped
    double train_seconds = 0.0;
    double latest_measurement = 0.0; // max time in the training batch; -inf when empty
    std::size_t n_data = 0;
    bool data_starved = false;
    double vf_kmh = 0.0;
    bool vf_stale = false;
    double epoch0_loss = 0.0;
};

// Stitched estimate: piecewise in time over the snapshots' half-open intervals.
class OnlineEstimate {
public:
    OnlineEstimate() = default;
    OnlineEstimate(std::vector<EstimateSnapshot> snapshots, double step_min, double horizon_min);

    const std::vector<EstimateSnapshot>& snapshots() const { return snapshots_; }
    bool empty() const { return snapshots_.empty(); }
    double available_from() const { return 2.0 * step_; }

    // Snapshot serving time t (selector i = floor(t / step) - 1, falling back to the
    // latest earlier snapshot when windows were skipped). The horizon itself is
    // served by the last snapshot. Throws NotYetAvailable before 2 * step and
    // DomainError past the horizon.
    const EstimateSnapshot& select(double t) const;
    double evaluate(double t, double x) const;
    Eigen::ArrayXd evaluate_row(double t, const Eigen::ArrayXd& x) const;

private:
    std::vector<EstimateSnapshot> snapshots_;
    double step_ = 0.3;
    double horizon_ = 0.0;
};

enum class ScheduleMode { replay, realtime };

struct ScheduleOptions {
    ScheduleMode mode = ScheduleMode::replay;
    double seconds_per_min = 60.0; // wall-clock seconds per simulated minute in realtime mode
};

struct OverrunEvent {
    long window;
    double train_seconds;
    double budget_seconds;
    long windows_skipped;
};

struct OnlineRun {
    OnlineEstimate estimate;
    std::vector<OverrunEvent> overruns;
};

// Number of training windows i = 1, 2, ... whose validity slots fall inside [0, horizon).
long window_count(double horizon_min, double step_min);

// Runs the iterative schedule over `stream`. Window i trains on measurements with
// t in [max(0, i*step - lookback), i*step] and collocation points on
// [max(0, i*step - lookback), (i + 2) * step].
OnlineRun run_online(const ProbeDataset& stream, const RoadDomain& domain, const OnlineConfig& config,
                     const ScheduleOptions& schedule = {},
                     const std::function<void(const EstimateSnapshot&)>& on_snapshot = {});

struct CeeSample {
    double t_min;
    double cee;
    long window_index;
};

// CEE of the stitched estimate at every truth output time from 2 * step on.
std::vector<CeeSample> cee_trace(const DensityField& truth, const OnlineEstimate& estimate);

struct CostRecord {
    double n_colloc;
    double n_data;
    double epochs;
    double seconds;
};

// seconds ~ epochs * (alpha * n_colloc + beta * n_data)
struct TrainingCostModel {
    double alpha = 0.0;
    double beta = 0.0;

    double predict(double n_colloc, double n_data, double epochs) const {
        return epochs * (alpha * n_colloc + beta * n_data);
    }
};

TrainingCostModel fit_cost_model(const std::vector<CostRecord>& records);

} // namespace tpinn
