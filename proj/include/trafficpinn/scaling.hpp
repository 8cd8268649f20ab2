#pragma once

#include <Eigen/Dense>

#include "trafficpinn/mlp.hpp"

namespace tpinn {

// Affine input normalization for window i. Time maps [i*dt - dd, (i+2)*dt] onto
// [-1, 1]; space maps [0, length] onto [-1, 1].
struct InputScaler {
    long window_index = 0;
    double step_min = 0.3;      // retraining period
    double lookback_min = 3.0;  // data window length
    double road_length_km = 5.0;

    InputScaler() = default;
    InputScaler(long index, double step, double lookback, double length);

    double time_gain() const { return 2.0 / (2.0 * step_min + lookback_min); }
    double space_gain() const { return 2.0 / road_length_km; }
    double scale_time(double t) const {
        return time_gain() * (t - (static_cast<double>(window_index) + 1.0) * step_min + 0.5 * lookback_min);
    }
    double scale_space(double x) const { return space_gain() * x - 1.0; }

    InputScaler next() const { return {window_index + 1, step_min, lookback_min, road_length_km}; }
};

// Difference s_i(t) - s_{i+1}(t); independent of t.
inline double time_shift_constant(double step_min, double lookback_min) {
    return 2.0 * step_min / (2.0 * step_min + lookback_min);
}

// Warm-start transfer from window i to window i + 1: the returned network fed
// with s_{i+1}(t) reproduces the original fed with s_i(t).
MlpParams time_shift(const MlpParams& params, double step_min, double lookback_min);

// Value and physical-unit derivatives of the density network at one point.
struct Jet {
    double value = 0.0;
    double d_t = 0.0;  // per minute
    double d_x = 0.0;  // per km
    double d_xx = 0.0; // per km^2
};

Jet input_jet(const MlpParams& params, const InputScaler& scaler, double t, double x);

// Batched variant; the tape stays valid for a backward pass.
JetBatch<double> input_jets(const MlpParams& params, const InputScaler& scaler, const Eigen::ArrayXd& t,
                            const Eigen::ArrayXd& x, JetTape<double>& tape, JetChannels channels);

double evaluate_density(const MlpParams& params, const InputScaler& scaler, double t, double x);

} // namespace tpinn
