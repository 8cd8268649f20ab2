#include "trafficpinn/scaling.hpp"

namespace tpinn {

InputScaler::InputScaler(long index, double step, double lookback, double length)
    : window_index(index), step_min(step), lookback_min(lookback), road_length_km(length) {
    if (!(step > 0.0) || !(lookback > step)) throw ConfigError("scaler requires lookback > step > 0");
    if (!(length > 0.0)) throw ConfigError("scaler requires a positive road length");
}

MlpParams time_shift(const MlpParams& params, double step_min, double lookback_min) {
    return shift_time_input(params, time_shift_constant(step_min, lookback_min));
}

JetBatch<double> input_jets(const MlpParams& params, const InputScaler& scaler, const Eigen::ArrayXd& t,
                            const Eigen::ArrayXd& x, JetTape<double>& tape, JetChannels channels) {
    Eigen::MatrixXd inputs(2, t.size());
    inputs.row(0) = (scaler.time_gain() * (t - (static_cast<double>(scaler.window_index) + 1.0) * scaler.step_min +
                                           0.5 * scaler.lookback_min))
                        .matrix()
                        .transpose();
    inputs.row(1) = (scaler.space_gain() * x - 1.0).matrix().transpose();
    const Eigen::Vector2d seed_t(scaler.time_gain(), 0.0);
    const Eigen::Vector2d seed_x(0.0, scaler.space_gain());
    return tape.forward(params, inputs, seed_t, seed_x, channels);
}

Jet input_jet(const MlpParams& params, const InputScaler& scaler, double t, double x) {
    JetTape<double> tape;
    const auto out = input_jets(params, scaler, Eigen::ArrayXd::Constant(1, t), Eigen::ArrayXd::Constant(1, x), tape,
                                {true, true, true});
    return {out.value[0], out.d_t[0], out.d_x[0], out.d_xx[0]};
}

double evaluate_density(const MlpParams& params, const InputScaler& scaler, double t, double x) {
    return forward_scalar(params, scaler.scale_time(t), scaler.scale_space(x));
}

} // namespace tpinn
