#include "trafficpinn/online.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "trafficpinn/seeding.hpp"

namespace tpinn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TrainableState fresh_state(const OnlineConfig& config, long index) {
    TrainableState s;
    s.density = xavier_init(config.density_shape, Head::sigmoid, mix_seed(config.trainer.seed, 2 * index));
    const double vf = kmh_to_kmpm(config.initial_vf_kmh);
    s.velocity = config.velocity_mode == VelocityMode::greenshield_learnable
                     ? VelocityModel::greenshield(vf)
                     : VelocityModel::learned(vf, config.closure_shape, mix_seed(config.trainer.seed, 2 * index + 1));
    return s;
}

} // namespace

void OnlineConfig::validate() const {
    if (!(step_min > 0.0) || !(lookback_min > step_min)) throw ConfigError("online schedule requires lookback > step > 0");
    if (!(velocity_window_min > 0.0) || velocity_window_min > lookback_min)
        throw ConfigError("velocity window must lie in (0, lookback]");
    if (!(initial_vf_kmh > 0.0)) throw ConfigError("initial free-flow velocity must be positive");
    if (density_shape.input_dim != 2 || density_shape.output_dim != 1)
        throw ConfigError("density network must map (t, x) to a scalar");
    trainer.validate();
}

OnlineEstimate::OnlineEstimate(std::vector<EstimateSnapshot> snapshots, double step_min, double horizon_min)
    : snapshots_(std::move(snapshots)), step_(step_min), horizon_(horizon_min) {}

const EstimateSnapshot& OnlineEstimate::select(double t) const {
    if (t < available_from() - 1e-9) throw NotYetAvailable("no estimate is available before t = 2 * step");
    if (t > horizon_ + 1e-9) throw DomainError("evaluation time past the horizon");
    if (snapshots_.empty()) throw NotYetAvailable("no snapshots have been produced");
    if (t >= horizon_ - 1e-9) return snapshots_.back();
    const long i = static_cast<long>(std::floor(t / step_ + 1e-9)) - 1;
    auto it = std::upper_bound(snapshots_.begin(), snapshots_.end(), i,
                               [](long v, const EstimateSnapshot& s) { return v < s.index; });
    if (it == snapshots_.begin()) throw NotYetAvailable("no snapshot covers this time");
    return *std::prev(it);
}

double OnlineEstimate::evaluate(double t, double x) const {
    const auto& s = select(t);
    return evaluate_density(s.state.density, s.scaler, t, x);
}

Eigen::ArrayXd OnlineEstimate::evaluate_row(double t, const Eigen::ArrayXd& x) const {
    const auto& s = select(t);
    Eigen::MatrixXd in(2, x.size());
    in.row(0).setConstant(s.scaler.scale_time(t));
    for (Eigen::Index j = 0; j < x.size(); ++j) in(1, j) = s.scaler.scale_space(x[j]);
    return forward(s.state.density, in).row(0).transpose().array();
}

long window_count(double horizon_min, double step_min) {
    if (!(step_min > 0.0)) throw ConfigError("step must be positive");
    const auto slots = static_cast<long>(std::ceil(horizon_min / step_min - 1e-9));
    return std::max(0L, slots - 2);
}

OnlineRun run_online(const ProbeDataset& stream, const RoadDomain& domain, const OnlineConfig& config,
                     const ScheduleOptions& schedule, const std::function<void(const EstimateSnapshot&)>& on_snapshot) {
    config.validate();
    domain.validate();
    if (schedule.mode == ScheduleMode::realtime && !(schedule.seconds_per_min > 0.0))
        throw ConfigError("realtime mode needs a positive wall-clock scale");

    const double step = config.step_min;
    const double horizon = domain.horizon_min;
    const long n = window_count(horizon, step);
    const auto start = Clock::now();

    OnlineRun run;
    std::vector<EstimateSnapshot> snaps;
    std::optional<double> previous_vf;
    long i = 1;
    while (i <= n) {
        if (schedule.mode == ScheduleMode::realtime)
            std::this_thread::sleep_until(
                start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                            static_cast<double>(i) * step * schedule.seconds_per_min)));

        const double T = static_cast<double>(i) * step;
        const double t1 = std::max(0.0, T - config.lookback_min);
        const MeasurementBatch batch =
            make_batch(window(stream, t1, T), std::max(t1, T - config.velocity_window_min), T);
        const InputScaler scaler(i, step, config.lookback_min, domain.length_km);

        TrainableState init;
        LagrangeWeights weights;
        if (config.warm_start && !snaps.empty()) {
            const auto& prev = snaps.back();
            init = prev.state;
            for (long k = prev.index; k < i; ++k) init.density = time_shift(init.density, step, config.lookback_min);
            weights = prev.weights;
        } else {
            init = fresh_state(config, i);
        }

        TrainerConfig trainer = config.trainer;
        trainer.seed = mix_seed(config.trainer.seed, static_cast<std::uint64_t>(i) + 0x100000000ULL);
        trainer.velocity_window_min = config.velocity_window_min;

        const auto t0 = Clock::now();
        TrainResult result =
            train_window(init, weights, scaler, batch, {t1, T, 2.0 * step}, trainer, domain.viscosity, domain.length_km);
        const double seconds = seconds_since(t0);

        EstimateSnapshot snap;
        snap.index = i;
        snap.state = std::move(result.state);
        snap.weights = result.weights;
        snap.scaler = scaler;
        snap.valid_from = static_cast<double>(i + 1) * step;
        snap.valid_to = std::min(static_cast<double>(i + 2) * step, horizon);
        snap.train_seconds = seconds;
        snap.latest_measurement = batch.latest_time();
        snap.n_data = static_cast<std::size_t>(batch.size());
        snap.data_starved = result.data_starved;
        const VfEstimate vf = identify_vf(snap.state.velocity, batch, previous_vf);
        snap.vf_kmh = vf.vf_kmh;
        snap.vf_stale = vf.stale;
        previous_vf = vf.vf_kmh;
        snap.epoch0_loss = result.trace.front().data_loss + result.trace.front().physics_loss;

        long next = i + 1;
        if (schedule.mode == ScheduleMode::realtime) {
            const double budget = step * schedule.seconds_per_min;
            if (seconds > budget) {
                const double now_min = seconds_since(start) / schedule.seconds_per_min;
                next = std::max(i + 1, static_cast<long>(std::ceil(now_min / step - 1e-9)));
                run.overruns.push_back({i, seconds, budget, next - (i + 1)});
                snap.valid_to = std::min(static_cast<double>(next + 1) * step, horizon);
            }
        }
        if (on_snapshot) on_snapshot(snap);
        snaps.push_back(std::move(snap));
        i = next;
    }
    run.estimate = OnlineEstimate(std::move(snaps), step, horizon);
    return run;
}

std::vector<CeeSample> cee_trace(const DensityField& truth, const OnlineEstimate& estimate) {
    std::vector<CeeSample> out;
    if (estimate.empty()) return out;
    Eigen::ArrayXd xs(truth.n_nodes());
    for (Eigen::Index j = 0; j < xs.size(); ++j) xs[j] = truth.position(j);
    for (Eigen::Index k = 0; k < truth.nt(); ++k) {
        const double t = truth.time(k);
        if (t < estimate.available_from() - 1e-9) continue;
        const auto& snap = estimate.select(t);
        const Eigen::ArrayXd est = estimate.evaluate_row(t, xs);
        const Eigen::ArrayXd tru = truth.row(k).transpose().array();
        out.push_back({t,
                       trapezoid_sq_misfit(std::span<const double>(tru.data(), tru.size()),
                                           std::span<const double>(est.data(), est.size()), truth.dx()),
                       snap.index});
    }
    return out;
}

TrainingCostModel fit_cost_model(const std::vector<CostRecord>& records) {
    const auto n = static_cast<Eigen::Index>(records.size());
    if (n < 2) throw DataError("cost model needs at least two records");
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = records[static_cast<std::size_t>(r)];
        A(r, 0) = rec.epochs * rec.n_colloc;
        A(r, 1) = rec.epochs * rec.n_data;
        y[r] = rec.seconds;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < 2) throw DataError("cost model design is rank-deficient");
    Eigen::Vector2d c = qr.solve(y);

    auto fit_single = [&](Eigen::Index col) {
        const double denom = A.col(col).squaredNorm();
        return denom > 0.0 ? std::max(0.0, A.col(col).dot(y) / denom) : 0.0;
    };
    if (c[0] < 0.0) c = {0.0, fit_single(1)};
    else if (c[1] < 0.0) c = {fit_single(0), 0.0};
    return {c[0], c[1]};
}

} // namespace tpinn
