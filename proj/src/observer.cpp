#include "trafficpinn/observer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tpinn {

void ObserverConfig::validate() const {
    if (!(assumed_vf_kmh > 0.0)) throw ConfigError("observer: assumed v_f must be positive");
    if (injection_radius < 0) throw ConfigError("observer: injection radius must be >= 0");
    if (!(initial_density >= 0.0 && initial_density <= 1.0)) throw ConfigError("observer: initial density outside [0, 1]");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("observer: cfl_safety must lie in (0, 1]");
}

void inject(ObserverState& state, const std::vector<PointMeasurement>& measurements) {
    const auto last = state.row.size() - 1;
    for (const auto& m : measurements) {
        if (!(m.rho >= 0.0 && m.rho <= 1.0)) throw DomainError("observer: measured density outside [0, 1]");
        const auto j = static_cast<Eigen::Index>(std::lround(m.x_km / state.dx));
        const Eigen::Index lo = std::max<Eigen::Index>(0, j - state.injection_radius);
        const Eigen::Index hi = std::min<Eigen::Index>(last, j + state.injection_radius);
        for (Eigen::Index k = lo; k <= hi; ++k) state.row[k] = m.rho;
    }
}

ObserverState observer_step(const ObserverState& state, const std::vector<PointMeasurement>& measurements, double dt,
                            double gamma) {
    const auto n = state.row.size();
    if (n < 3) throw ConfigError("observer: grid too small");
    ObserverState next = state;
    next.row = step(state.row, kmh_to_kmpm(state.assumed_vf_kmh), gamma, state.dx, dt, state.row[1], state.row[n - 2]);
    next.row[0] = next.row[1];
    next.row[n - 1] = next.row[n - 2];
    inject(next, measurements);
    return next;
}

DensityField run_observer(const ProbeDataset& probes, const RoadDomain& domain, int nx, double output_dt_min,
                          const ObserverConfig& config, const Eigen::VectorXd* initial_row) {
    domain.validate();
    config.validate();
    if (nx < 2) throw ConfigError("observer: nx must be >= 2");
    if (!(output_dt_min > 0.0)) throw ConfigError("observer: output cadence must be positive");
    const double rows_exact = domain.horizon_min / output_dt_min;
    const auto intervals = static_cast<long>(std::llround(rows_exact));
    if (std::abs(rows_exact - static_cast<double>(intervals)) > 1e-9 * std::max(1.0, rows_exact))
        throw ConfigError("observer: horizon must be a multiple of the output cadence");

    const double dx = domain.length_km / nx;
    const double dt_stable = stable_dt(dx, kmh_to_kmpm(config.assumed_vf_kmh), domain.viscosity, config.cfl_safety);
    const long substeps = static_cast<long>(std::ceil(output_dt_min / dt_stable - 1e-12));
    const double dt = output_dt_min / static_cast<double>(substeps);

    struct Tagged {
        double t;
        std::int64_t id;
        double x, rho;
    };
    std::vector<Tagged> samples;
    for (const auto& tr : probes.trajectories)
        for (const auto& s : tr.samples) samples.push_back({s.t_min, tr.probe_id, s.x_km, s.rho});
    std::stable_sort(samples.begin(), samples.end(), [](const Tagged& a, const Tagged& b) {
        return a.t < b.t || (a.t == b.t && a.id < b.id);
    });

    ObserverState state{Eigen::VectorXd::Constant(nx + 1, config.initial_density), dx, config.assumed_vf_kmh,
                        config.injection_radius};
    if (initial_row) {
        if (initial_row->size() != nx + 1) throw DataError("observer: initial row does not match the grid");
        if ((initial_row->array() < 0.0).any() || (initial_row->array() > 1.0).any())
            throw DomainError("observer: initial density outside [0, 1]");
        state.row = *initial_row;
    }
    RowMatrixXd out(intervals + 1, nx + 1);
    out.row(0) = state.row.transpose();

    std::size_t cursor = 0;
    std::vector<PointMeasurement> batch;
    for (long r = 1; r <= intervals; ++r) {
        for (long s = 1; s <= substeps; ++s) {
            const double t_next =
                static_cast<double>(r - 1) * output_dt_min + static_cast<double>(s) * dt;
            std::map<std::int64_t, PointMeasurement> latest;
            while (cursor < samples.size() && samples[cursor].t <= t_next + 1e-12) {
                latest[samples[cursor].id] = {samples[cursor].x, samples[cursor].rho};
                ++cursor;
            }
            batch.clear();
            for (const auto& [id, m] : latest) batch.push_back(m);
            state = observer_step(state, batch, dt, domain.viscosity);
        }
        out.row(r) = state.row.transpose();
    }
    return DensityField(0.0, output_dt_min, dx, std::move(out));
}

std::vector<FieldCee> field_cee_trace(const DensityField& truth, const DensityField& estimate, double from_min,
                                      double to_min) {
    std::vector<FieldCee> out;
    for (Eigen::Index k = 0; k < truth.nt(); ++k) {
        const double t = truth.time(k);
        if (t < from_min - 1e-9 || t > to_min + 1e-9) continue;
        out.push_back({t, cee(truth, [&](double tt, double x) { return sample_field(estimate, tt, x); }, t)});
    }
    return out;
}

} // namespace tpinn
