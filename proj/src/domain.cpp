#include "trafficpinn/domain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tpinn {

namespace {
constexpr double kGridTol = 1e-9;
}

RoadDomain::RoadDomain(double length, double horizon, double gamma)
    : length_km(length), horizon_min(horizon), viscosity(gamma) {
    validate();
}

void RoadDomain::validate() const {
    if (!(length_km > 0.0)) throw ConfigError("road length must be positive");
    if (!(horizon_min > 0.0)) throw ConfigError("horizon must be positive");
    if (!(viscosity > 0.0) || viscosity > 0.1)
        throw ConfigError("viscosity must lie in (0, 0.1], got " + std::to_string(viscosity));
}

FreeFlowSchedule::FreeFlowSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ConfigError("free-flow schedule needs at least one segment");
    if (segments_.front().start_min != 0.0) throw ConfigError("free-flow schedule must start at t = 0");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (!(segments_[i].vf_kmh > 0.0)) throw ConfigError("free-flow velocity must be positive");
        if (i > 0 && !(segments_[i].start_min > segments_[i - 1].start_min))
            throw ConfigError("free-flow segment start times must be strictly increasing");
    }
}

double FreeFlowSchedule::vf_kmh(double t_min) const {
    if (segments_.empty()) throw ConfigError("empty free-flow schedule");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t_min,
                               [](double t, const Segment& s) { return t < s.start_min; });
    if (it == segments_.begin()) return segments_.front().vf_kmh;
    return std::prev(it)->vf_kmh;
}

double FreeFlowSchedule::max_vf_kmh() const {
    double m = 0.0;
    for (const auto& s : segments_) m = std::max(m, s.vf_kmh);
    return m;
}

DensityField::DensityField(double t0, double dt, double dx, RowMatrixXd values)
    : t0_(t0), dt_(dt), dx_(dx), values_(std::move(values)) {
    if (!(dt_ > 0.0) || !(dx_ > 0.0)) throw DomainError("density field spacings must be positive");
    if (values_.rows() < 1 || values_.cols() < 2) throw DomainError("density field needs >= 1 row and >= 2 nodes");
    if (!values_.allFinite() || values_.minCoeff() < 0.0 || values_.maxCoeff() > 1.0)
        throw DomainError("density field values must lie in [0, 1]");
}

Eigen::Index DensityField::row_at(double t) const {
    const double k = (t - t0_) / dt_;
    const double r = std::round(k);
    if (std::abs(k - r) * dt_ > kGridTol || r < 0 || r > static_cast<double>(nt() - 1)) return -1;
    return static_cast<Eigen::Index>(r);
}

void EvalGrid::validate(const RoadDomain& domain) const {
    for (double x : positions)
        if (x < 0.0 || x > domain.length_km) throw DomainError("evaluation position outside road");
    for (double t : times)
        if (t < 0.0 || t > domain.horizon_min) throw DomainError("evaluation time outside horizon");
}

double greenshield_velocity(double rho, double vf) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("density outside [0, 1]: " + std::to_string(rho));
    return vf * (1.0 - rho);
}

double sample_field(const DensityField& field, double t, double x) {
    const double tk = (t - field.t0()) / field.dt();
    const double xj = x / field.dx();
    const double tmax = static_cast<double>(field.nt() - 1);
    const double xmax = static_cast<double>(field.n_nodes() - 1);
    if (!(tk >= -kGridTol && tk <= tmax + kGridTol && xj >= -kGridTol && xj <= xmax + kGridTol))
        throw DomainError("field query out of bounds at t=" + std::to_string(t) + ", x=" + std::to_string(x));

    const double tc = std::clamp(tk, 0.0, tmax);
    const double xc = std::clamp(xj, 0.0, xmax);
    auto k0 = static_cast<Eigen::Index>(std::floor(tc));
    auto j0 = static_cast<Eigen::Index>(std::floor(xc));
    k0 = std::min(k0, field.nt() - 1);
    j0 = std::min(j0, field.n_nodes() - 1);
    const Eigen::Index k1 = std::min(k0 + 1, field.nt() - 1);
    const Eigen::Index j1 = std::min(j0 + 1, field.n_nodes() - 1);
    const double a = tc - static_cast<double>(k0);
    const double b = xc - static_cast<double>(j0);

    const auto& v = field.values();
    return (1 - a) * ((1 - b) * v(k0, j0) + b * v(k0, j1)) + a * ((1 - b) * v(k1, j0) + b * v(k1, j1));
}

double trapezoid_sq_misfit(std::span<const double> truth, std::span<const double> estimate, double dx) {
    if (truth.size() != estimate.size() || truth.size() < 2) throw DomainError("misfit quadrature size mismatch");
    double acc = 0.0;
    const std::size_t n = truth.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double e = truth[j] - estimate[j];
        acc += (j == 0 || j + 1 == n ? 0.5 : 1.0) * e * e;
    }
    return acc * dx;
}

double cee(const DensityField& truth, const DensityFunction& estimate, double t) {
    const Eigen::Index k = truth.row_at(t);
    if (k < 0) throw DomainError("CEE time " + std::to_string(t) + " is not on the truth grid");
    const Eigen::Index n = truth.n_nodes();
    std::vector<double> est(static_cast<std::size_t>(n));
    std::vector<double> ref(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        ref[static_cast<std::size_t>(j)] = truth.values()(k, j);
        est[static_cast<std::size_t>(j)] = estimate(truth.time(k), truth.position(j));
    }
    return trapezoid_sq_misfit(ref, est, truth.dx());
}

} // namespace tpinn
