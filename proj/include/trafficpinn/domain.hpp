#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "trafficpinn/errors.hpp"

namespace tpinn {

// Internal units: minutes, kilometres, km/min. km/h only at I/O boundaries.
// Densities are normalized so that the jam density is 1.
constexpr double kmh_to_kmpm(double v) { return v / 60.0; }
constexpr double kmpm_to_kmh(double v) { return v * 60.0; }

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RoadDomain {
    double length_km = 5.0;
    double horizon_min = 30.0;
    double viscosity = 0.005; // km^2/min

    RoadDomain() = default;
    RoadDomain(double length, double horizon, double gamma);

    void validate() const;
};

// Piecewise-constant free-flow velocity v_f(t), stored in km/h as configured.
class FreeFlowSchedule {
public:
    struct Segment {
        double start_min;
        double vf_kmh;
    };

    FreeFlowSchedule() = default;
    explicit FreeFlowSchedule(std::vector<Segment> segments);
    static FreeFlowSchedule constant(double vf_kmh) { return FreeFlowSchedule({{0.0, vf_kmh}}); }

    double vf_kmh(double t_min) const;
    double vf_kmpm(double t_min) const { return kmh_to_kmpm(vf_kmh(t_min)); }
    double max_vf_kmh() const;
    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::vector<Segment> segments_;
};

// Uniform grid over [0, horizon] x [0, length]: nt time rows, nx+1 spatial nodes
// (nx intervals). Node 0 sits at x = 0 and the last node at x = length.
class DensityField {
public:
    DensityField() = default;
    DensityField(double t0, double dt, double dx, RowMatrixXd values);

    Eigen::Index nt() const { return values_.rows(); }
    Eigen::Index n_nodes() const { return values_.cols(); }
    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double t0() const { return t0_; }
    double t_end() const { return t0_ + dt_ * static_cast<double>(nt() - 1); }
    double length() const { return dx_ * static_cast<double>(n_nodes() - 1); }
    double time(Eigen::Index k) const { return t0_ + dt_ * static_cast<double>(k); }
    double position(Eigen::Index j) const { return dx_ * static_cast<double>(j); }

    const RowMatrixXd& values() const { return values_; }
    auto row(Eigen::Index k) const { return values_.row(k); }

    // Index of the time row at t, or -1 when t is not on the grid (within 1e-9 min).
    Eigen::Index row_at(double t) const;

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    double dx_ = 1.0;
    RowMatrixXd values_;
};

struct EvalGrid {
    std::vector<double> times;
    std::vector<double> positions;

    void validate(const RoadDomain& domain) const;
};

double greenshield_velocity(double rho, double vf);

// Bilinear interpolation; exact on nodes. Throws DomainError out of bounds.
double sample_field(const DensityField& field, double t, double x);

using DensityFunction = std::function<double(double t, double x)>;

// Trapezoidal quadrature of a squared misfit sampled on a uniform grid.
double trapezoid_sq_misfit(std::span<const double> truth, std::span<const double> estimate, double dx);

// Current Estimation Error at time t on the truth's spatial grid.
double cee(const DensityField& truth, const DensityFunction& estimate, double t);

} // namespace tpinn
