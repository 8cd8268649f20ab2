#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "trafficpinn/domain.hpp"

namespace tpinn {

// Piecewise-constant trace of (start_min, density) pairs.
class PiecewiseTrace {
public:
    struct Piece {
        double start;
        double value;
    };

    PiecewiseTrace() = default;
    explicit PiecewiseTrace(std::vector<Piece> pieces);
    static PiecewiseTrace constant(double value) { return PiecewiseTrace({{0.0, value}}); }

    double at(double t) const;
    const std::vector<Piece>& pieces() const { return pieces_; }

private:
    std::vector<Piece> pieces_;
};

struct BoundarySchedule {
    PiecewiseTrace left;
    PiecewiseTrace right;

    static BoundarySchedule constant(double left, double right);
    // Independent piecewise constants with `dwell_min` pieces, values uniform in [0, 1].
    static BoundarySchedule random(double horizon_min, double dwell_min, std::uint64_t seed);
};

struct SolverConfig {
    int nx = 200;                 // spatial intervals; the grid has nx + 1 nodes
    double cfl_safety = 0.9;
    double output_dt_min = 0.05;  // cadence of stored field rows
    double fixed_dt_min = 0.0;    // 0 selects the stable step automatically
    PiecewiseTrace initial = PiecewiseTrace::constant(0.0); // density over x (km)

    void validate() const;
};

// Greenshield flux v_f rho (1 - rho).
inline double greenshield_flux(double rho, double vf) { return vf * rho * (1.0 - rho); }

// safety * min(dx / vf, dx^2 / (2 gamma)); either limit may be approached with the
// other argument going to zero.
double stable_dt(double dx, double vf, double gamma, double cfl_safety = 0.9);

struct StepStats {
    double max_clamp = 0.0;  // largest excursion outside [0, 1] removed by clamping
    double net_inflow = 0.0; // dt * (F_left - F_right) through the two boundary interfaces
};

// One explicit step of the viscous Greenshield LWR equation on a node grid.
// Advection uses the local Lax-Friedrichs flux, diffusion a central second
// difference; the two are applied in sequence (Lie splitting) so each substep is
// monotone under its own limit. End nodes are Dirichlet from bc_left/bc_right.
Eigen::VectorXd step(const Eigen::VectorXd& row, double vf, double gamma, double dx, double dt, double bc_left,
                     double bc_right, StepStats* stats = nullptr);

struct SimulationReport {
    double dt_min = 0.0;
    long steps = 0;
    double max_clamp = 0.0;
};

DensityField simulate(const RoadDomain& domain, const SolverConfig& config, const BoundarySchedule& bc,
                      const FreeFlowSchedule& vf, SimulationReport* report = nullptr);

// Field CSV: header `t_min,x_km,rho`, row-major by time.
void write_field_csv(std::ostream& out, const DensityField& field);
DensityField read_field_csv(const std::string& path);

} // namespace tpinn
