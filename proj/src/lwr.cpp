#include "trafficpinn/lwr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "trafficpinn/csv.hpp"

namespace tpinn {

PiecewiseTrace::PiecewiseTrace(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw ConfigError("piecewise trace needs at least one piece");
    if (pieces_.front().start != 0.0) throw ConfigError("piecewise trace must start at 0");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (!(pieces_[i].value >= 0.0 && pieces_[i].value <= 1.0))
            throw ConfigError("piecewise density values must lie in [0, 1]");
        if (i > 0 && !(pieces_[i].start > pieces_[i - 1].start))
            throw ConfigError("piecewise trace starts must be strictly increasing");
    }
}

double PiecewiseTrace::at(double t) const {
    if (pieces_.empty()) throw ConfigError("empty piecewise trace");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t, [](double v, const Piece& p) { return v < p.start; });
    if (it == pieces_.begin()) return pieces_.front().value;
    return std::prev(it)->value;
}

BoundarySchedule BoundarySchedule::constant(double left, double right) {
    return {PiecewiseTrace::constant(left), PiecewiseTrace::constant(right)};
}

BoundarySchedule BoundarySchedule::random(double horizon_min, double dwell_min, std::uint64_t seed) {
    if (!(dwell_min > 0.0)) throw ConfigError("boundary dwell time must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&] {
        std::vector<PiecewiseTrace::Piece> pieces;
        for (long k = 0; static_cast<double>(k) * dwell_min < horizon_min || k == 0; ++k)
            pieces.push_back({static_cast<double>(k) * dwell_min, unit(rng)});
        return PiecewiseTrace(std::move(pieces));
    };
    BoundarySchedule bc;
    bc.left = draw();
    bc.right = draw();
    return bc;
}

void SolverConfig::validate() const {
    if (nx < 16) throw ConfigError("solver nx must be >= 16");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("cfl_safety must lie in (0, 1]");
    if (!(output_dt_min > 0.0)) throw ConfigError("output cadence must be positive");
    if (fixed_dt_min < 0.0) throw ConfigError("fixed_dt must be >= 0");
    if (initial.pieces().empty()) throw ConfigError("initial condition missing");
}

double stable_dt(double dx, double vf, double gamma, double cfl_safety) {
    if (!(dx > 0.0)) throw DomainError("stable_dt: dx must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    const double advective = vf > 0.0 ? dx / vf : inf;
    const double diffusive = gamma > 0.0 ? dx * dx / (2.0 * gamma) : inf;
    const double dt = cfl_safety * std::min(advective, diffusive);
    if (!std::isfinite(dt)) throw DomainError("stable_dt: vf and gamma cannot both vanish");
    return dt;
}

Eigen::VectorXd step(const Eigen::VectorXd& row, double vf, double gamma, double dx, double dt, double bc_left,
                     double bc_right, StepStats* stats) {
    const Eigen::Index n = row.size();
    if (n < 3) throw ConfigError("step: need at least 3 nodes");
    constexpr double slack = 1e-12;
    if (vf * dt / dx > 1.0 + slack || 2.0 * gamma * dt / (dx * dx) > 1.0 + slack)
        throw ConfigError("step: CFL condition violated (dt=" + std::to_string(dt) + ")");
    if (!(bc_left >= 0.0 && bc_left <= 1.0 && bc_right >= 0.0 && bc_right <= 1.0))
        throw DomainError("step: boundary densities must lie in [0, 1]");

    const double r = dt / dx;
    Eigen::VectorXd u = row;
    u[0] = bc_left;
    u[n - 1] = bc_right;

    // Interface j sits between nodes j and j + 1.
    Eigen::VectorXd flux(n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double a = u[j], b = u[j + 1];
        const double speed = vf * std::max(std::abs(1.0 - 2.0 * a), std::abs(1.0 - 2.0 * b));
        flux[j] = 0.5 * (greenshield_flux(a, vf) + greenshield_flux(b, vf)) - 0.5 * speed * (b - a);
    }
    Eigen::VectorXd w = u;
    for (Eigen::Index j = 1; j + 1 < n; ++j) w[j] = u[j] - r * (flux[j] - flux[j - 1]);
    double inflow = dt * (flux[0] - flux[n - 2]);

    for (Eigen::Index j = 0; j + 1 < n; ++j) flux[j] = -gamma * (w[j + 1] - w[j]) / dx;
    Eigen::VectorXd out = w;
    for (Eigen::Index j = 1; j + 1 < n; ++j) out[j] = w[j] - r * (flux[j] - flux[j - 1]);
    inflow += dt * (flux[0] - flux[n - 2]);

    double clamp = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (out[j] < 0.0) {
            clamp = std::max(clamp, -out[j]);
            out[j] = 0.0;
        } else if (out[j] > 1.0) {
            clamp = std::max(clamp, out[j] - 1.0);
            out[j] = 1.0;
        }
    }
    if (stats) {
        stats->max_clamp = std::max(stats->max_clamp, clamp);
        stats->net_inflow += inflow;
    }
    return out;
}

DensityField simulate(const RoadDomain& domain, const SolverConfig& config, const BoundarySchedule& bc,
                      const FreeFlowSchedule& vf, SimulationReport* report) {
    domain.validate();
    config.validate();
    const int nodes = config.nx + 1;
    const double dx = domain.length_km / config.nx;
    const double vf_max = kmh_to_kmpm(vf.max_vf_kmh());

    const double cadence = config.output_dt_min;
    const double rows_exact = domain.horizon_min / cadence;
    const long intervals = std::lround(rows_exact);
    if (std::abs(rows_exact - static_cast<double>(intervals)) > 1e-9 * std::max(1.0, rows_exact))
        throw ConfigError("horizon must be an integer multiple of the output cadence");

    long substeps = 0;
    if (config.fixed_dt_min > 0.0) {
        const double ratio = cadence / config.fixed_dt_min;
        substeps = std::lround(ratio);
        if (substeps < 1 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio)
            throw ConfigError("fixed_dt must divide the output cadence");
    } else {
        const double limit = stable_dt(dx, vf_max, domain.viscosity, config.cfl_safety);
        substeps = static_cast<long>(std::ceil(cadence / limit - 1e-12));
        substeps = std::max(substeps, 1L);
    }
    const double dt = cadence / static_cast<double>(substeps);

    RowMatrixXd values(intervals + 1, nodes);
    Eigen::VectorXd u(nodes);
    for (int j = 0; j < nodes; ++j) u[j] = config.initial.at(dx * j);
    u[0] = bc.left.at(0.0);
    u[nodes - 1] = bc.right.at(0.0);
    values.row(0) = u.transpose();

    StepStats stats;
    long count = 0;
    for (long k = 1; k <= intervals; ++k) {
        for (long s = 0; s < substeps; ++s) {
            const double t = static_cast<double>(count) * dt;
            const double t_next = static_cast<double>(count + 1) * dt;
            u = step(u, vf.vf_kmpm(t), domain.viscosity, dx, dt, bc.left.at(t_next), bc.right.at(t_next), &stats);
            ++count;
        }
        values.row(k) = u.transpose();
    }

    if (report) {
        report->dt_min = dt;
        report->steps = count;
        report->max_clamp = stats.max_clamp;
    }
    return DensityField(0.0, cadence, dx, std::move(values));
}

void write_field_csv(std::ostream& out, const DensityField& field) {
    out << "t_min,x_km,rho\n";
    for (Eigen::Index k = 0; k < field.nt(); ++k) {
        const std::string t = csv::format(field.time(k));
        for (Eigen::Index j = 0; j < field.n_nodes(); ++j)
            out << t << ',' << csv::format(field.position(j)) << ',' << csv::format(field.values()(k, j)) << '\n';
    }
}

DensityField read_field_csv(const std::string& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header != std::vector<std::string>{"t_min", "x_km", "rho"})
        throw DataError(path + ": expected header t_min,x_km,rho");
    if (table.rows.empty()) throw DataError(path + ": no data rows");

    std::vector<double> t(table.rows.size()), x(table.rows.size()), rho(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string where = path + ":" + std::to_string(table.line_numbers[i]);
        t[i] = csv::parse_double(table.rows[i][0], where + ": t_min");
        x[i] = csv::parse_double(table.rows[i][1], where + ": x_km");
        rho[i] = csv::parse_double(table.rows[i][2], where + ": rho");
        if (!(rho[i] >= 0.0 && rho[i] <= 1.0)) throw DataError(where + ": rho outside [0, 1]");
    }
    std::size_t nodes = 1;
    while (nodes < t.size() && t[nodes] == t[0]) ++nodes;
    if (t.size() % nodes != 0 || nodes < 2) throw DataError(path + ": field rows do not form a full grid");
    const std::size_t nt = t.size() / nodes;
    if (x[0] != 0.0) throw DataError(path + ": first position must be 0");
    const double dx = x[1] - x[0];
    const double dt = nt > 1 ? t[nodes] - t[0] : 1.0;

    RowMatrixXd values(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nodes));
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t j = 0; j < nodes; ++j) {
            const std::size_t i = k * nodes + j;
            const std::string where = path + ":" + std::to_string(table.line_numbers[i]);
            if (std::abs(x[i] - dx * static_cast<double>(j)) > 1e-9 || std::abs(t[i] - (t[0] + dt * static_cast<double>(k))) > 1e-9)
                throw DataError(where + ": field grid is not uniform");
            values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rho[i];
        }
    }
    return DensityField(t[0], dt, dx, std::move(values));
}

} // namespace tpinn
