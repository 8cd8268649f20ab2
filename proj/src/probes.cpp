#include "trafficpinn/probes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include "trafficpinn/csv.hpp"

namespace tpinn {

void ProbeTrajectory::validate() const {
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const std::string where = "probe " + std::to_string(probe_id) + " sample " + std::to_string(k);
        if (!(s.rho >= 0.0 && s.rho <= 1.0)) throw DataError(where + ": rho must lie in [0, 1]");
        if (!(s.v_kmh >= 0.0)) throw DataError(where + ": speed must be nonnegative");
        if (!std::isfinite(s.t_min) || !std::isfinite(s.x_km)) throw DataError(where + ": non-finite time or position");
        if (k > 0 && !(s.t_min > samples[k - 1].t_min)) throw DataError(where + ": times must be strictly increasing");
        if (k > 0 && s.x_km < samples[k - 1].x_km) throw DataError(where + ": position must be non-decreasing");
    }
}

std::size_t ProbeDataset::sample_count() const {
    std::size_t n = 0;
    for (const auto& tr : trajectories) n += tr.samples.size();
    return n;
}

std::optional<double> ProbeDataset::latest_time() const {
    std::optional<double> best;
    for (const auto& tr : trajectories)
        if (!tr.samples.empty()) best = std::max(best.value_or(tr.samples.back().t_min), tr.samples.back().t_min);
    return best;
}

void FleetConfig::validate() const {
    if (!(sample_rate_hz > 0.0)) throw ConfigError("fleet sample rate must be positive");
    if (rho_noise_std < 0.0 || v_noise_std_kmh < 0.0) throw ConfigError("noise standard deviations must be >= 0");
    for (std::size_t i = 1; i < spawn_times.size(); ++i)
        if (spawn_times[i] < spawn_times[i - 1]) throw ConfigError("explicit spawn times must be sorted");
}

std::vector<double> FleetConfig::resolve_spawn_times(double horizon_min) const {
    if (!spawn_times.empty()) return spawn_times;
    std::vector<double> out;
    if (!(mean_spawn_gap_min > 0.0)) return out;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(1.0 / mean_spawn_gap_min);
    for (double t = 0.0; t < horizon_min; t += gap(rng)) out.push_back(t);
    return out;
}

double advance_probe(double x, const DensityField& field, double vf_kmpm, double t, double dt) {
    const double rho = sample_field(field, t, x);
    const double next = x + dt * greenshield_velocity(rho, vf_kmpm);
    return std::clamp(next, 0.0, field.length());
}

ProbeDataset run_fleet(const DensityField& field, const FreeFlowSchedule& vf, const FleetConfig& config) {
    config.validate();
    const double period = 1.0 / (60.0 * config.sample_rate_hz);
    const double t_end = field.t_end();
    const double length = field.length();
    const auto spawns = config.resolve_spawn_times(t_end);

    ProbeDataset out;
    for (std::size_t id = 0; id < spawns.size(); ++id) {
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(id), std::uint32_t{0x5eed}};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> unit(0.0, 1.0);

        ProbeTrajectory tr;
        tr.probe_id = static_cast<std::int64_t>(id);
        auto k = static_cast<long>(std::ceil((spawns[id] - field.t0()) / period - 1e-9));
        double x = 0.0;
        for (;; ++k) {
            const double t = field.t0() + static_cast<double>(k) * period;
            if (t >= t_end) break;
            double rho = 0.0;
            try {
                rho = sample_field(field, t, x);
            } catch (const DomainError&) {
                break;
            }
            const double vf_kmh = vf.vf_kmh(t);
            double v = greenshield_velocity(rho, vf_kmh);
            double rho_meas = rho;
            if (config.rho_noise_std > 0.0) rho_meas = std::clamp(rho + config.rho_noise_std * unit(rng), 0.0, 1.0);
            if (config.v_noise_std_kmh > 0.0) v = std::max(0.0, v + config.v_noise_std_kmh * unit(rng));
            tr.samples.push_back({t, x, v, rho_meas});

            x = advance_probe(x, field, kmh_to_kmpm(vf_kmh), t, period);
            if (x >= length) break;
        }
        if (!tr.samples.empty()) out.trajectories.push_back(std::move(tr));
    }
    return out;
}

ProbeDataset window(const ProbeDataset& dataset, double t1, double t2) {
    if (t1 > t2) throw DomainError("window: t1 > t2");
    ProbeDataset out;
    for (const auto& tr : dataset.trajectories) {
        ProbeTrajectory kept{tr.probe_id, {}};
        for (const auto& s : tr.samples)
            if (s.t_min >= t1 && s.t_min <= t2) kept.samples.push_back(s);
        if (!kept.samples.empty()) out.trajectories.push_back(std::move(kept));
    }
    return out;
}

void write_probe_csv(std::ostream& out, const ProbeDataset& dataset) {
    struct Row {
        double t;
        std::int64_t id;
        const ProbeSample* s;
    };
    std::vector<Row> rows;
    rows.reserve(dataset.sample_count());
    for (const auto& tr : dataset.trajectories)
        for (const auto& s : tr.samples) rows.push_back({s.t_min, tr.probe_id, &s});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return std::tie(a.t, a.id) < std::tie(b.t, b.id); });

    out << "t_min,probe_id,x_km,v_kmh,rho\n";
    for (const auto& r : rows)
        out << csv::format(r.t) << ',' << r.id << ',' << csv::format(r.s->x_km) << ',' << csv::format(r.s->v_kmh) << ','
            << csv::format(r.s->rho) << '\n';
}

ProbeDataset read_probe_csv(std::istream& in, const std::string& source_name) {
    const csv::Table table = csv::read(in, source_name);
    auto column = [&](const char* name) -> std::size_t {
        auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end())
            throw DataError(source_name + ":1: missing required column '" + name +
                            "' (header must contain t_min,probe_id,x_km,v_kmh,rho)");
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const std::size_t ct = column("t_min"), cid = column("probe_id"), cx = column("x_km"), cv = column("v_kmh"),
                      crho = column("rho");

    std::map<std::int64_t, ProbeTrajectory> by_id;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::string where = source_name + ":" + std::to_string(table.line_numbers[i]);
        const double id_value = csv::parse_double(row[cid], where + ": probe_id");
        if (id_value != std::floor(id_value)) throw DataError(where + ": probe_id must be an integer");
        const auto id = static_cast<std::int64_t>(id_value);
        ProbeSample s{csv::parse_double(row[ct], where + ": t_min"), csv::parse_double(row[cx], where + ": x_km"),
                      csv::parse_double(row[cv], where + ": v_kmh"), csv::parse_double(row[crho], where + ": rho")};
        if (!(s.rho >= 0.0 && s.rho <= 1.0)) throw DataError(where + ": rho must lie in [0, 1]");
        if (!(s.v_kmh >= 0.0)) throw DataError(where + ": speed must be nonnegative");
        auto& tr = by_id[id];
        tr.probe_id = id;
        if (!tr.samples.empty()) {
            if (!(s.t_min > tr.samples.back().t_min))
                throw DataError(where + ": times must be strictly increasing for probe " + std::to_string(id));
            if (s.x_km < tr.samples.back().x_km)
                throw DataError(where + ": position must be non-decreasing for probe " + std::to_string(id));
        }
        tr.samples.push_back(s);
    }
    ProbeDataset out;
    for (auto& [id, tr] : by_id) out.trajectories.push_back(std::move(tr));
    return out;
}

ProbeDataset read_probe_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    return read_probe_csv(in, path);
}

} // namespace tpinn
