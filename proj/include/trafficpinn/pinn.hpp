#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trafficpinn/mlp.hpp"
#include "trafficpinn/probes.hpp"
#include "trafficpinn/scaling.hpp"

namespace tpinn {

enum class VelocityMode { greenshield_learnable, learned_closure };

// Speed closure v(rho) in km/min. The free-flow velocity is stored through an
// unconstrained scalar: v_f = softplus(vf_raw) > 0. In learned_closure mode
//   v(rho) = (1 - rho) (v_f + rho * N_psi(rho)^2),
// so v(0) = v_f and v(1) = 0 hold for any psi.
struct VelocityModel {
    VelocityMode mode = VelocityMode::greenshield_learnable;
    double vf_raw = 0.0;
    MlpParams closure; // scalar -> scalar, identity head; unused for Greenshield

    static VelocityModel greenshield(double vf_kmpm);
    static VelocityModel learned(double vf_kmpm, const MlpShape& closure_shape, std::uint64_t seed);

    double vf() const;
    void set_vf(double vf_kmpm);
};

double softplus(double u);
double softplus_inverse(double y);

struct VelocityEval {
    double v;
    double dv_drho;
};

VelocityEval velocity_eval(const VelocityModel& model, double rho);

// Diagonal multipliers on the two residual components.
struct LagrangeWeights {
    double pde = 1.0;
    double mono = 1.0;
};

struct Residual {
    double pde;
    double mono;
};

// r_pde = rho_t + (v + rho v') rho_x - gamma rho_xx ;  r_mono = max(v', 0).
Residual physics_residual(const Jet& jet, const VelocityModel& model, double gamma);

struct TrainerConfig {
    int epochs = 100;
    int n_colloc = 1000;
    double lr_density = 1e-2;
    double lr_closure = 1e-3;
    double lr_vf = 1e-2;
    double lr_lambda = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double lambda_min = 1e-3;
    double lambda_max = 1e3;
    double velocity_window_min = 3.0;
    std::uint64_t seed = 7;

    void validate() const;
};

struct CollocationSet {
    Eigen::ArrayXd t;
    Eigen::ArrayXd x;

    Eigen::Index size() const { return t.size(); }
};

// n seeded uniform points on [t1, t2 + delta] x [0, length].
CollocationSet sample_collocation(double t1, double t2, double delta, double length, int n, std::uint64_t seed);

// Flattened measurements ready for loss evaluation (speeds in km/min).
struct MeasurementBatch {
    Eigen::ArrayXd t, x, rho, v;
    Eigen::Array<bool, Eigen::Dynamic, 1> in_velocity_window;

    Eigen::Index size() const { return t.size(); }
    Eigen::Index velocity_count() const { return in_velocity_window.count(); }
    double latest_time() const;
};

MeasurementBatch make_batch(const ProbeDataset& dataset, double velocity_from, double velocity_to);

// Everything gradient descent acts on.
struct TrainableState {
    MlpParams density;
    VelocityModel velocity;

    TrainableState zeros_like() const;
    Eigen::VectorXd flatten() const;
    void assign(const Eigen::VectorXd& flat);
};

struct LossTerms {
    double data = 0.0;
    double physics = 0.0;
    double mean_pde_sq = 0.0;  // d(physics)/d(lambda_pde)
    double mean_mono_sq = 0.0; // d(physics)/d(lambda_mono)
    bool data_empty = false;

    double total() const { return data + physics; }
};

struct DataLoss {
    double value = 0.0;
    bool empty = false; // no measurements: value is 0 and the caller should flag it
};

// Sum of squared density misfits plus squared speed misfits inside the velocity window.
DataLoss data_loss(const TrainableState& state, const InputScaler& scaler, const MeasurementBatch& batch,
                   TrainableState* grad = nullptr);

// Mean over collocation points of lambda_pde r_pde^2 + lambda_mono r_mono^2.
LossTerms physics_loss(const TrainableState& state, const InputScaler& scaler, const CollocationSet& colloc,
                       const LagrangeWeights& weights, double gamma, TrainableState* grad = nullptr);

// data_loss + physics_loss with gradients accumulated into `grad` when given.
LossTerms evaluate_objective(const TrainableState& state, const InputScaler& scaler, const MeasurementBatch& batch,
                             const CollocationSet& colloc, const LagrangeWeights& weights, double gamma,
                             TrainableState* grad = nullptr);

// Adaptive-moment optimizer with a per-coordinate learning rate. `sign` is -1 for
// descent and +1 for ascent.
class Adam {
public:
    Adam() = default;
    Adam(Eigen::VectorXd learning_rates, double beta1, double beta2, double eps);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double sign = -1.0);
    long iterations() const { return t_; }

private:
    Eigen::VectorXd lr_, m_, v_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
};

struct EpochRecord {
    int epoch;
    double data_loss;
    double physics_loss;
    double lambda_pde;
    double lambda_mono;
    double vf_kmh;
};

void write_loss_trace_csv(std::ostream& out, const std::vector<EpochRecord>& trace);

struct WindowSpec {
    double t1;    // start of data/collocation window
    double t2;    // latest measurement time T
    double delta; // prediction extension (2 * step)
};

struct TrainResult {
    TrainableState state;
    LagrangeWeights weights;
    std::vector<EpochRecord> trace; // epochs + 1 entries: before each update and after the last
    bool data_starved = false;
};

class TrainingAborted : public NumericalError {
public:
    TrainingAborted(const std::string& what, std::vector<EpochRecord> trace)
        : NumericalError(what), trace_(std::move(trace)) {}
    const std::vector<EpochRecord>& trace() const { return trace_; }

private:
    std::vector<EpochRecord> trace_;
};

// Min-max training on one window: Adam descent on density/closure/v_f, Adam ascent
// on the multipliers (clamped to [lambda_min, lambda_max]). Collocation points are
// resampled every epoch from a seed derived from (config.seed, epoch).
TrainResult train_window(const TrainableState& init, const LagrangeWeights& init_weights, const InputScaler& scaler,
                         const MeasurementBatch& batch, const WindowSpec& window, const TrainerConfig& config,
                         double gamma, double road_length);

struct VfEstimate {
    double vf_kmh;
    bool stale;
};

// Reads the learnt v_f in km/h. With no speed measurements in the velocity window
// the previous estimate is held (when available) and flagged stale.
VfEstimate identify_vf(const VelocityModel& trained, const MeasurementBatch& batch,
                       std::optional<double> previous_kmh = std::nullopt);

} // namespace tpinn
