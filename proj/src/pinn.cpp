#include "trafficpinn/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "trafficpinn/csv.hpp"
#include "trafficpinn/seeding.hpp"

namespace tpinn {

namespace {

using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;

// Batch columns processed per pass; keeps the layer caches small.
constexpr Eigen::Index kChunk = 256;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// Closure value and rho-derivatives over a batch, plus the closure-network jet
// needed to pull gradients back onto psi.
struct ClosureTerms {
    RowArr n, n1, n2; // N_psi and its first two rho-derivatives (learned mode only)
    RowArr v, v1, v2; // v, v', v''
};

ClosureTerms closure_terms(const VelocityModel& model, const RowArr& rho, bool derivatives, JetTape<double>& tape) {
    const double vf = model.vf();
    const Eigen::Index b = rho.size();
    ClosureTerms c;
    if (model.mode == VelocityMode::greenshield_learnable) {
        c.v = vf * (1.0 - rho);
        c.v1 = RowArr::Constant(b, -vf);
        c.v2 = RowArr::Zero(b);
        return c;
    }
    const Eigen::MatrixXd inputs = rho.matrix();
    const JetChannels channels{false, derivatives, derivatives};
    const auto out = tape.forward(model.closure, inputs, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), channels);
    c.n = out.value;
    const RowArr q = vf + rho * c.n.square();
    c.v = (1.0 - rho) * q;
    if (derivatives) {
        c.n1 = out.d_x;
        c.n2 = out.d_xx;
        const RowArr q1 = c.n.square() + 2.0 * rho * c.n * c.n1;
        const RowArr q2 = 4.0 * c.n * c.n1 + 2.0 * rho * (c.n1.square() + c.n * c.n2);
        c.v1 = -q + (1.0 - rho) * q1;
        c.v2 = -2.0 * q1 + (1.0 - rho) * q2;
    }
    return c;
}

} // namespace

double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }

double softplus_inverse(double y) {
    if (!(y > 0.0)) throw DomainError("softplus_inverse: argument must be positive");
    return y > 30.0 ? y : std::log(std::expm1(y));
}

VelocityModel VelocityModel::greenshield(double vf_kmpm) {
    VelocityModel m;
    m.mode = VelocityMode::greenshield_learnable;
    m.set_vf(vf_kmpm);
    return m;
}

VelocityModel VelocityModel::learned(double vf_kmpm, const MlpShape& closure_shape, std::uint64_t seed) {
    if (closure_shape.input_dim != 1 || closure_shape.output_dim != 1)
        throw ConfigError("closure network must map a scalar to a scalar");
    VelocityModel m;
    m.mode = VelocityMode::learned_closure;
    m.set_vf(vf_kmpm);
    m.closure = xavier_init(closure_shape, Head::identity, seed);
    return m;
}

double VelocityModel::vf() const { return softplus(vf_raw); }

void VelocityModel::set_vf(double vf_kmpm) {
    if (!(vf_kmpm > 0.0)) throw ConfigError("free-flow velocity must be positive");
    vf_raw = softplus_inverse(vf_kmpm);
}

VelocityEval velocity_eval(const VelocityModel& model, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("velocity_eval: density outside [0, 1]");
    JetTape<double> tape;
    const auto c = closure_terms(model, RowArr::Constant(1, rho), true, tape);
    return {c.v[0], c.v1[0]};
}

Residual physics_residual(const Jet& jet, const VelocityModel& model, double gamma) {
    const double rho = std::clamp(jet.value, 0.0, 1.0);
    const auto [v, dv] = velocity_eval(model, rho);
    return {jet.d_t + (v + rho * dv) * jet.d_x - gamma * jet.d_xx, std::max(dv, 0.0)};
}

void TrainerConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (n_colloc < 1) throw ConfigError("n_colloc must be >= 1");
    if (!(lr_density > 0 && lr_closure > 0 && lr_vf > 0 && lr_lambda > 0))
        throw ConfigError("learning rates must be positive");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(lambda_min > 0 && lambda_max >= lambda_min)) throw ConfigError("invalid multiplier bounds");
    if (!(velocity_window_min > 0)) throw ConfigError("velocity window must be positive");
}

CollocationSet sample_collocation(double t1, double t2, double delta, double length, int n, std::uint64_t seed) {
    if (!(t2 + delta > t1)) throw DomainError("collocation interval is degenerate");
    if (n < 1) throw DomainError("collocation count must be >= 1");
    if (!(length > 0)) throw DomainError("collocation road length must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(t1, t2 + delta), ux(0.0, length);
    CollocationSet set{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
    for (int i = 0; i < n; ++i) {
        set.t[i] = ut(rng);
        set.x[i] = ux(rng);
    }
    return set;
}

double MeasurementBatch::latest_time() const { return t.size() ? t.maxCoeff() : -std::numeric_limits<double>::infinity(); }

MeasurementBatch make_batch(const ProbeDataset& dataset, double velocity_from, double velocity_to) {
    const auto n = static_cast<Eigen::Index>(dataset.sample_count());
    MeasurementBatch b{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n),
                       Eigen::Array<bool, Eigen::Dynamic, 1>(n)};
    Eigen::Index k = 0;
    for (const auto& tr : dataset.trajectories) {
        for (const auto& s : tr.samples) {
            b.t[k] = s.t_min;
            b.x[k] = s.x_km;
            b.rho[k] = s.rho;
            b.v[k] = kmh_to_kmpm(s.v_kmh);
            b.in_velocity_window[k] = s.t_min >= velocity_from && s.t_min <= velocity_to;
            ++k;
        }
    }
    return b;
}

TrainableState TrainableState::zeros_like() const {
    TrainableState z;
    z.density = density.zeros_like();
    z.velocity.mode = velocity.mode;
    z.velocity.vf_raw = 0.0;
    if (velocity.mode == VelocityMode::learned_closure) z.velocity.closure = velocity.closure.zeros_like();
    return z;
}

Eigen::VectorXd TrainableState::flatten() const {
    const Eigen::VectorXd a = density.flatten();
    Eigen::VectorXd b;
    if (velocity.mode == VelocityMode::learned_closure) b = velocity.closure.flatten();
    Eigen::VectorXd out(a.size() + b.size() + 1);
    out << a, b, velocity.vf_raw;
    return out;
}

void TrainableState::assign(const Eigen::VectorXd& flat) {
    const Eigen::Index na = density.parameter_count();
    const Eigen::Index nb = velocity.mode == VelocityMode::learned_closure ? velocity.closure.parameter_count() : 0;
    if (flat.size() != na + nb + 1) throw ConfigError("trainable state size mismatch");
    density.assign(flat.head(na));
    if (nb) velocity.closure.assign(flat.segment(na, nb));
    velocity.vf_raw = flat[na + nb];
}

DataLoss data_loss(const TrainableState& state, const InputScaler& scaler, const MeasurementBatch& batch,
                   TrainableState* grad) {
    if (batch.size() == 0) return {0.0, true};
    double loss = 0.0;
    JetTape<double> tape;
    for (Eigen::Index s = 0; s < batch.size(); s += kChunk) {
        const Eigen::Index m = std::min(kChunk, batch.size() - s);
        const auto out = input_jets(state.density, scaler, batch.t.segment(s, m), batch.x.segment(s, m), tape, {});
        const RowArr misfit = out.value - batch.rho.segment(s, m).transpose();
        loss += misfit.square().sum();
        if (grad) {
            JetBatch<double> adj;
            adj.value = 2.0 * misfit;
            tape.backward(state.density, adj, grad->density);
        }
    }

    const Eigen::Index nv = batch.velocity_count();
    if (nv > 0) {
        RowArr rho(nv), v_meas(nv);
        for (Eigen::Index i = 0, k = 0; i < batch.size(); ++i) {
            if (!batch.in_velocity_window[i]) continue;
            rho[k] = batch.rho[i];
            v_meas[k] = batch.v[i];
            ++k;
        }
        JetTape<double> ctape;
        const auto c = closure_terms(state.velocity, rho, false, ctape);
        const RowArr dv = c.v - v_meas;
        loss += dv.square().sum();
        if (grad) {
            const RowArr vbar = 2.0 * dv;
            grad->velocity.vf_raw += (vbar * (1.0 - rho)).sum() * logistic(state.velocity.vf_raw);
            if (state.velocity.mode == VelocityMode::learned_closure) {
                JetBatch<double> adj;
                adj.value = vbar * 2.0 * rho * (1.0 - rho) * c.n;
                ctape.backward(state.velocity.closure, adj, grad->velocity.closure);
            }
        }
    }
    return {loss, false};
}

LossTerms physics_loss(const TrainableState& state, const InputScaler& scaler, const CollocationSet& colloc,
                       const LagrangeWeights& weights, double gamma, TrainableState* grad) {
    const Eigen::Index b = colloc.size();
    if (b == 0) throw DomainError("physics_loss: empty collocation set");
    const double inv_b = 1.0 / static_cast<double>(b);
    double sum_pde = 0.0, sum_mono = 0.0;
    JetTape<double> tape, ctape;
    for (Eigen::Index s = 0; s < b; s += kChunk) {
        const Eigen::Index n = std::min(kChunk, b - s);
        const auto rho =
            input_jets(state.density, scaler, colloc.t.segment(s, n), colloc.x.segment(s, n), tape, {true, true, true});
        const auto c = closure_terms(state.velocity, rho.value, true, ctape);
        const RowArr g = c.v + rho.value * c.v1;
        const RowArr r_pde = rho.d_t + g * rho.d_x - gamma * rho.d_xx;
        const RowArr r_mono = c.v1.max(0.0);
        sum_pde += r_pde.square().sum();
        sum_mono += r_mono.square().sum();
        if (!grad) continue;

        const RowArr a = 2.0 * weights.pde * inv_b * r_pde;
        const RowArr m = 2.0 * weights.mono * inv_b * r_mono; // zero where v' <= 0
        const RowArr g1 = 2.0 * c.v1 + rho.value * c.v2;

        JetBatch<double> adj;
        adj.d_t = a;
        adj.d_x = a * g;
        adj.d_xx = -gamma * a;
        adj.value = a * rho.d_x * g1 + m * c.v2;
        tape.backward(state.density, adj, grad->density);

        const RowArr ax = a * rho.d_x;
        const RowArr& r = rho.value;
        // dg/dv_f = 1 - 2 rho and dv'/dv_f = -1 in both modes.
        grad->velocity.vf_raw += (ax * (1.0 - 2.0 * r) - m).sum() * logistic(state.velocity.vf_raw);
        if (state.velocity.mode == VelocityMode::learned_closure) {
            const RowArr& nn = c.n;
            const RowArr& n1 = c.n1;
            const RowArr v_n = 2.0 * r * (1.0 - r) * nn;
            const RowArr v1_n = -2.0 * r * nn + (1.0 - r) * (2.0 * nn + 2.0 * r * n1);
            const RowArr v1_n1 = 2.0 * r * (1.0 - r) * nn;
            const RowArr g_n = v_n + r * v1_n;
            const RowArr g_n1 = r * v1_n1;
            JetBatch<double> cadj;
            cadj.value = ax * g_n + m * v1_n;
            cadj.d_x = ax * g_n1 + m * v1_n1;
            cadj.d_xx = RowArr::Zero(n);
            ctape.backward(state.velocity.closure, cadj, grad->velocity.closure);
        }
    }
    LossTerms terms;
    terms.mean_pde_sq = sum_pde * inv_b;
    terms.mean_mono_sq = sum_mono * inv_b;
    terms.physics = weights.pde * terms.mean_pde_sq + weights.mono * terms.mean_mono_sq;
    return terms;
}

LossTerms evaluate_objective(const TrainableState& state, const InputScaler& scaler, const MeasurementBatch& batch,
                             const CollocationSet& colloc, const LagrangeWeights& weights, double gamma,
                             TrainableState* grad) {
    LossTerms terms = physics_loss(state, scaler, colloc, weights, gamma, grad);
    const DataLoss d = data_loss(state, scaler, batch, grad);
    terms.data = d.value;
    terms.data_empty = d.empty;
    return terms;
}

Adam::Adam(Eigen::VectorXd learning_rates, double beta1, double beta2, double eps)
    : lr_(std::move(learning_rates)), m_(Eigen::VectorXd::Zero(lr_.size())), v_(Eigen::VectorXd::Zero(lr_.size())),
      beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double sign) {
    if (params.size() != lr_.size() || grad.size() != lr_.size()) throw ConfigError("Adam: size mismatch");
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() += sign * lr_.array() * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void write_loss_trace_csv(std::ostream& out, const std::vector<EpochRecord>& trace) {
    out << "epoch,data_loss,physics_loss,lambda_pde,lambda_mono,vf_kmh\n";
    for (const auto& r : trace)
        out << r.epoch << ',' << csv::format(r.data_loss) << ',' << csv::format(r.physics_loss) << ','
            << csv::format(r.lambda_pde) << ',' << csv::format(r.lambda_mono) << ',' << csv::format(r.vf_kmh) << '\n';
}

TrainResult train_window(const TrainableState& init, const LagrangeWeights& init_weights, const InputScaler& scaler,
                         const MeasurementBatch& batch, const WindowSpec& window, const TrainerConfig& config,
                         double gamma, double road_length) {
    config.validate();
    TrainResult result{init, init_weights, {}, batch.size() == 0};

    const Eigen::Index n_density = init.density.parameter_count();
    Eigen::VectorXd flat = init.flatten();
    Eigen::VectorXd lr = Eigen::VectorXd::Constant(flat.size(), config.lr_closure);
    lr.head(n_density).setConstant(config.lr_density);
    lr[flat.size() - 1] = config.lr_vf;
    Adam descent(lr, config.beta1, config.beta2, config.adam_eps);
    Adam ascent(Eigen::VectorXd::Constant(2, config.lr_lambda), config.beta1, config.beta2, config.adam_eps);
    Eigen::VectorXd lambda(2);
    lambda << init_weights.pde, init_weights.mono;

    auto record = [&](int epoch, const LossTerms& terms) {
        result.trace.push_back({epoch, terms.data, terms.physics, result.weights.pde, result.weights.mono,
                                kmpm_to_kmh(result.state.velocity.vf())});
        if (!std::isfinite(terms.total()))
            throw TrainingAborted("non-finite loss at epoch " + std::to_string(epoch), result.trace);
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto colloc = sample_collocation(window.t1, window.t2, window.delta, road_length, config.n_colloc,
                                               mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        TrainableState grad = result.state.zeros_like();
        const LossTerms terms = evaluate_objective(result.state, scaler, batch, colloc, result.weights, gamma, &grad);
        record(epoch, terms);

        descent.step(flat, grad.flatten(), -1.0);
        result.state.assign(flat);

        Eigen::VectorXd lambda_grad(2);
        lambda_grad << terms.mean_pde_sq, terms.mean_mono_sq;
        ascent.step(lambda, lambda_grad, +1.0);
        lambda = lambda.cwiseMax(config.lambda_min).cwiseMin(config.lambda_max);
        result.weights = {lambda[0], lambda[1]};
    }
    const auto colloc = sample_collocation(window.t1, window.t2, window.delta, road_length, config.n_colloc,
                                           mix_seed(config.seed, static_cast<std::uint64_t>(config.epochs)));
    record(config.epochs, evaluate_objective(result.state, scaler, batch, colloc, result.weights, gamma));
    return result;
}

VfEstimate identify_vf(const VelocityModel& trained, const MeasurementBatch& batch, std::optional<double> previous_kmh) {
    if (batch.velocity_count() == 0) return {previous_kmh.value_or(kmpm_to_kmh(trained.vf())), true};
    return {kmpm_to_kmh(trained.vf()), false};
}

} // namespace tpinn
