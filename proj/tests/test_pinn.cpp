#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trafficpinn/lwr.hpp"
#include "trafficpinn/pinn.hpp"

using namespace tpinn;

namespace {

// Single affine layer: rho = a * s + b * x~ + c with identity head.
MlpParams affine_density(double a, double b, double c) {
    std::vector<DenseLayer<double>> layers;
    Eigen::MatrixXd w(1, 2);
    w << a, b;
    layers.push_back({w, Eigen::VectorXd::Constant(1, c)});
    return MlpParams(std::move(layers), Head::identity);
}

// Closure network with constant output n.
MlpParams constant_closure(double n) {
    MlpParams net = MlpParams::zeros({1, 16, 1, 1}, Head::identity);
    net.layers().back().bias[0] = n;
    return net;
}

MlpParams constant_density(double rho) {
    MlpParams net = MlpParams::zeros({2, 32, 2, 1}, Head::sigmoid);
    net.layers().back().bias[0] = std::log(rho / (1.0 - rho));
    return net;
}

ProbeDataset one_sample(double t, double x, double v_kmh, double rho) {
    ProbeDataset ds;
    ds.trajectories.push_back({0, {{t, x, v_kmh, rho}}});
    return ds;
}

struct World {
    DensityField truth;
    ProbeDataset probes;
};

// Greenshield world with v_f = 37.5 km/h and a dense fleet over [0, 3.6] min.
World greenshield_world(double rho_noise = 0.0) {
    const RoadDomain domain(5.0, 3.6, 0.005);
    SolverConfig solver;
    solver.nx = 100;
    solver.output_dt_min = 0.05;
    solver.initial = PiecewiseTrace({{0.0, 0.3}, {2.5, 0.7}});
    BoundarySchedule bc{PiecewiseTrace({{0.0, 0.2}, {1.5, 0.6}}), PiecewiseTrace({{0.0, 0.8}, {2.0, 0.4}})};
    World w;
    w.truth = simulate(domain, solver, bc, FreeFlowSchedule::constant(37.5));
    FleetConfig fleet;
    fleet.mean_spawn_gap_min = 0.1;
    fleet.sample_rate_hz = 1.0;
    fleet.rho_noise_std = rho_noise;
    fleet.v_noise_std_kmh = 0.0;
    fleet.seed = 4;
    w.probes = run_fleet(w.truth, FreeFlowSchedule::constant(37.5), fleet);
    return w;
}

} // namespace

TEST_CASE("softplus round trip") {
    for (double y : {1e-6, 0.3, 0.625, 5.0, 50.0}) CHECK(softplus(softplus_inverse(y)) == doctest::Approx(y).epsilon(1e-12));
    CHECK_THROWS_AS(softplus_inverse(0.0), DomainError);
}

TEST_CASE("velocity closures") {
    const auto gs = VelocityModel::greenshield(0.625);
    CHECK(velocity_eval(gs, 0.5).v == doctest::Approx(0.3125).epsilon(1e-14));
    CHECK(velocity_eval(gs, 0.5).dv_drho == doctest::Approx(-0.625).epsilon(1e-14));
    CHECK_THROWS_AS(velocity_eval(gs, 1.5), DomainError);

    const auto learned = VelocityModel::learned(0.625, {1, 16, 1, 1}, 17);
    CHECK(velocity_eval(learned, 0.0).v == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(velocity_eval(learned, 1.0).v == 0.0);
    for (int k = 0; k <= 20; ++k) {
        const double rho = k / 20.0;
        CHECK(velocity_eval(learned, rho).v >= 0.625 * (1.0 - rho) - 1e-15);
        auto f = [&](double r) { return velocity_eval(learned, std::clamp(r, 0.0, 1.0)).v; };
        if (k > 0 && k < 20)
            CHECK(velocity_eval(learned, rho).dv_drho == doctest::Approx(oracle::d1_richardson(f, rho, 1e-3)).epsilon(1e-8));
    }
}

TEST_CASE("physics residual examples") {
    const auto gs = VelocityModel::greenshield(0.625);
    const Residual flat = physics_residual({0.4, 0.0, 0.0, 0.0}, gs, 0.005);
    CHECK(flat.pde == 0.0);
    CHECK(flat.mono == 0.0);

    const double rho = 0.3;
    const Residual ramp = physics_residual({rho, 0.0, 1.0 / 5.0, 0.0}, gs, 0.005);
    CHECK(ramp.pde == doctest::Approx(0.625 * (1.0 - 2.0 * rho) / 5.0).epsilon(1e-14));

    // v = (1 - rho)(0.5 + rho), v'(0) = 1 - 0.5
    VelocityModel m;
    m.mode = VelocityMode::learned_closure;
    m.set_vf(0.5);
    m.closure = constant_closure(1.0);
    CHECK(physics_residual({0.0, 0.0, 0.0, 0.0}, m, 0.005).mono == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("data loss examples") {
    const InputScaler scaler(10, 0.3, 3.0, 5.0);
    TrainableState s{constant_density(0.5), VelocityModel::greenshield(0.625)};
    CHECK(data_loss(s, scaler, make_batch(one_sample(1.0, 2.0, 18.75, 0.5), 0.0, 3.0)).value ==
          doctest::Approx(0.0).epsilon(1e-14));

    s.density = constant_density(0.4);
    const auto excluded = make_batch(one_sample(1.0, 2.0, 99.0, 0.5), 2.0, 3.0);
    CHECK(excluded.velocity_count() == 0);
    CHECK(data_loss(s, scaler, excluded).value == doctest::Approx(0.01).epsilon(1e-12));

    const auto empty = data_loss(s, scaler, make_batch({}, 0.0, 3.0));
    CHECK(empty.empty);
    CHECK(empty.value == 0.0);
}

TEST_CASE("physics loss examples") {
    const InputScaler scaler(10, 0.3, 3.0, 5.0);
    CollocationSet one{Eigen::ArrayXd::Constant(1, 1.7), Eigen::ArrayXd::Constant(1, 2.5)};
    TrainableState s{constant_density(0.6), VelocityModel::greenshield(0.625)};
    CHECK(physics_loss(s, scaler, sample_collocation(0.0, 3.0, 0.6, 5.0, 50, 1), {1.0, 1.0}, 0.005).physics ==
          doctest::Approx(0.0).epsilon(1e-20));

    // rho_t = a * time_gain = 2 at the point, rho_x = 0
    s.density = affine_density(2.0 / scaler.time_gain(), 0.0, 0.5 - 2.0 / scaler.time_gain() * scaler.scale_time(1.7));
    const auto terms = physics_loss(s, scaler, one, {3.0, 1.0}, 0.005);
    CHECK(terms.physics == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(terms.mean_pde_sq == doctest::Approx(4.0).epsilon(1e-12));

    s.density = affine_density(0.3, -0.2, 0.5);
    const auto colloc = sample_collocation(0.0, 3.0, 0.6, 5.0, 40, 2);
    const auto base = physics_loss(s, scaler, colloc, {1.0, 1.0}, 0.005);
    const auto doubled = physics_loss(s, scaler, colloc, {2.0, 1.0}, 0.005);
    CHECK(doubled.physics - base.physics == doctest::Approx(base.mean_pde_sq).epsilon(1e-12));
}

TEST_CASE("objective gradient matches finite differences") {
    const InputScaler scaler(6, 0.3, 3.0, 5.0);
    TrainableState s;
    s.density = xavier_init({2, 8, 2, 1}, Head::sigmoid, 31);
    s.velocity = VelocityModel::learned(0.625, {1, 6, 1, 1}, 32);
    // v' = -v_f + (1 - 2 rho) N^2 > 0 for low densities, so the monotonicity term is active.
    s.velocity.closure.layers().back().bias[0] = 1.5;
    s.density.layers().back().bias[0] = -1.0;
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> ut(0.0, 2.1), ux(0.0, 5.0), ur(0.05, 0.95), uv(5.0, 40.0);
    ProbeDataset ds;
    for (int p = 0; p < 4; ++p) {
        ProbeTrajectory tr{p, {}};
        double t = ut(rng) * 0.3, x = ux(rng) * 0.5;
        for (int k = 0; k < 6; ++k, t += 0.3, x += 0.1) tr.samples.push_back({t, x, uv(rng), ur(rng)});
        ds.trajectories.push_back(tr);
    }
    const auto batch = make_batch(ds, 1.0, 2.1);
    REQUIRE(batch.velocity_count() > 0);
    REQUIRE(batch.velocity_count() < batch.size());
    const auto colloc = sample_collocation(0.0, 2.1, 0.6, 5.0, 30, 34);
    const LagrangeWeights w{2.0, 3.0};

    TrainableState grad = s.zeros_like();
    const auto terms = evaluate_objective(s, scaler, batch, colloc, w, 0.005, &grad);
    REQUIRE(terms.mean_mono_sq > 0.0);
    const Eigen::VectorXd g = grad.flatten();
    const Eigen::VectorXd theta = s.flatten();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        auto f = [&](double v) {
            TrainableState p = s;
            Eigen::VectorXd th = theta;
            th[k] = v;
            p.assign(th);
            return evaluate_objective(p, scaler, batch, colloc, w, 0.005).total();
        };
        worst = std::max(worst, oracle::best_relative_error(
                                    g[k], [&](double h) { return oracle::d1_richardson(f, theta[k], h); }, 1e-4));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("collocation sampling") {
    const auto a = sample_collocation(1.0, 4.0, 0.6, 5.0, 10000, 77);
    const auto b = sample_collocation(1.0, 4.0, 0.6, 5.0, 10000, 77);
    CHECK((a.t == b.t).all());
    CHECK((a.x == b.x).all());
    CHECK(a.t.minCoeff() >= 1.0);
    CHECK(a.t.maxCoeff() <= 4.6);
    CHECK(a.x.minCoeff() >= 0.0);
    CHECK(a.x.maxCoeff() <= 5.0);
    const double sigma_t = 3.6 / std::sqrt(12.0 * 10000.0);
    const double sigma_x = 5.0 / std::sqrt(12.0 * 10000.0);
    CHECK(std::abs(a.t.mean() - 2.8) < 3.0 * sigma_t);
    CHECK(std::abs(a.x.mean() - 2.5) < 3.0 * sigma_x);
    CHECK_THROWS_AS(sample_collocation(2.0, 1.0, 0.5, 5.0, 10, 1), DomainError);
}

TEST_CASE("adam step on a quadratic") {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 1.0);
    Adam opt(Eigen::VectorXd::Constant(2, 0.1), 0.9, 0.999, 1e-8);
    opt.step(p, Eigen::Vector2d(2.0, -4.0));
    // First bias-corrected step has magnitude lr in the sign of the gradient.
    CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(p[1] == doctest::Approx(1.1).epsilon(1e-7));
    for (int i = 0; i < 500; ++i) opt.step(p, 2.0 * p);
    CHECK(p.norm() < 1e-2);
}

TEST_CASE("zero epochs return the initial state") {
    const InputScaler scaler(10, 0.3, 3.0, 5.0);
    const TrainableState s{xavier_init({2, 32, 2, 1}, Head::sigmoid, 1), VelocityModel::greenshield(0.6)};
    TrainerConfig cfg;
    cfg.epochs = 0;
    const auto r = train_window(s, {1.0, 1.0}, scaler, make_batch({}, 0, 3), {0.0, 3.0, 0.6}, cfg, 0.005, 5.0);
    CHECK(r.state.flatten() == s.flatten());
    CHECK(r.trace.size() == 1);
    CHECK(r.data_starved);
}

TEST_CASE("training reduces the loss and raises the multipliers") {
    const World w = greenshield_world();
    const InputScaler scaler(10, 0.3, 3.0, 5.0);
    const auto batch = make_batch(window(w.probes, 0.0, 3.0), 0.0, 3.0);
    REQUIRE(batch.size() > 1000);
    const TrainableState init{xavier_init({2, 32, 2, 1}, Head::sigmoid, 5), VelocityModel::greenshield(0.625)};
    TrainerConfig cfg;
    cfg.seed = 6;
    const auto r = train_window(init, {1.0, 1.0}, scaler, batch, {0.0, 3.0, 0.6}, cfg, 0.005, 5.0);
    REQUIRE(r.trace.size() == 101);
    const double first = r.trace.front().data_loss + r.trace.front().physics_loss;
    const double last = r.trace.back().data_loss + r.trace.back().physics_loss;
    CHECK(last < 0.1 * first);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].lambda_pde >= r.trace[k - 1].lambda_pde);
        CHECK(r.trace[k].lambda_pde <= cfg.lambda_max);
    }
}

TEST_CASE("free-flow identification") {
    const World w = greenshield_world();
    const InputScaler scaler(10, 0.3, 3.0, 5.0);
    const auto batch = make_batch(window(w.probes, 0.0, 3.0), 0.0, 3.0);
    const TrainableState init{xavier_init({2, 32, 2, 1}, Head::sigmoid, 7), VelocityModel::greenshield(0.5)};
    TrainerConfig cfg;
    cfg.epochs = 200;
    const auto r = train_window(init, {1.0, 1.0}, scaler, batch, {0.0, 3.0, 0.6}, cfg, 0.005, 5.0);
    const auto est = identify_vf(r.state.velocity, batch);
    CHECK_FALSE(est.stale);
    CHECK(est.vf_kmh == doctest::Approx(37.5).epsilon(0.02));

    ProbeDataset empty_road;
    empty_road.trajectories.push_back({0, {}});
    for (int k = 0; k < 60; ++k) empty_road.trajectories[0].samples.push_back({k * 0.05, k * 0.03, 40.0, 0.0});
    const auto eb = make_batch(empty_road, 0.0, 3.0);
    const auto r2 = train_window(init, {1.0, 1.0}, scaler, eb, {0.0, 3.0, 0.6}, cfg, 0.005, 5.0);
    CHECK(identify_vf(r2.state.velocity, eb).vf_kmh == doctest::Approx(40.0).epsilon(0.01));

    const auto stale = identify_vf(r.state.velocity, make_batch(window(w.probes, 0.0, 3.0), 5.0, 6.0), 33.0);
    CHECK(stale.stale);
    CHECK(stale.vf_kmh == 33.0);
}
