#include "doctest.h"

#include "gnnlab/gnn.hpp"
#include "gnnlab/graph_ops.hpp"
#include "gnnlab/planted.hpp"
#include "gradcheck.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gnnlab;

namespace {

DiffusionOperator identity_op(Eigen::Index n) { return {DiffusionKind::Identity, Matrix::Identity(n, n)}; }

GnnModel single_layer(Activation act, double w, bool linear_last = false) {
    GnnConfig c;
    c.layer_dims = {1, 1};
    c.activation = act;
    c.linear_last_layer = linear_last;
    GnnModel m = init_params(c);
    m.weights[0](0, 0) = w;
    return m;
}

Dataset toy_dataset(std::size_t n, double sigma, std::uint64_t seed, std::size_t m) {
    PlantedConfig c;
    c.n = n;
    c.d = 4;
    c.p = 0.5;
    c.q = 0.05;
    c.gamma_target = static_cast<double>(n);
    c.mu = Vector::Constant(4, 1.0);
    c.sigma = sigma;
    c.seed = seed;
    return generate_planted(c, m);
}

IndexList all_indices(std::size_t n) {
    IndexList idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

} // namespace

TEST_CASE("forward: identity activation, one layer") {
    Matrix x(2, 1);
    x << 1, -1;
    const auto g = forward(single_layer(Activation::Identity, 2.0), identity_op(2), x);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == x);
    CHECK(g[1](0, 0) == 2.0);
    CHECK(g[1](1, 0) == -2.0);
}

TEST_CASE("forward: ReLU on the output layer") {
    Matrix x(2, 1);
    x << 1, -1;
    const Matrix out = predict(single_layer(Activation::ReLU, 2.0, false), identity_op(2), x);
    CHECK(out(0, 0) == 2.0);
    CHECK(out(1, 0) == 0.0);
}

TEST_CASE("forward: bias is broadcast across rows") {
    GnnModel m = single_layer(Activation::Identity, 0.0);
    m.biases[0](0) = 1.5;
    const Matrix out = predict(m, identity_op(3), Matrix::Ones(3, 1));
    CHECK(out == Matrix::Constant(3, 1, 1.5));
}

TEST_CASE("forward: alpha = 0 residual is bit-equal to vanilla") {
    for (auto loss : {LossKind::SquaredBinary, LossKind::MulticlassNLL}) {
        gradcheck::Spec spec;
        spec.dims = {4, 5, 5, 5, loss == LossKind::SquaredBinary ? std::size_t{1} : std::size_t{5}};
        spec.loss = loss;
        spec.seed = 9;
        auto p = gradcheck::make_problem(spec);
        const Matrix vanilla = predict(p.model, p.s, p.x);
        p.model.config.residual_alpha = 0.0;
        CHECK(predict(p.model, p.s, p.x) == vanilla);
    }
}

TEST_CASE("forward: alpha = 1 pins every residual layer to phi(g_1)") {
    for (auto act : {Activation::Identity, Activation::ReLU}) {
        gradcheck::Spec spec;
        spec.dims = {4, 3, 3, 3};
        spec.loss = LossKind::MulticlassNLL;
        spec.activation = act;
        spec.alpha = 1.0;
        spec.seed = 5;
        const auto p = gradcheck::make_problem(spec);
        const auto g = forward(p.model, p.s, p.x);
        const Matrix phi_g1 = act == Activation::ReLU ? g[1].cwiseMax(0.0).eval() : g[1];
        for (std::size_t k = 2; k < g.size(); ++k) CHECK(g[k] == phi_g1);
    }
}

TEST_CASE("forward: shape mismatch is rejected") {
    const GnnModel m = single_layer(Activation::Identity, 1.0);
    CHECK_THROWS(forward(m, identity_op(3), Matrix::Ones(3, 2)));
    CHECK_THROWS(forward(m, identity_op(2), Matrix::Ones(3, 1)));
}

TEST_CASE("loss: zero model with balanced targets") {
    GnnConfig c;
    c.layer_dims = {3, 4, 1};
    c.init_scale = 0.0;
    const GnnModel m = init_params(c);
    Targets t;
    t.values.resize(6);
    t.values << 1, -1, 1, -1, 1, -1;
    const auto lg = loss_and_grad(m, identity_op(6), Matrix::Ones(6, 3), t, all_indices(6));
    CHECK(lg.loss == 1.0);
    CHECK(lg.grads.biases.back().cwiseAbs().maxCoeff() == 0.0);
    // Unbalanced labeled subset: output 0 against mostly +1 targets.
    const auto lg2 = loss_and_grad(m, identity_op(6), Matrix::Ones(6, 3), t, IndexList{0, 2, 3});
    CHECK(lg2.grads.biases.back()(0) != 0.0);
}

TEST_CASE("loss: targets outside the domain are rejected") {
    const GnnModel m = single_layer(Activation::Identity, 1.0, true);
    Targets t;
    t.values.resize(2);
    t.values << 1, 0.5;
    CHECK_THROWS(loss_and_grad(m, identity_op(2), Matrix::Ones(2, 1), t, all_indices(2)));
}

TEST_CASE("gradient: central differences on the standard grid") {
    for (const auto& spec : gradcheck::standard_grid()) {
        CAPTURE(gradcheck::describe(spec));
        const auto r = gradcheck::check(gradcheck::make_problem(spec));
        CHECK(r.coordinates > 0);
        CHECK(r.failures == 0);
    }
}

TEST_CASE("gradient: residual output layer of hidden width") {
    for (double alpha : {0.2, 0.5, 1.0}) {
        gradcheck::Spec spec;
        spec.dims = {4, 3, 3, 3};
        spec.loss = LossKind::MulticlassNLL;
        spec.alpha = alpha;
        spec.seed = 77;
        CAPTURE(alpha);
        CHECK(gradcheck::check(gradcheck::make_problem(spec)).failures == 0);
    }
}

TEST_CASE("gradient: closed form for linear regression") {
    const Eigen::Index n = 7;
    GnnConfig c;
    c.layer_dims = {3, 1};
    c.activation = Activation::Identity;
    c.seed = 4;
    GnnModel m = init_params(c);
    m.biases[0](0) = 0.3;
    Rng rng(4, "lin");
    Matrix x(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
    Targets t;
    t.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) t.values(i) = i % 3 == 0 ? 1.0 : -1.0;
    const auto lg = loss_and_grad(m, identity_op(n), x, t, all_indices(static_cast<std::size_t>(n)));
    const Vector resid = x * m.weights[0] + Vector::Constant(n, m.biases[0](0)) - t.values;
    const Matrix expected = (2.0 / static_cast<double>(n)) * x.transpose() * resid;
    CHECK((lg.grads.weights[0] - expected).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(lg.grads.biases[0](0) == doctest::Approx(2.0 / static_cast<double>(n) * resid.sum()));
}

TEST_CASE("optimizer: SGD with lr 1 and gradient equal to the parameters zeroes them") {
    gradcheck::Spec spec;
    spec.dims = {3, 4, 1};
    spec.seed = 2;
    GnnModel m = gradcheck::make_problem(spec).model;
    Gradients g{m.weights, m.biases};
    OptimizerState s = make_sgd(1.0);
    optimizer_step(s, m, g);
    for (std::size_t k = 0; k < m.depth(); ++k) {
        CHECK(m.weights[k].cwiseAbs().maxCoeff() == 0.0);
        CHECK(m.biases[k].cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("optimizer: first Adam step moves each coordinate by about lr") {
    gradcheck::Spec spec;
    spec.dims = {3, 4, 1};
    spec.seed = 3;
    GnnModel m = gradcheck::make_problem(spec).model;
    const GnnModel before = m;
    Gradients g{m.weights, m.biases};
    for (auto& w : g.weights) w.setConstant(0.37);
    for (auto& b : g.biases) b.setConstant(-2.0);
    OptimizerState s = make_adam(0.01);
    optimizer_step(s, m, g);
    CHECK(s.step_count == 1);
    for (std::size_t k = 0; k < m.depth(); ++k) {
        CHECK(((before.weights[k] - m.weights[k]).array() - 0.01).abs().maxCoeff() < 1e-8);
        CHECK(((m.biases[k] - before.biases[k]).array() - 0.01).abs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("optimizer: zero gradient leaves the model unchanged") {
    gradcheck::Spec spec;
    spec.dims = {3, 4, 1};
    spec.seed = 8;
    const GnnModel start = gradcheck::make_problem(spec).model;
    Gradients zero{start.weights, start.biases};
    for (auto& w : zero.weights) w.setZero();
    for (auto& b : zero.biases) b.setZero();
    for (OptimizerState s : {make_sgd(0.5), make_adam(0.5)}) {
        GnnModel m = start;
        optimizer_step(s, m, zero);
        CHECK(s.step_count == 1);
        for (std::size_t k = 0; k < m.depth(); ++k) {
            CHECK(m.weights[k] == start.weights[k]);
            CHECK(m.biases[k] == start.biases[k]);
        }
    }
}

TEST_CASE("init: zero scale, determinism, uniform range") {
    GnnConfig c;
    c.layer_dims = {100, 100, 1};
    c.init_scale = 0.0;
    const auto zero = measure_param_norms(init_params(c));
    CHECK(zero.omega == 0.0);
    CHECK(zero.beta == 0.0);

    c.init_scale = 1.0;
    c.seed = 12;
    const GnnModel a = init_params(c), b = init_params(c);
    for (std::size_t k = 0; k < a.depth(); ++k) CHECK(a.weights[k] == b.weights[k]);
    CHECK(a.num_parameters() == 100 * 100 + 100 + 100 + 1);

    const Matrix& w = a.weights[0];
    const double bound = 1.0 / std::sqrt(100.0);
    CHECK(w.cwiseAbs().maxCoeff() <= bound);
    CHECK(w.cwiseAbs().maxCoeff() > 0.98 * bound);
    CHECK(std::abs(w.mean()) <= 4.0 * bound / std::sqrt(3.0 * 1e4));
    const double var = w.array().square().mean();
    CHECK(std::abs(var - bound * bound / 3.0) <= 0.05 * bound * bound / 3.0);
}

TEST_CASE("config validation") {
    GnnConfig c;
    c.layer_dims = {3};
    CHECK_THROWS(c.validate());
    c.layer_dims = {3, 2};
    CHECK_THROWS(c.validate()); // squared loss needs a scalar head
    c.loss = LossKind::MulticlassNLL;
    CHECK_NOTHROW(c.validate(2));
    CHECK_THROWS(c.validate(3));
    c.residual_alpha = 1.5;
    CHECK_THROWS(c.validate(2));
    c.residual_alpha = 0.5;
    c.layer_dims = {3, 4, 5, 2};
    CHECK_THROWS(c.validate(2));
}

TEST_CASE("evaluate: perfect and constant predictors") {
    GnnConfig c;
    c.layer_dims = {1, 1};
    Targets t;
    t.values.resize(8);
    t.values << 1, -1, 1, -1, 1, -1, 1, -1;
    const IndexList train{0, 1, 2, 3};
    const Matrix perfect = t.values;
    const Metrics mp = evaluate_output(c, perfect, t, train);
    CHECK(mp.train_err01 == 0.0);
    CHECK(mp.unlabeled_err01 == 0.0);
    CHECK(mp.gap_err01 == 0.0);
    CHECK(mp.train_loss == 0.0);

    const Metrics mc = evaluate_output(c, Matrix::Ones(8, 1), t, train);
    CHECK(mc.train_err01 == 0.5);
    CHECK(mc.unlabeled_err01 == 0.5);
    CHECK_THROWS(evaluate_output(c, perfect, t, all_indices(8)));
}

TEST_CASE("evaluate: full loss is the weighted average of the two splits") {
    for (auto loss : {LossKind::SquaredBinary, LossKind::MulticlassNLL}) {
        gradcheck::Spec spec;
        spec.dims = {4, 6, loss == LossKind::SquaredBinary ? std::size_t{1} : std::size_t{3}};
        spec.loss = loss;
        spec.seed = 21;
        const auto p = gradcheck::make_problem(spec, 12);
        const Metrics m = evaluate(p.model, p.s, p.x, p.targets, p.train_idx);
        const double mm = static_cast<double>(p.train_idx.size());
        CHECK(m.full_loss == doctest::Approx((mm * m.train_loss + (12 - mm) * m.unlabeled_loss) / 12).epsilon(1e-12));
        CHECK(m.gap_loss == doctest::Approx(m.unlabeled_loss - m.train_loss));
        CHECK(m.train_err01 >= 0.0);
        CHECK(m.unlabeled_err01 <= 1.0);
    }
}

TEST_CASE("permutation equivariance") {
    gradcheck::Spec spec;
    spec.dims = {4, 5, 5, 3};
    spec.loss = LossKind::MulticlassNLL;
    spec.alpha = 0.3;
    spec.seed = 31;
    const std::size_t n = 9;
    const auto labels = make_latent_labels(10, 5, 3);
    auto p = gradcheck::make_problem(spec, 10);
    Matrix a = sample_adjacency(labels, 0.6, 0.3, 3).topLeftCorner(n, n);
    const Matrix x = p.x.topRows(n);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(static_cast<Eigen::Index>(n));
    std::vector<int> order{3, 7, 0, 8, 1, 5, 2, 6, 4};
    for (std::size_t i = 0; i < n; ++i) perm.indices()(static_cast<Eigen::Index>(i)) = order[i];
    const auto s = build_diffusion(a, DiffusionKind::DegreeNormalized);
    const Matrix pa = perm * a * perm.transpose();
    const auto ps = build_diffusion(pa, DiffusionKind::DegreeNormalized);
    const Matrix out = predict(p.model, s, x);
    const Matrix pout = predict(p.model, ps, perm * x);
    CHECK(((perm * out) - pout).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("training: small learning rate never increases the labeled loss") {
    gradcheck::Spec spec;
    spec.dims = {4, 6, 1};
    spec.seed = 41;
    auto p = gradcheck::make_problem(spec, 12);
    OptimizerState opt = make_sgd(1e-4);
    double prev = loss_and_grad(p.model, p.s, p.x, p.targets, p.train_idx).loss;
    for (int epoch = 0; epoch < 100; ++epoch) {
        const auto lg = loss_and_grad(p.model, p.s, p.x, p.targets, p.train_idx);
        optimizer_step(opt, p.model, lg.grads);
        const double now = loss_and_grad(p.model, p.s, p.x, p.targets, p.train_idx).loss;
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("training: zero learning rate gives constant metrics") {
    const Dataset ds = toy_dataset(20, 1.0, 5, 6);
    GnnConfig c;
    c.layer_dims = {4, 8, 1};
    TrainConfig tc;
    tc.optimizer = make_sgd(0.0);
    tc.epochs = 100;
    tc.eval_every = 10;
    const auto r = train(ds, build_diffusion(ds.adjacency, DiffusionKind::DegreeNormalized), c, tc);
    REQUIRE(r.trajectory.size() == 10);
    for (const auto& pt : r.trajectory) {
        CHECK(pt.metrics.gap_loss == r.trajectory.front().metrics.gap_loss);
        CHECK(pt.metrics.train_loss == r.trajectory.front().metrics.train_loss);
    }
    CHECK(r.trajectory.back().epoch == 100);
}

TEST_CASE("training: separable toy reaches zero training error") {
    const Dataset ds = toy_dataset(20, 0.0, 6, 10);
    const auto s = build_diffusion(ds.adjacency, DiffusionKind::DegreeNormalized);
    // Perceptron oracle on the diffused rows, with a bias column.
    const Matrix sx = s.matrix * ds.features;
    const Vector t = ds.binary_targets();
    Vector w = Vector::Zero(sx.cols() + 1);
    bool separated = false;
    for (int pass = 0; pass < 1000 && !separated; ++pass) {
        separated = true;
        for (std::size_t i : ds.train_idx) {
            Vector row(sx.cols() + 1);
            row << sx.row(static_cast<Eigen::Index>(i)).transpose(), 1.0;
            if (t(static_cast<Eigen::Index>(i)) * w.dot(row) <= 0) {
                w += t(static_cast<Eigen::Index>(i)) * row;
                separated = false;
            }
        }
    }
    REQUIRE(separated);

    GnnConfig c;
    c.layer_dims = {4, 16, 1};
    c.seed = 3;
    TrainConfig tc;
    tc.optimizer = make_sgd(0.01);
    tc.epochs = 2000;
    tc.eval_every = 50;
    const auto r = train(ds, s, c, tc);
    bool reached = false;
    for (const auto& pt : r.trajectory) reached = reached || pt.metrics.train_err01 == 0.0;
    CHECK(reached);
}

TEST_CASE("training: deterministic per seed, divergence is reported") {
    const Dataset ds = toy_dataset(20, 1.0, 7, 6);
    const auto s = build_diffusion(ds.adjacency, DiffusionKind::SelfLoop);
    GnnConfig c;
    c.layer_dims = {4, 8, 1};
    c.seed = 1;
    TrainConfig tc;
    tc.optimizer = make_adam(0.01);
    tc.epochs = 60;
    tc.eval_every = 20;
    const auto a = train(ds, s, c, tc), b = train(ds, s, c, tc);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i)
        CHECK(a.trajectory[i].metrics.gap_loss == b.trajectory[i].metrics.gap_loss);

    tc.optimizer = make_sgd(1e6);
    tc.epochs = 1000;
    CHECK_THROWS_AS(train(ds, s, c, tc), TrainingDiverged);
}

TEST_CASE("measure_param_norms") {
    GnnConfig c;
    c.layer_dims = {2, 2};
    c.loss = LossKind::MulticlassNLL;
    GnnModel m = init_params(c);
    m.weights[0] << 1, -2, 0, 3;
    m.biases[0] << 0.5, -0.25;
    const auto pn = measure_param_norms(m);
    CHECK(pn.omega == 3.0);
    CHECK(pn.beta == 0.75);

    gradcheck::Spec spec;
    spec.dims = {4, 6, 6, 1};
    spec.seed = 55;
    const auto model = gradcheck::make_problem(spec).model;
    double omega = 0, beta = 0;
    for (std::size_t k = 0; k < model.depth(); ++k) {
        omega = std::max(omega, inf_norm(model.weights[k]));
        beta = std::max(beta, model.biases[k].lpNorm<1>());
    }
    CHECK(measure_param_norms(model).omega == omega);
    CHECK(measure_param_norms(model).beta == doctest::Approx(beta).epsilon(1e-15));
}

TEST_CASE("checkpoint round trip is exact") {
    gradcheck::Spec spec;
    spec.dims = {4, 5, 5, 3};
    spec.loss = LossKind::MulticlassNLL;
    spec.alpha = 0.2;
    spec.activation = Activation::Identity;
    spec.seed = 99;
    GnnModel m = gradcheck::make_problem(spec).model;
    m.config.init_scale = 0.75;
    m.config.linear_last_layer = true;
    const auto path = (std::filesystem::temp_directory_path() / "gnnlab_test_model.bin").string();
    save_model(m, path);
    const GnnModel back = load_model(path);
    CHECK(back.config.layer_dims == m.config.layer_dims);
    CHECK(back.config.activation == m.config.activation);
    CHECK(back.config.loss == m.config.loss);
    CHECK(back.config.residual_alpha == m.config.residual_alpha);
    CHECK(back.config.linear_last_layer == m.config.linear_last_layer);
    CHECK(back.config.init_scale == m.config.init_scale);
    CHECK(back.config.seed == m.config.seed);
    for (std::size_t k = 0; k < m.depth(); ++k) {
        CHECK(back.weights[k] == m.weights[k]);
        CHECK(back.biases[k] == m.biases[k]);
    }

    {
        std::ofstream out(path, std::ios::binary);
        out << "not a checkpoint";
    }
    CHECK_THROWS(load_model(path));
    save_model(m, path);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
    CHECK_THROWS(load_model(path));
    std::filesystem::remove(path);
    CHECK_THROWS(load_model(path));
}

TEST_CASE("activation and loss names round trip") {
    for (auto a : {Activation::Identity, Activation::ReLU}) CHECK(parse_activation(to_string(a)) == a);
    for (auto l : {LossKind::SquaredBinary, LossKind::MulticlassNLL}) CHECK(parse_loss_kind(to_string(l)) == l);
    CHECK_THROWS(parse_activation("tanh"));
}
