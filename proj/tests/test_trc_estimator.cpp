#include "doctest.h"

#include "gnnlab/bounds.hpp"
#include "gnnlab/gnn.hpp"
#include "gnnlab/graph_ops.hpp"
#include "gnnlab/planted.hpp"
#include "gnnlab/rng.hpp"
#include "gnnlab/trc_estimator.hpp"
#include "oracles.hpp"

#include <cmath>
#include <vector>

using namespace gnnlab;

namespace {

Matrix random_set(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
    Rng rng(seed, "set");
    Matrix a(n, count);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < count; ++j) a(i, j) = rng.normal();
    return a;
}

TrcEstimateOptions opts(std::size_t m, std::size_t draws, std::uint64_t seed) {
    TrcEstimateOptions o;
    o.m = m;
    o.num_sigma = draws;
    o.seed = seed;
    return o;
}

// Zero weights and a constant bias c give the constant output c * 1.
GnnModel constant_model(std::size_t d, double c) {
    GnnConfig cfg;
    cfg.layer_dims = {d, 1};
    cfg.init_scale = 0.0;
    GnnModel m = init_params(cfg);
    m.biases[0](0) = c;
    return m;
}

} // namespace

TEST_CASE("prefactor and default sign probability") {
    CHECK(trc_prefactor(10, 4) == doctest::Approx(1.0 / 4 + 1.0 / 6));
    CHECK(default_p_sigma(10, 4) == doctest::Approx(0.24));
    CHECK(default_p_sigma(10, 5) == doctest::Approx(0.25));
    CHECK_THROWS(trc_prefactor(10, 0));
    CHECK_THROWS(default_p_sigma(10, 10));
}

TEST_CASE("sample_sigma: degenerate probabilities") {
    CHECK(sample_sigma({50, 0.0, 1}).isZero(0.0));
    const Vector full = sample_sigma({500, 0.5, 2});
    for (Eigen::Index i = 0; i < full.size(); ++i) CHECK(std::abs(full(i)) == 1.0);
    CHECK_THROWS(sample_sigma({5, 0.6, 0}));
    CHECK_THROWS(sample_sigma({5, -0.1, 0}));
}

TEST_CASE("sample_sigma: counts within multinomial bands") {
    const Vector s = sample_sigma({10000, 0.25, 3});
    double plus = 0, minus = 0, zero = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > 0) ++plus;
        else if (s(i) < 0) ++minus;
        else ++zero;
    }
    const double sd_quarter = std::sqrt(10000 * 0.25 * 0.75);
    const double sd_half = std::sqrt(10000 * 0.5 * 0.5);
    CHECK(std::abs(plus - 2500) <= 5 * sd_quarter);
    CHECK(std::abs(minus - 2500) <= 5 * sd_quarter);
    CHECK(std::abs(zero - 5000) <= 5 * sd_half);
}

TEST_CASE("sample_sigma: draws are distinct and reproducible") {
    const SigmaSampler s{200, 0.3, 9};
    CHECK(sample_sigma(s, 0) == sample_sigma(s, 0));
    CHECK(sample_sigma(s, 0) != sample_sigma(s, 1));
}

TEST_CASE("zero model class has zero complexity") {
    const auto labels = make_latent_labels(20, 10, 1);
    const auto s = build_diffusion(sample_adjacency(labels, 0.5, 0.1, 1), DiffusionKind::DegreeNormalized);
    const Matrix x = random_set(20, 3, 2);
    GnnConfig shape;
    shape.layer_dims = {3, 4, 1};
    const auto est = empirical_trc_lower(s, x, 0.0, 0.0, shape, 5, opts(5, 200, 3));
    CHECK(est.mean == 0.0);
    CHECK(est.standard_error == 0.0);
    CHECK(est.num_hypothesis_samples == 5);
    CHECK(est.num_sigma_draws == 200);
}

TEST_CASE("constant class {+c1, -c1} matches an independent Monte Carlo of E|sum sigma|") {
    const std::size_t n = 60, m = 15;
    const double c = 0.7;
    const Matrix x = Matrix::Ones(static_cast<Eigen::Index>(n), 2);
    const DiffusionOperator s{DiffusionKind::Identity, Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    const std::vector<GnnModel> models{constant_model(2, c), constant_model(2, -c)};
    const auto est = empirical_trc_lower(s, x, models, opts(m, 20000, 5));
    const double p = default_p_sigma(n, m);
    const auto mc = oracle::abs_sign_sum_mc(n, p, 20000, 77);
    const double q = trc_prefactor(n, m);
    const double target = q * c * mc.mean;
    const double se = std::sqrt(est.standard_error * est.standard_error + std::pow(q * c * mc.standard_error, 2));
    CHECK(std::abs(est.mean - target) <= 3 * se);
}

TEST_CASE("finite sets: singletons and the two-point set") {
    const std::size_t n = 10, m = 4;
    const auto zero = finite_set_rademacher_check({Vector::Zero(n)}, opts(m, 500, 1));
    CHECK(zero.empirical_value == 0.0);
    CHECK(zero.ratio == 0.0);
    CHECK_FALSE(zero.flagged);

    Vector e1 = Vector::Zero(n);
    e1(0) = 1;
    const double q = trc_prefactor(n, m), p = default_p_sigma(n, m);
    // sup over {e_1} is sigma_1, whose mean is 0.
    const auto single = estimate_trc(e1, opts(m, 40000, 2));
    CHECK(std::abs(single.mean) <= 4 * single.standard_error);
    // sup over {0, e_1} is max(0, sigma_1), whose mean is p.
    Matrix pair(n, 2);
    pair << Vector::Zero(n), e1;
    const auto two = estimate_trc(pair, opts(m, 40000, 3));
    CHECK(std::abs(two.mean - q * p) <= 4 * two.standard_error);
}

TEST_CASE("finite sets: random set ratio is recorded and flagged consistently") {
    std::vector<Vector> set;
    const Matrix a = random_set(30, 10, 4);
    for (Eigen::Index j = 0; j < 10; ++j) set.push_back(a.col(j));
    const auto r = finite_set_rademacher_check(set, opts(10, 2000, 5));
    CHECK(r.lemma_bound > 0.0);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio >= 0.0);
    CHECK(r.flagged == (r.ratio > 1.0));
    CHECK_THROWS(finite_set_rademacher_check({}, opts(10, 10, 0)));
}

TEST_CASE("contraction: a 1-Lipschitz map does not raise the estimate") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix a = random_set(40, 25, seed);
        const Matrix relu = a.cwiseMax(0.0);
        const Matrix clipped = a.cwiseMax(-0.5).cwiseMin(0.5);
        const auto o = opts(10, 4000, 100 + seed);
        const auto base = estimate_trc(a, o);
        for (const Matrix* mapped : {&relu, &clipped}) {
            const auto est = estimate_trc(*mapped, o);
            // Paired differences share sigma draws.
            double mean = 0, ss = 0;
            const auto nd = static_cast<double>(o.num_sigma);
            for (std::size_t t = 0; t < o.num_sigma; ++t) mean += est.per_draw[t] - base.per_draw[t];
            mean /= nd;
            for (std::size_t t = 0; t < o.num_sigma; ++t) {
                const double dlt = est.per_draw[t] - base.per_draw[t] - mean;
                ss += dlt * dlt;
            }
            const double se = std::sqrt(ss / (nd - 1) / nd);
            CHECK(mean <= 3 * se);
        }
    }
}

TEST_CASE("addition: singleton classes add per draw") {
    const Matrix a = random_set(30, 1, 1), b = random_set(30, 1, 2);
    const auto o = opts(7, 300, 4);
    const auto ea = estimate_trc(a, o), eb = estimate_trc(b, o), esum = estimate_trc(a + b, o);
    for (std::size_t t = 0; t < o.num_sigma; ++t)
        CHECK(esum.per_draw[t] == doctest::Approx(ea.per_draw[t] + eb.per_draw[t]).epsilon(1e-12));
    CHECK(esum.mean == doctest::Approx(ea.mean + eb.mean).epsilon(1e-12));
}

TEST_CASE("scalar multiplication: symmetric classes scale by |c|") {
    const Matrix half = random_set(25, 6, 3);
    Matrix sym(25, 12);
    sym << half, -half;
    const auto o = opts(5, 300, 8);
    const auto base = estimate_trc(sym, o);
    for (double c : {2.5, -2.5, 0.3}) {
        const auto scaled = estimate_trc(c * sym, o);
        for (std::size_t t = 0; t < o.num_sigma; ++t)
            CHECK(scaled.per_draw[t] == doctest::Approx(std::abs(c) * base.per_draw[t]).epsilon(1e-12));
    }
}

TEST_CASE("norm-ball models sit on the boundary") {
    GnnConfig shape;
    shape.layer_dims = {6, 5, 5, 1};
    const auto models = sample_norm_ball_models(shape, 0.3, 0.2, 8, 11);
    REQUIRE(models.size() == 8);
    for (const auto& m : models)
        for (std::size_t k = 0; k < m.depth(); ++k) {
            CHECK(inf_norm(m.weights[k]) == doctest::Approx(0.3).epsilon(1e-12));
            CHECK(m.biases[k].lpNorm<1>() == doctest::Approx(0.2).epsilon(1e-12));
        }
    const auto zero = sample_norm_ball_models(shape, 0.0, 0.0, 2, 1);
    CHECK(measure_param_norms(zero[0]).omega == 0.0);
    CHECK(measure_param_norms(zero[1]).beta == 0.0);
    CHECK(sample_norm_ball_models(shape, 0.3, 0.2, 8, 11)[3].weights[1] == models[3].weights[1]);
}

TEST_CASE("estimate requires a scalar head") {
    GnnConfig shape;
    shape.layer_dims = {3, 2};
    shape.loss = LossKind::MulticlassNLL;
    const Matrix x = random_set(10, 3, 1);
    const DiffusionOperator s{DiffusionKind::Identity, Matrix::Identity(10, 10)};
    CHECK_THROWS(empirical_trc_lower(s, x, 0.1, 0.1, shape, 3, opts(3, 10, 0)));
}

TEST_CASE("estimate is independent of the job count") {
    const Matrix a = random_set(30, 8, 6);
    auto o = opts(9, 500, 12);
    const auto one = estimate_trc(a, o);
    o.jobs = 4;
    const auto four = estimate_trc(a, o);
    CHECK(one.per_draw == four.per_draw);
    CHECK(one.mean == four.mean);
}

TEST_CASE("lower estimate never exceeds the upper bound on small planted instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        PlantedConfig pc;
        pc.n = 60;
        pc.d = 5;
        pc.p = 0.3;
        pc.q = 0.05;
        pc.gamma_target = 30;
        pc.mu = sample_mu(5, 1.0, seed);
        pc.seed = seed;
        const Dataset ds = generate_planted(pc, 12);
        const auto s = build_diffusion(ds.adjacency, seed % 2 ? DiffusionKind::SelfLoop : DiffusionKind::DegreeNormalized);
        GnnConfig shape;
        shape.layer_dims = {5, 8, 1};
        const auto models = sample_norm_ball_models(shape, 0.2, 0.1, 16, seed);
        const auto est = empirical_trc_lower(s, ds.features, models, opts(12, 300, seed));
        ParamNorms measured;
        for (const auto& m : models) {
            const auto pn = measure_param_norms(m);
            measured.omega = std::max(measured.omega, pn.omega);
            measured.beta = std::max(measured.beta, pn.beta);
        }
        BoundInputs in;
        in.n = 60;
        in.m = 12;
        in.K = 2;
        in.d = 5;
        in.omega = measured.omega;
        in.beta = measured.beta;
        in.s_inf = inf_norm(s.matrix);
        in.sx_2inf = max_col_two_norm(s.matrix * ds.features);
        CHECK(est.mean <= trc_upper(in));
    }
}
