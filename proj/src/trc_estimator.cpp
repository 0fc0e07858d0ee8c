#include "gnnlab/trc_estimator.hpp"

#include "gnnlab/parallel.hpp"
#include "gnnlab/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gnnlab {

double default_p_sigma(std::size_t n, std::size_t m) {
    if (m == 0 || m >= n) throw std::invalid_argument("need 0 < m < n");
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return mm * (nn - mm) / (nn * nn);
}

double trc_prefactor(std::size_t n, std::size_t m) {
    if (m == 0 || m >= n) throw std::invalid_argument("need 0 < m < n");
    return 1.0 / static_cast<double>(m) + 1.0 / static_cast<double>(n - m);
}

Vector sample_sigma(const SigmaSampler& sampler, std::uint64_t draw) {
    if (!(sampler.p_sigma >= 0.0 && sampler.p_sigma <= 0.5))
        throw std::invalid_argument("p_sigma must lie in [0, 0.5]");
    Rng rng = Rng(sampler.seed, "sigma").split(draw);
    Vector sigma(static_cast<Eigen::Index>(sampler.n));
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        const double u = rng.uniform();
        sigma(i) = u < sampler.p_sigma ? 1.0 : (u < 2.0 * sampler.p_sigma ? -1.0 : 0.0);
    }
    return sigma;
}

TrcEstimate estimate_trc(const Matrix& outputs, const TrcEstimateOptions& options) {
    const auto n = static_cast<std::size_t>(outputs.rows());
    if (outputs.cols() == 0) throw std::invalid_argument("hypothesis set is empty");
    if (options.num_sigma == 0) throw std::invalid_argument("need at least one sigma draw");
    const double q = trc_prefactor(n, options.m);
    const double p = options.p_sigma.value_or(default_p_sigma(n, options.m));
    const SigmaSampler sampler{n, p, options.seed};

    TrcEstimate est;
    est.num_sigma_draws = options.num_sigma;
    est.num_hypothesis_samples = static_cast<std::size_t>(outputs.cols());
    est.p_sigma = p;
    est.per_draw.assign(options.num_sigma, 0.0);
    parallel_for(options.num_sigma, options.jobs, [&](std::size_t draw) {
        const Vector sigma = sample_sigma(sampler, draw);
        est.per_draw[draw] = q * (sigma.transpose() * outputs).maxCoeff();
    });

    double sum = 0.0;
    for (double v : est.per_draw) sum += v;
    est.mean = sum / static_cast<double>(options.num_sigma);
    if (options.num_sigma > 1) {
        double ss = 0.0;
        for (double v : est.per_draw) ss += (v - est.mean) * (v - est.mean);
        const double var = ss / static_cast<double>(options.num_sigma - 1);
        est.standard_error = std::sqrt(var / static_cast<double>(options.num_sigma));
    }
    return est;
}

std::vector<GnnModel> sample_norm_ball_models(const GnnConfig& shape, double omega, double beta,
                                              std::size_t num_models, std::uint64_t seed) {
    if (num_models == 0) throw std::invalid_argument("need at least one model");
    if (!(omega >= 0.0 && beta >= 0.0)) throw std::invalid_argument("norm radii must be non-negative");
    shape.validate();
    const Rng base(seed, "hypotheses");
    std::vector<GnnModel> models;
    models.reserve(num_models);
    for (std::size_t j = 0; j < num_models; ++j) {
        Rng rng = base.split(j);
        GnnModel model;
        model.config = shape;
        for (std::size_t k = 1; k < shape.layer_dims.size(); ++k) {
            const auto rows = static_cast<Eigen::Index>(shape.layer_dims[k - 1]);
            const auto cols = static_cast<Eigen::Index>(shape.layer_dims[k]);
            Matrix w(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-1.0, 1.0);
            Vector b(cols);
            for (Eigen::Index c = 0; c < cols; ++c) b(c) = rng.uniform(-1.0, 1.0);
            const double w_norm = inf_norm(w);
            const double b_norm = b.lpNorm<1>();
            w = w_norm > 0.0 ? Matrix(w * (omega / w_norm)) : Matrix::Zero(rows, cols);
            b = b_norm > 0.0 ? Vector(b * (beta / b_norm)) : Vector::Zero(cols);
            model.weights.push_back(std::move(w));
            model.biases.push_back(std::move(b));
        }
        models.push_back(std::move(model));
    }
    return models;
}

TrcEstimate empirical_trc_lower(const DiffusionOperator& s, const Matrix& x, const std::vector<GnnModel>& models,
                                const TrcEstimateOptions& options) {
    if (models.empty()) throw std::invalid_argument("need at least one model");
    Matrix outputs(x.rows(), static_cast<Eigen::Index>(models.size()));
    for (std::size_t j = 0; j < models.size(); ++j) {
        const Matrix out = predict(models[j], s, x);
        if (out.cols() != 1) throw std::invalid_argument("TRC estimation needs a scalar output layer");
        outputs.col(static_cast<Eigen::Index>(j)) = out.col(0);
    }
    return estimate_trc(outputs, options);
}

TrcEstimate empirical_trc_lower(const DiffusionOperator& s, const Matrix& x, double omega, double beta,
                                const GnnConfig& shape, std::size_t num_models, const TrcEstimateOptions& options) {
    if (shape.layer_dims.empty() || shape.layer_dims.back() != 1)
        throw std::invalid_argument("TRC estimation needs a scalar output layer");
    return empirical_trc_lower(s, x, sample_norm_ball_models(shape, omega, beta, num_models, options.seed), options);
}

FiniteSetCheck finite_set_rademacher_check(const std::vector<Vector>& vectors, const TrcEstimateOptions& options) {
    if (vectors.empty()) throw std::invalid_argument("finite set must be nonempty");
    const Eigen::Index dim = vectors.front().size();
    Matrix set(dim, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t j = 0; j < vectors.size(); ++j) {
        if (vectors[j].size() != dim) throw std::invalid_argument("finite set vectors differ in length");
        set.col(static_cast<Eigen::Index>(j)) = vectors[j];
    }
    const TrcEstimate est = estimate_trc(set, options);

    const Vector centre = set.rowwise().mean();
    double radius = 0.0;
    for (Eigen::Index j = 0; j < set.cols(); ++j) radius = std::max(radius, (set.col(j) - centre).norm());

    FiniteSetCheck out;
    out.empirical_value = est.mean;
    out.standard_error = est.standard_error;
    out.lemma_bound =
        radius * std::sqrt(2.0 * std::log(static_cast<double>(vectors.size())) / static_cast<double>(dim));
    if (out.empirical_value <= 0.0)
        out.ratio = 0.0;
    else if (out.lemma_bound == 0.0)
        out.ratio = std::numeric_limits<double>::infinity();
    else
        out.ratio = out.empirical_value / out.lemma_bound;
    out.flagged = out.ratio > 1.0;
    return out;
}

} // namespace gnnlab
