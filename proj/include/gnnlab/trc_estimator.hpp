#ifndef GNNLAB_TRC_ESTIMATOR_HPP
#define GNNLAB_TRC_ESTIMATOR_HPP

#include "gnnlab/gnn.hpp"
#include "gnnlab/graph_ops.hpp"
#include "gnnlab/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gnnlab {

/// Three-point signs: +1 and -1 with probability p_sigma each, 0 otherwise.
struct SigmaSampler {
    std::size_t n = 0;
    double p_sigma = 0.25;
    std::uint64_t seed = 0;
};

/// m(n-m)/n^2.
double default_p_sigma(std::size_t n, std::size_t m);
/// 1/m + 1/(n-m).
double trc_prefactor(std::size_t n, std::size_t m);

/// The draw-th sign vector of the sampler; draws are independent streams.
Vector sample_sigma(const SigmaSampler& sampler, std::uint64_t draw = 0);

struct TrcEstimate {
    double mean = 0;
    double standard_error = 0;
    std::size_t num_sigma_draws = 0;
    std::size_t num_hypothesis_samples = 0;
    double p_sigma = 0;
    /// Q * max_v sigma'v for every draw, in draw order.
    std::vector<double> per_draw;
};

struct TrcEstimateOptions {
    std::size_t m = 0;
    std::size_t num_sigma = 1000;
    std::optional<double> p_sigma; ///< defaults to m(n-m)/n^2
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

/// Q E_sigma[max_j sigma' outputs.col(j)] by Monte Carlo. Columns are the
/// hypothesis vectors, each of length n.
TrcEstimate estimate_trc(const Matrix& outputs, const TrcEstimateOptions& options);

/// Draws `num_models` parameter sets with ||W_k||_inf = omega and ||b_k||_1 = beta
/// exactly, using the layer shapes of `shape`.
std::vector<GnnModel> sample_norm_ball_models(const GnnConfig& shape, double omega, double beta,
                                              std::size_t num_models, std::uint64_t seed);

/// Lower estimate of the TRC of the (omega, beta)-restricted class: the sup
/// runs over a random finite subset of it. The output layer must be scalar.
TrcEstimate empirical_trc_lower(const DiffusionOperator& s, const Matrix& x, double omega, double beta,
                                const GnnConfig& shape, std::size_t num_models, const TrcEstimateOptions& options);

/// Same estimate over an explicit model list.
TrcEstimate empirical_trc_lower(const DiffusionOperator& s, const Matrix& x, const std::vector<GnnModel>& models,
                                const TrcEstimateOptions& options);

struct FiniteSetCheck {
    double empirical_value = 0;
    double standard_error = 0;
    double lemma_bound = 0; ///< max_a ||a - mean||_2 sqrt(2 ln|A| / dim)
    double ratio = 0;       ///< empirical / bound; infinite if the bound is 0 but the value is not
    bool flagged = false;   ///< ratio > 1
};

/// Compares the Monte Carlo TRC of a finite vector set with the cardinality
/// lemma's right-hand side. Diagnostic only.
FiniteSetCheck finite_set_rademacher_check(const std::vector<Vector>& vectors, const TrcEstimateOptions& options);

} // namespace gnnlab

#endif // GNNLAB_TRC_ESTIMATOR_HPP
