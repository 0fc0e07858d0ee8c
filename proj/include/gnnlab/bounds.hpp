#ifndef GNNLAB_BOUNDS_HPP
#define GNNLAB_BOUNDS_HPP

#include "gnnlab/graph_ops.hpp"
#include "gnnlab/types.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace gnnlab {

/// Absolute constants of the transductive slack terms (their stated suprema).
inline constexpr double kC4 = 5.05;
inline constexpr double kC5 = 0.8;

/// Norm ball radii, graph norms and sizes entering the TRC bound.
/// All logarithms are natural.
struct BoundInputs {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t K = 1;
    std::size_t d = 1;
    double lipschitz = 1.0;
    double omega = 0.0;   ///< bound on ||W_k||_inf
    double beta = 0.0;    ///< bound on ||b_k||_1
    double s_inf = 0.0;   ///< ||S||_inf
    double sx_2inf = 0.0; ///< max column 2-norm of S X
    double x_inf = 0.0;   ///< ||X||_inf, residual bound only
    double delta = 0.05;

    [[nodiscard]] double c1() const { return 2.0 * lipschitz * beta; }
    [[nodiscard]] double c2() const { return 2.0 * lipschitz * omega; }
    [[nodiscard]] double c3() const;
    void validate() const;
};

enum class VcKind { Linear, ReLUUpper };

struct VcDimension {
    std::size_t value = 0;
    bool is_upper_bound = false; ///< true for the ReLU case
};

/// Linear: min{d, rank S, min hidden}; ReLUUpper: min{rank S, d_{K-1}}.
/// With no hidden layers d_{K-1} = d_0 = d.
VcDimension vc_dimension(VcKind kind, std::size_t d, std::size_t rank_s, std::span<const std::size_t> hidden_dims);

/// sqrt(8/m (cap ln(e m) + ln(4/delta))).
double vc_gap_bound(std::size_t m, double cap, double delta);

/// Upper bound on the transductive Rademacher complexity of the norm-restricted GNN class.
double trc_upper(const BoundInputs& in);

struct GapSlack {
    double c4_term = 0;
    double c5_term = 0;
    [[nodiscard]] double total() const { return c4_term + c5_term; }
};

GapSlack gen_gap_slack(std::size_t n, std::size_t m, double delta);

/// TRC bound for the alpha-interpolated residual network.
double residual_trc_upper(const BoundInputs& in, double alpha, double x_inf);

/// Planted-model view for the expected-TRC bound. c6..c8 stand for the
/// (1 + o(1)) factors and default to 1.
struct ExpectedTrcConfig {
    std::size_t n = 500;
    double p = 0.2;
    double q = 0.01;
    double gamma = 500;
    double mu_inf = 1.0;
    double sigma = 1.0;
    std::size_t d = 100;
    std::size_t K = 1;
    double omega = 0.1;
    double beta = 0.1;
    double lipschitz = 1.0;
    double c6 = 1.0;
    double c7 = 1.0;
    double c8 = 1.0;

    /// The bound assumes p, q >> (ln n)^2 / n; true when that fails.
    [[nodiscard]] bool outside_asymptotic_regime() const;
};

struct ExpectedTrc {
    double value = 0;
    double graph_term = 0;   ///< the geometric-sum (bias) part
    double feature_term = 0; ///< the ||SX|| part
    bool regime_warning = false;
};

/// Expected TRC under 2SBM + 2GMM for the self-loop or degree-normalized operator,
/// evaluated exactly as stated, including the squared (p+q)/2 denominator and
/// sqrt(sigma (1 + 2 ln d) / q) in the degree-normalized case.
ExpectedTrc expected_trc_sbm(const ExpectedTrcConfig& config, DiffusionKind kind, std::size_t m);

/// max column 2-norm of (E[A] + I) z mu^T for balanced y, z with |y'z| = gamma:
///   mu_inf * sqrt(n(1-p)^2 + n(p-q)^2 gamma^2 / 4 + (p-q)(1-p) gamma^2).
/// Throws std::domain_error when the radicand is negative (only possible for q > p).
double deterministic_sx_norm(std::size_t n, double p, double q, double gamma, double mu_inf);

/// Rows of the concentration table.
enum class NormRow {
    SxDeterministic, ///< ||S_exp X_exp||
    SmSX,            ///< (S - S_exp) X_exp
    XmXS,            ///< S (X - X_exp)
    SInfPow,         ///< ||S||_inf^k
};

std::string to_string(NormRow row);

struct NormTableParams {
    std::size_t n = 500;
    double p = 0.2;
    double q = 0.01;
    double gamma = 500;
    double mu_inf = 1.0;
    double sigma = 1.0;
    std::size_t d = 100;
};

struct NormTableEntry {
    double value = 0;
    /// The entry bounds E[norm^moment]; 0 marks a deterministic quantity.
    int moment = 1;
};

/// Concentration table entries with C = 1.
///   SxDeterministic  loop: mu n (1 + ((p-q)/2)^2 g^2)          nor: mu (1 + ((p-q)/2)^2 g^2) / ((p+q)/2)
///   SmSX             loop: n sqrt((p+q)/2) mu   (1st moment)   nor: n ln n / (1 + (n-1) q) mu  (2nd)
///   XmXS             loop: n^2 p s^2 (1 + 2 ln d) (2nd)         nor: s^2 (1 + 2 ln d) / q       (2nd)
///   SInfPow          loop: (n p)^k                              nor: (p/q)^{k/2}               (k-th)
NormTableEntry expected_norm_table(NormRow row, DiffusionKind kind, const NormTableParams& params, int k = 1);

struct DiffusionComparison {
    double identity_bound = 0;
    double normalized_bound = 0;
    bool graph_helps = false; ///< normalized_bound < identity_bound, ties count as false
    /// n / sqrt(n rho + n) with rho = (p+q)/2; informational only.
    double gamma_threshold_annotation = 0;
};

/// TRC bound with S = I versus the expected degree-normalized operator, both
/// evaluated on the noiseless features z mu^T.
DiffusionComparison compare_diffusion_bounds(const ExpectedTrcConfig& config, std::size_t m, std::size_t K);

enum class ParamSource { Fixed, Measured };

std::string to_string(ParamSource source);

/// Everything the bounds CLI reports for one (graph, features, model) triple.
struct BoundReport {
    std::size_t n = 0, m = 0, K = 0, d = 0;
    std::string diffusion;
    ParamSource param_source = ParamSource::Fixed;
    double lipschitz = 1, omega = 0, beta = 0, delta = 0.05;
    double s_inf = 0, sx_2inf = 0, x_inf = 0;
    std::size_t rank_s = 0;
    double c1 = 0, c2 = 0, c3 = 0, c4 = kC4, c5 = kC5;
    std::size_t vc_cap = 0;
    double vc_gap_bound = 0;
    double trc_upper = 0;
    double slack_c4_term = 0;
    double slack_c5_term = 0;
    double total_gap_bound = 0; ///< trc_upper + both slack terms
};

struct BoundRequest {
    std::size_t m = 0;
    std::size_t K = 1;
    std::size_t last_hidden_width = 0; ///< d_{K-1}
    double lipschitz = 1.0;
    double omega = 0.1;
    double beta = 0.1;
    double delta = 0.05;
    ParamSource source = ParamSource::Fixed;
};

BoundReport compute_bound_report(const DiffusionOperator& s, const Matrix& x, const BoundRequest& request);

} // namespace gnnlab

#endif // GNNLAB_BOUNDS_HPP
