#include "gnnlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnnlab {

namespace {

double geometric_sum(double ratio, std::size_t terms) {
    // sum_{k=0}^{terms-1} ratio^k with 0^0 = 1
    double total = 0.0, power = 1.0;
    for (std::size_t k = 0; k < terms; ++k) {
        total += power;
        power *= ratio;
    }
    return total;
}

double transductive_factor(std::size_t n, std::size_t m) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return nn * nn / (mm * (nn - mm));
}

void check_split(std::size_t n, std::size_t m) {
    if (m == 0 || m >= n) throw std::invalid_argument("bounds require 0 < m < n");
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

} // namespace

double BoundInputs::c3() const { return lipschitz * omega * std::sqrt(2.0 / static_cast<double>(d)); }

void BoundInputs::validate() const {
    check_split(n, m);
    if (K == 0) throw std::invalid_argument("K must be at least 1");
    if (d == 0) throw std::invalid_argument("d must be positive");
    if (omega < 0 || beta < 0 || s_inf < 0 || sx_2inf < 0 || x_inf < 0 || lipschitz < 0)
        throw std::invalid_argument("norms and constants must be non-negative");
}

VcDimension vc_dimension(VcKind kind, std::size_t d, std::size_t rank_s, std::span<const std::size_t> hidden_dims) {
    if (kind == VcKind::Linear) {
        std::size_t v = std::min(d, rank_s);
        for (std::size_t h : hidden_dims) v = std::min(v, h);
        return {v, false};
    }
    const std::size_t last_hidden = hidden_dims.empty() ? d : hidden_dims.back();
    return {std::min(rank_s, last_hidden), true};
}

double vc_gap_bound(std::size_t m, double cap, double delta) {
    if (m == 0) throw std::invalid_argument("vc_gap_bound needs m >= 1");
    if (cap < 0) throw std::invalid_argument("VC capacity must be non-negative");
    check_delta(delta);
    const double mm = static_cast<double>(m);
    return std::sqrt(8.0 / mm * (cap * std::log(std::exp(1.0) * mm) + std::log(4.0 / delta)));
}

double trc_upper(const BoundInputs& in) {
    in.validate();
    const double ratio = in.c2() * in.s_inf;
    const double graph = in.c1() * transductive_factor(in.n, in.m) * geometric_sum(ratio, in.K);
    const double feature = in.c3() * std::pow(ratio, static_cast<double>(in.K)) * in.sx_2inf *
                           std::sqrt(std::log(static_cast<double>(in.n)));
    return graph + feature;
}

GapSlack gen_gap_slack(std::size_t n, std::size_t m, double delta) {
    check_split(n, m);
    check_delta(delta);
    const double nn = static_cast<double>(n), mm = static_cast<double>(m), uu = nn - mm;
    GapSlack s;
    s.c4_term = kC4 * nn * std::sqrt(std::min(mm, uu)) / (mm * uu);
    s.c5_term = kC5 * std::sqrt(nn / (mm * uu) * std::log(1.0 / delta));
    return s;
}

double residual_trc_upper(const BoundInputs& in, double alpha, double x_inf) {
    in.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (x_inf < 0) throw std::invalid_argument("x_inf must be non-negative");
    const double keep = 1.0 - alpha;
    const double anchor = alpha * 2.0 * in.lipschitz * x_inf;
    const double ratio = in.c2() * in.s_inf;
    const double graph =
        (keep * in.c1() + anchor) * transductive_factor(in.n, in.m) * (keep * geometric_sum(ratio, in.K));
    const double feature = keep * in.c3() * std::pow(ratio, static_cast<double>(in.K)) * in.sx_2inf *
                           std::sqrt(std::log(static_cast<double>(in.n)));
    return graph + anchor + feature;
}

bool ExpectedTrcConfig::outside_asymptotic_regime() const {
    const double ln = std::log(static_cast<double>(n));
    const double threshold = ln * ln / static_cast<double>(n);
    return p <= threshold || q <= threshold;
}

ExpectedTrc expected_trc_sbm(const ExpectedTrcConfig& c, DiffusionKind kind, std::size_t m) {
    check_split(c.n, m);
    if (c.K == 0 || c.d == 0) throw std::invalid_argument("K and d must be positive");
    const double n = static_cast<double>(c.n);
    const double lnn = std::log(n);
    const double lnd = std::log(static_cast<double>(c.d));
    const double c1 = 2.0 * c.lipschitz * c.beta;
    const double c2 = 2.0 * c.lipschitz * c.omega;
    const double c3 = c.lipschitz * c.omega * std::sqrt(2.0 / static_cast<double>(c.d));
    const double half_diff = (c.p - c.q) / 2.0;
    const double half_sum = (c.p + c.q) / 2.0;
    const double align = 1.0 + half_diff * half_diff * c.gamma * c.gamma;

    double norm_growth = 0.0; // E||S||_inf surrogate per layer
    double feature_norm = 0.0;
    switch (kind) {
    case DiffusionKind::DegreeNormalized:
        if (!(c.q > 0.0)) throw std::invalid_argument("degree-normalized expected TRC requires q > 0");
        norm_growth = std::sqrt(c.p / c.q);
        feature_norm = c.c6 * c.mu_inf * align / (half_sum * half_sum) + c.c6 * std::sqrt(lnn / c.q) * c.mu_inf +
                       c.c6 * std::sqrt(c.sigma * (1.0 + 2.0 * lnd) / c.q);
        break;
    case DiffusionKind::SelfLoop:
        norm_growth = n * c.p;
        feature_norm = c.c6 * c.mu_inf * n * align + n * std::sqrt(half_sum) * c.mu_inf +
                       c.c6 * n * std::sqrt(c.p) * c.sigma * std::sqrt(1.0 + 2.0 * lnd);
        break;
    case DiffusionKind::Identity:
        throw std::invalid_argument("expected TRC is defined for self-loop and degree-normalized operators only");
    }

    ExpectedTrc out;
    double sum = 0.0, power = 1.0;
    for (std::size_t k = 0; k < c.K; ++k) {
        sum += c.c7 * power;
        power *= c2 * norm_growth;
    }
    out.graph_term = c1 * transductive_factor(c.n, m) * sum;
    out.feature_term = c.c8 * c3 * power * std::sqrt(lnn) * feature_norm;
    out.value = out.graph_term + out.feature_term;
    out.regime_warning = c.outside_asymptotic_regime();
    return out;
}

double deterministic_sx_norm(std::size_t n, double p, double q, double gamma, double mu_inf) {
    const double nn = static_cast<double>(n);
    const double g2 = gamma * gamma;
    const double radicand = nn * (1 - p) * (1 - p) + 0.25 * nn * (p - q) * (p - q) * g2 + (p - q) * (1 - p) * g2;
    if (radicand < 0.0) throw std::domain_error("deterministic ||S X|| radicand is negative");
    return mu_inf * std::sqrt(radicand);
}

std::string to_string(NormRow row) {
    switch (row) {
    case NormRow::SxDeterministic: return "SX_det";
    case NormRow::SmSX: return "SmS_X";
    case NormRow::XmXS: return "XmX_S";
    case NormRow::SInfPow: return "S_inf_pow";
    }
    return "?";
}

NormTableEntry expected_norm_table(NormRow row, DiffusionKind kind, const NormTableParams& pr, int k) {
    if (kind == DiffusionKind::Identity) throw std::invalid_argument("no table entry for the identity operator");
    const bool loop = kind == DiffusionKind::SelfLoop;
    const double n = static_cast<double>(pr.n);
    const double half_diff = (pr.p - pr.q) / 2.0;
    const double half_sum = (pr.p + pr.q) / 2.0;
    const double noise = 1.0 + 2.0 * std::log(static_cast<double>(pr.d));
    switch (row) {
    case NormRow::SxDeterministic: {
        const double align = 1.0 + half_diff * half_diff * pr.gamma * pr.gamma;
        return {loop ? pr.mu_inf * n * align : pr.mu_inf * align / half_sum, 0};
    }
    case NormRow::SmSX:
        if (loop) return {n * std::sqrt(half_sum) * pr.mu_inf, 1};
        return {n * std::log(n) / (1.0 + (n - 1.0) * pr.q) * pr.mu_inf, 2};
    case NormRow::XmXS:
        if (loop) return {n * n * pr.p * pr.sigma * pr.sigma * noise, 2};
        if (!(pr.q > 0.0)) throw std::invalid_argument("degree-normalized entries require q > 0");
        return {pr.sigma * pr.sigma * noise / pr.q, 2};
    case NormRow::SInfPow:
        if (k < 1) throw std::invalid_argument("S_inf_pow needs k >= 1");
        if (loop) return {std::pow(n * pr.p, k), k};
        if (!(pr.q > 0.0)) throw std::invalid_argument("degree-normalized entries require q > 0");
        return {std::pow(pr.p / pr.q, k / 2.0), k};
    }
    throw std::invalid_argument("invalid concentration table row");
}

DiffusionComparison compare_diffusion_bounds(const ExpectedTrcConfig& c, std::size_t m, std::size_t K) {
    check_split(c.n, m);
    const double n = static_cast<double>(c.n);
    BoundInputs in;
    in.n = c.n;
    in.m = m;
    in.K = K;
    in.d = c.d;
    in.lipschitz = c.lipschitz;
    in.omega = c.omega;
    in.beta = c.beta;

    // S = I: ||I||_inf = 1 and every column of z mu^T has norm |mu_j| sqrt(n).
    in.s_inf = 1.0;
    in.sx_2inf = c.mu_inf * std::sqrt(n);
    DiffusionComparison out;
    out.identity_bound = trc_upper(in);

    // Expected degrees are all (n/2 - 1) p + (n/2) q, so the normalized
    // operator is (E[A] + I) / (1 + degree) with unit row sums.
    const double degree = (n / 2.0 - 1.0) * c.p + (n / 2.0) * c.q;
    in.s_inf = 1.0;
    in.sx_2inf = deterministic_sx_norm(c.n, c.p, c.q, c.gamma, c.mu_inf) / (1.0 + degree);
    out.normalized_bound = trc_upper(in);

    out.graph_helps = out.normalized_bound < out.identity_bound;
    out.gamma_threshold_annotation = n / std::sqrt(n * (c.p + c.q) / 2.0 + n);
    return out;
}

std::string to_string(ParamSource source) { return source == ParamSource::Fixed ? "fixed" : "measured"; }

BoundReport compute_bound_report(const DiffusionOperator& s, const Matrix& x, const BoundRequest& req) {
    const auto n = static_cast<std::size_t>(x.rows());
    BoundReport r;
    r.n = n;
    r.m = req.m;
    r.K = req.K;
    r.d = static_cast<std::size_t>(x.cols());
    r.diffusion = std::string(to_string(s.kind));
    r.param_source = req.source;
    r.lipschitz = req.lipschitz;
    r.omega = req.omega;
    r.beta = req.beta;
    r.delta = req.delta;
    r.s_inf = inf_norm(s.matrix);
    r.sx_2inf = max_col_two_norm(s.matrix * x);
    r.x_inf = inf_norm(x);
    r.rank_s = static_cast<std::size_t>(numerical_rank(s.matrix));

    BoundInputs in;
    in.n = n;
    in.m = req.m;
    in.K = req.K;
    in.d = r.d;
    in.lipschitz = req.lipschitz;
    in.omega = req.omega;
    in.beta = req.beta;
    in.s_inf = r.s_inf;
    in.sx_2inf = r.sx_2inf;
    in.x_inf = r.x_inf;
    in.delta = req.delta;
    r.c1 = in.c1();
    r.c2 = in.c2();
    r.c3 = in.c3();

    const std::size_t last_hidden = req.last_hidden_width ? req.last_hidden_width : r.d;
    r.vc_cap = std::min(r.rank_s, last_hidden);
    r.vc_gap_bound = vc_gap_bound(req.m, static_cast<double>(r.vc_cap), req.delta);
    r.trc_upper = trc_upper(in);
    const GapSlack slack = gen_gap_slack(n, req.m, req.delta);
    r.slack_c4_term = slack.c4_term;
    r.slack_c5_term = slack.c5_term;
    r.total_gap_bound = r.trc_upper + slack.total();
    return r;
}

} // namespace gnnlab
