#include "gnnlab/planted.hpp"

#include "gnnlab/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gnnlab {

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(v[i - 1], v[j]);
    }
}

void check_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
}

void check_edge_probabilities(double p, double q) {
    check_probability(p, "p");
    check_probability(q, "q");
    if (q > p)
        throw std::invalid_argument("inter-class probability q=" + std::to_string(q) +
                                    " exceeds intra-class probability p=" + std::to_string(p));
}

} // namespace

void PlantedConfig::validate() const {
    if (n == 0 || n % 2 != 0) throw std::invalid_argument("planted n must be a positive even integer");
    if (d == 0) throw std::invalid_argument("planted d must be positive");
    check_edge_probabilities(p, q);
    if (!(gamma_target >= 0.0 && gamma_target <= static_cast<double>(n)))
        throw std::invalid_argument("gamma_target must lie in [0, n]");
    if (static_cast<std::size_t>(mu.size()) != d) throw std::invalid_argument("mu must have length d");
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
}

Vector Dataset::binary_targets() const {
    Vector t(static_cast<Eigen::Index>(classes.size()));
    for (std::size_t i = 0; i < classes.size(); ++i) t(static_cast<Eigen::Index>(i)) = classes[i] == 1 ? 1.0 : -1.0;
    return t;
}

void Dataset::validate() const {
    const auto n = features.rows();
    if (adjacency.rows() != n || adjacency.cols() != n)
        throw std::invalid_argument("adjacency must be n x n with n = feature rows");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0) throw std::invalid_argument("adjacency diagonal must be zero");
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = adjacency(i, j);
            if ((a != 0.0 && a != 1.0) || a != adjacency(j, i))
                throw std::invalid_argument("adjacency must be symmetric and binary");
        }
    }
    if (static_cast<Eigen::Index>(classes.size()) != n) throw std::invalid_argument("one class label per node required");
    for (int c : classes)
        if (c < 0 || c >= num_classes) throw std::invalid_argument("class label out of range");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (std::size_t i : train_idx) {
        if (i >= static_cast<std::size_t>(n)) throw std::invalid_argument("train index out of range");
        if (seen[i]) throw std::invalid_argument("duplicate train index");
        seen[i] = true;
    }
}

LatentLabels make_latent_labels(std::size_t n, double gamma_target, std::uint64_t seed, bool permute) {
    if (n == 0 || n % 2 != 0) throw std::invalid_argument("label count n must be a positive even integer");
    if (!(gamma_target >= 0.0 && gamma_target <= static_cast<double>(n)))
        throw std::invalid_argument("gamma_target must lie in [0, n]");

    Rng rng(seed, "labels");
    const std::size_t half = n / 2;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (permute) shuffle(order, rng);

    LatentLabels out;
    out.z.assign(n, -1);
    for (std::size_t k = 0; k < half; ++k) out.z[order[k]] = 1;
    out.y = out.z;

    auto t = static_cast<std::size_t>(std::lround((static_cast<double>(n) - gamma_target) / 4.0));
    t = std::min(t, half);

    // Flip t members of each z-block so y stays balanced.
    std::vector<std::size_t> plus(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::size_t> minus(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    shuffle(plus, rng);
    shuffle(minus, rng);
    for (std::size_t k = 0; k < t; ++k) {
        out.y[plus[k]] = -1;
        out.y[minus[k]] = 1;
    }

    long long dot = 0;
    for (std::size_t i = 0; i < n; ++i) dot += out.y[i] * out.z[i];
    out.gamma_actual = static_cast<std::size_t>(dot < 0 ? -dot : dot);
    return out;
}

Matrix sample_features(const LatentLabels& labels, const Vector& mu, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    const auto n = static_cast<Eigen::Index>(labels.size());
    const auto d = mu.size();
    Matrix x(n, d);
    Rng rng(seed, "features");
    for (Eigen::Index i = 0; i < n; ++i) {
        const double zi = labels.z[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) {
            x(i, j) = zi * mu(j);
            if (sigma > 0.0) x(i, j) += sigma * rng.normal();
        }
    }
    return x;
}

Matrix sample_adjacency(const LatentLabels& labels, double p, double q, std::uint64_t seed) {
    check_edge_probabilities(p, q);
    const auto n = static_cast<Eigen::Index>(labels.size());
    Matrix a = Matrix::Zero(n, n);
    Rng rng(seed, "adjacency");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const bool same = labels.y[static_cast<std::size_t>(i)] == labels.y[static_cast<std::size_t>(j)];
            const double prob = same ? p : q;
            if (rng.uniform() < prob) {
                a(i, j) = 1.0;
                a(j, i) = 1.0;
            }
        }
    }
    return a;
}

ExpectedMatrices expected_matrices(const LatentLabels& labels, const Vector& mu, double p, double q) {
    if (labels.y.size() != labels.z.size()) throw std::invalid_argument("label vectors differ in length");
    const auto n = static_cast<Eigen::Index>(labels.size());
    ExpectedMatrices out;
    out.features.resize(n, mu.size());
    for (Eigen::Index i = 0; i < n; ++i) out.features.row(i) = labels.z[static_cast<std::size_t>(i)] * mu.transpose();

    // Entry-wise form of the rank-2 expression: p within, q across, 0 on the diagonal.
    out.adjacency.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out.adjacency(i, j) = i == j ? 0.0
                                  : labels.y[static_cast<std::size_t>(i)] == labels.y[static_cast<std::size_t>(j)] ? p
                                                                                                                    : q;
    return out;
}

Vector sample_mu(std::size_t d, double scale, std::uint64_t seed) {
    Rng rng(seed, "mu");
    Vector mu(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < mu.size(); ++j) mu(j) = scale * rng.uniform();
    return mu;
}

IndexList choose_train_indices(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m > n) throw std::invalid_argument("labeled count m exceeds n");
    IndexList idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed, "split");
    shuffle(idx, rng);
    idx.resize(m);
    return idx;
}

Dataset generate_planted(const PlantedConfig& config, std::size_t m) {
    config.validate();
    if (m == 0 || m >= config.n) throw std::invalid_argument("labeled count m must satisfy 0 < m < n");
    Dataset ds;
    LatentLabels labels = make_latent_labels(config.n, config.gamma_target, config.seed);
    ds.features = sample_features(labels, config.mu, config.sigma, config.seed);
    ds.adjacency = sample_adjacency(labels, config.p, config.q, config.seed);
    ds.classes.resize(config.n);
    for (std::size_t i = 0; i < config.n; ++i) ds.classes[i] = labels.z[i] > 0 ? 1 : 0;
    ds.train_idx = choose_train_indices(config.n, m, config.seed);
    ds.num_classes = 2;
    ds.latent = std::move(labels);
    return ds;
}

} // namespace gnnlab
