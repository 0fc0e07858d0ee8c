#ifndef GNNLAB_PLANTED_HPP
#define GNNLAB_PLANTED_HPP

#include "gnnlab/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gnnlab {

/// Parameters of the two-community SBM paired with a two-component
/// isotropic Gaussian mixture. `y` drives the graph, `z` the features.
struct PlantedConfig {
    std::size_t n = 500;
    std::size_t d = 100;
    double p = 0.2;
    double q = 0.01;
    double gamma_target = 500; ///< requested |y'z|, in [0, n]
    Vector mu;                 ///< length d
    double sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LatentLabels {
    std::vector<int> z;          ///< feature classes, +-1
    std::vector<int> y;          ///< graph communities, +-1
    std::size_t gamma_actual = 0; ///< |y'z|

    [[nodiscard]] std::size_t size() const { return z.size(); }
};

/// A transductive node-classification instance.
struct Dataset {
    Matrix adjacency;                   ///< n x n, symmetric 0/1, zero diagonal
    Matrix features;                    ///< n x d
    std::optional<LatentLabels> latent; ///< present for planted data
    std::vector<int> classes;           ///< class index per node, in [0, num_classes)
    IndexList train_idx;                ///< labeled nodes, distinct
    int num_classes = 2;

    [[nodiscard]] std::size_t num_nodes() const { return static_cast<std::size_t>(features.rows()); }
    [[nodiscard]] std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }
    /// +-1 targets for binary tasks (class 1 -> +1, class 0 -> -1).
    [[nodiscard]] Vector binary_targets() const;
    void validate() const;
};

/// Balanced z (optionally shuffled), then y by flipping t nodes in each z-block
/// with t = round((n - gamma_target) / 4). Achievable values are |n - 4t|, so
/// the returned gamma_actual is within 2 of the request.
LatentLabels make_latent_labels(std::size_t n, double gamma_target, std::uint64_t seed, bool permute = true);

/// X = z mu^T + sigma * N(0, 1) noise.
Matrix sample_features(const LatentLabels& labels, const Vector& mu, double sigma, std::uint64_t seed);

/// Upper triangle Bernoulli(p) within y-communities and Bernoulli(q) across, mirrored.
Matrix sample_adjacency(const LatentLabels& labels, double p, double q, std::uint64_t seed);

struct ExpectedMatrices {
    Matrix features;  ///< z mu^T
    Matrix adjacency; ///< (p+q)/2 11^T + (p-q)/2 yy^T - pI, exact zero diagonal
};

ExpectedMatrices expected_matrices(const LatentLabels& labels, const Vector& mu, double p, double q);

/// Draw mu with entries uniform on [0, scale).
Vector sample_mu(std::size_t d, double scale, std::uint64_t seed);

/// First m nodes of a seeded shuffle of [0, n).
IndexList choose_train_indices(std::size_t n, std::size_t m, std::uint64_t seed);

/// Full planted instance: labels, features, graph, and a labeled split of size m.
/// Class targets follow the feature labels z.
Dataset generate_planted(const PlantedConfig& config, std::size_t m);

} // namespace gnnlab

#endif // GNNLAB_PLANTED_HPP
