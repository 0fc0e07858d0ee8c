#ifndef GNNLAB_CONFIG_HPP
#define GNNLAB_CONFIG_HPP

#include "gnnlab/bounds.hpp"
#include "gnnlab/gnn.hpp"
#include "gnnlab/graph_ops.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gnnlab {

enum class SweepKind { Alignment, GraphSize, LabeledCount, Depth, ResidualAlpha, FeatureNoise };

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view text);

enum class OptimizerKind { Sgd, Adam };

struct PlantedSection {
    std::size_t n = 500;
    std::size_t d = 100;
    double p = 0.2;
    double q = 0.01;
    double gamma_ratio = 1.0; ///< Gamma / n
    std::size_t m = 100;
    double mu_scale = 1.0;
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

struct GnnSection {
    std::vector<std::size_t> hidden{16};
    Activation activation = Activation::ReLU;
    std::optional<double> residual_alpha;
    LossKind loss = LossKind::SquaredBinary;
    double init_scale = 1.0;
    std::optional<bool> linear_last_layer;
    DiffusionKind diffusion = DiffusionKind::DegreeNormalized;
    std::uint64_t seed = 0;
};

struct TrainSection {
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double lr = 0.001;
    int epochs = 1000;
    int eval_every = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    [[nodiscard]] OptimizerState make_optimizer() const;
};

struct BoundsSection {
    double delta = 0.05;
    double omega = 0.1;
    double beta = 0.1;
    ParamSource param_source = ParamSource::Fixed;
    double c6 = 1.0;
    double c7 = 1.0;
    double c8 = 1.0;
    std::optional<double> scale_factor; ///< unset: 25, or 30 for labeled-count sweeps
};

struct SweepSection {
    std::optional<SweepKind> kind; ///< unset: a single run at the base config
    std::vector<double> grid;      ///< empty: the sweep's default grid
    std::size_t seeds = 5;
    bool track_trc = false;
};

/// Every tunable of a run. Defaults reproduce the planted-model baseline.
struct RunConfig {
    PlantedSection planted;
    GnnSection gnn;
    TrainSection train;
    BoundsSection bounds;
    SweepSection sweep;

    /// Layer widths [d, hidden..., output] for a task with `num_classes` classes.
    [[nodiscard]] std::vector<std::size_t> layer_dims(std::size_t d, int num_classes) const;
    [[nodiscard]] GnnConfig gnn_config(std::size_t d, int num_classes) const;
    [[nodiscard]] PlantedConfig planted_config() const;
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses `[section]` headers and `key = value` lines; `#` starts a comment.
/// Unknown keys (with a nearest-match suggestion), duplicates, and malformed
/// values raise ConfigError with the line number.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::string& path);

/// Sets one "section.key" entry from its textual value.
void set_config_value(RunConfig& config, std::string_view full_key, std::string_view value);

/// All documented keys as "section.key", in canonical order.
std::vector<std::string> config_keys();

/// Canonical text form; parse_config_text(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& config);

/// Edit distance between two keys, used for suggestions.
std::size_t levenshtein(std::string_view a, std::string_view b);

} // namespace gnnlab

#endif // GNNLAB_CONFIG_HPP
