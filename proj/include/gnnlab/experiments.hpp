#ifndef GNNLAB_EXPERIMENTS_HPP
#define GNNLAB_EXPERIMENTS_HPP

#include "gnnlab/bounds.hpp"
#include "gnnlab/config.hpp"
#include "gnnlab/data_io.hpp"
#include "gnnlab/gnn.hpp"
#include "gnnlab/planted.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gnnlab {

struct SweepSpec {
    SweepKind kind = SweepKind::Alignment;
    std::vector<double> grid;
    RunConfig base;
    std::vector<std::uint64_t> seeds;
    double scale_factor = 25.0;
    bool track_trc = false;
    unsigned jobs = 1;
    /// Called once per finished cell with a one-line summary.
    std::function<void(const std::string&)> log;

    void validate() const;
};

/// Default grid per sweep kind:
///   Alignment      Gamma/n = 0.05, 0.15, ..., 0.95
///   GraphSize      n = 200, 400, ..., 2000 (m/n held at the base ratio)
///   LabeledCount   m/n = 10 points evenly spaced over [0.01, 0.05]
///   Depth          hidden layers K = 1, 2, 3, 4
///   ResidualAlpha  alpha = 0 (vanilla), 0.2, 0.5 at four hidden layers
///   FeatureNoise   sigma = 0.25, 0.5, ..., 2.5
std::vector<double> default_grid(SweepKind kind);

/// Builds a spec from a run configuration. With `protocol_overrides` the
/// per-sweep learning rates (alignment 0.001, graph size 0.01, labeled count 0.2)
/// and the labeled-count graph (p = 0.2, q = 0.15, Gamma/n = 0.7) replace the
/// configured values.
SweepSpec make_sweep_spec(const RunConfig& config, SweepKind kind, bool protocol_overrides = true);

/// The configuration of one (grid value, seed) cell.
RunConfig cell_config(const SweepSpec& spec, double value, std::uint64_t seed);

/// The diffusion the bound columns use: self-loop for graph-size sweeps, the
/// training diffusion otherwise.
DiffusionKind bound_diffusion(const SweepSpec& spec);

struct CellBounds {
    double trc = 0;
    double vc = 0;
    std::optional<double> expected; ///< absent for the identity operator
    double expected_graph_term = 0;
    double expected_feature_term = 0;
    double omega = 0;
    double beta = 0;
    double x_inf = 0;
};

struct CellResult {
    std::size_t grid_index = 0;
    double value = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    int diverged_epoch = 0;
    std::vector<TrajectoryPoint> trajectory;
    CellBounds bounds;
    double mean_gap_loss = 0; ///< over the epoch grid
    double mean_gap_err01 = 0;
    std::optional<double> trc_lower; ///< when tracking is on
};

struct TrendPoint {
    double value = 0;
    double mean_gap_loss = 0; ///< over seeds x epochs, converged cells only
    double mean_gap_err01 = 0;
    double bound = 0;         ///< the trend bound (see TrendReport::bound_name), unscaled
    double bound_graph_term = 0;
    double bound_feature_term = 0;
    double mean_bound_trc = 0;
    double mean_bound_vc = 0;
    std::size_t cells_used = 0;
    std::size_t cells_diverged = 0;
    std::vector<double> seed_gaps; ///< per-seed mean gap, in seed order (NaN when diverged)
};

struct TrendReport {
    SweepKind kind = SweepKind::Alignment;
    std::string bound_name; ///< "bound_expected_sbm" or "bound_trc"
    double scale_factor = 25.0;
    std::vector<TrendPoint> points;
    double spearman_rho = 0; ///< NaN when undefined
    std::vector<std::string> flags;
};

struct SweepResult {
    std::vector<ResultsRow> rows;
    std::vector<CellResult> cells; ///< grid-major, seed-minor
    TrendReport report;
};

/// Runs every (grid value, seed) cell, possibly in parallel; output order
/// is independent of the job count.
SweepResult run_sweep(const SweepSpec& spec);

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant.
double trend_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

struct NormCheck {
    NormRow row = NormRow::SInfPow;
    DiffusionKind kind = DiffusionKind::SelfLoop;
    int moment = 1;
    double empirical_mean = 0; ///< of norm^moment
    double table_value = 0;
    double limit = 0;          ///< table_value * (1 + slack)
    bool pass = false;
    bool needs_slack = false;  ///< passes only because of the slack
};

/// Monte Carlo check of the concentration table. Labels are fixed by the
/// config seed; every sample redraws A and X.
std::vector<NormCheck> validate_expected_norms(const PlantedConfig& config, DiffusionKind kind, int k,
                                               std::size_t num_samples, double slack = 0.1, unsigned jobs = 1);

/// Expected diffusion operator built from the expected adjacency, including
/// the degree normalization with expected degrees.
Matrix expected_diffusion(const Matrix& expected_adjacency, DiffusionKind kind);

struct CoraRun {
    TrainResult train;
    Metrics final_metrics;
    BoundReport bounds;
};

/// Trains the configured model on a loaded Cora dataset with the
/// degree-normalized operator.
CoraRun run_cora(const Dataset& dataset, const RunConfig& config);

/// Cora protocol defaults: one hidden layer of 16, NLL, Adam at 0.01, 200 epochs.
RunConfig cora_defaults(const RunConfig& base);

/// Line plot of the mean gap and the scaled bound against the sweep value.
std::string trend_svg(const TrendReport& report);
void write_trend_svg(const TrendReport& report, const std::string& path);

} // namespace gnnlab

#endif // GNNLAB_EXPERIMENTS_HPP
