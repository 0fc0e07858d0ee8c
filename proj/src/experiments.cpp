#include "gnnlab/experiments.hpp"

#include "gnnlab/graph_ops.hpp"
#include "gnnlab/parallel.hpp"
#include "gnnlab/rng.hpp"
#include "gnnlab/text.hpp"
#include "gnnlab/trc_estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gnnlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return out;
}

std::string_view sweep_param_name(SweepKind kind) {
    switch (kind) {
    case SweepKind::Alignment: return "gamma_ratio";
    case SweepKind::GraphSize: return "n";
    case SweepKind::LabeledCount: return "m_ratio";
    case SweepKind::Depth: return "K";
    case SweepKind::ResidualAlpha: return "alpha";
    case SweepKind::FeatureNoise: return "sigma";
    }
    return "?";
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace

void SweepSpec::validate() const {
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
    if (!(scale_factor > 0)) throw std::invalid_argument("scale factor must be positive");
    base.validate();
}

std::vector<double> default_grid(SweepKind kind) {
    switch (kind) {
    case SweepKind::Alignment: return linspace(0.05, 0.95, 10);
    case SweepKind::GraphSize: return linspace(200, 2000, 10);
    case SweepKind::LabeledCount: return linspace(0.01, 0.05, 10);
    case SweepKind::Depth: return {1, 2, 3, 4};
    case SweepKind::ResidualAlpha: return {0.0, 0.2, 0.5};
    case SweepKind::FeatureNoise: return linspace(0.25, 2.5, 10);
    }
    return {};
}

SweepSpec make_sweep_spec(const RunConfig& config, SweepKind kind, bool protocol_overrides) {
    SweepSpec spec;
    spec.kind = kind;
    spec.base = config;
    spec.grid = config.sweep.grid.empty() ? default_grid(kind) : config.sweep.grid;
    for (std::size_t i = 0; i < config.sweep.seeds; ++i) spec.seeds.push_back(i);
    spec.track_trc = config.sweep.track_trc;
    spec.scale_factor = config.bounds.scale_factor.value_or(kind == SweepKind::LabeledCount ? 30.0 : 25.0);
    if (protocol_overrides) {
        switch (kind) {
        case SweepKind::Alignment: spec.base.train.lr = 0.001; break;
        case SweepKind::GraphSize: spec.base.train.lr = 0.01; break;
        case SweepKind::LabeledCount:
            spec.base.train.lr = 0.2;
            spec.base.planted.p = 0.2;
            spec.base.planted.q = 0.15;
            spec.base.planted.gamma_ratio = 0.7;
            break;
        default: break;
        }
        if (kind == SweepKind::ResidualAlpha && spec.base.gnn.hidden.size() <= 1) {
            const std::size_t width = spec.base.gnn.hidden.empty() ? 16 : spec.base.gnn.hidden.front();
            spec.base.gnn.hidden.assign(4, width);
        }
    }
    return spec;
}

RunConfig cell_config(const SweepSpec& spec, double value, std::uint64_t seed) {
    RunConfig c = spec.base;
    c.planted.seed = spec.base.planted.seed + seed;
    c.gnn.seed = spec.base.gnn.seed + seed;
    const double ratio = static_cast<double>(spec.base.planted.m) / static_cast<double>(spec.base.planted.n);
    switch (spec.kind) {
    case SweepKind::Alignment: c.planted.gamma_ratio = value; break;
    case SweepKind::GraphSize: {
        auto n = static_cast<std::size_t>(std::llround(value));
        n += n % 2;
        c.planted.n = n;
        c.planted.m = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))),
                                              1, n - 1);
        break;
    }
    case SweepKind::LabeledCount:
        c.planted.m = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(value * static_cast<double>(c.planted.n))), 1, c.planted.n - 1);
        break;
    case SweepKind::Depth: {
        const std::size_t width = spec.base.gnn.hidden.empty() ? 16 : spec.base.gnn.hidden.front();
        c.gnn.hidden.assign(static_cast<std::size_t>(std::llround(value)), width);
        break;
    }
    case SweepKind::ResidualAlpha:
        if (value > 0.0)
            c.gnn.residual_alpha = value;
        else
            c.gnn.residual_alpha.reset();
        break;
    case SweepKind::FeatureNoise: c.planted.sigma = value; break;
    }
    return c;
}

DiffusionKind bound_diffusion(const SweepSpec& spec) {
    return spec.kind == SweepKind::GraphSize ? DiffusionKind::SelfLoop : spec.base.gnn.diffusion;
}

namespace {

CellResult run_cell(const SweepSpec& spec, std::size_t grid_index, std::uint64_t seed) {
    CellResult cell;
    cell.grid_index = grid_index;
    cell.value = spec.grid[grid_index];
    cell.seed = seed;

    const RunConfig cfg = cell_config(spec, cell.value, seed);
    const PlantedConfig pc = cfg.planted_config();
    const Dataset ds = generate_planted(pc, cfg.planted.m);
    const DiffusionOperator s = build_diffusion(ds.adjacency, cfg.gnn.diffusion);
    const GnnConfig gc = cfg.gnn_config(pc.d, ds.num_classes);
    TrainConfig tc;
    tc.optimizer = cfg.train.make_optimizer();
    tc.epochs = cfg.train.epochs;
    tc.eval_every = cfg.train.eval_every;

    std::optional<GnnModel> trained;
    try {
        TrainResult tr = train(ds, s, gc, tc);
        cell.trajectory = std::move(tr.trajectory);
        trained = std::move(tr.model);
    } catch (const TrainingDiverged& e) {
        cell.diverged = true;
        cell.diverged_epoch = e.epoch();
    }

    std::vector<double> gaps, gaps01;
    for (const auto& pt : cell.trajectory) {
        gaps.push_back(pt.metrics.gap_loss);
        gaps01.push_back(pt.metrics.gap_err01);
    }
    cell.mean_gap_loss = mean_of(gaps);
    cell.mean_gap_err01 = mean_of(gaps01);

    CellBounds& b = cell.bounds;
    b.omega = cfg.bounds.omega;
    b.beta = cfg.bounds.beta;
    if (cfg.bounds.param_source == ParamSource::Measured && trained) {
        const ParamNorms norms = measure_param_norms(*trained);
        b.omega = norms.omega;
        b.beta = norms.beta;
    }
    const DiffusionKind bk = bound_diffusion(spec);
    const DiffusionOperator sb = bk == s.kind ? s : build_diffusion(ds.adjacency, bk);
    BoundInputs in;
    in.n = pc.n;
    in.m = cfg.planted.m;
    in.K = gc.depth();
    in.d = pc.d;
    in.lipschitz = lipschitz(gc.activation);
    in.omega = b.omega;
    in.beta = b.beta;
    in.s_inf = inf_norm(sb.matrix);
    in.sx_2inf = max_col_two_norm(sb.matrix * ds.features);
    in.x_inf = inf_norm(ds.features);
    in.delta = cfg.bounds.delta;
    b.x_inf = in.x_inf;
    b.trc = gc.residual_alpha ? residual_trc_upper(in, *gc.residual_alpha, in.x_inf) : trc_upper(in);
    const auto rank = static_cast<std::size_t>(numerical_rank(sb.matrix));
    b.vc = vc_gap_bound(in.m, static_cast<double>(std::min(rank, gc.layer_dims[in.K - 1])), in.delta);

    if (bk != DiffusionKind::Identity) {
        ExpectedTrcConfig ec;
        ec.n = pc.n;
        ec.p = pc.p;
        ec.q = pc.q;
        ec.gamma = static_cast<double>(ds.latent->gamma_actual);
        ec.mu_inf = pc.mu.size() ? pc.mu.lpNorm<Eigen::Infinity>() : 0.0;
        ec.sigma = pc.sigma;
        ec.d = pc.d;
        ec.K = in.K;
        ec.omega = b.omega;
        ec.beta = b.beta;
        ec.lipschitz = in.lipschitz;
        ec.c6 = cfg.bounds.c6;
        ec.c7 = cfg.bounds.c7;
        ec.c8 = cfg.bounds.c8;
        try {
            const ExpectedTrc e = expected_trc_sbm(ec, bk, in.m);
            b.expected = e.value;
            b.expected_graph_term = e.graph_term;
            b.expected_feature_term = e.feature_term;
        } catch (const std::invalid_argument&) {
            // q = 0 leaves the normalized expectation undefined.
        }
    }

    if (spec.track_trc && gc.layer_dims.back() == 1) {
        TrcEstimateOptions opt;
        opt.m = in.m;
        opt.num_sigma = 200;
        opt.seed = Rng(cfg.planted.seed, "trc").split(grid_index)();
        cell.trc_lower = empirical_trc_lower(s, ds.features, b.omega, b.beta, gc, 32, opt).mean;
    }
    return cell;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const std::size_t num_seeds = spec.seeds.size();
    const std::size_t total = spec.grid.size() * num_seeds;
    SweepResult result;
    result.cells.resize(total);
    parallel_for(total, spec.jobs, [&](std::size_t idx) {
        result.cells[idx] = run_cell(spec, idx / num_seeds, spec.seeds[idx % num_seeds]);
        if (spec.log) {
            const CellResult& c = result.cells[idx];
            std::ostringstream line;
            line << to_string(spec.kind) << ' ' << sweep_param_name(spec.kind) << '=' << format_double(c.value)
                 << " seed=" << c.seed;
            if (c.diverged)
                line << " diverged at epoch " << c.diverged_epoch;
            else
                line << " mean_gap=" << format_double(c.mean_gap_loss);
            spec.log(line.str());
        }
    });

    TrendReport& rep = result.report;
    rep.kind = spec.kind;
    rep.scale_factor = spec.scale_factor;
    rep.bound_name = spec.kind == SweepKind::ResidualAlpha ? "bound_trc" : "bound_expected_sbm";
    const std::string experiment(to_string(spec.kind));
    const std::string param(sweep_param_name(spec.kind));

    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        TrendPoint pt;
        pt.value = spec.grid[g];
        std::vector<double> gaps, gaps01, bounds, graph_terms, feature_terms, trcs, vcs;
        for (std::size_t si = 0; si < num_seeds; ++si) {
            const CellResult& c = result.cells[g * num_seeds + si];
            trcs.push_back(c.bounds.trc);
            vcs.push_back(c.bounds.vc);
            if (rep.bound_name == "bound_trc") {
                bounds.push_back(c.bounds.trc);
            } else if (c.bounds.expected) {
                bounds.push_back(*c.bounds.expected);
                graph_terms.push_back(c.bounds.expected_graph_term);
                feature_terms.push_back(c.bounds.expected_feature_term);
            }
            if (c.diverged) {
                ++pt.cells_diverged;
                pt.seed_gaps.push_back(kNaN);
                rep.flags.push_back("diverged: " + param + "=" + format_double(c.value) + " seed=" +
                                    std::to_string(c.seed) + " epoch=" + std::to_string(c.diverged_epoch));
                continue;
            }
            ++pt.cells_used;
            pt.seed_gaps.push_back(c.mean_gap_loss);
            gaps.push_back(c.mean_gap_loss);
            gaps01.push_back(c.mean_gap_err01);
            if (c.trc_lower && *c.trc_lower > c.bounds.trc && bound_diffusion(spec) == spec.base.gnn.diffusion)
                rep.flags.push_back("trc_lower exceeds trc_upper: " + param + "=" + format_double(c.value) +
                                    " seed=" + std::to_string(c.seed));
            for (const auto& tp : c.trajectory) {
                ResultsRow row;
                row.experiment = experiment;
                row.sweep_param = param;
                row.sweep_value = c.value;
                row.seed = c.seed;
                row.epoch = tp.epoch;
                row.train_loss = tp.metrics.train_loss;
                row.unlabeled_loss = tp.metrics.unlabeled_loss;
                row.gap_loss = tp.metrics.gap_loss;
                row.train_err01 = tp.metrics.train_err01;
                row.unlabeled_err01 = tp.metrics.unlabeled_err01;
                row.gap_err01 = tp.metrics.gap_err01;
                row.bound_trc = c.bounds.trc;
                row.bound_vc = c.bounds.vc;
                row.bound_expected_sbm = c.bounds.expected;
                row.omega_used = c.bounds.omega;
                row.beta_used = c.bounds.beta;
                row.scale_factor = spec.scale_factor;
                result.rows.push_back(std::move(row));
            }
        }
        pt.mean_gap_loss = mean_of(gaps);
        pt.mean_gap_err01 = mean_of(gaps01);
        pt.bound = mean_of(bounds);
        pt.bound_graph_term = mean_of(graph_terms);
        pt.bound_feature_term = mean_of(feature_terms);
        pt.mean_bound_trc = mean_of(trcs);
        pt.mean_bound_vc = mean_of(vcs);
        rep.points.push_back(std::move(pt));
    }

    std::vector<double> xs, ys;
    for (const auto& pt : rep.points) {
        if (std::isnan(pt.bound) || std::isnan(pt.mean_gap_loss)) continue;
        xs.push_back(pt.bound);
        ys.push_back(pt.mean_gap_loss);
    }
    rep.spearman_rho = xs.size() >= 2 ? trend_correlation(xs, ys) : kNaN;
    return result;
}

double trend_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("trend_correlation needs equal lengths");
    if (xs.size() < 2) throw std::invalid_argument("trend_correlation needs at least two points");
    const std::vector<double> rx = average_ranks(xs), ry = average_ranks(ys);
    const double mx = mean_of(rx), my = mean_of(ry);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return kNaN;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Matrix expected_diffusion(const Matrix& expected_adjacency, DiffusionKind kind) {
    const auto n = expected_adjacency.rows();
    switch (kind) {
    case DiffusionKind::Identity: return Matrix::Identity(n, n);
    case DiffusionKind::SelfLoop: return expected_adjacency + Matrix::Identity(n, n);
    case DiffusionKind::DegreeNormalized: {
        const Vector scale = (expected_adjacency.rowwise().sum().array() + 1.0).rsqrt().matrix();
        return scale.asDiagonal() * (expected_adjacency + Matrix::Identity(n, n)) * scale.asDiagonal();
    }
    }
    return {};
}

std::vector<NormCheck> validate_expected_norms(const PlantedConfig& config, DiffusionKind kind, int k,
                                               std::size_t num_samples, double slack, unsigned jobs) {
    config.validate();
    if (num_samples < 30) throw std::invalid_argument("norm validation needs at least 30 samples");
    if (kind == DiffusionKind::Identity) throw std::invalid_argument("no table entries for the identity operator");
    const LatentLabels labels = make_latent_labels(config.n, config.gamma_target, config.seed);
    const ExpectedMatrices expected = expected_matrices(labels, config.mu, config.p, config.q);
    const Matrix s_exp = expected_diffusion(expected.adjacency, kind);
    const Matrix s_exp_x = s_exp * expected.features;

    NormTableParams tp;
    tp.n = config.n;
    tp.p = config.p;
    tp.q = config.q;
    tp.gamma = static_cast<double>(labels.gamma_actual);
    tp.mu_inf = config.mu.size() ? config.mu.lpNorm<Eigen::Infinity>() : 0.0;
    tp.sigma = config.sigma;
    tp.d = config.d;

    const NormRow rows[] = {NormRow::SxDeterministic, NormRow::SmSX, NormRow::XmXS, NormRow::SInfPow};
    std::vector<NormCheck> checks;
    for (NormRow row : rows) {
        NormCheck c;
        c.row = row;
        c.kind = kind;
        const NormTableEntry e = expected_norm_table(row, kind, tp, k);
        c.moment = e.moment;
        c.table_value = e.value;
        c.limit = e.value * (1.0 + slack);
        checks.push_back(c);
    }

    // samples[t] holds norm^moment for the three random rows.
    std::vector<std::array<double, 3>> samples(num_samples);
    const Rng base(config.seed, "norm-samples");
    parallel_for(num_samples, jobs, [&](std::size_t t) {
        Rng rng = base.split(static_cast<std::uint64_t>(t));
        const Matrix a = sample_adjacency(labels, config.p, config.q, rng());
        const Matrix x = sample_features(labels, config.mu, config.sigma, rng());
        const Matrix s = build_diffusion(a, kind).matrix;
        samples[t][0] = std::pow(max_col_two_norm((s - s_exp) * expected.features), checks[1].moment);
        samples[t][1] = std::pow(max_col_two_norm(s * (x - expected.features)), checks[2].moment);
        samples[t][2] = std::pow(inf_norm(s), checks[3].moment);
    });

    checks[0].empirical_mean = max_col_two_norm(s_exp_x);
    for (std::size_t r = 0; r < 3; ++r) {
        double sum = 0;
        for (const auto& smp : samples) sum += smp[r];
        checks[r + 1].empirical_mean = sum / static_cast<double>(num_samples);
    }
    for (auto& c : checks) {
        c.pass = c.empirical_mean <= c.limit;
        c.needs_slack = c.pass && c.empirical_mean > c.table_value;
    }
    return checks;
}

RunConfig cora_defaults(const RunConfig& base) {
    RunConfig c = base;
    c.gnn.hidden = {16};
    c.gnn.loss = LossKind::MulticlassNLL;
    c.gnn.diffusion = DiffusionKind::DegreeNormalized;
    c.gnn.residual_alpha.reset();
    c.train.optimizer = OptimizerKind::Adam;
    c.train.lr = 0.01;
    c.train.epochs = 200;
    c.train.eval_every = 10;
    return c;
}

CoraRun run_cora(const Dataset& dataset, const RunConfig& config) {
    const DiffusionOperator s = build_diffusion(dataset.adjacency, config.gnn.diffusion);
    const GnnConfig gc = config.gnn_config(dataset.feature_dim(), dataset.num_classes);
    TrainConfig tc;
    tc.optimizer = config.train.make_optimizer();
    tc.epochs = config.train.epochs;
    tc.eval_every = config.train.eval_every;

    CoraRun run;
    run.train = train(dataset, s, gc, tc);
    run.final_metrics = run.train.trajectory.empty()
                            ? evaluate(run.train.model, s, dataset.features, make_targets(dataset, gc.loss),
                                       dataset.train_idx)
                            : run.train.trajectory.back().metrics;
    BoundRequest req;
    req.m = dataset.train_idx.size();
    req.K = gc.depth();
    req.last_hidden_width = gc.layer_dims[gc.depth() - 1];
    req.lipschitz = lipschitz(gc.activation);
    req.delta = config.bounds.delta;
    req.source = config.bounds.param_source;
    if (req.source == ParamSource::Measured) {
        const ParamNorms norms = measure_param_norms(run.train.model);
        req.omega = norms.omega;
        req.beta = norms.beta;
    } else {
        req.omega = config.bounds.omega;
        req.beta = config.bounds.beta;
    }
    run.bounds = compute_bound_report(s, dataset.features, req);
    return run;
}

} // namespace gnnlab
