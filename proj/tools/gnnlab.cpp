// Command-line front end: gen, train, bounds, sweep, validate-norms, estimate-trc, cora.

#include "gnnlab/bounds.hpp"
#include "gnnlab/config.hpp"
#include "gnnlab/data_io.hpp"
#include "gnnlab/experiments.hpp"
#include "gnnlab/gnn.hpp"
#include "gnnlab/graph_ops.hpp"
#include "gnnlab/parallel.hpp"
#include "gnnlab/planted.hpp"
#include "gnnlab/text.hpp"
#include "gnnlab/trc_estimator.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace gnnlab;

namespace {

struct CommonOptions {
    std::string config = "default";
    std::optional<std::uint64_t> seed;
    std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "config file, or 'default' for the built-in defaults");
    cmd->add_option("--seed", opts.seed, "base seed for data and initialization");
    for (const std::string& key : config_keys()) {
        cmd->add_option_function<std::string>(
               "--" + key, [&opts, key](const std::string& v) { opts.overrides[key] = v; }, "config key " + key)
            ->group("Config keys");
    }
}

RunConfig effective_config(const CommonOptions& opts) {
    RunConfig c = opts.config == "default" ? RunConfig{} : parse_config(opts.config);
    for (const auto& [key, value] : opts.overrides) set_config_value(c, key, value);
    if (opts.seed) {
        c.planted.seed = *opts.seed;
        c.gnn.seed = *opts.seed;
    }
    c.validate();
    return c;
}

std::vector<std::string> config_comments(const RunConfig& c) {
    std::vector<std::string> out;
    std::istringstream in(to_config_text(c));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

Dataset dataset_from(const std::string& path, const RunConfig& c) {
    if (!path.empty()) return load_dataset(path);
    return generate_planted(c.planted_config(), c.planted.m);
}

void print_metrics(std::ostream& out, const Metrics& m) {
    out << "train_loss = " << format_double(m.train_loss) << "\n"
        << "unlabeled_loss = " << format_double(m.unlabeled_loss) << "\n"
        << "full_loss = " << format_double(m.full_loss) << "\n"
        << "gap_loss = " << format_double(m.gap_loss) << "\n"
        << "train_err01 = " << format_double(m.train_err01) << "\n"
        << "unlabeled_err01 = " << format_double(m.unlabeled_err01) << "\n"
        << "gap_err01 = " << format_double(m.gap_err01) << "\n";
}

void print_bound_report(std::ostream& out, const BoundReport& r) {
    out << "n = " << r.n << "\nm = " << r.m << "\nK = " << r.K << "\nd = " << r.d << "\ndiffusion = " << r.diffusion
        << "\nparam_source = " << to_string(r.param_source) << "\nlipschitz = " << format_double(r.lipschitz)
        << "\nomega = " << format_double(r.omega) << "\nbeta = " << format_double(r.beta)
        << "\ndelta = " << format_double(r.delta) << "\ns_inf = " << format_double(r.s_inf)
        << "\nsx_2inf = " << format_double(r.sx_2inf) << "\nx_inf = " << format_double(r.x_inf)
        << "\nrank_s = " << r.rank_s << "\nc1 = " << format_double(r.c1) << "\nc2 = " << format_double(r.c2)
        << "\nc3 = " << format_double(r.c3) << "\nc4 = " << format_double(r.c4) << "\nc5 = " << format_double(r.c5)
        << "\nvc_cap = " << r.vc_cap << "\nvc_gap_bound = " << format_double(r.vc_gap_bound)
        << "\ntrc_upper = " << format_double(r.trc_upper) << "\nslack_c4_term = " << format_double(r.slack_c4_term)
        << "\nslack_c5_term = " << format_double(r.slack_c5_term)
        << "\ntotal_gap_bound = " << format_double(r.total_gap_bound) << "\n";
}

std::vector<ResultsRow> trajectory_rows(const std::string& experiment, const TrainResult& tr, std::uint64_t seed) {
    std::vector<ResultsRow> rows;
    for (const auto& pt : tr.trajectory) {
        ResultsRow row;
        row.experiment = experiment;
        row.seed = seed;
        row.epoch = pt.epoch;
        row.train_loss = pt.metrics.train_loss;
        row.unlabeled_loss = pt.metrics.unlabeled_loss;
        row.gap_loss = pt.metrics.gap_loss;
        row.train_err01 = pt.metrics.train_err01;
        row.unlabeled_err01 = pt.metrics.unlabeled_err01;
        row.gap_err01 = pt.metrics.gap_err01;
        rows.push_back(std::move(row));
    }
    return rows;
}

TrainConfig train_config_from(const RunConfig& c) {
    TrainConfig tc;
    tc.optimizer = c.train.make_optimizer();
    tc.epochs = c.train.epochs;
    tc.eval_every = c.train.eval_every;
    return tc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalization lab for graph neural networks on planted and citation graphs"};
    app.require_subcommand(1);

    // gen
    CommonOptions gen_opts;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "sample a planted dataset and write it to a file");
    add_common(gen, gen_opts);
    gen->add_option("--out", gen_out, "dataset output path")->required();

    // train
    CommonOptions train_opts;
    std::string train_data, train_model_out, train_csv;
    auto* train_cmd = app.add_subcommand("train", "train one model and print its final metrics");
    add_common(train_cmd, train_opts);
    train_cmd->add_option("--data", train_data, "dataset file (default: sample from the config)");
    train_cmd->add_option("--save-model", train_model_out, "write the trained model checkpoint");
    train_cmd->add_option("--csv", train_csv, "write the metric trajectory as CSV");

    // bounds
    CommonOptions bounds_opts;
    std::string bounds_data, bounds_model;
    std::optional<double> bounds_omega, bounds_beta;
    auto* bounds_cmd = app.add_subcommand("bounds", "print the bound report for a dataset");
    add_common(bounds_cmd, bounds_opts);
    bounds_cmd->add_option("--data", bounds_data, "dataset file")->required();
    bounds_cmd->add_option("--model", bounds_model, "checkpoint; fixes K and, with measured norms, omega and beta");
    bounds_cmd->add_option("--omega", bounds_omega, "bound on ||W_k||_inf (same as --bounds.omega)");
    bounds_cmd->add_option("--beta", bounds_beta, "bound on ||b_k||_1 (same as --bounds.beta)");

    // sweep
    CommonOptions sweep_opts;
    std::string sweep_kind, sweep_out, sweep_svg;
    unsigned sweep_jobs = default_jobs();
    bool keep_lr = false;
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write per-epoch results");
    add_common(sweep, sweep_opts);
    sweep->add_option("--kind", sweep_kind, "alignment | graph_size | labeled_count | depth | residual_alpha | feature_noise");
    sweep->add_option("--out", sweep_out, "CSV output path (default: standard output)");
    sweep->add_option("--svg", sweep_svg, "trend plot output path");
    sweep->add_option("--jobs", sweep_jobs, "parallel cells")->check(CLI::PositiveNumber);
    sweep->add_flag("--keep-lr", keep_lr, "use the configured learning rate and graph instead of the sweep protocol's");

    // validate-norms
    CommonOptions norm_opts;
    std::string norm_diffusion = "self_loop";
    int norm_k = 1;
    std::size_t norm_samples = 50;
    double norm_slack = 0.1;
    unsigned norm_jobs = default_jobs();
    auto* norms = app.add_subcommand("validate-norms", "Monte Carlo check of the concentration table");
    add_common(norms, norm_opts);
    norms->add_option("--diffusion", norm_diffusion, "self_loop | normalized");
    norms->add_option("--k", norm_k, "power of ||S||_inf")->check(CLI::PositiveNumber);
    norms->add_option("--samples", norm_samples, "number of (A, X) samples");
    norms->add_option("--slack", norm_slack, "relative slack on the table values");
    norms->add_option("--jobs", norm_jobs, "parallel samples")->check(CLI::PositiveNumber);

    // estimate-trc
    CommonOptions trc_opts;
    std::string trc_data;
    std::size_t trc_models = 64, trc_draws = 1000;
    std::optional<double> trc_p_sigma;
    unsigned trc_jobs = default_jobs();
    auto* trc = app.add_subcommand("estimate-trc", "Monte Carlo lower estimate of the TRC of the restricted class");
    add_common(trc, trc_opts);
    trc->add_option("--data", trc_data, "dataset file (default: sample from the config)");
    trc->add_option("--models", trc_models, "sampled parameter sets")->check(CLI::PositiveNumber);
    trc->add_option("--sigma-draws", trc_draws, "sign vectors")->check(CLI::PositiveNumber);
    trc->add_option("--p-sigma", trc_p_sigma, "sign probability (default m(n-m)/n^2)");
    trc->add_option("--jobs", trc_jobs, "parallel draws")->check(CLI::PositiveNumber);

    // cora
    CommonOptions cora_opts;
    std::string cora_dir = "data/cora", cora_content, cora_cites, cora_csv;
    auto* cora = app.add_subcommand("cora", "train on the Cora citation graph");
    add_common(cora, cora_opts);
    cora->add_option("--data-dir", cora_dir, "directory holding cora.content and cora.cites");
    cora->add_option("--content", cora_content, "content file (overrides --data-dir)");
    cora->add_option("--cites", cora_cites, "cites file (overrides --data-dir)");
    cora->add_option("--csv", cora_csv, "write the metric trajectory as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*gen) {
            const RunConfig c = effective_config(gen_opts);
            const Dataset ds = generate_planted(c.planted_config(), c.planted.m);
            save_dataset(ds, gen_out);
            std::cout << "wrote " << gen_out << ": n = " << ds.num_nodes() << ", d = " << ds.feature_dim()
                      << ", m = " << ds.train_idx.size() << ", gamma = " << ds.latent->gamma_actual << "\n";
        } else if (*train_cmd) {
            const RunConfig c = effective_config(train_opts);
            const Dataset ds = dataset_from(train_data, c);
            const DiffusionOperator s = build_diffusion(ds.adjacency, c.gnn.diffusion);
            const GnnConfig gc = c.gnn_config(ds.feature_dim(), ds.num_classes);
            const TrainResult tr = train(ds, s, gc, train_config_from(c));
            print_metrics(std::cout, evaluate(tr.model, s, ds.features, make_targets(ds, gc.loss), ds.train_idx));
            if (!train_model_out.empty()) save_model(tr.model, train_model_out);
            if (!train_csv.empty()) write_results(trajectory_rows("train", tr, c.gnn.seed), train_csv, config_comments(c));
        } else if (*bounds_cmd) {
            RunConfig c = effective_config(bounds_opts);
            if (bounds_omega) c.bounds.omega = *bounds_omega;
            if (bounds_beta) c.bounds.beta = *bounds_beta;
            const Dataset ds = load_dataset(bounds_data);
            const DiffusionOperator s = build_diffusion(ds.adjacency, c.gnn.diffusion);
            GnnConfig gc = c.gnn_config(ds.feature_dim(), ds.num_classes);
            BoundRequest req;
            req.omega = c.bounds.omega;
            req.beta = c.bounds.beta;
            req.source = c.bounds.param_source;
            if (!bounds_model.empty()) {
                const GnnModel model = load_model(bounds_model);
                gc = model.config;
                if (req.source == ParamSource::Measured) {
                    const ParamNorms pn = measure_param_norms(model);
                    req.omega = pn.omega;
                    req.beta = pn.beta;
                }
            } else if (req.source == ParamSource::Measured) {
                throw std::invalid_argument("measured parameter norms need --model");
            }
            req.m = ds.train_idx.size();
            req.K = gc.depth();
            req.last_hidden_width = gc.layer_dims[gc.depth() - 1];
            req.lipschitz = lipschitz(gc.activation);
            req.delta = c.bounds.delta;
            print_bound_report(std::cout, compute_bound_report(s, ds.features, req));
        } else if (*sweep) {
            RunConfig c = effective_config(sweep_opts);
            if (!sweep_kind.empty()) c.sweep.kind = parse_sweep_kind(sweep_kind);
            SweepSpec spec;
            if (c.sweep.kind) {
                spec = make_sweep_spec(c, *c.sweep.kind, !keep_lr);
            } else {
                // No sweep kind: one point at the base configuration.
                spec = make_sweep_spec(c, SweepKind::Alignment, false);
                spec.grid = {c.planted.gamma_ratio};
            }
            spec.jobs = sweep_jobs;
            spec.log = [](const std::string& line) { std::cerr << line << "\n"; };
            const SweepResult res = run_sweep(spec);
            std::vector<std::string> comments = config_comments(spec.base);
            comments.insert(comments.begin(), "sweep kind = " + std::string(to_string(spec.kind)));
            if (sweep_out.empty())
                write_results(res.rows, std::cout, comments);
            else
                write_results(res.rows, sweep_out, comments);
            if (!sweep_svg.empty()) write_trend_svg(res.report, sweep_svg);
            std::cerr << "spearman_rho(" << res.report.bound_name << ", mean gap_loss) = "
                      << format_double(res.report.spearman_rho) << "\n";
            for (const auto& f : res.report.flags) std::cerr << "flag: " << f << "\n";
        } else if (*norms) {
            const RunConfig c = effective_config(norm_opts);
            const auto checks = validate_expected_norms(c.planted_config(), parse_diffusion_kind(norm_diffusion),
                                                        norm_k, norm_samples, norm_slack, norm_jobs);
            std::cout << "row,diffusion,moment,empirical_mean,table_value,limit,pass,needs_slack\n";
            for (const auto& ch : checks)
                std::cout << to_string(ch.row) << ',' << to_string(ch.kind) << ',' << ch.moment << ','
                          << format_double(ch.empirical_mean) << ',' << format_double(ch.table_value) << ','
                          << format_double(ch.limit) << ',' << (ch.pass ? "true" : "false") << ','
                          << (ch.needs_slack ? "true" : "false") << "\n";
        } else if (*trc) {
            const RunConfig c = effective_config(trc_opts);
            const Dataset ds = dataset_from(trc_data, c);
            const DiffusionOperator s = build_diffusion(ds.adjacency, c.gnn.diffusion);
            GnnConfig gc = c.gnn_config(ds.feature_dim(), 2);
            gc.layer_dims.back() = 1;
            TrcEstimateOptions opt;
            opt.m = ds.train_idx.size();
            opt.num_sigma = trc_draws;
            opt.p_sigma = trc_p_sigma;
            opt.seed = c.gnn.seed;
            opt.jobs = trc_jobs;
            const TrcEstimate est = empirical_trc_lower(s, ds.features, c.bounds.omega, c.bounds.beta, gc, trc_models, opt);
            BoundInputs in;
            in.n = ds.num_nodes();
            in.m = opt.m;
            in.K = gc.depth();
            in.d = ds.feature_dim();
            in.lipschitz = lipschitz(gc.activation);
            in.omega = c.bounds.omega;
            in.beta = c.bounds.beta;
            in.s_inf = inf_norm(s.matrix);
            in.sx_2inf = max_col_two_norm(s.matrix * ds.features);
            in.x_inf = inf_norm(ds.features);
            const double upper = gc.residual_alpha ? residual_trc_upper(in, *gc.residual_alpha, in.x_inf) : trc_upper(in);
            std::cout << "trc_lower_mean = " << format_double(est.mean) << "\n"
                      << "standard_error = " << format_double(est.standard_error) << "\n"
                      << "num_sigma_draws = " << est.num_sigma_draws << "\n"
                      << "num_hypothesis_samples = " << est.num_hypothesis_samples << "\n"
                      << "p_sigma = " << format_double(est.p_sigma) << "\n"
                      << "trc_upper = " << format_double(upper) << "\n";
        } else if (*cora) {
            const RunConfig c = cora_defaults(effective_config(cora_opts));
            // Explicit keys win over the Cora protocol defaults.
            RunConfig run = c;
            for (const auto& [key, value] : cora_opts.overrides) set_config_value(run, key, value);
            const std::string content = cora_content.empty() ? cora_dir + "/cora.content" : cora_content;
            const std::string cites = cora_cites.empty() ? cora_dir + "/cora.cites" : cora_cites;
            CoraOptions co;
            co.seed = run.planted.seed;
            CoraStats stats;
            const Dataset ds = load_cora(content, cites, co, &stats);
            std::cout << "nodes = " << ds.num_nodes() << "\nfeatures = " << ds.feature_dim()
                      << "\nclasses = " << ds.num_classes << "\nlabeled = " << ds.train_idx.size() << "\n";
            const CoraRun result = run_cora(ds, run);
            print_metrics(std::cout, result.final_metrics);
            print_bound_report(std::cout, result.bounds);
            if (!cora_csv.empty()) write_results(trajectory_rows("cora", result.train, run.gnn.seed), cora_csv, config_comments(run));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
