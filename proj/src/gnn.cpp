#include "gnnlab/gnn.hpp"

#include "gnnlab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace gnnlab {

std::string_view to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

std::string_view to_string(LossKind l) { return l == LossKind::SquaredBinary ? "squared" : "nll"; }

Activation parse_activation(std::string_view text) {
    if (text == "relu") return Activation::ReLU;
    if (text == "identity" || text == "linear") return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + std::string(text) + "'");
}

LossKind parse_loss_kind(std::string_view text) {
    if (text == "squared" || text == "squared_binary") return LossKind::SquaredBinary;
    if (text == "nll" || text == "multiclass_nll") return LossKind::MulticlassNLL;
    throw std::invalid_argument("unknown loss '" + std::string(text) + "'");
}

bool GnnConfig::is_residual_layer(std::size_t k) const {
    return residual_alpha.has_value() && k >= 2 && k < layer_dims.size() && layer_dims[k] == layer_dims[1];
}

void GnnConfig::validate(std::optional<int> num_classes) const {
    if (layer_dims.size() < 2) throw std::invalid_argument("a GNN needs at least one layer (K >= 1)");
    for (std::size_t dim : layer_dims)
        if (dim == 0) throw std::invalid_argument("layer widths must be positive");
    const std::size_t out = layer_dims.back();
    if (loss == LossKind::SquaredBinary && out != 1)
        throw std::invalid_argument("squared binary loss requires a scalar output layer");
    if (loss == LossKind::MulticlassNLL && num_classes && out != static_cast<std::size_t>(*num_classes))
        throw std::invalid_argument("NLL output width must equal the number of classes");
    if (!(init_scale >= 0.0)) throw std::invalid_argument("init_scale must be non-negative");
    if (residual_alpha) {
        if (!(*residual_alpha >= 0.0 && *residual_alpha <= 1.0))
            throw std::invalid_argument("residual alpha must lie in [0, 1]");
        // Hidden layers after the first must match d_1 so alpha * g_1 is addable.
        for (std::size_t k = 2; k + 1 < layer_dims.size(); ++k)
            if (layer_dims[k] != layer_dims[1])
                throw std::invalid_argument("residual networks need equal hidden widths");
    }
}

std::size_t GnnModel::num_parameters() const {
    std::size_t total = 0;
    for (std::size_t k = 0; k < weights.size(); ++k)
        total += static_cast<std::size_t>(weights[k].size() + biases[k].size());
    return total;
}

void GnnModel::check_shapes() const {
    const auto& dims = config.layer_dims;
    if (weights.size() + 1 != dims.size() || biases.size() != weights.size())
        throw std::invalid_argument("model layer count does not match its config");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (static_cast<std::size_t>(weights[k].rows()) != dims[k] ||
            static_cast<std::size_t>(weights[k].cols()) != dims[k + 1] ||
            static_cast<std::size_t>(biases[k].size()) != dims[k + 1])
            throw std::invalid_argument("parameter shape mismatch in layer " + std::to_string(k + 1));
    }
}

double OptimizerState::learning_rate() const {
    return std::visit([](const auto& p) { return p.lr; }, kind);
}

OptimizerState make_sgd(double lr) {
    if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
    OptimizerState s;
    s.kind = SgdParams{lr};
    return s;
}

OptimizerState make_adam(double lr, double beta1, double beta2, double eps) {
    if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
    OptimizerState s;
    s.kind = AdamParams{lr, beta1, beta2, eps};
    return s;
}

GnnModel init_params(const GnnConfig& config) {
    config.validate();
    GnnModel model;
    model.config = config;
    const Rng root(config.seed, "init");
    for (std::size_t k = 1; k < config.layer_dims.size(); ++k) {
        const auto rows = static_cast<Eigen::Index>(config.layer_dims[k - 1]);
        const auto cols = static_cast<Eigen::Index>(config.layer_dims[k]);
        const double bound = config.init_scale / std::sqrt(static_cast<double>(rows));
        Rng rng = root.split(static_cast<std::uint64_t>(k));
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = bound == 0.0 ? 0.0 : rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(cols));
    }
    return model;
}

namespace {

// S g W, associated so the n x n product touches the narrower side.
Matrix propagate(const Matrix& s, const Matrix& g, const Matrix& w) {
    if (w.rows() < w.cols()) return (s * g) * w;
    return s * (g * w);
}

bool layer_is_linear(const GnnConfig& c, std::size_t k) {
    return c.activation == Activation::Identity || (k == c.depth() && c.last_layer_linear());
}

void validate_targets(const GnnConfig& c, const Targets& t, Eigen::Index n) {
    if (t.values.size() != n) throw std::invalid_argument("one target per node required");
    const double classes = static_cast<double>(c.layer_dims.back());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = t.values(i);
        if (c.loss == LossKind::SquaredBinary) {
            if (v != 1.0 && v != -1.0) throw std::invalid_argument("squared binary targets must be +-1");
        } else if (v < 0.0 || v >= classes || v != std::floor(v)) {
            throw std::invalid_argument("NLL targets must be class indices in [0, d_K)");
        }
    }
}

// Per-node loss and its gradient row w.r.t. the output row.
double node_loss(LossKind loss, const Eigen::Ref<const RowVector>& out, double target, RowVector* grad) {
    if (loss == LossKind::SquaredBinary) {
        const double r = out(0) - target;
        if (grad) (*grad)(0) = 2.0 * r;
        return r * r;
    }
    const double mx = out.maxCoeff();
    const RowVector e = (out.array() - mx).exp().matrix();
    const double z = e.sum();
    const auto c = static_cast<Eigen::Index>(target);
    if (grad) {
        *grad = e / z;
        (*grad)(c) -= 1.0;
    }
    return -(out(c) - mx - std::log(z));
}

IndexList complement(const IndexList& idx, std::size_t n) {
    std::vector<bool> in(n, false);
    for (std::size_t i : idx) in[i] = true;
    IndexList out;
    out.reserve(n - idx.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

double err01(const GnnConfig& c, const Matrix& output, const Targets& t, const IndexList& idx) {
    std::size_t wrong = 0;
    for (std::size_t i : idx) {
        const auto r = static_cast<Eigen::Index>(i);
        if (c.loss == LossKind::SquaredBinary) {
            const double pred = output(r, 0) >= 0.0 ? 1.0 : -1.0;
            wrong += pred != t.values(r);
        } else {
            Eigen::Index arg;
            output.row(r).maxCoeff(&arg);
            wrong += static_cast<double>(arg) != t.values(r);
        }
    }
    return idx.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(idx.size());
}

} // namespace

namespace {

// `sx`, when given, is the cached product S X used by the first layer.
std::vector<Matrix> forward_impl(const GnnModel& model, const DiffusionOperator& s, const Matrix& x, const Matrix* sx) {
    model.check_shapes();
    const auto& c = model.config;
    if (s.matrix.rows() != x.rows() || s.matrix.cols() != x.rows())
        throw std::invalid_argument("diffusion operator must be n x n with n = feature rows");
    if (static_cast<std::size_t>(x.cols()) != c.layer_dims[0])
        throw std::invalid_argument("feature width does not match d_0");

    const double alpha = c.residual_alpha.value_or(0.0);
    std::vector<Matrix> g;
    g.reserve(model.depth() + 1);
    g.push_back(x);
    for (std::size_t k = 1; k <= model.depth(); ++k) {
        Matrix z = (k == 1 && sx) ? Matrix(*sx * model.weights[0]) : propagate(s.matrix, g[k - 1], model.weights[k - 1]);
        z.rowwise() += model.biases[k - 1].transpose();
        if (c.is_residual_layer(k)) z = (1.0 - alpha) * z + alpha * g[1];
        if (!layer_is_linear(c, k)) z = z.cwiseMax(0.0);
        g.push_back(std::move(z));
    }
    return g;
}

} // namespace

std::vector<Matrix> forward(const GnnModel& model, const DiffusionOperator& s, const Matrix& x) {
    return forward_impl(model, s, x, nullptr);
}

Matrix predict(const GnnModel& model, const DiffusionOperator& s, const Matrix& x) {
    return std::move(forward(model, s, x).back());
}

double loss_value(const GnnModel& model, const Matrix& output, const Targets& targets, const IndexList& idx) {
    if (idx.empty()) throw std::invalid_argument("loss over an empty index set is undefined");
    double total = 0.0;
    for (std::size_t i : idx) {
        const auto r = static_cast<Eigen::Index>(i);
        total += node_loss(model.config.loss, output.row(r), targets.values(r), nullptr);
    }
    return total / static_cast<double>(idx.size());
}

namespace {

LossAndGrad loss_and_grad_impl(const GnnModel& model, const DiffusionOperator& s, const Matrix& x,
                               const Targets& targets, const IndexList& train_idx, const Matrix* sx) {
    const auto& c = model.config;
    if (train_idx.empty()) throw std::invalid_argument("empty labeled set");
    validate_targets(c, targets, x.rows());
    const std::vector<Matrix> g = forward_impl(model, s, x, sx);
    const std::size_t depth = model.depth();
    const Matrix& out = g[depth];
    const double inv_m = 1.0 / static_cast<double>(train_idx.size());

    LossAndGrad result;
    Matrix d_out = Matrix::Zero(out.rows(), out.cols());
    RowVector row_grad(out.cols());
    for (std::size_t i : train_idx) {
        const auto r = static_cast<Eigen::Index>(i);
        result.loss += node_loss(c.loss, out.row(r), targets.values(r), &row_grad);
        d_out.row(r) += inv_m * row_grad;
    }
    result.loss *= inv_m;

    result.grads.weights.resize(depth);
    result.grads.biases.resize(depth);
    const double alpha = c.residual_alpha.value_or(0.0);
    std::vector<Matrix> d_g(depth + 1);
    d_g[depth] = std::move(d_out);
    for (std::size_t k = depth; k >= 1; --k) {
        Matrix d_z = std::move(d_g[k]);
        if (!layer_is_linear(c, k)) d_z = d_z.cwiseProduct((g[k].array() > 0.0).cast<double>().matrix());
        if (c.is_residual_layer(k)) {
            if (d_g[1].size() == 0) d_g[1] = Matrix::Zero(g[1].rows(), g[1].cols());
            d_g[1] += alpha * d_z;
            d_z *= 1.0 - alpha;
        }
        result.grads.biases[k - 1] = d_z.colwise().sum().transpose();
        if (k == 1 && sx) {
            result.grads.weights[0] = sx->transpose() * d_z;
            break;
        }
        const Matrix u = s.matrix.transpose() * d_z;
        result.grads.weights[k - 1] = g[k - 1].transpose() * u;
        if (k > 1) {
            Matrix back = u * model.weights[k - 1].transpose();
            if (d_g[k - 1].size() == 0)
                d_g[k - 1] = std::move(back);
            else
                d_g[k - 1] += back;
        }
    }
    return result;
}

} // namespace

LossAndGrad loss_and_grad(const GnnModel& model, const DiffusionOperator& s, const Matrix& x, const Targets& targets,
                          const IndexList& train_idx) {
    return loss_and_grad_impl(model, s, x, targets, train_idx, nullptr);
}

void optimizer_step(OptimizerState& state, GnnModel& model, const Gradients& grads) {
    const std::size_t depth = model.depth();
    if (grads.weights.size() != depth || grads.biases.size() != depth)
        throw std::invalid_argument("gradient layout does not match the model");
    ++state.step_count;
    if (const auto* sgd = std::get_if<SgdParams>(&state.kind)) {
        for (std::size_t k = 0; k < depth; ++k) {
            model.weights[k] -= sgd->lr * grads.weights[k];
            model.biases[k] -= sgd->lr * grads.biases[k];
        }
        return;
    }
    const auto& adam = std::get<AdamParams>(state.kind);
    if (state.m_w.size() != depth) {
        state.m_w.clear();
        state.v_w.clear();
        state.m_b.clear();
        state.v_b.clear();
        for (std::size_t k = 0; k < depth; ++k) {
            state.m_w.push_back(Matrix::Zero(model.weights[k].rows(), model.weights[k].cols()));
            state.v_w.push_back(Matrix::Zero(model.weights[k].rows(), model.weights[k].cols()));
            state.m_b.push_back(Vector::Zero(model.biases[k].size()));
            state.v_b.push_back(Vector::Zero(model.biases[k].size()));
        }
    }
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(adam.beta1, t);
    const double c2 = 1.0 - std::pow(adam.beta2, t);
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
        m = adam.beta1 * m + (1.0 - adam.beta1) * grad;
        v = adam.beta2 * v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
        param.array() -= adam.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam.eps);
    };
    for (std::size_t k = 0; k < depth; ++k) {
        update(model.weights[k], state.m_w[k], state.v_w[k], grads.weights[k]);
        update(model.biases[k], state.m_b[k], state.v_b[k], grads.biases[k]);
    }
}

Metrics evaluate_output(const GnnConfig& config, const Matrix& output, const Targets& targets,
                        const IndexList& train_idx) {
    const auto n = static_cast<std::size_t>(output.rows());
    validate_targets(config, targets, output.rows());
    const IndexList unlabeled = complement(train_idx, n);
    if (unlabeled.empty()) throw std::invalid_argument("unlabeled set is empty (m = n); L_u is undefined");
    if (train_idx.empty()) throw std::invalid_argument("labeled set is empty");

    GnnModel shell;
    shell.config = config;
    IndexList all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;

    Metrics m;
    m.train_loss = loss_value(shell, output, targets, train_idx);
    m.unlabeled_loss = loss_value(shell, output, targets, unlabeled);
    m.full_loss = loss_value(shell, output, targets, all);
    m.train_err01 = err01(config, output, targets, train_idx);
    m.unlabeled_err01 = err01(config, output, targets, unlabeled);
    m.gap_loss = m.unlabeled_loss - m.train_loss;
    m.gap_err01 = m.unlabeled_err01 - m.train_err01;
    return m;
}

Metrics evaluate(const GnnModel& model, const DiffusionOperator& s, const Matrix& x, const Targets& targets,
                 const IndexList& train_idx) {
    return evaluate_output(model.config, predict(model, s, x), targets, train_idx);
}

Targets make_targets(const Dataset& dataset, LossKind loss) {
    Targets t;
    if (loss == LossKind::SquaredBinary) {
        if (dataset.num_classes != 2) throw std::invalid_argument("squared binary loss needs a two-class dataset");
        t.values = dataset.binary_targets();
    } else {
        t.values.resize(static_cast<Eigen::Index>(dataset.classes.size()));
        for (std::size_t i = 0; i < dataset.classes.size(); ++i)
            t.values(static_cast<Eigen::Index>(i)) = dataset.classes[i];
    }
    return t;
}

TrainResult train(const Dataset& dataset, const DiffusionOperator& s, const GnnConfig& config,
                  const TrainConfig& train_config) {
    config.validate(dataset.num_classes);
    if (train_config.epochs < 0 || train_config.eval_every <= 0)
        throw std::invalid_argument("epochs must be >= 0 and eval_every > 0");
    if (static_cast<std::size_t>(dataset.features.cols()) != config.layer_dims.front())
        throw std::invalid_argument("dataset feature width does not match d_0");

    TrainResult result;
    result.model = init_params(config);
    const Targets targets = make_targets(dataset, config.loss);
    OptimizerState opt = train_config.optimizer;
    if (s.matrix.rows() != dataset.features.rows() || s.matrix.cols() != dataset.features.rows())
        throw std::invalid_argument("diffusion operator must be n x n with n = feature rows");
    const Matrix sx = s.matrix * dataset.features;
    for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
        const LossAndGrad lg =
            loss_and_grad_impl(result.model, s, dataset.features, targets, dataset.train_idx, &sx);
        if (!std::isfinite(lg.loss)) throw TrainingDiverged(epoch);
        optimizer_step(opt, result.model, lg.grads);
        if (epoch % train_config.eval_every == 0) {
            const Metrics m = evaluate_output(config, forward_impl(result.model, s, dataset.features, &sx).back(),
                                              targets, dataset.train_idx);
            if (!std::isfinite(m.train_loss) || !std::isfinite(m.unlabeled_loss)) throw TrainingDiverged(epoch);
            result.trajectory.push_back({epoch, m});
        }
    }
    return result;
}

ParamNorms measure_param_norms(const GnnModel& model) {
    ParamNorms out;
    for (std::size_t k = 0; k < model.depth(); ++k) {
        const Matrix& w = model.weights[k];
        if (w.size() > 0) out.omega = std::max(out.omega, w.cwiseAbs().rowwise().sum().maxCoeff());
        out.beta = std::max(out.beta, model.biases[k].cwiseAbs().sum());
    }
    return out;
}

} // namespace gnnlab
