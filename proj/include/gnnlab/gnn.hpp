#ifndef GNNLAB_GNN_HPP
#define GNNLAB_GNN_HPP

#include "gnnlab/graph_ops.hpp"
#include "gnnlab/planted.hpp"
#include "gnnlab/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gnnlab {

enum class Activation { Identity, ReLU };
enum class LossKind { SquaredBinary, MulticlassNLL };

std::string_view to_string(Activation a);
std::string_view to_string(LossKind l);
Activation parse_activation(std::string_view text);
LossKind parse_loss_kind(std::string_view text);

/// Both supported activations are 1-Lipschitz.
inline double lipschitz(Activation) { return 1.0; }

struct GnnConfig {
    std::vector<std::size_t> layer_dims; ///< [d_0 = d, d_1, ..., d_K]
    Activation activation = Activation::ReLU;
    /// Residual interpolation weight; absent means a vanilla network.
    /// Layers k >= 2 whose width equals d_1 mix in alpha * g_1.
    std::optional<double> residual_alpha;
    LossKind loss = LossKind::SquaredBinary;
    double init_scale = 1.0;
    std::uint64_t seed = 0;
    /// Replace the activation by the identity on layer K. Unset means
    /// "on for SquaredBinary, off for MulticlassNLL".
    std::optional<bool> linear_last_layer;

    [[nodiscard]] std::size_t depth() const { return layer_dims.empty() ? 0 : layer_dims.size() - 1; }
    [[nodiscard]] bool last_layer_linear() const {
        return linear_last_layer.value_or(loss == LossKind::SquaredBinary);
    }
    /// Whether layer k (1-based) carries the residual mix.
    [[nodiscard]] bool is_residual_layer(std::size_t k) const;
    void validate(std::optional<int> num_classes = std::nullopt) const;
};

struct GnnModel {
    std::vector<Matrix> weights; ///< W_k is d_{k-1} x d_k
    std::vector<Vector> biases;  ///< b_k has length d_k
    GnnConfig config;

    [[nodiscard]] std::size_t depth() const { return weights.size(); }
    [[nodiscard]] std::size_t num_parameters() const;
    void check_shapes() const;
};

/// Gradients share the model's parameter layout.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

struct Metrics {
    double train_loss = 0;
    double unlabeled_loss = 0;
    double full_loss = 0;
    double train_err01 = 0;
    double unlabeled_err01 = 0;
    double gap_loss = 0;  ///< unlabeled_loss - train_loss
    double gap_err01 = 0; ///< unlabeled_err01 - train_err01
};

/// Targets for the two losses: +-1 values, or class indices stored as doubles.
struct Targets {
    Vector values;
};

struct SgdParams {
    double lr = 0.01;
};
struct AdamParams {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerState {
    std::variant<SgdParams, AdamParams> kind = SgdParams{};
    long step_count = 0;
    std::vector<Matrix> m_w, v_w; ///< Adam moments, shaped like the weights
    std::vector<Vector> m_b, v_b;

    [[nodiscard]] double learning_rate() const;
};

OptimizerState make_sgd(double lr);
OptimizerState make_adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Weights i.i.d. uniform on +-init_scale/sqrt(d_{k-1}); zero biases.
GnnModel init_params(const GnnConfig& config);

/// Returns [g_0 = X, g_1, ..., g_K].
std::vector<Matrix> forward(const GnnModel& model, const DiffusionOperator& s, const Matrix& x);

/// Output of the last layer only.
Matrix predict(const GnnModel& model, const DiffusionOperator& s, const Matrix& x);

struct LossAndGrad {
    double loss = 0;
    Gradients grads;
};

/// Mean loss over train_idx with exact reverse-mode gradients.
LossAndGrad loss_and_grad(const GnnModel& model, const DiffusionOperator& s, const Matrix& x, const Targets& targets,
                          const IndexList& train_idx);

/// Mean loss over an index set without gradients.
double loss_value(const GnnModel& model, const Matrix& output, const Targets& targets, const IndexList& idx);

void optimizer_step(OptimizerState& state, GnnModel& model, const Gradients& grads);

/// Labeled/unlabeled error triple from an output matrix. Binary prediction is
/// +1 for outputs >= 0 and -1 otherwise; multiclass uses argmax.
Metrics evaluate_output(const GnnConfig& config, const Matrix& output, const Targets& targets,
                        const IndexList& train_idx);
Metrics evaluate(const GnnModel& model, const DiffusionOperator& s, const Matrix& x, const Targets& targets,
                 const IndexList& train_idx);

struct TrainConfig {
    OptimizerState optimizer = make_sgd(0.01);
    int epochs = 1000;
    int eval_every = 50;
};

struct TrajectoryPoint {
    int epoch = 0;
    Metrics metrics;
};

struct TrainResult {
    GnnModel model;
    std::vector<TrajectoryPoint> trajectory;
};

class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(int epoch)
        : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)), epoch_(epoch) {}
    [[nodiscard]] int epoch() const { return epoch_; }

private:
    int epoch_;
};

/// Targets matching the loss: +-1 for SquaredBinary, class index otherwise.
Targets make_targets(const Dataset& dataset, LossKind loss);

/// Full-batch training. Metrics are recorded after epochs eval_every,
/// 2*eval_every, ..., epochs.
TrainResult train(const Dataset& dataset, const DiffusionOperator& s, const GnnConfig& config,
                  const TrainConfig& train_config);

struct ParamNorms {
    double omega = 0; ///< max_k ||W_k||_inf
    double beta = 0;  ///< max_k ||b_k||_1
};

ParamNorms measure_param_norms(const GnnModel& model);

/// Versioned little-endian binary checkpoint.
void save_model(const GnnModel& model, const std::string& path);
GnnModel load_model(const std::string& path);

} // namespace gnnlab

#endif // GNNLAB_GNN_HPP
