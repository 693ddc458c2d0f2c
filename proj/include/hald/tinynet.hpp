#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hald/simplex.hpp"

namespace hald {

/// Fully-connected ReLU network sized for desk-scale experiments.
/// sizes = {input_dim, hidden..., num_classes}; weights are row-major
/// (out x in).  The flattening order used by flat_params/flat_grad and by
/// the checkpoint format is: layer 0 weights, layer 0 biases, layer 1
/// weights, ... in index order.
struct TinyNetParams {
    std::vector<int> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_dim() const { return sizes.front(); }
    int num_classes() const { return sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
    std::size_t num_params() const;
};

/// Parameter-shaped gradient container.
struct GradientSet {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

enum class TargetKind {
    soft,           ///< per-sample probability targets, tempered KL loss
    hard_smoothed,  ///< integer labels smoothed by alpha, cross-entropy loss
};

/// One training minibatch.  `inputs` is row-major batch_size x input_dim.
/// Soft batches carry one ProbVector per row.  Hard batches carry integer
/// labels plus the smoothing strength used to build their targets; when a
/// sample came out of CutMix, `labels_b` and `lams` (same length as
/// `labels`) describe the partner label and the realized mixing weight,
/// and the target becomes the area-weighted blend of the two smoothed
/// one-hots.
struct Batch {
    int input_dim = 0;
    std::vector<double> inputs;
    std::vector<ProbVector> soft_targets;
    std::vector<int> labels;
    std::vector<int> labels_b;
    std::vector<double> lams;
    double alpha = 0.0;

    int size() const {
        return input_dim == 0 ? 0 : static_cast<int>(inputs.size()) / input_dim;
    }
};

struct BackwardResult {
    GradientSet grads;
    double loss = 0.0;
};

enum class OptKind { plain, momentum, adamw };

/// Optimizer hyperparameters plus mutable slots (momentum / Adam moments).
/// The state lives outside the step function so a training run can carry
/// it across stage boundaries unchanged.
struct OptimizerState {
    OptKind kind = OptKind::plain;
    double lr = 1e-3;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;

    std::int64_t step_count = 0;
    std::vector<double> m;  // momentum buffer / Adam first moment (flat)
    std::vector<double> v;  // Adam second moment (flat)
};

/// Xavier-uniform initialization, biases zero, deterministic in `seed`.
TinyNetParams init_net(const std::vector<int>& sizes, std::uint64_t seed);

/// Batched forward pass; returns row-major batch x num_classes logits.
std::vector<double> forward(const TinyNetParams& params, std::span<const double> inputs);

/// Single-sample convenience wrapper around forward().
std::vector<double> forward_logits(const TinyNetParams& params, std::span<const double> input);

/// Class prediction for one input (argmax of logits).
int predict_class(const TinyNetParams& params, std::span<const double> input);

/// Mean loss and its parameter gradient on one batch.
///
/// soft:          L = mean_i KL(target_i || softmax(z_i / tau))
/// hard_smoothed: L = mean_i CE(smooth(label_i, alpha), softmax(z_i)),
///                tau ignored.
/// Throws std::invalid_argument on shape mismatches or tau <= 0.
BackwardResult backward(const TinyNetParams& params, const Batch& batch,
                        TargetKind kind, double tau);

/// In-place parameter update.  plain: w -= lr g; momentum: heavy-ball;
/// adamw: bias-corrected Adam with decoupled weight decay.  Weight decay
/// applies to weights only, never biases, for every optimizer kind.
void opt_step(TinyNetParams& params, const GradientSet& grads, OptimizerState& state);

std::vector<double> flat_params(const TinyNetParams& params);
std::vector<double> flat_grad(const GradientSet& grads);

/// Checkpoint round trip (magic "TNET").  Bit-exact: doubles are stored
/// verbatim little-endian.
void save_params(const std::filesystem::path& path, const TinyNetParams& params);
TinyNetParams load_params(const std::filesystem::path& path);

}  // namespace hald
