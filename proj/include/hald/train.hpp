#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hald/augment.hpp"
#include "hald/softlabel.hpp"
#include "hald/synthdata.hpp"
#include "hald/tinynet.hpp"

namespace hald {

/// Soft-hard-soft epoch split.  For a total budget n_total and a soft
/// budget n_soft: the first soft phase takes floor(n_soft / 2) epochs, the
/// hard phase takes n_total - n_soft, and the closing soft phase takes the
/// remaining soft epochs.  When the total budget does not exceed the soft
/// budget the run is all-soft: (n_total, 0, 0).
struct Schedule {
    int t_a = 0;  ///< opening soft epochs
    int t_b = 0;  ///< hard calibration epochs
    int t_c = 0;  ///< closing soft epochs

    int n_soft = 0;   ///< requested soft budget
    int n_hard = 0;   ///< max(n_total - n_soft, 0)
    int n_total = 0;  ///< t_a + t_b + t_c

    int total() const { return t_a + t_b + t_c; }
};

Schedule compute_schedule(int n_total, int n_soft);

enum class StageKind { soft, hard };

struct StageSpec {
    StageKind kind = StageKind::soft;
    int epochs = 0;
};

/// Hyperparameters shared by every trainer in the lab.  The soft-loss
/// temperature comes from the pool itself (it was fixed when the labels
/// were generated); `tau` here is used only by trainers that query a live
/// teacher.
struct TrainConfig {
    std::vector<int> hidden{128};
    int batch = 16;
    int steps_per_epoch = 64;
    double lr = 1e-3;
    OptKind opt = OptKind::adamw;
    double weight_decay = 0.0;
    double momentum = 0.9;
    double alpha = 0.1;        ///< label smoothing in hard stages
    double cutmix_beta = 1.0;  ///< Beta parameter for CutMix area draws
    double tau = 2.0;
    AugConfig strong;  ///< hard-stage view sampling; out_side fixes the net input
    int probe_size = 32;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    int epoch = 0;        ///< 1-based, global across stages
    int stage_index = 0;  ///< 0-based position in the stage list
    StageKind stage_kind = StageKind::soft;
    double mean_loss = 0.0;
    double test_acc = 0.0;
    double grad_cos = 0.0;  ///< soft-vs-hard gradient cosine on the fixed probe
    double seconds = 0.0;
};

/// Model snapshot taken at a stage boundary; after_epoch = 0 is the
/// initialization, later entries are "state after this many epochs".
struct StageBoundary {
    int after_epoch = 0;
    TinyNetParams params;
};

struct RunResult {
    TinyNetParams params;  ///< final weights
    std::vector<EpochRecord> epochs;
    std::vector<StageBoundary> boundaries;
    double final_test_acc = 0.0;
};

/// One epoch of pool-based soft supervision: steps_per_epoch minibatches
/// drawn uniformly from the pool via `rng`, KL loss against the stored
/// labels at the pool temperature, optimizer updates applied in place.
/// `entry_domain`, when non-null, restricts sampling to the listed entry
/// indices; the staged trainers use it to keep the gradient-cosine probe
/// entries out of training so the probe measures generalization rather
/// than memorization.  Returns the mean minibatch loss.
double stage_soft_epoch(TinyNetParams& params, OptimizerState& opt, const SoftLabelPool& pool,
                        const std::vector<LabeledImage>& train_images, const TrainConfig& config,
                        Rng& rng, const std::vector<std::size_t>* entry_domain = nullptr);

/// One epoch of hard-label calibration: per batch element, two images are
/// drawn uniformly (cross-class pairs allowed), each gets a fresh strong
/// view, the views are CutMixed, and the smoothed area-weighted label pair
/// is fit with cross-entropy.  Crops and CutMix geometry are resampled at
/// every step.  Returns the mean minibatch loss.
double stage_hard_epoch(TinyNetParams& params, OptimizerState& opt,
                        const std::vector<LabeledImage>& train_images, const TrainConfig& config,
                        Rng& rng);

/// Generic staged trainer.  One net and one optimizer state live across
/// all stages; each stage only switches the per-step supervision (soft
/// stages run stage_soft_epoch, hard stages stage_hard_epoch).
/// Zero-epoch stages consume no randomness, so appending or removing them
/// cannot shift a run.  The stage list must be non-empty.
RunResult train_stages(const std::vector<StageSpec>& stages, const SoftLabelPool& pool,
                       const std::vector<LabeledImage>& train_images,
                       const std::vector<LabeledImage>& test_images, const TrainConfig& config);

/// Soft-hard-soft under `schedule`; exactly train_stages on the three
/// corresponding stages.
RunResult train_hald(const SoftLabelPool& pool, const std::vector<LabeledImage>& train_images,
                     const std::vector<LabeledImage>& test_images, const Schedule& schedule,
                     const TrainConfig& config);

/// Pool-only baseline: one soft stage of n_epochs.
RunResult train_soft_only(const SoftLabelPool& pool,
                          const std::vector<LabeledImage>& train_images,
                          const std::vector<LabeledImage>& test_images, int n_epochs,
                          const TrainConfig& config);

/// Joint baseline: every step takes one soft batch and one hard batch and
/// applies a single update with gradient g_soft + lambda * g_hard.  With
/// lambda = 0 the update sequence (and hence the per-step soft losses)
/// matches train_soft_only exactly, because each supervision kind has its
/// own random stream.
RunResult train_joint(const SoftLabelPool& pool, const std::vector<LabeledImage>& train_images,
                      const std::vector<LabeledImage>& test_images, int n_epochs, double lambda,
                      const TrainConfig& config);

/// Upper-reference trainer for alignment diagnostics: every step draws
/// fresh strong views and labels them with the live teacher at temperature
/// config.tau, i.e. the unbounded-storage limit of the soft pool.
RunResult train_full_coverage(const TinyNetParams& teacher,
                              const std::vector<LabeledImage>& train_images,
                              const std::vector<LabeledImage>& test_images, int n_epochs,
                              const TrainConfig& config);

/// Combined loss/gradient for one joint step; exposed so the linearity of
/// the combination stays independently testable.
BackwardResult joint_backward(const TinyNetParams& params, const Batch& soft_batch,
                              const Batch& hard_batch, double lambda, double tau);

/// Mean KL of the stored labels against the model, over the whole pool
/// with crops rematerialized; the convergence signal for estimate_n_soft.
double pool_loss(const TinyNetParams& params, const SoftLabelPool& pool,
                 const std::vector<LabeledImage>& images);

struct EstimateConfig {
    double tol = 1e-4;  ///< an epoch "improves" if it beats the best by more than this
    int patience = 10;  ///< consecutive non-improving epochs before stopping
    int max_epochs = 300;
};

struct EstimateResult {
    int n_soft = 1;
    bool capped = false;  ///< improvement never stalled within max_epochs
};

/// Runs a fresh soft-only fit and reports the epoch at which full-pool
/// loss stopped improving: the run's empirical soft-convergence budget.
EstimateResult estimate_n_soft(const SoftLabelPool& pool,
                               const std::vector<LabeledImage>& train_images,
                               const TrainConfig& config, const EstimateConfig& est);

/// Fraction of test images classified correctly from their weak views.
double weak_view_accuracy(const TinyNetParams& params, const std::vector<LabeledImage>& images,
                          int out_side);

/// Writes the per-epoch log as CSV: epoch, stage, loss, test_acc,
/// grad_cos, seconds.  Stage is a letter: A for the first stage, B for the
/// second, and so on.
void write_runlog_csv(const std::filesystem::path& path, const RunResult& run);

}  // namespace hald
