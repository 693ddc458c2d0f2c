#include "hald/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hald {

namespace {

// Stream tags: every source of randomness in a run owns a stream, so
// stages and diagnostics can never steal draws from one another.
constexpr std::uint64_t kSoftStream = 0x534f4654ULL;   // pool minibatch sampling
constexpr std::uint64_t kHardStream = 0x48415244ULL;   // fresh views + CutMix
constexpr std::uint64_t kProbeStream = 0x50524f42ULL;  // gradient-cosine probe

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

/// Mean KL(target || softmax(z / tau)) over a rematerialized batch, the
/// same quantity backward() reports for soft batches, minus the gradient
/// work.
double soft_batch_loss(const TinyNetParams& params, const PoolBatch& batch, double tau) {
    std::vector<double> logits = forward(params, batch.inputs);
    int num_classes = params.num_classes();
    int rows = static_cast<int>(batch.targets.size());
    double loss = 0.0;
    for (int i = 0; i < rows; ++i) {
        const double* z = logits.data() + static_cast<std::size_t>(i) * num_classes;
        double top = z[0];
        for (int c = 1; c < num_classes; ++c) top = std::max(top, z[c]);
        double sum = 0.0;
        for (int c = 0; c < num_classes; ++c) sum += std::exp((z[c] - top) / tau);
        double logz = std::log(sum) + top / tau;
        const ProbVector& t = batch.targets[static_cast<std::size_t>(i)];
        for (int c = 0; c < num_classes; ++c) {
            double tc = t[c];
            if (tc > 0.0) loss += tc * (std::log(tc) - (z[c] / tau - logz));
        }
    }
    return loss / rows;
}

struct TrainerContext {
    const SoftLabelPool* pool = nullptr;
    const TinyNetParams* teacher = nullptr;  // full-coverage reference only
    const std::vector<LabeledImage>* train = nullptr;
    const TrainConfig* cfg = nullptr;

    TinyNetParams params;
    OptimizerState opt;
    Rng soft_rng{0};
    Rng hard_rng{0};

    int out_side = 0;
    int input_dim = 0;
    int num_classes = 0;
    double soft_tau = 1.0;

    Batch probe_soft;  // fixed inputs + stored soft labels
    Batch probe_hard;  // same inputs + smoothed true labels

    // Pool entry indices soft stages may sample (empty = all).  Probe
    // entries are excluded so the cosine tracks a held-out batch.
    std::vector<std::size_t> soft_domain;

    // Cached weak views of the evaluation split.
    std::vector<double> eval_inputs;
    std::vector<int> eval_labels;
};

void cache_eval_views(TrainerContext& ctx, const std::vector<LabeledImage>& test_images) {
    ctx.eval_inputs.reserve(test_images.size() * static_cast<std::size_t>(ctx.input_dim));
    for (const LabeledImage& li : test_images) {
        CropSpec spec = weak_crop_spec(li.image.side, ctx.out_side);
        std::vector<float> pix = apply_crop(li.image, spec);
        for (float v : pix) ctx.eval_inputs.push_back(static_cast<double>(v));
        ctx.eval_labels.push_back(li.label);
    }
}

double eval_accuracy(const TrainerContext& ctx) {
    if (ctx.eval_labels.empty()) return 0.0;
    std::vector<double> logits = forward(ctx.params, ctx.eval_inputs);
    int hits = 0;
    for (std::size_t i = 0; i < ctx.eval_labels.size(); ++i) {
        const double* z = logits.data() + i * static_cast<std::size_t>(ctx.num_classes);
        int arg = 0;
        for (int c = 1; c < ctx.num_classes; ++c)
            if (z[c] > z[arg]) arg = c;
        if (arg == ctx.eval_labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ctx.eval_labels.size());
}

void build_probe(TrainerContext& ctx) {
    const TrainConfig& cfg = *ctx.cfg;
    if (cfg.probe_size < 1) throw std::invalid_argument("train: probe_size must be positive");
    Rng probe_rng(cfg.seed, kProbeStream);

    ctx.probe_soft.input_dim = ctx.input_dim;
    ctx.probe_hard.input_dim = ctx.input_dim;
    ctx.probe_hard.alpha = cfg.alpha;

    if (ctx.pool != nullptr) {
        // Draw the probe as a held-out batch: when the pool is large enough,
        // pick distinct entries and withhold them from soft-stage sampling,
        // so the cosine reflects generalization to unseen stored views.
        // Tiny pools (not enough entries to spare) fall back to an in-sample
        // probe with replacement.
        const std::size_t n = ctx.pool->entries.size();
        std::vector<std::size_t> indices;
        if (n > static_cast<std::size_t>(cfg.probe_size)) {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (int k = 0; k < cfg.probe_size; ++k) {
                std::size_t j = static_cast<std::size_t>(probe_rng.uniform_int(
                    static_cast<std::int64_t>(k), static_cast<std::int64_t>(n) - 1));
                std::swap(order[static_cast<std::size_t>(k)], order[j]);
            }
            indices.assign(order.begin(), order.begin() + cfg.probe_size);
            ctx.soft_domain.assign(order.begin() + cfg.probe_size, order.end());
            std::sort(ctx.soft_domain.begin(), ctx.soft_domain.end());
        } else {
            indices.resize(static_cast<std::size_t>(cfg.probe_size));
            for (std::size_t& idx : indices)
                idx = static_cast<std::size_t>(
                    probe_rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        }
        PoolBatch pb = pool_entry_batch(*ctx.pool, *ctx.train, indices);
        ctx.probe_soft.inputs = pb.inputs;
        ctx.probe_soft.soft_targets = std::move(pb.targets);
        ctx.probe_hard.inputs = std::move(pb.inputs);
        for (std::size_t idx : indices) {
            std::uint32_t id = ctx.pool->entries[idx].image_id;
            ctx.probe_hard.labels.push_back((*ctx.train)[id].label);
        }
    } else {
        // Full-coverage runs have no pool; the probe is a fixed set of
        // fresh views labeled by the live teacher.
        std::vector<double> x(static_cast<std::size_t>(ctx.input_dim));
        for (int k = 0; k < cfg.probe_size; ++k) {
            std::size_t i = static_cast<std::size_t>(probe_rng.uniform_int(
                0, static_cast<std::int64_t>(ctx.train->size()) - 1));
            auto [spec, pix] = sample_crop((*ctx.train)[i].image, cfg.strong, probe_rng);
            for (int j = 0; j < ctx.input_dim; ++j) {
                double v = pix[static_cast<std::size_t>(j)];
                ctx.probe_soft.inputs.push_back(v);
                ctx.probe_hard.inputs.push_back(v);
                x[static_cast<std::size_t>(j)] = v;
            }
            ctx.probe_soft.soft_targets.push_back(
                softmax_temp(forward_logits(*ctx.teacher, x), ctx.soft_tau));
            ctx.probe_hard.labels.push_back((*ctx.train)[i].label);
        }
    }
}

double probe_cosine(const TrainerContext& ctx) {
    BackwardResult soft = backward(ctx.params, ctx.probe_soft, TargetKind::soft, ctx.soft_tau);
    BackwardResult hard = backward(ctx.params, ctx.probe_hard, TargetKind::hard_smoothed, 1.0);
    std::vector<double> gs = flat_grad(soft.grads);
    std::vector<double> gh = flat_grad(hard.grads);
    return cosine_sim(gs, gh);
}

TrainerContext make_context(const SoftLabelPool* pool, const TinyNetParams* teacher,
                            const std::vector<LabeledImage>& train_images,
                            const std::vector<LabeledImage>& test_images,
                            const TrainConfig& cfg) {
    if (train_images.empty()) throw std::invalid_argument("train: empty training set");
    if (cfg.batch < 1) throw std::invalid_argument("train: batch size must be positive");
    if (cfg.steps_per_epoch < 1) throw std::invalid_argument("train: steps_per_epoch must be positive");
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw std::invalid_argument("train: alpha outside [0, 1]");
    if (!(cfg.cutmix_beta > 0.0)) throw std::invalid_argument("train: cutmix beta must be positive");
    if (cfg.strong.kind != ViewKind::strong)
        throw std::invalid_argument("train: hard-stage view config must be strong");

    TrainerContext ctx;
    ctx.pool = pool;
    ctx.teacher = teacher;
    ctx.train = &train_images;
    ctx.cfg = &cfg;
    ctx.out_side = cfg.strong.out_side;
    ctx.input_dim = ctx.out_side * ctx.out_side;

    if (pool != nullptr) {
        if (pool->entries.empty()) throw std::invalid_argument("train: empty soft-label pool");
        ctx.num_classes = pool->num_classes;
        ctx.soft_tau = static_cast<double>(pool->tau);
        if (pool->entries.front().crop.out_side != ctx.out_side)
            throw std::invalid_argument("train: pool crop size does not match strong view config");
        if (pool->num_images != train_images.size())
            throw std::invalid_argument("train: pool was built over a different image count");
    } else {
        if (teacher == nullptr) throw std::invalid_argument("train: need a pool or a teacher");
        ctx.num_classes = teacher->num_classes();
        ctx.soft_tau = cfg.tau;
        if (!(ctx.soft_tau > 0.0)) throw std::invalid_argument("train: tau must be positive");
        if (teacher->input_dim() != ctx.input_dim)
            throw std::invalid_argument("train: teacher input does not match crop size");
    }
    for (const LabeledImage& li : train_images)
        if (li.label < 0 || li.label >= ctx.num_classes)
            throw std::invalid_argument("train: image label out of class range");

    std::vector<int> sizes;
    sizes.push_back(ctx.input_dim);
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(ctx.num_classes);
    ctx.params = init_net(sizes, cfg.seed);

    ctx.opt.kind = cfg.opt;
    ctx.opt.lr = cfg.lr;
    ctx.opt.weight_decay = cfg.weight_decay;
    ctx.opt.momentum = cfg.momentum;

    ctx.soft_rng = Rng(cfg.seed, kSoftStream);
    ctx.hard_rng = Rng(cfg.seed, kHardStream);

    build_probe(ctx);
    cache_eval_views(ctx, test_images);
    return ctx;
}

void check_finite(double loss, const char* where) {
    if (!std::isfinite(loss))
        throw std::runtime_error(std::string("train: loss diverged in ") + where);
}

Batch draw_soft_batch(const SoftLabelPool& pool, const std::vector<LabeledImage>& train,
                      int batch_size, Rng& rng, const std::vector<std::size_t>* domain) {
    PoolBatch pb;
    if (domain == nullptr) {
        pb = sample_batch(pool, train, rng, batch_size);
    } else {
        std::vector<std::size_t> indices(static_cast<std::size_t>(batch_size));
        for (std::size_t& idx : indices)
            idx = (*domain)[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(domain->size()) - 1))];
        pb = pool_entry_batch(pool, train, indices);
    }
    Batch b;
    b.input_dim = pb.input_dim;
    b.inputs = std::move(pb.inputs);
    b.soft_targets = std::move(pb.targets);
    return b;
}

Batch draw_hard_batch(const std::vector<LabeledImage>& train, const TrainConfig& cfg, Rng& rng) {
    int out_side = cfg.strong.out_side;
    Batch b;
    b.input_dim = out_side * out_side;
    b.alpha = cfg.alpha;
    std::int64_t n = static_cast<std::int64_t>(train.size());
    for (int k = 0; k < cfg.batch; ++k) {
        std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
        auto [spec_a, pix_a] = sample_crop(train[i].image, cfg.strong, rng);
        auto [spec_b, pix_b] = sample_crop(train[j].image, cfg.strong, rng);
        auto [mixed, draw] = cutmix_images(pix_a, pix_b, out_side, cfg.cutmix_beta, rng);
        for (float v : mixed) b.inputs.push_back(static_cast<double>(v));
        b.labels.push_back(train[i].label);
        b.labels_b.push_back(train[j].label);
        b.lams.push_back(draw.lam_effective);
    }
    return b;
}

Batch draw_fresh_soft_batch(TrainerContext& ctx) {
    const TrainConfig& cfg = *ctx.cfg;
    const std::vector<LabeledImage>& train = *ctx.train;
    Batch b;
    b.input_dim = ctx.input_dim;
    std::vector<double> x(static_cast<std::size_t>(ctx.input_dim));
    std::int64_t n = static_cast<std::int64_t>(train.size());
    for (int k = 0; k < cfg.batch; ++k) {
        std::size_t i = static_cast<std::size_t>(ctx.soft_rng.uniform_int(0, n - 1));
        auto [spec, pix] = sample_crop(train[i].image, cfg.strong, ctx.soft_rng);
        for (int j = 0; j < ctx.input_dim; ++j) {
            double v = pix[static_cast<std::size_t>(j)];
            b.inputs.push_back(v);
            x[static_cast<std::size_t>(j)] = v;
        }
        b.soft_targets.push_back(softmax_temp(forward_logits(*ctx.teacher, x), ctx.soft_tau));
    }
    return b;
}

double run_fresh_soft_epoch(TrainerContext& ctx) {
    double total = 0.0;
    for (int s = 0; s < ctx.cfg->steps_per_epoch; ++s) {
        Batch b = draw_fresh_soft_batch(ctx);
        BackwardResult bw = backward(ctx.params, b, TargetKind::soft, ctx.soft_tau);
        check_finite(bw.loss, "full-coverage soft stage");
        opt_step(ctx.params, bw.grads, ctx.opt);
        total += bw.loss;
    }
    return total / ctx.cfg->steps_per_epoch;
}

double run_soft_epoch(TrainerContext& ctx) {
    if (ctx.pool == nullptr) return run_fresh_soft_epoch(ctx);
    return stage_soft_epoch(ctx.params, ctx.opt, *ctx.pool, *ctx.train, *ctx.cfg, ctx.soft_rng,
                            ctx.soft_domain.empty() ? nullptr : &ctx.soft_domain);
}

double run_hard_epoch(TrainerContext& ctx) {
    return stage_hard_epoch(ctx.params, ctx.opt, *ctx.train, *ctx.cfg, ctx.hard_rng);
}

RunResult run_stage_list(TrainerContext& ctx, const std::vector<StageSpec>& stages) {
    if (stages.empty()) throw std::invalid_argument("train: empty stage list");
    RunResult res;
    res.boundaries.push_back({0, ctx.params});
    int epoch = 0;
    for (std::size_t si = 0; si < stages.size(); ++si) {
        const StageSpec& stage = stages[si];
        if (stage.epochs < 0) throw std::invalid_argument("train: negative stage length");
        for (int e = 0; e < stage.epochs; ++e) {
            double t0 = now_seconds();
            double mean_loss = stage.kind == StageKind::soft ? run_soft_epoch(ctx)
                                                             : run_hard_epoch(ctx);
            ++epoch;
            EpochRecord rec;
            rec.epoch = epoch;
            rec.stage_index = static_cast<int>(si);
            rec.stage_kind = stage.kind;
            rec.mean_loss = mean_loss;
            rec.test_acc = eval_accuracy(ctx);
            rec.grad_cos = probe_cosine(ctx);
            rec.seconds = now_seconds() - t0;
            res.epochs.push_back(rec);
        }
        res.boundaries.push_back({epoch, ctx.params});
    }
    res.params = std::move(ctx.params);
    res.final_test_acc = res.epochs.empty() ? 0.0 : res.epochs.back().test_acc;
    return res;
}

}  // namespace

Schedule compute_schedule(int n_total, int n_soft) {
    if (n_total < 0 || n_soft < 0)
        throw std::invalid_argument("compute_schedule: negative epoch budget");
    Schedule s;
    s.n_soft = n_soft;
    s.n_hard = std::max(n_total - n_soft, 0);
    s.n_total = n_total;
    if (n_total <= n_soft) {
        s.t_a = n_total;
        s.t_b = 0;
        s.t_c = 0;
        return s;
    }
    s.t_a = n_soft / 2;
    s.t_b = s.n_hard;
    s.t_c = n_soft - s.t_a;
    return s;
}

double stage_soft_epoch(TinyNetParams& params, OptimizerState& opt, const SoftLabelPool& pool,
                        const std::vector<LabeledImage>& train_images, const TrainConfig& config,
                        Rng& rng, const std::vector<std::size_t>* entry_domain) {
    if (pool.entries.empty()) throw std::invalid_argument("stage_soft_epoch: empty pool");
    if (entry_domain != nullptr && entry_domain->empty())
        throw std::invalid_argument("stage_soft_epoch: empty entry domain");
    double total = 0.0;
    for (int s = 0; s < config.steps_per_epoch; ++s) {
        Batch b = draw_soft_batch(pool, train_images, config.batch, rng, entry_domain);
        BackwardResult bw = backward(params, b, TargetKind::soft, static_cast<double>(pool.tau));
        check_finite(bw.loss, "soft stage");
        opt_step(params, bw.grads, opt);
        total += bw.loss;
    }
    return total / config.steps_per_epoch;
}

double stage_hard_epoch(TinyNetParams& params, OptimizerState& opt,
                        const std::vector<LabeledImage>& train_images, const TrainConfig& config,
                        Rng& rng) {
    if (train_images.size() < 2)
        throw std::invalid_argument("stage_hard_epoch: need at least two images");
    double total = 0.0;
    for (int s = 0; s < config.steps_per_epoch; ++s) {
        Batch b = draw_hard_batch(train_images, config, rng);
        BackwardResult bw = backward(params, b, TargetKind::hard_smoothed, 1.0);
        check_finite(bw.loss, "hard stage");
        opt_step(params, bw.grads, opt);
        total += bw.loss;
    }
    return total / config.steps_per_epoch;
}

RunResult train_stages(const std::vector<StageSpec>& stages, const SoftLabelPool& pool,
                       const std::vector<LabeledImage>& train_images,
                       const std::vector<LabeledImage>& test_images, const TrainConfig& config) {
    TrainerContext ctx = make_context(&pool, nullptr, train_images, test_images, config);
    return run_stage_list(ctx, stages);
}

RunResult train_hald(const SoftLabelPool& pool, const std::vector<LabeledImage>& train_images,
                     const std::vector<LabeledImage>& test_images, const Schedule& schedule,
                     const TrainConfig& config) {
    std::vector<StageSpec> stages{{StageKind::soft, schedule.t_a},
                                  {StageKind::hard, schedule.t_b},
                                  {StageKind::soft, schedule.t_c}};
    return train_stages(stages, pool, train_images, test_images, config);
}

RunResult train_soft_only(const SoftLabelPool& pool,
                          const std::vector<LabeledImage>& train_images,
                          const std::vector<LabeledImage>& test_images, int n_epochs,
                          const TrainConfig& config) {
    std::vector<StageSpec> stages{{StageKind::soft, n_epochs}};
    return train_stages(stages, pool, train_images, test_images, config);
}

BackwardResult joint_backward(const TinyNetParams& params, const Batch& soft_batch,
                              const Batch& hard_batch, double lambda, double tau) {
    if (lambda < 0.0) throw std::invalid_argument("joint_backward: negative lambda");
    BackwardResult soft = backward(params, soft_batch, TargetKind::soft, tau);
    BackwardResult hard = backward(params, hard_batch, TargetKind::hard_smoothed, 1.0);
    BackwardResult out;
    out.loss = soft.loss + lambda * hard.loss;
    out.grads = std::move(soft.grads);
    for (std::size_t l = 0; l < out.grads.weights.size(); ++l) {
        for (std::size_t i = 0; i < out.grads.weights[l].size(); ++i)
            out.grads.weights[l][i] += lambda * hard.grads.weights[l][i];
        for (std::size_t i = 0; i < out.grads.biases[l].size(); ++i)
            out.grads.biases[l][i] += lambda * hard.grads.biases[l][i];
    }
    return out;
}

RunResult train_joint(const SoftLabelPool& pool, const std::vector<LabeledImage>& train_images,
                      const std::vector<LabeledImage>& test_images, int n_epochs, double lambda,
                      const TrainConfig& config) {
    if (n_epochs < 0) throw std::invalid_argument("train_joint: negative epoch count");
    TrainerContext ctx = make_context(&pool, nullptr, train_images, test_images, config);
    RunResult res;
    res.boundaries.push_back({0, ctx.params});
    for (int epoch = 1; epoch <= n_epochs; ++epoch) {
        double t0 = now_seconds();
        double total = 0.0;
        for (int s = 0; s < config.steps_per_epoch; ++s) {
            Batch soft_b = draw_soft_batch(pool, train_images, config.batch, ctx.soft_rng,
                                           ctx.soft_domain.empty() ? nullptr : &ctx.soft_domain);
            Batch hard_b = draw_hard_batch(train_images, config, ctx.hard_rng);
            BackwardResult bw = joint_backward(ctx.params, soft_b, hard_b, lambda, ctx.soft_tau);
            check_finite(bw.loss, "joint objective");
            opt_step(ctx.params, bw.grads, ctx.opt);
            total += bw.loss;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.stage_index = 0;
        rec.stage_kind = StageKind::soft;
        rec.mean_loss = total / config.steps_per_epoch;
        rec.test_acc = eval_accuracy(ctx);
        rec.grad_cos = probe_cosine(ctx);
        rec.seconds = now_seconds() - t0;
        res.epochs.push_back(rec);
    }
    res.boundaries.push_back({n_epochs, ctx.params});
    res.params = std::move(ctx.params);
    res.final_test_acc = res.epochs.empty() ? 0.0 : res.epochs.back().test_acc;
    return res;
}

RunResult train_full_coverage(const TinyNetParams& teacher,
                              const std::vector<LabeledImage>& train_images,
                              const std::vector<LabeledImage>& test_images, int n_epochs,
                              const TrainConfig& config) {
    if (n_epochs < 0) throw std::invalid_argument("train_full_coverage: negative epoch count");
    TrainerContext ctx = make_context(nullptr, &teacher, train_images, test_images, config);
    std::vector<StageSpec> stages{{StageKind::soft, n_epochs}};
    return run_stage_list(ctx, stages);
}

double pool_loss(const TinyNetParams& params, const SoftLabelPool& pool,
                 const std::vector<LabeledImage>& images) {
    if (pool.entries.empty()) throw std::invalid_argument("pool_loss: empty pool");
    constexpr std::size_t kChunk = 256;
    double total = 0.0;
    std::size_t n = pool.entries.size();
    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < n; start += kChunk) {
        std::size_t stop = std::min(n, start + kChunk);
        indices.clear();
        for (std::size_t i = start; i < stop; ++i) indices.push_back(i);
        PoolBatch pb = pool_entry_batch(pool, images, indices);
        total += soft_batch_loss(params, pb, static_cast<double>(pool.tau)) *
                 static_cast<double>(indices.size());
    }
    return total / static_cast<double>(n);
}

EstimateResult estimate_n_soft(const SoftLabelPool& pool,
                               const std::vector<LabeledImage>& train_images,
                               const TrainConfig& config, const EstimateConfig& est) {
    if (est.patience < 0) throw std::invalid_argument("estimate_n_soft: negative patience");
    if (est.max_epochs < 1) throw std::invalid_argument("estimate_n_soft: bad epoch cap");
    if (!(est.tol >= 0.0)) throw std::invalid_argument("estimate_n_soft: bad tolerance");

    TrainerContext ctx = make_context(&pool, nullptr, train_images, {}, config);
    double best = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    for (int epoch = 1; epoch <= est.max_epochs; ++epoch) {
        run_soft_epoch(ctx);
        double loss = pool_loss(ctx.params, pool, train_images);
        check_finite(loss, "convergence probe");
        if (loss < best - est.tol) {
            best = loss;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        if (since_improvement >= est.patience)
            return {std::max(1, epoch - since_improvement), false};
    }
    return {est.max_epochs, true};
}

double weak_view_accuracy(const TinyNetParams& params, const std::vector<LabeledImage>& images,
                          int out_side) {
    if (images.empty()) throw std::invalid_argument("weak_view_accuracy: empty image set");
    int input_dim = out_side * out_side;
    if (params.input_dim() != input_dim)
        throw std::invalid_argument("weak_view_accuracy: net input does not match view size");
    int hits = 0;
    std::vector<double> x(static_cast<std::size_t>(input_dim));
    for (const LabeledImage& li : images) {
        CropSpec spec = weak_crop_spec(li.image.side, out_side);
        std::vector<float> pix = apply_crop(li.image, spec);
        for (int j = 0; j < input_dim; ++j) x[static_cast<std::size_t>(j)] = pix[static_cast<std::size_t>(j)];
        if (predict_class(params, x) == li.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(images.size());
}

void write_runlog_csv(const std::filesystem::path& path, const RunResult& run) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_runlog_csv: cannot open " + path.string());
    out << "epoch,stage,loss,test_acc,grad_cos,seconds\n";
    out.precision(10);
    for (const EpochRecord& rec : run.epochs) {
        char stage = static_cast<char>('A' + rec.stage_index);
        out << rec.epoch << ',' << stage << ',' << rec.mean_loss << ',' << rec.test_acc << ','
            << rec.grad_cos << ',' << rec.seconds << '\n';
    }
    if (!out) throw std::runtime_error("write_runlog_csv: short write to " + path.string());
}

}  // namespace hald
