#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hald/train.hpp"

using namespace hald;
namespace fs = std::filesystem;

namespace {

struct Lab {
    Dataset ds;
    TinyNetParams teacher;
    SoftLabelPool pool;
    TrainConfig cfg;
};

Lab make_lab() {
    SynthConfig sc;
    sc.num_classes = 3;
    sc.image_side = 12;
    sc.glyph_side = 6;
    sc.train_per_class = 4;
    sc.test_per_class = 4;
    sc.distractor_count = 1;
    sc.noise_std = 0.05;
    sc.seed = 2;

    Lab lab;
    lab.ds = gen_dataset(sc);
    lab.teacher = init_net({16, 8, 3}, 21);
    lab.pool = generate_pool(lab.teacher, lab.ds.train, 2, AugConfig::strong_view(4), 2.0, 5);

    lab.cfg.hidden = {12};
    lab.cfg.batch = 4;
    lab.cfg.steps_per_epoch = 6;
    lab.cfg.lr = 1e-3;
    lab.cfg.opt = OptKind::adamw;
    lab.cfg.alpha = 0.8;
    lab.cfg.cutmix_beta = 1.0;
    lab.cfg.tau = 2.0;
    lab.cfg.strong = AugConfig::strong_view(4);
    lab.cfg.probe_size = 8;
    lab.cfg.seed = 3;
    return lab;
}

}  // namespace

TEST_CASE("schedule identities hold over the whole small grid") {
    for (int n_total = 0; n_total <= 64; ++n_total) {
        for (int n_soft = 0; n_soft <= 64; ++n_soft) {
            Schedule s = compute_schedule(n_total, n_soft);
            CHECK(s.t_a + s.t_b + s.t_c == n_total);
            CHECK(s.t_a + s.t_c == std::min(n_soft, n_total));
            CHECK(s.t_b == std::max(n_total - n_soft, 0));
            CHECK(s.t_a >= 0);
            CHECK(s.t_b >= 0);
            CHECK(s.t_c >= 0);
            CHECK(s.n_total == n_total);
            CHECK(s.n_soft == n_soft);
            CHECK(s.n_hard == std::max(n_total - n_soft, 0));
            CHECK(s.total() == n_total);
            if (n_total > n_soft) {
                CHECK(s.t_a == n_soft / 2);
                CHECK(s.t_c == n_soft - n_soft / 2);
            } else {
                CHECK(s.t_a == n_total);
                CHECK(s.t_b == 0);
                CHECK(s.t_c == 0);
            }
        }
    }

    Schedule big = compute_schedule(120, 40);
    CHECK(big.t_a == 20);
    CHECK(big.t_b == 80);
    CHECK(big.t_c == 20);

    CHECK_THROWS_AS(compute_schedule(-1, 4), std::invalid_argument);
    CHECK_THROWS_AS(compute_schedule(4, -1), std::invalid_argument);
}

TEST_CASE("zero-epoch stage lists return the initialization untouched") {
    Lab lab = make_lab();
    CHECK_THROWS_AS(train_stages({}, lab.pool, lab.ds.train, lab.ds.test, lab.cfg),
                    std::invalid_argument);

    RunResult res = train_stages({{StageKind::soft, 0}, {StageKind::hard, 0}}, lab.pool,
                                 lab.ds.train, lab.ds.test, lab.cfg);
    CHECK(res.epochs.empty());
    REQUIRE(res.boundaries.size() == 3);
    CHECK(res.boundaries[0].after_epoch == 0);
    CHECK(res.boundaries[2].after_epoch == 0);
    TinyNetParams fresh = init_net({16, 12, 3}, lab.cfg.seed);
    CHECK(flat_params(res.params) == flat_params(fresh));
    CHECK(flat_params(res.boundaries[0].params) == flat_params(fresh));
}

TEST_CASE("hald runner is the three-stage runner, and zero-epoch stages cost nothing") {
    Lab lab = make_lab();
    Schedule sched = compute_schedule(6, 4);  // 2 / 2 / 2

    RunResult hald = train_hald(lab.pool, lab.ds.train, lab.ds.test, sched, lab.cfg);
    RunResult staged = train_stages(
        {{StageKind::soft, 2}, {StageKind::hard, 2}, {StageKind::soft, 2}}, lab.pool,
        lab.ds.train, lab.ds.test, lab.cfg);
    CHECK(flat_params(hald.params) == flat_params(staged.params));
    REQUIRE(hald.epochs.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(hald.epochs[i].mean_loss == staged.epochs[i].mean_loss);
        CHECK(hald.epochs[i].test_acc == staged.epochs[i].test_acc);
        CHECK(hald.epochs[i].grad_cos == staged.epochs[i].grad_cos);
    }
    REQUIRE(hald.boundaries.size() == 4);
    CHECK(hald.boundaries[0].after_epoch == 0);
    CHECK(hald.boundaries[1].after_epoch == 2);
    CHECK(hald.boundaries[2].after_epoch == 4);
    CHECK(hald.boundaries[3].after_epoch == 6);
    CHECK(flat_params(hald.boundaries[3].params) == flat_params(hald.params));

    // All-soft corner: the degenerate schedule reproduces the soft-only
    // baseline bitwise, because empty stages burn no randomness.
    Schedule allsoft = compute_schedule(3, 10);
    RunResult via_hald = train_hald(lab.pool, lab.ds.train, lab.ds.test, allsoft, lab.cfg);
    RunResult plain = train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 3, lab.cfg);
    CHECK(flat_params(via_hald.params) == flat_params(plain.params));
    CHECK(via_hald.final_test_acc == plain.final_test_acc);
}

TEST_CASE("stage boundaries carry optimizer state: one stage equals two halves") {
    Lab lab = make_lab();
    RunResult whole = train_stages({{StageKind::soft, 2}}, lab.pool, lab.ds.train,
                                   lab.ds.test, lab.cfg);
    RunResult halves = train_stages({{StageKind::soft, 1}, {StageKind::soft, 1}}, lab.pool,
                                    lab.ds.train, lab.ds.test, lab.cfg);
    CHECK(flat_params(whole.params) == flat_params(halves.params));
    CHECK(whole.epochs[1].mean_loss == halves.epochs[1].mean_loss);
}

TEST_CASE("joint trainer with lambda zero reduces to soft-only exactly") {
    Lab lab = make_lab();
    RunResult joint = train_joint(lab.pool, lab.ds.train, lab.ds.test, 3, 0.0, lab.cfg);
    RunResult solo = train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 3, lab.cfg);
    CHECK(flat_params(joint.params) == flat_params(solo.params));
    REQUIRE(joint.epochs.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(joint.epochs[i].mean_loss == solo.epochs[i].mean_loss);
        CHECK(joint.epochs[i].test_acc == solo.epochs[i].test_acc);
    }
    CHECK_THROWS_AS(train_joint(lab.pool, lab.ds.train, lab.ds.test, 1, -0.5, lab.cfg),
                    std::invalid_argument);
}

TEST_CASE("joint_backward combines the two objectives linearly") {
    Lab lab = make_lab();
    TinyNetParams net = init_net({16, 12, 3}, 9);

    Rng rng(4, 0);
    PoolBatch pb = sample_batch(lab.pool, lab.ds.train, rng, 4);
    Batch soft_b;
    soft_b.input_dim = pb.input_dim;
    soft_b.inputs = pb.inputs;
    soft_b.soft_targets = pb.targets;

    Batch hard_b;
    hard_b.input_dim = 16;
    hard_b.inputs = pb.inputs;  // any fixed pixels work here
    hard_b.labels = {0, 1, 2, 0};
    hard_b.alpha = 0.1;

    const double lambda = 0.7, tau = 2.0;
    BackwardResult combo = joint_backward(net, soft_b, hard_b, lambda, tau);
    BackwardResult soft = backward(net, soft_b, TargetKind::soft, tau);
    BackwardResult hard = backward(net, hard_b, TargetKind::hard_smoothed, 1.0);
    CHECK(combo.loss == doctest::Approx(soft.loss + lambda * hard.loss).epsilon(1e-12));
    std::vector<double> gc = flat_grad(combo.grads);
    std::vector<double> gs = flat_grad(soft.grads);
    std::vector<double> gh = flat_grad(hard.grads);
    for (std::size_t k = 0; k < gc.size(); ++k)
        CHECK(gc[k] == doctest::Approx(gs[k] + lambda * gh[k]).epsilon(1e-12));
}

TEST_CASE("pool_loss agrees with the gradient path's reported loss") {
    Lab lab = make_lab();
    TinyNetParams net = init_net({16, 12, 3}, 13);

    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < lab.pool.entries.size(); ++i) all.push_back(i);
    PoolBatch pb = pool_entry_batch(lab.pool, lab.ds.train, all);
    Batch b;
    b.input_dim = pb.input_dim;
    b.inputs = pb.inputs;
    b.soft_targets = pb.targets;
    double via_backward = backward(net, b, TargetKind::soft, lab.pool.tau).loss;
    double via_pool = pool_loss(net, lab.pool, lab.ds.train);
    CHECK(via_pool == doctest::Approx(via_backward).epsilon(1e-10));

    SoftLabelPool empty;
    CHECK_THROWS_AS(pool_loss(net, empty, lab.ds.train), std::invalid_argument);
}

TEST_CASE("estimate_n_soft stopping rule behaves at the edges") {
    Lab lab = make_lab();

    EstimateConfig est;
    est.patience = 0;  // stop immediately after the first probe
    EstimateResult res = estimate_n_soft(lab.pool, lab.ds.train, lab.cfg, est);
    CHECK(res.n_soft == 1);
    CHECK_FALSE(res.capped);

    est.patience = 10;
    est.max_epochs = 2;  // too short to stall
    res = estimate_n_soft(lab.pool, lab.ds.train, lab.cfg, est);
    CHECK(res.n_soft == 2);
    CHECK(res.capped);

    est.max_epochs = 0;
    CHECK_THROWS_AS(estimate_n_soft(lab.pool, lab.ds.train, lab.cfg, est),
                    std::invalid_argument);
    est.max_epochs = 10;
    est.patience = -1;
    CHECK_THROWS_AS(estimate_n_soft(lab.pool, lab.ds.train, lab.cfg, est),
                    std::invalid_argument);
}

TEST_CASE("weak_view_accuracy matches an independent recount") {
    Lab lab = make_lab();
    RunResult run = train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 2, lab.cfg);

    int hits = 0;
    for (const LabeledImage& li : lab.ds.test) {
        CropSpec spec = weak_crop_spec(li.image.side, 4);
        std::vector<float> pix = apply_crop(li.image, spec);
        std::vector<double> x(pix.begin(), pix.end());
        hits += predict_class(run.params, x) == li.label;
    }
    double expect = static_cast<double>(hits) / static_cast<double>(lab.ds.test.size());
    CHECK(weak_view_accuracy(run.params, lab.ds.test, 4) == expect);
    CHECK(run.final_test_acc == expect);

    CHECK_THROWS_AS(weak_view_accuracy(run.params, {}, 4), std::invalid_argument);
    CHECK_THROWS_AS(weak_view_accuracy(run.params, lab.ds.test, 5), std::invalid_argument);
}

TEST_CASE("epoch records and csv log cover every epoch with stage letters") {
    Lab lab = make_lab();
    Schedule sched = compute_schedule(5, 2);  // 1 / 3 / 1
    RunResult run = train_hald(lab.pool, lab.ds.train, lab.ds.test, sched, lab.cfg);
    REQUIRE(run.epochs.size() == 5);
    for (std::size_t i = 0; i < run.epochs.size(); ++i) {
        CHECK(run.epochs[i].epoch == static_cast<int>(i) + 1);
        CHECK(run.epochs[i].grad_cos >= -1.0);
        CHECK(run.epochs[i].grad_cos <= 1.0);
        CHECK(std::isfinite(run.epochs[i].mean_loss));
    }
    CHECK(run.epochs[0].stage_index == 0);
    CHECK(run.epochs[1].stage_index == 1);
    CHECK(run.epochs[4].stage_index == 2);
    CHECK(run.epochs[0].stage_kind == StageKind::soft);
    CHECK(run.epochs[1].stage_kind == StageKind::hard);

    const fs::path dir = fs::temp_directory_path() / "hald_train_test";
    fs::create_directories(dir);
    const fs::path csv = dir / "runlog.csv";
    write_runlog_csv(csv, run);

    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "epoch,stage,loss,test_acc,grad_cos,seconds");
    std::vector<std::string> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(line);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].substr(0, 3) == "1,A");
    CHECK(rows[1].substr(0, 3) == "2,B");
    CHECK(rows[4].substr(0, 3) == "5,C");
    fs::remove_all(dir);
}

TEST_CASE("trainer validates configuration and pool compatibility") {
    Lab lab = make_lab();

    TrainConfig bad = lab.cfg;
    bad.strong = AugConfig::weak_view(4);
    CHECK_THROWS_AS(train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 1, bad),
                    std::invalid_argument);
    bad = lab.cfg;
    bad.batch = 0;
    CHECK_THROWS_AS(train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 1, bad),
                    std::invalid_argument);
    bad = lab.cfg;
    bad.steps_per_epoch = 0;
    CHECK_THROWS_AS(train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 1, bad),
                    std::invalid_argument);
    bad = lab.cfg;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 1, bad),
                    std::invalid_argument);
    bad = lab.cfg;
    bad.strong = AugConfig::strong_view(5);  // pool stores 4x4 crops
    CHECK_THROWS_AS(train_soft_only(lab.pool, lab.ds.train, lab.ds.test, 1, bad),
                    std::invalid_argument);

    std::vector<LabeledImage> fewer(lab.ds.train.begin(), lab.ds.train.end() - 1);
    CHECK_THROWS_AS(train_soft_only(lab.pool, fewer, lab.ds.test, 1, lab.cfg),
                    std::invalid_argument);
    std::vector<LabeledImage> none;
    CHECK_THROWS_AS(train_soft_only(lab.pool, none, lab.ds.test, 1, lab.cfg),
                    std::invalid_argument);
}

TEST_CASE("full-coverage trainer is deterministic and probes like the others") {
    Lab lab = make_lab();
    RunResult a = train_full_coverage(lab.teacher, lab.ds.train, lab.ds.test, 2, lab.cfg);
    RunResult b = train_full_coverage(lab.teacher, lab.ds.train, lab.ds.test, 2, lab.cfg);
    CHECK(flat_params(a.params) == flat_params(b.params));
    REQUIRE(a.epochs.size() == 2);
    CHECK(std::isfinite(a.epochs[0].mean_loss));
    CHECK(a.epochs[0].grad_cos >= -1.0);
    CHECK(a.epochs[0].grad_cos <= 1.0);

    TinyNetParams wrong = init_net({25, 4, 3}, 0);
    CHECK_THROWS_AS(train_full_coverage(wrong, lab.ds.train, lab.ds.test, 1, lab.cfg),
                    std::invalid_argument);
}
