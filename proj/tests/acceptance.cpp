// Acceptance gate for the whole laboratory.  Each criterion prints exactly
// one [PASS]/[FAIL] line with its wall time and a short summary of the
// measured quantities; the process exits nonzero if any criterion fails.
//
// A1-A8 exercise the closed-form constants, the Monte Carlo verifiers, the
// gradient engine, and the storage arithmetic.  A9-A14 run the directional
// desk-scale experiment: a drifty glyph corpus, a full-image teacher,
// storage-budgeted soft-label pools, and staged student training.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hald/augment.hpp"
#include "hald/diagnostics.hpp"
#include "hald/softlabel.hpp"
#include "hald/synthdata.hpp"
#include "hald/theory.hpp"
#include "hald/tinynet.hpp"
#include "hald/train.hpp"

using namespace hald;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failures = 0;

/// Runs one criterion, prints its line, and tracks the exit status.
/// The body returns pass/fail and appends measurements to `detail`.
void criterion(int id, const std::string& title,
               const std::function<bool(std::string&)>& body) {
    const Clock::time_point t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    if (!pass) ++g_failures;
    std::printf("[%s] A%-2d %s (%.1f s)%s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(),
                seconds_since(t0), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

/// First failing row of a report, for failure diagnostics.
std::string first_failure(const TheoryReport& rep) {
    for (const TheoryCheck& c : rep.checks) {
        if (!c.pass) {
            return fmt("first failing row %s: empirical=%.6g theoretical=%.6g", c.name.c_str(),
                       c.empirical, c.theoretical);
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// Shared desk-scale experiment state (A8-A14).

constexpr int kNumSeeds = 3;
constexpr std::uint64_t kBaseSeed = 1;
constexpr int kNTotal = 120;
constexpr int kCropSide = 8;

struct Lab {
    bool built = false;
    std::string fail_reason;

    Dataset data;
    TeacherResult teacher;
    SoftLabelPool pools[2];  // samples-per-image 1 and 2
    double prep_seconds = 0.0;
};

struct Runs {
    bool built = false;
    std::string fail_reason;

    int n_soft[2] = {0, 0};
    bool capped[2] = {false, false};
    std::vector<RunResult> hald[2];       // [sli index][seed index]
    std::vector<RunResult> soft_only[2];  // same layout
    double run_seconds = 0.0;
};

Lab g_lab;
Runs g_runs;

TrainConfig student_config(std::uint64_t seed) {
    TrainConfig tc;
    tc.hidden = {128};
    tc.batch = 16;
    tc.steps_per_epoch = 128;
    tc.lr = 2e-3;
    tc.opt = OptKind::adamw;
    tc.weight_decay = 0.0;
    tc.alpha = 0.1;
    tc.cutmix_beta = 1.0;
    tc.tau = 1.0;
    // Training views reach full scale so the weak evaluation view sits
    // inside the student's training support; the stored pool keeps the
    // aggressive default range, which is where drift lives.
    tc.strong = AugConfig::strong_view(kCropSide);
    tc.strong.scale_hi = 1.0;
    tc.probe_size = 32;
    tc.seed = seed;
    return tc;
}

void ensure_lab() {
    if (g_lab.built) return;
    if (!g_lab.fail_reason.empty()) throw std::runtime_error(g_lab.fail_reason);
    const Clock::time_point t0 = Clock::now();
    try {
        SynthConfig sc;
        sc.num_classes = 10;
        sc.image_side = 32;
        sc.glyph_side = 16;
        sc.train_per_class = 100;
        sc.test_per_class = 20;
        sc.distractor_count = 2;
        sc.noise_std = 0.05;
        sc.seed = kBaseSeed;
        g_lab.data = gen_dataset(sc);

        TeacherConfig tc;
        tc.input_side = kCropSide;
        tc.epochs = 60;
        tc.batch = 16;
        tc.lr = 1e-3;
        tc.weight_decay = 0.1;
        tc.seed = kBaseSeed;
        g_lab.teacher = train_teacher(g_lab.data.train, {256, 128}, tc, sc.num_classes);

        const AugConfig strong = AugConfig::strong_view(kCropSide);
        g_lab.pools[0] =
            generate_pool(g_lab.teacher.params, g_lab.data.train, 1, strong, 1.0, kBaseSeed);
        g_lab.pools[1] =
            generate_pool(g_lab.teacher.params, g_lab.data.train, 2, strong, 1.0, kBaseSeed);
        g_lab.built = true;
    } catch (const std::exception& e) {
        g_lab.fail_reason = std::string("corpus/teacher/pool preparation failed: ") + e.what();
        throw;
    }
    g_lab.prep_seconds = seconds_since(t0);
}

void ensure_runs() {
    if (g_runs.built) return;
    if (!g_runs.fail_reason.empty()) throw std::runtime_error(g_runs.fail_reason);
    ensure_lab();
    const Clock::time_point t0 = Clock::now();
    try {
        for (int p = 0; p < 2; ++p) {
            EstimateConfig ec;
            ec.tol = 1e-4;
            ec.patience = 10;
            ec.max_epochs = kNTotal;
            const EstimateResult est =
                estimate_n_soft(g_lab.pools[p], g_lab.data.train, student_config(kBaseSeed), ec);
            g_runs.n_soft[p] = est.n_soft;
            g_runs.capped[p] = est.capped;

            const Schedule schedule = compute_schedule(kNTotal, est.n_soft);
            for (int s = 0; s < kNumSeeds; ++s) {
                const TrainConfig cfg = student_config(kBaseSeed + static_cast<std::uint64_t>(s));
                g_runs.hald[p].push_back(
                    train_hald(g_lab.pools[p], g_lab.data.train, g_lab.data.test, schedule, cfg));
                g_runs.soft_only[p].push_back(train_soft_only(
                    g_lab.pools[p], g_lab.data.train, g_lab.data.test, kNTotal, cfg));
            }
        }
        g_runs.built = true;
    } catch (const std::exception& e) {
        g_runs.fail_reason = std::string("directional experiment failed: ") + e.what();
        throw;
    }
    g_runs.run_seconds = seconds_since(t0);
}

double mean_final_acc(const std::vector<RunResult>& runs) {
    double sum = 0.0;
    for (const RunResult& r : runs) sum += r.final_test_acc;
    return sum / static_cast<double>(runs.size());
}

/// Spreads the soft/hard epoch budgets of `schedule` over an explicit stage
/// order in near-equal parts (earlier segments take the floor).
std::vector<StageSpec> staged_order(const std::vector<StageKind>& order,
                                    const Schedule& schedule) {
    int n_soft_stages = 0;
    int n_hard_stages = 0;
    for (StageKind k : order) (k == StageKind::soft ? n_soft_stages : n_hard_stages)++;
    const int soft_budget = schedule.t_a + schedule.t_c;
    const int hard_budget = schedule.t_b;
    std::vector<StageSpec> stages;
    int soft_seen = 0;
    int hard_seen = 0;
    for (StageKind k : order) {
        StageSpec spec;
        spec.kind = k;
        if (k == StageKind::soft) {
            spec.epochs = soft_budget * (soft_seen + 1) / n_soft_stages -
                          soft_budget * soft_seen / n_soft_stages;
            ++soft_seen;
        } else {
            spec.epochs = hard_budget * (hard_seen + 1) / n_hard_stages -
                          hard_budget * hard_seen / n_hard_stages;
            ++hard_seen;
        }
        stages.push_back(spec);
    }
    return stages;
}

}  // namespace

int main() {
    std::printf("acceptance suite: closed forms, Monte Carlo verifiers, desk-scale runs\n");

    TheoryReport lemma1_two_workers;  // shared between A2 and A14

    criterion(1, "extremal constant of the deviation bound", [](std::string& d) {
        const auto [t_star, g_star] = pz_constant();
        d = fmt("argmax=%.9f max=%.9f", t_star, g_star);
        return std::abs(t_star - 0.2) <= 1e-6 && std::abs(g_star - 0.2862167) <= 1e-6;
    });

    criterion(2, "label-average covariance contraction (Monte Carlo)",
              [&](std::string& d) {
                  const Clock::time_point t0 = Clock::now();
                  lemma1_two_workers = run_theory_suite("lemma1", kDefaultTheorySeed, 2);
                  const double secs = seconds_since(t0);
                  d = fmt("%zu rows, budget 30 s, took %.1f s. %s",
                          lemma1_two_workers.checks.size(), secs,
                          first_failure(lemma1_two_workers).c_str());
                  return lemma1_two_workers.all_pass() && secs < 30.0;
              });

    criterion(3, "mean-absolute-deviation lower bound and gaussian closed form",
              [](std::string& d) {
                  const Clock::time_point t0 = Clock::now();
                  const TheoryReport rep = run_theory_suite("thm1", kDefaultTheorySeed, 4);
                  const double secs = seconds_since(t0);
                  d = fmt("%zu rows, budget 30 s, took %.1f s. %s", rep.checks.size(), secs,
                          first_failure(rep).c_str());
                  return rep.all_pass() && secs < 30.0;
              });

    criterion(4, "quadratic ERM excess risk matches trace/(2s)", [](std::string& d) {
        const Clock::time_point t0 = Clock::now();
        const TheoryReport rep = run_theory_suite("thm2", kDefaultTheorySeed, 4);
        const double secs = seconds_since(t0);
        d = fmt("%zu rows, budget 60 s, took %.1f s. %s", rep.checks.size(), secs,
                first_failure(rep).c_str());
        return rep.all_pass() && secs < 60.0;
    });

    criterion(5, "mixing inequality audit and gradient-alignment bound", [](std::string& d) {
        const Clock::time_point t0 = Clock::now();
        const TheoryReport rep = run_theory_suite("thm3", kDefaultTheorySeed, 4);
        const double secs = seconds_since(t0);
        const TheoryCheck* cosine = rep.find("thm3/mean_cosine");
        d = fmt("mean cosine %.4f, budget 60 s, took %.1f s. %s",
                cosine ? cosine->empirical : -2.0, secs, first_failure(rep).c_str());
        return rep.all_pass() && secs < 60.0;
    });

    criterion(6, "correlated-supervision residual variance and effective samples",
              [](std::string& d) {
                  const Clock::time_point t0 = Clock::now();
                  const TheoryReport rep = run_theory_suite("cor1", kDefaultTheorySeed, 4);
                  const double secs = seconds_since(t0);
                  d = fmt("%zu rows, budget 30 s, took %.1f s. %s", rep.checks.size(), secs,
                          first_failure(rep).c_str());
                  return rep.all_pass() && secs < 30.0;
              });

    criterion(7, "analytic gradients vs central finite differences", [](std::string& d) {
        const Clock::time_point t0 = Clock::now();
        const double h = 1e-5;
        double worst = 0.0;
        for (int probe = 0; probe < 20; ++probe) {
            Rng rng(900 + static_cast<std::uint64_t>(probe));
            TinyNetParams net = init_net({9, 8, 5}, 900 + static_cast<std::uint64_t>(probe));

            Batch batch;
            batch.input_dim = 9;
            const int rows = 3;
            for (int i = 0; i < rows * batch.input_dim; ++i)
                batch.inputs.push_back(rng.uniform(-1.0, 1.0));
            TargetKind kind;
            double tau = 1.0;
            if (probe % 3 == 2) {
                kind = TargetKind::hard_smoothed;
                batch.alpha = 0.1;
                for (int i = 0; i < rows; ++i) {
                    batch.labels.push_back(static_cast<int>(rng.uniform_int(0, 4)));
                    batch.labels_b.push_back(static_cast<int>(rng.uniform_int(0, 4)));
                    batch.lams.push_back(rng.uniform(0.0, 1.0));
                }
            } else {
                kind = TargetKind::soft;
                tau = probe % 3 == 0 ? 2.0 : 1.0;
                std::vector<double> probs(5);
                for (int i = 0; i < rows; ++i) {
                    rng.dirichlet(probs, 1.0);
                    batch.soft_targets.push_back(ProbVector(probs));
                }
            }

            const std::vector<double> grad = flat_grad(backward(net, batch, kind, tau).grads);

            // Mutable view of the k-th flat parameter.
            const auto param_at = [&net](std::size_t k) -> double& {
                for (std::size_t layer = 0; layer < net.weights.size(); ++layer) {
                    if (k < net.weights[layer].size()) return net.weights[layer][k];
                    k -= net.weights[layer].size();
                    if (k < net.biases[layer].size()) return net.biases[layer][k];
                    k -= net.biases[layer].size();
                }
                throw std::out_of_range("flat parameter index");
            };

            for (int pick = 0; pick < 6; ++pick) {
                const std::size_t idx = static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(net.num_params()) - 1));
                double& w = param_at(idx);
                const double saved = w;
                w = saved + h;
                const double up = backward(net, batch, kind, tau).loss;
                w = saved - h;
                const double down = backward(net, batch, kind, tau).loss;
                w = saved;
                const double fd = (up - down) / (2.0 * h);
                const double rel = std::abs(fd - grad[idx]) /
                                   std::max({1e-3, std::abs(fd), std::abs(grad[idx])});
                worst = std::max(worst, rel);
            }
        }
        const double secs = seconds_since(t0);
        d = fmt("worst relative error %.3g over 20 probes, budget 10 s, took %.1f s", worst,
                secs);
        return worst <= 1e-4 && secs < 10.0;
    });

    criterion(8, "storage budget arithmetic and saved pool payloads", [](std::string& d) {
        const std::uint64_t big = budget_bytes(100, 1000, 16);
        const std::uint64_t small = budget_bytes(20, 200, 16);
        const double big_mib = static_cast<double>(big) / (1024.0 * 1024.0);
        const double small_mib = static_cast<double>(small) / (1024.0 * 1024.0);
        bool ok = big == 200000000ULL && std::abs(big_mib - 190.7) < 0.05;
        ok = ok && small == 1600000ULL && std::abs(small_mib - 1.53) < 0.005;

        ensure_lab();
        const fs::path dir = fs::temp_directory_path() / "hald_acceptance";
        fs::create_directories(dir);
        std::uint64_t payloads[2] = {0, 0};
        std::uint64_t budgets[2] = {0, 0};
        for (int p = 0; p < 2; ++p) {
            const fs::path path = dir / ("pool" + std::to_string(p + 1) + ".slbl");
            save_pool(path, g_lab.pools[p]);
            const SoftLabelPool loaded = load_pool(path);
            payloads[p] = pool_payload_bytes(loaded);
            budgets[p] = budget_bytes(slc_from(100, static_cast<std::uint64_t>(p + 1)), 10, 16);
            ok = ok && payloads[p] == budgets[p];
        }
        fs::remove_all(dir);
        d = fmt("%llu B = %.1f MiB, %llu B = %.2f MiB; pool payloads %llu/%llu vs budgets "
                "%llu/%llu",
                static_cast<unsigned long long>(big), big_mib,
                static_cast<unsigned long long>(small), small_mib,
                static_cast<unsigned long long>(payloads[0]),
                static_cast<unsigned long long>(payloads[1]),
                static_cast<unsigned long long>(budgets[0]),
                static_cast<unsigned long long>(budgets[1]));
        return ok;
    });

    criterion(9, "staged training beats the pool-only baseline", [](std::string& d) {
        ensure_runs();
        const double teacher_acc = g_lab.teacher.train_accuracy;
        const double h1 = mean_final_acc(g_runs.hald[0]);
        const double s1 = mean_final_acc(g_runs.soft_only[0]);
        const double h2 = mean_final_acc(g_runs.hald[1]);
        const double s2 = mean_final_acc(g_runs.soft_only[1]);
        const double total = g_lab.prep_seconds + g_runs.run_seconds;
        d = fmt("teacher train acc %.3f; spi=1: staged %.4f vs pool-only %.4f (%+.1f pts, "
                "n_soft=%d%s); spi=2: %.4f vs %.4f (n_soft=%d%s); %.0f s of 900",
                teacher_acc, h1, s1, (h1 - s1) * 100.0, g_runs.n_soft[0],
                g_runs.capped[0] ? ", capped" : "", h2, s2, g_runs.n_soft[1],
                g_runs.capped[1] ? ", capped" : "", total);
        return teacher_acc >= 0.95 && h1 - s1 >= 0.02 && h2 >= s2 && total < 900.0;
    });

    criterion(10, "stage-order ablation: soft-hard-soft wins", [](std::string& d) {
        ensure_runs();
        const Schedule schedule = compute_schedule(kNTotal, g_runs.n_soft[0]);
        const StageKind S = StageKind::soft;
        const StageKind H = StageKind::hard;
        const std::vector<std::pair<std::string, std::vector<StageKind>>> orders = {
            {"hard-soft", {H, S}},
            {"soft-hard", {S, H}},
            {"hard-soft-hard", {H, S, H}},
            {"soft-hard-soft", {S, H, S}},
        };
        std::vector<double> means;
        for (const auto& [name, order] : orders) {
            const std::vector<StageSpec> stages = staged_order(order, schedule);
            double sum = 0.0;
            for (int s = 0; s < kNumSeeds; ++s) {
                const TrainConfig cfg = student_config(kBaseSeed + static_cast<std::uint64_t>(s));
                sum += train_stages(stages, g_lab.pools[0], g_lab.data.train, g_lab.data.test,
                                    cfg)
                           .final_test_acc;
            }
            means.push_back(sum / kNumSeeds);
        }
        d = fmt("mean test acc: hard-soft %.4f, soft-hard %.4f, hard-soft-hard %.4f, "
                "soft-hard-soft %.4f",
                means[0], means[1], means[2], means[3]);
        return means[3] > means[0] && means[3] > means[1] && means[3] > means[2];
    });

    criterion(11, "hard stage improves crop consistency and reference alignment",
              [](std::string& d) {
                  ensure_runs();
                  const RunResult& run = g_runs.hald[0][0];
                  if (run.boundaries.size() != 4) {
                      d = fmt("expected 3-stage run, got %zu boundaries",
                              run.boundaries.size());
                      return false;
                  }
                  const TinyNetParams& before_b = run.boundaries[1].params;
                  const TinyNetParams& after_b = run.boundaries[2].params;
                  const AugConfig strong = AugConfig::strong_view(kCropSide);
                  const auto mean_js = [&](const TinyNetParams& params) {
                      const Predictor pred = net_predictor(params, 1.0);
                      double sum = 0.0;
                      for (int i = 0; i < 20; ++i) {
                          Rng rng(555, static_cast<std::uint64_t>(i));
                          sum += crop_consistency(pred, g_lab.data.test[i].image, 16, strong,
                                                  rng)
                                     .mean_js;
                      }
                      return sum / 20.0;
                  };
                  const double js_before = mean_js(before_b);
                  const double js_after = mean_js(after_b);

                  const RunResult reference =
                      train_full_coverage(g_lab.teacher.params, g_lab.data.train,
                                          g_lab.data.test, kNTotal, student_config(kBaseSeed));
                  double hald_js = 0.0, hald_cos = 0.0, soft_js = 0.0, soft_cos = 0.0;
                  for (int s = 0; s < kNumSeeds; ++s) {
                      const AlignmentReport ha =
                          prediction_alignment(g_runs.hald[0][s].params, reference.params,
                                               g_lab.data.test, kCropSide);
                      const AlignmentReport sa =
                          prediction_alignment(g_runs.soft_only[0][s].params, reference.params,
                                               g_lab.data.test, kCropSide);
                      hald_js += ha.mean_js / kNumSeeds;
                      hald_cos += ha.mean_cosine / kNumSeeds;
                      soft_js += sa.mean_js / kNumSeeds;
                      soft_cos += sa.mean_cosine / kNumSeeds;
                  }
                  d = fmt("probe JS before hard stage %.5f -> after %.5f; alignment to "
                          "reference: staged JS %.5f cos %.5f vs pool-only JS %.5f cos %.5f",
                          js_before, js_after, hald_js, hald_cos, soft_js, soft_cos);
                  return js_after <= js_before && hald_js < soft_js && hald_cos > soft_cos;
              });

    criterion(12, "probe gradient cosine is positive and rises through the opening stage",
              [](std::string& d) {
                  ensure_runs();
                  const RunResult& run = g_runs.hald[0][0];
                  bool positive = true;
                  for (const EpochRecord& rec : run.epochs)
                      if (rec.epoch >= 5 && rec.grad_cos <= 0.0) positive = false;

                  std::vector<double> stage_a;
                  for (const EpochRecord& rec : run.epochs)
                      if (rec.stage_index == 0) stage_a.push_back(rec.grad_cos);
                  if (stage_a.size() < 2) {
                      d = fmt("opening stage has only %zu epochs", stage_a.size());
                      return false;
                  }
                  const std::size_t q = std::max<std::size_t>(1, stage_a.size() / 4);
                  double first = 0.0, last = 0.0;
                  for (std::size_t i = 0; i < q; ++i) {
                      first += stage_a[i] / static_cast<double>(q);
                      last += stage_a[stage_a.size() - 1 - i] / static_cast<double>(q);
                  }
                  d = fmt("min cosine from epoch 5: %s; opening stage first-quarter mean "
                          "%.4f vs last-quarter %.4f (%zu epochs)",
                          positive ? "positive" : "NOT positive", first, last,
                          stage_a.size());
                  return positive && last > first;
              });

    criterion(13, "teacher drift: zero weak-view variance, heavy strong-view variance",
              [](std::string& d) {
                  ensure_lab();
                  const std::vector<LabeledImage> corpus(g_lab.data.train.begin(),
                                                         g_lab.data.train.begin() + 50);
                  const Predictor teacher_pred = net_predictor(g_lab.teacher.params, 1.0);
                  Rng rng(9, 0x44494147);
                  const LvsdReport rep =
                      lvsd_report(teacher_pred, corpus, 64, AugConfig::weak_view(kCropSide),
                                  AugConfig::strong_view(kCropSide), 1e-12, rng);
                  double max_weak = 0.0;
                  for (const LvsdImageStat& s : rep.per_image)
                      max_weak = std::max(max_weak, s.trace_weak);
                  d = fmt("max weak trace %.3g, mean strong %.4g vs 1000x mean weak %.3g, "
                          "p(R>1)=%.2f",
                          max_weak, rep.mean_trace_strong, 1e3 * rep.mean_trace_weak,
                          rep.frac_ratio_above_one);
                  return max_weak <= 1e-20 &&
                         rep.mean_trace_strong > 1e3 * rep.mean_trace_weak &&
                         rep.frac_ratio_above_one > 0.5;
              });

    criterion(14, "bit-identical reruns and worker-count invariance", [&](std::string& d) {
        ensure_runs();
        const Schedule schedule = compute_schedule(kNTotal, g_runs.n_soft[0]);
        const RunResult rerun = train_hald(g_lab.pools[0], g_lab.data.train, g_lab.data.test,
                                           schedule, student_config(kBaseSeed));
        const bool same_acc = rerun.final_test_acc == g_runs.hald[0][0].final_test_acc;
        const bool same_weights =
            flat_params(rerun.params) == flat_params(g_runs.hald[0][0].params);

        const TheoryReport five = run_theory_suite("lemma1", kDefaultTheorySeed, 5);
        bool theory_same = five.checks.size() == lemma1_two_workers.checks.size();
        for (std::size_t i = 0; theory_same && i < five.checks.size(); ++i) {
            theory_same = five.checks[i].name == lemma1_two_workers.checks[i].name &&
                          five.checks[i].empirical == lemma1_two_workers.checks[i].empirical;
        }
        d = fmt("rerun acc %.6f %s, weights %s, theory rows (2 vs 5 workers) %s",
                rerun.final_test_acc, same_acc ? "bit-identical" : "DIFFERS",
                same_weights ? "bit-identical" : "DIFFER",
                theory_same ? "bit-identical" : "DIFFER");
        return same_acc && same_weights && theory_same;
    });

    std::printf("acceptance: %d of 14 criteria passed\n", 14 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
