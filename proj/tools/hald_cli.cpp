// Command-line front end: wires data generation, teacher training, pool
// generation, student training, diagnostics, and the theory verifiers into
// reproducible runs driven by flat config files.
//
// Exit codes: 0 success, 1 usage (bad flags or parameter values), 2 IO or
// config structure problems, 3 verification failure.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hald/binio.hpp"
#include "hald/config.hpp"
#include "hald/diagnostics.hpp"
#include "hald/softlabel.hpp"
#include "hald/synthdata.hpp"
#include "hald/theory.hpp"
#include "hald/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Bad parameter values or malformed invocations -> exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structural config / artifact-mismatch problems -> exit 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A theory check failed -> exit 3.
struct VerifyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDiagStream = 0x44494147;  // "DIAG"

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_flag = 0;
    bool seed_given = false;
    bool create_out = false;
    int workers_flag = 0;  // 0 = not given
};

hald::ExperimentConfig load_config(const GlobalOpts& opts) {
    hald::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = hald::ExperimentConfig::parse_file(opts.config_path);
        cfg.validate_keys();
    }
    if (opts.seed_given) cfg.set("seed", std::to_string(opts.seed_flag));
    return cfg;
}

fs::path resolve_out(const GlobalOpts& opts) {
    fs::path out(opts.out_dir);
    if (!fs::exists(out)) {
        if (!opts.create_out) {
            throw ConfigError("output directory does not exist: " + out.string() +
                              " (pass --create to make it)");
        }
        fs::create_directories(out);
    } else if (!fs::is_directory(out)) {
        throw ConfigError("output path is not a directory: " + out.string());
    }
    return out;
}

/// Relative artifact paths in the config resolve against the output dir.
fs::path resolve_path(const hald::ExperimentConfig& cfg, const std::string& key,
                      const std::string& fallback, const fs::path& out) {
    fs::path p(cfg.get_str(key, fallback));
    return p.is_absolute() ? p : out / p;
}

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, h);
    return buf;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw hald::IoError(hald::IoErrorKind::open_failed, "cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
}

/// Provenance sidecar next to every artifact: which subcommand produced it
/// under which config.
void write_sidecar(const fs::path& artifact, const std::string& subcommand,
                   const hald::ExperimentConfig& cfg, json extra = json::object()) {
    json j;
    j["artifact"] = artifact.filename().string();
    j["subcommand"] = subcommand;
    j["config_hash"] = hash_hex(cfg.hash());
    j["seed"] = cfg.get_int("seed", 0);
    for (auto& [key, value] : extra.items()) j[key] = value;
    write_json_file(artifact.string() + ".meta.json", j);
}

hald::AugConfig strong_from(const hald::ExperimentConfig& cfg) {
    hald::AugConfig aug = hald::AugConfig::strong_view(static_cast<int>(cfg.get_int("crop_side", 16)));
    aug.scale_lo = cfg.get_double("scale_lo", aug.scale_lo);
    aug.scale_hi = cfg.get_double("scale_hi", aug.scale_hi);
    aug.aspect_lo = cfg.get_double("aspect_lo", aug.aspect_lo);
    aug.aspect_hi = cfg.get_double("aspect_hi", aug.aspect_hi);
    return aug;
}

hald::SynthConfig synth_from(const hald::ExperimentConfig& cfg) {
    hald::SynthConfig sc;
    sc.num_classes = static_cast<int>(cfg.get_int("num_classes", sc.num_classes));
    sc.image_side = static_cast<int>(cfg.get_int("image_side", sc.image_side));
    sc.glyph_side = static_cast<int>(cfg.get_int("glyph_side", sc.glyph_side));
    sc.train_per_class = static_cast<int>(cfg.get_int("train_per_class", sc.train_per_class));
    sc.test_per_class = static_cast<int>(cfg.get_int("test_per_class", sc.test_per_class));
    sc.distractor_count = static_cast<int>(cfg.get_int("distractor_count", sc.distractor_count));
    sc.noise_std = cfg.get_double("noise_std", sc.noise_std);
    sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    return sc;
}

hald::TrainConfig train_from(const hald::ExperimentConfig& cfg) {
    hald::TrainConfig tc;
    tc.hidden = cfg.get_int_list("hidden", tc.hidden);
    tc.batch = static_cast<int>(cfg.get_int("batch", tc.batch));
    tc.steps_per_epoch = static_cast<int>(cfg.get_int("steps_per_epoch", tc.steps_per_epoch));
    tc.lr = cfg.get_double("lr", tc.lr);
    const std::string opt = cfg.get_str("optimizer", "adamw");
    if (opt == "plain") {
        tc.opt = hald::OptKind::plain;
    } else if (opt == "momentum") {
        tc.opt = hald::OptKind::momentum;
    } else if (opt == "adamw") {
        tc.opt = hald::OptKind::adamw;
    } else {
        throw UsageError("unknown optimizer '" + opt + "' (plain, momentum, adamw)");
    }
    tc.weight_decay = cfg.get_double("weight_decay", tc.weight_decay);
    tc.momentum = cfg.get_double("momentum", tc.momentum);
    tc.alpha = cfg.get_double("alpha", tc.alpha);
    tc.cutmix_beta = cfg.get_double("cutmix_beta", tc.cutmix_beta);
    tc.tau = cfg.get_double("tau", tc.tau);
    tc.strong = strong_from(cfg);
    tc.probe_size = static_cast<int>(cfg.get_int("probe_size", tc.probe_size));
    tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    return tc;
}

// ---------------------------------------------------------------------------
// gen-data

int cmd_gen_data(const GlobalOpts& opts) {
    const hald::ExperimentConfig cfg = load_config(opts);
    const fs::path out = resolve_out(opts);
    const hald::SynthConfig sc = synth_from(cfg);
    const hald::Dataset ds = hald::gen_dataset(sc);

    const fs::path train_path = resolve_path(cfg, "train_data", "train.synd", out);
    const fs::path test_path = resolve_path(cfg, "test_data", "test.synd", out);
    hald::save_images(train_path, ds.train, sc.num_classes, sc.image_side);
    hald::save_images(test_path, ds.test, sc.num_classes, sc.image_side);

    json extra;
    extra["num_classes"] = sc.num_classes;
    extra["image_side"] = sc.image_side;
    extra["train_images"] = ds.train.size();
    extra["test_images"] = ds.test.size();
    write_sidecar(train_path, "gen-data", cfg, extra);
    write_sidecar(test_path, "gen-data", cfg, extra);

    std::cout << "wrote " << train_path.string() << " (" << ds.train.size() << " images), "
              << test_path.string() << " (" << ds.test.size() << " images)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-teacher

int cmd_train_teacher(const GlobalOpts& opts) {
    const hald::ExperimentConfig cfg = load_config(opts);
    const fs::path out = resolve_out(opts);
    const hald::LoadedSplit train = hald::load_images(resolve_path(cfg, "train_data", "train.synd", out));
    const hald::LoadedSplit test = hald::load_images(resolve_path(cfg, "test_data", "test.synd", out));
    if (train.num_classes != test.num_classes) {
        throw ConfigError("train/test class counts differ");
    }

    hald::TeacherConfig tc;
    tc.input_side = static_cast<int>(cfg.get_int("crop_side", tc.input_side));
    tc.epochs = static_cast<int>(cfg.get_int("teacher_epochs", tc.epochs));
    tc.batch = static_cast<int>(cfg.get_int("teacher_batch", tc.batch));
    tc.lr = cfg.get_double("teacher_lr", tc.lr);
    tc.weight_decay = cfg.get_double("teacher_weight_decay", tc.weight_decay);
    tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    const std::vector<int> hidden = cfg.get_int_list("teacher_hidden", {256, 128});

    const hald::TeacherResult result =
        hald::train_teacher(train.images, hidden, tc, train.num_classes);
    const double test_acc = hald::full_image_accuracy(result.params, test.images, tc.input_side);

    const fs::path teacher_path = resolve_path(cfg, "teacher_file", "teacher.tnet", out);
    hald::save_params(teacher_path, result.params);
    json extra;
    extra["train_accuracy"] = result.train_accuracy;
    extra["test_accuracy"] = test_acc;
    write_sidecar(teacher_path, "train-teacher", cfg, extra);

    std::cout << "teacher train_acc=" << result.train_accuracy << " test_acc=" << test_acc
              << " -> " << teacher_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// gen-labels

int cmd_gen_labels(const GlobalOpts& opts) {
    const hald::ExperimentConfig cfg = load_config(opts);
    const fs::path out = resolve_out(opts);

    const int sli = static_cast<int>(cfg.get_int("sli", 1));
    if (sli < 1) throw UsageError("sli must be >= 1");
    const int bits = static_cast<int>(cfg.get_int("bits", 16));
    const double tau = cfg.get_double("tau", 2.0);
    if (!(tau > 0.0)) throw UsageError("tau must be positive");

    const hald::TinyNetParams teacher =
        hald::load_params(resolve_path(cfg, "teacher_file", "teacher.tnet", out));
    const hald::LoadedSplit train = hald::load_images(resolve_path(cfg, "train_data", "train.synd", out));
    const hald::AugConfig strong = strong_from(cfg);
    if (teacher.input_dim() != strong.out_side * strong.out_side) {
        throw ConfigError("teacher input size does not match crop_side");
    }

    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    hald::SoftLabelPool pool =
        hald::generate_pool(teacher, train.images, sli, strong, tau, seed);
    pool.bits = static_cast<std::uint8_t>(bits);

    const fs::path pool_path = resolve_path(cfg, "pool_file", "pool.slbl", out);
    hald::save_pool(pool_path, pool);

    const std::uint64_t ipc = train.images.size() / static_cast<std::uint64_t>(train.num_classes);
    const std::uint64_t slc = hald::slc_from(ipc, static_cast<std::uint64_t>(sli));
    const std::uint64_t budget = hald::budget_bytes(slc, train.num_classes, bits);
    const std::uint64_t payload = hald::pool_payload_bytes(pool);
    std::cout << "slc=" << slc << " budget_bytes=" << budget << " payload_bytes=" << payload
              << " (" << static_cast<double>(budget) / (1024.0 * 1024.0) << " MiB)\n";
    if (budget != payload) {
        throw ConfigError("pool payload does not match the storage budget");
    }

    json extra;
    extra["sli"] = sli;
    extra["slc"] = slc;
    extra["budget_bytes"] = budget;
    extra["tau"] = tau;
    extra["bits"] = bits;
    write_sidecar(pool_path, "gen-labels", cfg, extra);
    return 0;
}

// ---------------------------------------------------------------------------
// train

std::vector<hald::StageSpec> stages_for_order(const std::string& order,
                                              const hald::Schedule& schedule) {
    std::vector<hald::StageKind> kinds;
    std::string token;
    std::istringstream in(order);
    while (std::getline(in, token, '-')) {
        if (token == "soft") {
            kinds.push_back(hald::StageKind::soft);
        } else if (token == "hard") {
            kinds.push_back(hald::StageKind::hard);
        } else {
            throw UsageError("variant order segment must be 'soft' or 'hard': " + token);
        }
    }
    if (kinds.empty()) throw UsageError("variant order is empty");

    int n_soft_stages = 0;
    int n_hard_stages = 0;
    for (hald::StageKind k : kinds) {
        (k == hald::StageKind::soft ? n_soft_stages : n_hard_stages)++;
    }
    const int soft_budget = schedule.t_a + schedule.t_c;
    const int hard_budget = schedule.t_b;
    if (n_soft_stages == 0 && soft_budget > 0) {
        throw UsageError("variant order has no soft segment but the soft budget is nonzero");
    }
    if (n_hard_stages == 0 && hard_budget > 0) {
        throw UsageError("variant order has no hard segment but the hard budget is nonzero");
    }

    // A kind's budget spreads over its segments in near-equal parts,
    // earlier segments taking the floor; for soft-hard-soft this
    // reproduces the canonical split exactly.
    std::vector<hald::StageSpec> stages;
    int soft_seen = 0;
    int hard_seen = 0;
    for (hald::StageKind k : kinds) {
        hald::StageSpec spec;
        spec.kind = k;
        if (k == hald::StageKind::soft) {
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

int cmd_train(const GlobalOpts& opts) {
    const hald::ExperimentConfig cfg = load_config(opts);
    const fs::path out = resolve_out(opts);
    const hald::LoadedSplit train = hald::load_images(resolve_path(cfg, "train_data", "train.synd", out));
    const hald::LoadedSplit test = hald::load_images(resolve_path(cfg, "test_data", "test.synd", out));
    const hald::TrainConfig tc = train_from(cfg);
    const std::string trainer = cfg.get_str("trainer", "hald");
    const int n_total = static_cast<int>(cfg.get_int("n_total", 60));
    if (n_total < 0) throw UsageError("n_total must be >= 0");

    const bool needs_pool = trainer != "full_coverage";
    hald::SoftLabelPool pool;
    if (needs_pool) {
        pool = hald::load_pool(resolve_path(cfg, "pool_file", "pool.slbl", out));
        if (pool.num_classes != train.num_classes) {
            throw ConfigError("pool and dataset class counts differ");
        }
        if (pool.num_images != train.images.size()) {
            throw ConfigError("pool and dataset image counts differ");
        }
    }

    // Resolve the soft budget; "auto" measures it with a throwaway run.
    int n_soft = 0;
    bool n_soft_auto = false;
    bool n_soft_capped = false;
    if (needs_pool) {
        const std::string n_soft_str = cfg.get_str("n_soft", "auto");
        if (n_soft_str == "auto") {
            n_soft_auto = true;
            hald::EstimateConfig ec;
            ec.tol = cfg.get_double("estimate_tol", ec.tol);
            ec.patience = static_cast<int>(cfg.get_int("estimate_patience", ec.patience));
            ec.max_epochs = static_cast<int>(cfg.get_int("estimate_max_epochs", ec.max_epochs));
            const hald::EstimateResult est = hald::estimate_n_soft(pool, train.images, tc, ec);
            n_soft = est.n_soft;
            n_soft_capped = est.capped;
            std::cout << "estimated n_soft=" << n_soft << (est.capped ? " (capped)" : "") << "\n";
        } else {
            n_soft = static_cast<int>(cfg.get_int("n_soft", 0));
            if (n_soft < 0) throw UsageError("n_soft must be >= 0 or 'auto'");
        }
    }

    hald::RunResult run;
    std::string notice;
    if (trainer == "hald") {
        const hald::Schedule schedule = hald::compute_schedule(n_total, n_soft);
        if (schedule.t_b == 0) {
            notice = "soft budget covers the whole run; schedule is soft-only";
            std::cout << "note: " << notice << "\n";
        }
        std::cout << "schedule: soft " << schedule.t_a << " / hard " << schedule.t_b << " / soft "
                  << schedule.t_c << "\n";
        run = hald::train_hald(pool, train.images, test.images, schedule, tc);
    } else if (trainer == "soft_only") {
        run = hald::train_soft_only(pool, train.images, test.images, n_total, tc);
    } else if (trainer == "joint") {
        const double lambda = cfg.get_double("lambda", 1.0);
        run = hald::train_joint(pool, train.images, test.images, n_total, lambda, tc);
    } else if (trainer == "full_coverage") {
        const hald::TinyNetParams teacher =
            hald::load_params(resolve_path(cfg, "teacher_file", "teacher.tnet", out));
        run = hald::train_full_coverage(teacher, train.images, test.images, n_total, tc);
    } else if (trainer.rfind("variant:", 0) == 0) {
        const hald::Schedule schedule = hald::compute_schedule(n_total, n_soft);
        run = hald::train_stages(stages_for_order(trainer.substr(8), schedule), pool,
                                 train.images, test.images, tc);
    } else {
        throw UsageError("unknown trainer '" + trainer +
                         "' (hald, soft_only, joint, full_coverage, variant:<order>)");
    }

    const fs::path model_path = resolve_path(cfg, "model_file", "model.tnet", out);
    const fs::path runlog_path = resolve_path(cfg, "runlog_file", "runlog.csv", out);
    hald::save_params(model_path, run.params);
    hald::write_runlog_csv(runlog_path, run);

    json extra;
    extra["trainer"] = trainer;
    extra["n_total"] = n_total;
    if (needs_pool) {
        extra["n_soft"] = n_soft;
        extra["n_soft_auto"] = n_soft_auto;
        if (n_soft_auto) extra["n_soft_capped"] = n_soft_capped;
    }
    extra["final_test_acc"] = run.final_test_acc;
    if (!notice.empty()) extra["notice"] = notice;
    write_sidecar(model_path, "train", cfg, extra);
    write_sidecar(runlog_path, "train", cfg, extra);

    std::cout << "final test_acc=" << run.final_test_acc << " epochs=" << run.epochs.size()
              << " -> " << model_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose

int cmd_diagnose(const GlobalOpts& opts) {
    const hald::ExperimentConfig cfg = load_config(opts);
    const fs::path out = resolve_out(opts);
    const hald::TinyNetParams model =
        hald::load_params(resolve_path(cfg, "model_file", "model.tnet", out));
    const hald::LoadedSplit train = hald::load_images(resolve_path(cfg, "train_data", "train.synd", out));
    const hald::LoadedSplit test = hald::load_images(resolve_path(cfg, "test_data", "test.synd", out));

    const int crop_side = static_cast<int>(cfg.get_int("crop_side", 16));
    if (model.input_dim() != crop_side * crop_side) {
        throw ConfigError("model input size does not match crop_side");
    }
    const hald::AugConfig strong = strong_from(cfg);
    const hald::AugConfig weak = hald::AugConfig::weak_view(crop_side);
    const int n_crops_cov = static_cast<int>(cfg.get_int("n_crops_cov", 64));
    const int n_crops_consistency = static_cast<int>(cfg.get_int("n_crops_consistency", 16));
    const double epsilon = cfg.get_double("epsilon", 1e-12);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));

    const int lvsd_images = static_cast<int>(
        cfg.get_int("lvsd_images", std::min<std::int64_t>(50, static_cast<std::int64_t>(train.images.size()))));
    if (lvsd_images < 1 || lvsd_images > static_cast<int>(train.images.size())) {
        throw UsageError("lvsd_images outside the train split size");
    }
    const std::vector<hald::LabeledImage> corpus(train.images.begin(),
                                                 train.images.begin() + lvsd_images);

    const hald::Predictor predictor = hald::net_predictor(model, 1.0);
    hald::Rng rng(seed, kDiagStream);
    const hald::LvsdReport lvsd =
        hald::lvsd_report(predictor, corpus, n_crops_cov, weak, strong, epsilon, rng);

    // Per-image CSV + aggregate JSON.
    const fs::path csv_path = out / "lvsd.csv";
    {
        std::ofstream csv(csv_path);
        if (!csv) throw hald::IoError(hald::IoErrorKind::open_failed, "cannot write " + csv_path.string());
        csv << "index,trace_weak,trace_strong,ratio\n";
        csv.precision(12);
        for (std::size_t i = 0; i < lvsd.per_image.size(); ++i) {
            const hald::LvsdImageStat& s = lvsd.per_image[i];
            csv << i << "," << s.trace_weak << "," << s.trace_strong << "," << s.ratio << "\n";
        }
    }

    json report;
    report["n_images"] = lvsd.per_image.size();
    report["n_crops"] = lvsd.n_crops;
    report["epsilon"] = lvsd.epsilon;
    report["mean_trace_weak"] = lvsd.mean_trace_weak;
    report["mean_trace_strong"] = lvsd.mean_trace_strong;
    report["mean_ratio"] = lvsd.mean_ratio;
    report["log10_mean_ratio"] = lvsd.log10_mean_ratio;
    report["frac_ratio_above_one"] = lvsd.frac_ratio_above_one;

    // Crop-consistency over a fixed probe prefix of the test split.
    const int n_probe = std::min<int>(20, static_cast<int>(test.images.size()));
    double js_sum = 0.0;
    double cos_sum = 0.0;
    for (int i = 0; i < n_probe; ++i) {
        const hald::AlignmentReport r = hald::crop_consistency(
            predictor, test.images[static_cast<std::size_t>(i)].image, n_crops_consistency,
            strong, rng);
        js_sum += r.mean_js;
        cos_sum += r.mean_cosine;
    }
    json consistency;
    consistency["probe_images"] = n_probe;
    consistency["mean_js"] = js_sum / n_probe;
    consistency["mean_cosine"] = cos_sum / n_probe;
    report["crop_consistency"] = consistency;

    if (cfg.has("reference_file")) {
        const hald::TinyNetParams reference =
            hald::load_params(resolve_path(cfg, "reference_file", "reference.tnet", out));
        const hald::AlignmentReport align =
            hald::prediction_alignment(model, reference, test.images, crop_side);
        json a;
        a["mean_js"] = align.mean_js;
        a["mean_cosine"] = align.mean_cosine;
        a["images"] = align.sample_count;
        report["prediction_alignment"] = a;
    }

    const fs::path json_path = out / "diagnose.json";
    write_json_file(json_path, report);
    write_sidecar(json_path, "diagnose", cfg);
    write_sidecar(csv_path, "diagnose", cfg);

    std::cout << "lvsd: mean_trace_weak=" << lvsd.mean_trace_weak
              << " mean_trace_strong=" << lvsd.mean_trace_strong
              << " p(R>1)=" << lvsd.frac_ratio_above_one << "\n";
    std::cout << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify-theory

int cmd_verify_theory(const GlobalOpts& opts, const std::string& selector, bool write_report) {
    const hald::ExperimentConfig cfg = load_config(opts);
    const std::uint64_t seed = cfg.has("seed")
                                   ? static_cast<std::uint64_t>(cfg.get_int("seed", 0))
                                   : hald::kDefaultTheorySeed;
    int workers = opts.workers_flag > 0 ? opts.workers_flag
                                        : static_cast<int>(cfg.get_int("workers", 1));
    if (workers < 1) throw UsageError("workers must be >= 1");

    hald::TheoryReport report;
    try {
        report = hald::run_theory_suite(selector, seed, workers);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    json checks = json::array();
    for (const hald::TheoryCheck& c : report.checks) {
        std::printf("%s %-38s empirical=%-14.8g theoretical=%-14.8g tol=%.3g\n",
                    c.pass ? "[ok]  " : "[FAIL]", c.name.c_str(), c.empirical, c.theoretical,
                    c.tolerance);
        json jc;
        jc["name"] = c.name;
        jc["empirical"] = c.empirical;
        jc["theoretical"] = c.theoretical;
        jc["tolerance"] = c.tolerance;
        jc["pass"] = c.pass;
        if (!c.note.empty()) jc["note"] = c.note;
        checks.push_back(jc);
    }
    json j;
    j["selector"] = selector;
    j["seed"] = seed;
    j["workers"] = workers;
    j["all_pass"] = report.all_pass();
    j["checks"] = checks;

    if (write_report) {
        const fs::path out = resolve_out(opts);
        const fs::path report_path = out / "theory_report.json";
        write_json_file(report_path, j);
        write_sidecar(report_path, "verify-theory", cfg);
        std::cout << "wrote " << report_path.string() << "\n";
    }

    if (!report.all_pass()) {
        for (const hald::TheoryCheck& c : report.checks) {
            if (!c.pass) throw VerifyError("theory check failed: " + c.name);
        }
    }
    std::cout << report.checks.size() << " checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Storage-budgeted soft-label training laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "Flat key=value config file");
    app.add_option("--out", opts.out_dir, "Output directory (default: current)");
    auto* seed_opt = app.add_option("--seed", opts.seed_flag, "Override the config seed");
    app.add_flag("--create", opts.create_out, "Create the output directory if missing");
    app.add_option("--workers", opts.workers_flag, "Worker threads for verify-theory");

    auto* gen_data = app.add_subcommand("gen-data", "Generate the synthetic glyph corpus");
    auto* train_teacher = app.add_subcommand("train-teacher", "Train the full-image teacher");
    auto* gen_labels = app.add_subcommand("gen-labels", "Build the stored soft-label pool");
    auto* train = app.add_subcommand("train", "Train a student (hald, soft_only, joint, ...)");
    auto* diagnose = app.add_subcommand("diagnose", "Drift and alignment reports for a checkpoint");
    auto* verify = app.add_subcommand("verify-theory", "Monte Carlo checks of the bounds");
    std::string selector = "all";
    verify->add_option("selector", selector, "all, lemma1, thm1, thm2, thm3, or cor1");
    bool write_report = false;
    verify->add_flag("--report", write_report, "Write theory_report.json to --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }
    opts.seed_given = seed_opt->count() > 0;

    try {
        if (*gen_data) return cmd_gen_data(opts);
        if (*train_teacher) return cmd_train_teacher(opts);
        if (*gen_labels) return cmd_gen_labels(opts);
        if (*train) return cmd_train(opts);
        if (*diagnose) return cmd_diagnose(opts);
        if (*verify) return cmd_verify_theory(opts, selector, write_report);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const VerifyError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 3;
    } catch (const hald::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
