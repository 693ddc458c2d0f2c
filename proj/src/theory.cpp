#include "hald/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "hald/binio.hpp"

namespace hald {

namespace {

// Stream-id blocks keep every verifier's per-trial rng streams disjoint
// from the others' under a shared seed.
constexpr std::uint32_t kBlockThm1 = 0x1000;    // + s index
constexpr std::uint32_t kBlockLemma1 = 0x2000;  // + s index
constexpr std::uint32_t kBlockThm2 = 0x3000;
constexpr std::uint32_t kBlockMixing = 0x4000;
constexpr std::uint32_t kBlockThm3 = 0x5000;
constexpr std::uint32_t kBlockCor1 = 0x6000;

/// Runs fn(trial, rng) for every trial index with a counter-based rng
/// stream per trial, optionally across threads.  The result vector is
/// indexed by trial, so any reduction done afterwards in index order is
/// independent of the worker count.  fn must be safe to call concurrently.
template <class T, class F>
std::vector<T> mc_collect(int trials, std::uint64_t seed, std::uint32_t block, int workers,
                          F&& fn) {
    if (trials < 1) throw std::invalid_argument("mc_collect: trials must be >= 1");
    std::vector<T> out(static_cast<std::size_t>(trials));
    auto run = [&](int lo, int hi, std::exception_ptr* err) noexcept {
        try {
            for (int t = lo; t < hi; ++t) {
                Rng rng(seed,
                        (static_cast<std::uint64_t>(block) << 32) | static_cast<std::uint32_t>(t));
                out[static_cast<std::size_t>(t)] = fn(t, rng);
            }
        } catch (...) {
            *err = std::current_exception();
        }
    };
    const int n_workers = std::min(std::max(1, workers), trials);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
    if (n_workers == 1) {
        run(0, trials, &errors[0]);
    } else {
        std::vector<std::thread> threads;
        const int chunk = (trials + n_workers - 1) / n_workers;
        for (int w = 0; w < n_workers; ++w) {
            const int lo = w * chunk;
            const int hi = std::min(trials, lo + chunk);
            if (lo >= hi) break;
            threads.emplace_back(run, lo, hi, &errors[static_cast<std::size_t>(w)]);
        }
        for (std::thread& th : threads) th.join();
    }
    for (const std::exception_ptr& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return out;
}

double ordered_mean(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Two-sided check: pass iff |empirical - theoretical| <= rel_tol * |theoretical|.
TheoryCheck check_close(std::string name, double empirical, double theoretical, double rel_tol,
                        std::string note = {}) {
    TheoryCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.theoretical = theoretical;
    c.tolerance = rel_tol * std::abs(theoretical);
    c.pass = std::abs(empirical - theoretical) <= c.tolerance;
    c.note = std::move(note);
    return c;
}

/// One-sided check: pass iff empirical >= theoretical - slack.
TheoryCheck check_at_least(std::string name, double empirical, double theoretical, double slack,
                           std::string note = {}) {
    TheoryCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.theoretical = theoretical;
    c.tolerance = slack;
    c.pass = empirical >= theoretical - slack;
    c.note = std::move(note);
    return c;
}

/// One-sided check: pass iff empirical <= theoretical + slack.
TheoryCheck check_at_most(std::string name, double empirical, double theoretical, double slack,
                          std::string note = {}) {
    TheoryCheck c;
    c.name = std::move(name);
    c.empirical = empirical;
    c.theoretical = theoretical;
    c.tolerance = slack;
    c.pass = empirical <= theoretical + slack;
    c.note = std::move(note);
    return c;
}

double norm2(std::span<const double> v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    return std::sqrt(ss);
}

}  // namespace

bool TheoryReport::all_pass() const {
    for (const TheoryCheck& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

void TheoryReport::merge(TheoryReport other) {
    for (TheoryCheck& c : other.checks) checks.push_back(std::move(c));
}

const TheoryCheck* TheoryReport::find(const std::string& name) const {
    for (const TheoryCheck& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::pair<double, double> pz_constant() {
    auto g = [](double t) { return std::sqrt(t) * (1.0 - t) * (1.0 - t); };
    const int n = 100000;
    double best_t = 0.0;
    double best_v = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        const double v = g(t);
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    }
    double lo = std::max(0.0, best_t - 1.0 / n);
    double hi = std::min(1.0, best_t + 1.0 / n);
    while (hi - lo > 1e-12) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (g(m1) < g(m2)) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    const double t_star = 0.5 * (lo + hi);
    return {t_star, g(t_star)};
}

double thm1_bound(double sigma, double kappa, int s) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("thm1_bound: sigma must be >= 0");
    if (!(kappa >= 1.0)) throw std::invalid_argument("thm1_bound: kappa must be >= 1");
    if (s < 1) throw std::invalid_argument("thm1_bound: s must be >= 1");
    const double g_star = 16.0 / (25.0 * std::sqrt(5.0));
    return sigma / std::sqrt(static_cast<double>(s)) * g_star * std::min(1.0 / kappa, 1.0 / 3.0);
}

LossDistSpec LossDistSpec::gaussian_law(double mu, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_law: sigma must be >= 0");
    LossDistSpec d;
    d.kind = Kind::gaussian;
    d.label = "gaussian";
    d.mu = mu;
    d.sigma = sigma;
    d.kappa = 3.0;
    return d;
}

LossDistSpec LossDistSpec::two_point(double lo, double hi, double prob_hi) {
    LossDistSpec d = from_table({lo, hi}, {1.0 - prob_hi, prob_hi}, "two_point");
    return d;
}

LossDistSpec LossDistSpec::from_table(std::vector<double> values,
                                      const std::vector<double>& probs, std::string label) {
    if (values.empty() || values.size() != probs.size()) {
        throw std::invalid_argument("from_table: values/probs size mismatch");
    }
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("from_table: probabilities must be non-negative");
        }
        total += p;
    }
    if (!(total > 0.0)) throw std::invalid_argument("from_table: probabilities sum to zero");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("from_table: non-finite value");
    }

    LossDistSpec d;
    d.kind = Kind::table;
    d.label = std::move(label);
    d.values = std::move(values);
    d.cum_probs.resize(d.values.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        cum += probs[i] / total;
        d.cum_probs[i] = cum;
    }
    d.cum_probs.back() = 1.0;

    d.mu = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.mu += probs[i] / total * d.values[i];
    double var = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        const double c = d.values[i] - d.mu;
        var += probs[i] / total * c * c;
        m4 += probs[i] / total * c * c * c * c;
    }
    d.sigma = std::sqrt(var);
    d.kappa = var > 0.0 ? m4 / (var * var) : 1.0;
    return d;
}

double LossDistSpec::sample(Rng& rng) const {
    if (kind == Kind::gaussian) return rng.gaussian(mu, sigma);
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cum_probs.size(); ++i) {
        if (u < cum_probs[i]) return values[i];
    }
    return values.back();
}

TheoryReport verify_thm1(const LossDistSpec& dist, const std::vector<int>& s_list, int trials,
                         std::uint64_t seed, int workers) {
    if (s_list.empty()) throw std::invalid_argument("verify_thm1: empty s list");
    TheoryReport report;
    for (std::size_t si = 0; si < s_list.size(); ++si) {
        const int s = s_list[si];
        const std::vector<double> devs = mc_collect<double>(
            trials, seed, kBlockThm1 + static_cast<std::uint32_t>(si), workers,
            [&dist, s](int, Rng& rng) {
                double total = 0.0;
                for (int k = 0; k < s; ++k) total += dist.sample(rng);
                return std::abs(total / s - dist.mu);
            });
        const double empirical = ordered_mean(devs);
        const double bound = thm1_bound(dist.sigma, dist.kappa, s);
        report.checks.push_back(check_at_least(
            "thm1/" + dist.label + "/s=" + std::to_string(s) + "/lower_bound", empirical, bound,
            0.0, "slack=" + fmt(empirical - bound)));
        if (dist.kind == LossDistSpec::Kind::gaussian && dist.sigma > 0.0) {
            const double closed_form = dist.sigma * std::sqrt(2.0 / (M_PI * s));
            report.checks.push_back(
                check_close("thm1/" + dist.label + "/s=" + std::to_string(s) + "/gaussian_mad",
                            empirical, closed_form, 0.02));
        }
    }
    return report;
}

LabelLawSpec LabelLawSpec::point_mass(int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("point_mass: need at least one class");
    LabelLawSpec law;
    law.kind = Kind::point_mass;
    law.label = "point_mass";
    law.num_classes = num_classes;
    return law;
}

LabelLawSpec LabelLawSpec::two_point(double prob_first) {
    if (!(prob_first >= 0.0 && prob_first <= 1.0)) {
        throw std::invalid_argument("two_point: probability outside [0,1]");
    }
    LabelLawSpec law;
    law.kind = Kind::two_point_e1e2;
    law.label = "two_point";
    law.num_classes = 2;
    law.prob_first = prob_first;
    return law;
}

LabelLawSpec LabelLawSpec::dirichlet_flat(int num_classes) {
    if (num_classes < 2) throw std::invalid_argument("dirichlet_flat: need at least two classes");
    LabelLawSpec law;
    law.kind = Kind::dirichlet_flat;
    law.label = "dirichlet";
    law.num_classes = num_classes;
    return law;
}

std::vector<double> LabelLawSpec::mean() const {
    std::vector<double> m(static_cast<std::size_t>(num_classes), 0.0);
    switch (kind) {
        case Kind::point_mass:
            m[0] = 1.0;
            break;
        case Kind::two_point_e1e2:
            m[0] = prob_first;
            m[1] = 1.0 - prob_first;
            break;
        case Kind::dirichlet_flat:
            std::fill(m.begin(), m.end(), 1.0 / num_classes);
            break;
    }
    return m;
}

double LabelLawSpec::cov_trace() const {
    switch (kind) {
        case Kind::point_mass:
            return 0.0;
        case Kind::two_point_e1e2:
            return 2.0 * prob_first * (1.0 - prob_first);
        case Kind::dirichlet_flat: {
            // Var of each coordinate is (1/C)(1 - 1/C)/(C + 1).
            const double c = static_cast<double>(num_classes);
            return (1.0 - 1.0 / c) / (c + 1.0);
        }
    }
    throw std::logic_error("cov_trace: unreachable");
}

void LabelLawSpec::sample(std::vector<double>& out, Rng& rng) const {
    out.assign(static_cast<std::size_t>(num_classes), 0.0);
    switch (kind) {
        case Kind::point_mass:
            out[0] = 1.0;
            break;
        case Kind::two_point_e1e2:
            if (rng.uniform() < prob_first) {
                out[0] = 1.0;
            } else {
                out[1] = 1.0;
            }
            break;
        case Kind::dirichlet_flat:
            rng.dirichlet(out, 1.0);
            break;
    }
}

TheoryReport verify_lemma1_mc(const LabelLawSpec& law, const std::vector<int>& s_list, int trials,
                              std::uint64_t seed, int workers) {
    if (s_list.empty()) throw std::invalid_argument("verify_lemma1_mc: empty s list");
    const std::vector<double> p_bar = law.mean();
    const double trace = law.cov_trace();
    TheoryReport report;
    for (std::size_t si = 0; si < s_list.size(); ++si) {
        const int s = s_list[si];
        if (s < 1) throw std::invalid_argument("verify_lemma1_mc: s must be >= 1");
        const std::vector<double> sq = mc_collect<double>(
            trials, seed, kBlockLemma1 + static_cast<std::uint32_t>(si), workers,
            [&law, &p_bar, s](int, Rng& rng) {
                std::vector<double> acc(p_bar.size(), 0.0);
                std::vector<double> draw;
                for (int k = 0; k < s; ++k) {
                    law.sample(draw, rng);
                    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += draw[c];
                }
                double dist2 = 0.0;
                for (std::size_t c = 0; c < acc.size(); ++c) {
                    const double d = acc[c] / s - p_bar[c];
                    dist2 += d * d;
                }
                return dist2;
            });
        report.checks.push_back(check_close(
            "lemma1/" + law.label + "/s=" + std::to_string(s), ordered_mean(sq), trace / s, 0.05));
    }
    return report;
}

TheoryReport verify_thm2_quadratic(const QuadErmSpec& spec, std::uint64_t seed, int workers) {
    if (spec.noise_diag.empty()) throw std::invalid_argument("verify_thm2_quadratic: empty diag");
    for (double v : spec.noise_diag) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("verify_thm2_quadratic: diag entries must be >= 0");
        }
    }
    if (spec.sample_size < 1) throw std::invalid_argument("verify_thm2_quadratic: s must be >= 1");
    std::vector<double> scales(spec.noise_diag.size());
    double trace = 0.0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        scales[i] = std::sqrt(spec.noise_diag[i]);
        trace += spec.noise_diag[i];
    }
    const int s = spec.sample_size;
    const std::vector<double> excess = mc_collect<double>(
        spec.trials, seed, kBlockThm2, workers, [&scales, s](int, Rng& rng) {
            double half_sq = 0.0;
            for (double scale : scales) {
                double mean = 0.0;
                for (int k = 0; k < s; ++k) mean += rng.gaussian(0.0, scale);
                mean /= s;
                half_sq += 0.5 * mean * mean;
            }
            return half_sq;
        });
    TheoryReport report;
    report.checks.push_back(check_close("thm2/s=" + std::to_string(s), ordered_mean(excess),
                                        trace / (2.0 * s), 0.03,
                                        "dim=" + std::to_string(scales.size())));
    return report;
}

MixingCheck mixing_bound_check(const ProbVector& p, const ProbVector& q,
                               const std::vector<std::vector<double>>& g_set) {
    const int num_classes = p.size();
    if (q.size() != num_classes || static_cast<int>(g_set.size()) != num_classes) {
        throw std::invalid_argument("mixing_bound_check: class count mismatch");
    }
    if (g_set.empty()) throw std::invalid_argument("mixing_bound_check: empty gradient set");
    const std::size_t dim = g_set.front().size();
    for (const std::vector<double>& g : g_set) {
        if (g.size() != dim) {
            throw std::invalid_argument("mixing_bound_check: gradient dimension mismatch");
        }
    }

    std::vector<double> combo(dim, 0.0);
    double l1 = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        const double coef = p[c] - q[c];
        l1 += std::abs(coef);
        for (std::size_t k = 0; k < dim; ++k) {
            combo[k] += coef * g_set[static_cast<std::size_t>(c)][k];
        }
    }

    double diameter = 0.0;
    for (std::size_t i = 0; i < g_set.size(); ++i) {
        for (std::size_t j = i + 1; j < g_set.size(); ++j) {
            double ss = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = g_set[i][k] - g_set[j][k];
                ss += d * d;
            }
            diameter = std::max(diameter, std::sqrt(ss));
        }
    }

    MixingCheck check;
    check.lhs = norm2(combo);
    check.rhs = 0.5 * diameter * l1;
    check.holds = check.lhs <= check.rhs + 1e-12;
    return check;
}

TheoryReport verify_mixing(int trials, int max_classes, int max_dim, std::uint64_t seed,
                           int workers) {
    if (max_classes < 2) throw std::invalid_argument("verify_mixing: max_classes must be >= 2");
    if (max_dim < 1) throw std::invalid_argument("verify_mixing: max_dim must be >= 1");
    const std::vector<double> slacks = mc_collect<double>(
        trials, seed, kBlockMixing, workers, [max_classes, max_dim](int, Rng& rng) {
            const int num_classes = static_cast<int>(rng.uniform_int(2, max_classes));
            const int dim = static_cast<int>(rng.uniform_int(1, max_dim));
            std::vector<double> pw(static_cast<std::size_t>(num_classes));
            std::vector<double> qw(static_cast<std::size_t>(num_classes));
            rng.dirichlet(pw, 1.0);
            rng.dirichlet(qw, 1.0);
            std::vector<std::vector<double>> g_set(static_cast<std::size_t>(num_classes));
            for (std::vector<double>& g : g_set) {
                const double scale = rng.uniform(0.1, 3.0);
                g.resize(static_cast<std::size_t>(dim));
                for (double& x : g) x = scale * rng.gaussian();
            }
            const MixingCheck check =
                mixing_bound_check(ProbVector(pw), ProbVector(qw), g_set);
            return check.lhs - check.rhs;
        });
    double worst = slacks.front();
    for (double s : slacks) worst = std::max(worst, s);

    TheoryReport report;
    report.checks.push_back(check_at_most("mixing/max_violation", worst, 0.0, 1e-12,
                                          "instances=" + std::to_string(trials)));

    // Tightness witness: two classes with opposite point masses make both
    // sides equal the gradient-pair distance.
    const std::vector<std::vector<double>> pair = {{1.0, 2.0, -1.0}, {-2.0, 0.5, 3.0}};
    const MixingCheck witness =
        mixing_bound_check(ProbVector::delta(0, 2), ProbVector::delta(1, 2), pair);
    report.checks.push_back(check_at_most("mixing/witness_gap",
                                          std::abs(witness.lhs - witness.rhs), 0.0, 1e-12,
                                          "lhs=" + fmt(witness.lhs)));
    return report;
}

CropGen dirichlet_crop_gen(int num_classes) {
    if (num_classes < 2) throw std::invalid_argument("dirichlet_crop_gen: need >= 2 classes");
    return [num_classes](Rng& rng) {
        std::vector<double> w(static_cast<std::size_t>(num_classes));
        rng.dirichlet(w, 1.0);
        return ProbVector(w);
    };
}

CropGen constant_crop_gen(ProbVector p) {
    return [p = std::move(p)](Rng&) { return p; };
}

double pairwise_diameter(const std::vector<std::vector<double>>& g_set) {
    double diameter = 0.0;
    for (std::size_t i = 0; i < g_set.size(); ++i) {
        for (std::size_t j = i + 1; j < g_set.size(); ++j) {
            if (g_set[i].size() != g_set[j].size()) {
                throw std::invalid_argument("pairwise_diameter: dimension mismatch");
            }
            double ss = 0.0;
            for (std::size_t k = 0; k < g_set[i].size(); ++k) {
                const double d = g_set[i][k] - g_set[j][k];
                ss += d * d;
            }
            diameter = std::max(diameter, std::sqrt(ss));
        }
    }
    return diameter;
}

namespace {

struct Thm3Stat {
    double cosine = 0.0;
    double crop_bound = 0.0;
    double crop_entropy = 0.0;
    double min_norm = 0.0;
    int violation = 0;
};

}  // namespace

TheoryReport verify_thm3(const AlignSpec& spec, const CropGen& gen, int trials,
                         std::uint64_t seed, int workers) {
    const int num_classes = static_cast<int>(spec.gradients.size());
    if (num_classes < 2) throw std::invalid_argument("verify_thm3: need >= 2 class gradients");
    if (!(spec.alpha >= 0.0 && spec.alpha < 1.0)) {
        throw std::invalid_argument("verify_thm3: alpha must lie in [0, 1)");
    }
    if (!gen) throw std::invalid_argument("verify_thm3: null crop generator");
    const std::size_t dim = spec.gradients.front().size();
    for (const std::vector<double>& g : spec.gradients) {
        if (g.size() != dim) throw std::invalid_argument("verify_thm3: dimension mismatch");
    }
    const double diameter = pairwise_diameter(spec.gradients);
    const double smooth_l1 = 2.0 * spec.alpha * (1.0 - 1.0 / num_classes);

    const std::vector<Thm3Stat> stats = mc_collect<Thm3Stat>(
        trials, seed, kBlockThm3, workers, [&spec, &gen, num_classes, dim, diameter, smooth_l1](
                                               int, Rng& rng) {
            const ProbVector teacher = gen(rng);
            if (teacher.size() != num_classes) {
                throw std::invalid_argument("verify_thm3: generator class count mismatch");
            }
            const ProbVector hardened =
                label_smooth(teacher.argmax(), spec.alpha, num_classes);
            std::vector<double> soft(dim, 0.0);
            std::vector<double> hard(dim, 0.0);
            for (int c = 0; c < num_classes; ++c) {
                const std::vector<double>& g = spec.gradients[static_cast<std::size_t>(c)];
                for (std::size_t k = 0; k < dim; ++k) {
                    soft[k] -= teacher[c] * g[k];
                    hard[k] -= hardened[c] * g[k];
                }
            }
            Thm3Stat stat;
            stat.min_norm = std::min(norm2(soft), norm2(hard));
            if (!(stat.min_norm > 1e-15)) {
                throw std::runtime_error(
                    "verify_thm3: aggregate gradient vanished (m0 = 0 assumption violated)");
            }
            stat.cosine = cosine_sim(soft, hard);
            stat.crop_entropy = entropy(teacher);
            stat.crop_bound =
                1.0 - diameter / stat.min_norm * (2.0 * stat.crop_entropy + smooth_l1);
            stat.violation = stat.cosine < stat.crop_bound - 1e-9 ? 1 : 0;
            return stat;
        });

    double m0 = stats.front().min_norm;
    double cos_total = 0.0;
    double entropy_total = 0.0;
    int violations = 0;
    for (const Thm3Stat& s : stats) {
        m0 = std::min(m0, s.min_norm);
        cos_total += s.cosine;
        entropy_total += s.crop_entropy;
        violations += s.violation;
    }
    const double mean_cos = cos_total / trials;
    const double align_const = 2.0 * entropy_total / trials + smooth_l1;
    const double bound = 1.0 - diameter / m0 * align_const;

    TheoryReport report;
    std::string note = "D=" + fmt(diameter) + " m0=" + fmt(m0) + " C_align=" + fmt(align_const);
    if (bound < -1.0) note += " (vacuous)";
    report.checks.push_back(
        check_at_least("thm3/mean_cosine", mean_cos, bound, 1e-9, std::move(note)));
    report.checks.push_back(check_at_most("thm3/per_crop_violations",
                                          static_cast<double>(violations), 0.0, 0.0,
                                          "crops=" + std::to_string(trials)));
    return report;
}

TheoryReport verify_cor1(const CorrPairSpec& spec, std::uint64_t seed, int workers) {
    if (!(spec.rho > 0.0 && spec.rho < 1.0)) {
        throw std::invalid_argument("verify_cor1: rho must lie strictly inside (0, 1)");
    }
    if (spec.dim < 2) throw std::invalid_argument("verify_cor1: dim must be >= 2");
    const double rho = spec.rho;
    const int dim = spec.dim;

    struct PairStat {
        double cosine = 0.0;
        double u_sq = 0.0;
    };
    const std::vector<PairStat> stats = mc_collect<PairStat>(
        spec.trials, seed, kBlockCor1, workers, [rho, dim](int, Rng& rng) {
            // v is e1; w is uniform on the unit sphere orthogonal to v, so
            // u = rho * v + sqrt(1 - rho^2) * w is a unit vector whose
            // cosine with v equals rho by construction.
            std::vector<double> w(static_cast<std::size_t>(dim));
            double norm = 0.0;
            do {
                w[0] = 0.0;
                for (int k = 1; k < dim; ++k) w[static_cast<std::size_t>(k)] = rng.gaussian();
                norm = norm2(w);
            } while (norm < 1e-12);
            const double lift = std::sqrt(1.0 - rho * rho);
            PairStat stat;
            stat.u_sq = rho * rho;
            stat.cosine = rho;  // u[0] * v[0] with v = e1
            for (int k = 1; k < dim; ++k) {
                const double uk = lift * w[static_cast<std::size_t>(k)] / norm;
                stat.u_sq += uk * uk;
            }
            return stat;
        });

    double cos_total = 0.0;
    double usq_total = 0.0;
    for (const PairStat& s : stats) {
        cos_total += s.cosine;
        usq_total += s.u_sq;
    }
    const double beta = cos_total / spec.trials;
    const double mean_usq = usq_total / spec.trials;
    const double residual = mean_usq - beta * beta;  // min_b E||u - b v||^2 at b = beta
    const double residual_theory = 1.0 - rho * rho;

    TheoryReport report;
    const std::string prefix = "cor1/rho=" + fmt(rho);
    report.checks.push_back(check_close(prefix + "/beta", beta, rho, 0.02));
    report.checks.push_back(check_close(prefix + "/residual", residual, residual_theory, 0.05));
    report.checks.push_back(check_close(prefix + "/s_eff_ratio", 1.0 / residual,
                                        1.0 / residual_theory, 0.05));
    return report;
}

namespace {

std::uint64_t suite_seed(std::uint64_t base, std::string_view name) {
    return base ^ fnv1a64(name);
}

}  // namespace

TheoryReport run_theory_suite(const std::string& selector, std::uint64_t seed, int workers) {
    const bool all = selector == "all";
    bool known = all;
    TheoryReport report;

    if (all || selector == "lemma1") {
        known = true;
        const std::vector<int> s_list = {1, 2, 4, 8, 16, 32, 64};
        report.merge(verify_lemma1_mc(LabelLawSpec::two_point(0.9), s_list, 100000,
                                      suite_seed(seed, "lemma1/two_point"), workers));
        report.merge(verify_lemma1_mc(LabelLawSpec::dirichlet_flat(3), s_list, 100000,
                                      suite_seed(seed, "lemma1/dirichlet"), workers));
    }
    if (all || selector == "thm1") {
        known = true;
        std::vector<int> s_list(64);
        for (int i = 0; i < 64; ++i) s_list[static_cast<std::size_t>(i)] = i + 1;
        report.merge(verify_thm1(LossDistSpec::gaussian_law(0.0, 1.0), s_list, 10000,
                                 suite_seed(seed, "thm1/gaussian"), workers));
        report.merge(verify_thm1(LossDistSpec::two_point(0.0, 1.0, 0.1), s_list, 10000,
                                 suite_seed(seed, "thm1/two_point"), workers));
    }
    if (all || selector == "thm2") {
        known = true;
        for (int s : {10, 50, 200}) {
            QuadErmSpec spec;
            spec.noise_diag.assign(5, 1.0);
            spec.sample_size = s;
            spec.trials = 100000;
            report.merge(verify_thm2_quadratic(spec, suite_seed(seed, "thm2"), workers));
        }
    }
    if (all || selector == "thm3") {
        known = true;
        report.merge(verify_mixing(10000, 8, 16, suite_seed(seed, "thm3/mixing"), workers));
        AlignSpec align;
        align.alpha = 0.1;
        Rng grad_rng(suite_seed(seed, "thm3/gradients"));
        align.gradients.assign(5, std::vector<double>(32));
        for (std::vector<double>& g : align.gradients) {
            for (double& x : g) x = grad_rng.gaussian();
        }
        report.merge(verify_thm3(align, dirichlet_crop_gen(5), 1000,
                                 suite_seed(seed, "thm3/align"), workers));
    }
    if (all || selector == "cor1") {
        known = true;
        for (double rho : {0.2, 0.6, 0.9}) {
            CorrPairSpec spec;
            spec.rho = rho;
            spec.dim = 16;
            spec.trials = 100000;
            report.merge(verify_cor1(spec, suite_seed(seed, "cor1"), workers));
        }
    }
    if (!known) throw std::invalid_argument("run_theory_suite: unknown selector '" + selector + "'");
    return report;
}

}  // namespace hald
