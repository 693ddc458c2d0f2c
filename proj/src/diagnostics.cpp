#include "hald/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hald {

namespace {

std::vector<float> render_view(const Image& image, const AugConfig& cfg, Rng& rng) {
    return sample_crop(image, cfg, rng).second;
}

std::vector<double> widen(const std::vector<float>& pixels) {
    return std::vector<double>(pixels.begin(), pixels.end());
}

std::vector<ProbVector> collect_predictions(const Predictor& model, const Image& image,
                                            int n_crops, const AugConfig& cfg, Rng& rng) {
    std::vector<ProbVector> preds;
    preds.reserve(static_cast<std::size_t>(n_crops));
    for (int i = 0; i < n_crops; ++i) {
        preds.push_back(model(render_view(image, cfg, rng)));
    }
    return preds;
}

}  // namespace

Predictor net_predictor(const TinyNetParams& params, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("net_predictor: tau must be positive");
    return [params, tau](const std::vector<float>& pixels) {
        std::vector<double> logits = forward_logits(params, widen(pixels));
        return softmax_temp(logits, tau);
    };
}

double cov_trace(const std::vector<ProbVector>& points) {
    if (points.size() < 2) throw std::invalid_argument("cov_trace: need at least two points");
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const ProbVector& p : points) {
        if (p.size() != dim) throw std::invalid_argument("cov_trace: dimension mismatch");
        for (std::size_t c = 0; c < dim; ++c) mean[c] += p[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    double ss = 0.0;
    for (const ProbVector& p : points) {
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = p[c] - mean[c];
            ss += d * d;
        }
    }
    return ss / static_cast<double>(n - 1);
}

double pred_cov_trace(const Predictor& model, const Image& image, int n_crops,
                      const AugConfig& cfg, Rng& rng) {
    if (n_crops < 2) throw std::invalid_argument("pred_cov_trace: n_crops must be >= 2");
    return cov_trace(collect_predictions(model, image, n_crops, cfg, rng));
}

double lvsd_ratio(const Predictor& model, const Image& image, int n_crops,
                  const AugConfig& weak_cfg, const AugConfig& strong_cfg, double epsilon,
                  Rng& rng) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("lvsd_ratio: epsilon must be >= 0");
    const double tw = pred_cov_trace(model, image, n_crops, weak_cfg, rng);
    const double ts = pred_cov_trace(model, image, n_crops, strong_cfg, rng);
    return ts / (tw + epsilon);
}

LvsdReport lvsd_report(const Predictor& model, const std::vector<LabeledImage>& images,
                       int n_crops, const AugConfig& weak_cfg, const AugConfig& strong_cfg,
                       double epsilon, Rng& rng) {
    if (images.empty()) throw std::invalid_argument("lvsd_report: empty image set");
    if (n_crops < 2) throw std::invalid_argument("lvsd_report: n_crops must be >= 2");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("lvsd_report: epsilon must be >= 0");
    LvsdReport report;
    report.n_crops = n_crops;
    report.epsilon = epsilon;
    report.per_image.reserve(images.size());
    double above = 0.0;
    for (const LabeledImage& li : images) {
        LvsdImageStat stat;
        stat.trace_weak = pred_cov_trace(model, li.image, n_crops, weak_cfg, rng);
        stat.trace_strong = pred_cov_trace(model, li.image, n_crops, strong_cfg, rng);
        stat.ratio = stat.trace_strong / (stat.trace_weak + epsilon);
        report.mean_trace_weak += stat.trace_weak;
        report.mean_trace_strong += stat.trace_strong;
        report.mean_ratio += stat.ratio;
        if (stat.ratio > 1.0) above += 1.0;
        report.per_image.push_back(stat);
    }
    const double n = static_cast<double>(images.size());
    report.mean_trace_weak /= n;
    report.mean_trace_strong /= n;
    report.mean_ratio /= n;
    report.frac_ratio_above_one = above / n;
    report.log10_mean_ratio = report.mean_ratio > 0.0
                                  ? std::log10(report.mean_ratio)
                                  : -std::numeric_limits<double>::infinity();
    return report;
}

AlignmentReport crop_consistency(const Predictor& model, const Image& image, int n_crops,
                                 const AugConfig& strong_cfg, Rng& rng) {
    if (n_crops < 2) throw std::invalid_argument("crop_consistency: n_crops must be >= 2");
    const std::vector<ProbVector> preds =
        collect_predictions(model, image, n_crops, strong_cfg, rng);
    AlignmentReport report;
    double js_sum = 0.0;
    double cos_sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t j = i + 1; j < preds.size(); ++j) {
            js_sum += js_divergence(preds[i], preds[j]);
            cos_sum += cosine_sim(preds[i].values(), preds[j].values());
            ++pairs;
        }
    }
    report.mean_js = js_sum / pairs;
    report.mean_cosine = cos_sum / pairs;
    report.sample_count = pairs;
    return report;
}

AlignmentReport prediction_alignment(const TinyNetParams& model, const TinyNetParams& reference,
                                     const std::vector<LabeledImage>& test_images, int out_side) {
    if (test_images.empty()) {
        throw std::invalid_argument("prediction_alignment: empty test set");
    }
    if (model.input_dim() != reference.input_dim() ||
        model.num_classes() != reference.num_classes()) {
        throw std::invalid_argument("prediction_alignment: model shapes differ");
    }
    if (out_side < 1 || out_side * out_side != static_cast<int>(model.input_dim())) {
        throw std::invalid_argument("prediction_alignment: out_side does not match model input");
    }
    AlignmentReport report;
    double js_sum = 0.0;
    double cos_sum = 0.0;
    for (const LabeledImage& li : test_images) {
        const CropSpec spec = weak_crop_spec(li.image.side, out_side);
        const std::vector<double> view = widen(apply_crop(li.image, spec));
        const ProbVector pm = softmax_temp(forward_logits(model, view), 1.0);
        const ProbVector pr = softmax_temp(forward_logits(reference, view), 1.0);
        js_sum += js_divergence(pm, pr);
        cos_sum += cosine_sim(pm.values(), pr.values());
    }
    const double n = static_cast<double>(test_images.size());
    report.mean_js = js_sum / n;
    report.mean_cosine = cos_sum / n;
    report.sample_count = static_cast<int>(test_images.size());
    return report;
}

std::vector<Lemma1Point> lemma1_empirics(const Predictor& model, const Image& image,
                                         const std::vector<int>& s_list, int trials,
                                         const AugConfig& strong_cfg, Rng& rng,
                                         int n_reference) {
    if (s_list.empty()) throw std::invalid_argument("lemma1_empirics: empty s list");
    if (trials < 1) throw std::invalid_argument("lemma1_empirics: trials must be >= 1");
    if (n_reference < 2) throw std::invalid_argument("lemma1_empirics: n_reference must be >= 2");
    for (int s : s_list) {
        if (s < 1) throw std::invalid_argument("lemma1_empirics: s values must be >= 1");
    }

    const std::vector<ProbVector> ref =
        collect_predictions(model, image, n_reference, strong_cfg, rng);
    const std::size_t dim = ref.front().size();
    std::vector<double> p_bar(dim, 0.0);
    for (const ProbVector& p : ref) {
        for (std::size_t c = 0; c < dim; ++c) p_bar[c] += p[c];
    }
    for (double& v : p_bar) v /= static_cast<double>(n_reference);
    const double trace = cov_trace(ref);

    std::vector<Lemma1Point> table;
    table.reserve(s_list.size());
    std::vector<double> mean_s(dim, 0.0);
    for (int s : s_list) {
        double acc = 0.0;
        for (int t = 0; t < trials; ++t) {
            std::fill(mean_s.begin(), mean_s.end(), 0.0);
            for (int k = 0; k < s; ++k) {
                const ProbVector p = model(render_view(image, strong_cfg, rng));
                for (std::size_t c = 0; c < dim; ++c) mean_s[c] += p[c];
            }
            double sq = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = mean_s[c] / s - p_bar[c];
                sq += d * d;
            }
            acc += sq;
        }
        Lemma1Point point;
        point.s = s;
        point.empirical = acc / trials;
        point.predicted = trace / s;
        table.push_back(point);
    }
    return table;
}

}  // namespace hald
