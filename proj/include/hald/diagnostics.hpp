#pragma once

#include <functional>
#include <vector>

#include "hald/augment.hpp"
#include "hald/image.hpp"
#include "hald/simplex.hpp"
#include "hald/synthdata.hpp"
#include "hald/tinynet.hpp"

namespace hald {

/// Anything that maps view pixels to a probability vector.  Keeping the
/// measurement suite behind this signature lets tests plug in synthetic
/// predictors with known covariance.
using Predictor = std::function<ProbVector(const std::vector<float>&)>;

/// Wraps a network as a Predictor: softmax of its logits at `tau`.
Predictor net_predictor(const TinyNetParams& params, double tau = 1.0);

/// Unbiased sample-covariance trace of a set of probability vectors.
double cov_trace(const std::vector<ProbVector>& points);

/// Trace of the prediction covariance over n_crops views of one image
/// drawn under cfg.  n_crops must be at least 2.
double pred_cov_trace(const Predictor& model, const Image& image, int n_crops,
                      const AugConfig& cfg, Rng& rng);

/// Drift ratio R = trace_strong / (trace_weak + epsilon).
double lvsd_ratio(const Predictor& model, const Image& image, int n_crops,
                  const AugConfig& weak_cfg, const AugConfig& strong_cfg, double epsilon,
                  Rng& rng);

struct LvsdImageStat {
    double trace_weak = 0.0;
    double trace_strong = 0.0;
    double ratio = 0.0;
};

struct LvsdReport {
    std::vector<LvsdImageStat> per_image;
    double mean_trace_weak = 0.0;
    double mean_trace_strong = 0.0;
    double mean_ratio = 0.0;
    double log10_mean_ratio = 0.0;  ///< -inf when every ratio is zero
    double frac_ratio_above_one = 0.0;
    int n_crops = 0;
    double epsilon = 0.0;
};

/// Per-image drift statistics plus their aggregates.
LvsdReport lvsd_report(const Predictor& model, const std::vector<LabeledImage>& images,
                       int n_crops, const AugConfig& weak_cfg, const AugConfig& strong_cfg,
                       double epsilon, Rng& rng);

struct AlignmentReport {
    double mean_js = 0.0;
    double mean_cosine = 1.0;
    int sample_count = 0;  ///< pairs (consistency) or images (alignment)
};

/// Mean pairwise JS divergence and cosine among predictions on n_crops
/// strong views of one image.  n_crops must be at least 2.
AlignmentReport crop_consistency(const Predictor& model, const Image& image, int n_crops,
                                 const AugConfig& strong_cfg, Rng& rng);

/// Compares two models' weak-view predictions on a test set; JS is
/// symmetric in the two models.
AlignmentReport prediction_alignment(const TinyNetParams& model, const TinyNetParams& reference,
                                     const std::vector<LabeledImage>& test_images, int out_side);

struct Lemma1Point {
    int s = 0;
    double empirical = 0.0;  ///< mean over trials of ||mean of s predictions - p_bar||^2
    double predicted = 0.0;  ///< Tr(Sigma_hat) / s
};

/// Measures how the squared deviation of an s-crop mean prediction decays
/// with s.  The reference mean and covariance trace come from
/// n_reference crops; each table row averages `trials` fresh s-crop means.
std::vector<Lemma1Point> lemma1_empirics(const Predictor& model, const Image& image,
                                         const std::vector<int>& s_list, int trials,
                                         const AugConfig& strong_cfg, Rng& rng,
                                         int n_reference = 10000);

}  // namespace hald
