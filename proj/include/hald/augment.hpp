#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hald/image.hpp"
#include "hald/rng.hpp"

namespace hald {

/// Crop rectangle plus its resample target, exactly the five u16 fields
/// stored on disk.  (x0, y0) is the top-left corner; h and w are the rect
/// dimensions in source pixels; out_side is the resampled square size.
struct CropSpec {
    std::uint16_t x0 = 0;
    std::uint16_t y0 = 0;
    std::uint16_t h = 0;
    std::uint16_t w = 0;
    std::uint16_t out_side = 0;

    bool operator==(const CropSpec&) const = default;
};

enum class ViewKind {
    strong,  ///< random resized crop: area and aspect jitter
    weak,    ///< deterministic center crop at 87.5% of the side
};

/// View-sampling policy.  scale bounds are area fractions of the full
/// image, aspect bounds are width/height ratios (sampled log-uniformly).
struct AugConfig {
    ViewKind kind = ViewKind::strong;
    double scale_lo = 0.08;
    double scale_hi = 0.6;
    double aspect_lo = 3.0 / 4.0;
    double aspect_hi = 4.0 / 3.0;
    int out_side = 16;

    static AugConfig strong_view(int out_side) {
        AugConfig cfg;
        cfg.kind = ViewKind::strong;
        cfg.out_side = out_side;
        return cfg;
    }
    static AugConfig weak_view(int out_side) {
        AugConfig cfg;
        cfg.kind = ViewKind::weak;
        cfg.out_side = out_side;
        return cfg;
    }
};

/// Bilinear resample of the crop rect onto an out_side square
/// (align_corners = false convention; samples clamped to the rect).
/// Output values are convex combinations of input values, so they stay
/// inside the input range.  Throws std::invalid_argument when the rect
/// falls outside the image or out_side < 1.
std::vector<float> apply_crop(const Image& image, const CropSpec& spec);

/// Draws a view of `image` under `cfg` and materializes its pixels.
///
/// strong: up to 10 proposals of (area fraction, log-uniform aspect); a
/// proposal is accepted when both rect sides fit.  Draw order per attempt
/// is area fraction, aspect, then x0 and y0.  After 10 rejections the
/// view falls back to a deterministic centered square whose side is
/// round(S * sqrt(mean scale)).
///
/// weak: centered square of side floor(0.875 * S); consumes no randomness,
/// so repeated calls on one image yield identical pixels.
std::pair<CropSpec, std::vector<float>> sample_crop(const Image& image,
                                                    const AugConfig& cfg, Rng& rng);

/// The weak-view rectangle by itself (e.g. for evaluating a model the way
/// the trainer does).
CropSpec weak_crop_spec(int image_side, int out_side);

struct CutMixBox {
    int x0 = 0, y0 = 0, w = 0, h = 0;
};

struct CutMixDraw {
    double lam_raw = 0.0;        ///< Beta(beta, beta) draw requesting the area
    double lam_effective = 0.0;  ///< realized box area fraction after clipping
    CutMixBox box;
};

/// Pastes the box region of `b` over `a`.  Inputs must share a side.
std::vector<float> apply_cutmix_box(const std::vector<float>& a, const std::vector<float>& b,
                                    int side, const CutMixBox& box);

/// CutMix: draws lam_raw ~ Beta(beta, beta), places a square box of that
/// area fraction at a uniform center, clips it at the borders, and pastes
/// b over a inside the box.  lam_effective is recomputed from the clipped
/// box, so the returned draw always reports the realized mixing weight.
/// Draw order: lam_raw, center x, center y.
std::pair<std::vector<float>, CutMixDraw> cutmix_images(const std::vector<float>& a,
                                                        const std::vector<float>& b, int side,
                                                        double beta, Rng& rng);

}  // namespace hald
