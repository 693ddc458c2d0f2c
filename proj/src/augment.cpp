#include "hald/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hald {

std::vector<float> apply_crop(const Image& image, const CropSpec& spec) {
    int side = image.side;
    if (spec.w < 1 || spec.h < 1)
        throw std::invalid_argument("apply_crop: degenerate rect");
    if (spec.out_side < 1)
        throw std::invalid_argument("apply_crop: out_side must be positive");
    if (spec.x0 + spec.w > side || spec.y0 + spec.h > side)
        throw std::invalid_argument("apply_crop: rect outside image bounds");

    int out = spec.out_side;
    std::vector<float> dst(static_cast<std::size_t>(out) * static_cast<std::size_t>(out));
    double sy_scale = static_cast<double>(spec.h) / out;
    double sx_scale = static_cast<double>(spec.w) / out;
    double y_lo = spec.y0, y_hi = spec.y0 + spec.h - 1.0;
    double x_lo = spec.x0, x_hi = spec.x0 + spec.w - 1.0;

    for (int oy = 0; oy < out; ++oy) {
        double sy = spec.y0 + (oy + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, y_lo, y_hi);
        int iy = static_cast<int>(sy);
        if (iy >= spec.y0 + spec.h - 1) iy = spec.y0 + spec.h - 1;
        double fy = sy - iy;
        int iy1 = std::min(iy + 1, spec.y0 + spec.h - 1);
        for (int ox = 0; ox < out; ++ox) {
            double sx = spec.x0 + (ox + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, x_lo, x_hi);
            int ix = static_cast<int>(sx);
            if (ix >= spec.x0 + spec.w - 1) ix = spec.x0 + spec.w - 1;
            double fx = sx - ix;
            int ix1 = std::min(ix + 1, spec.x0 + spec.w - 1);

            double v00 = image.at(iy, ix), v01 = image.at(iy, ix1);
            double v10 = image.at(iy1, ix), v11 = image.at(iy1, ix1);
            double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                       fy * ((1.0 - fx) * v10 + fx * v11);
            dst[static_cast<std::size_t>(oy) * out + ox] = static_cast<float>(v);
        }
    }
    return dst;
}

CropSpec weak_crop_spec(int image_side, int out_side) {
    if (image_side < 1) throw std::invalid_argument("weak_crop_spec: bad image side");
    if (out_side < 1) throw std::invalid_argument("weak_crop_spec: bad out_side");
    int crop = std::max(1, static_cast<int>(std::floor(0.875 * image_side)));
    int off = (image_side - crop) / 2;
    CropSpec spec;
    spec.x0 = static_cast<std::uint16_t>(off);
    spec.y0 = static_cast<std::uint16_t>(off);
    spec.w = static_cast<std::uint16_t>(crop);
    spec.h = static_cast<std::uint16_t>(crop);
    spec.out_side = static_cast<std::uint16_t>(out_side);
    return spec;
}

std::pair<CropSpec, std::vector<float>> sample_crop(const Image& image,
                                                    const AugConfig& cfg, Rng& rng) {
    int side = image.side;
    if (side < 1) throw std::invalid_argument("sample_crop: empty image");
    if (cfg.out_side < 1) throw std::invalid_argument("sample_crop: out_side must be positive");

    if (cfg.kind == ViewKind::weak) {
        CropSpec spec = weak_crop_spec(side, cfg.out_side);
        return {spec, apply_crop(image, spec)};
    }

    if (!(cfg.scale_lo > 0.0) || cfg.scale_lo > cfg.scale_hi || cfg.scale_hi > 1.0)
        throw std::invalid_argument("sample_crop: bad scale range");
    if (!(cfg.aspect_lo > 0.0) || cfg.aspect_lo > cfg.aspect_hi)
        throw std::invalid_argument("sample_crop: bad aspect range");

    double area_full = static_cast<double>(side) * side;
    for (int attempt = 0; attempt < 10; ++attempt) {
        double frac = rng.uniform(cfg.scale_lo, cfg.scale_hi);
        double aspect = std::exp(rng.uniform(std::log(cfg.aspect_lo), std::log(cfg.aspect_hi)));
        double target = frac * area_full;
        int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
        int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
        if (w < 1 || h < 1 || w > side || h > side) continue;
        CropSpec spec;
        spec.x0 = static_cast<std::uint16_t>(rng.uniform_int(0, side - w));
        spec.y0 = static_cast<std::uint16_t>(rng.uniform_int(0, side - h));
        spec.w = static_cast<std::uint16_t>(w);
        spec.h = static_cast<std::uint16_t>(h);
        spec.out_side = static_cast<std::uint16_t>(cfg.out_side);
        return {spec, apply_crop(image, spec)};
    }

    // All proposals rejected (possible only under extreme aspect ranges):
    // deterministic centered square at the mean requested area.
    double mean_frac = 0.5 * (cfg.scale_lo + cfg.scale_hi);
    int crop = std::clamp(static_cast<int>(std::lround(side * std::sqrt(mean_frac))), 1, side);
    int off = (side - crop) / 2;
    CropSpec spec;
    spec.x0 = static_cast<std::uint16_t>(off);
    spec.y0 = static_cast<std::uint16_t>(off);
    spec.w = static_cast<std::uint16_t>(crop);
    spec.h = static_cast<std::uint16_t>(crop);
    spec.out_side = static_cast<std::uint16_t>(cfg.out_side);
    return {spec, apply_crop(image, spec)};
}

std::vector<float> apply_cutmix_box(const std::vector<float>& a, const std::vector<float>& b,
                                    int side, const CutMixBox& box) {
    std::size_t n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    if (a.size() != n || b.size() != n)
        throw std::invalid_argument("apply_cutmix_box: size mismatch");
    if (box.x0 < 0 || box.y0 < 0 || box.w < 0 || box.h < 0 ||
        box.x0 + box.w > side || box.y0 + box.h > side)
        throw std::invalid_argument("apply_cutmix_box: box outside image");
    std::vector<float> out = a;
    for (int y = box.y0; y < box.y0 + box.h; ++y)
        for (int x = box.x0; x < box.x0 + box.w; ++x)
            out[static_cast<std::size_t>(y) * side + x] = b[static_cast<std::size_t>(y) * side + x];
    return out;
}

std::pair<std::vector<float>, CutMixDraw> cutmix_images(const std::vector<float>& a,
                                                        const std::vector<float>& b, int side,
                                                        double beta, Rng& rng) {
    if (side < 1) throw std::invalid_argument("cutmix_images: bad side");
    if (!(beta > 0.0)) throw std::invalid_argument("cutmix_images: beta must be positive");

    CutMixDraw draw;
    draw.lam_raw = rng.beta(beta, beta);
    double cut = std::sqrt(draw.lam_raw);
    int bw = static_cast<int>(std::lround(side * cut));
    int bh = bw;
    int cx = static_cast<int>(rng.uniform_int(0, side - 1));
    int cy = static_cast<int>(rng.uniform_int(0, side - 1));

    int x0 = std::clamp(cx - bw / 2, 0, side);
    int x1 = std::clamp(cx - bw / 2 + bw, 0, side);
    int y0 = std::clamp(cy - bh / 2, 0, side);
    int y1 = std::clamp(cy - bh / 2 + bh, 0, side);
    draw.box = CutMixBox{x0, y0, x1 - x0, y1 - y0};
    draw.lam_effective = static_cast<double>(draw.box.w) * draw.box.h /
                         (static_cast<double>(side) * side);
    return {apply_cutmix_box(a, b, side, draw.box), draw};
}

}  // namespace hald
