#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "hald/image.hpp"
#include "hald/tinynet.hpp"

namespace hald {

/// Glyph-corpus recipe.  Each image carries one primary glyph (full
/// intensity) and `distractor_count` glyphs of other classes at reduced
/// intensity; distractor_count is the drift knob: more distractors mean
/// more local views whose dominant content disagrees with the image label.
struct SynthConfig {
    int num_classes = 10;
    int image_side = 32;
    int glyph_side = 12;
    int train_per_class = 100;
    int test_per_class = 20;
    int distractor_count = 2;
    double noise_std = 0.05;
    std::uint64_t seed = 0;
};

struct LabeledImage {
    Image image;
    int label = 0;
    // Primary glyph placement, kept so diagnostics can reason about which
    // crops actually contain the labeled content.
    int box_x = 0;
    int box_y = 0;
    int box_side = 0;
};

struct Dataset {
    SynthConfig config;
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;
};

/// Binary 0/1 glyph mask for a class.  Patterns are pseudo-random at a
/// fixed internal seed (class identity is the only input), built on a
/// 2x2-block lattice so they survive moderate downsampling, and identical
/// across runs and platforms.
std::vector<float> glyph_pattern(int cls, int glyph_side);

/// Deterministic corpus generation.  Primary glyph at intensity 1.0,
/// distractors at 0.7, overlapping strokes resolved by max-blend, then
/// clipped additive Gaussian pixel noise.  Splits are exactly
/// class-balanced.  Throws std::invalid_argument on infeasible configs
/// (e.g. distractors that cannot avoid fully overlapping placements).
Dataset gen_dataset(const SynthConfig& cfg);

/// Full-image bilinear resize to a square side (the teacher's input view).
std::vector<float> resize_full(const Image& image, int out_side);

struct TeacherConfig {
    int input_side = 16;  ///< full images are resized to this before the net
    int epochs = 60;
    int batch = 16;
    double lr = 1e-3;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
};

struct TeacherResult {
    TinyNetParams params;
    double train_accuracy = 0.0;
};

/// Supervised teacher training on full resized images with plain (alpha=0)
/// cross-entropy and AdamW, shuffled each epoch.  Deterministic in
/// cfg.seed.  epochs = 0 returns the untouched initialization.  Throws
/// std::runtime_error if the loss goes non-finite.
TeacherResult train_teacher(const std::vector<LabeledImage>& train,
                            const std::vector<int>& hidden_sizes, const TeacherConfig& cfg,
                            int num_classes);

/// Fraction of images whose resized full view is classified correctly.
double full_image_accuracy(const TinyNetParams& params,
                           const std::vector<LabeledImage>& images, int input_side);

/// One split per file (magic "SYND"): header with class count, image side,
/// and balanced per-class counts, then per image the label, the primary
/// glyph box, and raw f32 pixels.
void save_images(const std::filesystem::path& path, const std::vector<LabeledImage>& images,
                 int num_classes, int image_side);

struct LoadedSplit {
    std::vector<LabeledImage> images;
    int num_classes = 0;
    int image_side = 0;
};

LoadedSplit load_images(const std::filesystem::path& path);

}  // namespace hald
