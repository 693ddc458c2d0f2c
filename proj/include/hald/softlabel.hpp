#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hald/augment.hpp"
#include "hald/simplex.hpp"
#include "hald/synthdata.hpp"
#include "hald/tinynet.hpp"

namespace hald {

/// One stored supervision record: which image, which view of it, and the
/// teacher's tempered prediction for that view.
struct PoolEntry {
    std::uint32_t image_id = 0;
    CropSpec crop;
    ProbVector label;
};

/// A storage-budgeted soft-label pool.  Entries are grouped per image
/// (samples_per_image each); `bits` is the stored scalar width.  In memory
/// the labels are full precision; quantization happens on save, and load
/// renormalizes what it reads back onto the simplex.
struct SoftLabelPool {
    int num_classes = 0;
    std::uint32_t num_images = 0;
    std::uint16_t samples_per_image = 0;
    std::uint8_t bits = 16;
    float tau = 1.0f;
    std::uint64_t seed = 0;
    std::vector<PoolEntry> entries;
};

/// Soft-label count per class: images-per-class times stored views per
/// image.
std::uint64_t slc_from(std::uint64_t images_per_class, std::uint64_t samples_per_image);

/// Total bytes needed to store `slc` soft labels for each of `num_classes`
/// classes, each label a C-vector of `bits`-wide scalars:
/// num_classes * slc * num_classes * bits / 8.  bits must be 16, 32, or 64.
std::uint64_t budget_bytes(std::uint64_t slc, int num_classes, int bits);

/// Bytes the label payload of this pool occupies on disk (excluding ids,
/// crop records, and the header).
std::uint64_t pool_payload_bytes(const SoftLabelPool& pool);

/// Builds the pool: for each image in id order, draws samples_per_image
/// strong views and stores the teacher's softmax(logits / tau) for each.
/// The teacher is only consulted here; training code never sees it.
SoftLabelPool generate_pool(const TinyNetParams& teacher,
                            const std::vector<LabeledImage>& images, int samples_per_image,
                            const AugConfig& strong_cfg, double tau, std::uint64_t seed);

/// SLBL file round trip.  Labels are quantized to pool.bits on write; a
/// CRC32 over the entry block detects corruption.  load_pool distinguishes
/// corrupt headers, truncated payloads, and checksum mismatches via
/// IoError::kind.
void save_pool(const std::filesystem::path& path, const SoftLabelPool& pool);
SoftLabelPool load_pool(const std::filesystem::path& path);

/// Assembled minibatch of rematerialized crop pixels and their stored
/// labels, laid out for backward().
struct PoolBatch {
    int input_dim = 0;
    std::vector<double> inputs;
    std::vector<ProbVector> targets;
    std::vector<std::size_t> entry_indices;
};

/// Rematerializes specific entries against their source images.
PoolBatch pool_entry_batch(const SoftLabelPool& pool, const std::vector<LabeledImage>& images,
                           const std::vector<std::size_t>& indices);

/// Uniform-with-replacement minibatch of `batch_size` entries.
PoolBatch sample_batch(const SoftLabelPool& pool, const std::vector<LabeledImage>& images,
                       Rng& rng, int batch_size);

}  // namespace hald
