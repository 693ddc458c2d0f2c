#include "hald/softlabel.hpp"

#include <zlib.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "hald/binio.hpp"

namespace hald {

namespace {

constexpr std::uint64_t kPoolStream = 0x534c424cULL;  // "SLBL"

int scalar_bytes(int bits) {
    if (bits != 16 && bits != 32 && bits != 64)
        throw std::invalid_argument("soft label storage: bits must be 16, 32, or 64");
    return bits / 8;
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

void put_crop(BufWriter& w, const CropSpec& c) {
    w.put_u16(c.x0);
    w.put_u16(c.y0);
    w.put_u16(c.h);
    w.put_u16(c.w);
    w.put_u16(c.out_side);
}

CropSpec get_crop(BufReader& r) {
    CropSpec c;
    c.x0 = r.get_u16();
    c.y0 = r.get_u16();
    c.h = r.get_u16();
    c.w = r.get_u16();
    c.out_side = r.get_u16();
    return c;
}

}  // namespace

std::uint64_t slc_from(std::uint64_t images_per_class, std::uint64_t samples_per_image) {
    return images_per_class * samples_per_image;
}

std::uint64_t budget_bytes(std::uint64_t slc, int num_classes, int bits) {
    if (num_classes < 1) throw std::invalid_argument("budget_bytes: bad class count");
    int bytes = scalar_bytes(bits);
    return slc * static_cast<std::uint64_t>(num_classes) *
           static_cast<std::uint64_t>(num_classes) * static_cast<std::uint64_t>(bytes);
}

std::uint64_t pool_payload_bytes(const SoftLabelPool& pool) {
    return static_cast<std::uint64_t>(pool.entries.size()) *
           static_cast<std::uint64_t>(pool.num_classes) *
           static_cast<std::uint64_t>(scalar_bytes(pool.bits));
}

SoftLabelPool generate_pool(const TinyNetParams& teacher,
                            const std::vector<LabeledImage>& images, int samples_per_image,
                            const AugConfig& strong_cfg, double tau, std::uint64_t seed) {
    if (images.empty()) throw std::invalid_argument("generate_pool: no source images");
    if (samples_per_image < 1)
        throw std::invalid_argument("generate_pool: samples_per_image must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("generate_pool: tau must be positive");
    int input_dim = strong_cfg.out_side * strong_cfg.out_side;
    if (teacher.input_dim() != input_dim)
        throw std::invalid_argument("generate_pool: teacher input does not match crop size");

    SoftLabelPool pool;
    pool.num_classes = teacher.num_classes();
    pool.num_images = static_cast<std::uint32_t>(images.size());
    pool.samples_per_image = static_cast<std::uint16_t>(samples_per_image);
    pool.tau = static_cast<float>(tau);
    pool.seed = seed;
    pool.entries.reserve(images.size() * static_cast<std::size_t>(samples_per_image));

    Rng rng(seed, kPoolStream);
    std::vector<double> x(static_cast<std::size_t>(input_dim));
    for (std::uint32_t id = 0; id < images.size(); ++id) {
        for (int s = 0; s < samples_per_image; ++s) {
            auto [spec, pixels] = sample_crop(images[id].image, strong_cfg, rng);
            for (int j = 0; j < input_dim; ++j) x[static_cast<std::size_t>(j)] = pixels[static_cast<std::size_t>(j)];
            std::vector<double> logits = forward_logits(teacher, x);
            PoolEntry e;
            e.image_id = id;
            e.crop = spec;
            e.label = softmax_temp(logits, tau);
            pool.entries.push_back(std::move(e));
        }
    }
    return pool;
}

void save_pool(const std::filesystem::path& path, const SoftLabelPool& pool) {
    if (pool.entries.size() !=
        static_cast<std::size_t>(pool.num_images) * pool.samples_per_image)
        throw std::invalid_argument("save_pool: entry count does not match header");
    scalar_bytes(pool.bits);

    BufWriter body;
    for (const PoolEntry& e : pool.entries) {
        body.put_u32(e.image_id);
        put_crop(body, e.crop);
        if (e.label.size() != pool.num_classes)
            throw std::invalid_argument("save_pool: label class count mismatch");
        for (int c = 0; c < pool.num_classes; ++c) {
            double v = e.label[c];
            switch (pool.bits) {
                case 16:
                    body.put_u16(f32_to_f16(static_cast<float>(v)));
                    break;
                case 32:
                    body.put_f32(static_cast<float>(v));
                    break;
                default:
                    body.put_f64(v);
                    break;
            }
        }
    }

    BufWriter w;
    w.put_magic("SLBL");
    w.put_u16(1);  // format version
    w.put_u32(static_cast<std::uint32_t>(pool.num_classes));
    w.put_u32(pool.num_images);
    w.put_u16(pool.samples_per_image);
    w.put_u8(pool.bits);
    w.put_f32(pool.tau);
    w.put_u64(pool.seed);
    w.put_u32(crc_of(body.bytes()));
    w.put_bytes(body.bytes());
    write_file(path, w.bytes());
}

SoftLabelPool load_pool(const std::filesystem::path& path) {
    std::vector<std::uint8_t> data = read_file(path);
    BufReader r(data);
    r.expect_magic("SLBL", "soft-label pool");
    if (r.get_u16() != 1)
        throw IoError(IoErrorKind::corrupt_header, "soft-label pool: unsupported version");

    SoftLabelPool pool;
    pool.num_classes = static_cast<int>(r.get_u32());
    pool.num_images = r.get_u32();
    pool.samples_per_image = r.get_u16();
    pool.bits = r.get_u8();
    pool.tau = r.get_f32();
    pool.seed = r.get_u64();
    std::uint32_t stored_crc = r.get_u32();

    if (pool.num_classes < 1 || pool.num_images == 0 || pool.samples_per_image == 0)
        throw IoError(IoErrorKind::bad_value, "soft-label pool: implausible header fields");
    if (pool.bits != 16 && pool.bits != 32 && pool.bits != 64)
        throw IoError(IoErrorKind::bad_value, "soft-label pool: unsupported scalar width");
    if (!(pool.tau > 0.0f))
        throw IoError(IoErrorKind::bad_value, "soft-label pool: non-positive temperature");

    std::uint64_t count = static_cast<std::uint64_t>(pool.num_images) * pool.samples_per_image;
    std::uint64_t entry_bytes = 4 + 10 + static_cast<std::uint64_t>(pool.num_classes) * (pool.bits / 8);
    std::uint64_t expect = count * entry_bytes;
    if (r.remaining() < expect)
        throw IoError(IoErrorKind::truncated, "soft-label pool: payload shorter than header promises");
    if (r.remaining() > expect)
        throw IoError(IoErrorKind::bad_value, "soft-label pool: trailing bytes after payload");
    std::span<const std::uint8_t> body(data.data() + r.pos(), static_cast<std::size_t>(expect));
    if (crc_of(body) != stored_crc)
        throw IoError(IoErrorKind::bad_checksum, "soft-label pool: checksum mismatch");

    pool.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PoolEntry e;
        e.image_id = r.get_u32();
        e.crop = get_crop(r);
        std::vector<double> w(static_cast<std::size_t>(pool.num_classes));
        for (double& v : w) {
            switch (pool.bits) {
                case 16:
                    v = static_cast<double>(f16_to_f32(r.get_u16()));
                    break;
                case 32:
                    v = static_cast<double>(r.get_f32());
                    break;
                default:
                    v = r.get_f64();
                    break;
            }
            if (v < 0.0) v = 0.0;  // quantization cannot produce negatives, but stay safe
        }
        e.label = ProbVector(std::move(w));  // renormalizes onto the simplex
        pool.entries.push_back(std::move(e));
    }
    return pool;
}

PoolBatch pool_entry_batch(const SoftLabelPool& pool, const std::vector<LabeledImage>& images,
                           const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("pool_entry_batch: empty index list");
    PoolBatch batch;
    batch.entry_indices = indices;
    int out_side = 0;
    for (std::size_t idx : indices) {
        if (idx >= pool.entries.size())
            throw std::invalid_argument("pool_entry_batch: entry index out of range");
        const PoolEntry& e = pool.entries[idx];
        if (e.image_id >= images.size())
            throw std::invalid_argument("pool_entry_batch: source image id " +
                                        std::to_string(e.image_id) + " not present");
        if (out_side == 0) {
            out_side = e.crop.out_side;
            batch.input_dim = out_side * out_side;
        } else if (e.crop.out_side != out_side) {
            throw std::invalid_argument("pool_entry_batch: mixed crop output sizes");
        }
        std::vector<float> pix = apply_crop(images[e.image_id].image, e.crop);
        for (float v : pix) batch.inputs.push_back(static_cast<double>(v));
        batch.targets.push_back(e.label);
    }
    return batch;
}

PoolBatch sample_batch(const SoftLabelPool& pool, const std::vector<LabeledImage>& images,
                       Rng& rng, int batch_size) {
    if (pool.entries.empty()) throw std::invalid_argument("sample_batch: empty pool");
    if (batch_size < 1) throw std::invalid_argument("sample_batch: batch size must be positive");
    std::vector<std::size_t> indices(static_cast<std::size_t>(batch_size));
    for (std::size_t& idx : indices)
        idx = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pool.entries.size()) - 1));
    return pool_entry_batch(pool, images, indices);
}

}  // namespace hald
