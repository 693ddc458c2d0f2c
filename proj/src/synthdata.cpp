#include "hald/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hald/augment.hpp"
#include "hald/binio.hpp"
#include "hald/rng.hpp"

namespace hald {

namespace {

constexpr float kDistractorIntensity = 0.7f;
constexpr std::uint64_t kGlyphSeed = 0;          // glyph identity is global, never configured
constexpr std::uint64_t kGlyphStreamBase = 1000;  // one rng stream per class
constexpr std::uint64_t kGenStream = 0x53594e44;  // "SYND"

void validate(const SynthConfig& cfg) {
    if (cfg.num_classes < 2) throw std::invalid_argument("gen_dataset: need at least two classes");
    if (cfg.image_side < 1) throw std::invalid_argument("gen_dataset: bad image side");
    if (cfg.glyph_side < 1 || cfg.glyph_side > cfg.image_side)
        throw std::invalid_argument("gen_dataset: glyph must fit inside the image");
    if (cfg.train_per_class < 1) throw std::invalid_argument("gen_dataset: empty train split");
    if (cfg.test_per_class < 0) throw std::invalid_argument("gen_dataset: negative test count");
    if (cfg.distractor_count < 0) throw std::invalid_argument("gen_dataset: negative distractor count");
    if (cfg.noise_std < 0.0) throw std::invalid_argument("gen_dataset: negative noise std");
}

void paint_glyph(Image& img, const std::vector<float>& glyph, int glyph_side, int x0, int y0,
                 float intensity) {
    for (int y = 0; y < glyph_side; ++y)
        for (int x = 0; x < glyph_side; ++x) {
            float v = glyph[static_cast<std::size_t>(y) * glyph_side + x] * intensity;
            float& px = img.at(y0 + y, x0 + x);
            px = std::max(px, v);  // overlapping strokes keep the brighter one
        }
}

LabeledImage make_image(const SynthConfig& cfg, int cls,
                        const std::vector<std::vector<float>>& glyphs, Rng& rng) {
    int span = cfg.image_side - cfg.glyph_side;  // inclusive placement range
    // Placements snap to a glyph-sized lattice: a small set of recurring,
    // non-overlapping sites keeps the full-image task learnable by a dense
    // net from a few hundred examples, while crops stay free to land
    // anywhere between sites.
    int step = std::max(1, cfg.glyph_side);
    int sites = span / step + 1;
    LabeledImage out;
    out.label = cls;
    out.image = Image::zeros(cfg.image_side);

    int px = step * static_cast<int>(rng.uniform_int(0, sites - 1));
    int py = step * static_cast<int>(rng.uniform_int(0, sites - 1));
    out.box_x = px;
    out.box_y = py;
    out.box_side = cfg.glyph_side;

    struct Pos {
        int x, y;
    };
    std::vector<Pos> taken{{px, py}};
    std::vector<std::pair<int, Pos>> distractors;
    for (int k = 0; k < cfg.distractor_count; ++k) {
        int other = static_cast<int>(rng.uniform_int(0, cfg.num_classes - 2));
        if (other >= cls) ++other;  // uniform over classes != cls

        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            Pos p{step * static_cast<int>(rng.uniform_int(0, sites - 1)),
                  step * static_cast<int>(rng.uniform_int(0, sites - 1))};
            bool clash = false;
            for (const Pos& t : taken)
                if (std::abs(t.x - p.x) < cfg.glyph_side && std::abs(t.y - p.y) < cfg.glyph_side) {
                    clash = true;  // boxes would overlap; keep glyphs cleanly separated
                    break;
                }
            if (!clash) {
                taken.push_back(p);
                distractors.emplace_back(other, p);
                placed = true;
            }
        }
        if (!placed)
            throw std::invalid_argument(
                "gen_dataset: cannot place a distractor without full overlap");
    }

    paint_glyph(out.image, glyphs[static_cast<std::size_t>(cls)], cfg.glyph_side, px, py, 1.0f);
    for (const auto& [other, p] : distractors)
        paint_glyph(out.image, glyphs[static_cast<std::size_t>(other)], cfg.glyph_side, p.x, p.y,
                    kDistractorIntensity);

    if (cfg.noise_std > 0.0) {
        for (float& v : out.image.pixels) {
            v += static_cast<float>(cfg.noise_std * rng.gaussian());
            v = std::clamp(v, 0.0f, 1.0f);
        }
    }
    return out;
}

std::vector<LabeledImage> make_split(const SynthConfig& cfg, int per_class,
                                     const std::vector<std::vector<float>>& glyphs, Rng& rng) {
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(per_class) * cfg.num_classes);
    for (int cls = 0; cls < cfg.num_classes; ++cls)
        for (int i = 0; i < per_class; ++i) out.push_back(make_image(cfg, cls, glyphs, rng));
    return out;
}

}  // namespace

std::vector<float> glyph_pattern(int cls, int glyph_side) {
    if (cls < 0) throw std::invalid_argument("glyph_pattern: negative class");
    if (glyph_side < 1) throw std::invalid_argument("glyph_pattern: bad glyph side");

    // Bits live on a coarse lattice; each bit controls a square block of at
    // least 2 pixels so the pattern keeps contrast after the 2x downsampling
    // the full-image view applies.  The on-bit count grows with the class
    // index: ink density is robust to crop-and-resize warping, so any view
    // that contains the primary glyph carries class signal, while views that
    // miss it (or land on a dimmed distractor) genuinely drift.
    const int block = std::max(2, glyph_side / 4);
    const int grid = (glyph_side + block - 1) / block;
    const int cells = grid * grid;
    const int on = cells > 1 ? 1 + cls % (cells - 1) : 1;

    std::vector<int> order(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(kGlyphSeed, kGlyphStreamBase + static_cast<std::uint64_t>(cls));
    for (int i = cells; i > 1; --i) {
        int j = static_cast<int>(rng.uniform_int(0, i - 1));
        std::swap(order[static_cast<std::size_t>(i - 1)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<float> bits(static_cast<std::size_t>(cells), 0.0f);
    for (int k = 0; k < on; ++k) bits[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1.0f;

    std::vector<float> glyph(static_cast<std::size_t>(glyph_side) * glyph_side);
    for (int y = 0; y < glyph_side; ++y)
        for (int x = 0; x < glyph_side; ++x)
            glyph[static_cast<std::size_t>(y) * glyph_side + x] =
                bits[static_cast<std::size_t>(y / block) * grid + x / block];
    return glyph;
}

Dataset gen_dataset(const SynthConfig& cfg) {
    validate(cfg);
    std::vector<std::vector<float>> glyphs;
    glyphs.reserve(static_cast<std::size_t>(cfg.num_classes));
    for (int c = 0; c < cfg.num_classes; ++c) glyphs.push_back(glyph_pattern(c, cfg.glyph_side));

    Rng rng(cfg.seed, kGenStream);
    Dataset ds;
    ds.config = cfg;
    ds.train = make_split(cfg, cfg.train_per_class, glyphs, rng);
    ds.test = make_split(cfg, cfg.test_per_class, glyphs, rng);
    return ds;
}

std::vector<float> resize_full(const Image& image, int out_side) {
    CropSpec spec;
    spec.x0 = 0;
    spec.y0 = 0;
    spec.w = static_cast<std::uint16_t>(image.side);
    spec.h = static_cast<std::uint16_t>(image.side);
    spec.out_side = static_cast<std::uint16_t>(out_side);
    return apply_crop(image, spec);
}

TeacherResult train_teacher(const std::vector<LabeledImage>& train,
                            const std::vector<int>& hidden_sizes, const TeacherConfig& cfg,
                            int num_classes) {
    if (train.empty()) throw std::invalid_argument("train_teacher: empty training set");
    if (cfg.input_side < 1) throw std::invalid_argument("train_teacher: bad input side");
    if (cfg.epochs < 0) throw std::invalid_argument("train_teacher: negative epoch count");
    if (cfg.batch < 1) throw std::invalid_argument("train_teacher: bad batch size");

    int input_dim = cfg.input_side * cfg.input_side;
    std::vector<int> sizes;
    sizes.push_back(input_dim);
    for (int h : hidden_sizes) sizes.push_back(h);
    sizes.push_back(num_classes);

    // Resize once up front; the teacher always sees the same inputs.
    std::size_t n = train.size();
    std::vector<double> inputs(n * static_cast<std::size_t>(input_dim));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> view = resize_full(train[i].image, cfg.input_side);
        for (int j = 0; j < input_dim; ++j)
            inputs[i * static_cast<std::size_t>(input_dim) + j] = view[static_cast<std::size_t>(j)];
        labels[i] = train[i].label;
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw std::invalid_argument("train_teacher: label out of range");
    }

    TeacherResult res;
    res.params = init_net(sizes, cfg.seed);
    OptimizerState opt;
    opt.kind = OptKind::adamw;
    opt.lr = cfg.lr;
    opt.weight_decay = cfg.weight_decay;

    Rng shuffle_rng(cfg.seed, /*stream=*/0x54534846ULL);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(
                shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch)) {
            std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch));
            Batch batch;
            batch.input_dim = input_dim;
            batch.alpha = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                std::size_t src = order[i];
                const double* row = inputs.data() + src * static_cast<std::size_t>(input_dim);
                batch.inputs.insert(batch.inputs.end(), row, row + input_dim);
                batch.labels.push_back(labels[src]);
            }
            BackwardResult bw = backward(res.params, batch, TargetKind::hard_smoothed, 1.0);
            if (!std::isfinite(bw.loss))
                throw std::runtime_error("train_teacher: loss diverged at epoch " +
                                         std::to_string(epoch));
            opt_step(res.params, bw.grads, opt);
        }
    }

    res.train_accuracy = full_image_accuracy(res.params, train, cfg.input_side);
    return res;
}

double full_image_accuracy(const TinyNetParams& params,
                           const std::vector<LabeledImage>& images, int input_side) {
    if (images.empty()) throw std::invalid_argument("full_image_accuracy: empty image set");
    int input_dim = input_side * input_side;
    if (params.input_dim() != input_dim)
        throw std::invalid_argument("full_image_accuracy: net input does not match view size");
    int hits = 0;
    std::vector<double> x(static_cast<std::size_t>(input_dim));
    for (const LabeledImage& li : images) {
        std::vector<float> view = resize_full(li.image, input_side);
        for (int j = 0; j < input_dim; ++j) x[static_cast<std::size_t>(j)] = view[static_cast<std::size_t>(j)];
        if (predict_class(params, x) == li.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(images.size());
}

void save_images(const std::filesystem::path& path, const std::vector<LabeledImage>& images,
                 int num_classes, int image_side) {
    if (images.empty()) throw std::invalid_argument("save_images: empty split");
    if (images.size() % static_cast<std::size_t>(num_classes) != 0)
        throw std::invalid_argument("save_images: split is not class-balanced");

    BufWriter w;
    w.put_magic("SYND");
    w.put_u16(1);  // format version
    w.put_u32(static_cast<std::uint32_t>(num_classes));
    w.put_u16(static_cast<std::uint16_t>(image_side));
    w.put_u32(static_cast<std::uint32_t>(images.size()));
    w.put_u32(static_cast<std::uint32_t>(images.size() / static_cast<std::size_t>(num_classes)));
    for (const LabeledImage& li : images) {
        if (li.image.side != image_side)
            throw std::invalid_argument("save_images: inconsistent image side");
        if (li.label < 0 || li.label >= num_classes)
            throw std::invalid_argument("save_images: label out of range");
        w.put_u16(static_cast<std::uint16_t>(li.label));
        w.put_u16(static_cast<std::uint16_t>(li.box_x));
        w.put_u16(static_cast<std::uint16_t>(li.box_y));
        w.put_u16(static_cast<std::uint16_t>(li.box_side));
        for (float v : li.image.pixels) w.put_f32(v);
    }
    write_file(path, w.bytes());
}

LoadedSplit load_images(const std::filesystem::path& path) {
    std::vector<std::uint8_t> data = read_file(path);
    BufReader r(data);
    r.expect_magic("SYND", "dataset");
    if (r.get_u16() != 1) throw IoError(IoErrorKind::corrupt_header, "dataset: unsupported version");

    LoadedSplit split;
    split.num_classes = static_cast<int>(r.get_u32());
    split.image_side = static_cast<int>(r.get_u16());
    std::uint32_t count = r.get_u32();
    std::uint32_t per_class = r.get_u32();
    if (split.num_classes < 1 || split.image_side < 1)
        throw IoError(IoErrorKind::bad_value, "dataset: implausible header fields");
    if (static_cast<std::uint64_t>(per_class) * static_cast<std::uint32_t>(split.num_classes) != count)
        throw IoError(IoErrorKind::bad_value, "dataset: counts are not class-balanced");

    std::size_t npix = static_cast<std::size_t>(split.image_side) * split.image_side;
    split.images.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        LabeledImage& li = split.images[i];
        li.label = r.get_u16();
        li.box_x = r.get_u16();
        li.box_y = r.get_u16();
        li.box_side = r.get_u16();
        if (li.label >= split.num_classes)
            throw IoError(IoErrorKind::bad_value, "dataset: label out of range");
        li.image.side = split.image_side;
        li.image.pixels.resize(npix);
        for (float& v : li.image.pixels) v = r.get_f32();
    }
    return split;
}

}  // namespace hald
