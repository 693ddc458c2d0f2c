#include "hald/tinynet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hald/binio.hpp"
#include "hald/rng.hpp"

namespace hald {

namespace {

void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2)
        throw std::invalid_argument("TinyNet: need at least input and output layers");
    for (int s : sizes)
        if (s < 1) throw std::invalid_argument("TinyNet: layer sizes must be positive");
}

/// Forward pass retaining every post-ReLU activation (plus the input) for
/// the backward sweep.  acts[l] is row-major batch x sizes[l]; the returned
/// logits are acts.back() pre-softmax.
struct ForwardTrace {
    std::vector<std::vector<double>> acts;  // acts[0] = inputs, acts[L] = logits
};

ForwardTrace forward_trace(const TinyNetParams& p, std::span<const double> inputs) {
    int d = p.input_dim();
    if (d == 0 || inputs.size() % static_cast<std::size_t>(d) != 0)
        throw std::invalid_argument("forward: input length not a multiple of input_dim");
    int batch = static_cast<int>(inputs.size()) / d;

    ForwardTrace tr;
    tr.acts.resize(p.weights.size() + 1);
    tr.acts[0].assign(inputs.begin(), inputs.end());

    for (int l = 0; l < p.num_layers(); ++l) {
        int in = p.sizes[static_cast<std::size_t>(l)];
        int out = p.sizes[static_cast<std::size_t>(l) + 1];
        const double* w = p.weights[static_cast<std::size_t>(l)].data();
        const double* b = p.biases[static_cast<std::size_t>(l)].data();
        const std::vector<double>& src = tr.acts[static_cast<std::size_t>(l)];
        std::vector<double>& dst = tr.acts[static_cast<std::size_t>(l) + 1];
        dst.assign(static_cast<std::size_t>(batch) * static_cast<std::size_t>(out), 0.0);

        bool last = (l + 1 == p.num_layers());
        for (int i = 0; i < batch; ++i) {
            const double* x = src.data() + static_cast<std::size_t>(i) * in;
            double* y = dst.data() + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) {
                const double* row = w + static_cast<std::size_t>(o) * in;
                double acc = b[o];
                for (int j = 0; j < in; ++j) acc += row[j] * x[j];
                y[o] = (last || acc > 0.0) ? acc : 0.0;
            }
        }
    }
    return tr;
}

/// softmax(z / tau) for one row, written into q; returns log-partition
/// so callers can form log-probabilities without a second pass.
double row_softmax(const double* z, int n, double tau, double* q) {
    double top = z[0];
    for (int c = 1; c < n; ++c) top = std::max(top, z[c]);
    double sum = 0.0;
    for (int c = 0; c < n; ++c) {
        q[c] = std::exp((z[c] - top) / tau);
        sum += q[c];
    }
    for (int c = 0; c < n; ++c) q[c] /= sum;
    return std::log(sum) + top / tau;  // log sum_k exp(z_k / tau)
}

GradientSet zero_grads(const TinyNetParams& p) {
    GradientSet g;
    g.weights.resize(p.weights.size());
    g.biases.resize(p.biases.size());
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        g.weights[l].assign(p.weights[l].size(), 0.0);
        g.biases[l].assign(p.biases[l].size(), 0.0);
    }
    return g;
}

}  // namespace

std::size_t TinyNetParams::num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

TinyNetParams init_net(const std::vector<int>& sizes, std::uint64_t seed) {
    check_sizes(sizes);
    TinyNetParams p;
    p.sizes = sizes;
    Rng rng(seed, /*stream=*/0x494e4954ULL);  // dedicated init stream
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        int in = sizes[l], out = sizes[l + 1];
        double bound = std::sqrt(6.0 / (in + out));
        std::vector<double> w(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
        for (double& x : w) x = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
    return p;
}

std::vector<double> forward(const TinyNetParams& params, std::span<const double> inputs) {
    return forward_trace(params, inputs).acts.back();
}

std::vector<double> forward_logits(const TinyNetParams& params, std::span<const double> input) {
    if (static_cast<int>(input.size()) != params.input_dim())
        throw std::invalid_argument("forward_logits: wrong input dimension");
    return forward(params, input);
}

int predict_class(const TinyNetParams& params, std::span<const double> input) {
    std::vector<double> z = forward_logits(params, input);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

BackwardResult backward(const TinyNetParams& params, const Batch& batch,
                        TargetKind kind, double tau) {
    if (batch.input_dim != params.input_dim())
        throw std::invalid_argument("backward: batch input_dim does not match net");
    int batch_size = batch.size();
    if (batch_size == 0) throw std::invalid_argument("backward: empty batch");
    int num_classes = params.num_classes();

    if (kind == TargetKind::soft) {
        if (!(tau > 0.0)) throw std::invalid_argument("backward: tau must be positive");
        if (static_cast<int>(batch.soft_targets.size()) != batch_size)
            throw std::invalid_argument("backward: soft target count != batch size");
        for (const ProbVector& t : batch.soft_targets)
            if (t.size() != num_classes)
                throw std::invalid_argument("backward: soft target has wrong class count");
    } else {
        if (static_cast<int>(batch.labels.size()) != batch_size)
            throw std::invalid_argument("backward: label count != batch size");
        for (int y : batch.labels)
            if (y < 0 || y >= num_classes)
                throw std::invalid_argument("backward: label out of range");
        if (batch.alpha < 0.0 || batch.alpha > 1.0)
            throw std::invalid_argument("backward: alpha outside [0, 1]");
        if (!batch.labels_b.empty()) {
            if (batch.labels_b.size() != batch.labels.size() ||
                batch.lams.size() != batch.labels.size())
                throw std::invalid_argument("backward: cutmix fields must match batch size");
            for (int y : batch.labels_b)
                if (y < 0 || y >= num_classes)
                    throw std::invalid_argument("backward: cutmix partner label out of range");
            for (double lam : batch.lams)
                if (lam < 0.0 || lam > 1.0)
                    throw std::invalid_argument("backward: cutmix lam outside [0, 1]");
        }
    }

    ForwardTrace tr = forward_trace(params, batch.inputs);
    const std::vector<double>& logits = tr.acts.back();

    // Loss and logit-space gradient.
    double loss = 0.0;
    std::vector<double> delta(logits.size());
    std::vector<double> q(static_cast<std::size_t>(num_classes));
    double inv_b = 1.0 / batch_size;
    for (int i = 0; i < batch_size; ++i) {
        const double* z = logits.data() + static_cast<std::size_t>(i) * num_classes;
        double* dz = delta.data() + static_cast<std::size_t>(i) * num_classes;
        if (kind == TargetKind::soft) {
            double logz = row_softmax(z, num_classes, tau, q.data());
            const ProbVector& t = batch.soft_targets[static_cast<std::size_t>(i)];
            for (int c = 0; c < num_classes; ++c) {
                double tc = t[c];
                if (tc > 0.0) loss += inv_b * tc * (std::log(tc) - (z[c] / tau - logz));
                dz[c] = inv_b * (q[c] - tc) / tau;
            }
        } else {
            double logz = row_softmax(z, num_classes, 1.0, q.data());
            int y = batch.labels[static_cast<std::size_t>(i)];
            int yb = batch.labels_b.empty() ? y : batch.labels_b[static_cast<std::size_t>(i)];
            double lam = batch.labels_b.empty() ? 0.0 : batch.lams[static_cast<std::size_t>(i)];
            double off = batch.alpha / num_classes;
            for (int c = 0; c < num_classes; ++c) {
                double tc = off + (1.0 - batch.alpha) * ((c == y ? 1.0 - lam : 0.0) +
                                                         (c == yb ? lam : 0.0));
                if (tc > 0.0) loss -= inv_b * tc * (z[c] - logz);
                dz[c] = inv_b * (q[c] - tc);
            }
        }
    }

    // Backpropagate through the stack.
    BackwardResult res;
    res.loss = loss;
    res.grads = zero_grads(params);
    std::vector<double> cur = std::move(delta);
    for (int l = params.num_layers() - 1; l >= 0; --l) {
        int in = params.sizes[static_cast<std::size_t>(l)];
        int out = params.sizes[static_cast<std::size_t>(l) + 1];
        const std::vector<double>& below = tr.acts[static_cast<std::size_t>(l)];
        double* gw = res.grads.weights[static_cast<std::size_t>(l)].data();
        double* gb = res.grads.biases[static_cast<std::size_t>(l)].data();

        for (int i = 0; i < batch_size; ++i) {
            const double* d = cur.data() + static_cast<std::size_t>(i) * out;
            const double* x = below.data() + static_cast<std::size_t>(i) * in;
            for (int o = 0; o < out; ++o) {
                double dv = d[o];
                if (dv == 0.0) continue;
                double* row = gw + static_cast<std::size_t>(o) * in;
                for (int j = 0; j < in; ++j) row[j] += dv * x[j];
                gb[o] += dv;
            }
        }

        if (l > 0) {
            const double* w = params.weights[static_cast<std::size_t>(l)].data();
            std::vector<double> prev(static_cast<std::size_t>(batch_size) * static_cast<std::size_t>(in), 0.0);
            for (int i = 0; i < batch_size; ++i) {
                const double* d = cur.data() + static_cast<std::size_t>(i) * out;
                const double* a = below.data() + static_cast<std::size_t>(i) * in;
                double* pd = prev.data() + static_cast<std::size_t>(i) * in;
                for (int o = 0; o < out; ++o) {
                    double dv = d[o];
                    if (dv == 0.0) continue;
                    const double* row = w + static_cast<std::size_t>(o) * in;
                    for (int j = 0; j < in; ++j) pd[j] += dv * row[j];
                }
                // ReLU gate: activations below are post-ReLU, so a zero
                // activation marks a dead unit.
                for (int j = 0; j < in; ++j)
                    if (a[j] <= 0.0) pd[j] = 0.0;
            }
            cur = std::move(prev);
        }
    }
    return res;
}

void opt_step(TinyNetParams& params, const GradientSet& grads, OptimizerState& state) {
    if (grads.weights.size() != params.weights.size())
        throw std::invalid_argument("opt_step: gradient shape mismatch");
    std::size_t n = params.num_params();
    if (state.kind != OptKind::plain && state.m.size() != n) {
        state.m.assign(n, 0.0);
        if (state.kind == OptKind::adamw) state.v.assign(n, 0.0);
    }

    state.step_count += 1;
    double bc1 = 1.0, bc2 = 1.0;
    if (state.kind == OptKind::adamw) {
        bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
        bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    }

    std::size_t k = 0;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (int part = 0; part < 2; ++part) {
            std::vector<double>& w = part == 0 ? params.weights[l] : params.biases[l];
            const std::vector<double>& g = part == 0 ? grads.weights[l] : grads.biases[l];
            if (g.size() != w.size()) throw std::invalid_argument("opt_step: gradient shape mismatch");
            bool decay_here = (part == 0) && state.weight_decay > 0.0;
            for (std::size_t i = 0; i < w.size(); ++i, ++k) {
                double gi = g[i];
                double step;
                switch (state.kind) {
                    case OptKind::plain:
                        step = state.lr * gi;
                        break;
                    case OptKind::momentum:
                        state.m[k] = state.momentum * state.m[k] + gi;
                        step = state.lr * state.m[k];
                        break;
                    case OptKind::adamw: {
                        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * gi;
                        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * gi * gi;
                        double mhat = state.m[k] / bc1;
                        double vhat = state.v[k] / bc2;
                        step = state.lr * mhat / (std::sqrt(vhat) + state.eps);
                        break;
                    }
                    default:
                        throw std::invalid_argument("opt_step: unknown optimizer kind");
                }
                w[i] -= step;
                if (decay_here) w[i] -= state.lr * state.weight_decay * w[i];
            }
        }
    }
}

std::vector<double> flat_params(const TinyNetParams& params) {
    std::vector<double> out;
    out.reserve(params.num_params());
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        out.insert(out.end(), params.weights[l].begin(), params.weights[l].end());
        out.insert(out.end(), params.biases[l].begin(), params.biases[l].end());
    }
    return out;
}

std::vector<double> flat_grad(const GradientSet& grads) {
    std::vector<double> out;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        out.insert(out.end(), grads.weights[l].begin(), grads.weights[l].end());
        out.insert(out.end(), grads.biases[l].begin(), grads.biases[l].end());
    }
    return out;
}

void save_params(const std::filesystem::path& path, const TinyNetParams& params) {
    check_sizes(params.sizes);
    BufWriter w;
    w.put_magic("TNET");
    w.put_u16(1);  // format version
    w.put_u32(static_cast<std::uint32_t>(params.num_layers()));
    for (int l = 0; l < params.num_layers(); ++l) {
        w.put_u32(static_cast<std::uint32_t>(params.sizes[static_cast<std::size_t>(l)]));
        w.put_u32(static_cast<std::uint32_t>(params.sizes[static_cast<std::size_t>(l) + 1]));
    }
    for (int l = 0; l < params.num_layers(); ++l) {
        for (double v : params.weights[static_cast<std::size_t>(l)]) w.put_f64(v);
        for (double v : params.biases[static_cast<std::size_t>(l)]) w.put_f64(v);
    }
    write_file(path, w.bytes());
}

TinyNetParams load_params(const std::filesystem::path& path) {
    std::vector<std::uint8_t> data = read_file(path);
    BufReader r(data);
    r.expect_magic("TNET", "checkpoint");
    std::uint16_t version = r.get_u16();
    if (version != 1)
        throw IoError(IoErrorKind::corrupt_header, "checkpoint: unsupported version");
    std::uint32_t layers = r.get_u32();
    if (layers == 0 || layers > 64)
        throw IoError(IoErrorKind::bad_value, "checkpoint: implausible layer count");

    TinyNetParams p;
    p.sizes.resize(layers + 1);
    for (std::uint32_t l = 0; l < layers; ++l) {
        std::uint32_t in = r.get_u32();
        std::uint32_t out = r.get_u32();
        if (in == 0 || out == 0 || in > (1u << 24) || out > (1u << 24))
            throw IoError(IoErrorKind::bad_value, "checkpoint: implausible layer dims");
        if (l == 0) p.sizes[0] = static_cast<int>(in);
        else if (p.sizes[l] != static_cast<int>(in))
            throw IoError(IoErrorKind::bad_value, "checkpoint: layer dims do not chain");
        p.sizes[l + 1] = static_cast<int>(out);
    }
    for (std::uint32_t l = 0; l < layers; ++l) {
        std::size_t in = static_cast<std::size_t>(p.sizes[l]);
        std::size_t out = static_cast<std::size_t>(p.sizes[l + 1]);
        std::vector<double> w(in * out), b(out);
        for (double& v : w) v = r.get_f64();
        for (double& v : b) v = r.get_f64();
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    return p;
}

}  // namespace hald
