#include "hald/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hald {

namespace {
constexpr double kLogClamp = 1e-12;
constexpr double kNormEps = 1e-12;
}  // namespace

ProbVector::ProbVector(std::vector<double> weights) : values_(std::move(weights)) {
    if (values_.empty()) throw std::invalid_argument("ProbVector: empty weight vector");
    double total = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("ProbVector: non-finite entry");
        if (v < 0.0) throw std::invalid_argument("ProbVector: negative entry");
        total += v;
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::invalid_argument("ProbVector: weights must have positive finite sum");
    for (double& v : values_) v /= total;
}

ProbVector ProbVector::uniform(int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("ProbVector::uniform: need at least one class");
    return ProbVector(std::vector<double>(static_cast<std::size_t>(num_classes),
                                          1.0 / num_classes));
}

ProbVector ProbVector::delta(int cls, int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("ProbVector::delta: need at least one class");
    if (cls < 0 || cls >= num_classes) throw std::invalid_argument("ProbVector::delta: class out of range");
    std::vector<double> w(static_cast<std::size_t>(num_classes), 0.0);
    w[static_cast<std::size_t>(cls)] = 1.0;
    return ProbVector(std::move(w));
}

int ProbVector::argmax() const {
    return static_cast<int>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

double ProbVector::sum_error() const {
    double total = 0.0;
    for (double v : values_) total += v;
    return std::abs(total - 1.0);
}

ProbVector softmax_temp(std::span<const double> logits, double tau) {
    if (logits.empty()) throw std::invalid_argument("softmax_temp: empty logits");
    if (!(tau > 0.0)) throw std::invalid_argument("softmax_temp: tau must be positive");
    double top = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(top)) throw std::invalid_argument("softmax_temp: non-finite logit");
    std::vector<double> w(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        w[i] = std::exp((logits[i] - top) / tau);
    return ProbVector(std::move(w));
}

double kl_div(const ProbVector& p, const ProbVector& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_div: dimension mismatch");
    double acc = 0.0;
    for (int c = 0; c < p.size(); ++c) {
        double pc = p[c];
        if (pc <= 0.0) continue;  // 0 log 0 = 0
        double qc = std::max(q[c], kLogClamp);
        acc += pc * std::log(pc / qc);
    }
    // The clamp can push the effective q mass a hair above one, leaving a
    // vanishing negative residue; the divergence itself is non-negative.
    return std::max(acc, 0.0);
}

double js_divergence(const ProbVector& p, const ProbVector& q) {
    if (p.size() != q.size()) throw std::invalid_argument("js_divergence: dimension mismatch");
    double acc = 0.0;
    for (int c = 0; c < p.size(); ++c) {
        double m = 0.5 * (p[c] + q[c]);
        if (p[c] > 0.0) acc += 0.5 * p[c] * std::log(p[c] / m);
        if (q[c] > 0.0) acc += 0.5 * q[c] * std::log(q[c] / m);
    }
    return std::max(acc, 0.0);
}

double cosine_sim(std::span<const double> u, std::span<const double> v, bool* degenerate) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_sim: dimension mismatch");
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    double nu = std::sqrt(uu), nv = std::sqrt(vv);
    if (nu < kNormEps || nv < kNormEps) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return uv / (nu * nv);
}

double entropy(const ProbVector& p) {
    double acc = 0.0;
    for (int c = 0; c < p.size(); ++c)
        if (p[c] > 0.0) acc -= p[c] * std::log(p[c]);
    return std::max(acc, 0.0);
}

ProbVector label_smooth(int cls, double alpha, int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("label_smooth: need at least one class");
    if (cls < 0 || cls >= num_classes) throw std::invalid_argument("label_smooth: class out of range");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("label_smooth: alpha outside [0, 1]");
    std::vector<double> w(static_cast<std::size_t>(num_classes), alpha / num_classes);
    w[static_cast<std::size_t>(cls)] += 1.0 - alpha;
    return ProbVector(std::move(w));
}

ProbVector cutmix_target(int y_a, int y_b, double lam, double alpha, int num_classes) {
    if (lam < 0.0 || lam > 1.0) throw std::invalid_argument("cutmix_target: lam outside [0, 1]");
    ProbVector a = label_smooth(y_a, alpha, num_classes);
    ProbVector b = label_smooth(y_b, alpha, num_classes);
    std::vector<double> w(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c)
        w[static_cast<std::size_t>(c)] = (1.0 - lam) * a[c] + lam * b[c];
    return ProbVector(std::move(w));
}

}  // namespace hald
