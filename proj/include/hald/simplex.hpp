#pragma once

#include <span>
#include <vector>

namespace hald {

/// Probability vector over a finite label set.
///
/// Construction validates that every entry is non-negative and finite and
/// renormalizes the sum to one, so downstream code can rely on simplex
/// membership without re-checking.  Values produced by dequantizing stored
/// labels come back slightly off the simplex; renormalization here is what
/// restores the invariant.
class ProbVector {
public:
    ProbVector() = default;

    /// Takes non-negative weights and scales them to sum to one.
    /// Throws std::invalid_argument on negative, non-finite, or all-zero input.
    explicit ProbVector(std::vector<double> weights);

    static ProbVector uniform(int num_classes);

    /// Probability mass entirely on one class.
    static ProbVector delta(int cls, int num_classes);

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return values_; }

    /// Index of the largest entry (ties break toward the lower index).
    int argmax() const;

    /// Max absolute deviation of the sum from one; exposed for tests.
    double sum_error() const;

private:
    std::vector<double> values_;
};

/// Tempered softmax: softmax(z / tau), computed stably via max subtraction.
/// tau must be positive.
ProbVector softmax_temp(std::span<const double> logits, double tau);

/// KL(p || q) in nats with q clamped below at 1e-12 and the 0 log 0 = 0
/// convention for p.  Non-negative by construction (the clamp can introduce
/// a vanishing negative residue, which is floored away).
double kl_div(const ProbVector& p, const ProbVector& q);

/// Jensen-Shannon divergence in nats: symmetric, zero iff p = q, and
/// bounded above by ln 2.
double js_divergence(const ProbVector& p, const ProbVector& q);

/// Cosine similarity of two real vectors.  If either norm falls below
/// 1e-12 the value is 0; pass `degenerate` to observe that case.
double cosine_sim(std::span<const double> u, std::span<const double> v,
                  bool* degenerate = nullptr);

/// Shannon entropy in nats, using 0 log 0 = 0.
double entropy(const ProbVector& p);

/// Label smoothing: (1 - alpha) * delta_y + alpha / C on every class.
ProbVector label_smooth(int cls, double alpha, int num_classes);

/// CutMix target: area-weighted blend of the two smoothed one-hot labels,
/// (1 - lam) * LS_alpha(y_a) + lam * LS_alpha(y_b).
ProbVector cutmix_target(int y_a, int y_b, double lam, double alpha, int num_classes);

}  // namespace hald
