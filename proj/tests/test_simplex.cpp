#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hald/rng.hpp"
#include "hald/simplex.hpp"

using namespace hald;

TEST_CASE("ProbVector renormalizes and validates") {
    ProbVector p(std::vector<double>{2.0, 2.0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p.sum_error() < 1e-12);

    CHECK_THROWS_AS(ProbVector(std::vector<double>{-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(ProbVector(std::vector<double>{0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ProbVector(std::vector<double>{std::nan(""), 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ProbVector(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("delta, uniform, argmax") {
    const ProbVector d = ProbVector::delta(2, 4);
    CHECK(d[2] == 1.0);
    CHECK(d[0] == 0.0);
    CHECK(d.argmax() == 2);

    const ProbVector u = ProbVector::uniform(5);
    for (int c = 0; c < 5; ++c) CHECK(u[c] == doctest::Approx(0.2));

    // Ties break toward the lower index.
    const ProbVector tie(std::vector<double>{1.0, 1.0});
    CHECK(tie.argmax() == 0);

    CHECK_THROWS_AS(ProbVector::delta(4, 4), std::invalid_argument);
    CHECK_THROWS_AS(ProbVector::delta(-1, 4), std::invalid_argument);
}

TEST_CASE("softmax_temp matches hand values and survives large logits") {
    const std::vector<double> logits = {0.0, std::log(2.0)};
    const ProbVector p = softmax_temp(logits, 1.0);
    CHECK(p[0] == doctest::Approx(1.0 / 3.0));
    CHECK(p[1] == doctest::Approx(2.0 / 3.0));

    // Temperature flattens: softmax(z/tau) at large tau approaches uniform.
    const ProbVector flat = softmax_temp(logits, 1000.0);
    CHECK(flat[0] == doctest::Approx(0.5).epsilon(1e-3));

    const std::vector<double> huge = {1000.0, 1000.0};
    const ProbVector h = softmax_temp(huge, 1.0);
    CHECK(h[0] == doctest::Approx(0.5));

    CHECK_THROWS_AS(softmax_temp(logits, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(softmax_temp(logits, -1.0), std::invalid_argument);
}

TEST_CASE("kl divergence: zero on equal inputs, known value, non-negative") {
    const ProbVector p(std::vector<double>{0.3, 0.7});
    CHECK(kl_div(p, p) == doctest::Approx(0.0).epsilon(1e-12));

    // KL(delta || uniform) = ln 2 for two classes.
    CHECK(kl_div(ProbVector::delta(0, 2), ProbVector::uniform(2)) ==
          doctest::Approx(std::log(2.0)));

    Rng rng(12);
    std::vector<double> a(5);
    std::vector<double> b(5);
    for (int i = 0; i < 200; ++i) {
        rng.dirichlet(a, 1.0);
        rng.dirichlet(b, 1.0);
        CHECK(kl_div(ProbVector(a), ProbVector(b)) >= 0.0);
    }
}

TEST_CASE("js divergence: symmetric, bounded by ln 2, maximal on disjoint support") {
    const ProbVector p(std::vector<double>{0.9, 0.1});
    const ProbVector q(std::vector<double>{0.2, 0.8});
    CHECK(js_divergence(p, q) == doctest::Approx(js_divergence(q, p)));
    CHECK(js_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(js_divergence(ProbVector::delta(0, 2), ProbVector::delta(1, 2)) ==
          doctest::Approx(std::log(2.0)));

    Rng rng(13);
    std::vector<double> a(4);
    std::vector<double> b(4);
    for (int i = 0; i < 200; ++i) {
        rng.dirichlet(a, 1.0);
        rng.dirichlet(b, 1.0);
        const double js = js_divergence(ProbVector(a), ProbVector(b));
        CHECK(js >= 0.0);
        CHECK(js <= std::log(2.0) + 1e-12);
    }
}

TEST_CASE("cosine similarity") {
    const std::vector<double> u = {1.0, 2.0};
    const std::vector<double> v = {2.0, 4.0};
    const std::vector<double> w = {-2.0, 1.0};
    CHECK(cosine_sim(u, v) == doctest::Approx(1.0));
    CHECK(cosine_sim(u, w) == doctest::Approx(0.0).epsilon(1e-12));

    bool degenerate = false;
    const std::vector<double> zero = {0.0, 0.0};
    CHECK(cosine_sim(u, zero, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("entropy") {
    CHECK(entropy(ProbVector::uniform(8)) == doctest::Approx(std::log(8.0)));
    CHECK(entropy(ProbVector::delta(3, 8)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("label smoothing puts alpha/C everywhere plus the spike") {
    const ProbVector s = label_smooth(1, 0.2, 4);
    CHECK(s[1] == doctest::Approx(0.8 + 0.05));
    CHECK(s[0] == doctest::Approx(0.05));
    CHECK(s.sum_error() < 1e-12);
    CHECK_THROWS_AS(label_smooth(1, 1.5, 4), std::invalid_argument);
    CHECK_THROWS_AS(label_smooth(7, 0.1, 4), std::invalid_argument);
}

TEST_CASE("cutmix target blends the two smoothed one-hots by area") {
    const double alpha = 0.2;
    const ProbVector a = label_smooth(0, alpha, 3);
    const ProbVector b = label_smooth(2, alpha, 3);
    const double lam = 0.25;
    const ProbVector mix = cutmix_target(0, 2, lam, alpha, 3);
    for (int c = 0; c < 3; ++c) {
        CHECK(mix[c] == doctest::Approx((1.0 - lam) * a[c] + lam * b[c]));
    }
    // Degenerate lambdas collapse to one side.
    const ProbVector left = cutmix_target(0, 2, 0.0, alpha, 3);
    for (int c = 0; c < 3; ++c) CHECK(left[c] == doctest::Approx(a[c]));
}
