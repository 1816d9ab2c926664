#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rebits/accum.hpp"
#include "rebits/eft.hpp"
#include "rebits/exact_acc.hpp"
#include "rebits/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace rebits;

namespace {

double rand_double(std::mt19937_64& g, int exp_range = 40) {
    const double m = 1.0 + static_cast<double>(g() >> 12) * 0x1p-52;
    const int e = static_cast<int>(g() % (2 * exp_range + 1)) - exp_range;
    const double s = (g() & 1) ? -1.0 : 1.0;
    return s * std::ldexp(m, e);
}

// Independent gold standard: a Shewchuk-style expansion kept as a vector
// of non-overlapping doubles, grown with two_sum only. No shared code with
// ExactAccumulator beyond IEEE addition itself.
class ExpansionSum {
public:
    void add(double x) {
        std::vector<double> next;
        for (double c : comps_) {
            const double s = x + c;
            const double bb = s - x;
            const double e = (x - (s - bb)) + (c - bb);
            if (e != 0.0) next.push_back(e);
            x = s;
        }
        if (x != 0.0) next.push_back(x);
        comps_ = std::move(next);
    }
    // Faithful double approximation: summing the non-overlapping
    // components upward is accurate to a fraction of an ulp.
    double approx() const {
        double s = 0;
        for (double c : comps_) s += c;
        return s;
    }

private:
    std::vector<double> comps_; // increasing magnitude
};

} // namespace

TEST_CASE("fe_add_scalar tracks the worked example") {
    HostBackend<float> bk;
    FloatErr<float> acc;
    acc = fe_add_scalar(acc, 2808064.0f, bk);
    CHECK(acc.val == 2808064.0f);
    CHECK(acc.err == 0.0f);
    acc = fe_add_scalar(acc, 100.125f, bk);
    CHECK(acc.val == 2808164.0f);
    CHECK(acc.err == 0.125f);
    CHECK(finalize(acc, bk) == 2808164.125f);
}

TEST_CASE("the error half captures stalled small terms") {
    HostBackend<float> bk;
    FloatErr<float> acc;
    acc = fe_add_scalar(acc, 16777216.0f, bk); // 2^24
    for (int i = 0; i < 100; ++i) acc = fe_add_scalar(acc, 1.0f, bk);
    CHECK(acc.val == 16777216.0f);
    CHECK(acc.err == 100.0f);
    acc = fold(acc, bk);
    CHECK(acc.val == 16777316.0f);
    CHECK(acc.err == 0.0f);
}

TEST_CASE("fe_add_fe semantics") {
    HostBackend<float> bk;
    const FloatErr<float> a{16777216.0f, 3.0f};
    const FloatErr<float> b{1.5f, 0.25f};
    // 2^24 + 1.5 rounds up to 2^24 + 2 (ulp is 2 here), leaving the exact
    // residual -0.5 in the error register.
    {
        const auto r = fe_add_fe(a, b, bk, FeErrSemantics::accumulate);
        CHECK(r.val == 16777218.0f);
        CHECK(r.err == 3.0f + 0.25f - 0.5f);
    }
    {
        const auto r = fe_add_fe(a, b, bk, FeErrSemantics::replace);
        CHECK(r.val == 16777218.0f);
        CHECK(r.err == -0.5f);
    }
}

TEST_CASE("sum_with_policy none matches the cascade bitwise") {
    std::mt19937_64 g(9);
    HostBackend<double> bkd;
    HostBackend<float> bkf;
    for (int round = 0; round < 500; ++round) {
        const std::size_t n = 1 + g() % 1000;
        std::vector<double> vd(n);
        for (double& x : vd) x = rand_double(g, 30);
        std::vector<float> vf(n);
        for (std::size_t i = 0; i < n; ++i)
            vf[i] = static_cast<float>(vd[i]);
        CHECK(sum_with_policy(std::span<const double>(vd), FoldPolicy::none(),
                              bkd)
                  .value == cascade_sum(std::span<const double>(vd), bkd));
        CHECK(sum_with_policy(std::span<const float>(vf), FoldPolicy::none(),
                              bkf)
                  .value == cascade_sum(std::span<const float>(vf), bkf));
    }
}

TEST_CASE("fold policies refine accuracy on the shipped skewed dataset") {
    HostBackend<float> bk;
    const std::vector<double> wide =
        kernels::gen_skewed_positive(100000, 1, FloatFormat::binary32());
    std::vector<float> v(wide.begin(), wide.end());
    ExactAccumulator acc;
    for (float x : v) acc.add(x);
    const double exact = acc.round_f64();
    float naive = 0;
    for (float x : v) naive += x;
    double prev = -1;
    for (FoldPolicy p : {FoldPolicy::every(1), FoldPolicy::every(100),
                         FoldPolicy::every(1000), FoldPolicy::none()}) {
        const double err = std::fabs(
            (double)sum_with_policy(std::span<const float>(v), p, bk).value -
            exact);
        if (prev >= 0) CHECK(prev <= err);
        prev = err;
    }
    CHECK(prev <= std::fabs((double)naive - exact));
}

TEST_CASE("poisoning reports the first non-finite index") {
    HostBackend<float> bk;
    std::vector<float> v{1.0f, 3e38f, 3e38f, 1.0f};
    const auto out =
        sum_with_policy(std::span<const float>(v), FoldPolicy::none(), bk);
    CHECK(out.poisoned);
    CHECK(out.poison_index == 2);
}

TEST_CASE("sum_with_policy op accounting") {
    HostBackend<float> bk;
    std::vector<float> v(1000, 1.0f);
    FoldStats stats;
    sum_with_policy(std::span<const float>(v), FoldPolicy::every(100), bk,
                    &stats);
    CHECK(stats.folds == 10);
    // Per element: one val add (with error read) + one err add; per fold
    // one add_err; one finalize add.
    CHECK(stats.ops.fpadd == 2 * 1000 + 10 + 1);
    CHECK(stats.ops.move_fperr == 1000 + 10);

    // The loop body alone costs one extra fpadd and one error read per
    // element compared to a naive sum.
    CountScope naive_scope;
    HostBackend<float> nbk(&naive_scope);
    float s = 0;
    for (float x : v) s = nbk.add(s, x);
    CountScope part_scope;
    HostBackend<float> pbk(&part_scope);
    partial_sum_with_policy(std::span<const float>(v), FoldPolicy::none(), pbk);
    CHECK(part_scope.report().fpadd ==
          naive_scope.report().fpadd + v.size());
    CHECK(part_scope.report().move_fperr == v.size());
}

TEST_CASE("ExactAccumulator matches an independent expansion oracle") {
    std::mt19937_64 g(11);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = 1 + g() % 400;
        ExactAccumulator acc;
        ExpansionSum exp;
        std::vector<double> v(n);
        for (double& x : v) {
            x = rand_double(g, 500);
            acc.add(x);
            exp.add(x);
        }
        const double c = acc.round_f64();
        // Necessary condition for correct rounding, checked against the
        // independent expansion: the residual exact - c is at most half an
        // ulp of c in magnitude.
        CHECK(std::fabs(c - exp.approx()) <=
              ulp_of(from_host(c == 0 ? 1.0 : c)));
        if (std::isfinite(c) && c != 0) {
            ExpansionSum resid = exp;
            resid.add(-c);
            CHECK(std::fabs(resid.approx()) <= 0.5 * ulp_of(from_host(c)));
        }
        // Permutation invariance of the exact route.
        std::shuffle(v.begin(), v.end(), g);
        ExactAccumulator acc2;
        for (double x : v) acc2.add(x);
        CHECK(acc == acc2);
    }
}

TEST_CASE("ExactAccumulator edges") {
    ExactAccumulator acc;
    CHECK(acc.is_zero());
    CHECK(acc.sign() == 0);
    acc.add(0x1p-1074); // smallest subnormal
    CHECK(acc.sign() == 1);
    CHECK(acc.msb_exponent() == -1074);
    CHECK(acc.round_f64() == 0x1p-1074);
    acc.add(-0x1p-1074);
    CHECK(acc.is_zero());

    acc.add(std::numeric_limits<double>::max());
    acc.add(std::numeric_limits<double>::max());
    CHECK(std::isinf(acc.round_f64())); // overflow rounds to infinity
    CHECK_THROWS_AS(acc.add(std::numeric_limits<double>::infinity()),
                    std::domain_error);

    ExactAccumulator m;
    m.add(1.5);
    ExactAccumulator n;
    n.add(2.5);
    m.merge(n);
    CHECK(m.round_f64() == 4.0);
    m.negate();
    CHECK(m.round_f64() == -4.0);
}

TEST_CASE("ExactAccumulator rounds into small formats in every mode") {
    // 0.34375 + 2^-20 lies strictly between the e5m2 neighbors 0.3125 and
    // 0.375, just above their midpoint.
    ExactAccumulator acc;
    acc.add(0.34375); // exact midpoint of the e5m2 pair
    acc.add(0x1p-20); // nudge above the tie
    const FloatFormat fmt{5, 2};
    const double lo = 0.3125, hi = 0.375;
    CHECK(value_as_double(acc.round(fmt, RoundingMode::toward_negative)) == lo);
    CHECK(value_as_double(acc.round(fmt, RoundingMode::toward_positive)) == hi);
    CHECK(value_as_double(acc.round(fmt, RoundingMode::toward_zero)) == lo);
    CHECK(value_as_double(acc.round(fmt, RoundingMode::nearest_even)) == hi);

    // The exact tie goes to the even significand: 0.3125 = 1.01_2 * 2^-2
    // is odd, 0.375 = 1.10_2 * 2^-2 is even.
    ExactAccumulator tie;
    tie.add(0.34375);
    CHECK(value_as_double(tie.round(fmt, RoundingMode::nearest_even)) == hi);
}
