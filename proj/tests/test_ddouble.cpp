#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rebits/ddouble.hpp"
#include "rebits/exact_acc.hpp"

#include <cmath>
#include <random>

using namespace rebits;

namespace {

// A normalized random double-double with hi exponent in a moderate range.
DDouble rand_dd(std::mt19937_64& g, int exp_range = 30) {
    const double hi =
        ((g() & 1) ? 1.0 : -1.0) *
        std::ldexp(1.0 + static_cast<double>(g() >> 12) * 0x1p-52,
                   static_cast<int>(g() % (2 * exp_range + 1)) - exp_range);
    const double lo = ((g() & 1) ? 1.0 : -1.0) *
                      std::ldexp(static_cast<double>(g() >> 12) * 0x1p-52,
                                 -54) *
                      hi;
    HostBackend<double> bk;
    return dd_normalize(hi, lo, bk);
}

void acc_add_dd(ExactAccumulator& acc, const DDouble& x) {
    acc.add(x.hi);
    acc.add(x.lo);
}

void acc_add_product(ExactAccumulator& acc, double a, double b) {
    if (a == 0 || b == 0) return;
    const Unpacked ua = unpack(from_host(a));
    const Unpacked ub = unpack(from_host(b));
    acc.add_scaled(ua.sign * ub.sign,
                   static_cast<unsigned __int128>(ua.significand) *
                       ub.significand,
                   (ua.exponent - 52) + (ub.exponent - 52));
}

// |acc| <= 2^(bound_exp) relative to 2^ref_exp.
bool acc_below(const ExactAccumulator& acc, int ref_exp, int rel_exp) {
    return acc.is_zero() || acc.msb_exponent() <= ref_exp + rel_exp;
}

int exp_of(double x) {
    int e;
    std::frexp(x, &e);
    return e;
}

} // namespace

TEST_CASE("normalization invariant") {
    std::mt19937_64 g(1);
    HostBackend<double> bk;
    for (int i = 0; i < 100000; ++i) {
        const DDouble x = rand_dd(g);
        CHECK(dd_is_normalized(x));
        const DDouble y = rand_dd(g);
        for (SchemeVariant v : {SchemeVariant::native, SchemeVariant::rebits}) {
            CHECK(dd_is_normalized(dd_add(x, y, bk, v)));
            CHECK(dd_is_normalized(dd_mul(x, y, bk, v)));
        }
    }
}

TEST_CASE("native and error-register variants are bitwise identical") {
    std::mt19937_64 g(2);
    HostBackend<double> bk;
    for (int i = 0; i < 200000; ++i) {
        const DDouble x = rand_dd(g);
        const DDouble y = rand_dd(g);
        {
            const DDouble a = dd_add(x, y, bk, SchemeVariant::native);
            const DDouble b = dd_add(x, y, bk, SchemeVariant::rebits);
            CHECK(a.hi == b.hi);
            CHECK(a.lo == b.lo);
        }
        {
            const DDouble a = dd_mul(x, y, bk, SchemeVariant::native);
            const DDouble b = dd_mul(x, y, bk, SchemeVariant::rebits);
            CHECK(a.hi == b.hi);
            CHECK(a.lo == b.lo);
        }
        if (y.hi != 0) {
            const DDouble a = dd_div(x, y, bk, SchemeVariant::native);
            const DDouble b = dd_div(x, y, bk, SchemeVariant::rebits);
            CHECK(a.hi == b.hi);
            CHECK(a.lo == b.lo);
        }
    }
}

TEST_CASE("dd_add is exact against the wide accumulator") {
    std::mt19937_64 g(3);
    HostBackend<double> bk;
    for (int i = 0; i < 50000; ++i) {
        const DDouble x = rand_dd(g);
        const DDouble y = rand_dd(g);
        const DDouble s = dd_add(x, y, bk, SchemeVariant::rebits);
        ExactAccumulator acc;
        acc_add_dd(acc, x);
        acc_add_dd(acc, y);
        acc.negate();
        acc_add_dd(acc, s);
        acc.negate();
        // Residual below 2^-104 relative to the result.
        CHECK(acc_below(acc, exp_of(s.hi), -104));
    }
}

TEST_CASE("dd_mul matches the exact cross products to 2^-102") {
    std::mt19937_64 g(4);
    HostBackend<double> bk;
    for (int i = 0; i < 50000; ++i) {
        const DDouble x = rand_dd(g);
        const DDouble y = rand_dd(g);
        const DDouble p = dd_mul(x, y, bk, SchemeVariant::rebits);
        ExactAccumulator acc;
        acc_add_product(acc, x.hi, y.hi);
        acc_add_product(acc, x.hi, y.lo);
        acc_add_product(acc, x.lo, y.hi);
        acc_add_product(acc, x.lo, y.lo);
        acc.negate();
        acc_add_dd(acc, p);
        acc.negate();
        CHECK(acc_below(acc, exp_of(p.hi), -102));
    }
}

TEST_CASE("dd_div round trips through dd_mul") {
    std::mt19937_64 g(5);
    HostBackend<double> bk;
    for (int i = 0; i < 20000; ++i) {
        const DDouble x = rand_dd(g, 20);
        DDouble y = rand_dd(g, 20);
        if (y.hi == 0) continue;
        const DDouble q = dd_div(x, y, bk, SchemeVariant::rebits);
        const DDouble back = dd_mul(q, y, bk, SchemeVariant::rebits);
        const DDouble diff =
            dd_add(back, dd_negate(x), bk, SchemeVariant::rebits);
        if (x.hi != 0)
            CHECK(std::fabs(diff.hi) <= std::ldexp(std::fabs(x.hi), -99));
        else
            CHECK(std::fabs(diff.hi) <= 0x1p-1000);
    }
}

TEST_CASE("dd constants behave") {
    HostBackend<double> bk;
    const DDouble one = DDouble::from(1.0);
    const DDouble three = DDouble::from(3.0);
    const DDouble third = dd_div(one, three, bk);
    // 1/3 to ~106 bits: hi is the double rounding, lo refines it.
    CHECK(third.hi == 1.0 / 3.0);
    CHECK(std::fabs(third.hi + third.lo - 1.0 / 3.0) <= 0x1p-54);
    CHECK(third.lo != 0.0);
    const DDouble back = dd_mul(third, three, bk);
    const DDouble err = dd_add(back, dd_negate(one), bk);
    CHECK(std::fabs(err.hi) <= 0x1p-105);
}
