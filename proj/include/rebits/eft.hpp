#ifndef REBITS_EFT_HPP
#define REBITS_EFT_HPP

#include "rebits/backend.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace rebits {

// Selects whether errors are inferred with extra additions (native) or read
// from the add-with-error instruction (rebits).
enum class SchemeVariant { native, rebits };

// Knuth's branch-free error-free addition. 6 fpadd native,
// 1 fpadd + 1 FPERR move rebits.
template <typename B, typename S>
SumAndError<S> two_sum(S a, S b, B& bk,
                       SchemeVariant variant = SchemeVariant::native) {
    if (variant == SchemeVariant::rebits) return bk.add_err(a, b);
    const S s = bk.add(a, b);
    const S bb = bk.add(s, -a);
    const S e = bk.add(bk.add(a, -bk.add(s, -bb)), bk.add(b, -bb));
    return {s, e};
}

// Dekker's variant; requires |a| >= |b| (or a == 0 with b == 0 treated as
// exact). The precondition is the caller's responsibility in release
// builds and asserted in debug builds.
template <typename B, typename S>
SumAndError<S> fast_two_sum(S a, S b, B& bk,
                            SchemeVariant variant = SchemeVariant::native) {
    assert(a == S(0) || std::isnan(static_cast<double>(a)) ||
           std::isnan(static_cast<double>(b)) ||
           !(std::fabs(static_cast<double>(b)) >
             std::fabs(static_cast<double>(a))));
    if (variant == SchemeVariant::rebits) return bk.add_err(a, b);
    const S s = bk.add(a, b);
    const S e = bk.add(b, -bk.add(s, -a));
    return {s, e};
}

template <typename S>
struct ProdAndError {
    S s;
    S e;
    bool split_overflow = false;
};

// Dekker-split error-free product: s = fl(a*b) and s + e == a*b exactly.
// Always software (there is no multiplication error register):
// 7 fpmult + 10 fpadd.
template <typename B, typename S>
ProdAndError<S> two_prod(S a, S b, B& bk) {
    constexpr int half = (format_of<S>().precision() + 1) / 2;
    const S split_c = static_cast<S>((std::uint64_t{1} << half) + 1);

    bool overflow = false;
    auto split = [&](S x, S& hi, S& lo) {
        const S t = bk.mul(x, split_c);
        if (std::isfinite(static_cast<double>(x)) &&
            !std::isfinite(static_cast<double>(t)))
            overflow = true;
        hi = bk.add(t, -bk.add(t, -x));
        lo = bk.add(x, -hi);
    };
    S ah, al, bh, bl;
    split(a, ah, al);
    split(b, bh, bl);
    const S p = bk.mul(a, b);
    const S e = bk.add(
        bk.add(bk.add(bk.add(bk.mul(ah, bh), -p), bk.mul(ah, bl)),
               bk.mul(al, bh)),
        bk.mul(al, bl));
    return {p, e, overflow};
}

// Classic compensated running sum. 4 fpadd per element native,
// 2 fpadd + 1 move rebits.
template <typename B, typename S>
S kahan_sum(std::span<const S> v, B& bk,
            SchemeVariant variant = SchemeVariant::native) {
    S s{}, c{};
    if (variant == SchemeVariant::native) {
        for (S x : v) {
            const S y = bk.add(x, -c);
            const S t = bk.add(s, y);
            c = bk.add(bk.add(t, -s), -y);
            s = t;
        }
    } else {
        for (S x : v) {
            const S y = bk.add(x, -c);
            const auto [t, e] = bk.add_err(s, y);
            c = -e;
            s = t;
        }
    }
    return s;
}

// Doubly compensated summation over magnitude-ordered input. The native
// loop body measures 10 fpadd + 1 fpcomp; the rebits body is the bare
// add-with-error (1 fpadd + 1 move), with the exact per-step errors
// buffered and drained into a correction term in blocks.
namespace detail {

template <typename S>
std::vector<S> by_descending_magnitude(std::span<const S> v, CountScope* scope) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        record(scope, OpKind::fpcomp);
        const S ai = std::fabs(v[i]), aj = std::fabs(v[j]);
        if (ai != aj) return ai > aj;
        return i < j;
    });
    std::vector<S> out(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
    return out;
}

} // namespace detail

// One native doubly-compensated step folding x into (s, c), after the
// order check. 10 fpadd.
template <typename B, typename S>
void priest_step(S& s, S& c, S x, B& bk) {
    const S y = bk.add(c, x);
    const S u = bk.add(x, -bk.add(y, -c));
    const S t = bk.add(y, s);
    const S w = bk.add(y, -bk.add(t, -s));
    const S z = bk.add(u, w);
    const S s2 = bk.add(t, z);
    c = bk.add(z, -bk.add(s2, -t));
    s = s2;
}

template <typename B, typename S>
S priest_sum(std::span<const S> v, B& bk,
             SchemeVariant variant = SchemeVariant::native) {
    if (v.empty()) return S{};
    const std::vector<S> sorted = detail::by_descending_magnitude(v, bk.scope());

    if (variant == SchemeVariant::native) {
        S s = sorted[0];
        S c{};
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            bk.comp(); // order maintenance on the sorted stream
            priest_step(s, c, sorted[k], bk);
        }
        return s;
    }

    constexpr std::size_t block = 4096;
    S s{}, corr{};
    std::vector<S> pending;
    pending.reserve(block);
    auto drain = [&] {
        for (S e : pending) corr = bk.add(corr, e);
        pending.clear();
    };
    for (S x : sorted) {
        const auto [t, e] = bk.add_err(s, x);
        s = t;
        pending.push_back(e);
        if (pending.size() == block) drain();
    }
    drain();
    return bk.add(s, corr);
}

// Sum2: a two_sum cascade with naively accumulated errors. Serves as the
// independent route checked bitwise against the fold-free floaterr sum.
template <typename B, typename S>
S cascade_sum(std::span<const S> v, B& bk) {
    S s{}, sigma{};
    for (S x : v) {
        const auto [t, e] = two_sum(s, x, bk, SchemeVariant::native);
        s = t;
        sigma = bk.add(sigma, e);
    }
    return bk.add(s, sigma);
}

} // namespace rebits

#endif
