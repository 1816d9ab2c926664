#ifndef REBITS_ACCUM_HPP
#define REBITS_ACCUM_HPP

#include "rebits/backend.hpp"
#include "rebits/exact_acc.hpp"
#include "rebits/opcount.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace rebits {

// The floaterr pair: a running value and a running error in the same
// format.
template <typename S>
struct FloatErr {
    S val{};
    S err{};
    bool operator==(const FloatErr&) const = default;
};

// How often the running error is folded back into the running value. A
// terminal fold is always applied at finalize.
struct FoldPolicy {
    std::uint64_t k = 0; // 0 = never fold inside the loop

    static constexpr FoldPolicy none() { return {0}; }
    static constexpr FoldPolicy every(std::uint64_t k) { return {k}; }
    constexpr bool folds() const { return k != 0; }
    bool operator==(const FoldPolicy&) const = default;
};

// Semantics of floaterr + floaterr. `accumulate` combines both running
// errors with the new addition error; `replace` keeps only the new error.
enum class FeErrSemantics { accumulate, replace };

// val' = fl(val + x); err' = fl(err + e) with e the exact error of the val
// addition. The error of the err addition itself is discarded.
template <typename B, typename S>
FloatErr<S> fe_add_scalar(FloatErr<S> acc, S x, B& bk) {
    const auto [v, e] = bk.add_err(acc.val, x);
    return {v, bk.add(acc.err, e)};
}

template <typename B, typename S>
FloatErr<S> fe_add_fe(FloatErr<S> a, FloatErr<S> b, B& bk,
                      FeErrSemantics sem = FeErrSemantics::accumulate) {
    const auto [v, e] = bk.add_err(a.val, b.val);
    if (sem == FeErrSemantics::replace) return {v, e};
    return {v, bk.add(bk.add(a.err, b.err), e)};
}

// val' = fl(val + err); err' = the exact residual of that addition.
template <typename B, typename S>
FloatErr<S> fold(FloatErr<S> acc, B& bk) {
    const auto [v, e] = bk.add_err(acc.val, acc.err);
    return {v, e};
}

template <typename B, typename S>
S finalize(FloatErr<S> acc, B& bk) {
    return bk.add(acc.val, acc.err);
}

struct FoldStats {
    std::uint64_t folds = 0;
    OpCounters ops;
};

template <typename S>
struct SumOutcome {
    S value{};
    bool poisoned = false;
    std::size_t poison_index = 0; // index of the first non-finite event
};

// The folding accumulator loop: per element one floaterr add; every k
// elements (counting from the first) one fold; one terminal fold-and-add.
template <typename B, typename S>
SumOutcome<S> sum_with_policy(std::span<const S> v, FoldPolicy policy, B& bk,
                              FoldStats* stats = nullptr) {
    CountScope local("sum_with_policy", bk.scope());
    CountScope* outer = bk.scope();
    bk.set_scope(&local);

    FloatErr<S> acc;
    SumOutcome<S> out;
    std::uint64_t folds = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc = fe_add_scalar(acc, v[i], bk);
        if (!out.poisoned && !std::isfinite(static_cast<double>(acc.val))) {
            out.poisoned = true;
            out.poison_index = i;
        }
        if (policy.folds() && i % policy.k == 0) {
            acc = fold(acc, bk);
            ++folds;
        }
    }
    out.value = finalize(acc, bk);
    if (stats) {
        stats->folds = folds;
        stats->ops = local.report();
    }
    bk.set_scope(outer);
    return out;
}

// Partial-sum form used by parallel summation: same loop, no finalize.
template <typename B, typename S>
FloatErr<S> partial_sum_with_policy(std::span<const S> v, FoldPolicy policy,
                                    B& bk, bool* poisoned = nullptr,
                                    std::size_t* poison_index = nullptr) {
    FloatErr<S> acc;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc = fe_add_scalar(acc, v[i], bk);
        if (poisoned && !*poisoned &&
            !std::isfinite(static_cast<double>(acc.val))) {
            *poisoned = true;
            if (poison_index) *poison_index = i;
        }
        if (policy.folds() && i % policy.k == 0) acc = fold(acc, bk);
    }
    return acc;
}

} // namespace rebits

#endif
