#ifndef REBITS_BACKEND_HPP
#define REBITS_BACKEND_HPP

#include "rebits/format.hpp"
#include "rebits/opcount.hpp"
#include "rebits/softfp.hpp"

#include <cmath>
#include <type_traits>

namespace rebits {

template <typename S>
struct SumAndError {
    S s;
    S e;
};

template <typename S>
constexpr FloatFormat format_of() {
    static_assert(std::is_same_v<S, float> || std::is_same_v<S, double>);
    if constexpr (std::is_same_v<S, float>)
        return FloatFormat::binary32();
    else
        return FloatFormat::binary64();
}

template <typename S>
S packed_to_host(const PackedFloat& x) {
    if constexpr (std::is_same_v<S, float>)
        return to_host_f32(x);
    else
        return to_host_f64(x);
}

// Arithmetic backend on the host FPU (nearest-even). add_err models the
// add-with-error instruction: it costs one fpadd plus one FPERR move; the
// error value itself comes from the two_sum identity, which is exact for
// any finite round-to-nearest sum.
template <typename S>
class HostBackend {
public:
    explicit HostBackend(CountScope* scope = nullptr) : scope_(scope) {}

    S add(S a, S b) {
        record(scope_, OpKind::fpadd);
        return a + b;
    }
    S mul(S a, S b) {
        record(scope_, OpKind::fpmult);
        return a * b;
    }
    S div(S a, S b) {
        record(scope_, OpKind::fpdiv);
        return a / b;
    }
    void comp(std::uint64_t n = 1) { record(scope_, OpKind::fpcomp, n); }

    SumAndError<S> add_err(S a, S b) {
        record(scope_, OpKind::fpadd);
        record(scope_, OpKind::move_fperr);
        const S s = a + b;
        if (!std::isfinite(s)) return {s, S(0)};
        const S bb = s - a;
        const S e = static_cast<S>((a - (s - bb)) + (b - bb));
        return {s, e};
    }

    CountScope* scope() const { return scope_; }
    void set_scope(CountScope* scope) { scope_ = scope; }

private:
    CountScope* scope_;
};

// Backend that routes additions through the bit-level softfp adder.
// Multiplication and division stay on the host FPU: the emulated
// architecture only recycles addition error.
template <typename S>
class SoftBackend {
public:
    explicit SoftBackend(CountScope* scope = nullptr,
                         RoundingMode mode = RoundingMode::nearest_even)
        : scope_(scope), mode_(mode) {}

    S add(S a, S b) {
        record(scope_, OpKind::fpadd);
        return packed_to_host<S>(
            add_with_err(from_host(a), from_host(b), mode_).sum);
    }
    S mul(S a, S b) {
        record(scope_, OpKind::fpmult);
        return a * b;
    }
    S div(S a, S b) {
        record(scope_, OpKind::fpdiv);
        return a / b;
    }
    void comp(std::uint64_t n = 1) { record(scope_, OpKind::fpcomp, n); }

    SumAndError<S> add_err(S a, S b) {
        record(scope_, OpKind::fpadd);
        record(scope_, OpKind::move_fperr);
        const AddResult r = add_with_err(from_host(a), from_host(b), mode_);
        return {packed_to_host<S>(r.sum), packed_to_host<S>(r.err)};
    }

    CountScope* scope() const { return scope_; }
    void set_scope(CountScope* scope) { scope_ = scope; }

private:
    CountScope* scope_;
    RoundingMode mode_;
};

} // namespace rebits

#endif
