#include "rebits/softfp.hpp"

#include <cassert>
#include <cmath>

namespace rebits {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

int msb_index(u128 v) {
    int i = 0;
    if (v >> 64) {
        i = 64;
        v >>= 64;
    }
    std::uint64_t w = static_cast<std::uint64_t>(v);
    while (w >>= 1) ++i;
    return i;
}

PackedFloat overflow_value(const FloatFormat& fmt, int sign, RoundingMode mode) {
    switch (mode) {
    case RoundingMode::nearest_even:
        return make_inf(fmt, sign);
    case RoundingMode::toward_zero:
        return max_finite(fmt, sign);
    case RoundingMode::toward_positive:
        return sign > 0 ? make_inf(fmt, +1) : max_finite(fmt, -1);
    case RoundingMode::toward_negative:
        return sign < 0 ? make_inf(fmt, -1) : max_finite(fmt, +1);
    }
    return make_inf(fmt, sign);
}

// Correctly round sign * mag * 2^scale into fmt. mag is exact (no sticky).
PackedFloat round_fixed(const FloatFormat& fmt, int sign, u128 mag, int scale,
                        RoundingMode mode, RoundFlags& flags) {
    flags = {};
    if (mag == 0) return make_zero(fmt, sign);

    const int msb = msb_index(mag);
    const int e_val = scale + msb;
    const int qt0 = e_val - fmt.frac_bits;
    const int qt = qt0 > fmt.min_scale() ? qt0 : fmt.min_scale();
    const int shift = qt - scale;

    std::uint64_t sig;
    int q = qt;
    if (shift <= 0) {
        sig = static_cast<std::uint64_t>(mag << (-shift));
    } else {
        // shift < 128 here: shift = msb - frac_bits when qt == qt0, and
        // qt == min_scale implies shift <= 0 because scale >= min_scale
        // for every caller.
        const u128 keep = mag >> shift;
        const u128 rem = mag - (keep << shift);
        sig = static_cast<std::uint64_t>(keep);
        if (rem != 0) {
            flags.inexact = true;
            bool up = false;
            switch (mode) {
            case RoundingMode::nearest_even: {
                const u128 half = u128{1} << (shift - 1);
                up = rem > half || (rem == half && (sig & 1));
                break;
            }
            case RoundingMode::toward_zero:
                break;
            case RoundingMode::toward_positive:
                up = sign > 0;
                break;
            case RoundingMode::toward_negative:
                up = sign < 0;
                break;
            }
            if (up && ++sig == std::uint64_t{1} << fmt.precision()) {
                sig >>= 1;
                ++q;
            }
        }
    }

    if (sig == 0) return make_zero(fmt, sign); // underflow to zero

    Unpacked u;
    u.sign = sign;
    if (sig >= std::uint64_t{1} << fmt.frac_bits) {
        const int exponent = q + fmt.frac_bits;
        if (exponent > fmt.emax()) {
            flags.inexact = true;
            flags.overflow = true;
            return overflow_value(fmt, sign, mode);
        }
        u.cls = FpClass::normal;
        u.exponent = exponent;
        u.significand = sig;
    } else {
        u.cls = FpClass::subnormal;
        u.exponent = fmt.emin();
        u.significand = sig;
    }
    return pack(fmt, u);
}

PackedFloat quiet(const PackedFloat& x) {
    return {x.fmt, x.bits | (std::uint64_t{1} << (x.fmt.frac_bits - 1))};
}

bool is_signaling(const PackedFloat& x) {
    return x.is_nan() &&
           ((x.bits >> (x.fmt.frac_bits - 1)) & 1) == 0;
}

} // namespace

PackedFloat round_wide(const FloatFormat& fmt, int sign, u128 mag,
                       int lsb_exp, bool sticky, RoundingMode mode,
                       RoundFlags& flags) {
    int scale = lsb_exp;
    if (sticky) {
        // Fold the sticky information in as one infinitesimal bit; it only
        // ever influences tie-breaking and direction, never magnitude at
        // the round position.
        mag = (mag << 1) | 1;
        scale -= 1;
    }
    return round_fixed(fmt, sign, mag, scale, mode, flags);
}

PackedFloat round_pack(const FloatFormat& fmt, int sign, std::uint64_t sig,
                       int lsb_exp, bool sticky, RoundingMode mode,
                       RoundFlags& flags) {
    return round_wide(fmt, sign, sig, lsb_exp, sticky, mode, flags);
}

AddResult add_with_err(const PackedFloat& a0, const PackedFloat& b0,
                       RoundingMode mode) {
    assert(a0.fmt == b0.fmt);
    const FloatFormat fmt = a0.fmt;
    AddResult r;
    r.err = make_zero(fmt);
    r.flags = {};

    const Unpacked ua0 = unpack(a0);
    const Unpacked ub0 = unpack(b0);
    r.flags.subnormal =
        ua0.cls == FpClass::subnormal || ub0.cls == FpClass::subnormal;

    // NaN propagation: first NaN operand wins, quieted, payload preserved.
    if (ua0.cls == FpClass::nan || ub0.cls == FpClass::nan) {
        if (is_signaling(a0) || is_signaling(b0)) r.flags.invalid = true;
        r.sum = ua0.cls == FpClass::nan ? quiet(a0) : quiet(b0);
        return r;
    }
    if (ua0.cls == FpClass::infinity && ub0.cls == FpClass::infinity) {
        if (ua0.sign != ub0.sign) {
            r.flags.invalid = true;
            r.sum = make_qnan(fmt);
        } else {
            r.sum = a0;
        }
        return r;
    }
    if (ua0.cls == FpClass::infinity) {
        r.sum = a0;
        return r;
    }
    if (ub0.cls == FpClass::infinity) {
        r.sum = b0;
        return r;
    }
    if (ua0.cls == FpClass::zero && ub0.cls == FpClass::zero) {
        int sign;
        if (ua0.sign == ub0.sign)
            sign = ua0.sign;
        else
            sign = mode == RoundingMode::toward_negative ? -1 : +1;
        r.sum = make_zero(fmt, sign);
        return r;
    }
    if (ua0.cls == FpClass::zero) {
        r.sum = b0;
        return r;
    }
    if (ub0.cls == FpClass::zero) {
        r.sum = a0;
        return r;
    }

    // Both finite nonzero. Order by lsb scale so a has the coarser grid.
    Unpacked ua = ua0, ub = ub0;
    int qa = ua.exponent - fmt.frac_bits;
    int qb = ub.exponent - fmt.frac_bits;
    if (qa < qb) {
        std::swap(ua, ub);
        std::swap(qa, qb);
    }
    const int d = qa - qb;
    const int p = fmt.precision();
    RoundFlags rf;

    if (d <= p + 2) {
        // Exact integer addition at the finer scale; fits well inside 128
        // bits since d <= p+2 and each significand has at most p+1 bits.
        const i128 S = i128(ua.sign) * (i128(ua.significand) << d) +
                       i128(ub.sign) * i128(ub.significand);
        if (S == 0) {
            const int sign = mode == RoundingMode::toward_negative ? -1 : +1;
            r.sum = make_zero(fmt, sign);
            return r;
        }
        const int s = S < 0 ? -1 : +1;
        const u128 mag = s < 0 ? u128(-S) : u128(S);
        r.sum = round_fixed(fmt, s, mag, qb, mode, rf);
        r.flags.inexact = rf.inexact;
        r.flags.overflow = rf.overflow;
        if (r.sum.is_finite() && rf.inexact) {
            const Unpacked us = unpack(r.sum);
            const int qs = us.exponent - fmt.frac_bits;
            // Inexact rounding always lands on a grid at least as coarse
            // as the operands'.
            assert(qs >= qb);
            const i128 err_int =
                S - i128(us.sign) * (i128(us.significand) << (qs - qb));
            if (err_int != 0) {
                const int es = err_int < 0 ? -1 : +1;
                const u128 emag = es < 0 ? u128(-err_int) : u128(err_int);
                RoundFlags ef;
                r.err = round_fixed(fmt, es, emag, qb,
                                    RoundingMode::nearest_even, ef);
                if (ef.inexact || ef.overflow) {
                    // Only reachable in directed rounding modes.
                    r.flags.err_unrepresentable = true;
                }
            }
        }
    } else {
        // The addends' grids are too far apart for b to reach the round
        // position of a. A surrogate with one low tail bit of the correct
        // sign reproduces the exact rounding decision in every mode.
        const int tail = ua.sign == ub.sign ? +1 : -1;
        const u128 mag = (u128(ua.significand) << 3) + tail;
        r.sum = round_fixed(fmt, ua.sign, mag, qa - 3, mode, rf);
        r.flags.inexact = true;
        r.flags.overflow = rf.overflow;
        if (r.sum.is_finite()) {
            const Unpacked us = unpack(r.sum);
            const int qs = us.exponent - fmt.frac_bits;
            const int qc = qs < qa ? qs : qa;
            const i128 diff =
                i128(ua.sign) * (i128(ua.significand) << (qa - qc)) -
                i128(us.sign) * (i128(us.significand) << (qs - qc));
            if (diff == 0) {
                // Sum is exactly a: the whole error is b, bit for bit.
                r.err = pack(fmt, ub);
            } else if (qc - qb + p + 3 <= 126) {
                const i128 err_int = (diff << (qc - qb)) +
                                     i128(ub.sign) * i128(ub.significand);
                const int es = err_int < 0 ? -1 : +1;
                const u128 emag = es < 0 ? u128(-err_int) : u128(err_int);
                RoundFlags ef;
                r.err = round_fixed(fmt, es, emag, qb,
                                    RoundingMode::nearest_even, ef);
                if (ef.inexact || ef.overflow)
                    r.flags.err_unrepresentable = true;
            } else {
                // b is vanishingly small next to the one-step difference:
                // the rounded error is the step itself.
                const int es = diff < 0 ? -1 : +1;
                const u128 emag = es < 0 ? u128(-diff) : u128(diff);
                RoundFlags ef;
                r.err = round_fixed(fmt, es, emag, qc,
                                    RoundingMode::nearest_even, ef);
                r.flags.err_unrepresentable = true;
            }
        }
    }

    if (!r.sum.is_finite()) r.err = make_zero(fmt);
    const Unpacked usum = unpack(r.sum);
    const Unpacked uerr = unpack(r.err);
    if (usum.cls == FpClass::subnormal || uerr.cls == FpClass::subnormal)
        r.flags.subnormal = true;
    return r;
}

double ulp_of(const PackedFloat& x) {
    const Unpacked u = unpack(x);
    if (u.cls == FpClass::zero || u.cls == FpClass::subnormal)
        return std::ldexp(1.0, x.fmt.min_scale());
    return std::ldexp(1.0, u.exponent - x.fmt.frac_bits);
}

} // namespace rebits
