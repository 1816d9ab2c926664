#include "rebits/exact_acc.hpp"

#include <cassert>
#include <climits>
#include <cmath>
#include <stdexcept>

namespace rebits {

namespace {
using u128 = unsigned __int128;
}

void ExactAccumulator::add_scaled(int sign, u128 mag, int scale) {
    if (mag == 0) return;
    const int pos = scale - lsb_scale;
    assert(pos >= 0);
    const int limb = pos / 64;
    const int off = pos % 64;
    assert(limb + 3 < limb_count);

    std::uint64_t part[3];
    if (off == 0) {
        part[0] = static_cast<std::uint64_t>(mag);
        part[1] = static_cast<std::uint64_t>(mag >> 64);
        part[2] = 0;
    } else {
        part[0] = static_cast<std::uint64_t>(mag << off);
        part[1] = static_cast<std::uint64_t>(mag >> (64 - off));
        part[2] = static_cast<std::uint64_t>((mag >> 64) >> (64 - off));
    }

    if (sign >= 0) {
        unsigned carry = 0;
        for (int i = 0; i < 3; ++i) {
            const std::uint64_t prev = limbs_[limb + i];
            limbs_[limb + i] += part[i] + carry;
            carry = (limbs_[limb + i] < prev ||
                     (carry && limbs_[limb + i] == prev))
                        ? 1
                        : 0;
        }
        for (int i = limb + 3; carry && i < limb_count; ++i) {
            ++limbs_[i];
            carry = limbs_[i] == 0 ? 1 : 0;
        }
    } else {
        unsigned borrow = 0;
        for (int i = 0; i < 3; ++i) {
            const std::uint64_t prev = limbs_[limb + i];
            limbs_[limb + i] -= part[i] + borrow;
            borrow = (prev < part[i] || (borrow && prev == part[i])) ? 1 : 0;
        }
        for (int i = limb + 3; borrow && i < limb_count; ++i) {
            borrow = limbs_[i] == 0 ? 1 : 0;
            --limbs_[i];
        }
    }
}

void ExactAccumulator::add(const PackedFloat& x) {
    const Unpacked u = unpack(x);
    switch (u.cls) {
    case FpClass::zero:
        return;
    case FpClass::infinity:
    case FpClass::nan:
        throw std::domain_error("ExactAccumulator: non-finite input");
    default:
        add_scaled(u.sign, u.significand, u.exponent - x.fmt.frac_bits);
    }
}

void ExactAccumulator::add(double x) {
    if (!std::isfinite(x))
        throw std::domain_error("ExactAccumulator: non-finite input");
    add(from_host(x));
}

void ExactAccumulator::add(float x) {
    if (!std::isfinite(x))
        throw std::domain_error("ExactAccumulator: non-finite input");
    add(from_host(x));
}

ExactAccumulator& ExactAccumulator::merge(const ExactAccumulator& other) {
    unsigned carry = 0;
    for (int i = 0; i < limb_count; ++i) {
        const std::uint64_t prev = limbs_[i];
        limbs_[i] += other.limbs_[i] + carry;
        carry =
            (limbs_[i] < prev || (carry && limbs_[i] == prev)) ? 1 : 0;
    }
    return *this;
}

void ExactAccumulator::negate() {
    unsigned carry = 1;
    for (int i = 0; i < limb_count; ++i) {
        limbs_[i] = ~limbs_[i] + carry;
        carry = (carry && limbs_[i] == 0) ? 1 : 0;
    }
}

bool ExactAccumulator::is_zero() const {
    for (auto w : limbs_)
        if (w) return false;
    return true;
}

int ExactAccumulator::sign() const {
    if (limbs_[limb_count - 1] >> 63) return -1;
    return is_zero() ? 0 : +1;
}

int ExactAccumulator::msb_exponent() const {
    ExactAccumulator tmp = *this;
    if (sign() < 0) tmp.negate();
    for (int i = limb_count - 1; i >= 0; --i) {
        if (tmp.limbs_[i]) {
            int b = 63;
            while (!(tmp.limbs_[i] >> b)) --b;
            return lsb_scale + i * 64 + b;
        }
    }
    return INT_MIN;
}

PackedFloat ExactAccumulator::round(const FloatFormat& fmt,
                                    RoundingMode mode) const {
    const int s = sign();
    if (s == 0) return make_zero(fmt);
    ExactAccumulator tmp = *this;
    if (s < 0) tmp.negate();

    int top = 0;
    for (int i = limb_count - 1; i >= 0; --i) {
        if (tmp.limbs_[i]) {
            int b = 63;
            while (!(tmp.limbs_[i] >> b)) --b;
            top = i * 64 + b;
            break;
        }
    }

    // Take up to 111 magnitude bits plus a sticky marker for the rest;
    // that is always enough to decide correct rounding for p <= 62.
    const int lo = top >= 111 ? top - 111 : 0;
    u128 mag = 0;
    for (int bit = top; bit >= lo; --bit) {
        mag <<= 1;
        mag |= (tmp.limbs_[bit / 64] >> (bit % 64)) & 1;
    }
    bool sticky = false;
    for (int i = 0; i < lo / 64 && !sticky; ++i)
        if (tmp.limbs_[i]) sticky = true;
    if (!sticky && lo > 0) {
        const std::uint64_t below =
            tmp.limbs_[lo / 64] & ((std::uint64_t{1} << (lo % 64)) - 1);
        if (below) sticky = true;
    }

    RoundFlags rf;
    return round_wide(fmt, s, mag, lsb_scale + lo, sticky, mode, rf);
}

} // namespace rebits
