#ifndef REBITS_EXACT_ACC_HPP
#define REBITS_EXACT_ACC_HPP

#include "rebits/format.hpp"
#include "rebits/softfp.hpp"

#include <array>
#include <cstdint>

namespace rebits {

// Wide two's-complement fixed-point accumulator: the in-repo gold standard.
// 2304 bits spanning 2^-1152 .. 2^1151 cover the full binary64 range
// (subnormals included) with more than 64 guard bits, so any sequence of
// up to 2^60 finite inputs accumulates with no rounding ever.
class ExactAccumulator {
public:
    static constexpr int lsb_scale = -1152;
    static constexpr int limb_count = 36;

    ExactAccumulator() = default;

    // Non-finite inputs are rejected.
    void add(double x);
    void add(float x);
    void add(const PackedFloat& x);

    // Exact signed addition of mag * 2^scale. Building block for the
    // float overloads and for exact-product oracles in tests.
    void add_scaled(int sign, unsigned __int128 mag, int scale);

    // Exact in-place addition of another accumulator.
    ExactAccumulator& merge(const ExactAccumulator& other);

    void negate();
    void clear() { limbs_.fill(0); }

    bool is_zero() const;
    int sign() const; // -1, 0, +1
    // floor(log2 |value|); meaningless when zero (returns INT_MIN).
    int msb_exponent() const;

    // Correctly rounded conversion; overflow produces infinity.
    PackedFloat round(const FloatFormat& fmt,
                      RoundingMode mode = RoundingMode::nearest_even) const;
    double round_f64() const { return to_host_f64(round(FloatFormat::binary64())); }
    float round_f32() const { return to_host_f32(round(FloatFormat::binary32())); }

    bool operator==(const ExactAccumulator&) const = default;

private:
    // Little-endian limbs, two's complement across the whole array.
    std::array<std::uint64_t, limb_count> limbs_{};
};

} // namespace rebits

#endif
