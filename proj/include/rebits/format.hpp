#ifndef REBITS_FORMAT_HPP
#define REBITS_FORMAT_HPP

#include <bit>
#include <cstdint>
#include <string>

namespace rebits {

// A parameterized IEEE-754 binary interchange format: 1 sign bit,
// exp_bits of biased exponent, frac_bits of stored fraction.
struct FloatFormat {
    int exp_bits;
    int frac_bits;

    constexpr int precision() const { return frac_bits + 1; }
    constexpr int bias() const { return (1 << (exp_bits - 1)) - 1; }
    constexpr int emax() const { return bias(); }
    constexpr int emin() const { return 1 - bias(); }
    constexpr int width() const { return exp_bits + frac_bits + 1; }
    // Scale of the least significant bit of the subnormal grid.
    constexpr int min_scale() const { return emin() - frac_bits; }

    constexpr bool valid() const {
        return exp_bits >= 2 && frac_bits >= 1 && width() <= 64;
    }

    constexpr std::uint64_t exp_mask() const {
        return (std::uint64_t{1} << exp_bits) - 1;
    }
    constexpr std::uint64_t frac_mask() const {
        return (std::uint64_t{1} << frac_bits) - 1;
    }
    constexpr std::uint64_t bits_mask() const {
        return width() == 64 ? ~std::uint64_t{0}
                             : (std::uint64_t{1} << width()) - 1;
    }

    static constexpr FloatFormat binary32() { return {8, 23}; }
    static constexpr FloatFormat binary64() { return {11, 52}; }

    bool operator==(const FloatFormat&) const = default;
};

// A bit pattern in a given format. All arithmetic in softfp operates on
// these; the layout is sign | biased exponent | fraction.
struct PackedFloat {
    FloatFormat fmt;
    std::uint64_t bits;

    constexpr int sign_bit() const {
        return static_cast<int>(bits >> (fmt.width() - 1)) & 1;
    }
    constexpr std::uint64_t exp_field() const {
        return (bits >> fmt.frac_bits) & fmt.exp_mask();
    }
    constexpr std::uint64_t frac_field() const { return bits & fmt.frac_mask(); }

    bool is_nan() const {
        return exp_field() == fmt.exp_mask() && frac_field() != 0;
    }
    bool is_inf() const {
        return exp_field() == fmt.exp_mask() && frac_field() == 0;
    }
    bool is_finite() const { return exp_field() != fmt.exp_mask(); }
    bool is_zero() const { return exp_field() == 0 && frac_field() == 0; }

    bool operator==(const PackedFloat&) const = default;
};

enum class FpClass { zero, subnormal, normal, infinity, nan };

// Sign/class/exponent/significand decomposition with the implicit leading
// bit made explicit. For normals the significand lies in
// [2^frac_bits, 2^(frac_bits+1)); for subnormals the exponent is emin.
// For NaN the significand holds the fraction field (payload).
struct Unpacked {
    int sign;   // +1 or -1
    FpClass cls;
    int exponent;
    std::uint64_t significand;
};

Unpacked unpack(const PackedFloat& x);
PackedFloat pack(const FloatFormat& fmt, const Unpacked& u);

PackedFloat make_zero(const FloatFormat& fmt, int sign = +1);
PackedFloat make_inf(const FloatFormat& fmt, int sign);
PackedFloat make_qnan(const FloatFormat& fmt);
PackedFloat max_finite(const FloatFormat& fmt, int sign);

// Bit-exact conversions to and from the host's native formats.
inline PackedFloat from_host(float x) {
    return {FloatFormat::binary32(), std::bit_cast<std::uint32_t>(x)};
}
inline PackedFloat from_host(double x) {
    return {FloatFormat::binary64(), std::bit_cast<std::uint64_t>(x)};
}
inline float to_host_f32(const PackedFloat& x) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(x.bits));
}
inline double to_host_f64(const PackedFloat& x) {
    return std::bit_cast<double>(x.bits);
}

// Exact value of a finite PackedFloat as a host double. Exact whenever the
// format fits inside binary64 (every format with frac_bits <= 52 and
// exponent range within binary64's, e.g. all the small test formats and
// binary32).
double value_as_double(const PackedFloat& x);

std::string format_name(const FloatFormat& fmt);
bool parse_format(const std::string& name, FloatFormat& out);

} // namespace rebits

#endif
