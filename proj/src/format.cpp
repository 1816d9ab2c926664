#include "rebits/format.hpp"

#include <cmath>
#include <cstdio>

namespace rebits {

Unpacked unpack(const PackedFloat& x) {
    const FloatFormat& fmt = x.fmt;
    Unpacked u;
    u.sign = x.sign_bit() ? -1 : +1;
    const std::uint64_t e = x.exp_field();
    const std::uint64_t f = x.frac_field();
    if (e == fmt.exp_mask()) {
        if (f == 0) {
            u.cls = FpClass::infinity;
            u.exponent = 0;
            u.significand = 0;
        } else {
            u.cls = FpClass::nan;
            u.exponent = 0;
            u.significand = f; // payload, preserved through pack
        }
    } else if (e == 0) {
        if (f == 0) {
            u.cls = FpClass::zero;
            u.exponent = 0;
            u.significand = 0;
        } else {
            u.cls = FpClass::subnormal;
            u.exponent = fmt.emin();
            u.significand = f;
        }
    } else {
        u.cls = FpClass::normal;
        u.exponent = static_cast<int>(e) - fmt.bias();
        u.significand = f | (std::uint64_t{1} << fmt.frac_bits);
    }
    return u;
}

PackedFloat pack(const FloatFormat& fmt, const Unpacked& u) {
    const std::uint64_t sign = u.sign < 0 ? 1 : 0;
    std::uint64_t e = 0;
    std::uint64_t f = 0;
    switch (u.cls) {
    case FpClass::zero:
        break;
    case FpClass::subnormal:
        f = u.significand & fmt.frac_mask();
        break;
    case FpClass::normal:
        e = static_cast<std::uint64_t>(u.exponent + fmt.bias());
        f = u.significand & fmt.frac_mask();
        break;
    case FpClass::infinity:
        e = fmt.exp_mask();
        break;
    case FpClass::nan:
        e = fmt.exp_mask();
        f = u.significand & fmt.frac_mask();
        if (f == 0) f = std::uint64_t{1} << (fmt.frac_bits - 1);
        break;
    }
    const std::uint64_t bits =
        (sign << (fmt.width() - 1)) | (e << fmt.frac_bits) | f;
    return {fmt, bits};
}

PackedFloat make_zero(const FloatFormat& fmt, int sign) {
    return {fmt, sign < 0 ? std::uint64_t{1} << (fmt.width() - 1) : 0};
}

PackedFloat make_inf(const FloatFormat& fmt, int sign) {
    std::uint64_t bits = fmt.exp_mask() << fmt.frac_bits;
    if (sign < 0) bits |= std::uint64_t{1} << (fmt.width() - 1);
    return {fmt, bits};
}

PackedFloat make_qnan(const FloatFormat& fmt) {
    std::uint64_t bits = (fmt.exp_mask() << fmt.frac_bits) |
                         (std::uint64_t{1} << (fmt.frac_bits - 1));
    return {fmt, bits};
}

PackedFloat max_finite(const FloatFormat& fmt, int sign) {
    std::uint64_t bits =
        ((fmt.exp_mask() - 1) << fmt.frac_bits) | fmt.frac_mask();
    if (sign < 0) bits |= std::uint64_t{1} << (fmt.width() - 1);
    return {fmt, bits};
}

double value_as_double(const PackedFloat& x) {
    const Unpacked u = unpack(x);
    switch (u.cls) {
    case FpClass::zero:
        return u.sign < 0 ? -0.0 : 0.0;
    case FpClass::infinity:
        return u.sign < 0 ? -HUGE_VAL : HUGE_VAL;
    case FpClass::nan:
        return std::nan("");
    default:
        return u.sign *
               std::ldexp(static_cast<double>(u.significand),
                          u.exponent - x.fmt.frac_bits);
    }
}

std::string format_name(const FloatFormat& fmt) {
    if (fmt == FloatFormat::binary32()) return "f32";
    if (fmt == FloatFormat::binary64()) return "f64";
    char buf[32];
    std::snprintf(buf, sizeof buf, "e%dm%d", fmt.exp_bits, fmt.frac_bits);
    return buf;
}

bool parse_format(const std::string& name, FloatFormat& out) {
    if (name == "f32" || name == "binary32") {
        out = FloatFormat::binary32();
        return true;
    }
    if (name == "f64" || name == "binary64") {
        out = FloatFormat::binary64();
        return true;
    }
    int e = 0, m = 0;
    if (std::sscanf(name.c_str(), "e%dm%d", &e, &m) == 2) {
        FloatFormat fmt{e, m};
        if (fmt.valid()) {
            out = fmt;
            return true;
        }
    }
    return false;
}

} // namespace rebits
