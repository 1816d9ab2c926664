#ifndef REBITS_SOFTFP_HPP
#define REBITS_SOFTFP_HPP

#include "rebits/format.hpp"

namespace rebits {

enum class RoundingMode {
    nearest_even, // default everywhere
    toward_zero,
    toward_positive,
    toward_negative,
};

struct AddFlags {
    bool inexact = false;
    bool overflow = false;
    bool invalid = false;
    // Set only in directed rounding modes when the exact addition error does
    // not fit the format; never set under nearest-even with a finite sum.
    bool err_unrepresentable = false;
    // Reporting bit for parity studies against hardware that rejects
    // subnormals: set when an operand, the sum, or the error is subnormal.
    bool subnormal = false;

    bool operator==(const AddFlags&) const = default;
};

// The add-with-error contract: when sum is finite and err_unrepresentable is
// clear, value(a) + value(b) == value(sum) + value(err) exactly. err is
// never infinity and never NaN; when sum is non-finite, err is +0.0.
struct AddResult {
    PackedFloat sum;
    PackedFloat err;
    AddFlags flags;
};

struct RoundFlags {
    bool inexact = false;
    bool overflow = false;
};

// Correctly round sign * sig * 2^lsb_exp (plus a sticky bit standing for
// nonzero discarded bits strictly below the lsb) into fmt.
// Overflow produces signed infinity under nearest-even and the largest
// finite value in the modes that truncate toward it.
PackedFloat round_pack(const FloatFormat& fmt, int sign, std::uint64_t sig,
                       int lsb_exp, bool sticky, RoundingMode mode,
                       RoundFlags& flags);

// IEEE-754 addition returning both the correctly rounded sum and the exact
// rounding error (the emulated FPERR register value).
AddResult add_with_err(const PackedFloat& a, const PackedFloat& b,
                       RoundingMode mode = RoundingMode::nearest_even);

// ulp of a finite nonzero value in its own format.
double ulp_of(const PackedFloat& x);

// Wide variant of round_pack for callers holding more than 64 magnitude
// bits (the exact accumulator). mag must leave one spare high bit when
// sticky is set.
PackedFloat round_wide(const FloatFormat& fmt, int sign,
                       unsigned __int128 mag, int lsb_exp, bool sticky,
                       RoundingMode mode, RoundFlags& flags);

} // namespace rebits

#endif
