#ifndef REBITS_KERNELS_HPP
#define REBITS_KERNELS_HPP

#include "rebits/accum.hpp"
#include "rebits/exact_acc.hpp"
#include "rebits/format.hpp"
#include "rebits/opcount.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rebits {

// Summation strategies a kernel can run under. The oracle (exact
// superaccumulator) is always available as reference.
enum class Scheme { naive, rebits, kahan, priest, cascade, dd, dd_rebits, oracle };

struct SchemeSpec {
    Scheme kind = Scheme::naive;
    FoldPolicy policy; // meaningful for rebits only

    bool operator==(const SchemeSpec&) const = default;
};

const char* scheme_name(Scheme s);
std::string scheme_spec_name(const SchemeSpec& s);
// Accepts "naive", "rebits", "rebits:fold=1000", "rebits:fold=none", ...
bool parse_scheme(const std::string& text, SchemeSpec& out);

struct ResultRecord {
    std::string kernel;
    std::string scheme;
    std::string format;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::string policy; // "" when not applicable, else "none" or k
    std::string order;  // traversal order label, "" when not applicable
    std::uint64_t partitions = 0;
    double value = 0;
    double abs_err = 0;
    double rel_err = 0; // NaN when the oracle value is zero
    OpCounters ops;
    bool error = false;         // per-record failure (poisoned accumulator)
    std::string error_detail;
};

enum class Order { row_first, reverse_row_first, col_first, reverse_col_first };
const char* order_name(Order o);
bool parse_order(const std::string& text, Order& out);

struct Grid {
    int rows = 120;
    int cols = 64;
    std::vector<double> data; // row-major

    double at(int r, int c) const { return data[std::size_t(r) * cols + c]; }
};

namespace kernels {

// ---- deterministic generators -------------------------------------------

// Skewed positive vector: first ceil(3n/4) values large, remainder small,
// with the large/small ulp gap exceeding the precision so a naive running
// sum stalls. Every value is exactly representable in fmt.
std::vector<double> gen_skewed_positive(std::uint64_t n, std::uint64_t seed,
                                        const FloatFormat& fmt);

// Ill-conditioned mixed-sign grid: a small +-1-scale signal on a 2^-20
// grid overlaid with exactly cancelling pairs of ~2^44-scale values. The
// exact sum is forced to a fixed small target, so the summation condition
// number exceeds 1e15.
Grid gen_grid(std::uint64_t seed, int rows = 120, int cols = 64);

// ---- scheme runner -------------------------------------------------------

// Sums pre-computed terms under one scheme. Terms are shared across
// schemes by the callers, so changing the scheme never changes a term.
struct SchemeResult {
    double value = 0;
    OpCounters ops;
    bool poisoned = false;
    std::size_t poison_index = 0;
};

SchemeResult run_scheme_f32(std::span<const float> terms, const SchemeSpec& s);
SchemeResult run_scheme_f64(std::span<const double> terms, const SchemeSpec& s);

// Exact sum of the identical terms (the oracle route).
ExactAccumulator exact_sum_f32(std::span<const float> terms);
ExactAccumulator exact_sum_f64(std::span<const double> terms);

// ---- kernels -------------------------------------------------------------

std::vector<ResultRecord> sum_experiment(std::uint64_t n, std::uint64_t seed,
                                         const FloatFormat& fmt,
                                         std::span<const SchemeSpec> schemes);

// Deterministic parallel partial sums: contiguous partitions, each summed
// with the fold policy (no finalize), merged in fixed partition order,
// then finalized. Result is a pure function of (v, partitions, policy).
struct ParallelResult {
    double value = 0;
    OpCounters ops;
    bool poisoned = false;
    std::size_t poison_index = 0;
};
ParallelResult parallel_sum_f32(std::span<const float> v,
                                std::uint64_t partitions, FoldPolicy policy,
                                std::uint64_t workers = 0);
ParallelResult parallel_sum_f64(std::span<const double> v,
                                std::uint64_t partitions, FoldPolicy policy,
                                std::uint64_t workers = 0);

std::vector<ResultRecord> grid_sum_orders(const Grid& g, const SchemeSpec& s,
                                          std::uint64_t seed);

// 2-norm with squares in the scheme's format; the oracle accumulates the
// exact widened squares.
std::vector<ResultRecord> two_norm(std::uint64_t n, std::uint64_t seed,
                                   const FloatFormat& fmt,
                                   std::span<const SchemeSpec> schemes);

double trapezoid_integrand(double x);
double trapezoid_closed_form(double x);
std::vector<ResultRecord> trapezoid_integrate(double x_max,
                                              std::uint64_t steps,
                                              const FloatFormat& fmt,
                                              std::span<const SchemeSpec> schemes);
// Prefix profile at `samples` evenly spaced points, for order-of-magnitude
// comparisons of drift along the integration range.
struct TrapezoidSample {
    double x;
    double naive, rebits, oracle;
};
std::vector<TrapezoidSample> trapezoid_profile(double x_max,
                                               std::uint64_t steps,
                                               std::uint64_t samples,
                                               const FloatFormat& fmt);

struct NBodySystem {
    std::vector<double> px, py, pz, q;
};
NBodySystem gen_nbody(std::uint64_t n, std::uint64_t seed);
// The shared pairwise terms q_i q_j / |r_i - r_j| (i < j) in fmt, widened
// to double for inspection.
std::vector<double> nbody_pair_terms(const NBodySystem& sys,
                                     const FloatFormat& fmt);
std::vector<ResultRecord> nbody_potential(std::uint64_t n, std::uint64_t seed,
                                          const FloatFormat& fmt,
                                          std::span<const SchemeSpec> schemes);

struct McParams {
    double S0 = 100.0;
    double K = 100.0;
    double r = 0.1;
    double sigma = 0.25;
    double T = 1.0;
};
std::vector<ResultRecord> mc_euro_price(std::uint64_t paths,
                                        std::uint64_t seed,
                                        const McParams& params,
                                        const FloatFormat& fmt,
                                        std::span<const SchemeSpec> schemes);

// Exhaustive adder verification for small formats (total width <= 16).
struct VerifyReport {
    std::uint64_t pairs = 0;
    std::uint64_t failures = 0;
    std::string first_failure;
};
VerifyReport verify_adder_exhaustive(const FloatFormat& fmt,
                                     RoundingMode mode = RoundingMode::nearest_even);

} // namespace kernels
} // namespace rebits

#endif
