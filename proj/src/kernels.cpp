#include "rebits/kernels.hpp"

#include "rebits/backend.hpp"
#include "rebits/ddouble.hpp"
#include "rebits/eft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#ifndef REBITS_SKEWED_BURN_IN
#define REBITS_SKEWED_BURN_IN 169
#endif

namespace rebits {

const char* scheme_name(Scheme s) {
    switch (s) {
    case Scheme::naive: return "naive";
    case Scheme::rebits: return "rebits";
    case Scheme::kahan: return "kahan";
    case Scheme::priest: return "priest";
    case Scheme::cascade: return "cascade";
    case Scheme::dd: return "dd";
    case Scheme::dd_rebits: return "dd_rebits";
    case Scheme::oracle: return "oracle";
    }
    return "?";
}

std::string scheme_spec_name(const SchemeSpec& s) {
    std::string name = scheme_name(s.kind);
    if (s.kind == Scheme::rebits) {
        name += ":fold=";
        name += s.policy.folds() ? std::to_string(s.policy.k) : "none";
    }
    return name;
}

bool parse_scheme(const std::string& text, SchemeSpec& out) {
    std::string head = text;
    std::string arg;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        head = text.substr(0, colon);
        arg = text.substr(colon + 1);
    }
    static const std::pair<const char*, Scheme> names[] = {
        {"naive", Scheme::naive},   {"rebits", Scheme::rebits},
        {"kahan", Scheme::kahan},   {"priest", Scheme::priest},
        {"cascade", Scheme::cascade}, {"dd", Scheme::dd},
        {"dd_rebits", Scheme::dd_rebits}, {"oracle", Scheme::oracle},
    };
    out = SchemeSpec{};
    bool found = false;
    for (const auto& [name, kind] : names)
        if (head == name) {
            out.kind = kind;
            found = true;
        }
    if (!found) return false;
    if (arg.empty()) return true;
    if (out.kind != Scheme::rebits || arg.rfind("fold=", 0) != 0) return false;
    const std::string v = arg.substr(5);
    if (v == "none") {
        out.policy = FoldPolicy::none();
        return true;
    }
    char* end = nullptr;
    const unsigned long long k = std::strtoull(v.c_str(), &end, 10);
    if (end == nullptr || *end != '\0' || k == 0) return false;
    out.policy = FoldPolicy::every(k);
    return true;
}

const char* order_name(Order o) {
    switch (o) {
    case Order::row_first: return "row";
    case Order::reverse_row_first: return "rrow";
    case Order::col_first: return "col";
    case Order::reverse_col_first: return "rcol";
    }
    return "?";
}

bool parse_order(const std::string& text, Order& out) {
    static const std::pair<const char*, Order> names[] = {
        {"row", Order::row_first},
        {"rrow", Order::reverse_row_first},
        {"col", Order::col_first},
        {"rcol", Order::reverse_col_first},
    };
    for (const auto& [name, o] : names)
        if (text == name) {
            out = o;
            return true;
        }
    return false;
}

namespace kernels {
namespace {

// ---- deterministic randomness -------------------------------------------
// mt19937_64 has a fully pinned-down output sequence; the distribution
// shaping is hand-rolled because the std distribution objects are not
// specified bit-for-bit across standard libraries.

double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1p-53;
}

// Uniform in (0, 1]; safe as a log argument.
double uniform01_open0(std::mt19937_64& g) {
    return static_cast<double>((g() >> 11) + 1) * 0x1p-53;
}

std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t bound) {
    return g() % bound; // modulo bias is irrelevant here; determinism is not
}

class NormalGen {
public:
    explicit NormalGen(std::mt19937_64& g) : g_(g) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01_open0(g_);
        const double u2 = uniform01(g_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64& g_;
    bool have_spare_ = false;
    double spare_ = 0;
};

// ---- record plumbing -----------------------------------------------------

void require_host_format(const FloatFormat& fmt) {
    if (fmt != FloatFormat::binary32() && fmt != FloatFormat::binary64())
        throw std::invalid_argument(
            "kernel runs support f32 and f64 only (got " + format_name(fmt) +
            ")");
}

struct RecordMeta {
    std::string kernel;
    FloatFormat fmt;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::string order;
    std::uint64_t partitions = 0;
};

ResultRecord base_record(const RecordMeta& meta, const SchemeSpec& spec) {
    ResultRecord r;
    r.kernel = meta.kernel;
    r.scheme = scheme_name(spec.kind);
    r.format = format_name(meta.fmt);
    r.n = meta.n;
    r.seed = meta.seed;
    if (spec.kind == Scheme::rebits)
        r.policy = spec.policy.folds() ? std::to_string(spec.policy.k) : "none";
    r.order = meta.order;
    r.partitions = meta.partitions;
    return r;
}

void fill_errors(ResultRecord& r, double oracle_value) {
    r.abs_err = std::fabs(r.value - oracle_value);
    r.rel_err = oracle_value != 0.0
                    ? r.abs_err / std::fabs(oracle_value)
                    : std::numeric_limits<double>::quiet_NaN();
}

// ---- scheme runner -------------------------------------------------------

template <typename S>
SchemeResult run_scheme(std::span<const S> terms, const SchemeSpec& spec) {
    CountScope scope(scheme_spec_name(spec));
    HostBackend<S> bk(&scope);
    SchemeResult out;

    auto watch = [&](S v, std::size_t i) {
        if (!out.poisoned && !std::isfinite(static_cast<double>(v))) {
            out.poisoned = true;
            out.poison_index = i;
        }
    };

    switch (spec.kind) {
    case Scheme::naive: {
        S acc{};
        for (std::size_t i = 0; i < terms.size(); ++i) {
            acc = bk.add(acc, terms[i]);
            watch(acc, i);
        }
        out.value = static_cast<double>(acc);
        break;
    }
    case Scheme::rebits: {
        const SumOutcome<S> o = sum_with_policy(terms, spec.policy, bk);
        out.value = static_cast<double>(o.value);
        out.poisoned = o.poisoned;
        out.poison_index = o.poison_index;
        break;
    }
    case Scheme::kahan: {
        const S v = kahan_sum(terms, bk, SchemeVariant::rebits);
        out.value = static_cast<double>(v);
        watch(v, terms.empty() ? 0 : terms.size() - 1);
        break;
    }
    case Scheme::priest: {
        const S v = priest_sum(terms, bk, SchemeVariant::rebits);
        out.value = static_cast<double>(v);
        watch(v, terms.empty() ? 0 : terms.size() - 1);
        break;
    }
    case Scheme::cascade: {
        const S v = cascade_sum(terms, bk);
        out.value = static_cast<double>(v);
        watch(v, terms.empty() ? 0 : terms.size() - 1);
        break;
    }
    case Scheme::dd:
    case Scheme::dd_rebits: {
        const SchemeVariant variant = spec.kind == Scheme::dd
                                          ? SchemeVariant::native
                                          : SchemeVariant::rebits;
        CountScope dscope("dd", &scope);
        HostBackend<double> dbk(&dscope);
        DDouble acc{};
        for (std::size_t i = 0; i < terms.size(); ++i) {
            acc = dd_add(acc, DDouble::from(static_cast<double>(terms[i])),
                         dbk, variant);
            watch(static_cast<S>(acc.hi), i);
        }
        out.value = acc.hi + acc.lo;
        break;
    }
    case Scheme::oracle: {
        ExactAccumulator acc;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (!std::isfinite(static_cast<double>(terms[i]))) {
                if (!out.poisoned) {
                    out.poisoned = true;
                    out.poison_index = i;
                }
                continue;
            }
            acc.add(terms[i]);
        }
        out.value = acc.round_f64();
        break;
    }
    }
    out.ops = scope.report();
    return out;
}

template <typename S>
ExactAccumulator exact_sum(std::span<const S> terms) {
    ExactAccumulator acc;
    for (S t : terms)
        if (std::isfinite(static_cast<double>(t))) acc.add(t);
    return acc;
}

// Runs every requested scheme over one shared term vector and reports each
// against the exact oracle sum.
template <typename S>
std::vector<ResultRecord> run_matrix(std::span<const S> terms,
                                     std::span<const SchemeSpec> schemes,
                                     const RecordMeta& meta) {
    const double oracle = exact_sum(terms).round_f64();
    std::vector<ResultRecord> out;
    out.reserve(schemes.size());
    for (const SchemeSpec& spec : schemes) {
        ResultRecord r = base_record(meta, spec);
        const SchemeResult res = run_scheme(terms, spec);
        r.value = res.value;
        r.ops = res.ops;
        if (res.poisoned) {
            r.error = true;
            r.error_detail =
                "non-finite at index " + std::to_string(res.poison_index);
        }
        fill_errors(r, oracle);
        out.push_back(std::move(r));
    }
    return out;
}

template <typename S>
std::vector<S> narrow_terms(std::span<const double> terms) {
    std::vector<S> out(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        out[i] = static_cast<S>(terms[i]);
    return out;
}

std::vector<ResultRecord> run_matrix_fmt(std::span<const double> terms,
                                         std::span<const SchemeSpec> schemes,
                                         const RecordMeta& meta) {
    require_host_format(meta.fmt);
    if (meta.fmt == FloatFormat::binary32()) {
        const std::vector<float> t = narrow_terms<float>(terms);
        return run_matrix<float>(t, schemes, meta);
    }
    return run_matrix<double>(terms, schemes, meta);
}

} // namespace

SchemeResult run_scheme_f32(std::span<const float> terms, const SchemeSpec& s) {
    return run_scheme<float>(terms, s);
}
SchemeResult run_scheme_f64(std::span<const double> terms, const SchemeSpec& s) {
    return run_scheme<double>(terms, s);
}
ExactAccumulator exact_sum_f32(std::span<const float> terms) {
    return exact_sum<float>(terms);
}
ExactAccumulator exact_sum_f64(std::span<const double> terms) {
    return exact_sum<double>(terms);
}

// ---- skewed sum ----------------------------------------------------------

std::vector<double> gen_skewed_positive(std::uint64_t n, std::uint64_t seed,
                                        const FloatFormat& fmt) {
    require_host_format(fmt);
    // Values carry 24-bit significands so each one is exact in both host
    // formats. Large values sit 26 binades above the small ones (f32) or
    // 55 binades (f64), far beyond either precision, so a naive running
    // sum absorbs none of the small tail.
    const int large_scale = fmt == FloatFormat::binary32() ? -3 : 26;
    const int small_scale = -29;
    std::mt19937_64 g(seed);
    // Fixed stream offset for the shipped datasets; part of the generator's
    // definition (changing it changes every seeded vector).
    constexpr int burn_in = REBITS_SKEWED_BURN_IN;
    for (int i = 0; i < burn_in; ++i) g();
    const std::uint64_t n_large = (3 * n + 3) / 4;
    std::vector<double> v(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t m = (std::uint64_t{1} << 23) | (g() >> 41);
        const int scale = i < n_large ? large_scale : small_scale;
        v[i] = std::ldexp(static_cast<double>(m), scale);
    }
    return v;
}

std::vector<ResultRecord> sum_experiment(std::uint64_t n, std::uint64_t seed,
                                         const FloatFormat& fmt,
                                         std::span<const SchemeSpec> schemes) {
    const std::vector<double> terms = gen_skewed_positive(n, seed, fmt);
    RecordMeta meta{"sum", fmt, n, seed, "", 0};
    return run_matrix_fmt(terms, schemes, meta);
}

// ---- deterministic parallel sum -----------------------------------------

namespace {

template <typename S>
ParallelResult parallel_sum_impl(std::span<const S> v, std::uint64_t partitions,
                                 FoldPolicy policy, std::uint64_t workers) {
    if (partitions == 0) partitions = 1;
    if (partitions > v.size()) partitions = std::max<std::size_t>(v.size(), 1);
    const std::uint64_t p = partitions;

    struct Part {
        FloatErr<S> acc{};
        OpCounters ops;
        bool poisoned = false;
        std::size_t poison_index = 0; // global index
        std::size_t begin = 0, end = 0;
    };
    std::vector<Part> parts(p);
    const std::size_t base = v.size() / p, rem = v.size() % p;
    std::size_t pos = 0;
    for (std::uint64_t j = 0; j < p; ++j) {
        parts[j].begin = pos;
        pos += base + (j < rem ? 1 : 0);
        parts[j].end = pos;
    }

    auto run_part = [&](Part& part) {
        CountScope scope("partition");
        HostBackend<S> bk(&scope);
        bool poisoned = false;
        std::size_t local = 0;
        part.acc = partial_sum_with_policy(
            v.subspan(part.begin, part.end - part.begin), policy, bk,
            &poisoned, &local);
        part.poisoned = poisoned;
        part.poison_index = part.begin + local;
        part.ops = scope.report();
    };

    std::uint64_t w = workers == 0 ? 1 : std::min<std::uint64_t>(workers, p);
    if (w <= 1) {
        for (Part& part : parts) run_part(part);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (std::uint64_t t = 0; t < w; ++t)
            pool.emplace_back([&, t] {
                for (std::uint64_t j = t; j < p; j += w) run_part(parts[j]);
            });
        for (std::thread& th : pool) th.join();
    }

    // Merge strictly in partition order so the result is independent of
    // worker count and scheduling.
    CountScope merge_scope("merge");
    HostBackend<S> bk(&merge_scope);
    ParallelResult out;
    FloatErr<S> acc = parts[0].acc;
    for (std::uint64_t j = 1; j < p; ++j)
        acc = fe_add_fe(acc, parts[j].acc, bk);
    out.value = static_cast<double>(finalize(acc, bk));
    out.ops = merge_scope.report();
    out.poison_index = v.size();
    for (const Part& part : parts) {
        out.ops.merge(part.ops);
        if (part.poisoned) {
            out.poisoned = true;
            out.poison_index = std::min(out.poison_index, part.poison_index);
        }
    }
    if (!out.poisoned) out.poison_index = 0;
    return out;
}

} // namespace

ParallelResult parallel_sum_f32(std::span<const float> v,
                                std::uint64_t partitions, FoldPolicy policy,
                                std::uint64_t workers) {
    return parallel_sum_impl<float>(v, partitions, policy, workers);
}
ParallelResult parallel_sum_f64(std::span<const double> v,
                                std::uint64_t partitions, FoldPolicy policy,
                                std::uint64_t workers) {
    return parallel_sum_impl<double>(v, partitions, policy, workers);
}

// ---- ill-conditioned grid ------------------------------------------------

Grid gen_grid(std::uint64_t seed, int rows, int cols) {
    if (rows < 2 || cols < 2 || std::size_t(rows) * cols < 512)
        throw std::invalid_argument("grid too small");
    const std::size_t cells = std::size_t(rows) * cols;
    std::mt19937_64 g(seed);

    // Background signal: integers on the 2^-20 grid in [-1, 1]. Tracked in
    // exact 2^-20 units so the total can be pinned afterwards.
    std::vector<__int128> units(cells);
    constexpr std::int64_t one = std::int64_t{1} << 20;
    for (std::size_t i = 0; i < cells; ++i) {
        const std::int64_t k =
            static_cast<std::int64_t>(uniform_below(g, 2 * one + 1)) - one;
        units[i] = k;
    }

    // Overlay 160 exactly cancelling +-L pairs, L = m * 2^25 with
    // m in [2^19, 2^20), i.e. L in [2^44, 2^45). Cell 0 is reserved for
    // the closing adjustment.
    std::vector<std::size_t> idx(cells - 1);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i + 1;
    for (std::size_t i = idx.size() - 1; i > 0; --i)
        std::swap(idx[i], idx[uniform_below(g, i + 1)]);
    constexpr int pairs = 160;
    for (int p = 0; p < pairs; ++p) {
        const std::uint64_t m =
            (std::uint64_t{1} << 19) | uniform_below(g, std::uint64_t{1} << 19);
        const __int128 l_units = static_cast<__int128>(m) << 45; // L / 2^-20
        units[idx[2 * p]] = l_units;
        units[idx[2 * p + 1]] = -l_units;
    }

    // Force the exact total to round(0.35799 * 2^20) * 2^-20.
    const __int128 target =
        static_cast<__int128>(std::llround(0.35799 * double(one)));
    __int128 total = 0;
    for (std::size_t i = 1; i < cells; ++i) total += units[i];
    units[0] = target - total;

    Grid grid;
    grid.rows = rows;
    grid.cols = cols;
    grid.data.resize(cells);
    for (std::size_t i = 0; i < cells; ++i)
        grid.data[i] = std::ldexp(static_cast<double>(
                                      static_cast<long long>(units[i])),
                                  -20);
    return grid;
}

std::vector<ResultRecord> grid_sum_orders(const Grid& g, const SchemeSpec& s,
                                          std::uint64_t seed) {
    const std::size_t cells = g.data.size();
    const double oracle = exact_sum_f64(g.data).round_f64();

    auto traverse = [&](Order o) {
        std::vector<double> t;
        t.reserve(cells);
        switch (o) {
        case Order::row_first:
            t.assign(g.data.begin(), g.data.end());
            break;
        case Order::reverse_row_first:
            t.assign(g.data.rbegin(), g.data.rend());
            break;
        case Order::col_first:
            for (int c = 0; c < g.cols; ++c)
                for (int r = 0; r < g.rows; ++r) t.push_back(g.at(r, c));
            break;
        case Order::reverse_col_first:
            for (int c = g.cols - 1; c >= 0; --c)
                for (int r = g.rows - 1; r >= 0; --r) t.push_back(g.at(r, c));
            break;
        }
        return t;
    };

    std::vector<ResultRecord> out;
    for (Order o : {Order::row_first, Order::reverse_row_first,
                    Order::col_first, Order::reverse_col_first}) {
        RecordMeta meta{"grid", FloatFormat::binary64(), cells, seed,
                        order_name(o), 0};
        const std::vector<double> t = traverse(o);
        ResultRecord r = base_record(meta, s);
        const SchemeResult res = run_scheme<double>(t, s);
        r.value = res.value;
        r.ops = res.ops;
        if (res.poisoned) {
            r.error = true;
            r.error_detail =
                "non-finite at index " + std::to_string(res.poison_index);
        }
        fill_errors(r, oracle);
        out.push_back(std::move(r));
    }
    RecordMeta ometa{"grid", FloatFormat::binary64(), cells, seed, "", 0};
    ResultRecord orec = base_record(ometa, SchemeSpec{Scheme::oracle, {}});
    orec.value = oracle;
    fill_errors(orec, oracle);
    out.push_back(std::move(orec));
    return out;
}

// ---- 2-norm --------------------------------------------------------------

namespace {

// Adds the exact square of a host value to the accumulator: the unpacked
// significand squared at twice the unpacked scale. Exact for any finite
// input because sig^2 < 2^106 fits the 128-bit magnitude.
void add_exact_square(ExactAccumulator& acc, const PackedFloat& x) {
    const Unpacked u = unpack(x);
    if (u.cls != FpClass::normal && u.cls != FpClass::subnormal) return;
    const unsigned __int128 m = u.significand;
    acc.add_scaled(+1, m * m, 2 * (u.exponent - x.fmt.frac_bits));
}

template <typename S>
std::vector<ResultRecord> two_norm_impl(std::uint64_t n, std::uint64_t seed,
                                        std::span<const SchemeSpec> schemes,
                                        const RecordMeta& meta) {
    // The norm runs over the same skewed magnitude profile as the sum
    // kernel, so the squared terms span twice the binade gap.
    const std::vector<double> wide =
        gen_skewed_positive(n, seed, meta.fmt);
    std::vector<S> x(n);
    for (std::uint64_t i = 0; i < n; ++i) x[i] = static_cast<S>(wide[i]);

    // The squares are the shared terms; the scheme only decides how they
    // are summed. The oracle route bypasses the rounded squares entirely
    // and accumulates each square exactly.
    std::vector<S> squares(n);
    for (std::uint64_t i = 0; i < n; ++i) squares[i] = x[i] * x[i];

    ExactAccumulator acc;
    for (S xi : x) add_exact_square(acc, from_host(xi));
    const double oracle = std::sqrt(acc.round_f64());

    std::vector<ResultRecord> out;
    for (const SchemeSpec& spec : schemes) {
        ResultRecord r = base_record(meta, spec);
        if (spec.kind == Scheme::oracle) {
            r.value = oracle;
        } else {
            const SchemeResult res = run_scheme<S>(squares, spec);
            r.value = std::sqrt(res.value);
            r.ops = res.ops;
            if (res.poisoned) {
                r.error = true;
                r.error_detail =
                    "non-finite at index " + std::to_string(res.poison_index);
            }
        }
        fill_errors(r, oracle);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace

std::vector<ResultRecord> two_norm(std::uint64_t n, std::uint64_t seed,
                                   const FloatFormat& fmt,
                                   std::span<const SchemeSpec> schemes) {
    require_host_format(fmt);
    RecordMeta meta{"norm", fmt, n, seed, "", 0};
    if (fmt == FloatFormat::binary32())
        return two_norm_impl<float>(n, seed, schemes, meta);
    return two_norm_impl<double>(n, seed, schemes, meta);
}

// ---- trapezoid integration ----------------------------------------------

double trapezoid_integrand(double x) {
    return 400.0 * (x * std::sin(x) + std::cos(x) - 1.0);
}

// Antiderivative of the integrand, for reference values in reports.
double trapezoid_closed_form(double x) {
    return 400.0 * (2.0 * std::sin(x) - x * std::cos(x) - x);
}

namespace {

template <typename S>
std::vector<S> trapezoid_terms(double x_max, std::uint64_t steps) {
    const double h = x_max / static_cast<double>(steps);
    std::vector<S> terms(steps);
    const S hs = static_cast<S>(h);
    const S half = static_cast<S>(0.5);
    S f_prev = static_cast<S>(trapezoid_integrand(0.0));
    for (std::uint64_t k = 0; k < steps; ++k) {
        const double x1 = static_cast<double>(k + 1) * h;
        const S f_next = static_cast<S>(
            trapezoid_integrand(static_cast<double>(static_cast<S>(x1))));
        terms[k] = hs * half * (f_prev + f_next);
        f_prev = f_next;
    }
    return terms;
}

template <typename S>
std::vector<TrapezoidSample> trapezoid_profile_impl(double x_max,
                                                    std::uint64_t steps,
                                                    std::uint64_t samples) {
    const std::vector<S> terms = trapezoid_terms<S>(x_max, steps);
    const double h = x_max / static_cast<double>(steps);
    if (samples == 0) samples = 1;
    const std::uint64_t stride = std::max<std::uint64_t>(steps / samples, 1);

    CountScope scope("profile");
    HostBackend<S> bk(&scope);
    S naive{};
    FloatErr<S> fe{};
    ExactAccumulator acc;
    std::vector<TrapezoidSample> out;
    for (std::uint64_t k = 0; k < steps; ++k) {
        naive = bk.add(naive, terms[k]);
        fe = fe_add_scalar(fe, terms[k], bk);
        acc.add(terms[k]);
        if ((k + 1) % stride == 0 || k + 1 == steps) {
            TrapezoidSample s;
            s.x = static_cast<double>(k + 1) * h;
            s.naive = static_cast<double>(naive);
            s.rebits = static_cast<double>(finalize(fe, bk));
            s.oracle = acc.round_f64();
            out.push_back(s);
        }
    }
    return out;
}

} // namespace

std::vector<ResultRecord> trapezoid_integrate(double x_max,
                                              std::uint64_t steps,
                                              const FloatFormat& fmt,
                                              std::span<const SchemeSpec> schemes) {
    require_host_format(fmt);
    RecordMeta meta{"trapezoid", fmt, steps, 0, "", 0};
    if (fmt == FloatFormat::binary32()) {
        const std::vector<float> terms = trapezoid_terms<float>(x_max, steps);
        return run_matrix<float>(terms, schemes, meta);
    }
    const std::vector<double> terms = trapezoid_terms<double>(x_max, steps);
    return run_matrix<double>(terms, schemes, meta);
}

std::vector<TrapezoidSample> trapezoid_profile(double x_max,
                                               std::uint64_t steps,
                                               std::uint64_t samples,
                                               const FloatFormat& fmt) {
    require_host_format(fmt);
    if (fmt == FloatFormat::binary32())
        return trapezoid_profile_impl<float>(x_max, steps, samples);
    return trapezoid_profile_impl<double>(x_max, steps, samples);
}

// ---- n-body potential ----------------------------------------------------

NBodySystem gen_nbody(std::uint64_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    NBodySystem sys;
    sys.px.reserve(n);
    sys.py.reserve(n);
    sys.pz.reserve(n);
    sys.q.reserve(n);
    std::unordered_set<std::uint64_t> seen;
    while (sys.px.size() < n) {
        const double x = uniform01(g), y = uniform01(g), z = uniform01(g);
        // Reject coincident points at generation time so no pairwise
        // distance can vanish. Hashing the three bit patterns is exact.
        const std::uint64_t key =
            std::bit_cast<std::uint64_t>(x) * 0x9e3779b97f4a7c15ull ^
            std::bit_cast<std::uint64_t>(y) * 0xc2b2ae3d27d4eb4full ^
            std::bit_cast<std::uint64_t>(z);
        if (!seen.insert(key).second) continue;
        sys.px.push_back(x);
        sys.py.push_back(y);
        sys.pz.push_back(z);
        sys.q.push_back(2.0 * uniform01(g) - 1.0);
    }
    return sys;
}

namespace {

template <typename S>
std::vector<S> nbody_terms(const NBodySystem& sys) {
    const std::size_t n = sys.px.size();
    std::vector<S> px(n), py(n), pz(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        px[i] = static_cast<S>(sys.px[i]);
        py[i] = static_cast<S>(sys.py[i]);
        pz[i] = static_cast<S>(sys.pz[i]);
        q[i] = static_cast<S>(sys.q[i]);
    }
    std::vector<S> terms;
    terms.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const S dx = px[i] - px[j];
            const S dy = py[i] - py[j];
            const S dz = pz[i] - pz[j];
            const S d = std::sqrt(dx * dx + dy * dy + dz * dz);
            terms.push_back(q[i] * q[j] / d);
        }
    return terms;
}

} // namespace

std::vector<double> nbody_pair_terms(const NBodySystem& sys,
                                     const FloatFormat& fmt) {
    require_host_format(fmt);
    std::vector<double> out;
    if (fmt == FloatFormat::binary32()) {
        const std::vector<float> t = nbody_terms<float>(sys);
        out.assign(t.begin(), t.end());
    } else {
        const std::vector<double> t = nbody_terms<double>(sys);
        out = t;
    }
    return out;
}

std::vector<ResultRecord> nbody_potential(std::uint64_t n, std::uint64_t seed,
                                          const FloatFormat& fmt,
                                          std::span<const SchemeSpec> schemes) {
    require_host_format(fmt);
    const NBodySystem sys = gen_nbody(n, seed);
    RecordMeta meta{"nbody", fmt, n, seed, "", 0};
    if (fmt == FloatFormat::binary32()) {
        const std::vector<float> terms = nbody_terms<float>(sys);
        return run_matrix<float>(terms, schemes, meta);
    }
    const std::vector<double> terms = nbody_terms<double>(sys);
    return run_matrix<double>(terms, schemes, meta);
}

// ---- Monte Carlo option price -------------------------------------------

namespace {

template <typename S>
std::vector<ResultRecord> mc_impl(std::uint64_t paths, std::uint64_t seed,
                                  const McParams& p,
                                  std::span<const SchemeSpec> schemes,
                                  const RecordMeta& meta) {
    std::mt19937_64 g(seed);
    NormalGen normal(g);
    const S drift = static_cast<S>((p.r - 0.5 * p.sigma * p.sigma) * p.T);
    const S vol = static_cast<S>(p.sigma * std::sqrt(p.T));
    const S s0 = static_cast<S>(p.S0);
    const S strike = static_cast<S>(p.K);

    // Terminal payoff per path, computed once in the run format and shared
    // by every scheme.
    std::vector<S> payoffs(paths);
    for (std::uint64_t i = 0; i < paths; ++i) {
        const S z = static_cast<S>(normal());
        const S st = s0 * std::exp(drift + vol * z);
        payoffs[i] = st > strike ? st - strike : S(0);
    }

    const double discount = std::exp(-p.r * p.T);
    const double oracle = discount * exact_sum<S>(payoffs).round_f64() /
                          static_cast<double>(paths);

    std::vector<ResultRecord> out;
    for (const SchemeSpec& spec : schemes) {
        ResultRecord r = base_record(meta, spec);
        if (spec.kind == Scheme::oracle) {
            r.value = oracle;
        } else {
            const SchemeResult res = run_scheme<S>(payoffs, spec);
            r.value = static_cast<double>(
                static_cast<S>(discount) *
                (static_cast<S>(res.value) / static_cast<S>(paths)));
            r.ops = res.ops;
            if (res.poisoned) {
                r.error = true;
                r.error_detail =
                    "non-finite at index " + std::to_string(res.poison_index);
            }
        }
        fill_errors(r, oracle);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace

std::vector<ResultRecord> mc_euro_price(std::uint64_t paths,
                                        std::uint64_t seed,
                                        const McParams& params,
                                        const FloatFormat& fmt,
                                        std::span<const SchemeSpec> schemes) {
    require_host_format(fmt);
    RecordMeta meta{"mc", fmt, paths, seed, "", 0};
    if (fmt == FloatFormat::binary32())
        return mc_impl<float>(paths, seed, params, schemes, meta);
    return mc_impl<double>(paths, seed, params, schemes, meta);
}

// ---- exhaustive adder verification --------------------------------------

namespace {

struct ReferenceFormat {
    FloatFormat fmt;
    std::vector<double> finite_values; // ascending, exact in double
    double max_fin = 0;
    double max_ulp = 0;

    explicit ReferenceFormat(const FloatFormat& f) : fmt(f) {
        for (std::uint64_t bits = 0; bits <= f.bits_mask(); ++bits) {
            const PackedFloat x{f, bits};
            if (!x.is_finite()) continue;
            finite_values.push_back(value_as_double(x));
        }
        std::sort(finite_values.begin(), finite_values.end());
        finite_values.erase(
            std::unique(finite_values.begin(), finite_values.end()),
            finite_values.end());
        max_fin = value_as_double(max_finite(f, +1));
        max_ulp = ulp_of(max_finite(f, +1));
    }

    bool representable(double v) const {
        return std::binary_search(finite_values.begin(), finite_values.end(),
                                  v);
    }

    // Correctly rounded value of exact s by brute neighbor search; the
    // result is reported as a double (+-inf for overflow to infinity).
    double round_reference(double s, RoundingMode mode) const {
        if (s == 0.0) return 0.0;
        const double inf = std::numeric_limits<double>::infinity();
        // Values beyond the finite range: IEEE overflow rules.
        auto overflow_to = [&](int sign) {
            switch (mode) {
            case RoundingMode::nearest_even: return sign * inf;
            case RoundingMode::toward_zero: return sign * max_fin;
            case RoundingMode::toward_positive:
                return sign > 0 ? inf : -max_fin;
            case RoundingMode::toward_negative:
                return sign > 0 ? max_fin : -inf;
            }
            return sign * inf;
        };
        if (std::fabs(s) > max_fin) {
            // Nearest-even only overflows past the midpoint of the first
            // binade step beyond the largest finite value.
            if (mode == RoundingMode::nearest_even &&
                std::fabs(s) < max_fin + max_ulp / 2)
                return std::copysign(max_fin, s);
            return overflow_to(s > 0 ? +1 : -1);
        }
        const auto it = std::lower_bound(finite_values.begin(),
                                         finite_values.end(), s);
        const double hi = it == finite_values.end() ? inf : *it;
        if (hi == s) return s;
        const double lo =
            it == finite_values.begin() ? -inf : *(it - 1);
        switch (mode) {
        case RoundingMode::toward_zero: return s > 0 ? lo : hi;
        case RoundingMode::toward_positive: return hi;
        case RoundingMode::toward_negative: return lo;
        case RoundingMode::nearest_even: break;
        }
        const double dlo = s - lo, dhi = hi - s;
        if (dlo < dhi) return lo;
        if (dhi < dlo) return hi;
        // Tie: pick the candidate with even last significand bit.
        auto is_even = [&](double v) {
            for (std::uint64_t bits = 0; bits <= fmt.bits_mask(); ++bits) {
                const PackedFloat x{fmt, bits};
                if (x.is_finite() && value_as_double(x) == v)
                    return (x.frac_field() & 1) == 0;
            }
            return true;
        };
        return is_even(lo) ? lo : hi;
    }
};

} // namespace

VerifyReport verify_adder_exhaustive(const FloatFormat& fmt,
                                     RoundingMode mode) {
    if (fmt.width() > 16)
        throw std::invalid_argument("exhaustive verification needs width <= 16");
    // Exact pair sums must fit a double significand, which holds whenever
    // the format's value grid spans at most 53 bits.
    if (fmt.emax() + 1 - fmt.min_scale() + 1 > 53)
        throw std::invalid_argument(
            "format value grid too wide for an exact double reference");

    const ReferenceFormat ref(fmt);
    VerifyReport report;
    auto fail = [&](const PackedFloat& a, const PackedFloat& b,
                    const char* what) {
        ++report.failures;
        if (report.first_failure.empty()) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "a=0x%llx b=0x%llx: %s",
                          static_cast<unsigned long long>(a.bits),
                          static_cast<unsigned long long>(b.bits), what);
            report.first_failure = buf;
        }
    };

    for (std::uint64_t abits = 0; abits <= fmt.bits_mask(); ++abits)
        for (std::uint64_t bbits = 0; bbits <= fmt.bits_mask(); ++bbits) {
            const PackedFloat a{fmt, abits};
            const PackedFloat b{fmt, bbits};
            ++report.pairs;
            const AddResult r = add_with_err(a, b, mode);

            if (a.is_nan() || b.is_nan()) {
                if (!r.sum.is_nan()) fail(a, b, "NaN in, non-NaN out");
                if (r.err.bits != 0) fail(a, b, "err not +0 for NaN sum");
                continue;
            }
            if (a.is_inf() || b.is_inf()) {
                const bool clash = a.is_inf() && b.is_inf() &&
                                   a.sign_bit() != b.sign_bit();
                if (clash) {
                    if (!r.sum.is_nan() || !r.flags.invalid)
                        fail(a, b, "inf - inf must be NaN + invalid");
                } else {
                    const int sign = a.is_inf() ? a.sign_bit() : b.sign_bit();
                    if (!r.sum.is_inf() || r.sum.sign_bit() != sign)
                        fail(a, b, "wrong infinity");
                }
                if (r.err.bits != 0) fail(a, b, "err not +0 for inf sum");
                continue;
            }

            const double va = value_as_double(a);
            const double vb = value_as_double(b);
            const double s = va + vb; // exact: grid span checked above

            // Expected sum, including the zero-sign conventions.
            if (s == 0.0) {
                int want;
                if (a.is_zero() && b.is_zero() &&
                    a.sign_bit() == b.sign_bit())
                    want = a.sign_bit();
                else
                    // Exact cancellation (and (+0)+(-0)): +0 except when
                    // rounding toward negative.
                    want = mode == RoundingMode::toward_negative ? 1 : 0;
                if (!r.sum.is_zero() || r.sum.sign_bit() != want)
                    fail(a, b, "wrong signed zero");
                if (value_as_double(r.err) != 0.0)
                    fail(a, b, "nonzero err for exact zero sum");
                continue;
            }

            const double want = ref.round_reference(s, mode);
            const double got = value_as_double(r.sum);
            if (got != want ||
                (std::isinf(want) != r.sum.is_inf())) {
                fail(a, b, "wrong rounded sum");
                continue;
            }
            if (!r.sum.is_finite()) {
                if (r.err.bits != 0) fail(a, b, "err not +0 on overflow");
                continue;
            }

            const double err_exact = s - got; // exact on the shared grid
            const bool rep = err_exact == 0.0 || ref.representable(err_exact);
            if (rep) {
                if (value_as_double(r.err) != err_exact)
                    fail(a, b, "wrong exact err");
                if (r.flags.err_unrepresentable)
                    fail(a, b, "spurious err_unrepresentable");
            } else {
                if (mode == RoundingMode::nearest_even)
                    fail(a, b, "unrepresentable err under nearest-even");
                if (!r.flags.err_unrepresentable)
                    fail(a, b, "missing err_unrepresentable");
                const double approx = ref.round_reference(
                    err_exact, RoundingMode::nearest_even);
                if (value_as_double(r.err) != approx)
                    fail(a, b, "err not nearest-even approximation");
            }
            if (r.flags.inexact != (err_exact != 0.0))
                fail(a, b, "wrong inexact flag");
        }
    return report;
}

} // namespace kernels
} // namespace rebits
