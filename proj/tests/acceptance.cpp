// Acceptance harness: one pass/fail line per release criterion, nonzero
// exit when any criterion fails. Every check is seeded and deterministic.

#include "rebits/ddouble.hpp"
#include "rebits/eft.hpp"
#include "rebits/kernels.hpp"
#include "rebits/softfp.hpp"
#include "rebits/table8.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace rebits;
using namespace rebits::kernels;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what) {
    std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion,
                what.c_str());
    if (!ok) ++g_failures;
}

const FloatFormat kF32 = FloatFormat::binary32();
const FloatFormat kF64 = FloatFormat::binary64();

SchemeSpec spec_of(const char* text) {
    SchemeSpec s;
    if (!parse_scheme(text, s)) std::abort();
    return s;
}

const ResultRecord& pick(const std::vector<ResultRecord>& recs,
                         const std::string& scheme,
                         const std::string& policy = "") {
    for (const ResultRecord& r : recs)
        if (r.scheme == scheme && (policy.empty() || r.policy == policy))
            return r;
    std::abort();
}

// ---- criterion 1: the worked example, bitwise --------------------------

void criterion1() {
    const AddResult r =
        add_with_err(from_host(2808064.0f), from_host(100.125f));
    const bool ok =
        r.sum == from_host(2808164.0f) && r.err == from_host(0.125f);
    std::ostringstream msg;
    msg << "worked example: 2808064 + 100.125 -> sum "
        << to_host_f32(r.sum) << ", err " << to_host_f32(r.err);
    report(1, ok, msg.str());
}

// ---- criterion 2: exhaustive tiny-format verification ------------------

void criterion2() {
    const VerifyReport rep = verify_adder_exhaustive({5, 2});
    std::ostringstream msg;
    msg << "exhaustive e5m2: " << rep.pairs << " pairs, " << rep.failures
        << " failures";
    if (rep.failures) msg << " (first: " << rep.first_failure << ")";
    report(2, rep.pairs == 65536 && rep.failures == 0, msg.str());
}

// ---- criterion 3: host-width agreement on >= 1e7 pairs per format ------

template <typename S, typename Bits>
std::uint64_t check_pairs_host(std::uint64_t random_pairs,
                               std::uint64_t& failures) {
    std::mt19937_64 g(0x5eed0003);
    std::uint64_t checked = 0;

    std::vector<Bits> edges;
    const FloatFormat fmt = format_of<S>();
    const int w = fmt.width();
    const Bits sign = Bits{1} << (w - 1);
    for (Bits mag : {Bits(0), Bits(1), Bits(fmt.frac_mask()),
                     Bits(fmt.frac_mask() + 1),
                     Bits(max_finite(fmt, +1).bits),
                     Bits(make_inf(fmt, +1).bits),
                     Bits(std::uint64_t{0x3f} << fmt.frac_bits),
                     Bits((std::uint64_t{1} << (w - 2)) - 1)}) {
        edges.push_back(mag);
        edges.push_back(Bits(mag | sign));
    }

    auto check_one = [&](Bits ba, Bits bb) {
        const S a = std::bit_cast<S>(ba);
        const S b = std::bit_cast<S>(bb);
        if (std::isnan(static_cast<double>(a)) ||
            std::isnan(static_cast<double>(b)))
            return;
        ++checked;
        const AddResult r = add_with_err(from_host(a), from_host(b));
        const S host_sum = a + b;
        if (std::isnan(static_cast<double>(host_sum))) {
            if (!r.sum.is_nan()) ++failures;
            return;
        }
        if (r.sum.bits != static_cast<std::uint64_t>(std::bit_cast<Bits>(host_sum))) {
            ++failures;
            return;
        }
        if (!std::isfinite(static_cast<double>(host_sum))) {
            if (!r.err.is_zero() || r.err.sign_bit() != 0) ++failures;
            return;
        }
        // Error reference: the branch-free two_sum identity on the host.
        const S s = host_sum;
        const S bbb = s - a;
        const S e = static_cast<S>((a - (s - bbb)) + (b - bbb));
        if (!std::isfinite(static_cast<double>(e))) return; // identity overflowed
        if (r.err.bits != static_cast<std::uint64_t>(std::bit_cast<Bits>(e)))
            ++failures;
    };

    for (Bits x : edges)
        for (Bits y : edges) check_one(x, y);

    while (checked < random_pairs) {
        // Flavor 1: uniformly random bit patterns.
        check_one(static_cast<Bits>(g()), static_cast<Bits>(g()));
        // Flavor 2: overlapping exponents, where rounding actually happens.
        const S base = std::ldexp(S(1) + S(g() >> 11) * S(0x1p-53),
                                  int(g() % 81) - 40);
        const S near = std::ldexp(S(1) + S(g() >> 11) * S(0x1p-53),
                                  int(g() % 81) - 40 + int(g() % 9) - 4);
        check_one(std::bit_cast<Bits>((g() & 1) ? base : S(-base)),
                  std::bit_cast<Bits>((g() & 1) ? near : S(-near)));
    }
    return checked;
}

void criterion3() {
    std::uint64_t fail32 = 0, fail64 = 0;
    const std::uint64_t n32 =
        check_pairs_host<float, std::uint32_t>(10000000, fail32);
    const std::uint64_t n64 =
        check_pairs_host<double, std::uint64_t>(10000000, fail64);
    std::ostringstream msg;
    msg << "host agreement: binary32 " << n32 << " pairs (" << fail32
        << " fail), binary64 " << n64 << " pairs (" << fail64 << " fail)";
    report(3, n32 >= 10000000 && n64 >= 10000000 && fail32 == 0 && fail64 == 0,
           msg.str());
}

// ---- criterion 4: reference cost table -----------------------------------

void criterion4() {
    const std::vector<Table8Row> rows = table8_report();
    auto find = [&](const std::string& name) -> const Table8Row* {
        for (const Table8Row& r : rows)
            if (r.name == name) return &r;
        return nullptr;
    };
    bool ok = true;
    // Exact-match rows.
    for (const char* name : {"knuth", "kahan", "dekker", "dd_add"}) {
        const Table8Row* r = find(name);
        ok = ok && r && r->native_match() && r->rebits_match();
    }
    ok = ok && find("priest") && find("priest")->rebits_match();
    // Status-emitting rows: every row carries a MATCH-or-deviation status.
    std::ostringstream msg;
    msg << "cost table:";
    for (const Table8Row& r : rows)
        msg << " " << r.name << "="
            << (r.match() ? "MATCH" : "DOCUMENTED-DEVIATION");
    ok = ok && find("dd_mul") && find("dd_div");
    report(4, ok, msg.str());
}

// ---- criterion 5: dd native/rebits bitwise equivalence -------------------

DDouble rand_dd(std::mt19937_64& g) {
    HostBackend<double> bk;
    const double hi =
        ((g() & 1) ? 1.0 : -1.0) *
        std::ldexp(1.0 + static_cast<double>(g() >> 12) * 0x1p-52,
                   static_cast<int>(g() % 61) - 30);
    const double lo = ((g() & 1) ? 1.0 : -1.0) *
                      std::ldexp(static_cast<double>(g() >> 12) * 0x1p-52, -54) *
                      hi;
    return dd_normalize(hi, lo, bk);
}

void criterion5() {
    HostBackend<double> bk;
    std::mt19937_64 g(0x5eed0005);
    std::uint64_t mismatches = 0;
    const std::uint64_t n = 1000000;
    for (std::uint64_t i = 0; i < n; ++i) {
        const DDouble x = rand_dd(g);
        const DDouble y = rand_dd(g);
        if (dd_add(x, y, bk, SchemeVariant::native) !=
            dd_add(x, y, bk, SchemeVariant::rebits))
            ++mismatches;
        if (dd_mul(x, y, bk, SchemeVariant::native) !=
            dd_mul(x, y, bk, SchemeVariant::rebits))
            ++mismatches;
        if (y.hi != 0.0 && dd_div(x, y, bk, SchemeVariant::native) !=
                               dd_div(x, y, bk, SchemeVariant::rebits))
            ++mismatches;
    }
    std::ostringstream msg;
    msg << "dd add/mul/div native vs error-register over " << n
        << " pairs each: " << mismatches << " limb mismatches";
    report(5, mismatches == 0, msg.str());
}

// ---- criterion 6: fold-free accumulator == two_sum cascade ---------------

void criterion6() {
    std::mt19937_64 g(0x5eed0006);
    HostBackend<double> bkd;
    HostBackend<float> bkf;
    std::uint64_t mismatches = 0;
    for (int round = 0; round < 10000; ++round) {
        const std::size_t n = 1 + g() % 1000;
        std::vector<double> vd(n);
        for (double& x : vd) {
            const double m = 1.0 + static_cast<double>(g() >> 12) * 0x1p-52;
            x = ((g() & 1) ? -1.0 : 1.0) *
                std::ldexp(m, static_cast<int>(g() % 81) - 40);
        }
        std::vector<float> vf(n);
        for (std::size_t i = 0; i < n; ++i) vf[i] = static_cast<float>(vd[i]);
        if (sum_with_policy(std::span<const double>(vd), FoldPolicy::none(),
                            bkd)
                .value != cascade_sum(std::span<const double>(vd), bkd))
            ++mismatches;
        if (sum_with_policy(std::span<const float>(vf), FoldPolicy::none(),
                            bkf)
                .value != cascade_sum(std::span<const float>(vf), bkf))
            ++mismatches;
    }
    std::ostringstream msg;
    msg << "fold-free sum vs cascade, 10000 vectors x both formats: "
        << mismatches << " mismatches";
    report(6, mismatches == 0, msg.str());
}

// ---- criterion 7: skewed binary32 accuracy pattern -----------------------

void criterion7() {
    std::vector<SchemeSpec> specs;
    for (const char* s :
         {"naive", "rebits:fold=1", "rebits:fold=100", "rebits:fold=1000",
          "rebits:fold=none", "oracle"})
        specs.push_back(spec_of(s));
    const auto recs = sum_experiment(100000, 1, kF32, specs);

    std::vector<float> v;
    for (double x : gen_skewed_positive(100000, 1, kF32))
        v.push_back(static_cast<float>(x));
    const float exact32 = exact_sum_f32(v).round_f32();

    const bool bitwise =
        static_cast<float>(pick(recs, "rebits", "1000").value) == exact32;
    const double rel_none = pick(recs, "rebits", "none").rel_err;
    const double rel_naive = pick(recs, "naive").rel_err;
    const bool ratio = rel_naive >= 1000.0 * rel_none;
    const double a1 = pick(recs, "rebits", "1").abs_err;
    const double a100 = pick(recs, "rebits", "100").abs_err;
    const double a1000 = pick(recs, "rebits", "1000").abs_err;
    const double anone = pick(recs, "rebits", "none").abs_err;
    const double anaive = pick(recs, "naive").abs_err;
    const bool chain =
        a1 <= a100 && a100 <= a1000 && a1000 <= anone && anone <= anaive;

    std::ostringstream msg;
    msg << "skewed n=1e5 seed=1: fold1000 "
        << (bitwise ? "== oracle(binary32)" : "!= oracle(binary32)")
        << ", naive/no-fold ratio " << (rel_none > 0 ? rel_naive / rel_none : 0)
        << ", error chain " << (chain ? "ordered" : "violated");
    report(7, bitwise && ratio && chain, msg.str());
}

// ---- criterion 8: grid traversal-order independence ----------------------

void criterion8() {
    const Grid g = gen_grid(1);
    const auto rrecs = grid_sum_orders(g, spec_of("rebits"), 1);
    const auto nrecs = grid_sum_orders(g, spec_of("naive"), 1);
    const double oracle = pick(rrecs, "oracle").value;

    double rlo = 1e300, rhi = -1e300, nlo = 1e300, nhi = -1e300;
    for (const ResultRecord& r : rrecs)
        if (r.scheme == "rebits") {
            rlo = std::min(rlo, r.value);
            rhi = std::max(rhi, r.value);
        }
    for (const ResultRecord& r : nrecs)
        if (r.scheme == "naive") {
            nlo = std::min(nlo, r.value);
            nhi = std::max(nhi, r.value);
        }
    const double rspread = rhi - rlo;
    const double nspread = nhi - nlo;
    const double ulp = ulp_of(from_host(oracle));
    const bool identical = rspread == 0.0;
    const bool exact = std::fabs(rhi - oracle) <= ulp;
    // A zero spread on the error-register side passes any ratio.
    const bool ratio = rspread == 0.0 ? nspread > 0.0
                                      : nspread >= 1e6 * rspread;
    std::ostringstream msg;
    msg << "grid 120x64 f64: rebits spread " << rspread << " (|value-oracle| "
        << std::fabs(rhi - oracle) << ", ulp " << ulp << "), naive spread "
        << nspread;
    report(8, identical && exact && ratio, msg.str());
}

// ---- criterion 9: 2-norm on the skewed vector ----------------------------

void criterion9() {
    std::vector<SchemeSpec> specs{spec_of("naive"), spec_of("rebits:fold=1000"),
                                  spec_of("oracle")};
    const auto recs = two_norm(100000, 1, kF32, specs);
    const double rrel = pick(recs, "rebits").rel_err;
    const double nrel = pick(recs, "naive").rel_err;
    std::ostringstream msg;
    msg << "2-norm skewed n=1e5: rebits rel " << rrel << ", naive rel " << nrel;
    report(9, rrel <= 1e-2 && nrel >= 10.0 * rrel, msg.str());
}

// ---- criterion 10: application kernels -----------------------------------

void criterion10() {
    std::vector<SchemeSpec> specs{spec_of("naive"), spec_of("rebits:fold=1000"),
                                  spec_of("oracle")};

    // N-body sweep: worst relative error across particle counts.
    double nb_naive = 0, nb_rebits = 0;
    for (std::uint64_t n : {1000, 2000, 4000, 8000}) {
        const auto recs = nbody_potential(n, 1, kF32, specs);
        nb_naive = std::max(nb_naive, pick(recs, "naive").rel_err);
        nb_rebits = std::max(nb_rebits, pick(recs, "rebits").rel_err);
    }
    const bool nb_ok = nb_rebits <= nb_naive / 5.0;

    // Trapezoid: worst drift across 50 sampled prefix points.
    const auto samples = trapezoid_profile(100.0, 1000000, 50, kF32);
    double tr_naive = 0, tr_rebits = 0;
    for (const TrapezoidSample& s : samples) {
        if (s.oracle == 0) continue;
        tr_naive = std::max(tr_naive,
                            std::fabs(s.naive - s.oracle) / std::fabs(s.oracle));
        tr_rebits = std::max(
            tr_rebits, std::fabs(s.rebits - s.oracle) / std::fabs(s.oracle));
    }
    const bool tr_ok = tr_rebits <= tr_naive / 10.0;

    // Monte Carlo deviation from the exactly accumulated mean.
    const auto mc = mc_euro_price(1000000, 1, McParams{}, kF32, specs);
    const double mc_naive = pick(mc, "naive").rel_err;
    const double mc_rebits = pick(mc, "rebits").rel_err;
    const bool mc_ok = mc_rebits <= mc_naive / 5.0;

    std::ostringstream msg;
    msg << "kernels: nbody " << nb_rebits << " vs " << nb_naive
        << ", trapezoid " << tr_rebits << " vs " << tr_naive << ", mc "
        << mc_rebits << " vs " << mc_naive;
    report(10, nb_ok && tr_ok && mc_ok, msg.str());
}

// ---- criterion 11: dd_add-dominated workload op counts -------------------

void criterion11() {
    std::mt19937_64 g(0x5eed000b);
    const std::uint64_t calls = 1000000;
    std::vector<DDouble> xs(calls), ys(calls);
    for (std::uint64_t i = 0; i < calls; ++i) {
        xs[i] = rand_dd(g);
        ys[i] = rand_dd(g);
    }
    CountScope native_scope, rebits_scope;
    {
        HostBackend<double> bk(&native_scope);
        for (std::uint64_t i = 0; i < calls; ++i)
            dd_add(xs[i], ys[i], bk, SchemeVariant::native);
    }
    {
        HostBackend<double> bk(&rebits_scope);
        for (std::uint64_t i = 0; i < calls; ++i)
            dd_add(xs[i], ys[i], bk, SchemeVariant::rebits);
    }
    const OpCounters cn = native_scope.report();
    const OpCounters cr = rebits_scope.report();
    const bool ok = cn.fpadd == 20 * calls && cr.fpadd == 6 * calls &&
                    cr.fpadd * 20 == cn.fpadd * 6 &&
                    cr.move_fperr == 4 * calls && cn.move_fperr == 0;
    std::ostringstream msg;
    msg << "1e6 dd_add calls: native " << cn.fpadd << " fpadd, rebits "
        << cr.fpadd << " fpadd + " << cr.move_fperr << " moves";
    report(11, ok, msg.str());
}

// ---- criterion 12: byte determinism of the CLI ---------------------------

bool capture(const std::string& args, std::string& out) {
    const std::string cmd = std::string(REBITS_CLI_PATH) + " " + args;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return false;
    std::array<char, 4096> buf;
    std::size_t got;
    out.clear();
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        out.append(buf.data(), got);
    const int rc = pclose(pipe);
    return rc >= 0 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
}

void criterion12() {
    bool ok = true;
    std::string note;
    const std::vector<std::string> fixed = {
        "run --kernel sum --n 50000 --seed 1 --format f32 "
        "--scheme naive,rebits:fold=1000,kahan,oracle",
        "run --kernel grid --format f64 --seed 1 --scheme naive,rebits",
        "run --kernel mc --paths 200000 --seed 1 --format f32 --out json",
    };
    for (const std::string& args : fixed) {
        std::string a, b;
        if (!capture(args, a) || !capture(args, b) || a != b || a.empty()) {
            ok = false;
            note = "repeat mismatch: " + args;
            break;
        }
    }
    if (ok) {
        const std::string base =
            "run --kernel parallel --format f32 --n 200000 --seed 1 "
            "--scheme naive,rebits:fold=1000,oracle --partitions 4 --workers ";
        std::string w1, w3, w8;
        if (!capture(base + "1", w1) || !capture(base + "3", w3) ||
            !capture(base + "8", w8) || w1 != w3 || w1 != w8 || w1.empty()) {
            ok = false;
            note = "worker-count mismatch";
        }
    }
    std::ostringstream msg;
    msg << "CLI byte determinism: repeated runs and worker counts "
        << (ok ? "identical" : ("differ (" + note + ")"));
    report(12, ok, msg.str());
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    criterion12();
    if (g_failures) {
        std::printf("ACCEPTANCE FAILED: %d criterion(s)\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE PASSED: 12/12 criteria\n");
    return 0;
}
