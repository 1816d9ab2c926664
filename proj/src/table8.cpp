#include "rebits/table8.hpp"

#include "rebits/backend.hpp"
#include "rebits/ddouble.hpp"
#include "rebits/eft.hpp"

#include <array>

namespace rebits {

namespace {

constexpr OpCounters counts(std::uint64_t fpadd, std::uint64_t fpmult = 0,
                            std::uint64_t fpdiv = 0, std::uint64_t fpcomp = 0,
                            std::uint64_t move_fperr = 0) {
    OpCounters c;
    c.fpadd = fpadd;
    c.fpmult = fpmult;
    c.fpdiv = fpdiv;
    c.fpcomp = fpcomp;
    c.move_fperr = move_fperr;
    return c;
}

// Measures one probe call under a fresh scope.
template <typename Fn>
OpCounters measure(Fn&& probe, SchemeVariant variant) {
    CountScope scope("probe");
    HostBackend<double> bk(&scope);
    probe(bk, variant);
    return scope.report();
}

} // namespace

std::vector<Table8Row> table8_report() {
    // Operands chosen so every intermediate is finite and the double-double
    // inputs are normalized.
    const double a = 1.0, b = 0x1p-53;
    const DDouble dx{1.5, 0x1p-54};
    const DDouble dy{1.25, -0x1p-55};
    const std::array<double, 1> one_elem{3.0};

    std::vector<Table8Row> rows;
    auto add_row = [&](std::string name, std::string op,
                       OpCounters pub_native, OpCounters pub_rebits,
                       auto&& probe) {
        Table8Row row;
        row.name = std::move(name);
        row.op_label = std::move(op);
        row.published_native = pub_native;
        row.published_rebits = pub_rebits;
        row.measured_native = measure(probe, SchemeVariant::native);
        row.measured_rebits = measure(probe, SchemeVariant::rebits);
        rows.push_back(std::move(row));
    };

    add_row("knuth", "addition", counts(6), counts(1, 0, 0, 0, 1),
            [&](auto& bk, SchemeVariant v) { two_sum(a, b, bk, v); });
    add_row("kahan", "addition", counts(4), counts(2, 0, 0, 0, 1),
            [&](auto& bk, SchemeVariant v) {
                kahan_sum(std::span<const double>(one_elem), bk, v);
            });
    add_row("dekker", "addition", counts(3), counts(1, 0, 0, 0, 1),
            [&](auto& bk, SchemeVariant v) { fast_two_sum(a, b, bk, v); });
    add_row("priest", "addition", counts(7, 0, 0, 2, 0),
            counts(1, 0, 0, 0, 1), [&](auto& bk, SchemeVariant v) {
                // Steady-state loop body for one incoming element: the
                // native path checks order then runs the doubly
                // compensated update; the error-register path is the bare
                // add-with-error (corrections drained outside the loop).
                if (v == SchemeVariant::native) {
                    double s = 1.0, c = 0.0;
                    bk.comp();
                    priest_step(s, c, b, bk);
                } else {
                    bk.add_err(1.0, b);
                }
            });
    add_row("dd_add", "addition/subtraction", counts(20),
            counts(6, 0, 0, 0, 4),
            [&](auto& bk, SchemeVariant v) { dd_add(dx, dy, bk, v); });
    add_row("dd_mul", "multiplication", counts(15, 9),
            counts(13, 9, 0, 0, 1),
            [&](auto& bk, SchemeVariant v) { dd_mul(dx, dy, bk, v); });
    add_row("dd_div", "division", counts(81, 16, 3),
            counts(40, 16, 3, 0, 13),
            [&](auto& bk, SchemeVariant v) { dd_div(dx, dy, bk, v); });
    return rows;
}

} // namespace rebits
