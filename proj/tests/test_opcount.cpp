#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rebits/backend.hpp"
#include "rebits/opcount.hpp"
#include "rebits/table8.hpp"

using namespace rebits;

TEST_CASE("counters bump and merge field-wise") {
    OpCounters a;
    a.bump(OpKind::fpadd, 3);
    a.bump(OpKind::fpmult, 2);
    OpCounters b;
    b.bump(OpKind::fpadd, 1);
    b.bump(OpKind::move_fperr, 5);
    a.merge(b);
    CHECK(a.fpadd == 4);
    CHECK(a.fpmult == 2);
    CHECK(a.move_fperr == 5);
    CHECK(a.fpdiv == 0);
}

TEST_CASE("nested scopes propagate to every ancestor") {
    CountScope outer("outer");
    CountScope mid("mid", &outer);
    CountScope inner("inner", &mid);
    inner.record(OpKind::fpadd, 2);
    mid.record(OpKind::fpcomp);
    CHECK(inner.report().fpadd == 2);
    CHECK(mid.report().fpadd == 2);
    CHECK(mid.report().fpcomp == 1);
    CHECK(outer.report().fpadd == 2);
    CHECK(outer.report().fpcomp == 1);
    CHECK(inner.report().fpcomp == 0);
}

TEST_CASE("backends record through the scope; negation is free") {
    CountScope scope;
    HostBackend<double> bk(&scope);
    const double x = bk.add(1.0, 2.0);
    bk.mul(x, -x); // the negation itself costs nothing
    bk.div(1.0, x);
    bk.comp(3);
    bk.add_err(1.0, 0x1p-60);
    const OpCounters c = scope.report();
    CHECK(c.fpadd == 2);
    CHECK(c.fpmult == 1);
    CHECK(c.fpdiv == 1);
    CHECK(c.fpcomp == 3);
    CHECK(c.move_fperr == 1);
}

TEST_CASE("reference cost table: exact rows match the published counts") {
    const std::vector<Table8Row> rows = table8_report();
    auto find = [&](const std::string& name) -> const Table8Row& {
        for (const Table8Row& r : rows)
            if (r.name == name) return r;
        REQUIRE(false);
        return rows.front();
    };

    for (const char* name : {"knuth", "kahan", "dekker", "dd_add"}) {
        const Table8Row& r = find(name);
        INFO(name);
        CHECK(r.native_match());
        CHECK(r.rebits_match());
    }
    // The error-register side of the doubly compensated scheme also lands
    // exactly on the published cost.
    CHECK(find("priest").rebits_match());
    CHECK(find("dd_mul").match());
}

TEST_CASE("documented deviations are pinned to the measured values") {
    const std::vector<Table8Row> rows = table8_report();
    for (const Table8Row& r : rows) {
        if (r.name == "priest") {
            // Doubly compensated summation as published by Priest: 10
            // additions and one order check per element, vs the reference
            // table's 7 fpadd + 2 fpcomp.
            CHECK(r.measured_native.fpadd == 10);
            CHECK(r.measured_native.fpcomp == 1);
            CHECK(!r.native_match());
        }
        if (r.name == "dd_div") {
            // The long-division refinement implemented here costs slightly
            // fewer additions than the reference table's 81/40+13.
            CHECK(r.measured_native.fpadd == 75);
            CHECK(r.measured_native.fpdiv == 3);
            CHECK(r.measured_native.fpmult == 16);
            CHECK(r.measured_rebits.fpadd == 39);
            CHECK(r.measured_rebits.move_fperr == 12);
            CHECK(!r.match());
        }
    }
}
