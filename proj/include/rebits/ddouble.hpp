#ifndef REBITS_DDOUBLE_HPP
#define REBITS_DDOUBLE_HPP

#include "rebits/eft.hpp"

namespace rebits {

// Unevaluated sum of two binary64 values. Normalized when
// fl(hi + lo) == hi, i.e. |lo| <= 1/2 ulp(hi).
struct DDouble {
    double hi{};
    double lo{};

    static DDouble from(double x) { return {x, 0.0}; }
    bool operator==(const DDouble&) const = default;
};

inline DDouble dd_negate(const DDouble& x) { return {-x.hi, -x.lo}; }

inline bool dd_is_normalized(const DDouble& x) {
    return x.hi + x.lo == x.hi || (x.hi == 0.0 && x.lo == 0.0);
}

template <typename B>
DDouble dd_normalize(double hi, double lo, B& bk,
                     SchemeVariant variant = SchemeVariant::native) {
    const double a = std::fabs(hi) >= std::fabs(lo) ? hi : lo;
    const double b = std::fabs(hi) >= std::fabs(lo) ? lo : hi;
    const auto [s, e] = fast_two_sum(a, b, bk, variant);
    return {s, e};
}

// The classic two-limb addition. Both variants run the same
// dataflow; the rebits one reads each addition's exact error instead of
// inferring it: 20 fpadd native vs 6 fpadd + 4 FPERR moves.
template <typename B>
DDouble dd_add(const DDouble& x, const DDouble& y, B& bk,
               SchemeVariant variant = SchemeVariant::native) {
    auto [s1, s2] = two_sum(x.hi, y.hi, bk, variant);
    auto [t1, t2] = two_sum(x.lo, y.lo, bk, variant);
    s2 = bk.add(s2, t1);
    const auto q1 = fast_two_sum(s1, s2, bk, variant);
    s2 = bk.add(q1.e, t2);
    const auto q2 = fast_two_sum(q1.s, s2, bk, variant);
    return {q2.s, q2.e};
}

inline DDouble dd_sub_impl(const DDouble& x, const DDouble& y, auto& bk,
                           SchemeVariant variant) {
    return dd_add(x, dd_negate(y), bk, variant);
}

// Double-double product without the lo*lo term (Bailey's layout):
// 9 fpmult + 15 fpadd native; the final renormalization is the only
// addition the error register can streamline (9 fpmult, 13 fpadd, 1 move).
template <typename B>
DDouble dd_mul(const DDouble& x, const DDouble& y, B& bk,
               SchemeVariant variant = SchemeVariant::native) {
    const auto p = two_prod(x.hi, y.hi, bk);
    double p2 = bk.add(p.e, bk.mul(x.hi, y.lo));
    p2 = bk.add(p2, bk.mul(x.lo, y.hi));
    const auto r = fast_two_sum(p.s, p2, bk, variant);
    return {r.s, r.e};
}

// dd times plain double, used by division: 8 fpmult + 14 fpadd native.
template <typename B>
DDouble dd_mul_d(const DDouble& x, double c, B& bk,
                 SchemeVariant variant = SchemeVariant::native) {
    const auto p = two_prod(x.hi, c, bk);
    const double p2 = bk.add(p.e, bk.mul(x.lo, c));
    const auto r = fast_two_sum(p.s, p2, bk, variant);
    return {r.s, r.e};
}

// Long-form quotient refinement (three correction passes, no FMA):
// 3 fpdiv + 16 fpmult + 75 fpadd native;
// 3 fpdiv + 16 fpmult + 39 fpadd + 12 moves rebits.
template <typename B>
DDouble dd_div(const DDouble& x, const DDouble& y, B& bk,
               SchemeVariant variant = SchemeVariant::native) {
    const double q1 = bk.div(x.hi, y.hi);
    DDouble r = dd_add(x, dd_negate(dd_mul_d(y, q1, bk, variant)), bk, variant);
    const double q2 = bk.div(r.hi, y.hi);
    r = dd_add(r, dd_negate(dd_mul_d(y, q2, bk, variant)), bk, variant);
    const double q3 = bk.div(r.hi, y.hi);
    const auto s = fast_two_sum(q1, q2, bk, variant);
    const double e = bk.add(s.e, q3);
    const auto q = fast_two_sum(s.s, e, bk, variant);
    return {q.s, q.e};
}

} // namespace rebits

#endif
