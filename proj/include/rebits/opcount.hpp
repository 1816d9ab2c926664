#ifndef REBITS_OPCOUNT_HPP
#define REBITS_OPCOUNT_HPP

#include <cstdint>
#include <string>

namespace rebits {

// Instruction classes of the cost model. Negation and absolute value are
// register-sign operations and are not counted.
enum class OpKind { fpadd, fpmult, fpdiv, fpcomp, move_fperr };

struct OpCounters {
    std::uint64_t fpadd = 0;
    std::uint64_t fpmult = 0;
    std::uint64_t fpdiv = 0;
    std::uint64_t fpcomp = 0;
    std::uint64_t move_fperr = 0;

    void bump(OpKind kind, std::uint64_t n) {
        switch (kind) {
        case OpKind::fpadd: fpadd += n; break;
        case OpKind::fpmult: fpmult += n; break;
        case OpKind::fpdiv: fpdiv += n; break;
        case OpKind::fpcomp: fpcomp += n; break;
        case OpKind::move_fperr: move_fperr += n; break;
        }
    }

    OpCounters& merge(const OpCounters& other) {
        fpadd += other.fpadd;
        fpmult += other.fpmult;
        fpdiv += other.fpdiv;
        fpcomp += other.fpcomp;
        move_fperr += other.move_fperr;
        return *this;
    }

    bool operator==(const OpCounters&) const = default;
};

// Explicit recording context. Counts recorded in a scope also propagate to
// every enclosing scope. One scope is owned by one worker at a time;
// cross-worker aggregation happens by merging snapshots after join.
class CountScope {
public:
    explicit CountScope(std::string label = {}, CountScope* parent = nullptr)
        : label_(std::move(label)), parent_(parent) {}

    void record(OpKind kind, std::uint64_t n = 1) {
        for (CountScope* s = this; s != nullptr; s = s->parent_)
            s->counters_.bump(kind, n);
    }

    OpCounters report() const { return counters_; }
    const std::string& label() const { return label_; }

private:
    std::string label_;
    CountScope* parent_;
    OpCounters counters_;
};

inline void record(CountScope* scope, OpKind kind, std::uint64_t n = 1) {
    if (scope) scope->record(kind, n);
}

} // namespace rebits

#endif
