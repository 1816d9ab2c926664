#ifndef REBITS_TABLE8_HPP
#define REBITS_TABLE8_HPP

#include "rebits/opcount.hpp"

#include <string>
#include <vector>

namespace rebits {

// One row of the native-vs-error-register instruction cost comparison:
// published reference counts next to counts measured from this
// implementation. Rows where the implementation's count model differs
// from the reference are expected deviations, documented in the README.
struct Table8Row {
    std::string name;      // knuth, kahan, dekker, priest, dd_add, ...
    std::string op_label;  // addition / multiplication / division
    OpCounters published_native;
    OpCounters published_rebits;
    OpCounters measured_native;
    OpCounters measured_rebits;

    bool native_match() const { return published_native == measured_native; }
    bool rebits_match() const { return published_rebits == measured_rebits; }
    bool match() const { return native_match() && rebits_match(); }
};

// Executes each scheme's probe once per variant under a counting scope.
std::vector<Table8Row> table8_report();

} // namespace rebits

#endif
