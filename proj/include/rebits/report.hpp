#ifndef REBITS_REPORT_HPP
#define REBITS_REPORT_HPP

#include "rebits/kernels.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rebits {

// Ordered key/value echo of the run configuration. Kept as strings so a
// parsed report reconstructs exactly what was written.
struct RunConfig {
    std::vector<std::pair<std::string, std::string>> items;

    void set(std::string key, std::string value) {
        for (auto& [k, v] : items)
            if (k == key) {
                v = std::move(value);
                return;
            }
        items.emplace_back(std::move(key), std::move(value));
    }
    const std::string* get(const std::string& key) const {
        for (const auto& [k, v] : items)
            if (k == key) return &v;
        return nullptr;
    }
    bool operator==(const RunConfig&) const = default;
};

// Canonical emission order: reports are sorted before writing so output is
// byte-identical regardless of internal scheduling.
void sort_records(std::vector<ResultRecord>& records);

std::string to_csv(const RunConfig& config,
                   const std::vector<ResultRecord>& records);
std::string to_json(const RunConfig& config,
                    const std::vector<ResultRecord>& records);

bool parse_csv(const std::string& text, RunConfig& config,
               std::vector<ResultRecord>& records);
bool parse_json(const std::string& text, RunConfig& config,
                std::vector<ResultRecord>& records);

// Formatting helpers shared by both writers (bit-exact hexadecimal float
// and shortest-lossless decimal).
std::string hex_float(double v);
std::string dec_float(double v);

} // namespace rebits

#endif
