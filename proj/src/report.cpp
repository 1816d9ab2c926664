#include "rebits/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <tuple>

namespace rebits {

namespace {

constexpr const char* kCsvHeader =
    "kernel,scheme,format,n,seed,policy,order,partitions,value_hex,"
    "value_dec,abs_err,rel_err,fpadd,fpmult,fpdiv,fpcomp,move_fperr";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtoull(s.c_str(), &end, 10);
    return end != nullptr && *end == '\0';
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != nullptr && *end == '\0';
}

} // namespace

std::string hex_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

std::string dec_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void sort_records(std::vector<ResultRecord>& records) {
    auto key = [](const ResultRecord& r) {
        return std::tie(r.kernel, r.format, r.scheme, r.policy, r.order, r.n,
                        r.seed, r.partitions);
    };
    std::stable_sort(records.begin(), records.end(),
                     [&](const ResultRecord& a, const ResultRecord& b) {
                         return key(a) < key(b);
                     });
}

std::string to_csv(const RunConfig& config,
                   const std::vector<ResultRecord>& records) {
    std::ostringstream out;
    for (const auto& [k, v] : config.items) out << "# " << k << "=" << v << "\n";
    out << kCsvHeader << "\n";
    for (const ResultRecord& r : records) {
        out << r.kernel << ',' << r.scheme << ',' << r.format << ',' << r.n
            << ',' << r.seed << ',' << r.policy << ',' << r.order << ','
            << r.partitions << ',' << hex_float(r.value) << ','
            << dec_float(r.value) << ',' << dec_float(r.abs_err) << ','
            << dec_float(r.rel_err) << ',' << r.ops.fpadd << ','
            << r.ops.fpmult << ',' << r.ops.fpdiv << ',' << r.ops.fpcomp
            << ',' << r.ops.move_fperr << "\n";
    }
    return out.str();
}

bool parse_csv(const std::string& text, RunConfig& config,
               std::vector<ResultRecord>& records) {
    config = RunConfig{};
    records.clear();
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            const auto eq = body.find('=');
            if (eq == std::string::npos) return false;
            config.items.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            continue;
        }
        if (!saw_header) {
            if (line != kCsvHeader) return false;
            saw_header = true;
            continue;
        }
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 17) return false;
        ResultRecord r;
        r.kernel = f[0];
        r.scheme = f[1];
        r.format = f[2];
        r.policy = f[5];
        r.order = f[6];
        if (!parse_u64(f[3], r.n) || !parse_u64(f[4], r.seed) ||
            !parse_u64(f[7], r.partitions))
            return false;
        double value_dec = 0;
        if (!parse_double(f[8], r.value) || !parse_double(f[9], value_dec) ||
            !parse_double(f[10], r.abs_err) || !parse_double(f[11], r.rel_err))
            return false;
        if (!parse_u64(f[12], r.ops.fpadd) || !parse_u64(f[13], r.ops.fpmult) ||
            !parse_u64(f[14], r.ops.fpdiv) || !parse_u64(f[15], r.ops.fpcomp) ||
            !parse_u64(f[16], r.ops.move_fperr))
            return false;
        records.push_back(std::move(r));
    }
    return saw_header;
}

std::string to_json(const RunConfig& config,
                    const std::vector<ResultRecord>& records) {
    nlohmann::ordered_json root;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.items) cfg[k] = v;
    root["config"] = std::move(cfg);
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (const ResultRecord& r : records) {
        nlohmann::ordered_json j;
        j["kernel"] = r.kernel;
        j["scheme"] = r.scheme;
        j["format"] = r.format;
        j["n"] = r.n;
        j["seed"] = r.seed;
        j["policy"] = r.policy;
        j["order"] = r.order;
        j["partitions"] = r.partitions;
        // Non-integer numerics travel as strings: the hex form is
        // bit-exact and NaN stays representable.
        j["value_hex"] = hex_float(r.value);
        j["value_dec"] = dec_float(r.value);
        j["abs_err"] = dec_float(r.abs_err);
        j["rel_err"] = dec_float(r.rel_err);
        j["fpadd"] = r.ops.fpadd;
        j["fpmult"] = r.ops.fpmult;
        j["fpdiv"] = r.ops.fpdiv;
        j["fpcomp"] = r.ops.fpcomp;
        j["move_fperr"] = r.ops.move_fperr;
        if (r.error) {
            j["error"] = true;
            j["error_detail"] = r.error_detail;
        }
        recs.push_back(std::move(j));
    }
    root["records"] = std::move(recs);
    return root.dump(2) + "\n";
}

bool parse_json(const std::string& text, RunConfig& config,
                std::vector<ResultRecord>& records) {
    config = RunConfig{};
    records.clear();
    nlohmann::ordered_json root = nlohmann::ordered_json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) return false;
    if (!root.contains("config") || !root["config"].is_object()) return false;
    for (const auto& [k, v] : root["config"].items()) {
        if (!v.is_string()) return false;
        config.items.emplace_back(k, v.get<std::string>());
    }
    if (!root.contains("records") || !root["records"].is_array()) return false;
    for (const auto& j : root["records"]) {
        ResultRecord r;
        try {
            r.kernel = j.at("kernel").get<std::string>();
            r.scheme = j.at("scheme").get<std::string>();
            r.format = j.at("format").get<std::string>();
            r.n = j.at("n").get<std::uint64_t>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.policy = j.at("policy").get<std::string>();
            r.order = j.at("order").get<std::string>();
            r.partitions = j.at("partitions").get<std::uint64_t>();
            if (!parse_double(j.at("value_hex").get<std::string>(), r.value) ||
                !parse_double(j.at("abs_err").get<std::string>(), r.abs_err) ||
                !parse_double(j.at("rel_err").get<std::string>(), r.rel_err))
                return false;
            r.ops.fpadd = j.at("fpadd").get<std::uint64_t>();
            r.ops.fpmult = j.at("fpmult").get<std::uint64_t>();
            r.ops.fpdiv = j.at("fpdiv").get<std::uint64_t>();
            r.ops.fpcomp = j.at("fpcomp").get<std::uint64_t>();
            r.ops.move_fperr = j.at("move_fperr").get<std::uint64_t>();
            if (j.contains("error")) {
                r.error = j.at("error").get<bool>();
                r.error_detail = j.value("error_detail", std::string{});
            }
        } catch (const nlohmann::ordered_json::exception&) {
            return false;
        }
        records.push_back(std::move(r));
    }
    return true;
}

} // namespace rebits
