#include "rebits/kernels.hpp"
#include "rebits/report.hpp"
#include "rebits/table8.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace rebits;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string fmt_counts(const OpCounters& c) {
    std::ostringstream out;
    auto item = [&](std::uint64_t n, const char* name) {
        if (n == 0) return;
        if (out.tellp() > 0) out << " ";
        out << n << " " << name;
    };
    item(c.fpdiv, "fpdiv");
    item(c.fpmult, "fpmult");
    item(c.fpadd, "fpadd");
    item(c.fpcomp, "fpcomp");
    item(c.move_fperr, "move");
    if (out.tellp() == 0) return "0";
    return out.str();
}

struct RunOptions {
    std::string kernel;
    std::string scheme_list = "naive,rebits,oracle";
    std::string format = "f32";
    std::uint64_t n = 100000;
    bool n_given = false;
    std::uint64_t seed = 1;
    std::uint64_t paths = 1000000;
    std::uint64_t steps = 1000000;
    double x_max = 100.0;
    int rows = 120;
    int cols = 64;
    std::string orders = "all";
    std::uint64_t partitions = 4;
    std::uint64_t workers = 1;
    kernels::McParams mc;
    std::string out_format = "csv";
    std::string output_path;
};

bool write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return true;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot open output file: " << path << "\n";
        return false;
    }
    f << text;
    return bool(f);
}

RunConfig echo_config(const RunOptions& opt) {
    RunConfig cfg;
    cfg.set("kernel", opt.kernel);
    cfg.set("scheme", opt.scheme_list);
    cfg.set("format", opt.format);
    cfg.set("n", std::to_string(opt.n));
    cfg.set("seed", std::to_string(opt.seed));
    cfg.set("paths", std::to_string(opt.paths));
    cfg.set("steps", std::to_string(opt.steps));
    cfg.set("x_max", dec_float(opt.x_max));
    cfg.set("rows", std::to_string(opt.rows));
    cfg.set("cols", std::to_string(opt.cols));
    cfg.set("orders", opt.orders);
    // The worker count is deliberately not echoed: it is a scheduling
    // knob with no effect on any record, so output stays byte-identical
    // across worker counts.
    cfg.set("partitions", std::to_string(opt.partitions));
    cfg.set("s0", dec_float(opt.mc.S0));
    cfg.set("strike", dec_float(opt.mc.K));
    cfg.set("rate", dec_float(opt.mc.r));
    cfg.set("sigma", dec_float(opt.mc.sigma));
    cfg.set("maturity", dec_float(opt.mc.T));
    cfg.set("out", opt.out_format);
    return cfg;
}

// The parallel kernel pairs a sequential baseline per non-rebits scheme
// with the deterministic partitioned run for rebits schemes.
template <typename S>
std::vector<ResultRecord> parallel_records(const RunOptions& opt,
                                           const FloatFormat& fmt,
                                           const std::vector<SchemeSpec>& specs) {
    const std::vector<double> wide =
        kernels::gen_skewed_positive(opt.n, opt.seed, fmt);
    std::vector<S> v(wide.size());
    for (std::size_t i = 0; i < wide.size(); ++i)
        v[i] = static_cast<S>(wide[i]);
    const double oracle = kernels::exact_sum_f64(
                              std::vector<double>(v.begin(), v.end()))
                              .round_f64();

    std::vector<ResultRecord> out;
    for (const SchemeSpec& spec : specs) {
        ResultRecord r;
        r.kernel = "parallel";
        r.scheme = scheme_name(spec.kind);
        r.format = format_name(fmt);
        r.n = opt.n;
        r.seed = opt.seed;
        if (spec.kind == Scheme::rebits) {
            r.policy =
                spec.policy.folds() ? std::to_string(spec.policy.k) : "none";
            r.partitions = opt.partitions;
            kernels::ParallelResult res;
            if constexpr (std::is_same_v<S, float>)
                res = kernels::parallel_sum_f32(v, opt.partitions, spec.policy,
                                                opt.workers);
            else
                res = kernels::parallel_sum_f64(v, opt.partitions, spec.policy,
                                                opt.workers);
            r.value = res.value;
            r.ops = res.ops;
            if (res.poisoned) {
                r.error = true;
                r.error_detail = "non-finite at index " +
                                 std::to_string(res.poison_index);
            }
        } else {
            r.partitions = spec.kind == Scheme::oracle ? 0 : 1;
            kernels::SchemeResult res;
            if constexpr (std::is_same_v<S, float>)
                res = kernels::run_scheme_f32(v, spec);
            else
                res = kernels::run_scheme_f64(v, spec);
            r.value = res.value;
            r.ops = res.ops;
            if (res.poisoned) {
                r.error = true;
                r.error_detail = "non-finite at index " +
                                 std::to_string(res.poison_index);
            }
        }
        r.abs_err = std::fabs(r.value - oracle);
        r.rel_err = oracle != 0.0
                        ? r.abs_err / std::fabs(oracle)
                        : std::numeric_limits<double>::quiet_NaN();
        out.push_back(std::move(r));
    }
    return out;
}

int do_run(RunOptions& opt) {
    FloatFormat fmt{};
    if (!parse_format(opt.format, fmt)) {
        std::cerr << "error: unknown format: " << opt.format << "\n";
        return 1;
    }

    if (opt.kernel == "verify-adder") {
        kernels::VerifyReport rep;
        try {
            rep = kernels::verify_adder_exhaustive(fmt);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        std::ostringstream out;
        out << "verify-adder format=" << format_name(fmt)
            << " pairs=" << rep.pairs << " failures=" << rep.failures << " "
            << (rep.failures == 0 ? "PASS" : "FAIL") << "\n";
        if (rep.failures != 0) out << "first failure: " << rep.first_failure << "\n";
        if (!write_output(opt.output_path, out.str())) return 2;
        return rep.failures == 0 ? 0 : 2;
    }

    std::vector<SchemeSpec> specs;
    for (const std::string& s : split_list(opt.scheme_list)) {
        SchemeSpec spec;
        if (!parse_scheme(s, spec)) {
            std::cerr << "error: unknown scheme: " << s << "\n";
            return 1;
        }
        specs.push_back(spec);
    }
    if (specs.empty()) {
        std::cerr << "error: empty scheme list\n";
        return 1;
    }

    // The pairwise kernel defaults to a desk-scale particle count when --n
    // is not given (its term count grows quadratically).
    if (opt.kernel == "nbody" && !opt.n_given) opt.n = 1000;

    std::vector<ResultRecord> records;
    if (opt.kernel == "sum") {
        records = kernels::sum_experiment(opt.n, opt.seed, fmt, specs);
    } else if (opt.kernel == "parallel") {
        records = fmt == FloatFormat::binary32()
                      ? parallel_records<float>(opt, fmt, specs)
                      : parallel_records<double>(opt, fmt, specs);
    } else if (opt.kernel == "grid") {
        if (fmt != FloatFormat::binary64()) {
            std::cerr << "error: the grid kernel runs in f64\n";
            return 1;
        }
        std::vector<std::string> wanted = split_list(opt.orders);
        const bool all = opt.orders == "all";
        for (const std::string& o : wanted) {
            Order parsed{};
            if (!all && !parse_order(o, parsed)) {
                std::cerr << "error: unknown order: " << o << "\n";
                return 1;
            }
        }
        const Grid g = kernels::gen_grid(opt.seed, opt.rows, opt.cols);
        bool oracle_done = false;
        for (const SchemeSpec& spec : specs) {
            if (spec.kind == Scheme::oracle) continue;
            std::vector<ResultRecord> recs =
                kernels::grid_sum_orders(g, spec, opt.seed);
            for (ResultRecord& r : recs) {
                if (r.scheme == "oracle") {
                    if (!oracle_done) {
                        records.push_back(std::move(r));
                        oracle_done = true;
                    }
                    continue;
                }
                if (all || std::find(wanted.begin(), wanted.end(), r.order) !=
                               wanted.end())
                    records.push_back(std::move(r));
            }
        }
        // A bare oracle request still reports the exact value.
        for (const SchemeSpec& spec : specs)
            if (spec.kind == Scheme::oracle && records.empty()) {
                std::vector<ResultRecord> recs = kernels::grid_sum_orders(
                    g, SchemeSpec{Scheme::naive, {}}, opt.seed);
                records.push_back(recs.back());
            }
    } else if (opt.kernel == "norm") {
        records = kernels::two_norm(opt.n, opt.seed, fmt, specs);
    } else if (opt.kernel == "trapezoid") {
        records = kernels::trapezoid_integrate(opt.x_max, opt.steps, fmt, specs);
    } else if (opt.kernel == "nbody") {
        records = kernels::nbody_potential(opt.n, opt.seed, fmt, specs);
    } else if (opt.kernel == "mc") {
        records = kernels::mc_euro_price(opt.paths, opt.seed, opt.mc, fmt, specs);
    } else {
        std::cerr << "error: unknown kernel: " << opt.kernel << "\n";
        return 1;
    }

    sort_records(records);
    const RunConfig cfg = echo_config(opt);
    const std::string text = opt.out_format == "json" ? to_json(cfg, records)
                                                      : to_csv(cfg, records);
    if (!write_output(opt.output_path, text)) return 2;
    return 0;
}

int do_table8() {
    const std::vector<Table8Row> rows = table8_report();
    std::printf("%-8s %-24s %-28s %-28s %s\n", "scheme", "operation",
                "native (measured|published)", "rebits (measured|published)",
                "status");
    for (const Table8Row& row : rows) {
        const std::string native = fmt_counts(row.measured_native) + " | " +
                                   fmt_counts(row.published_native);
        const std::string rebits = fmt_counts(row.measured_rebits) + " | " +
                                   fmt_counts(row.published_rebits);
        std::printf("%-8s %-24s %-28s %-28s %s\n", row.name.c_str(),
                    row.op_label.c_str(), native.c_str(), rebits.c_str(),
                    row.match() ? "MATCH" : "DOCUMENTED-DEVIATION");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"error-recycling floating-point summation experiments"};
    app.require_subcommand(1);

    RunOptions opt;
    CLI::App* run = app.add_subcommand("run", "run a kernel experiment");
    run->add_option("--kernel", opt.kernel,
                    "sum|parallel|grid|norm|trapezoid|nbody|mc|verify-adder")
        ->required();
    run->add_option("--scheme", opt.scheme_list,
                    "comma list: naive,rebits[:fold=K|none],kahan,priest,"
                    "cascade,dd,dd_rebits,oracle");
    run->add_option("--format", opt.format, "f32|f64 (e.g. e5m2 for verify-adder)");
    CLI::Option* n_opt = run->add_option("--n", opt.n, "element/particle count");
    run->add_option("--seed", opt.seed, "RNG seed");
    run->add_option("--paths", opt.paths, "Monte Carlo path count");
    run->add_option("--steps", opt.steps, "integration step count");
    run->add_option("--x-max", opt.x_max, "integration upper bound");
    run->add_option("--rows", opt.rows, "grid rows");
    run->add_option("--cols", opt.cols, "grid cols");
    run->add_option("--orders", opt.orders, "all or comma list: row,rrow,col,rcol");
    run->add_option("--partitions", opt.partitions, "parallel partitions");
    run->add_option("--workers", opt.workers, "parallel worker threads");
    run->add_option("--s0", opt.mc.S0, "spot price");
    run->add_option("--strike", opt.mc.K, "strike price");
    run->add_option("--rate", opt.mc.r, "risk-free rate");
    run->add_option("--sigma", opt.mc.sigma, "volatility");
    run->add_option("--maturity", opt.mc.T, "maturity in years");
    run->add_option("--out", opt.out_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--output", opt.output_path, "output path (default stdout)");

    CLI::App* t8 = app.add_subcommand("table8", "measured vs published op counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    opt.n_given = n_opt->count() > 0;
    try {
        if (run->parsed()) return do_run(opt);
        if (t8->parsed()) return do_table8();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
