#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "fusesim/cost.hpp"
#include "fusesim/netmodel.hpp"
#include "fusesim/ops.hpp"
#include "fusesim/report.hpp"
#include "fusesim/ria.hpp"
#include "fusesim/sim.hpp"

using namespace fusesim;

namespace {

struct VariantSpec {
    ops::FuseVariant variant = ops::FuseVariant::Half;
    double fraction = 1.0;
};

VariantSpec parse_variant(const std::string& s) {
    if (s == "full") return {ops::FuseVariant::Full, 1.0};
    if (s == "half") return {ops::FuseVariant::Half, 1.0};
    if (s == "full50") return {ops::FuseVariant::Full, 0.5};
    if (s == "half50") return {ops::FuseVariant::Half, 0.5};
    throw CLI::ValidationError("--variant", "expected one of full, half, full50, half50");
}

std::pair<int, int> parse_array(const std::string& s) {
    int r = 0, c = 0;
    char x = 0;
    std::istringstream in(s);
    if (!(in >> r) || !(in >> x) || (x != 'x' && x != 'X') || !(in >> c) || r < 1 || c < 1)
        throw CLI::ValidationError("--array", "expected ROWSxCOLS with positive extents, e.g. 64x64");
    return {r, c};
}

NetworkSpec resolve_network(const std::string& src) {
    if (src.find('/') != std::string::npos || src.size() > 4 && src.substr(src.size() - 4) == ".net")
        return netmodel::load_network(src);
    std::ifstream probe(src);
    if (probe.good()) return netmodel::load_network(src);
    return netmodel::builtin(src);
}

sim::Mode parse_mode(const std::string& s) {
    if (s == "simulate") return sim::Mode::Simulate;
    if (s == "analytical") return sim::Mode::Analytical;
    throw CLI::ValidationError("--mode", "expected simulate or analytical");
}

void emit(const std::vector<sim::NetworkReport>& reports, const std::string& format,
          const std::string& out_path) {
    std::string text;
    for (size_t i = 0; i < reports.size(); ++i) {
        if (format == "csv")
            text += report::to_csv(reports[i], i == 0);
        else if (format == "json")
            text += report::to_json(reports[i]);
        else
            text += report::to_table(reports[i]) + "\n";
    }
    if (out_path.empty())
        std::cout << text;
    else
        report::write_file(out_path, text);
}

double mround(uint64_t v) { return static_cast<double>(v) / 1e6; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fusesim: systolic-array latency and operator-decomposition toolkit"};
    app.require_subcommand(1);

    // Shared option storage.
    std::string network, variant_str, mode_str = "analytical", format = "table", out_path;
    std::vector<std::string> arrays;
    uint64_t seed = 1;
    bool no_broadcast = false, fold_overlap = false;

    auto add_common = [&](CLI::App* cmd, bool needs_variant) {
        cmd->add_option("--network", network, "builtin name or network file")->required();
        auto* v = cmd->add_option("--variant", variant_str, "full, half, full50 or half50");
        if (needs_variant) v->required();
        cmd->add_option("--array", arrays, "array size ROWSxCOLS (repeatable)");
        cmd->add_option("--mode", mode_str, "simulate or analytical");
        cmd->add_option("--seed", seed, "RNG seed for simulate-mode operands");
        cmd->add_option("--format", format, "table, csv or json");
        cmd->add_option("--out", out_path, "write report to file instead of stdout");
        cmd->add_flag("--no-broadcast", no_broadcast, "disable the row-broadcast links");
        cmd->add_flag("--fold-overlap", fold_overlap, "overlap fold drain with next fold fill");
    };

    // ria-check
    auto* ria_cmd = app.add_subcommand("ria-check", "classify a recurrence system");
    std::string ria_builtin, ria_file;
    ria_cmd->add_option("--builtin", ria_builtin, "matmul, conv2d, conv1d or conv2d-im2col");
    ria_cmd->add_option("--file", ria_file, "recurrence text file");

    auto* transform_cmd = app.add_subcommand("transform", "apply the FuSe replacement pass");
    add_common(transform_cmd, true);

    auto* estimate_cmd = app.add_subcommand("estimate", "per-layer latency report");
    add_common(estimate_cmd, false);

    auto* sweep_cmd = app.add_subcommand("sweep", "speedups across array sizes");
    add_common(sweep_cmd, false);

    auto* compare_cmd = app.add_subcommand("compare", "baseline vs FuSe-variant speedup");
    add_common(compare_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ria_cmd->parsed()) {
            ria::RecurrenceSystem sys;
            if (!ria_builtin.empty()) {
                sys = ria::builtin(ria_builtin);
            } else if (!ria_file.empty()) {
                std::ifstream in(ria_file);
                if (!in) throw std::runtime_error("cannot open '" + ria_file + "'");
                std::stringstream buf;
                buf << in.rdbuf();
                sys = ria::parse_system(buf.str(), ria_file);
            } else {
                throw std::runtime_error("ria-check: pass --builtin or --file");
            }
            ria::OffsetAnalysis oa = ria::analyze_offsets(sys);
            std::cout << "system: " << sys.name << "\n";
            for (size_t r = 0; r < sys.relations.size(); ++r) {
                std::cout << "relation " << r + 1 << ":\n";
                for (const ria::TermOffset& t : oa.per_relation[r])
                    std::cout << "  " << t.var << " offset " << t.str() << "\n";
            }
            ria::Classification cls = ria::classify(sys);
            if (cls.is_ria) {
                std::cout << "verdict: RIA\n";
            } else {
                std::cout << "verdict: NotRIA";
                for (const std::string& r : cls.reasons) std::cout << "\n  " << r;
                std::cout << "\n";
            }
            std::cout << "note: the verdict applies to this encoding only, not to all "
                         "possible encodings of the computation\n";
            return 0;
        }

        sim::ArrayConfig cfg;
        cfg.broadcast_enabled = !no_broadcast;
        cfg.fold_overlap = fold_overlap;
        std::vector<std::pair<int, int>> sizes;
        for (const std::string& a : arrays) sizes.push_back(parse_array(a));

        if (transform_cmd->parsed()) {
            NetworkSpec base = resolve_network(network);
            VariantSpec vs = parse_variant(variant_str);
            if (!sizes.empty()) {
                cfg.rows = sizes[0].first;
                cfg.cols = sizes[0].second;
            }
            std::vector<std::string> chosen;
            NetworkSpec fused = netmodel::transform_fuse(base, vs.variant, vs.fraction, cfg, &chosen);
            std::printf("%-22s %12s %12s\n", "", "MACs (M)", "params (M)");
            std::printf("%-22s %12.2f %12.3f\n", base.name.c_str(), mround(netmodel::network_macs(base)),
                        mround(netmodel::network_params(base)));
            std::printf("%-22s %12.2f %12.3f\n", (base.name + "-" + variant_str).c_str(),
                        mround(netmodel::network_macs(fused)), mround(netmodel::network_params(fused)));
            if (vs.fraction < 1.0) {
                std::cout << "replaced layers:";
                for (const std::string& n : chosen) std::cout << " " << n;
                std::cout << "\n";
            }
            if (!out_path.empty()) {
                netmodel::save_network(fused, out_path);
                std::cout << "wrote " << out_path << "\n";
            }
            return 0;
        }

        if (estimate_cmd->parsed() || sweep_cmd->parsed()) {
            if (sizes.empty()) {
                if (sweep_cmd->parsed())
                    sizes = {{8, 8}, {16, 16}, {32, 32}, {64, 64}};
                else
                    sizes = {{64, 64}};
            }
            sim::Mode mode = parse_mode(mode_str);
            NetworkSpec base = resolve_network(network);
            NetworkSpec net = base;
            std::string vlabel = "baseline";
            if (!variant_str.empty()) {
                VariantSpec vs = parse_variant(variant_str);
                net = netmodel::transform_fuse(base, vs.variant, vs.fraction, cfg);
                vlabel = variant_str;
            }
            // Independent (network, size) runs fan out concurrently; reports
            // are assembled in input order regardless of completion order.
            std::vector<std::future<sim::NetworkReport>> futs;
            for (auto [r, c] : sizes)
                futs.push_back(std::async(std::launch::async, [&, r = r, c = c] {
                    sim::ArrayConfig run = cfg;
                    run.rows = r;
                    run.cols = c;
                    sim::NetworkReport rep = sim::estimate_network(net, run, mode, seed);
                    rep.variant = vlabel;
                    return rep;
                }));
            std::vector<sim::NetworkReport> reports;
            for (auto& f : futs) reports.push_back(f.get());
            if (sweep_cmd->parsed() && !variant_str.empty()) {
                // also report baseline totals and the speedup trend
                std::vector<std::future<uint64_t>> bfuts;
                for (auto [r, c] : sizes)
                    bfuts.push_back(std::async(std::launch::async, [&, r = r, c = c] {
                        sim::ArrayConfig run = cfg;
                        run.rows = r;
                        run.cols = c;
                        return sim::estimate_network(base, run, mode, seed).total_cycles;
                    }));
                for (size_t i = 0; i < sizes.size(); ++i) {
                    uint64_t b = bfuts[i].get();
                    std::printf("array %dx%d: baseline %llu cycles, %s %llu cycles, speedup %.2fx\n",
                                sizes[i].first, sizes[i].second, static_cast<unsigned long long>(b),
                                vlabel.c_str(),
                                static_cast<unsigned long long>(reports[i].total_cycles),
                                static_cast<double>(b) / static_cast<double>(reports[i].total_cycles));
                }
            }
            emit(reports, format, out_path);
            return 0;
        }

        if (compare_cmd->parsed()) {
            if (sizes.empty()) sizes = {{64, 64}};
            cfg.rows = sizes[0].first;
            cfg.cols = sizes[0].second;
            sim::Mode mode = parse_mode(mode_str);
            NetworkSpec base = resolve_network(network);
            VariantSpec vs = parse_variant(variant_str);
            NetworkSpec fused = netmodel::transform_fuse(base, vs.variant, vs.fraction, cfg);
            sim::NetworkReport rb = sim::estimate_network(base, cfg, mode, seed);
            sim::NetworkReport rf = sim::estimate_network(fused, cfg, mode, seed);
            rf.variant = variant_str;
            std::printf("%-18s %14s %14s %9s\n", "layer", "base cycles", "fuse cycles", "speedup");
            for (size_t i = 0; i < rb.layers.size(); ++i) {
                double sp = rf.layers[i].cycles == 0
                                ? 1.0
                                : static_cast<double>(rb.layers[i].cycles) / rf.layers[i].cycles;
                std::printf("%-18s %14llu %14llu %8.2fx\n", rb.layers[i].name.c_str(),
                            static_cast<unsigned long long>(rb.layers[i].cycles),
                            static_cast<unsigned long long>(rf.layers[i].cycles), sp);
            }
            std::printf("%-18s %14llu %14llu %8.2fx\n", "total",
                        static_cast<unsigned long long>(rb.total_cycles),
                        static_cast<unsigned long long>(rf.total_cycles),
                        static_cast<double>(rb.total_cycles) / static_cast<double>(rf.total_cycles));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
