#include "fusesim/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fusesim {
namespace report {

namespace {
const char* mode_name(sim::Mode m) { return m == sim::Mode::Simulate ? "simulate" : "analytical"; }

std::string array_label(const sim::NetworkReport& rep) {
    return std::to_string(rep.array_rows) + "x" + std::to_string(rep.array_cols);
}
}  // namespace

std::string to_csv(const sim::NetworkReport& rep, bool header) {
    std::ostringstream out;
    if (header) out << "network,variant,array_size,layer,kind,cycles,macs,utilization\n";
    for (const sim::LayerReport& l : rep.layers)
        out << rep.network << "," << rep.variant << "," << array_label(rep) << "," << l.name << ","
            << to_string(l.kind) << "," << l.cycles << "," << l.macs << "," << std::setprecision(6)
            << l.utilization << "\n";
    const uint64_t pes = static_cast<uint64_t>(rep.array_rows) * rep.array_cols;
    const double util = rep.total_cycles == 0 ? 0.0
                                              : static_cast<double>(rep.total_macs) /
                                                    (pes * static_cast<double>(rep.total_cycles));
    out << rep.network << "," << rep.variant << "," << array_label(rep) << ",total,total,"
        << rep.total_cycles << "," << rep.total_macs << "," << std::setprecision(6) << util << "\n";
    return out.str();
}

std::string to_json(const sim::NetworkReport& rep) {
    nlohmann::json j;
    j["network"] = rep.network;
    j["variant"] = rep.variant;
    j["array_size"] = array_label(rep);
    j["metadata"] = {{"mode", mode_name(rep.mode)},
                     {"fold_overlap", rep.fold_overlap},
                     {"seed", rep.seed}};
    j["total_cycles"] = rep.total_cycles;
    j["total_macs"] = rep.total_macs;
    j["layers"] = nlohmann::json::array();
    for (const sim::LayerReport& l : rep.layers) {
        nlohmann::json jl = {{"layer", l.name},
                             {"kind", to_string(l.kind)},
                             {"cycles", l.cycles},
                             {"macs", l.macs},
                             {"utilization", l.utilization}};
        for (const auto& [cls, cyc] : l.class_cycles) jl["class_cycles"][to_string(cls)] = cyc;
        j["layers"].push_back(std::move(jl));
    }
    return j.dump(2) + "\n";
}

std::string to_table(const sim::NetworkReport& rep) {
    std::ostringstream out;
    out << rep.network << " (" << rep.variant << ") on " << array_label(rep)
        << " array, mode=" << mode_name(rep.mode) << "\n";
    out << std::left << std::setw(18) << "layer" << std::setw(10) << "kind" << std::right
        << std::setw(14) << "cycles" << std::setw(16) << "macs" << std::setw(12) << "util" << "\n";
    for (const sim::LayerReport& l : rep.layers)
        out << std::left << std::setw(18) << l.name << std::setw(10) << to_string(l.kind)
            << std::right << std::setw(14) << l.cycles << std::setw(16) << l.macs << std::setw(12)
            << std::fixed << std::setprecision(4) << l.utilization << "\n";
    out << std::left << std::setw(18) << "total" << std::setw(10) << "" << std::right
        << std::setw(14) << rep.total_cycles << std::setw(16) << rep.total_macs << "\n";
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

}  // namespace report
}  // namespace fusesim
