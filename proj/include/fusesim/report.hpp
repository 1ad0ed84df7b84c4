#pragma once

#include <string>

#include "fusesim/sim.hpp"

namespace fusesim {
namespace report {

/// CSV with header: network,variant,array_size,layer,kind,cycles,macs,utilization
/// plus a final `total` row per report.
std::string to_csv(const sim::NetworkReport& rep, bool header = true);

/// JSON document with run metadata (mode, fold_overlap, seed) and the same
/// per-layer fields as the CSV.
std::string to_json(const sim::NetworkReport& rep);

/// Fixed-width table for terminals.
std::string to_table(const sim::NetworkReport& rep);

void write_file(const std::string& path, const std::string& content);

}  // namespace report
}  // namespace fusesim
