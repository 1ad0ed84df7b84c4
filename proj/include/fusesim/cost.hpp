#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusesim/layer.hpp"
#include "fusesim/sim.hpp"

namespace fusesim {
namespace cost {

struct LayerCost {
    std::string name;
    LayerKind kind = LayerKind::Standard;
    uint64_t macs = 0;    // arithmetic multiplies only (ops::count_macs)
    uint64_t params = 0;  // stored filter weights only (ops::count_params)
    uint64_t analytical_cycles = 0;
    std::map<sim::OpClass, uint64_t> class_cycles;
};

struct CostBreakdown {
    std::string network;
    uint64_t total_macs = 0;
    uint64_t total_params = 0;
    uint64_t total_cycles = 0;
    std::vector<LayerCost> layers;
    std::map<sim::OpClass, double> class_fraction;  // fractions of total cycles, sum to 1
};

/// Closed form of the simulator's fill/contraction/drain convention, summed
/// over the layer's plans. Agrees with simulate() exactly by construction.
uint64_t analytical_cycles(const LayerSpec& layer, const sim::ArrayConfig& cfg);

CostBreakdown operator_distribution(const NetworkSpec& net, const sim::ArrayConfig& cfg);

}  // namespace cost
}  // namespace fusesim
