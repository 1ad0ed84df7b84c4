#include "fusesim/cost.hpp"

#include "fusesim/ops.hpp"

namespace fusesim {
namespace cost {

uint64_t analytical_cycles(const LayerSpec& layer, const sim::ArrayConfig& cfg) {
    uint64_t total = 0;
    for (const sim::MappingPlan& plan : sim::plan_layer(layer, cfg))
        total += sim::plan_cycles(plan, cfg);
    return total;
}

CostBreakdown operator_distribution(const NetworkSpec& net, const sim::ArrayConfig& cfg) {
    CostBreakdown bd;
    bd.network = net.name;
    for (const LayerSpec& layer : net.layers) {
        LayerCost lc;
        lc.name = layer.name;
        lc.kind = layer.kind;
        lc.macs = ops::count_macs(layer);
        lc.params = ops::count_params(layer);
        for (const sim::MappingPlan& plan : sim::plan_layer(layer, cfg)) {
            uint64_t cycles = sim::plan_cycles(plan, cfg);
            lc.analytical_cycles += cycles;
            lc.class_cycles[plan.op_class] += cycles;
        }
        bd.total_macs += lc.macs;
        bd.total_params += lc.params;
        bd.total_cycles += lc.analytical_cycles;
        for (const auto& [cls, cyc] : lc.class_cycles) bd.class_fraction[cls] += static_cast<double>(cyc);
        bd.layers.push_back(std::move(lc));
    }
    if (bd.total_cycles > 0)
        for (auto& [cls, v] : bd.class_fraction) v /= static_cast<double>(bd.total_cycles);
    return bd;
}

}  // namespace cost
}  // namespace fusesim
