#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusesim/layer.hpp"
#include "fusesim/ops.hpp"
#include "fusesim/tensor.hpp"

namespace fusesim {
namespace sim {

struct ArrayConfig {
    int rows = 64;
    int cols = 64;
    bool broadcast_enabled = false;  // per-row weight broadcast links
    bool fold_overlap = false;       // overlap a fold's drain with the next fold's fill
};

enum class Strategy { Im2colMatmul, ChannelwiseDotProduct, FuSeRowFold };

/// Operator class used for latency-distribution reporting.
enum class OpClass { Depthwise, Fuse, Pointwise, Standard, FullyConnected };
const char* to_string(OpClass c);

/// One scheduling round on the array. Matmul-lowered folds compute an
/// r x c output fragment accumulating over the full contraction depth;
/// FuSe folds hold one input row (or column) slice per array row and
/// broadcast K weights along the rows.
struct Fold {
    int r = 0;            // active array rows
    int c = 0;            // active array columns
    int contraction = 0;  // accumulation depth streamed through each PE
    int extra_drain = 0;  // adder-tree depth appended after drain (channelwise)

    // matmul fragment origin (a_col origin is always 0: contraction is never split)
    int a_row0 = 0;
    int b_row0 = 0;  // weight-slice origin (nonzero for per-kernel-position folds)
    int b_col0 = 0;
    int out_row0 = 0;
    int out_col0 = 0;

    // FuSe fragment: lanes[i] = (channel, orthogonal output index) held by
    // array row i; columns cover output positions [col0, col0 + c) along the
    // convolved axis; stage 0 = row filters, stage 1 = column filters.
    int stage = 0;
    int col0 = 0;
    std::vector<std::pair<int, int>> lanes;

    uint64_t fill_cycles() const { return static_cast<uint64_t>(r + c - 2); }
    uint64_t drain_cycles() const { return static_cast<uint64_t>(r + extra_drain); }
    uint64_t cycles() const { return fill_cycles() + contraction + drain_cycles(); }
    uint64_t macs() const {
        return static_cast<uint64_t>(r) * c * contraction;
    }
};

struct MappingPlan {
    Strategy strategy = Strategy::Im2colMatmul;
    OpClass op_class = OpClass::Pointwise;
    std::vector<Fold> folds;

    // matmul strategies: operands A [a_rows, a_cols-per-fold], B [b_rows, b_cols]
    int a_rows = 0;
    int a_cols = 0;
    int b_rows = 0;
    int b_cols = 0;
    int out_rows = 0;
    int out_cols = 0;
    // channelwise: the product has `group` blocks of out_rows rows (one block
    // per kernel position) that the adder tree reduces per output element
    int group = 1;

    // FuSe: operand geometry (per filter group)
    int kernel = 0;
    int stride = 1;
    int padding = 0;
    int in_h = 0;
    int in_w = 0;
    int out_h = 0;
    int out_w = 0;
    int channels = 0;  // Cg, channels per filter group
};

uint64_t plan_cycles(const MappingPlan& plan, const ArrayConfig& cfg);
uint64_t plan_compute_cycles(const MappingPlan& plan);  // contraction phases only
uint64_t plan_macs(const MappingPlan& plan);

struct CycleReport {
    uint64_t total_cycles = 0;
    uint64_t compute_cycles = 0;  // contraction-phase cycles
    uint64_t mac_events = 0;
    std::vector<uint64_t> fold_cycles;

    double utilization(const ArrayConfig& cfg) const {
        uint64_t pes = static_cast<uint64_t>(cfg.rows) * cfg.cols;
        return total_cycles == 0 ? 0.0
                                 : static_cast<double>(mac_events) / (pes * static_cast<double>(total_cycles));
    }
    double contraction_utilization(const ArrayConfig& cfg) const {
        uint64_t pes = static_cast<uint64_t>(cfg.rows) * cfg.cols;
        return compute_cycles == 0
                   ? 0.0
                   : static_cast<double>(mac_events) / (pes * static_cast<double>(compute_cycles));
    }
};

/// Output-stationary matmul tiling: R x T by T x Cc over the array.
MappingPlan plan_matmul(int R, int T, int Cc, const ArrayConfig& cfg, OpClass cls, int tree_depth = 0);

/// Matmul lowering. Standard/Pointwise/FullyConnected layers tile the im2col
/// product. A DepthwiseSeparable layer yields the plan of its depthwise stage:
/// one single-column im2col matmul per channel (the inefficient baseline).
MappingPlan plan_im2col(const LayerSpec& layer, const ArrayConfig& cfg);

/// Channel-wise standard convolution: the channel dimension streams as the
/// contraction and the K^2 partial sums per output are reduced by an adder
/// tree of depth ceil(log2 K^2). Rejects depthwise layers.
MappingPlan plan_channelwise(const LayerSpec& layer, const ArrayConfig& cfg);

/// FuSe 1D stages under the row-broadcast dataflow. Input rows (columns for
/// stage 1) map to array rows, packing multiple channels per fold when a slice
/// is shorter than the array. Requires cfg.broadcast_enabled. The pointwise
/// stage is planned separately via plan_matmul (see plan_layer).
MappingPlan plan_fuse(const LayerSpec& layer, const ArrayConfig& cfg);

/// All plans needed to execute one layer, in dataflow order.
std::vector<MappingPlan> plan_layer(const LayerSpec& layer, const ArrayConfig& cfg);

// Lowering helpers for building simulate() operands.
// Depthwise stage: [C*NM, K*K], channel-major blocks of per-channel im2col.
Tensor depthwise_im2col(const Tensor& input, const ConvGeometry& geom);
// Channelwise matrix: [K*K*NM, C], position-major: row (kk*NM + nm) is the
// input pixel under kernel position kk of output pixel nm, across channels.
Tensor channelwise_matrix(const Tensor& input, const ConvGeometry& geom);

struct SimResult {
    Tensor output;
    CycleReport report;
};

/// Cycle-level playback of a plan. Every MAC event carries an implicit cycle
/// stamp under the output-stationary schedule (operand skew r+c-2, one MAC per
/// PE per cycle, one-cycle links, zero-skew row broadcast); events are
/// enumerated per fold rather than stepping a global grid clock, which yields
/// identical cycle counts and outputs. Operands per strategy:
///   Im2colMatmul / Channelwise: { A, B }
///   FuSeRowFold: { row_input [H,W,Cg], row_filters [K,Cg],
///                  col_input [H,W,Cg], col_filters [K,Cg] }
/// Output: matmul [out_rows, out_cols]; fuse [out_h, out_w, 2*Cg] with row
/// results in channels [0,Cg). Empty plan -> zero cycles, empty tensor.
SimResult simulate(const MappingPlan& plan, const ArrayConfig& cfg,
                   const std::vector<Tensor>& operands);

enum class Mode { Simulate, Analytical };

struct LayerReport {
    std::string name;
    LayerKind kind = LayerKind::Standard;
    uint64_t cycles = 0;
    uint64_t macs = 0;
    double utilization = 0.0;
    std::map<OpClass, uint64_t> class_cycles;
};

struct NetworkReport {
    std::string network;
    std::string variant = "baseline";
    int array_rows = 0;
    int array_cols = 0;
    Mode mode = Mode::Analytical;
    bool fold_overlap = false;
    uint64_t seed = 0;
    uint64_t total_cycles = 0;
    uint64_t total_macs = 0;
    std::vector<LayerReport> layers;
};

/// Per-layer latency of the whole network. Analytical mode sums the closed
/// forms; Simulate mode plays every fold with seeded random operands (the two
/// agree by construction, which is itself a tested property).
NetworkReport estimate_network(const NetworkSpec& net, const ArrayConfig& cfg, Mode mode,
                               uint64_t seed = 1);

}  // namespace sim
}  // namespace fusesim
