#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fusesim/layer.hpp"
#include "fusesim/ops.hpp"
#include "fusesim/sim.hpp"

namespace fusesim {
namespace netmodel {

std::vector<std::string> builtin_names();

/// Builtin architectures: mobilenet-v1, mobilenet-v2, mnasnet-b1,
/// mobilenet-v3-small, mobilenet-v3-large (224x224x3 inputs). If the
/// FUSECONV_BUILTIN_DIR environment variable is set, <dir>/<name>.net is
/// loaded instead of the compiled-in definition.
NetworkSpec builtin(const std::string& name);

/// Line-oriented network config:
///   name kind H W Cin K Cout stride pad act block [se_ch se_sq]
/// '#' starts a comment; block is -1 for standalone layers. Validates the
/// shape chain and reports the first breaking layer index.
NetworkSpec load_network(const std::string& path);
NetworkSpec parse_network(std::istream& in, const std::string& name);
void save_network(const NetworkSpec& net, const std::string& path);
std::string format_network(const NetworkSpec& net);

/// Shape-chain check; throws naming the first inconsistent layer index.
void validate_network(const NetworkSpec& net);

/// Convolution/FC operator stages (a fused depthwise-separable or FuSe layer
/// counts its filtering and pointwise stages separately).
int stage_count(const NetworkSpec& net);

/// Replace depthwise separable layers by the FuSe kind. fraction 1.0 replaces
/// all of them; fraction 0.5 replaces the half with the largest whole-network
/// analytical-latency saving on cfg (ties broken toward earlier layers). With
/// the Full variant, squeeze-excite layers of transformed blocks widen to the
/// 2C concatenated channels. `selected`, when non-null, receives the names of
/// the replaced layers.
NetworkSpec transform_fuse(const NetworkSpec& net, ops::FuseVariant variant, double fraction = 1.0,
                           const sim::ArrayConfig& cfg = {64, 64, true, false},
                           std::vector<std::string>* selected = nullptr);

/// Rounds v to a multiple of `divisor`, never below it and never under 0.9*v —
/// the channel-rounding rule used by the MobileNet-V3 family.
int make_divisible(int v, int divisor = 8);

/// Whole-network operation count: convolution/FC multiplies plus per-output
/// post-processing (batch norm 1 op/element; ReLU 1, hard-swish 8) plus
/// squeeze-excite pooling/scaling (2 ops per gated element). This is the
/// convention under which the builtin networks land on the published totals.
uint64_t network_macs(const NetworkSpec& net);

/// Whole-network parameters: filter weights plus batch-norm scale/shift pairs
/// and FC/SE biases.
uint64_t network_params(const NetworkSpec& net);

}  // namespace netmodel
}  // namespace fusesim
