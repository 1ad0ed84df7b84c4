#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusesim/tensor.hpp"

namespace fusesim {

enum class LayerKind {
    Standard,
    DepthwiseSeparable,
    FuSeFull,
    FuSeHalf,
    Pointwise,
    FullyConnected,
    SqueezeExcite,
};

enum class Activation { None, ReLU, HardSwish };

const char* to_string(LayerKind k);
const char* to_string(Activation a);
LayerKind layer_kind_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

/// One network layer. DepthwiseSeparable and the FuSe kinds are fused units
/// (filtering stage + pointwise projection). SqueezeExcite is modeled as a
/// shape pass-through whose cost is driven by the gated channel count
/// (se_channels), which sits on the expanded channels in MobileNetV3 blocks.
struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::Standard;
    ConvGeometry geom;
    Activation act = Activation::None;
    int se_channels = 0;   // SqueezeExcite only: gated channel count
    int se_squeeze = 0;    // SqueezeExcite only: bottleneck width
    int block_id = -1;     // groups expansion/filter/SE layers of one block

    void validate() const;
    bool is_fuse() const { return kind == LayerKind::FuSeFull || kind == LayerKind::FuSeHalf; }
};

struct NetworkSpec {
    std::string name;
    int input_h = 224;
    int input_w = 224;
    int input_c = 3;
    std::vector<LayerSpec> layers;
};

}  // namespace fusesim
