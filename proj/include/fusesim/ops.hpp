#pragma once

#include <cstdint>

#include "fusesim/layer.hpp"
#include "fusesim/tensor.hpp"

namespace fusesim {
namespace ops {

enum class FuseVariant { Full, Half };

/// input [H,W,C], filters [C',K,K,C] -> [N,M,C']. Zero padding.
Tensor conv2d_standard(const Tensor& input, const Tensor& filters, const ConvGeometry& geom);

/// input [H,W,C], filters [K,K,C] -> [N,M,C]. Per-channel, no cross-channel sum.
Tensor conv2d_depthwise(const Tensor& input, const Tensor& filters, const ConvGeometry& geom);

/// input [H,W,C], filters [C',C] -> [H,W,C']. Per-pixel matrix-vector product.
Tensor conv_pointwise(const Tensor& input, const Tensor& filters);

/// input [H,W,Cg], filters [K,Cg] -> [H,M,Cg]. 1D convolution along width.
Tensor conv1d_row(const Tensor& input, const Tensor& filters, const ConvGeometry& geom);

/// input [H,W,Cg], filters [K,Cg] -> [N,W,Cg]. 1D convolution along height.
Tensor conv1d_col(const Tensor& input, const Tensor& filters, const ConvGeometry& geom);

/// Fully separable convolution. Row and column 1D stages are concatenated
/// along channels (row outputs first) and projected by a pointwise stage.
///   Full: both stages span all C channels, concat has 2C channels.
///   Half: row stage takes channels [0, C/2), column stage [C/2, C).
/// For stride > 1 each 1D stage also subsamples the orthogonal axis so both
/// stages land on the same N x M grid.
///   row_filters [K, Cg], col_filters [K, Cg], pointwise_filters [C', 2C/D].
Tensor fuseconv(const Tensor& input, FuseVariant variant, const Tensor& row_filters,
                const Tensor& col_filters, const Tensor& pointwise_filters,
                const ConvGeometry& geom);

/// input [H,W,C] -> [N*M, K*K*C]; row r is the flattened receptive field of
/// output pixel r (row-major over (n, m); inner order (ki, kj, c)).
Tensor im2col(const Tensor& input, const ConvGeometry& geom);

/// flat matmul: a [R,T] * b [T,C] -> [R,C]
Tensor matmul(const Tensor& a, const Tensor& b);

/// Exact multiply counts of the layer's convolution/FC arithmetic.
uint64_t count_macs(const LayerSpec& layer);

/// Stored filter-weight counts (batch-norm and bias terms are accounted at
/// the network level, see netmodel).
uint64_t count_params(const LayerSpec& layer);

}  // namespace ops
}  // namespace fusesim
