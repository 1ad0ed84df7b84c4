#include "fusesim/ops.hpp"

#include <stdexcept>
#include <string>

namespace fusesim {

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Standard: return "standard";
        case LayerKind::DepthwiseSeparable: return "dwsep";
        case LayerKind::FuSeFull: return "fusefull";
        case LayerKind::FuSeHalf: return "fusehalf";
        case LayerKind::Pointwise: return "pointwise";
        case LayerKind::FullyConnected: return "fc";
        case LayerKind::SqueezeExcite: return "se";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::None: return "none";
        case Activation::ReLU: return "relu";
        case Activation::HardSwish: return "hswish";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "standard") return LayerKind::Standard;
    if (s == "dwsep") return LayerKind::DepthwiseSeparable;
    if (s == "fusefull") return LayerKind::FuSeFull;
    if (s == "fusehalf") return LayerKind::FuSeHalf;
    if (s == "pointwise") return LayerKind::Pointwise;
    if (s == "fc") return LayerKind::FullyConnected;
    if (s == "se") return LayerKind::SqueezeExcite;
    throw std::invalid_argument("unknown layer kind '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
    if (s == "none") return Activation::None;
    if (s == "relu") return Activation::ReLU;
    if (s == "hswish") return Activation::HardSwish;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

void LayerSpec::validate() const {
    geom.validate();
    if (kind == LayerKind::Pointwise || kind == LayerKind::FullyConnected) {
        if (geom.kernel != 1)
            throw std::invalid_argument("layer '" + name + "': kind " + to_string(kind) +
                                        " requires kernel 1, got " + std::to_string(geom.kernel));
    }
    if (kind == LayerKind::FuSeHalf && geom.channels_in % 2 != 0)
        throw std::invalid_argument("layer '" + name + "': FuSe half variant needs even channel count, got " +
                                    std::to_string(geom.channels_in));
    if (kind == LayerKind::SqueezeExcite && (se_channels < 1 || se_squeeze < 1))
        throw std::invalid_argument("layer '" + name + "': squeeze-excite needs se_channels/se_squeeze >= 1");
}

namespace ops {

namespace {

float padded_at(const Tensor& in, int h, int w, int c) {
    if (h < 0 || w < 0 || h >= in.dim(0) || w >= in.dim(1)) return 0.0f;
    return in.at3(h, w, c);
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Tensor conv2d_standard(const Tensor& input, const Tensor& filters, const ConvGeometry& geom) {
    geom.validate();
    require(input.rank() == 3, "conv2d_standard: input must be rank 3 [H,W,C]");
    require(filters.rank() == 4, "conv2d_standard: filters must be rank 4 [C',K,K,C]");
    require(input.dim(0) == geom.input_h && input.dim(1) == geom.input_w,
            "conv2d_standard: input spatial dims disagree with geometry");
    require(input.dim(2) == geom.channels_in,
            "conv2d_standard: input channels " + std::to_string(input.dim(2)) +
                " != geometry channels_in " + std::to_string(geom.channels_in));
    require(filters.dim(0) == geom.channels_out, "conv2d_standard: filter count != channels_out");
    require(filters.dim(1) == geom.kernel && filters.dim(2) == geom.kernel,
            "conv2d_standard: filter kernel dims != geometry kernel");
    require(filters.dim(3) == geom.channels_in, "conv2d_standard: filter channels != input channels");

    const int N = geom.out_h(), M = geom.out_w();
    const int K = geom.kernel, C = geom.channels_in, F = geom.channels_out;
    const int s = geom.stride, p = geom.padding;
    Tensor out({N, M, F});
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m)
            for (int f = 0; f < F; ++f) {
                float acc = 0.0f;
                for (int i = 0; i < K; ++i)
                    for (int j = 0; j < K; ++j)
                        for (int c = 0; c < C; ++c)
                            acc += padded_at(input, n * s + i - p, m * s + j - p, c) *
                                   filters[((static_cast<size_t>(f) * K + i) * K + j) * C + c];
                out.at3(n, m, f) = acc;
            }
    return out;
}

Tensor conv2d_depthwise(const Tensor& input, const Tensor& filters, const ConvGeometry& geom) {
    geom.validate();
    require(input.rank() == 3, "conv2d_depthwise: input must be rank 3 [H,W,C]");
    require(filters.rank() == 3, "conv2d_depthwise: filters must be rank 3 [K,K,C]");
    require(filters.dim(2) == input.dim(2),
            "conv2d_depthwise: filter channels " + std::to_string(filters.dim(2)) +
                " != input channels " + std::to_string(input.dim(2)));
    require(input.dim(2) == geom.channels_in, "conv2d_depthwise: input channels != geometry channels_in");
    require(filters.dim(0) == geom.kernel && filters.dim(1) == geom.kernel,
            "conv2d_depthwise: filter kernel dims != geometry kernel");

    const int N = geom.out_h(), M = geom.out_w();
    const int K = geom.kernel, C = geom.channels_in;
    const int s = geom.stride, p = geom.padding;
    Tensor out({N, M, C});
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m)
            for (int c = 0; c < C; ++c) {
                float acc = 0.0f;
                for (int i = 0; i < K; ++i)
                    for (int j = 0; j < K; ++j)
                        acc += padded_at(input, n * s + i - p, m * s + j - p, c) *
                               filters[(static_cast<size_t>(i) * K + j) * C + c];
                out.at3(n, m, c) = acc;
            }
    return out;
}

Tensor conv_pointwise(const Tensor& input, const Tensor& filters) {
    require(input.rank() == 3, "conv_pointwise: input must be rank 3 [H,W,C]");
    require(filters.rank() == 2, "conv_pointwise: filters must be rank 2 [C',C]");
    require(filters.dim(1) == input.dim(2),
            "conv_pointwise: filter inner dim " + std::to_string(filters.dim(1)) +
                " != input channels " + std::to_string(input.dim(2)));
    const int H = input.dim(0), W = input.dim(1), C = input.dim(2), F = filters.dim(0);
    Tensor out({H, W, F});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
            for (int f = 0; f < F; ++f) {
                float acc = 0.0f;
                for (int c = 0; c < C; ++c) acc += input.at3(h, w, c) * filters.at2(f, c);
                out.at3(h, w, f) = acc;
            }
    return out;
}

Tensor conv1d_row(const Tensor& input, const Tensor& filters, const ConvGeometry& geom) {
    require(input.rank() == 3, "conv1d_row: input must be rank 3 [H,W,Cg]");
    require(filters.rank() == 2, "conv1d_row: filters must be rank 2 [K,Cg]");
    require(filters.dim(1) == input.dim(2), "conv1d_row: filter channels != input channels");
    const int H = input.dim(0), W = input.dim(1), C = input.dim(2);
    const int K = geom.kernel, s = geom.stride, p = geom.padding;
    require(K == filters.dim(0), "conv1d_row: filter length != geometry kernel");
    const int M = (W + 2 * p - K) / s + 1;
    require(K <= W + 2 * p, "conv1d_row: kernel " + std::to_string(K) + " exceeds padded width");
    Tensor out({H, M, C});
    for (int h = 0; h < H; ++h)
        for (int m = 0; m < M; ++m)
            for (int c = 0; c < C; ++c) {
                float acc = 0.0f;
                for (int k = 0; k < K; ++k)
                    acc += padded_at(input, h, m * s + k - p, c) * filters.at2(k, c);
                out.at3(h, m, c) = acc;
            }
    return out;
}

Tensor conv1d_col(const Tensor& input, const Tensor& filters, const ConvGeometry& geom) {
    require(input.rank() == 3, "conv1d_col: input must be rank 3 [H,W,Cg]");
    require(filters.rank() == 2, "conv1d_col: filters must be rank 2 [K,Cg]");
    require(filters.dim(1) == input.dim(2), "conv1d_col: filter channels != input channels");
    const int H = input.dim(0), W = input.dim(1), C = input.dim(2);
    const int K = geom.kernel, s = geom.stride, p = geom.padding;
    require(K == filters.dim(0), "conv1d_col: filter length != geometry kernel");
    require(K <= H + 2 * p, "conv1d_col: kernel " + std::to_string(K) + " exceeds padded height");
    const int N = (H + 2 * p - K) / s + 1;
    Tensor out({N, W, C});
    for (int n = 0; n < N; ++n)
        for (int w = 0; w < W; ++w)
            for (int c = 0; c < C; ++c) {
                float acc = 0.0f;
                for (int k = 0; k < K; ++k)
                    acc += padded_at(input, n * s + k - p, w, c) * filters.at2(k, c);
                out.at3(n, w, c) = acc;
            }
    return out;
}

Tensor fuseconv(const Tensor& input, FuseVariant variant, const Tensor& row_filters,
                const Tensor& col_filters, const Tensor& pointwise_filters,
                const ConvGeometry& geom) {
    geom.validate();
    require(input.rank() == 3, "fuseconv: input must be rank 3 [H,W,C]");
    const int C = input.dim(2);
    require(C == geom.channels_in, "fuseconv: input channels != geometry channels_in");
    const int D = variant == FuseVariant::Full ? 1 : 2;
    if (D == 2) require(C % 2 == 0, "fuseconv: half variant needs even channel count, got " + std::to_string(C));
    const int Cg = C / D;
    require(row_filters.rank() == 2 && row_filters.dim(1) == Cg,
            "fuseconv: row filter group must span " + std::to_string(Cg) + " channels");
    require(col_filters.rank() == 2 && col_filters.dim(1) == Cg,
            "fuseconv: column filter group must span " + std::to_string(Cg) + " channels");
    require(pointwise_filters.rank() == 2 && pointwise_filters.dim(1) == 2 * Cg,
            "fuseconv: pointwise filters must take " + std::to_string(2 * Cg) + " channels");

    const int N = geom.out_h(), M = geom.out_w();
    const int s = geom.stride;

    // Row group: channels [0, Cg); column group: [C - Cg, C).
    // (Full: both groups alias the whole channel range.)
    Tensor row_in({input.dim(0), input.dim(1), Cg});
    Tensor col_in({input.dim(0), input.dim(1), Cg});
    for (int h = 0; h < input.dim(0); ++h)
        for (int w = 0; w < input.dim(1); ++w)
            for (int c = 0; c < Cg; ++c) {
                row_in.at3(h, w, c) = input.at3(h, w, c);
                col_in.at3(h, w, c) = input.at3(h, w, C - Cg + c);
            }

    Tensor row_full = conv1d_row(row_in, row_filters, geom);  // [H, M, Cg]
    Tensor col_full = conv1d_col(col_in, col_filters, geom);  // [N, W, Cg]

    // Subsample the orthogonal axis so both stages land on N x M.
    Tensor concat({N, M, 2 * Cg});
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m)
            for (int c = 0; c < Cg; ++c) {
                concat.at3(n, m, c) = row_full.at3(n * s, m, c);
                concat.at3(n, m, Cg + c) = col_full.at3(n, m * s, c);
            }
    return conv_pointwise(concat, pointwise_filters);
}

Tensor im2col(const Tensor& input, const ConvGeometry& geom) {
    geom.validate();
    require(input.rank() == 3, "im2col: input must be rank 3 [H,W,C]");
    require(input.dim(2) == geom.channels_in, "im2col: input channels != geometry channels_in");
    const int N = geom.out_h(), M = geom.out_w();
    const int K = geom.kernel, C = geom.channels_in;
    const int s = geom.stride, p = geom.padding;
    Tensor out({N * M, K * K * C});
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m) {
            const int r = n * M + m;
            int col = 0;
            for (int i = 0; i < K; ++i)
                for (int j = 0; j < K; ++j)
                    for (int c = 0; c < C; ++c)
                        out.at2(r, col++) = padded_at(input, n * s + i - p, m * s + j - p, c);
        }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul: operands must be rank 2");
    require(a.dim(1) == b.dim(0), "matmul: inner dims disagree (" + std::to_string(a.dim(1)) +
                                      " vs " + std::to_string(b.dim(0)) + ")");
    const int R = a.dim(0), T = a.dim(1), Cc = b.dim(1);
    Tensor out({R, Cc});
    for (int i = 0; i < R; ++i)
        for (int k = 0; k < T; ++k) {
            const float av = a.at2(i, k);
            for (int j = 0; j < Cc; ++j) out.at2(i, j) += av * b.at2(k, j);
        }
    return out;
}

uint64_t count_macs(const LayerSpec& layer) {
    const ConvGeometry& g = layer.geom;
    const uint64_t N = static_cast<uint64_t>(g.out_h());
    const uint64_t M = static_cast<uint64_t>(g.out_w());
    const uint64_t C = static_cast<uint64_t>(g.channels_in);
    const uint64_t K = static_cast<uint64_t>(g.kernel);
    const uint64_t Co = static_cast<uint64_t>(g.channels_out);
    switch (layer.kind) {
        case LayerKind::Standard: return N * M * Co * K * K * C;
        case LayerKind::DepthwiseSeparable: return N * M * C * (K * K + Co);
        case LayerKind::FuSeFull: return 2 * N * M * C * (K + Co);
        case LayerKind::FuSeHalf: return N * M * C * (K + Co);
        case LayerKind::Pointwise: return N * M * C * Co;
        case LayerKind::FullyConnected: return C * Co;
        case LayerKind::SqueezeExcite:
            return 2ull * static_cast<uint64_t>(layer.se_channels) * layer.se_squeeze;
    }
    throw std::invalid_argument("count_macs: unsupported layer kind");
}

uint64_t count_params(const LayerSpec& layer) {
    const ConvGeometry& g = layer.geom;
    const uint64_t C = static_cast<uint64_t>(g.channels_in);
    const uint64_t K = static_cast<uint64_t>(g.kernel);
    const uint64_t Co = static_cast<uint64_t>(g.channels_out);
    switch (layer.kind) {
        case LayerKind::Standard: return K * K * C * Co;
        case LayerKind::DepthwiseSeparable: return C * (K * K + Co);
        case LayerKind::FuSeFull: return 2 * C * (K + Co);
        case LayerKind::FuSeHalf: return C * (K + Co);
        case LayerKind::Pointwise: return C * Co;
        case LayerKind::FullyConnected: return C * Co;
        case LayerKind::SqueezeExcite:
            return 2ull * static_cast<uint64_t>(layer.se_channels) * layer.se_squeeze;
    }
    throw std::invalid_argument("count_params: unsupported layer kind");
}

}  // namespace ops
}  // namespace fusesim
