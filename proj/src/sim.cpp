#include "fusesim/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace fusesim {
namespace sim {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int tree_depth_for(int k) {
    if (k <= 1) return 0;
    int squared = k * k, d = 0;
    while ((1 << d) < squared) ++d;
    return d;
}

float padded_at(const Tensor& in, int h, int w, int c) {
    if (h < 0 || w < 0 || h >= in.dim(0) || w >= in.dim(1)) return 0.0f;
    return in.at3(h, w, c);
}

[[noreturn]] void deadlock(uint64_t cycle, int pe_r, int pe_c, const std::string& what) {
    throw std::runtime_error("simulate: schedule deadlock at cycle " + std::to_string(cycle) +
                             ": PE (" + std::to_string(pe_r) + "," + std::to_string(pe_c) +
                             ") awaiting " + what + " which never arrives");
}

void check_matmul_fold(const Fold& f, const MappingPlan& p, const ArrayConfig& cfg) {
    if (f.r > cfg.rows || f.c > cfg.cols)
        throw std::runtime_error("simulate: fold uses " + std::to_string(f.r) + "x" +
                                 std::to_string(f.c) + " PEs but the array is " +
                                 std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols));
    if (f.a_row0 + f.r > p.a_rows)
        deadlock(static_cast<uint64_t>(f.r - 1), f.r - 1, 0,
                 "operand row A[" + std::to_string(f.a_row0 + f.r - 1) + "]");
    if (f.b_col0 + f.c > p.b_cols)
        deadlock(static_cast<uint64_t>(f.c - 1), 0, f.c - 1,
                 "operand column B[" + std::to_string(f.b_col0 + f.c - 1) + "]");
    if (f.b_row0 + f.contraction > p.b_rows)
        deadlock(static_cast<uint64_t>(f.contraction - 1), 0, 0,
                 "operand row B[" + std::to_string(f.b_row0 + f.contraction - 1) + "]");
}

}  // namespace

const char* to_string(OpClass c) {
    switch (c) {
        case OpClass::Depthwise: return "depthwise";
        case OpClass::Fuse: return "fuse";
        case OpClass::Pointwise: return "pointwise";
        case OpClass::Standard: return "standard";
        case OpClass::FullyConnected: return "fc";
    }
    return "?";
}

uint64_t plan_cycles(const MappingPlan& plan, const ArrayConfig& cfg) {
    uint64_t total = 0;
    for (size_t i = 0; i < plan.folds.size(); ++i) {
        total += plan.folds[i].cycles();
        if (cfg.fold_overlap && i > 0)
            total -= std::min(plan.folds[i - 1].drain_cycles(), plan.folds[i].fill_cycles());
    }
    return total;
}

uint64_t plan_compute_cycles(const MappingPlan& plan) {
    uint64_t total = 0;
    for (const Fold& f : plan.folds) total += static_cast<uint64_t>(f.contraction);
    return total;
}

uint64_t plan_macs(const MappingPlan& plan) {
    uint64_t total = 0;
    for (const Fold& f : plan.folds) total += f.macs();
    return total;
}

MappingPlan plan_matmul(int R, int T, int Cc, const ArrayConfig& cfg, OpClass cls, int tree_depth) {
    if (R < 0 || T < 1 || Cc < 1) throw std::invalid_argument("plan_matmul: bad dimensions");
    MappingPlan p;
    p.strategy = tree_depth > 0 ? Strategy::ChannelwiseDotProduct : Strategy::Im2colMatmul;
    p.op_class = cls;
    p.a_rows = R;
    p.a_cols = T;
    p.b_rows = T;
    p.b_cols = Cc;
    p.out_rows = R;
    p.out_cols = Cc;
    for (int i = 0; i < ceil_div(R, cfg.rows); ++i) {
        int r = std::min(cfg.rows, R - i * cfg.rows);
        for (int j = 0; j < ceil_div(Cc, cfg.cols); ++j) {
            int c = std::min(cfg.cols, Cc - j * cfg.cols);
            Fold f;
            f.r = r;
            f.c = c;
            f.contraction = T;
            f.extra_drain = tree_depth;
            f.a_row0 = f.out_row0 = i * cfg.rows;
            f.b_col0 = f.out_col0 = j * cfg.cols;
            p.folds.push_back(f);
        }
    }
    return p;
}

MappingPlan plan_im2col(const LayerSpec& layer, const ArrayConfig& cfg) {
    layer.validate();
    const ConvGeometry& g = layer.geom;
    const int NM = g.out_h() * g.out_w();
    switch (layer.kind) {
        case LayerKind::Standard:
            return plan_matmul(NM, g.kernel * g.kernel * g.channels_in, g.channels_out, cfg,
                               OpClass::Standard);
        case LayerKind::Pointwise:
            return plan_matmul(NM, g.channels_in, g.channels_out, cfg, OpClass::Pointwise);
        case LayerKind::FullyConnected:
            return plan_matmul(1, g.channels_in, g.channels_out, cfg, OpClass::FullyConnected);
        case LayerKind::DepthwiseSeparable: {
            // Depthwise stage only: per-channel im2col occupies a single array
            // column per fold — the baseline inefficiency being measured.
            MappingPlan p;
            p.strategy = Strategy::Im2colMatmul;
            p.op_class = OpClass::Depthwise;
            const int KK = g.kernel * g.kernel;
            p.a_rows = g.channels_in * NM;
            p.a_cols = KK;
            p.b_rows = KK;
            p.b_cols = g.channels_in;
            p.out_rows = g.channels_in * NM;
            p.out_cols = 1;
            for (int ch = 0; ch < g.channels_in; ++ch)
                for (int t = 0; t < ceil_div(NM, cfg.rows); ++t) {
                    Fold f;
                    f.r = std::min(cfg.rows, NM - t * cfg.rows);
                    f.c = 1;
                    f.contraction = KK;
                    f.a_row0 = f.out_row0 = ch * NM + t * cfg.rows;
                    f.b_col0 = ch;
                    f.out_col0 = 0;
                    p.folds.push_back(f);
                }
            return p;
        }
        default:
            throw std::invalid_argument(std::string("plan_im2col: layer kind ") +
                                        to_string(layer.kind) + " has no matmul lowering");
    }
}

MappingPlan plan_channelwise(const LayerSpec& layer, const ArrayConfig& cfg) {
    if (layer.kind == LayerKind::DepthwiseSeparable)
        throw std::invalid_argument(
            "plan_channelwise: depthwise convolution exposes no computation spanning channels; "
            "use the per-channel im2col lowering instead");
    if (layer.kind != LayerKind::Standard)
        throw std::invalid_argument("plan_channelwise: requires a standard convolution layer");
    layer.validate();
    const ConvGeometry& g = layer.geom;
    const int NM = g.out_h() * g.out_w();
    const int KK = g.kernel * g.kernel;
    const int C = g.channels_in;
    const int tree = tree_depth_for(g.kernel);

    MappingPlan p;
    p.strategy = tree > 0 ? Strategy::ChannelwiseDotProduct : Strategy::Im2colMatmul;
    p.op_class = OpClass::Standard;
    p.a_rows = KK * NM;
    p.a_cols = C;
    p.b_rows = KK * C;  // one weight slice per kernel position
    p.b_cols = g.channels_out;
    p.out_rows = NM;
    p.out_cols = g.channels_out;
    p.group = KK;
    for (int kk = 0; kk < KK; ++kk)
        for (int i = 0; i < ceil_div(NM, cfg.rows); ++i)
            for (int j = 0; j < ceil_div(g.channels_out, cfg.cols); ++j) {
                Fold f;
                f.r = std::min(cfg.rows, NM - i * cfg.rows);
                f.c = std::min(cfg.cols, g.channels_out - j * cfg.cols);
                f.contraction = C;
                f.extra_drain = tree;
                f.a_row0 = f.out_row0 = kk * NM + i * cfg.rows;
                f.b_row0 = kk * C;
                f.b_col0 = f.out_col0 = j * cfg.cols;
                p.folds.push_back(f);
            }
    return p;
}

MappingPlan plan_fuse(const LayerSpec& layer, const ArrayConfig& cfg) {
    if (!layer.is_fuse())
        throw std::invalid_argument("plan_fuse: layer is not a FuSe variant");
    if (!cfg.broadcast_enabled)
        throw std::invalid_argument(
            "plan_fuse: row-broadcast links are disabled on this array; enable broadcast or fall "
            "back to the im2col lowering");
    layer.validate();
    const ConvGeometry& g = layer.geom;
    const int D = layer.kind == LayerKind::FuSeFull ? 1 : 2;
    const int Cg = g.channels_in / D;
    const int N = g.out_h(), M = g.out_w();

    MappingPlan p;
    p.strategy = Strategy::FuSeRowFold;
    p.op_class = OpClass::Fuse;
    p.kernel = g.kernel;
    p.stride = g.stride;
    p.padding = g.padding;
    p.in_h = g.input_h;
    p.in_w = g.input_w;
    p.out_h = N;
    p.out_w = M;
    p.channels = Cg;

    for (int stage = 0; stage < 2; ++stage) {
        const int orth = stage == 0 ? N : M;      // slices held by array rows
        const int conv = stage == 0 ? M : N;      // outputs along the convolved axis
        std::vector<std::vector<std::pair<int, int>>> lane_sets;
        if (orth >= cfg.rows) {
            for (int ch = 0; ch < Cg; ++ch)
                for (int t = 0; t < ceil_div(orth, cfg.rows); ++t) {
                    std::vector<std::pair<int, int>> lanes;
                    for (int i = t * cfg.rows; i < std::min(orth, (t + 1) * cfg.rows); ++i)
                        lanes.emplace_back(ch, i);
                    lane_sets.push_back(std::move(lanes));
                }
        } else {
            // Short slices: co-locate floor(rows/orth) whole channels per fold.
            const int pack = cfg.rows / orth;
            for (int ch0 = 0; ch0 < Cg; ch0 += pack) {
                std::vector<std::pair<int, int>> lanes;
                for (int ch = ch0; ch < std::min(Cg, ch0 + pack); ++ch)
                    for (int i = 0; i < orth; ++i) lanes.emplace_back(ch, i);
                lane_sets.push_back(std::move(lanes));
            }
        }
        for (auto& lanes : lane_sets)
            for (int j = 0; j < ceil_div(conv, cfg.cols); ++j) {
                Fold f;
                f.stage = stage;
                f.lanes = lanes;
                f.r = static_cast<int>(lanes.size());
                f.c = std::min(cfg.cols, conv - j * cfg.cols);
                f.col0 = j * cfg.cols;
                f.contraction = g.kernel;
                p.folds.push_back(std::move(f));
            }
    }
    return p;
}

std::vector<MappingPlan> plan_layer(const LayerSpec& layer, const ArrayConfig& cfg) {
    const ConvGeometry& g = layer.geom;
    const int NM = g.out_h() * g.out_w();
    switch (layer.kind) {
        case LayerKind::Standard:
            return {plan_channelwise(layer, cfg)};
        case LayerKind::Pointwise:
        case LayerKind::FullyConnected:
            return {plan_im2col(layer, cfg)};
        case LayerKind::DepthwiseSeparable:
            return {plan_im2col(layer, cfg),
                    plan_matmul(NM, g.channels_in, g.channels_out, cfg, OpClass::Pointwise)};
        case LayerKind::FuSeFull:
        case LayerKind::FuSeHalf: {
            const int D = layer.kind == LayerKind::FuSeFull ? 1 : 2;
            return {plan_fuse(layer, cfg),
                    plan_matmul(NM, 2 * g.channels_in / D, g.channels_out, cfg, OpClass::Pointwise)};
        }
        case LayerKind::SqueezeExcite:
            return {plan_matmul(1, layer.se_channels, layer.se_squeeze, cfg, OpClass::FullyConnected),
                    plan_matmul(1, layer.se_squeeze, layer.se_channels, cfg, OpClass::FullyConnected)};
    }
    throw std::invalid_argument("plan_layer: unsupported layer kind");
}

Tensor depthwise_im2col(const Tensor& input, const ConvGeometry& geom) {
    geom.validate();
    const int N = geom.out_h(), M = geom.out_w();
    const int K = geom.kernel, C = geom.channels_in;
    const int s = geom.stride, p = geom.padding;
    Tensor out({C * N * M, K * K});
    for (int ch = 0; ch < C; ++ch)
        for (int n = 0; n < N; ++n)
            for (int m = 0; m < M; ++m) {
                const int row = ch * N * M + n * M + m;
                int col = 0;
                for (int i = 0; i < K; ++i)
                    for (int j = 0; j < K; ++j)
                        out.at2(row, col++) = padded_at(input, n * s + i - p, m * s + j - p, ch);
            }
    return out;
}

Tensor channelwise_matrix(const Tensor& input, const ConvGeometry& geom) {
    geom.validate();
    const int N = geom.out_h(), M = geom.out_w();
    const int K = geom.kernel, C = geom.channels_in;
    const int s = geom.stride, p = geom.padding;
    Tensor out({K * K * N * M, C});
    int kk = 0;
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j, ++kk)
            for (int n = 0; n < N; ++n)
                for (int m = 0; m < M; ++m) {
                    const int row = kk * N * M + n * M + m;
                    for (int c = 0; c < C; ++c)
                        out.at2(row, c) = padded_at(input, n * s + i - p, m * s + j - p, c);
                }
    return out;
}

namespace {

SimResult simulate_matmul(const MappingPlan& plan, const ArrayConfig& cfg,
                          const std::vector<Tensor>& operands) {
    if (operands.size() != 2)
        throw std::runtime_error("simulate: matmul plan expects 2 operands, got " +
                                 std::to_string(operands.size()));
    const Tensor& A = operands[0];
    const Tensor& B = operands[1];
    if (A.rank() != 2 || A.dim(0) != plan.a_rows || A.dim(1) != plan.a_cols)
        throw std::runtime_error("simulate: operand A shape mismatch (expected " +
                                 std::to_string(plan.a_rows) + "x" + std::to_string(plan.a_cols) + ")");
    if (B.rank() != 2 || B.dim(0) != plan.b_rows || B.dim(1) != plan.b_cols)
        throw std::runtime_error("simulate: operand B shape mismatch (expected " +
                                 std::to_string(plan.b_rows) + "x" + std::to_string(plan.b_cols) + ")");

    // Product rows before any tree reduction.
    Tensor prod({plan.a_rows, plan.out_cols});
    SimResult res;
    for (const Fold& f : plan.folds) {
        check_matmul_fold(f, plan, cfg);
        std::vector<float> acc(static_cast<size_t>(f.c));
        for (int i = 0; i < f.r; ++i) {
            const float* arow = A.data() + static_cast<size_t>(f.a_row0 + i) * plan.a_cols;
            std::fill(acc.begin(), acc.end(), 0.0f);
            // MAC at PE (i,j) for contraction step k lands on cycle
            // fill-offset + i + j + k; enumerating (i,k,j) is cycle-equivalent.
            for (int k = 0; k < f.contraction; ++k) {
                const float av = arow[k];
                const float* brow =
                    B.data() + static_cast<size_t>(f.b_row0 + k) * plan.b_cols + f.b_col0;
                for (int j = 0; j < f.c; ++j) acc[static_cast<size_t>(j)] += av * brow[j];
            }
            float* orow = prod.data() + static_cast<size_t>(f.out_row0 + i) * plan.out_cols + f.out_col0;
            for (int j = 0; j < f.c; ++j) orow[j] = acc[static_cast<size_t>(j)];
        }
        res.report.fold_cycles.push_back(f.cycles());
        res.report.mac_events += f.macs();
        res.report.compute_cycles += static_cast<uint64_t>(f.contraction);
    }
    res.report.total_cycles = plan_cycles(plan, cfg);

    if (plan.group > 1) {
        // adder tree: sum the per-kernel-position blocks of the product
        Tensor out({plan.out_rows, plan.out_cols});
        for (int g = 0; g < plan.group; ++g)
            for (int r = 0; r < plan.out_rows; ++r) {
                const float* prow =
                    prod.data() + (static_cast<size_t>(g) * plan.out_rows + r) * plan.out_cols;
                float* orow = out.data() + static_cast<size_t>(r) * plan.out_cols;
                for (int j = 0; j < plan.out_cols; ++j) orow[j] += prow[j];
            }
        res.output = std::move(out);
    } else {
        res.output = std::move(prod);
    }
    return res;
}

SimResult simulate_fuse(const MappingPlan& plan, const ArrayConfig& cfg,
                        const std::vector<Tensor>& operands) {
    if (!cfg.broadcast_enabled)
        throw std::runtime_error("simulate: FuSe plan on an array without broadcast links");
    if (operands.size() != 4)
        throw std::runtime_error("simulate: FuSe plan expects 4 operands, got " +
                                 std::to_string(operands.size()));
    const int Cg = plan.channels, K = plan.kernel;
    for (int s = 0; s < 2; ++s) {
        const Tensor& in = operands[static_cast<size_t>(2 * s)];
        const Tensor& flt = operands[static_cast<size_t>(2 * s + 1)];
        if (in.rank() != 3 || in.dim(0) != plan.in_h || in.dim(1) != plan.in_w || in.dim(2) != Cg)
            throw std::runtime_error("simulate: FuSe stage input shape mismatch");
        if (flt.rank() != 2 || flt.dim(0) != K || flt.dim(1) != Cg)
            throw std::runtime_error("simulate: FuSe stage filter shape mismatch");
    }

    SimResult res;
    res.output = Tensor({plan.out_h, plan.out_w, 2 * Cg});
    const int str = plan.stride, pad = plan.padding;
    for (const Fold& f : plan.folds) {
        if (f.r > cfg.rows || f.c > cfg.cols)
            throw std::runtime_error("simulate: FuSe fold exceeds array dimensions");
        const Tensor& in = operands[static_cast<size_t>(2 * f.stage)];
        const Tensor& flt = operands[static_cast<size_t>(2 * f.stage + 1)];
        for (size_t lane = 0; lane < f.lanes.size(); ++lane) {
            const auto [ch, orth] = f.lanes[lane];
            if (ch >= Cg || orth >= (f.stage == 0 ? plan.out_h : plan.out_w))
                deadlock(static_cast<uint64_t>(lane), static_cast<int>(lane), 0,
                         "input slice (channel " + std::to_string(ch) + ", index " +
                             std::to_string(orth) + ")");
            for (int j = 0; j < f.c; ++j) {
                const int pos = f.col0 + j;
                float acc = 0.0f;
                if (f.stage == 0) {
                    for (int k = 0; k < K; ++k)
                        acc += padded_at(in, orth * str, pos * str + k - pad, ch) * flt.at2(k, ch);
                    res.output.at3(orth, pos, ch) = acc;
                } else {
                    for (int k = 0; k < K; ++k)
                        acc += padded_at(in, pos * str + k - pad, orth * str, ch) * flt.at2(k, ch);
                    res.output.at3(pos, orth, Cg + ch) = acc;
                }
            }
        }
        res.report.fold_cycles.push_back(f.cycles());
        res.report.mac_events += f.macs();
        res.report.compute_cycles += static_cast<uint64_t>(f.contraction);
    }
    res.report.total_cycles = plan_cycles(plan, cfg);
    return res;
}

std::vector<Tensor> operands_for_plan(const MappingPlan& plan, uint64_t seed) {
    if (plan.strategy == Strategy::FuSeRowFold)
        return {random_tensor({plan.in_h, plan.in_w, plan.channels}, seed),
                random_tensor({plan.kernel, plan.channels}, seed + 1),
                random_tensor({plan.in_h, plan.in_w, plan.channels}, seed + 2),
                random_tensor({plan.kernel, plan.channels}, seed + 3)};
    return {random_tensor({plan.a_rows, plan.a_cols}, seed),
            random_tensor({plan.b_rows, plan.b_cols}, seed + 1)};
}

}  // namespace

SimResult simulate(const MappingPlan& plan, const ArrayConfig& cfg,
                   const std::vector<Tensor>& operands) {
    if (plan.folds.empty()) return SimResult{};
    if (plan.strategy == Strategy::FuSeRowFold) return simulate_fuse(plan, cfg, operands);
    return simulate_matmul(plan, cfg, operands);
}

NetworkReport estimate_network(const NetworkSpec& net, const ArrayConfig& cfg, Mode mode,
                               uint64_t seed) {
    NetworkReport rep;
    rep.network = net.name;
    rep.array_rows = cfg.rows;
    rep.array_cols = cfg.cols;
    rep.mode = mode;
    rep.fold_overlap = cfg.fold_overlap;
    rep.seed = seed;
    const uint64_t pes = static_cast<uint64_t>(cfg.rows) * cfg.cols;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& layer = net.layers[li];
        LayerReport lr;
        lr.name = layer.name;
        lr.kind = layer.kind;
        uint64_t plan_seed = seed + 0x9e3779b97f4a7c15ull * (li + 1);
        for (const MappingPlan& plan : plan_layer(layer, cfg)) {
            uint64_t cycles, macs;
            if (mode == Mode::Analytical) {
                cycles = plan_cycles(plan, cfg);
                macs = plan_macs(plan);
            } else {
                SimResult sr = simulate(plan, cfg, operands_for_plan(plan, plan_seed));
                cycles = sr.report.total_cycles;
                macs = sr.report.mac_events;
                plan_seed += 7;
            }
            lr.cycles += cycles;
            lr.macs += macs;
            lr.class_cycles[plan.op_class] += cycles;
        }
        lr.utilization =
            lr.cycles == 0 ? 0.0 : static_cast<double>(lr.macs) / (pes * static_cast<double>(lr.cycles));
        rep.total_cycles += lr.cycles;
        rep.total_macs += lr.macs;
        rep.layers.push_back(std::move(lr));
    }
    return rep;
}

}  // namespace sim
}  // namespace fusesim
