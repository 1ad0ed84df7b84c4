#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fusesim/netmodel.hpp"
#include "fusesim/ops.hpp"
#include "fusesim/sim.hpp"

using namespace fusesim;
using sim::ArrayConfig;

namespace {

ConvGeometry geom(int H, int W, int C, int K, int Co, int s = 1, int p = 0) {
    return ConvGeometry{H, W, C, K, Co, s, p};
}

LayerSpec layer(LayerKind kind, ConvGeometry g, const char* name = "l") {
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.geom = g;
    return l;
}

void check_close(const Tensor& a, const Tensor& b, double tol = 1e-5) {
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        double denom = std::max({std::abs(static_cast<double>(a[i])),
                                 std::abs(static_cast<double>(b[i])), 1.0});
        REQUIRE(std::abs(static_cast<double>(a[i]) - b[i]) / denom <= tol);
    }
}

}  // namespace

TEST_CASE("matmul tiling: trivial and published tile counts") {
    ArrayConfig one{1, 1};
    sim::MappingPlan p = sim::plan_matmul(1, 1, 1, one, sim::OpClass::Pointwise);
    CHECK(p.folds.size() == 1);
    CHECK(p.folds[0].cycles() == 1 + 1);  // 0 fill + 1 contraction + 1 drain

    // pointwise 7x7, 160 -> 960 on 64x64: ceil(49/64)*ceil(960/64) = 15 tiles
    ArrayConfig big{64, 64};
    sim::MappingPlan pw = sim::plan_im2col(layer(LayerKind::Pointwise, geom(7, 7, 160, 1, 960)), big);
    CHECK(pw.folds.size() == 15);
}

TEST_CASE("2x2 matmul on a 2x2 array: hand-checked schedule") {
    // fill (2+2-2) + contraction 2 + drain 2 = 6 cycles
    ArrayConfig cfg{2, 2};
    sim::MappingPlan plan = sim::plan_matmul(2, 2, 2, cfg, sim::OpClass::FullyConnected);
    REQUIRE(plan.folds.size() == 1);
    CHECK(plan.folds[0].cycles() == 6);

    Tensor a({2, 2}, std::vector<float>{1, 2, 3, 4});
    Tensor b({2, 2}, std::vector<float>{5, 6, 7, 8});
    sim::SimResult res = sim::simulate(plan, cfg, {a, b});
    CHECK(res.report.total_cycles == 6);
    CHECK(res.report.mac_events == 8);
    check_close(res.output, ops::matmul(a, b));
    CHECK(res.report.total_cycles == sim::plan_cycles(plan, cfg));
}

TEST_CASE("depthwise baseline occupies one column per fold") {
    ArrayConfig cfg{64, 64};
    LayerSpec dw = layer(LayerKind::DepthwiseSeparable, geom(16, 16, 8, 3, 16, 1, 1), "dw");
    sim::MappingPlan plan = sim::plan_im2col(dw, cfg);
    CHECK(plan.op_class == sim::OpClass::Depthwise);
    for (const sim::Fold& f : plan.folds) CHECK(f.c == 1);
    // 8 channels x ceil(256/64) row tiles
    CHECK(plan.folds.size() == 8 * 4);

    // functional playback equals the depthwise oracle
    Tensor input = random_tensor({16, 16, 8}, 3);
    Tensor filters = random_tensor({3, 3, 8}, 4);
    Tensor A = sim::depthwise_im2col(input, dw.geom);
    Tensor B({9, 8});
    for (int k = 0; k < 9; ++k)
        for (int c = 0; c < 8; ++c) B.at2(k, c) = filters[static_cast<size_t>(k) * 8 + c];
    sim::SimResult res = sim::simulate(plan, cfg, {A, B});
    Tensor want = ops::conv2d_depthwise(input, filters, dw.geom);
    const int NM = 16 * 16;
    for (int c = 0; c < 8; ++c)
        for (int nm = 0; nm < NM; ++nm)
            CHECK(res.output.at2(c * NM + nm, 0) ==
                  doctest::Approx(want[static_cast<size_t>(nm) * 8 + c]).epsilon(1e-5));
    CHECK(res.report.mac_events == static_cast<uint64_t>(NM) * 9 * 8);
    // contraction-phase utilization bounded by one active column
    CHECK(res.report.contraction_utilization(cfg) <= 1.0 / cfg.cols + 1e-12);
}

TEST_CASE("channelwise standard conv: adder tree, K=1 degeneracy, depthwise rejection") {
    ArrayConfig cfg{8, 8};
    LayerSpec std3 = layer(LayerKind::Standard, geom(6, 6, 4, 3, 5, 1, 1), "std");
    sim::MappingPlan plan = sim::plan_channelwise(std3, cfg);
    for (const sim::Fold& f : plan.folds) CHECK(f.extra_drain == 4);  // ceil(log2 9)
    CHECK(sim::plan_macs(plan) == static_cast<uint64_t>(36) * 9 * 4 * 5);

    // K=1 reduces exactly to the pointwise im2col plan
    LayerSpec std1 = layer(LayerKind::Standard, geom(6, 6, 4, 1, 5), "std1");
    LayerSpec pw1 = layer(LayerKind::Pointwise, geom(6, 6, 4, 1, 5), "pw1");
    CHECK(sim::plan_cycles(sim::plan_channelwise(std1, cfg), cfg) ==
          sim::plan_cycles(sim::plan_im2col(pw1, cfg), cfg));

    CHECK_THROWS_AS(
        sim::plan_channelwise(layer(LayerKind::DepthwiseSeparable, geom(6, 6, 4, 3, 5, 1, 1)), cfg),
        std::invalid_argument);
}

TEST_CASE("channelwise playback equals the standard-conv oracle") {
    ArrayConfig cfg{4, 4};
    ConvGeometry g = geom(5, 5, 3, 3, 2, 1, 1);
    LayerSpec std3 = layer(LayerKind::Standard, g, "std");
    sim::MappingPlan plan = sim::plan_channelwise(std3, cfg);

    Tensor input = random_tensor({5, 5, 3}, 7);
    Tensor filters = random_tensor({2, 3, 3, 3}, 8);  // [C',K,K,C]
    Tensor A = sim::channelwise_matrix(input, g);
    Tensor B({9 * 3, 2});  // weight slice per kernel position, rows (kk*C + c)
    for (int f = 0; f < 2; ++f)
        for (int kk = 0; kk < 9; ++kk)
            for (int c = 0; c < 3; ++c)
                B.at2(kk * 3 + c, f) = filters[(static_cast<size_t>(f) * 9 + kk) * 3 + c];
    sim::SimResult res = sim::simulate(plan, cfg, {A, B});
    Tensor want = ops::conv2d_standard(input, filters, g);
    check_close(res.output, Tensor({25, 2}, std::vector<float>(want.data(), want.data() + 50)));
}

TEST_CASE("FuSe fold mapping: packing, broadcast gating, functional equivalence") {
    ArrayConfig cfg{64, 64};
    cfg.broadcast_enabled = true;
    // 7-row slices on a 64-row array: floor(64/7) = 9 channels co-resident
    LayerSpec f7 = layer(LayerKind::FuSeFull, geom(7, 7, 32, 3, 64, 1, 1), "f7");
    sim::MappingPlan p7 = sim::plan_fuse(f7, cfg);
    CHECK(p7.folds[0].r == 9 * 7);

    // FuSe-Half C=96: 48 channel slices per filter group before packing
    LayerSpec h96 = layer(LayerKind::FuSeHalf, geom(14, 14, 96, 3, 96, 1, 1), "h96");
    sim::MappingPlan p96 = sim::plan_fuse(h96, cfg);
    CHECK(p96.channels == 48);

    ArrayConfig off = cfg;
    off.broadcast_enabled = false;
    CHECK_THROWS_AS(sim::plan_fuse(f7, off), std::invalid_argument);

    // playback matches the 1D convolution oracles on an 8x8 array
    ArrayConfig small{8, 8};
    small.broadcast_enabled = true;
    ConvGeometry g = geom(6, 6, 4, 3, 8, 1, 1);
    LayerSpec fl = layer(LayerKind::FuSeFull, g, "fl");
    sim::MappingPlan plan = sim::plan_fuse(fl, small);
    Tensor rin = random_tensor({6, 6, 4}, 9), cin = random_tensor({6, 6, 4}, 10);
    Tensor rf = random_tensor({3, 4}, 11), cf = random_tensor({3, 4}, 12);
    sim::SimResult res = sim::simulate(plan, small, {rin, rf, cin, cf});
    Tensor wr = ops::conv1d_row(rin, rf, g);
    Tensor wc = ops::conv1d_col(cin, cf, g);
    for (int n = 0; n < 6; ++n)
        for (int m = 0; m < 6; ++m)
            for (int c = 0; c < 4; ++c) {
                CHECK(res.output.at3(n, m, c) == doctest::Approx(wr.at3(n, m, c)).epsilon(1e-5));
                CHECK(res.output.at3(n, m, 4 + c) == doctest::Approx(wc.at3(n, m, c)).epsilon(1e-5));
            }
    CHECK(res.report.mac_events == 2ull * 36 * 4 * 3);
}

TEST_CASE("broadcast flag does not disturb classic matmul flow") {
    ArrayConfig a{8, 8, false, false}, b{8, 8, true, false};
    sim::MappingPlan pa = sim::plan_matmul(10, 6, 9, a, sim::OpClass::Pointwise);
    sim::MappingPlan pb = sim::plan_matmul(10, 6, 9, b, sim::OpClass::Pointwise);
    Tensor A = random_tensor({10, 6}, 13), B = random_tensor({6, 9}, 14);
    sim::SimResult ra = sim::simulate(pa, a, {A, B});
    sim::SimResult rb = sim::simulate(pb, b, {A, B});
    CHECK(ra.report.total_cycles == rb.report.total_cycles);
    check_close(ra.output, rb.output, 0.0);
}

TEST_CASE("empty plan, deadlock diagnostics, operand mismatch") {
    ArrayConfig cfg{4, 4};
    sim::MappingPlan empty;
    sim::SimResult res = sim::simulate(empty, cfg, {});
    CHECK(res.report.total_cycles == 0);
    CHECK(res.output.size() == 0);

    sim::MappingPlan plan = sim::plan_matmul(4, 4, 4, cfg, sim::OpClass::Pointwise);
    Tensor A = random_tensor({4, 4}, 15), B = random_tensor({4, 4}, 16);
    sim::MappingPlan broken = plan;
    broken.folds[0].a_row0 = 3;  // rows 3..6 of a 4-row operand never arrive
    try {
        sim::simulate(broken, cfg, {A, B});
        FAIL("expected deadlock diagnostic");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("cycle") != std::string::npos);
        CHECK(msg.find("PE (") != std::string::npos);
    }
    CHECK_THROWS_AS(sim::simulate(plan, cfg, {A}), std::runtime_error);
    CHECK_THROWS_AS(sim::simulate(plan, cfg, {A, random_tensor({5, 4}, 17)}), std::runtime_error);
}

TEST_CASE("fold overlap saves min(drain, fill) between consecutive folds") {
    ArrayConfig serial{4, 4, false, false};
    ArrayConfig overlap{4, 4, false, true};
    sim::MappingPlan plan = sim::plan_matmul(8, 5, 8, serial, sim::OpClass::Pointwise);
    REQUIRE(plan.folds.size() == 4);
    uint64_t s = sim::plan_cycles(plan, serial);
    uint64_t o = sim::plan_cycles(plan, overlap);
    // each fold: fill 6, drain 4 -> 3 overlaps of min(4,6)=4
    CHECK(s - o == 3 * 4);
}

TEST_CASE("estimate_network: determinism and cross-mode agreement") {
    NetworkSpec net = netmodel::builtin("mobilenet-v1");
    net.layers.resize(4);  // keep the unit test fast
    ArrayConfig cfg{16, 16, true, false};
    sim::NetworkReport r1 = sim::estimate_network(net, cfg, sim::Mode::Simulate, 42);
    sim::NetworkReport r2 = sim::estimate_network(net, cfg, sim::Mode::Simulate, 42);
    sim::NetworkReport ra = sim::estimate_network(net, cfg, sim::Mode::Analytical);
    CHECK(r1.total_cycles == r2.total_cycles);
    CHECK(r1.total_macs == r2.total_macs);
    CHECK(r1.total_cycles == ra.total_cycles);
    CHECK(r1.total_macs == ra.total_macs);
    for (size_t i = 0; i < r1.layers.size(); ++i) {
        CHECK(r1.layers[i].cycles == ra.layers[i].cycles);
        CHECK(r1.layers[i].macs == ra.layers[i].macs);
    }
    // speedup of a network against itself is 1
    CHECK(static_cast<double>(ra.total_cycles) / r1.total_cycles == doctest::Approx(1.0));
}

TEST_CASE("mac conservation against count_macs for every plan") {
    ArrayConfig cfg{8, 8, true, false};
    std::vector<LayerSpec> layers = {
        layer(LayerKind::Standard, geom(10, 10, 3, 3, 6, 1, 1), "std"),
        layer(LayerKind::Pointwise, geom(9, 9, 8, 1, 12), "pw"),
        layer(LayerKind::DepthwiseSeparable, geom(11, 11, 6, 3, 10, 2, 1), "ds"),
        layer(LayerKind::FuSeFull, geom(12, 12, 6, 3, 10, 1, 1), "ff"),
        layer(LayerKind::FuSeHalf, geom(12, 12, 6, 3, 10, 2, 1), "fh"),
        layer(LayerKind::FullyConnected, geom(1, 1, 64, 1, 10), "fc"),
    };
    LayerSpec se = layer(LayerKind::SqueezeExcite, geom(7, 7, 16, 1, 16), "se");
    se.se_channels = 32;
    se.se_squeeze = 8;
    layers.push_back(se);
    for (const LayerSpec& l : layers) {
        uint64_t macs = 0;
        for (const sim::MappingPlan& p : sim::plan_layer(l, cfg)) macs += sim::plan_macs(p);
        CHECK(macs == ops::count_macs(l));
    }
}
