#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fusesim/netmodel.hpp"

using namespace fusesim;
using netmodel::builtin;
using ops::FuseVariant;

namespace {

struct Target {
    const char* name;
    double base_m, base_p, full_m, full_p, half_m, half_p;  // published totals (millions)
};

// MAC / parameter totals the builtin definitions must land on within 2%.
const Target kTargets[] = {
    {"mobilenet-v1", 589, 4.23, 1122, 7.36, 573, 4.20},
    {"mobilenet-v2", 315, 3.50, 430, 4.46, 300, 3.46},
    {"mnasnet-b1", 325, 4.38, 440, 5.66, 305, 4.25},
    {"mobilenet-v3-small", 66, 2.93, 84, 4.44, 61, 2.89},
    {"mobilenet-v3-large", 238, 5.47, 322, 10.57, 225, 5.40},
};

void check_pct(double got, double want, double tol_pct) {
    CHECK(std::abs(got - want) / want * 100.0 <= tol_pct);
}

}  // namespace

TEST_CASE("builtin totals match the published MAC/parameter columns within 2%") {
    for (const Target& t : kTargets) {
        NetworkSpec base = builtin(t.name);
        NetworkSpec full = netmodel::transform_fuse(base, FuseVariant::Full);
        NetworkSpec half = netmodel::transform_fuse(base, FuseVariant::Half);
        check_pct(netmodel::network_macs(base) / 1e6, t.base_m, 2.0);
        check_pct(netmodel::network_params(base) / 1e6, t.base_p, 2.0);
        check_pct(netmodel::network_macs(full) / 1e6, t.full_m, 2.0);
        check_pct(netmodel::network_params(full) / 1e6, t.full_p, 2.0);
        check_pct(netmodel::network_macs(half) / 1e6, t.half_m, 2.0);
        check_pct(netmodel::network_params(half) / 1e6, t.half_p, 2.0);
        // Table ordering: half < baseline < full
        CHECK(netmodel::network_macs(half) < netmodel::network_macs(base));
        CHECK(netmodel::network_macs(base) < netmodel::network_macs(full));
    }
}

TEST_CASE("mobilenet-v1 has 28 operator stages") {
    CHECK(netmodel::stage_count(builtin("mobilenet-v1")) == 28);
}

TEST_CASE("builtins are shape-chained and validated") {
    for (const Target& t : kTargets) CHECK_NOTHROW(netmodel::validate_network(builtin(t.name)));
    CHECK_THROWS_AS(builtin("resnet-50"), std::invalid_argument);
}

TEST_CASE("transform preserves non-depthwise layers and output shape") {
    NetworkSpec base = builtin("mobilenet-v2");
    NetworkSpec full = netmodel::transform_fuse(base, FuseVariant::Full);
    REQUIRE(full.layers.size() == base.layers.size());
    for (size_t i = 0; i < base.layers.size(); ++i) {
        const LayerSpec& b = base.layers[i];
        const LayerSpec& f = full.layers[i];
        if (b.kind == LayerKind::DepthwiseSeparable) {
            CHECK(f.kind == LayerKind::FuSeFull);
            CHECK(f.geom.channels_out == b.geom.channels_out);
            CHECK(f.geom.out_h() == b.geom.out_h());
        } else {
            CHECK(f.kind == b.kind);
            CHECK(f.name == b.name);
            CHECK(f.geom.channels_out == b.geom.channels_out);
        }
    }
    // final layer output identical -> drop-in
    CHECK(full.layers.back().geom.channels_out == base.layers.back().geom.channels_out);
}

TEST_CASE("full transform widens squeeze-excite to the concatenated channels") {
    NetworkSpec base = builtin("mobilenet-v3-small");
    NetworkSpec full = netmodel::transform_fuse(base, FuseVariant::Full);
    NetworkSpec half = netmodel::transform_fuse(base, FuseVariant::Half);
    bool saw_se = false;
    for (size_t i = 0; i < base.layers.size(); ++i)
        if (base.layers[i].kind == LayerKind::SqueezeExcite) {
            saw_se = true;
            CHECK(full.layers[i].se_channels == 2 * base.layers[i].se_channels);
            CHECK(half.layers[i].se_channels == base.layers[i].se_channels);
        }
    CHECK(saw_se);
}

TEST_CASE("50% transform replaces floor(n/2) layers, reported by name") {
    NetworkSpec base = builtin("mobilenet-v1");
    std::vector<std::string> chosen;
    NetworkSpec t =
        netmodel::transform_fuse(base, FuseVariant::Half, 0.5, {64, 64, true, false}, &chosen);
    int n_ds = 0, n_fuse = 0;
    for (const LayerSpec& l : base.layers)
        if (l.kind == LayerKind::DepthwiseSeparable) ++n_ds;
    for (const LayerSpec& l : t.layers)
        if (l.kind == LayerKind::FuSeHalf) ++n_fuse;
    CHECK(n_fuse == n_ds / 2);
    CHECK(static_cast<int>(chosen.size()) == n_ds / 2);
}

TEST_CASE("transform rejects networks without depthwise layers") {
    NetworkSpec net;
    net.name = "plain";
    net.input_h = net.input_w = 8;
    net.input_c = 3;
    LayerSpec l;
    l.name = "conv";
    l.kind = LayerKind::Standard;
    l.geom = {8, 8, 3, 3, 8, 1, 1};
    l.act = Activation::ReLU;
    net.layers.push_back(l);
    CHECK_THROWS_AS(netmodel::transform_fuse(net, FuseVariant::Half), std::invalid_argument);
}

TEST_CASE("network text format round-trips") {
    NetworkSpec base = builtin("mobilenet-v3-large");
    std::string text = netmodel::format_network(base);
    std::istringstream in(text);
    NetworkSpec back = netmodel::parse_network(in, base.name);
    REQUIRE(back.layers.size() == base.layers.size());
    CHECK(netmodel::network_macs(back) == netmodel::network_macs(base));
    CHECK(netmodel::network_params(back) == netmodel::network_params(base));
    for (size_t i = 0; i < base.layers.size(); ++i) {
        CHECK(back.layers[i].kind == base.layers[i].kind);
        CHECK(back.layers[i].block_id == base.layers[i].block_id);
        CHECK(back.layers[i].se_squeeze == base.layers[i].se_squeeze);
    }
}

TEST_CASE("shape-chain breaks are reported with the layer index") {
    std::string text =
        "input 8 8 3\n"
        "conv1 standard 8 8 3 3 8 1 1 relu -1\n"
        "pw2 pointwise 8 8 16 1 8 1 0 relu -1\n";  // 16 != 8 output channels
    std::istringstream in(text);
    try {
        netmodel::parse_network(in, "broken");
        FAIL("expected shape-chain error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }

    std::istringstream bad("conv1 mystery 8 8 3 3 8 1 1 relu -1\n");
    try {
        netmodel::parse_network(bad, "badkind");
        FAIL("expected unknown-kind error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("unknown layer kind") != std::string::npos);
    }
}

TEST_CASE("make_divisible follows the channel rounding rule") {
    CHECK(netmodel::make_divisible(8) == 8);
    CHECK(netmodel::make_divisible(12) == 16);
    CHECK(netmodel::make_divisible(18) == 24);  // 16 < 0.9*18
    CHECK(netmodel::make_divisible(20) == 24);
    CHECK(netmodel::make_divisible(4) == 8);
    CHECK(netmodel::make_divisible(240 / 4) == 64);
}

TEST_CASE("FUSECONV_BUILTIN_DIR overrides builtin definitions") {
    NetworkSpec v1 = builtin("mobilenet-v1");
    std::string dir = "/tmp/fusesim_builtin_test";
    std::filesystem::create_directories(dir);
    NetworkSpec tweaked = v1;
    tweaked.layers[0].geom.channels_out = 48;
    tweaked.layers[1].geom.channels_in = 48;
    netmodel::save_network(tweaked, dir + "/mobilenet-v1.net");
    setenv("FUSECONV_BUILTIN_DIR", dir.c_str(), 1);
    NetworkSpec loaded = builtin("mobilenet-v1");
    unsetenv("FUSECONV_BUILTIN_DIR");
    CHECK(loaded.layers[0].geom.channels_out == 48);
    std::remove((dir + "/mobilenet-v1.net").c_str());
}
