#include "fusesim/netmodel.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fusesim/cost.hpp"

namespace fusesim {
namespace netmodel {

int make_divisible(int v, int divisor) {
    int n = std::max(divisor, (v + divisor / 2) / divisor * divisor);
    if (n * 10 < 9 * v) n += divisor;
    return n;
}

namespace {

int act_ops(Activation a) {
    switch (a) {
        case Activation::None: return 0;
        case Activation::ReLU: return 1;
        case Activation::HardSwish: return 8;
    }
    return 0;
}

// Incremental builder tracking the running feature-map shape.
struct Builder {
    NetworkSpec net;
    int H = 224, C = 3;
    int next_block = 0;

    explicit Builder(const std::string& name) {
        net.name = name;
        net.input_h = net.input_w = 224;
        net.input_c = 3;
    }

    LayerSpec& add(LayerSpec l) {
        net.layers.push_back(std::move(l));
        return net.layers.back();
    }
    static ConvGeometry geom(int H, int C, int K, int Co, int s, int p) {
        ConvGeometry g;
        g.input_h = g.input_w = H;
        g.channels_in = C;
        g.kernel = K;
        g.channels_out = Co;
        g.stride = s;
        g.padding = p;
        return g;
    }
    void std_conv(const std::string& name, int Co, int K, int s, Activation a) {
        LayerSpec l{name, LayerKind::Standard, geom(H, C, K, Co, s, K / 2), a};
        H = l.geom.out_h();
        C = Co;
        add(std::move(l));
    }
    void pw(const std::string& name, int Co, Activation a, int block = -1) {
        LayerSpec l{name, LayerKind::Pointwise, geom(H, C, 1, Co, 1, 0), a};
        l.block_id = block;
        C = Co;
        add(std::move(l));
    }
    void ds(const std::string& name, int Co, int K, int s, Activation a, int block) {
        LayerSpec l{name, LayerKind::DepthwiseSeparable, geom(H, C, K, Co, s, K / 2), a};
        l.block_id = block;
        H = l.geom.out_h();
        C = Co;
        add(std::move(l));
    }
    void se(const std::string& name, int gated, int block) {
        LayerSpec l{name, LayerKind::SqueezeExcite, geom(H, C, 1, C, 1, 0), Activation::None};
        l.se_channels = gated;
        l.se_squeeze = make_divisible(gated / 4);
        l.block_id = block;
        add(std::move(l));
    }
    void fc(const std::string& name, int Co, Activation a) {
        LayerSpec l{name, LayerKind::FullyConnected, geom(1, C, 1, Co, 1, 0), a};
        C = Co;
        H = 1;
        add(std::move(l));
    }
};

NetworkSpec build_mobilenet_v1() {
    Builder b("mobilenet-v1");
    b.std_conv("conv1", 32, 3, 2, Activation::ReLU);
    const std::pair<int, int> cfg[] = {{64, 1},  {128, 2}, {128, 1}, {256, 2}, {256, 1},
                                       {512, 2}, {512, 1}, {512, 1}, {512, 1}, {512, 1},
                                       {512, 1}, {1024, 2}, {1024, 1}};
    int i = 0;
    for (auto [co, s] : cfg) {
        b.ds("ds" + std::to_string(i + 2), co, 3, s, Activation::ReLU, i);
        ++i;
    }
    b.fc("fc", 1000, Activation::None);
    return b.net;
}

NetworkSpec build_mobilenet_v2() {
    Builder b("mobilenet-v2");
    b.std_conv("conv1", 32, 3, 2, Activation::ReLU);
    // (expansion t, output channels, repeats, first stride)
    const std::tuple<int, int, int, int> cfg[] = {{1, 16, 1, 1},  {6, 24, 2, 2}, {6, 32, 3, 2},
                                                  {6, 64, 4, 2},  {6, 96, 3, 1}, {6, 160, 3, 2},
                                                  {6, 320, 1, 1}};
    int blk = 0;
    for (auto [t, c, n, s] : cfg)
        for (int i = 0; i < n; ++i) {
            int stride = i == 0 ? s : 1;
            std::string p = "b" + std::to_string(blk);
            if (t != 1) b.pw(p + "_expand", b.C * t, Activation::ReLU, blk);
            b.ds(p + "_dw", c, 3, stride, Activation::ReLU, blk);
            ++blk;
        }
    b.pw("pw_last", 1280, Activation::ReLU);
    b.fc("fc", 1000, Activation::None);
    return b.net;
}

NetworkSpec build_mnasnet_b1() {
    Builder b("mnasnet-b1");
    b.std_conv("conv1", 32, 3, 2, Activation::ReLU);
    b.ds("b0_dw", 16, 3, 1, Activation::ReLU, 0);
    // (expansion t, output channels, repeats, first stride, kernel)
    const std::tuple<int, int, int, int, int> cfg[] = {{3, 24, 3, 2, 3},  {3, 40, 3, 2, 5},
                                                       {6, 80, 3, 2, 5},  {6, 96, 2, 1, 3},
                                                       {6, 192, 4, 2, 5}, {6, 320, 1, 1, 3}};
    int blk = 1;
    for (auto [t, c, n, s, k] : cfg)
        for (int i = 0; i < n; ++i) {
            int stride = i == 0 ? s : 1;
            std::string p = "b" + std::to_string(blk);
            b.pw(p + "_expand", b.C * t, Activation::ReLU, blk);
            b.ds(p + "_dw", c, k, stride, Activation::ReLU, blk);
            ++blk;
        }
    b.pw("pw_last", 1280, Activation::ReLU);
    b.fc("fc", 1000, Activation::None);
    return b.net;
}

struct V3Block {
    int k, exp, out, se;
    Activation act;
    int stride;
};

NetworkSpec build_mobilenet_v3(bool large) {
    const Activation RE = Activation::ReLU, HS = Activation::HardSwish;
    Builder b(large ? "mobilenet-v3-large" : "mobilenet-v3-small");
    b.std_conv("conv1", 16, 3, 2, HS);
    std::vector<V3Block> cfg;
    int last_c, head;
    if (large) {
        cfg = {{3, 16, 16, 0, RE, 1},   {3, 64, 24, 0, RE, 2},   {3, 72, 24, 0, RE, 1},
               {5, 72, 40, 1, RE, 2},   {5, 120, 40, 1, RE, 1},  {5, 120, 40, 1, RE, 1},
               {3, 240, 80, 0, HS, 2},  {3, 200, 80, 0, HS, 1},  {3, 184, 80, 0, HS, 1},
               {3, 184, 80, 0, HS, 1},  {3, 480, 112, 1, HS, 1}, {3, 672, 112, 1, HS, 1},
               {5, 672, 160, 1, HS, 2}, {5, 960, 160, 1, HS, 1}, {5, 960, 160, 1, HS, 1}};
        last_c = 960;
        head = 1280;
    } else {
        cfg = {{3, 16, 16, 1, RE, 2},  {3, 72, 24, 0, RE, 2},  {3, 88, 24, 0, RE, 1},
               {5, 96, 40, 1, HS, 2},  {5, 240, 40, 1, HS, 1}, {5, 240, 40, 1, HS, 1},
               {5, 120, 48, 1, HS, 1}, {5, 144, 48, 1, HS, 1}, {5, 288, 96, 1, HS, 2},
               {5, 576, 96, 1, HS, 1}, {5, 576, 96, 1, HS, 1}};
        last_c = 576;
        head = 1280;
    }
    int blk = 0;
    for (const V3Block& v : cfg) {
        std::string p = "b" + std::to_string(blk);
        if (v.exp != b.C) b.pw(p + "_expand", v.exp, v.act, blk);
        b.ds(p + "_dw", v.out, v.k, v.stride, v.act, blk);
        if (v.se) b.se(p + "_se", v.exp, blk);
        ++blk;
    }
    b.pw("pw_last", last_c, HS);
    b.fc("fc1", head, HS);
    b.fc("fc2", 1000, Activation::None);
    return b.net;
}

NetworkSpec build_builtin(const std::string& name) {
    if (name == "mobilenet-v1") return build_mobilenet_v1();
    if (name == "mobilenet-v2") return build_mobilenet_v2();
    if (name == "mnasnet-b1") return build_mnasnet_b1();
    if (name == "mobilenet-v3-small") return build_mobilenet_v3(false);
    if (name == "mobilenet-v3-large") return build_mobilenet_v3(true);
    std::string known;
    for (const std::string& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown builtin network '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"mobilenet-v1", "mobilenet-v2", "mnasnet-b1", "mobilenet-v3-small",
            "mobilenet-v3-large"};
}

NetworkSpec builtin(const std::string& name) {
    if (const char* dir = std::getenv("FUSECONV_BUILTIN_DIR")) {
        NetworkSpec net = load_network(std::string(dir) + "/" + name + ".net");
        net.name = name;
        return net;
    }
    NetworkSpec net = build_builtin(name);
    validate_network(net);
    return net;
}

void validate_network(const NetworkSpec& net) {
    if (net.layers.empty()) throw std::invalid_argument("network '" + net.name + "' has no layers");
    const LayerSpec& first = net.layers.front();
    if (first.geom.input_h != net.input_h || first.geom.input_w != net.input_w ||
        first.geom.channels_in != net.input_c)
        throw std::invalid_argument("network '" + net.name + "': layer 0 (" + first.name +
                                    ") does not accept the declared input shape");
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        try {
            l.validate();
        } catch (const std::exception& e) {
            throw std::invalid_argument("layer " + std::to_string(i) + ": " + e.what());
        }
        if (i == 0) continue;
        const LayerSpec& p = net.layers[i - 1];
        const int ph = p.geom.out_h(), pw = p.geom.out_w(), pc = p.geom.channels_out;
        const bool chained = l.geom.input_h == ph && l.geom.input_w == pw && l.geom.channels_in == pc;
        // A fully connected layer may follow a spatial map via global pooling.
        const bool pooled = l.kind == LayerKind::FullyConnected && l.geom.input_h == 1 &&
                            l.geom.input_w == 1 && l.geom.channels_in == pc;
        if (!chained && !pooled)
            throw std::invalid_argument(
                "layer " + std::to_string(i) + " (" + l.name + "): input " +
                std::to_string(l.geom.input_h) + "x" + std::to_string(l.geom.input_w) + "x" +
                std::to_string(l.geom.channels_in) + " does not match previous output " +
                std::to_string(ph) + "x" + std::to_string(pw) + "x" + std::to_string(pc));
    }
}

int stage_count(const NetworkSpec& net) {
    int n = 0;
    for (const LayerSpec& l : net.layers) {
        switch (l.kind) {
            case LayerKind::Standard:
            case LayerKind::Pointwise:
            case LayerKind::FullyConnected: n += 1; break;
            case LayerKind::DepthwiseSeparable:
            case LayerKind::SqueezeExcite: n += 2; break;
            case LayerKind::FuSeFull:
            case LayerKind::FuSeHalf: n += 3; break;
        }
    }
    return n;
}

NetworkSpec parse_network(std::istream& in, const std::string& name) {
    NetworkSpec net;
    net.name = name;
    bool have_input = false;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw.substr(0, raw.find('#'));
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "input") {
            if (!(ls >> net.input_h >> net.input_w >> net.input_c))
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": input directive needs H W C");
            have_input = true;
            continue;
        }
        LayerSpec l;
        l.name = first;
        std::string kind, act;
        int pad = 0;
        if (!(ls >> kind >> l.geom.input_h >> l.geom.input_w >> l.geom.channels_in >> l.geom.kernel >>
              l.geom.channels_out >> l.geom.stride >> pad >> act >> l.block_id))
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected `name kind H W Cin K Cout stride pad act block`");
        l.geom.padding = pad;
        try {
            l.kind = layer_kind_from_string(kind);
            l.act = activation_from_string(act);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (l.kind == LayerKind::SqueezeExcite && !(ls >> l.se_channels >> l.se_squeeze))
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": squeeze-excite layer needs se_ch se_sq columns");
        net.layers.push_back(std::move(l));
    }
    if (!have_input && !net.layers.empty()) {
        net.input_h = net.layers[0].geom.input_h;
        net.input_w = net.layers[0].geom.input_w;
        net.input_c = net.layers[0].geom.channels_in;
    }
    validate_network(net);
    return net;
}

NetworkSpec load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file '" + path + "'");
    std::string name = path;
    size_t slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    size_t dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return parse_network(in, name);
}

std::string format_network(const NetworkSpec& net) {
    std::ostringstream out;
    out << "# name kind H W Cin K Cout stride pad act block [se_ch se_sq]\n";
    out << "input " << net.input_h << " " << net.input_w << " " << net.input_c << "\n";
    for (const LayerSpec& l : net.layers) {
        out << l.name << " " << to_string(l.kind) << " " << l.geom.input_h << " " << l.geom.input_w
            << " " << l.geom.channels_in << " " << l.geom.kernel << " " << l.geom.channels_out << " "
            << l.geom.stride << " " << l.geom.padding << " " << to_string(l.act) << " " << l.block_id;
        if (l.kind == LayerKind::SqueezeExcite) out << " " << l.se_channels << " " << l.se_squeeze;
        out << "\n";
    }
    return out.str();
}

void save_network(const NetworkSpec& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network file '" + path + "'");
    out << format_network(net);
}

namespace {

// Replace the depthwise layers at `which` (indices into net.layers) and, for
// the Full variant, widen squeeze-excite layers of the same blocks to the 2C
// concatenated channels.
NetworkSpec apply_fuse(const NetworkSpec& net, ops::FuseVariant variant,
                       const std::vector<size_t>& which) {
    NetworkSpec out = net;
    for (size_t idx : which) {
        LayerSpec& l = out.layers[idx];
        l.kind = variant == ops::FuseVariant::Full ? LayerKind::FuSeFull : LayerKind::FuSeHalf;
        if (variant == ops::FuseVariant::Full && l.block_id >= 0)
            for (LayerSpec& s : out.layers)
                if (s.kind == LayerKind::SqueezeExcite && s.block_id == l.block_id) {
                    s.se_channels *= 2;
                    s.se_squeeze = make_divisible(s.se_channels / 4);
                }
    }
    return out;
}

}  // namespace

NetworkSpec transform_fuse(const NetworkSpec& net, ops::FuseVariant variant, double fraction,
                           const sim::ArrayConfig& cfg, std::vector<std::string>* selected) {
    std::vector<size_t> ds;
    for (size_t i = 0; i < net.layers.size(); ++i)
        if (net.layers[i].kind == LayerKind::DepthwiseSeparable) ds.push_back(i);
    if (ds.empty())
        throw std::invalid_argument("transform_fuse: network '" + net.name +
                                    "' contains no depthwise separable layers");

    std::vector<size_t> chosen;
    if (fraction >= 0.999) {
        chosen = ds;
    } else if (fraction >= 0.499 && fraction <= 0.501) {
        sim::ArrayConfig sel_cfg = cfg;
        sel_cfg.broadcast_enabled = true;
        uint64_t base = cost::operator_distribution(net, sel_cfg).total_cycles;
        std::vector<std::pair<uint64_t, size_t>> savings;
        for (size_t idx : ds) {
            uint64_t t = cost::operator_distribution(apply_fuse(net, variant, {idx}), sel_cfg)
                             .total_cycles;
            savings.emplace_back(base > t ? base - t : 0, idx);
        }
        std::stable_sort(savings.begin(), savings.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (size_t i = 0; i < ds.size() / 2; ++i) chosen.push_back(savings[i].second);
        std::sort(chosen.begin(), chosen.end());
    } else {
        throw std::invalid_argument("transform_fuse: fraction must be 1.0 or 0.5");
    }

    if (selected)
        for (size_t idx : chosen) selected->push_back(net.layers[idx].name);
    NetworkSpec out = apply_fuse(net, variant, chosen);
    validate_network(out);
    return out;
}

uint64_t network_macs(const NetworkSpec& net) {
    uint64_t total = 0;
    for (const LayerSpec& l : net.layers) {
        const ConvGeometry& g = l.geom;
        const uint64_t NM = static_cast<uint64_t>(g.out_h()) * g.out_w();
        const uint64_t C = static_cast<uint64_t>(g.channels_in);
        const uint64_t Co = static_cast<uint64_t>(g.channels_out);
        const uint64_t post = 1 + static_cast<uint64_t>(act_ops(l.act));  // batch norm + activation
        total += ops::count_macs(l);
        switch (l.kind) {
            case LayerKind::Standard:
            case LayerKind::Pointwise: total += NM * Co * post; break;
            case LayerKind::DepthwiseSeparable:
            case LayerKind::FuSeHalf: total += NM * (C + Co) * post; break;
            case LayerKind::FuSeFull: total += NM * (2 * C + Co) * post; break;
            case LayerKind::FullyConnected:
                total += static_cast<uint64_t>(act_ops(l.act)) * Co;  // no batch norm on FC
                break;
            case LayerKind::SqueezeExcite:
                total += 2 * NM * static_cast<uint64_t>(l.se_channels);  // pool + gate scaling
                break;
        }
    }
    return total;
}

uint64_t network_params(const NetworkSpec& net) {
    uint64_t total = 0;
    for (const LayerSpec& l : net.layers) {
        const uint64_t C = static_cast<uint64_t>(l.geom.channels_in);
        const uint64_t Co = static_cast<uint64_t>(l.geom.channels_out);
        total += ops::count_params(l);
        switch (l.kind) {  // batch-norm scale/shift per normalized channel
            case LayerKind::Standard:
            case LayerKind::Pointwise: total += 2 * Co; break;
            case LayerKind::DepthwiseSeparable:
            case LayerKind::FuSeHalf: total += 2 * C + 2 * Co; break;
            case LayerKind::FuSeFull: total += 4 * C + 2 * Co; break;
            case LayerKind::FullyConnected: total += Co; break;  // bias
            case LayerKind::SqueezeExcite:                       // biases of both FCs
                total += static_cast<uint64_t>(l.se_squeeze) + l.se_channels;
                break;
        }
    }
    return total;
}

}  // namespace netmodel
}  // namespace fusesim
