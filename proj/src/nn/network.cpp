#include "ldiphoto/nn/network.hpp"

#include <json.hpp>

#include <map>

#include "executor.hpp"

namespace ldiphoto::nn {

namespace {

using nlohmann::json;

const std::map<std::string, LayerKind> kKindNames = {
    {"pconv", LayerKind::PartialConv}, {"activation", LayerKind::Activation}, {"normalize", LayerKind::Normalize},
    {"downscale", LayerKind::Downscale}, {"upscale", LayerKind::Upscale},     {"skip_save", LayerKind::SkipSave},
    {"skip_concat", LayerKind::SkipConcat}};

const std::map<std::string, ActivationFn> kFnNames = {{"identity", ActivationFn::Identity},
                                                      {"relu", ActivationFn::Relu},
                                                      {"leaky_relu", ActivationFn::LeakyRelu},
                                                      {"sigmoid", ActivationFn::Sigmoid},
                                                      {"tanh", ActivationFn::Tanh}};

template <typename Map, typename Value>
std::string name_of(const Map& names, Value v) {
    for (const auto& [k, val] : names)
        if (val == v) return k;
    return "?";
}

}  // namespace

NetworkSpec NetworkSpec::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("network spec: ") + e.what());
    }
    NetworkSpec net;
    try {
        net.input_channels = doc.at("input_channels").get<int>();
        for (const json& j : doc.at("layers")) {
            LayerSpec l;
            const auto kind = kKindNames.find(j.at("type").get<std::string>());
            if (kind == kKindNames.end()) throw InputError("network spec: unknown layer type " + j.at("type").dump());
            l.kind = kind->second;
            l.name = j.value("name", "");
            switch (l.kind) {
                case LayerKind::PartialConv:
                    l.k = j.at("k").get<int>();
                    l.stride = j.value("stride", 1);
                    l.in_channels = j.at("in").get<int>();
                    l.out_channels = j.at("out").get<int>();
                    break;
                case LayerKind::Activation: {
                    const auto fn = kFnNames.find(j.at("fn").get<std::string>());
                    if (fn == kFnNames.end()) throw InputError("network spec: unknown activation " + j.at("fn").dump());
                    l.fn = fn->second;
                    l.slope = j.value("slope", 0.2f);
                    break;
                }
                case LayerKind::Normalize: l.channels = j.at("channels").get<int>(); break;
                case LayerKind::SkipSave:
                case LayerKind::SkipConcat: l.slot = j.at("slot").get<std::string>(); break;
                default: break;
            }
            net.layers.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("network spec: ") + e.what());
    }
    net.validate();
    return net;
}

std::string NetworkSpec::to_json() const {
    json layers_json = json::array();
    for (const LayerSpec& l : layers) {
        json j;
        j["type"] = name_of(kKindNames, l.kind);
        if (!l.name.empty()) j["name"] = l.name;
        switch (l.kind) {
            case LayerKind::PartialConv:
                j["k"] = l.k;
                j["stride"] = l.stride;
                j["in"] = l.in_channels;
                j["out"] = l.out_channels;
                break;
            case LayerKind::Activation:
                j["fn"] = name_of(kFnNames, l.fn);
                if (l.fn == ActivationFn::LeakyRelu) j["slope"] = l.slope;
                break;
            case LayerKind::Normalize: j["channels"] = l.channels; break;
            case LayerKind::SkipSave:
            case LayerKind::SkipConcat: j["slot"] = l.slot; break;
            default: break;
        }
        layers_json.push_back(std::move(j));
    }
    return json{{"input_channels", input_channels}, {"layers", layers_json}}.dump(2);
}

void NetworkSpec::validate() const {
    if (input_channels < 1) throw InputError("network needs at least one input channel");
    int channels = input_channels;
    int level = 0;
    std::map<std::string, std::pair<int, int>> saved;  // slot -> (channels, level)
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        const std::string where = "layer " + std::to_string(i) + ": ";
        switch (l.kind) {
            case LayerKind::PartialConv:
                if (l.in_channels != channels)
                    throw InputError(where + "expects " + std::to_string(l.in_channels) + " channels, gets " +
                                     std::to_string(channels));
                if (l.name.empty()) throw InputError(where + "pconv needs a name");
                KernelSpec(l.k, l.stride, l.in_channels, l.out_channels).check();
                channels = l.out_channels;
                if (l.stride == 2) ++level;
                break;
            case LayerKind::Normalize:
                if (l.channels != channels || l.name.empty()) throw InputError(where + "normalize channel mismatch or no name");
                break;
            case LayerKind::Downscale: ++level; break;
            case LayerKind::Upscale:
                if (level == 0) throw InputError(where + "upscale without a matching downscale");
                --level;
                break;
            case LayerKind::SkipSave: saved[l.slot] = {channels, level}; break;
            case LayerKind::SkipConcat: {
                auto it = saved.find(l.slot);
                if (it == saved.end()) throw InputError(where + "concat of unsaved slot '" + l.slot + "'");
                if (it->second.second != level) throw InputError(where + "concat across scales");
                channels += it->second.first;
                break;
            }
            case LayerKind::Activation: break;
        }
    }
    if (level != 0) throw InputError("network ends at a coarser scale than it starts");
}

int NetworkSpec::output_channels() const {
    int channels = input_channels;
    std::map<std::string, int> saved;
    for (const LayerSpec& l : layers) {
        if (l.kind == LayerKind::PartialConv) channels = l.out_channels;
        if (l.kind == LayerKind::SkipSave) saved[l.slot] = channels;
        if (l.kind == LayerKind::SkipConcat) channels += saved[l.slot];
    }
    return channels;
}

NetworkSpec NetworkSpec::unet(int input_channels, int width, int stages, int k) {
    NetworkSpec net;
    net.input_channels = input_channels;
    auto conv = [&](const std::string& name, int in, int out, int stride, int ks) {
        LayerSpec l;
        l.kind = LayerKind::PartialConv;
        l.name = name;
        l.k = ks;
        l.stride = stride;
        l.in_channels = in;
        l.out_channels = out;
        net.layers.push_back(l);
    };
    auto act = [&](ActivationFn fn) {
        LayerSpec l;
        l.kind = LayerKind::Activation;
        l.fn = fn;
        net.layers.push_back(l);
    };
    auto simple = [&](LayerKind kind, const std::string& slot) {
        LayerSpec l;
        l.kind = kind;
        l.slot = slot;
        net.layers.push_back(l);
    };
    auto norm = [&](const std::string& name, int c) {
        LayerSpec l;
        l.kind = LayerKind::Normalize;
        l.name = name;
        l.channels = c;
        net.layers.push_back(l);
    };
    std::vector<int> widths;
    for (int i = 0; i <= stages; ++i) widths.push_back(width << std::min(i, 2));

    conv("enc0", input_channels, widths[0], 1, k);
    act(ActivationFn::Relu);
    simple(LayerKind::SkipSave, "s0");
    for (int i = 1; i <= stages; ++i) {
        conv("enc" + std::to_string(i), widths[std::size_t(i - 1)], widths[std::size_t(i)], 2, k);
        norm("bn" + std::to_string(i), widths[std::size_t(i)]);
        act(ActivationFn::Relu);
        if (i < stages) simple(LayerKind::SkipSave, "s" + std::to_string(i));
    }
    int channels = widths.back();
    for (int i = stages; i >= 1; --i) {
        simple(LayerKind::Upscale, "");
        simple(LayerKind::SkipConcat, "s" + std::to_string(i - 1));
        channels += widths[std::size_t(i - 1)];
        conv("dec" + std::to_string(i), channels, widths[std::size_t(i - 1)], 1, k);
        act(ActivationFn::LeakyRelu);
        channels = widths[std::size_t(i - 1)];
    }
    conv("out", channels, input_channels, 1, 1);
    act(ActivationFn::Sigmoid);
    net.validate();
    return net;
}

KernelSpec bind_kernel(const LayerSpec& l, const WeightStore& weights) {
    KernelSpec spec(l.k, l.stride, l.in_channels, l.out_channels);
    const auto& w = weights.get(l.name + ".weight", {std::uint32_t(l.out_channels), std::uint32_t(l.in_channels),
                                                     std::uint32_t(l.k), std::uint32_t(l.k)});
    const auto& b = weights.get(l.name + ".bias", {std::uint32_t(l.out_channels)});
    spec.weights = Eigen::Map<const KernelSpec::Weights>(w.data.data(), l.out_channels, l.in_channels * l.k * l.k);
    spec.bias = Eigen::Map<const Eigen::VectorXf>(b.data.data(), l.out_channels);
    return spec;
}

WeightStore random_weights(const NetworkSpec& net, std::mt19937& rng, float scale) {
    std::normal_distribution<float> normal(0.0f, scale);
    WeightStore store;
    auto fill = [&](std::size_t n) {
        std::vector<float> v(n);
        for (float& x : v) x = normal(rng);
        return v;
    };
    for (const LayerSpec& l : net.layers) {
        if (l.kind == LayerKind::PartialConv) {
            const auto o = std::uint32_t(l.out_channels), i = std::uint32_t(l.in_channels), k = std::uint32_t(l.k);
            store.set(l.name + ".weight", {o, i, k, k}, fill(std::size_t(o) * i * k * k));
            store.set(l.name + ".bias", {o}, fill(o));
        } else if (l.kind == LayerKind::Normalize) {
            const auto c = std::uint32_t(l.channels);
            auto s = fill(c);
            for (float& x : s) x += 1.0f;
            store.set(l.name + ".scale", {c}, std::move(s));
            store.set(l.name + ".shift", {c}, fill(c));
        }
    }
    return store;
}

namespace {

// Scale maps are built lazily per level and reused on the way back up.
class LdiBackend {
public:
    explicit LdiBackend(GraphPtr finest) { graphs_.push_back(std::move(finest)); }

    std::pair<LdiTensor, LdiTensor> conv(const LdiTensor& x, const LdiTensor& m, const KernelSpec& spec) {
        const ScaleMap* map = spec.stride == 2 ? &map_at(level_) : nullptr;
        auto r = ldi_partial_conv(x, m, spec, map);
        if (spec.stride == 2) ++level_;
        return {std::move(r.values), std::move(r.mask)};
    }
    std::pair<LdiTensor, LdiTensor> downscale(const LdiTensor& x, const LdiTensor& m) {
        const ScaleMap& map = map_at(level_++);
        return {ldi_subsample(x, map), ldi_subsample(m, map)};
    }
    std::pair<LdiTensor, LdiTensor> upscale(const LdiTensor& x, const LdiTensor& m) {
        const ScaleMap& map = map_at(--level_);
        std::vector<std::uint8_t> mapped;
        LdiTensor fx = ldi_upscale(x, map, &mapped);
        LdiTensor fm = ldi_upscale(m, map);
        for (std::size_t k = 0; k < mapped.size(); ++k)
            if (!mapped[k]) fm.values(0, Eigen::Index(k)) = 0.0f;
        return {std::move(fx), std::move(fm)};
    }
    LdiTensor concat(const LdiTensor& a, const LdiTensor& b) {
        LdiTensor out(a.graph, a.channels() + b.channels());
        out.values << a.values, b.values;
        return out;
    }

private:
    const ScaleMap& map_at(std::size_t level) {
        while (maps_.size() <= level) {
            maps_.push_back(ldi_downscale(graphs_.back()));
            graphs_.push_back(maps_.back().coarse);
        }
        return maps_[level];
    }

    std::vector<GraphPtr> graphs_;
    std::vector<ScaleMap> maps_;
    std::size_t level_ = 0;
};

}  // namespace

LdiTensor run_unet(const Ldi& ldi, const std::vector<float>& known, const NetworkSpec& net, const WeightStore& weights) {
    if (net.input_channels != ldi.color_channels())
        throw InputError("network expects " + std::to_string(net.input_channels) + " input channels");
    if (int(known.size()) != ldi.size()) throw InputError("mask length does not match the LDI");
    const GraphPtr graph = LdiGraph::from(ldi);
    LdiTensor x(graph, ldi.values().topRows(ldi.color_channels()));
    LdiTensor m(graph, Eigen::Map<const Eigen::RowVectorXf>(known.data(), ldi.size()));
    LdiBackend backend(graph);
    return detail::execute(backend, std::move(x), std::move(m), net, weights);
}

}  // namespace ldiphoto::nn
