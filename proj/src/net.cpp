#include "xspec/net.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xspec/error.hpp"
#include "xspec/rng.hpp"

namespace xspec {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

bool has_params(LayerKind k) { return k == LayerKind::conv3x3; }
bool is_global_pool(LayerKind k) { return k == LayerKind::global_avg_pool || k == LayerKind::global_max_pool; }

// Valid output columns [x0, x1) for a horizontal tap offset of kx - 1.
inline void tap_span(int kx, std::size_t w, std::size_t& x0, std::size_t& x1) {
    x0 = kx == 0 ? 1 : 0;
    x1 = kx == 2 ? w - 1 : w;
}

// Rows are (channel, ky, kx), columns are output pixels; zero padding 1.
std::vector<double> im2col(const FeatureMap& in) {
    const std::size_t h = in.height;
    const std::size_t w = in.width;
    const std::size_t hw = h * w;
    std::vector<double> cols(in.channels * 9 * hw, 0.0);
    for (std::size_t c = 0; c < in.channels; ++c) {
        const double* src = in.data.data() + c * hw;
        for (int ky = 0; ky < 3; ++ky) {
            const std::size_t y0 = ky == 0 ? 1 : 0;
            const std::size_t y1 = ky == 2 ? h - 1 : h;
            for (int kx = 0; kx < 3; ++kx) {
                double* dst = cols.data() + ((c * 9) + ky * 3 + kx) * hw;
                std::size_t x0 = 0, x1 = 0;
                tap_span(kx, w, x0, x1);
                for (std::size_t y = y0; y < y1; ++y) {
                    const double* s = src + (y + ky - 1) * w + (kx - 1);
                    double* d = dst + y * w;
                    for (std::size_t x = x0; x < x1; ++x) d[x] = s[x];
                }
            }
        }
    }
    return cols;
}

// Scatter-add of column gradients back onto the input grid.
void col2im(const std::vector<double>& cols, FeatureMap& grad_in) {
    const std::size_t h = grad_in.height;
    const std::size_t w = grad_in.width;
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < grad_in.channels; ++c) {
        double* dst = grad_in.data.data() + c * hw;
        for (int ky = 0; ky < 3; ++ky) {
            const std::size_t y0 = ky == 0 ? 1 : 0;
            const std::size_t y1 = ky == 2 ? h - 1 : h;
            for (int kx = 0; kx < 3; ++kx) {
                const double* src = cols.data() + ((c * 9) + ky * 3 + kx) * hw;
                std::size_t x0 = 0, x1 = 0;
                tap_span(kx, w, x0, x1);
                for (std::size_t y = y0; y < y1; ++y) {
                    double* d = dst + (y + ky - 1) * w + (kx - 1);
                    const double* s = src + y * w;
                    for (std::size_t x = x0; x < x1; ++x) d[x] += s[x];
                }
            }
        }
    }
}

FeatureMap conv_forward(const LayerSpec& spec, const ConvParams& p, const FeatureMap& in) {
    require(in.channels == spec.in_channels, ErrorKind::shape_mismatch,
            "conv expects " + std::to_string(spec.in_channels) + " input channels, got " +
                std::to_string(in.channels));
    const std::size_t hw = in.height * in.width;
    const std::size_t k = spec.in_channels * 9;
    std::vector<double> cols = im2col(in);
    FeatureMap out(spec.out_channels, in.height, in.width);
    MatrixMap o(out.data.data(), static_cast<Eigen::Index>(spec.out_channels), static_cast<Eigen::Index>(hw));
    ConstMatrixMap wm(p.weight.data(), static_cast<Eigen::Index>(spec.out_channels), static_cast<Eigen::Index>(k));
    ConstMatrixMap cm(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
    o.noalias() = wm * cm;
    for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
        double* row = out.data.data() + oc * hw;
        const double b = p.bias[oc];
        for (std::size_t i = 0; i < hw; ++i) row[i] += b;
    }
    return out;
}

void conv_backward(const LayerSpec& spec, const ConvParams& p, const FeatureMap& in, const FeatureMap& grad_out,
                   ConvParams* grad_params, FeatureMap* grad_in) {
    const std::size_t hw = in.height * in.width;
    const std::size_t k = spec.in_channels * 9;
    const auto rows = static_cast<Eigen::Index>(spec.out_channels);
    ConstMatrixMap go(grad_out.data.data(), rows, static_cast<Eigen::Index>(hw));
    std::vector<double> cols = im2col(in);
    if (grad_params) {
        ConstMatrixMap cm(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
        MatrixMap gw(grad_params->weight.data(), rows, static_cast<Eigen::Index>(k));
        gw.noalias() += go * cm.transpose();
        for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
            const double* row = grad_out.data.data() + oc * hw;
            double acc = 0.0;
            for (std::size_t i = 0; i < hw; ++i) acc += row[i];
            grad_params->bias[oc] += acc;
        }
    }
    if (grad_in) {
        ConstMatrixMap wm(p.weight.data(), rows, static_cast<Eigen::Index>(k));
        MatrixMap gc(cols.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
        gc.noalias() = wm.transpose() * go;
        *grad_in = FeatureMap(in.channels, in.height, in.width);
        col2im(cols, *grad_in);
    }
}

FeatureMap maxpool_forward(const FeatureMap& in, std::vector<std::uint32_t>& route) {
    require(in.height >= 2 && in.width >= 2, ErrorKind::shape_mismatch, "maxpool2 input smaller than 2x2");
    FeatureMap out(in.channels, in.height / 2, in.width / 2);
    route.assign(out.data.size(), 0);
    for (std::size_t c = 0; c < in.channels; ++c) {
        for (std::size_t y = 0; y < out.height; ++y) {
            for (std::size_t x = 0; x < out.width; ++x) {
                std::size_t best = (c * in.height + 2 * y) * in.width + 2 * x;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        std::size_t idx = (c * in.height + 2 * y + dy) * in.width + 2 * x + dx;
                        if (in.data[idx] > in.data[best]) best = idx;
                    }
                }
                std::size_t o = (c * out.height + y) * out.width + x;
                out.data[o] = in.data[best];
                route[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return out;
}

FeatureMap global_pool_forward(LayerKind kind, const FeatureMap& in, std::vector<std::uint32_t>& route) {
    const std::size_t hw = in.height * in.width;
    require(hw > 0, ErrorKind::shape_mismatch, "global pooling over an empty map");
    FeatureMap out(in.channels, 1, 1);
    if (kind == LayerKind::global_max_pool) route.assign(in.channels, 0);
    for (std::size_t c = 0; c < in.channels; ++c) {
        const double* src = in.data.data() + c * hw;
        if (kind == LayerKind::global_avg_pool) {
            double acc = 0.0;
            for (std::size_t i = 0; i < hw; ++i) acc += src[i];
            out.data[c] = acc / static_cast<double>(hw);
        } else {
            std::size_t best = 0;
            for (std::size_t i = 1; i < hw; ++i) {
                if (src[i] > src[best]) best = i;
            }
            out.data[c] = src[best];
            route[c] = static_cast<std::uint32_t>(c * hw + best);
        }
    }
    return out;
}

FeatureMap run_layer(const EmbeddingNet& net, std::size_t i, const FeatureMap& in,
                     std::vector<std::uint32_t>& route) {
    const LayerSpec& spec = net.layers[i];
    switch (spec.kind) {
        case LayerKind::conv3x3:
            return conv_forward(spec, net.params[i], in);
        case LayerKind::relu: {
            FeatureMap out = in;
            for (double& v : out.data) v = v > 0.0 ? v : 0.0;
            return out;
        }
        case LayerKind::maxpool2:
            return maxpool_forward(in, route);
        case LayerKind::global_avg_pool:
        case LayerKind::global_max_pool:
            return global_pool_forward(spec.kind, in, route);
    }
    fail(ErrorKind::invalid_argument, "unknown layer kind");
}

void check_finite(const FeatureMap& m, std::size_t layer) {
    for (double v : m.data) {
        if (!std::isfinite(v)) {
            fail(ErrorKind::invalid_argument, "non-finite activation after layer " + std::to_string(layer));
        }
    }
}

}  // namespace

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv3x3: return "conv3x3";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool2: return "maxpool2";
        case LayerKind::global_avg_pool: return "global_avg_pool";
        case LayerKind::global_max_pool: return "global_max_pool";
    }
    return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
    for (LayerKind k : {LayerKind::conv3x3, LayerKind::relu, LayerKind::maxpool2, LayerKind::global_avg_pool,
                        LayerKind::global_max_pool}) {
        if (name == to_string(k)) return k;
    }
    fail(ErrorKind::format, "unknown layer kind '" + std::string(name) + "'");
}

GlobalPool parse_global_pool(std::string_view name) {
    if (name == "average" || name == "avg") return GlobalPool::average;
    if (name == "max") return GlobalPool::max;
    fail(ErrorKind::config, "unknown global pool '" + std::string(name) + "'");
}

std::string_view to_string(GlobalPool pool) { return pool == GlobalPool::average ? "average" : "max"; }

EmbeddingNet EmbeddingNet::from_layers(std::vector<LayerSpec> specs) {
    EmbeddingNet net;
    net.layers = std::move(specs);
    net.params.resize(net.layers.size());
    net.trainable.assign(net.layers.size(), false);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        if (!has_params(s.kind)) continue;
        net.params[i].weight.assign(s.out_channels * s.in_channels * 9, 0.0);
        net.params[i].bias.assign(s.out_channels, 0.0);
        net.trainable[i] = true;
    }
    net.validate();
    return net;
}

void EmbeddingNet::validate() const {
    require(!layers.empty(), ErrorKind::invalid_argument, "network has no layers");
    require(params.size() == layers.size() && trainable.size() == layers.size(), ErrorKind::invalid_argument,
            "network parameter table does not match its layer list");
    require(is_global_pool(layers.back().kind), ErrorKind::invalid_argument,
            "network must end in a global pooling layer");
    std::size_t channels = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& s = layers[i];
        if (is_global_pool(s.kind)) {
            require(i + 1 == layers.size(), ErrorKind::invalid_argument, "global pooling must be the last layer");
        }
        if (!has_params(s.kind)) {
            require(params[i].weight.empty() && params[i].bias.empty(), ErrorKind::invalid_argument,
                    "parameter-free layer carries parameters");
            continue;
        }
        require(s.in_channels > 0 && s.out_channels > 0, ErrorKind::invalid_argument,
                "conv layer needs positive channel counts");
        require(channels == 0 || channels == s.in_channels, ErrorKind::invalid_argument,
                "conv layer " + std::to_string(i) + " expects " + std::to_string(s.in_channels) +
                    " channels but receives " + std::to_string(channels));
        require(params[i].weight.size() == s.out_channels * s.in_channels * 9 &&
                    params[i].bias.size() == s.out_channels,
                ErrorKind::shape_mismatch, "conv layer " + std::to_string(i) + " parameter shape mismatch");
        channels = s.out_channels;
    }
    require(channels > 0, ErrorKind::invalid_argument, "network has no conv layer");
}

std::size_t EmbeddingNet::input_channels() const {
    for (const LayerSpec& s : layers) {
        if (has_params(s.kind)) return s.in_channels;
    }
    return 0;
}

std::size_t EmbeddingNet::embedding_dim() const {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        if (has_params(it->kind)) return it->out_channels;
    }
    return 0;
}

std::size_t EmbeddingNet::parameter_count() const {
    std::size_t n = 0;
    for (const ConvParams& p : params) n += p.weight.size() + p.bias.size();
    return n;
}

std::vector<std::size_t> EmbeddingNet::conv_layer_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (has_params(layers[i].kind)) idx.push_back(i);
    }
    return idx;
}

EmbeddingNet make_tower(std::size_t in_channels, std::string_view architecture, GlobalPool pool) {
    require(in_channels > 0, ErrorKind::config, "tower needs at least one input channel");
    std::vector<LayerSpec> specs;
    std::size_t channels = in_channels;
    std::size_t start = 0;
    while (start <= architecture.size()) {
        std::size_t end = architecture.find(',', start);
        if (end == std::string_view::npos) end = architecture.size();
        std::string token(architecture.substr(start, end - start));
        token.erase(0, token.find_first_not_of(" \t"));
        token.erase(token.find_last_not_of(" \t") + 1);
        if (token == "M" || token == "m") {
            specs.push_back({LayerKind::maxpool2, 0, 0});
        } else {
            std::size_t used = 0;
            long width = 0;
            try {
                width = std::stol(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            require(used == token.size() && !token.empty() && width > 0, ErrorKind::config,
                    "bad architecture token '" + token + "' in '" + std::string(architecture) + "'");
            specs.push_back({LayerKind::conv3x3, channels, static_cast<std::size_t>(width)});
            specs.push_back({LayerKind::relu, 0, 0});
            channels = static_cast<std::size_t>(width);
        }
        start = end + 1;
    }
    specs.push_back({pool == GlobalPool::average ? LayerKind::global_avg_pool : LayerKind::global_max_pool, 0, 0});
    return EmbeddingNet::from_layers(std::move(specs));
}

void freeze_except_last(EmbeddingNet& net, int count) {
    std::vector<std::size_t> convs = net.conv_layer_indices();
    const std::size_t keep = count < 0 ? convs.size() : std::min<std::size_t>(convs.size(), count);
    std::fill(net.trainable.begin(), net.trainable.end(), false);
    for (std::size_t k = convs.size() - keep; k < convs.size(); ++k) net.trainable[convs[k]] = true;
}

void init_params(EmbeddingNet& net, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "init"));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        if (!has_params(s.kind)) continue;
        const double stddev = std::sqrt(2.0 / (9.0 * static_cast<double>(s.in_channels)));
        for (double& w : net.params[i].weight) w = rng.normal(0.0, stddev);
        std::fill(net.params[i].bias.begin(), net.params[i].bias.end(), 0.0);
    }
}

EmbeddingNet expand_input_channels(const EmbeddingNet& net, std::size_t channels) {
    require(channels > 0, ErrorKind::invalid_argument, "channel count must be positive");
    EmbeddingNet out = net;
    std::vector<std::size_t> convs = net.conv_layer_indices();
    const std::size_t first = convs.front();
    const LayerSpec& s = net.layers[first];
    require(s.in_channels == 1, ErrorKind::invalid_argument, "only single-channel towers can be expanded");
    out.layers[first].in_channels = channels;
    std::vector<double>& w = out.params[first].weight;
    w.assign(s.out_channels * channels * 9, 0.0);
    const auto& src = net.params[first].weight;
    for (std::size_t o = 0; o < s.out_channels; ++o) {
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t k = 0; k < 9; ++k) {
                w[(o * channels + c) * 9 + k] = src[o * 9 + k] / static_cast<double>(channels);
            }
        }
    }
    out.validate();
    return out;
}

FeatureMap to_feature_map(const Tensor& hwc) {
    require(hwc.rank() == 3, ErrorKind::shape_mismatch, "network input must be an H x W x C tensor");
    const std::size_t h = hwc.shape[0], w = hwc.shape[1], c = hwc.shape[2];
    FeatureMap m(c, h, w);
    for (std::size_t k = 0; k < h * w; ++k) {
        for (std::size_t ch = 0; ch < c; ++ch) m.data[ch * h * w + k] = hwc.data[k * c + ch];
    }
    return m;
}

std::vector<double> forward_from(const EmbeddingNet& net, FeatureMap input, std::size_t start_layer,
                                 ForwardCache* cache) {
    require(start_layer < net.layers.size(), ErrorKind::invalid_argument, "forward start past the last layer");
    check_finite(input, start_layer);
    if (cache) {
        cache->start_layer = start_layer;
        cache->inputs.clear();
        cache->routes.clear();
        cache->valid = false;
    }
    FeatureMap cur = std::move(input);
    for (std::size_t i = start_layer; i < net.layers.size(); ++i) {
        std::vector<std::uint32_t> route;
        FeatureMap next = run_layer(net, i, cur, route);
        check_finite(next, i);
        if (cache) {
            cache->inputs.push_back(std::move(cur));
            cache->routes.push_back(std::move(route));
        }
        cur = std::move(next);
    }
    if (cache) {
        cache->output = cur.data;
        cache->valid = true;
    }
    return cur.data;
}

std::vector<double> forward(const EmbeddingNet& net, const Tensor& x_hwc, ForwardCache* cache) {
    FeatureMap in = to_feature_map(x_hwc);
    require(in.channels == net.input_channels(), ErrorKind::shape_mismatch,
            "input has " + std::to_string(in.channels) + " channels, network expects " +
                std::to_string(net.input_channels()));
    return forward_from(net, std::move(in), 0, cache);
}

FeatureMap forward_prefix(const EmbeddingNet& net, const Tensor& x_hwc, std::size_t end_layer) {
    require(end_layer <= net.layers.size(), ErrorKind::invalid_argument, "prefix end past the last layer");
    FeatureMap cur = to_feature_map(x_hwc);
    require(cur.channels == net.input_channels(), ErrorKind::shape_mismatch, "input channel mismatch");
    for (std::size_t i = 0; i < end_layer; ++i) {
        std::vector<std::uint32_t> route;
        cur = run_layer(net, i, cur, route);
    }
    return cur;
}

std::size_t first_trainable_layer(const EmbeddingNet& net) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (has_params(net.layers[i].kind) && net.trainable[i]) return i;
    }
    return net.layers.size();
}

NetGradients NetGradients::zeros_like(const EmbeddingNet& net) {
    NetGradients g;
    g.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        g.layers[i].weight.assign(net.params[i].weight.size(), 0.0);
        g.layers[i].bias.assign(net.params[i].bias.size(), 0.0);
    }
    return g;
}

void NetGradients::add(const NetGradients& other, double s) {
    require(other.layers.size() == layers.size(), ErrorKind::shape_mismatch, "gradient layer count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto& w = layers[i].weight;
        auto& b = layers[i].bias;
        require(w.size() == other.layers[i].weight.size() && b.size() == other.layers[i].bias.size(),
                ErrorKind::shape_mismatch, "gradient shape mismatch");
        for (std::size_t k = 0; k < w.size(); ++k) w[k] += s * other.layers[i].weight[k];
        for (std::size_t k = 0; k < b.size(); ++k) b[k] += s * other.layers[i].bias[k];
    }
}

void NetGradients::scale(double factor) {
    for (ConvParams& p : layers) {
        for (double& v : p.weight) v *= factor;
        for (double& v : p.bias) v *= factor;
    }
}

NetGradients backward(const EmbeddingNet& net, const ForwardCache& cache, std::span<const double> grad_out,
                      Tensor* input_grad) {
    require(cache.valid && cache.inputs.size() == net.layers.size() - cache.start_layer, ErrorKind::invalid_argument,
            "backward called without a matching forward cache");
    require(grad_out.size() == cache.output.size(), ErrorKind::shape_mismatch,
            "output gradient has length " + std::to_string(grad_out.size()) + ", embedding has " +
                std::to_string(cache.output.size()));

    NetGradients grads = NetGradients::zeros_like(net);
    const std::size_t stop = input_grad ? cache.start_layer
                                        : std::max(cache.start_layer, first_trainable_layer(net));

    FeatureMap g(grad_out.size(), 1, 1);
    std::copy(grad_out.begin(), grad_out.end(), g.data.begin());

    for (std::size_t i = net.layers.size(); i-- > stop;) {
        const std::size_t slot = i - cache.start_layer;
        const FeatureMap& in = cache.inputs[slot];
        const LayerSpec& spec = net.layers[i];
        const bool need_input_grad = i > stop || input_grad != nullptr;
        FeatureMap gin;
        switch (spec.kind) {
            case LayerKind::conv3x3:
                conv_backward(spec, net.params[i], in, g, net.trainable[i] ? &grads.layers[i] : nullptr,
                              need_input_grad ? &gin : nullptr);
                break;
            case LayerKind::relu:
                gin = FeatureMap(in.channels, in.height, in.width);
                for (std::size_t k = 0; k < in.data.size(); ++k) gin.data[k] = in.data[k] > 0.0 ? g.data[k] : 0.0;
                break;
            case LayerKind::maxpool2:
            case LayerKind::global_max_pool: {
                gin = FeatureMap(in.channels, in.height, in.width);
                const auto& route = cache.routes[slot];
                for (std::size_t k = 0; k < route.size(); ++k) gin.data[route[k]] += g.data[k];
                break;
            }
            case LayerKind::global_avg_pool: {
                gin = FeatureMap(in.channels, in.height, in.width);
                const std::size_t hw = in.height * in.width;
                const double inv = 1.0 / static_cast<double>(hw);
                for (std::size_t c = 0; c < in.channels; ++c) {
                    for (std::size_t k = 0; k < hw; ++k) gin.data[c * hw + k] = g.data[c] * inv;
                }
                break;
            }
        }
        g = std::move(gin);
    }

    if (input_grad) {
        if (cache.start_layer == 0) {
            const std::size_t h = g.height, w = g.width, c = g.channels;
            *input_grad = Tensor({h, w, c});
            for (std::size_t k = 0; k < h * w; ++k) {
                for (std::size_t ch = 0; ch < c; ++ch) input_grad->data[k * c + ch] = g.data[ch * h * w + k];
            }
        } else {
            *input_grad = Tensor({g.channels, g.height, g.width}, std::move(g.data));
        }
    }
    return grads;
}

void CoupledModel::validate() const {
    vis.validate();
    pol.validate();
    require(vis.embedding_dim() == pol.embedding_dim(), ErrorKind::invalid_argument,
            "coupled towers have different embedding dimensions");
    require(vis.input_channels() == 1, ErrorKind::invalid_argument, "visible tower must take one channel");
}

CoupledModel make_coupled_model(std::string_view architecture, GlobalPool pool, std::size_t pol_channels,
                                std::uint64_t seed) {
    CoupledModel m;
    m.vis = make_tower(1, architecture, pool);
    init_params(m.vis, seed);
    m.pol = expand_input_channels(m.vis, pol_channels);
    m.validate();
    return m;
}

CoupledModel make_independent_model(std::string_view architecture, GlobalPool pool, std::size_t pol_channels,
                                    std::uint64_t seed) {
    CoupledModel m;
    m.vis = make_tower(1, architecture, pool);
    init_params(m.vis, seed);
    m.pol = make_tower(pol_channels, architecture, pool);
    init_params(m.pol, derive_seed(seed, "pol"));
    m.validate();
    return m;
}

CoupledGradients CoupledGradients::zeros_like(const CoupledModel& model) {
    return {NetGradients::zeros_like(model.vis), NetGradients::zeros_like(model.pol)};
}

void CoupledGradients::add(const CoupledGradients& other, double s) {
    vis.add(other.vis, s);
    pol.add(other.pol, s);
}

SgdMomentum::SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {
    require(lr >= 0.0 && std::isfinite(lr), ErrorKind::config, "learning rate must be finite and non-negative");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::config, "momentum must lie in [0, 1)");
}

void SgdMomentum::step(CoupledModel& model, const CoupledGradients& grads) {
    if (!initialized_) {
        velocity_ = CoupledGradients::zeros_like(model);
        initialized_ = true;
    }
    step_net(model.vis, grads.vis, velocity_.vis);
    step_net(model.pol, grads.pol, velocity_.pol);
}

void SgdMomentum::step_net(EmbeddingNet& net, const NetGradients& grads, NetGradients& velocity) {
    require(grads.layers.size() == net.layers.size(), ErrorKind::shape_mismatch, "gradient layer count mismatch");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (!has_params(net.layers[i].kind) || !net.trainable[i]) continue;
        ConvParams& p = net.params[i];
        const ConvParams& g = grads.layers[i];
        ConvParams& v = velocity.layers[i];
        require(g.weight.size() == p.weight.size() && g.bias.size() == p.bias.size(), ErrorKind::shape_mismatch,
                "gradient shape mismatch at layer " + std::to_string(i));
        for (std::size_t k = 0; k < p.weight.size(); ++k) {
            v.weight[k] = momentum_ * v.weight[k] - lr_ * g.weight[k];
            p.weight[k] += v.weight[k];
        }
        for (std::size_t k = 0; k < p.bias.size(); ++k) {
            v.bias[k] = momentum_ * v.bias[k] - lr_ * g.bias[k];
            p.bias[k] += v.bias[k];
        }
    }
}

}  // namespace xspec
