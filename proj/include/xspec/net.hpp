#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xspec/image.hpp"

namespace xspec {

enum class LayerKind { conv3x3, relu, maxpool2, global_avg_pool, global_max_pool };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

// conv3x3: stride 1, zero padding 1, shape preserving.
// maxpool2: 2x2 window, stride 2, floor on odd extents.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t in_channels = 0;   // conv only
    std::size_t out_channels = 0;  // conv only

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// weight is out x in x 3 x 3 row-major; both vectors are empty for layers
// without parameters.
struct ConvParams {
    std::vector<double> weight;
    std::vector<double> bias;

    friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

struct EmbeddingNet {
    std::vector<LayerSpec> layers;
    std::vector<ConvParams> params;  // parallel to layers
    std::vector<bool> trainable;     // parallel to layers; meaningful for conv layers

    // Builds a net with zeroed parameters and every conv layer trainable.
    static EmbeddingNet from_layers(std::vector<LayerSpec> layers);

    // Throws Error(invalid_argument) unless the channel chain is consistent
    // and the list ends in a global pooling layer.
    void validate() const;

    std::size_t input_channels() const;
    std::size_t embedding_dim() const;
    std::size_t parameter_count() const;
    std::vector<std::size_t> conv_layer_indices() const;

    friend bool operator==(const EmbeddingNet&, const EmbeddingNet&) = default;
};

enum class GlobalPool { average, max };

GlobalPool parse_global_pool(std::string_view name);
std::string_view to_string(GlobalPool pool);

// VGG-style description: comma-separated conv widths with "M" for a 2x2 max
// pool, e.g. "16,16,M,32,32,M,64". Every conv is followed by a ReLU and the
// list is closed by the global pool.
inline constexpr std::string_view kDefaultArchitecture = "16,16,M,32,32,M,64";

EmbeddingNet make_tower(std::size_t in_channels, std::string_view architecture = kDefaultArchitecture,
                        GlobalPool pool = GlobalPool::average);

// Marks the last `count` conv layers trainable and freezes the rest.
// A negative count makes every conv layer trainable.
void freeze_except_last(EmbeddingNet& net, int count);

// He-normal conv weights (std sqrt(2 / (9 * in))) from a seeded stream, zero biases.
void init_params(EmbeddingNet& net, std::uint64_t seed);

// Copy of `net` whose first conv takes `channels` inputs, each a replica of
// the original single-channel filter divided by `channels`.
EmbeddingNet expand_input_channels(const EmbeddingNet& net, std::size_t channels);

// Channel-major activation.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(std::size_t c, std::size_t h, std::size_t w)
        : channels(c), height(h), width(w), data(c * h * w, 0.0) {}
};

// H x W x C tensor to channel-major map.
FeatureMap to_feature_map(const Tensor& hwc);

// Per-layer inputs recorded by a forward pass, plus pooling argmax routes.
struct ForwardCache {
    std::size_t start_layer = 0;
    std::vector<FeatureMap> inputs;                  // inputs[i] feeds layer start_layer + i
    std::vector<std::vector<std::uint32_t>> routes;  // parallel to inputs
    std::vector<double> output;
    bool valid = false;
};

std::vector<double> forward(const EmbeddingNet& net, const Tensor& x_hwc, ForwardCache* cache = nullptr);

// Runs layers [start_layer, end) on an activation produced by the prefix.
std::vector<double> forward_from(const EmbeddingNet& net, FeatureMap input, std::size_t start_layer,
                                 ForwardCache* cache = nullptr);

// Output of layers [0, end_layer).
FeatureMap forward_prefix(const EmbeddingNet& net, const Tensor& x_hwc, std::size_t end_layer);

// Index of the first layer that can receive a parameter update, or the layer
// count when nothing is trainable.
std::size_t first_trainable_layer(const EmbeddingNet& net);

struct NetGradients {
    std::vector<ConvParams> layers;  // parallel to EmbeddingNet::layers

    static NetGradients zeros_like(const EmbeddingNet& net);
    void add(const NetGradients& other, double scale = 1.0);
    void scale(double factor);
};

// Reverse pass through the layers recorded in `cache`. Frozen layers get
// zero parameter gradients. When input_grad is null the pass stops at the
// first trainable layer; otherwise it runs to the cache start and writes the
// gradient with respect to that layer's input (H x W x C when the cache
// starts at layer 0).
NetGradients backward(const EmbeddingNet& net, const ForwardCache& cache, std::span<const double> grad_out,
                      Tensor* input_grad = nullptr);

struct CoupledModel {
    EmbeddingNet vis;
    EmbeddingNet pol;

    // Equal embedding dimensions, one visible input channel.
    void validate() const;

    friend bool operator==(const CoupledModel&, const CoupledModel&) = default;
};

// Vis tower from the seeded initializer, pol tower derived from it by
// expand_input_channels.
CoupledModel make_coupled_model(std::string_view architecture, GlobalPool pool, std::size_t pol_channels,
                                std::uint64_t seed);

// Both towers drawn independently from the initializer; nothing links the
// two embedding spaces.
CoupledModel make_independent_model(std::string_view architecture, GlobalPool pool, std::size_t pol_channels,
                                    std::uint64_t seed);

struct CoupledGradients {
    NetGradients vis;
    NetGradients pol;

    static CoupledGradients zeros_like(const CoupledModel& model);
    void add(const CoupledGradients& other, double scale = 1.0);
};

// SGD with classical momentum:
//   velocity = momentum * velocity - lr * grad;  param += velocity
// applied to trainable conv layers only.
class SgdMomentum {
public:
    SgdMomentum(double lr, double momentum);

    void step(CoupledModel& model, const CoupledGradients& grads);

    double lr() const noexcept { return lr_; }
    double momentum() const noexcept { return momentum_; }

private:
    void step_net(EmbeddingNet& net, const NetGradients& grads, NetGradients& velocity);

    double lr_;
    double momentum_;
    bool initialized_ = false;
    CoupledGradients velocity_;
};

}  // namespace xspec
