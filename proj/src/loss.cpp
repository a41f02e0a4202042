#include "xspec/loss.hpp"

#include <cmath>
#include <string>

#include "xspec/error.hpp"

namespace xspec {

void ContrastiveConfig::validate() const {
    require(margin > 0.0 && std::isfinite(margin), ErrorKind::config, "contrastive margin must be positive");
    require(distance_epsilon > 0.0, ErrorKind::config, "distance epsilon must be positive");
}

namespace {

void check_pair(std::span<const double> z1, std::span<const double> z2, int y_cont) {
    if (z1.size() != z2.size()) {
        fail(ErrorKind::shape_mismatch,
             "embedding dimensions differ: " + std::to_string(z1.size()) + " vs " + std::to_string(z2.size()));
    }
    if (y_cont != 0 && y_cont != 1) fail(ErrorKind::invalid_argument, "y_cont must be 0 or 1");
}

}  // namespace

double pair_distance(std::span<const double> z1, std::span<const double> z2) {
    if (z1.size() != z2.size()) {
        fail(ErrorKind::shape_mismatch,
             "embedding dimensions differ: " + std::to_string(z1.size()) + " vs " + std::to_string(z2.size()));
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < z1.size(); ++k) {
        const double d = z1[k] - z2[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double contrastive_loss(std::span<const double> z1, std::span<const double> z2, int y_cont,
                        const ContrastiveConfig& cfg) {
    check_pair(z1, z2, y_cont);
    const double d = pair_distance(z1, z2);
    if (y_cont == 0) return 0.5 * d * d;
    const double hinge = cfg.margin - d;
    return hinge > 0.0 ? 0.5 * hinge * hinge : 0.0;
}

PairGradient contrastive_grad(std::span<const double> z1, std::span<const double> z2, int y_cont,
                              const ContrastiveConfig& cfg) {
    check_pair(z1, z2, y_cont);
    PairGradient g{std::vector<double>(z1.size(), 0.0), std::vector<double>(z1.size(), 0.0)};
    double coeff = 1.0;
    if (y_cont == 1) {
        const double d = pair_distance(z1, z2);
        if (d >= cfg.margin || d < cfg.distance_epsilon) return g;
        coeff = -(cfg.margin - d) / d;
    }
    for (std::size_t k = 0; k < z1.size(); ++k) {
        g.z1[k] = coeff * (z1[k] - z2[k]);
        g.z2[k] = -g.z1[k];
    }
    return g;
}

double batch_loss(std::span<const EmbeddingPair> pairs, const ContrastiveConfig& cfg) {
    require(!pairs.empty(), ErrorKind::invalid_argument, "batch_loss on an empty batch");
    double acc = 0.0;
    for (const EmbeddingPair& p : pairs) acc += contrastive_loss(p.z1, p.z2, p.y_cont, cfg);
    return acc / static_cast<double>(pairs.size());
}

}  // namespace xspec
