#pragma once

#include <span>
#include <vector>

namespace xspec {

struct ContrastiveConfig {
    double margin = 1.0;
    double distance_epsilon = 1e-12;

    void validate() const;
};

// Euclidean distance between two embeddings of equal length.
double pair_distance(std::span<const double> z1, std::span<const double> z2);

// y_cont = 0 (genuine): D^2 / 2
// y_cont = 1 (impostor): max(0, m - D)^2 / 2
double contrastive_loss(std::span<const double> z1, std::span<const double> z2, int y_cont,
                        const ContrastiveConfig& cfg);

struct PairGradient {
    std::vector<double> z1;
    std::vector<double> z2;  // always -z1
};

// Impostor pairs closer than distance_epsilon get a zero subgradient.
PairGradient contrastive_grad(std::span<const double> z1, std::span<const double> z2, int y_cont,
                              const ContrastiveConfig& cfg);

struct EmbeddingPair {
    std::span<const double> z1;
    std::span<const double> z2;
    int y_cont = 0;
};

// Arithmetic mean of the per-pair contrastive loss.
double batch_loss(std::span<const EmbeddingPair> pairs, const ContrastiveConfig& cfg);

}  // namespace xspec
