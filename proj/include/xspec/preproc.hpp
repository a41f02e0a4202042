#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "xspec/image.hpp"

namespace xspec {

struct DoGConfig {
    double sigma0 = 1.0;
    double sigma1 = 2.0;
    int radius = 6;

    // sigma0 < sigma1, both positive, radius >= ceil(3 * sigma1).
    void validate() const;
};

struct PatchGrid {
    std::size_t patch_size = 40;
    std::size_t stride = 10;

    void validate() const;
};

enum class PatchNormalization { none, zero_mean_unit_var };

PatchNormalization parse_patch_normalization(std::string_view name);
std::string_view to_string(PatchNormalization n);

// Sampled isotropic Gaussian of side 2*radius+1, renormalized to unit sum.
Image gaussian_kernel(double sigma, int radius);

// G(sigma0) - G(sigma1), each normalized before the subtraction.
Image dog_kernel(const DoGConfig& cfg);

// Same-shape band-pass response of img with reflect padding at the borders.
Image dog_filter(const Image& img, const DoGConfig& cfg);

// Index into [0, n) after mirroring (edge sample not repeated) as many
// times as needed.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

struct PatchAt {
    std::size_t row = 0;
    std::size_t col = 0;
    Image patch;
};

// Number of positions along one axis: floor((n - P) / S) + 1.
std::size_t patch_positions(std::size_t extent, const PatchGrid& grid);

// Square patches at (r*stride, c*stride), row-major. Trailing rows and
// columns the stride cannot reach are dropped.
std::vector<PatchAt> extract_patches(const Image& img, const PatchGrid& grid);

// A multi-channel patch stored H x W x C, channels interleaved.
struct StackedPatch {
    std::size_t row = 0;
    std::size_t col = 0;
    Tensor patch;
};

std::vector<StackedPatch> preprocess_stack(std::span<const Image> channels, const DoGConfig& cfg,
                                           const PatchGrid& grid,
                                           PatchNormalization normalize = PatchNormalization::none);

}  // namespace xspec
