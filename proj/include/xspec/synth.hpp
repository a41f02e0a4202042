#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "xspec/dataset.hpp"
#include "xspec/labels.hpp"
#include "xspec/polarimetry.hpp"

namespace xspec {

enum class CrossModalMap {
    identity,        // polarimetric capture is unpolarized with S0 equal to the visible image
    linear_mix,      // fixed invertible linear mixing of the identity layers
    nonlinear_warp,  // saturating mixing plus a fixed geometric distortion
};

CrossModalMap parse_cross_modal_map(std::string_view name);
std::string_view to_string(CrossModalMap m);

struct SynthConfig {
    std::size_t n_subjects = 60;
    // Baseline images per range; expression images are three times as many.
    std::size_t images_per_condition = 4;
    std::size_t image_size = 64;
    std::vector<RangeId> ranges{RangeId::R1, RangeId::R2, RangeId::R3};
    std::vector<double> blur_per_range{0.5, 1.0, 1.5};  // Gaussian sigma, pixels
    double noise_std = 0.01;  // at R1
    // Noise at range Rk is noise_std * (1 + noise_growth * (k - 1)).
    double noise_growth = 0.5;
    CrossModalMap cross_modal_map = CrossModalMap::linear_mix;
    std::uint64_t seed = 0;
    double jitter_px = 1.0;           // per-capture translation bound
    double expression_warp_px = 1.5;  // amplitude of the expression displacement field
    double thermal_clutter = 0.6;     // weight of non-identity texture in S0

    void validate() const;
    std::size_t expression_images() const { return 3 * images_per_condition; }
    double noise_at(RangeId r) const { return noise_std * (1.0 + noise_growth * static_cast<int>(r)); }
};

// Subject ids are "s000", "s001", ... Images are ordered by subject,
// modality (visible first), range, condition, index.
RawDataset generate_dataset(const SynthConfig& cfg);

// Uniform intensities whose difference-convention Stokes vector has total
// intensity s0, degree of linear polarization dolp_target and angle aop.
IntensityMeasurements generate_polarized_intensities(double dolp_target, double aop, double s0,
                                                     std::size_t height, std::size_t width);

}  // namespace xspec
