#pragma once

#include <optional>
#include <string_view>

#include "xspec/image.hpp"

namespace xspec {

/// Polarizer-filtered intensity images. Linear channels are mandatory;
/// circular channels are optional and must be supplied together.
struct IntensityMeasurements {
    Image i0;
    Image i90;
    Image i45;
    Image i_neg45;
    std::optional<Image> i_right;
    std::optional<Image> i_left;
};

/// Stokes-parameter images plus the derived degree of linear polarization.
struct StokesImage {
    Image s0;
    Image s1;
    Image s2;
    Image s3;  // zero unless circular channels were measured
    Image dolp;
};

/// How S2 and S3 combine their filter pair.
///   difference: S2 = I45 - I-45, S3 = IR - IL (physical Stokes definition)
///   as_written: S2 = I45 + I-45, S3 = IR + IL
enum class StokesConvention { difference, as_written };

StokesConvention parse_stokes_convention(std::string_view name);
std::string_view to_string(StokesConvention convention);

inline constexpr double kDefaultDolpEpsilon = 1e-12;

/// Validates shapes and values, then forms S0..S3 and DoLP pixelwise.
/// Throws Error(shape_mismatch) on differing channel shapes and
/// Error(invalid_argument) on negative or non-finite intensities.
StokesImage stokes_from_intensities(const IntensityMeasurements& m,
                                    StokesConvention convention = StokesConvention::difference,
                                    double dolp_epsilon = kDefaultDolpEpsilon);

/// sqrt(S1^2 + S2^2) / max(S0, epsilon), pixelwise.
Image dolp(const StokesImage& s, double epsilon = kDefaultDolpEpsilon);

}  // namespace xspec
