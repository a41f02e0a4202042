#include "xspec/polarimetry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xspec/error.hpp"

namespace xspec {

StokesConvention parse_stokes_convention(std::string_view name) {
    if (name == "difference") return StokesConvention::difference;
    if (name == "as_written") return StokesConvention::as_written;
    fail(ErrorKind::config, "unknown Stokes convention '" + std::string(name) + "'");
}

std::string_view to_string(StokesConvention convention) {
    return convention == StokesConvention::difference ? "difference" : "as_written";
}

namespace {

void check_channel(const Image& img, const Image& ref, std::string_view name) {
    require(img.same_shape(ref), ErrorKind::shape_mismatch,
            "intensity channel " + std::string(name) + " has shape " +
                std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                ", expected " + std::to_string(ref.height()) + "x" +
                std::to_string(ref.width()));
    for (double v : img.pixels()) {
        if (!(std::isfinite(v) && v >= 0.0)) {
            fail(ErrorKind::invalid_argument,
                 "intensity channel " + std::string(name) + " contains a negative or non-finite value");
        }
    }
}

}  // namespace

StokesImage stokes_from_intensities(const IntensityMeasurements& m, StokesConvention convention,
                                    double dolp_epsilon) {
    require(!m.i0.empty(), ErrorKind::invalid_argument, "intensity image is empty");
    require(m.i_right.has_value() == m.i_left.has_value(), ErrorKind::invalid_argument,
            "circular channels must be supplied as a pair");
    check_channel(m.i0, m.i0, "i0");
    check_channel(m.i90, m.i0, "i90");
    check_channel(m.i45, m.i0, "i45");
    check_channel(m.i_neg45, m.i0, "i_neg45");
    if (m.i_right) {
        check_channel(*m.i_right, m.i0, "i_right");
        check_channel(*m.i_left, m.i0, "i_left");
    }

    const std::size_t h = m.i0.height();
    const std::size_t w = m.i0.width();
    const double sign = convention == StokesConvention::difference ? -1.0 : 1.0;

    StokesImage s{Image(h, w), Image(h, w), Image(h, w), Image(h, w), Image()};
    auto i0 = m.i0.pixels();
    auto i90 = m.i90.pixels();
    auto i45 = m.i45.pixels();
    auto in45 = m.i_neg45.pixels();
    auto s0 = s.s0.pixels();
    auto s1 = s.s1.pixels();
    auto s2 = s.s2.pixels();
    for (std::size_t k = 0; k < i0.size(); ++k) {
        s0[k] = i0[k] + i90[k];
        s1[k] = i0[k] - i90[k];
        s2[k] = i45[k] + sign * in45[k];
    }
    if (m.i_right) {
        auto ir = m.i_right->pixels();
        auto il = m.i_left->pixels();
        auto s3 = s.s3.pixels();
        for (std::size_t k = 0; k < ir.size(); ++k) s3[k] = ir[k] + sign * il[k];
    }
    s.dolp = dolp(s, dolp_epsilon);
    return s;
}

Image dolp(const StokesImage& s, double epsilon) {
    require(epsilon > 0.0, ErrorKind::invalid_argument, "DoLP epsilon must be positive");
    require(s.s1.same_shape(s.s0) && s.s2.same_shape(s.s0), ErrorKind::shape_mismatch,
            "Stokes channels differ in shape");
    Image out(s.s0.height(), s.s0.width());
    auto s0 = s.s0.pixels();
    auto s1 = s.s1.pixels();
    auto s2 = s.s2.pixels();
    auto d = out.pixels();
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (!(s0[k] >= 0.0)) fail(ErrorKind::invalid_argument, "S0 must be non-negative");
        d[k] = std::sqrt(s1[k] * s1[k] + s2[k] * s2[k]) / std::max(s0[k], epsilon);
    }
    return out;
}

}  // namespace xspec
