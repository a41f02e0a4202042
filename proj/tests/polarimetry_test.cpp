#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "xspec/error.hpp"
#include "xspec/polarimetry.hpp"
#include "xspec/synth.hpp"

using namespace xspec;
using xspec::testing::random_image;

namespace {

IntensityMeasurements uniform(double i0, double i90, double i45, double in45) {
    return {Image(2, 3, i0), Image(2, 3, i90), Image(2, 3, i45), Image(2, 3, in45), std::nullopt, std::nullopt};
}

}  // namespace

TEST(Stokes, DifferenceConvention) {
    const StokesImage s = stokes_from_intensities(uniform(0.7, 0.3, 0.6, 0.4));
    EXPECT_DOUBLE_EQ(s.s0(1, 2), 1.0);
    EXPECT_DOUBLE_EQ(s.s1(1, 2), 0.7 - 0.3);
    EXPECT_DOUBLE_EQ(s.s2(1, 2), 0.6 - 0.4);
    EXPECT_EQ(s.s3, Image(2, 3, 0.0));
}

TEST(Stokes, AsWrittenConvention) {
    IntensityMeasurements m = uniform(0.7, 0.3, 0.6, 0.4);
    m.i_right = Image(2, 3, 0.25);
    m.i_left = Image(2, 3, 0.5);
    const StokesImage s = stokes_from_intensities(m, StokesConvention::as_written);
    EXPECT_DOUBLE_EQ(s.s2(0, 0), 0.6 + 0.4);
    EXPECT_DOUBLE_EQ(s.s3(0, 0), 0.75);
    const StokesImage d = stokes_from_intensities(m, StokesConvention::difference);
    EXPECT_DOUBLE_EQ(d.s3(0, 0), -0.25);
}

TEST(Stokes, ConventionNames) {
    EXPECT_EQ(parse_stokes_convention("as_written"), StokesConvention::as_written);
    EXPECT_EQ(to_string(StokesConvention::difference), "difference");
    EXPECT_THROW(parse_stokes_convention("sum"), Error);
}

TEST(Stokes, RejectsBadInput) {
    IntensityMeasurements m = uniform(0.5, 0.5, 0.5, 0.5);
    m.i45 = Image(3, 3, 0.5);
    try {
        stokes_from_intensities(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::shape_mismatch);
    }

    m = uniform(0.5, -0.1, 0.5, 0.5);
    try {
        stokes_from_intensities(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    }

    m = uniform(0.5, 0.5, 0.5, 0.5);
    m.i_right = Image(2, 3, 0.1);
    EXPECT_THROW(stokes_from_intensities(m), Error);

    m = uniform(0.5, NAN, 0.5, 0.5);
    EXPECT_THROW(stokes_from_intensities(m), Error);
}

TEST(Dolp, UnpolarizedIsZero) {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const double v = rng.uniform(0.01, 5.0);
        const StokesImage s = stokes_from_intensities(uniform(v, v, v, v));
        for (double d : s.dolp.pixels()) EXPECT_EQ(d, 0.0);
    }
}

TEST(Dolp, ScaleInvariant) {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        IntensityMeasurements m{random_image(4, 4, rng, 0.1, 1.0), random_image(4, 4, rng, 0.1, 1.0),
                                random_image(4, 4, rng, 0.1, 1.0), random_image(4, 4, rng, 0.1, 1.0),
                                std::nullopt, std::nullopt};
        const double k = rng.uniform(0.01, 100.0);
        IntensityMeasurements scaled = m;
        for (Image* img : {&scaled.i0, &scaled.i90, &scaled.i45, &scaled.i_neg45}) {
            for (double& v : img->pixels()) v *= k;
        }
        const Image a = stokes_from_intensities(m).dolp;
        const Image b = stokes_from_intensities(scaled).dolp;
        for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(a.pixels()[p], b.pixels()[p], 1e-12);
    }
}

TEST(Dolp, EpsilonGuardsZeroIntensity) {
    const StokesImage s = stokes_from_intensities(uniform(0.0, 0.0, 0.0, 0.0));
    for (double d : s.dolp.pixels()) EXPECT_EQ(d, 0.0);
    StokesImage manual{Image(1, 1, 0.0), Image(1, 1, 1e-13), Image(1, 1, 0.0), Image(1, 1, 0.0), Image()};
    EXPECT_DOUBLE_EQ(dolp(manual, 1e-12)(0, 0), 0.1);
}

TEST(Dolp, MatchesDirectFormula) {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const double i0 = rng.uniform(0, 1), i90 = rng.uniform(0, 1), i45 = rng.uniform(0, 1),
                     in45 = rng.uniform(0, 1);
        const StokesImage s = stokes_from_intensities(uniform(i0, i90, i45, in45));
        const double expect = std::hypot(i0 - i90, i45 - in45) / (i0 + i90);
        EXPECT_NEAR(s.dolp(0, 0), expect, 1e-14);
    }
}

TEST(GeneratePolarized, Unpolarized) {
    const IntensityMeasurements m = generate_polarized_intensities(0.0, 0.3, 2.0, 2, 2);
    for (const Image* img : {&m.i0, &m.i90, &m.i45, &m.i_neg45}) EXPECT_EQ(*img, Image(2, 2, 1.0));
}

TEST(GeneratePolarized, FullyPolarizedHorizontal) {
    const IntensityMeasurements m = generate_polarized_intensities(1.0, 0.0, 3.0, 1, 1);
    EXPECT_DOUBLE_EQ(m.i0(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(m.i90(0, 0), 0.0);
    const StokesImage s = stokes_from_intensities(m);
    EXPECT_NEAR(s.dolp(0, 0), 1.0, 1e-12);
}

TEST(GeneratePolarized, RoundTrip) {
    Rng rng(99);
    for (int i = 0; i < 100; ++i) {
        const double d = rng.uniform();
        const double aop = rng.uniform(0.0, std::numbers::pi);
        const double s0 = rng.uniform(0.01, 10.0);
        const StokesImage s = stokes_from_intensities(generate_polarized_intensities(d, aop, s0, 2, 2));
        EXPECT_NEAR(s.dolp(1, 1), d, 1e-10);
        EXPECT_NEAR(s.s0(0, 1), s0, 1e-12 * s0);
    }
}

TEST(GeneratePolarized, RejectsOutOfRange) {
    EXPECT_THROW(generate_polarized_intensities(1.5, 0.0, 1.0, 1, 1), Error);
    EXPECT_THROW(generate_polarized_intensities(-0.1, 0.0, 1.0, 1, 1), Error);
    EXPECT_THROW(generate_polarized_intensities(0.5, 0.0, 0.0, 1, 1), Error);
}
