#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

#include "xspec/error.hpp"
#include "xspec/polarimetry.hpp"
#include "xspec/synth.hpp"

using namespace xspec;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.n_subjects = 4;
    c.images_per_condition = 1;
    c.image_size = 24;
    c.seed = 9;
    return c;
}

double corr(const Image& a, const Image& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a.data()[i], mb += b.data()[i];
    ma /= a.size();
    mb /= b.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.data()[i] - ma, y = b.data()[i] - mb;
        sab += x * y, saa += x * x, sbb += y * y;
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Synth, CountsShapesAndRange) {
    const SynthConfig c = small_config();
    const RawDataset ds = generate_dataset(c);
    // per subject: 2 modalities x 3 ranges x (1 baseline + 3 expression)
    ASSERT_EQ(ds.images.size(), 4u * 2u * 3u * 4u);
    std::set<std::string> subjects;
    for (const auto& img : ds.images) {
        subjects.insert(img.subject_id);
        ASSERT_EQ(img.channels.size(), img.modality == Modality::visible ? 1u : 4u);
        for (const auto& ch : img.channels) {
            ASSERT_EQ(ch.height(), 24u);
            ASSERT_EQ(ch.width(), 24u);
            for (double v : ch.pixels()) {
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
            }
        }
    }
    EXPECT_EQ(subjects, (std::set<std::string>{"s000", "s001", "s002", "s003"}));
    EXPECT_EQ(ds.images.front().modality, Modality::visible);
}

TEST(Synth, DeterministicAndSeedSensitive) {
    SynthConfig c = small_config();
    const RawDataset a = generate_dataset(c);
    const RawDataset b = generate_dataset(c);
    ASSERT_EQ(a.images.size(), b.images.size());
    for (std::size_t i = 0; i < a.images.size(); ++i) EXPECT_EQ(a.images[i].channels, b.images[i].channels);
    c.seed = 10;
    EXPECT_NE(generate_dataset(c).images[0].channels, a.images[0].channels);
}

TEST(Synth, ThreadCountInvariant) {
    const SynthConfig c = small_config();
    setenv("XSPEC_THREADS", "1", 1);
    const RawDataset one = generate_dataset(c);
    setenv("XSPEC_THREADS", "3", 1);
    const RawDataset three = generate_dataset(c);
    unsetenv("XSPEC_THREADS");
    for (std::size_t i = 0; i < one.images.size(); ++i) EXPECT_EQ(one.images[i].channels, three.images[i].channels);
}

TEST(Synth, SubjectsDoNotDependOnPopulationSize) {
    SynthConfig c = small_config();
    const RawDataset small = generate_dataset(c);
    c.n_subjects = 6;
    const RawDataset large = generate_dataset(c);
    EXPECT_EQ(small.images[0].channels, large.images[0].channels);
}

TEST(Synth, CapturesCarryIdentity) {
    SynthConfig c = small_config();
    c.noise_std = 0.0;
    const RawDataset ds = generate_dataset(c);
    auto find = [&](const std::string& sid, RangeId r, Condition cond) -> const RawImage& {
        for (const auto& img : ds.images) {
            if (img.subject_id == sid && img.modality == Modality::visible && img.range == r && img.condition == cond)
                return img;
        }
        throw std::runtime_error("missing");
    };
    const Image& a1 = find("s000", RangeId::R1, Condition::baseline).channel("gray");
    const Image& a2 = find("s000", RangeId::R1, Condition::expression).channel("gray");
    const Image& b1 = find("s001", RangeId::R1, Condition::baseline).channel("gray");
    EXPECT_GT(corr(a1, a2), corr(a1, b1));
}

TEST(Synth, DolpBoundedAndIdentityUnpolarized) {
    SynthConfig c = small_config();
    c.noise_std = 0.0;
    for (const auto map : {CrossModalMap::linear_mix, CrossModalMap::nonlinear_warp, CrossModalMap::identity}) {
        c.cross_modal_map = map;
        for (const auto& img : generate_dataset(c).images) {
            if (img.modality != Modality::polarimetric) continue;
            const StokesImage s = stokes_from_intensities(intensities_of(img));
            for (std::size_t i = 0; i < s.dolp.size(); ++i) {
                if (map == CrossModalMap::identity) {
                    ASSERT_NEAR(s.s1.data()[i], 0.0, 1e-12);
                    ASSERT_NEAR(s.s2.data()[i], 0.0, 1e-12);
                } else {
                    ASSERT_LE(s.dolp.data()[i], 0.9 + 1e-9);
                }
            }
        }
    }
}

TEST(Synth, ValidateRejectsBadConfig) {
    SynthConfig c = small_config();
    c.validate();
    c.n_subjects = 0;
    EXPECT_THROW(generate_dataset(c), Error);
    c = small_config();
    c.blur_per_range = {1.0, 1.0, 2.0};
    EXPECT_THROW(c.validate(), Error);
    c = small_config();
    c.blur_per_range = {0.5, 1.0};
    EXPECT_THROW(c.validate(), Error);
    c = small_config();
    c.noise_std = -1;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_THROW(parse_cross_modal_map("bogus"), Error);
    EXPECT_EQ(parse_cross_modal_map(to_string(CrossModalMap::nonlinear_warp)), CrossModalMap::nonlinear_warp);
}

TEST(PolarizedIntensities, RecoverTargets) {
    for (double p : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        for (double aop : {0.0, 0.3, -0.7, std::numbers::pi / 2 - 0.01}) {
            const IntensityMeasurements m = generate_polarized_intensities(p, aop, 2.0, 3, 4);
            const StokesImage s = stokes_from_intensities(m);
            for (std::size_t i = 0; i < s.s0.size(); ++i) {
                EXPECT_NEAR(s.s0.data()[i], 2.0, 1e-12);
                EXPECT_NEAR(s.dolp.data()[i], p, 1e-12);
                if (p > 0) EXPECT_NEAR(0.5 * std::atan2(s.s2.data()[i], s.s1.data()[i]), aop, 1e-12);
            }
        }
    }
    EXPECT_THROW(generate_polarized_intensities(1.5, 0, 1, 2, 2), Error);
    EXPECT_THROW(generate_polarized_intensities(0.5, 0, -1, 2, 2), Error);
}

TEST(Synth, IdentityMapWithoutNoiseCopiesVisibleIntoS0) {
    SynthConfig c = small_config();
    c.noise_std = 0.0;
    c.cross_modal_map = CrossModalMap::identity;
    const RawDataset ds = generate_dataset(c);
    const std::size_t half = ds.images.size() / 2;
    std::size_t compared = 0;
    for (const auto& vis : ds.images) {
        if (vis.modality != Modality::visible) continue;
        for (std::size_t j = 0; j < ds.images.size(); ++j) {
            const RawImage& pol = ds.images[j];
            if (pol.modality != Modality::polarimetric || pol.subject_id != vis.subject_id || pol.range != vis.range ||
                pol.condition != vis.condition || pol.index != vis.index)
                continue;
            const StokesImage s = stokes_from_intensities(intensities_of(pol));
            for (std::size_t k = 0; k < s.s0.size(); ++k)
                ASSERT_NEAR(s.s0.data()[k], vis.channel("gray").data()[k], 1e-12);
            ++compared;
        }
    }
    EXPECT_EQ(compared, half);
}

TEST(Synth, NoiseGrowsWithRange) {
    SynthConfig c;
    c.noise_std = 0.01;
    c.noise_growth = 0.5;
    EXPECT_DOUBLE_EQ(c.noise_at(RangeId::R1), 0.01);
    EXPECT_DOUBLE_EQ(c.noise_at(RangeId::R2), 0.015);
    EXPECT_DOUBLE_EQ(c.noise_at(RangeId::R3), 0.02);
    c.noise_growth = -1;
    EXPECT_THROW(c.validate(), Error);
}

// Fixed linear probe: correlate each polarimetric S0 image with every
// subject's visible image at the same capture and pick the best. With
// linear_mix and low noise this beats chance by a wide margin.
TEST(Synth, LinearProbeBeatsChance) {
    SynthConfig c;
    c.n_subjects = 20;
    c.images_per_condition = 1;
    c.image_size = 32;
    c.noise_std = 0.005;
    c.seed = 21;
    const RawDataset ds = generate_dataset(c);
    std::vector<const RawImage*> vis, pol;
    for (const auto& img : ds.images) {
        if (img.range != RangeId::R1 || img.condition != Condition::baseline) continue;
        (img.modality == Modality::visible ? vis : pol).push_back(&img);
    }
    ASSERT_EQ(vis.size(), 20u);
    ASSERT_EQ(pol.size(), 20u);
    std::size_t hits = 0;
    for (const RawImage* p : pol) {
        const Image s0 = stokes_from_intensities(intensities_of(*p)).s0;
        const RawImage* best = nullptr;
        double best_r = -2;
        for (const RawImage* v : vis) {
            const double r = corr(s0, v->channel("gray"));
            if (r > best_r) best_r = r, best = v;
        }
        hits += best->subject_id == p->subject_id;
    }
    // chance is 1 of 20
    EXPECT_GE(hits, 5u);
}
