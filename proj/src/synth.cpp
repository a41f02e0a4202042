#include "xspec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "xspec/error.hpp"
#include "xspec/parallel.hpp"
#include "xspec/preproc.hpp"
#include "xspec/rng.hpp"

namespace xspec {

CrossModalMap parse_cross_modal_map(std::string_view name) {
    if (name == "identity") return CrossModalMap::identity;
    if (name == "linear_mix") return CrossModalMap::linear_mix;
    if (name == "nonlinear_warp") return CrossModalMap::nonlinear_warp;
    fail(ErrorKind::config, "unknown cross_modal_map '" + std::string(name) + "'");
}

std::string_view to_string(CrossModalMap m) {
    switch (m) {
        case CrossModalMap::identity: return "identity";
        case CrossModalMap::linear_mix: return "linear_mix";
        case CrossModalMap::nonlinear_warp: return "nonlinear_warp";
    }
    return "?";
}

void SynthConfig::validate() const {
    require(n_subjects >= 1, ErrorKind::config, "n_subjects must be positive");
    require(n_subjects <= 100000, ErrorKind::config, "n_subjects too large");
    require(images_per_condition >= 1, ErrorKind::config, "images_per_condition must be positive");
    require(image_size >= 4, ErrorKind::config, "image_size must be at least 4");
    require(!ranges.empty(), ErrorKind::config, "at least one range is required");
    require(blur_per_range.size() == ranges.size(), ErrorKind::config,
            "blur_per_range needs one entry per range");
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        require(blur_per_range[i] >= 0.0 && std::isfinite(blur_per_range[i]), ErrorKind::config,
                "blur must be finite and non-negative");
        if (i > 0) {
            require(static_cast<int>(ranges[i]) > static_cast<int>(ranges[i - 1]), ErrorKind::config,
                    "ranges must be listed in increasing order");
            require(blur_per_range[i] > blur_per_range[i - 1], ErrorKind::config,
                    "blur must strictly increase with range");
        }
    }
    require(noise_std >= 0.0 && std::isfinite(noise_std), ErrorKind::config, "noise_std must be non-negative");
    require(noise_growth >= 0.0 && std::isfinite(noise_growth), ErrorKind::config,
            "noise_growth must be non-negative");
    require(jitter_px >= 0.0 && expression_warp_px >= 0.0 && thermal_clutter >= 0.0, ErrorKind::config,
            "jitter, warp and clutter must be non-negative");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kWavesPerLayer = 4;
constexpr double kMinFrequency = 0.06;  // cycles per pixel, inside the default DoG pass band
constexpr double kMaxFrequency = 0.22;

// Band-limited random field: a normalized sum of oriented plane waves.
struct WaveField {
    struct Wave {
        double kx, ky, phase, amplitude;
    };
    std::vector<Wave> waves;
    double norm = 1.0;

    static WaveField random(Rng& rng, double f_lo, double f_hi) {
        WaveField f;
        double power = 0.0;
        for (int j = 0; j < kWavesPerLayer; ++j) {
            const double theta = rng.uniform(0.0, std::numbers::pi);
            const double freq = rng.uniform(f_lo, f_hi);
            const double phase = rng.uniform(0.0, kTwoPi);
            const double amp = rng.uniform(0.5, 1.0);
            f.waves.push_back({kTwoPi * freq * std::cos(theta), kTwoPi * freq * std::sin(theta), phase, amp});
            power += 0.5 * amp * amp;
        }
        f.norm = 1.0 / std::sqrt(power);
        return f;
    }

    double operator()(double x, double y) const {
        double acc = 0.0;
        for (const Wave& w : waves) acc += w.amplitude * std::cos(w.kx * x + w.ky * y + w.phase);
        return acc * norm;
    }
};

// Latent identity: three layers shared by both modalities plus a
// visible-only detail layer.
struct Identity {
    WaveField shared[3];
    WaveField detail;
};

// Per-capture geometry: translation plus an optional smooth displacement.
struct CaptureGeometry {
    double tx = 0.0, ty = 0.0;
    double amp = 0.0;
    double ux = 0.0, uy = 0.0, uphase = 0.0;  // displacement wave for x
    double vx = 0.0, vy = 0.0, vphase = 0.0;  // displacement wave for y

    std::pair<double, double> map(double x, double y) const {
        double dx = tx, dy = ty;
        if (amp > 0.0) {
            dx += amp * std::sin(ux * x + uy * y + uphase);
            dy += amp * std::sin(vx * x + vy * y + vphase);
        }
        return {x + dx, y + dy};
    }
};

CaptureGeometry random_geometry(Rng& rng, const SynthConfig& cfg, Condition condition) {
    CaptureGeometry g;
    g.tx = rng.uniform(-cfg.jitter_px, cfg.jitter_px);
    g.ty = rng.uniform(-cfg.jitter_px, cfg.jitter_px);
    if (condition == Condition::expression) {
        const double size = static_cast<double>(cfg.image_size);
        g.amp = cfg.expression_warp_px;
        auto wave = [&](double& kx, double& ky, double& ph) {
            const double dir = rng.uniform(0.0, kTwoPi);
            const double wavelength = rng.uniform(0.5 * size, size);
            kx = kTwoPi / wavelength * std::cos(dir);
            ky = kTwoPi / wavelength * std::sin(dir);
            ph = rng.uniform(0.0, kTwoPi);
        };
        wave(g.ux, g.uy, g.uphase);
        wave(g.vx, g.vy, g.vphase);
    }
    return g;
}

// Fixed distortion of the polarimetric optics under nonlinear_warp.
std::pair<double, double> pol_distortion(double x, double y, double size) {
    return {x + 1.5 * std::sin(kTwoPi * y / (0.9 * size)), y + 1.5 * std::sin(kTwoPi * x / (1.1 * size))};
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    const Image k2 = gaussian_kernel(sigma, radius);
    // Row of the normalized 2-D kernel through the center, renormalized, is the 1-D kernel.
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = 0; i <= 2 * radius; ++i) sum += (k[i] = k2(radius, i));
    for (double& v : k) v /= sum;
    const std::size_t h = img.height(), w = img.width();
    Image tmp(h, w), out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                acc += k[d + radius] * img(r, reflect_index(static_cast<std::ptrdiff_t>(c) + d, w));
            }
            tmp(r, c) = acc;
        }
    }
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                acc += k[d + radius] * tmp(reflect_index(static_cast<std::ptrdiff_t>(r) + d, h), c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

std::string subject_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%03zu", i);
    return buf;
}

struct CaptureKey {
    RangeId range;
    Condition condition;
    int index;
};

std::vector<RawImage> render_subject(const SynthConfig& cfg, std::size_t subject) {
    const std::string sid = subject_name(subject);
    const std::uint64_t subject_seed = derive_seed(cfg.seed, "subject:" + sid);
    Rng id_rng(subject_seed);
    Identity id;
    for (auto& layer : id.shared) layer = WaveField::random(id_rng, kMinFrequency, kMaxFrequency);
    id.detail = WaveField::random(id_rng, kMinFrequency, kMaxFrequency);

    std::vector<CaptureKey> captures;
    for (RangeId r : cfg.ranges) {
        for (int i = 0; i < static_cast<int>(cfg.images_per_condition); ++i) captures.push_back({r, Condition::baseline, i});
        for (int i = 0; i < static_cast<int>(cfg.expression_images()); ++i) captures.push_back({r, Condition::expression, i});
    }

    const std::size_t n = cfg.image_size;
    const double size = static_cast<double>(n);
    std::vector<RawImage> visible, polar;
    for (const CaptureKey& key : captures) {
        std::string tag = sid + "/" + std::string(to_string(key.range)) + "/" +
                          std::string(to_string(key.condition)) + "/" + std::to_string(key.index);
        Rng rng(derive_seed(cfg.seed, "capture:" + tag));
        const CaptureGeometry geo = random_geometry(rng, cfg, key.condition);
        const WaveField clutter = WaveField::random(rng, kMinFrequency, kMaxFrequency);
        const std::size_t range_slot = static_cast<std::size_t>(
            std::find(cfg.ranges.begin(), cfg.ranges.end(), key.range) - cfg.ranges.begin());
        const double blur = cfg.blur_per_range[range_slot];

        Image vis(n, n), s0(n, n), s1(n, n), s2(n, n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                auto [x, y] = geo.map(static_cast<double>(c), static_cast<double>(r));
                const double l1 = id.shared[0](x, y), l2 = id.shared[1](x, y), l3 = id.shared[2](x, y);
                vis(r, c) = 0.5 + 0.1 * (l1 + l2 + l3 + 0.5 * id.detail(x, y));
                switch (cfg.cross_modal_map) {
                    case CrossModalMap::identity:
                        break;
                    case CrossModalMap::linear_mix: {
                        const double a0 = 0.8 * l1 + 0.3 * l2 + 0.3 * l3 + cfg.thermal_clutter * clutter(x, y);
                        s0(r, c) = 0.5 + 0.08 * a0;
                        s1(r, c) = 0.03 * (0.2 * l1 + l2);
                        s2(r, c) = 0.03 * (0.2 * l1 + l3);
                        break;
                    }
                    case CrossModalMap::nonlinear_warp: {
                        auto [px, py] = pol_distortion(x, y, size);
                        const double m1 = id.shared[0](px, py), m2 = id.shared[1](px, py), m3 = id.shared[2](px, py);
                        const double a0 = 0.8 * m1 + 0.3 * m2 + 0.3 * m3 + cfg.thermal_clutter * clutter(px, py);
                        s0(r, c) = 0.5 + 0.25 * std::tanh(0.35 * a0);
                        s1(r, c) = 0.06 * std::tanh(0.5 * (0.2 * m1 + m2));
                        s2(r, c) = 0.06 * std::tanh(0.5 * (0.2 * m1 + m3));
                        break;
                    }
                }
            }
        }
        vis = gaussian_blur(vis, blur);
        if (cfg.cross_modal_map == CrossModalMap::identity) {
            s0 = vis;
        } else {
            s0 = gaussian_blur(s0, blur);
            s1 = gaussian_blur(s1, blur);
            s2 = gaussian_blur(s2, blur);
        }

        Image i0(n, n), i90(n, n), i45(n, n), in45(n, n);
        for (std::size_t k = 0; k < n * n; ++k) {
            double t = std::max(s0.pixels()[k], 0.02);
            double q = s1.pixels()[k], u = s2.pixels()[k];
            const double lin = std::sqrt(q * q + u * u);
            if (lin > 0.9 * t) {
                q *= 0.9 * t / lin;
                u *= 0.9 * t / lin;
            }
            if (cfg.cross_modal_map == CrossModalMap::identity) t = s0.pixels()[k];
            i0.pixels()[k] = 0.5 * (t + q);
            i90.pixels()[k] = 0.5 * (t - q);
            i45.pixels()[k] = 0.5 * (t + u);
            in45.pixels()[k] = 0.5 * (t - u);
        }

        const double noise = cfg.noise_at(key.range);
        auto add_noise = [&](Image& img) {
            for (double& v : img.pixels()) {
                if (noise > 0.0) v += rng.normal(0.0, noise);
                v = std::clamp(v, 0.0, 1.0);
            }
        };
        add_noise(vis);
        for (Image* ch : {&i0, &i90, &i45, &in45}) add_noise(*ch);

        visible.push_back({sid, Modality::visible, key.range, key.condition, key.index, {"gray"}, {std::move(vis)}});
        polar.push_back({sid, Modality::polarimetric, key.range, key.condition, key.index,
                         {"i0", "i90", "i45", "i-45"},
                         {std::move(i0), std::move(i90), std::move(i45), std::move(in45)}});
    }

    std::vector<RawImage> out = std::move(visible);
    for (auto& img : polar) out.push_back(std::move(img));
    return out;
}

}  // namespace

RawDataset generate_dataset(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<RawImage>> per_subject(cfg.n_subjects);
    parallel_for(cfg.n_subjects, [&](std::size_t s) { per_subject[s] = render_subject(cfg, s); });
    RawDataset ds;
    for (auto& imgs : per_subject) {
        for (auto& img : imgs) ds.images.push_back(std::move(img));
    }
    return ds;
}

IntensityMeasurements generate_polarized_intensities(double dolp_target, double aop, double s0,
                                                     std::size_t height, std::size_t width) {
    require(dolp_target >= 0.0 && dolp_target <= 1.0, ErrorKind::invalid_argument, "DoLP must lie in [0, 1]");
    require(s0 > 0.0 && std::isfinite(s0), ErrorKind::invalid_argument, "S0 must be positive");
    require(std::isfinite(aop), ErrorKind::invalid_argument, "angle of polarization must be finite");
    const double s1 = s0 * dolp_target * std::cos(2.0 * aop);
    const double s2 = s0 * dolp_target * std::sin(2.0 * aop);
    // Clamp tiny negative rounding residue at full polarization.
    auto half = [](double a, double b) { return std::max(0.0, 0.5 * (a + b)); };
    return IntensityMeasurements{Image(height, width, half(s0, s1)), Image(height, width, half(s0, -s1)),
                                 Image(height, width, half(s0, s2)), Image(height, width, half(s0, -s2)),
                                 std::nullopt, std::nullopt};
}

}  // namespace xspec
