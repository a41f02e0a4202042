#include "xspec/preproc.hpp"

#include <cmath>
#include <string>

#include "xspec/error.hpp"

namespace xspec {

void DoGConfig::validate() const {
    require(sigma0 > 0.0 && sigma1 > 0.0, ErrorKind::config, "DoG sigmas must be positive");
    require(sigma0 < sigma1, ErrorKind::config, "DoG requires sigma0 < sigma1");
    require(radius >= 1 && radius >= static_cast<int>(std::ceil(3.0 * sigma1)), ErrorKind::config,
            "DoG radius must be at least ceil(3*sigma1) = " +
                std::to_string(static_cast<int>(std::ceil(3.0 * sigma1))));
}

void PatchGrid::validate() const {
    require(patch_size > 0 && stride > 0, ErrorKind::config, "patch size and stride must be positive");
}

PatchNormalization parse_patch_normalization(std::string_view name) {
    if (name == "none") return PatchNormalization::none;
    if (name == "zero_mean_unit_var") return PatchNormalization::zero_mean_unit_var;
    fail(ErrorKind::config, "unknown patch normalization '" + std::string(name) + "'");
}

std::string_view to_string(PatchNormalization n) {
    return n == PatchNormalization::none ? "none" : "zero_mean_unit_var";
}

namespace {

std::vector<double> gaussian_1d(double sigma, int radius) {
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int x = -radius; x <= radius; ++x) {
        g[x + radius] = std::exp(-(x * x) / (2.0 * sigma * sigma));
        sum += g[x + radius];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Separable convolution with a symmetric 1-D kernel along rows then columns.
Image separable_blur(const Image& img, const std::vector<double>& k) {
    const int radius = static_cast<int>(k.size() / 2);
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    Image tmp(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                acc += k[d + radius] * img(r, reflect_index(static_cast<std::ptrdiff_t>(c) + d, w));
            }
            tmp(r, c) = acc;
        }
    }
    Image out(h, w);
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

}  // namespace

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - m);
}

Image gaussian_kernel(double sigma, int radius) {
    require(sigma > 0.0, ErrorKind::invalid_argument, "Gaussian sigma must be positive");
    require(radius >= 1, ErrorKind::invalid_argument, "Gaussian radius must be at least 1");
    const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
    Image k(side, side);
    double sum = 0.0;
    for (int y = -radius; y <= radius; ++y) {
        for (int x = -radius; x <= radius; ++x) {
            double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            k(y + radius, x + radius) = v;
            sum += v;
        }
    }
    for (double& v : k.pixels()) v /= sum;
    return k;
}

Image dog_kernel(const DoGConfig& cfg) {
    cfg.validate();
    Image a = gaussian_kernel(cfg.sigma0, cfg.radius);
    Image b = gaussian_kernel(cfg.sigma1, cfg.radius);
    auto pa = a.pixels();
    auto pb = b.pixels();
    for (std::size_t k = 0; k < pa.size(); ++k) pa[k] -= pb[k];
    return a;
}

Image dog_filter(const Image& img, const DoGConfig& cfg) {
    cfg.validate();
    require(!img.empty(), ErrorKind::invalid_argument, "DoG input image is empty");
    for (double v : img.pixels()) {
        if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "DoG input contains a non-finite value");
    }
    Image fine = separable_blur(img, gaussian_1d(cfg.sigma0, cfg.radius));
    Image coarse = separable_blur(img, gaussian_1d(cfg.sigma1, cfg.radius));
    auto f = fine.pixels();
    auto c = coarse.pixels();
    for (std::size_t k = 0; k < f.size(); ++k) f[k] -= c[k];
    return fine;
}

std::size_t patch_positions(std::size_t extent, const PatchGrid& grid) {
    grid.validate();
    if (extent < grid.patch_size) return 0;
    return (extent - grid.patch_size) / grid.stride + 1;
}

std::vector<PatchAt> extract_patches(const Image& img, const PatchGrid& grid) {
    grid.validate();
    require(img.height() >= grid.patch_size && img.width() >= grid.patch_size,
            ErrorKind::shape_mismatch,
            "image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                " is smaller than patch size " + std::to_string(grid.patch_size));
    const std::size_t rows = patch_positions(img.height(), grid);
    const std::size_t cols = patch_positions(img.width(), grid);
    const std::size_t p = grid.patch_size;
    std::vector<PatchAt> out;
    out.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            PatchAt pa{i * grid.stride, j * grid.stride, Image(p, p)};
            for (std::size_t r = 0; r < p; ++r) {
                for (std::size_t c = 0; c < p; ++c) pa.patch(r, c) = img(pa.row + r, pa.col + c);
            }
            out.push_back(std::move(pa));
        }
    }
    return out;
}

std::vector<StackedPatch> preprocess_stack(std::span<const Image> channels, const DoGConfig& cfg,
                                           const PatchGrid& grid, PatchNormalization normalize) {
    require(!channels.empty(), ErrorKind::invalid_argument, "preprocess_stack needs at least one channel");
    for (const Image& ch : channels) {
        require(ch.same_shape(channels.front()), ErrorKind::shape_mismatch,
                "preprocess_stack channels differ in shape");
    }
    const std::size_t nc = channels.size();
    std::vector<std::vector<PatchAt>> per_channel;
    per_channel.reserve(nc);
    for (const Image& ch : channels) per_channel.push_back(extract_patches(dog_filter(ch, cfg), grid));

    const std::size_t p = grid.patch_size;
    std::vector<StackedPatch> out(per_channel.front().size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        StackedPatch& sp = out[n];
        sp.row = per_channel[0][n].row;
        sp.col = per_channel[0][n].col;
        sp.patch = Tensor({p, p, nc});
        for (std::size_t c = 0; c < nc; ++c) {
            auto src = per_channel[c][n].patch.pixels();
            for (std::size_t k = 0; k < src.size(); ++k) sp.patch.data[k * nc + c] = src[k];
        }
        if (normalize == PatchNormalization::zero_mean_unit_var) {
            const double count = static_cast<double>(p * p);
            for (std::size_t c = 0; c < nc; ++c) {
                double mean = 0.0;
                for (std::size_t k = 0; k < p * p; ++k) mean += sp.patch.data[k * nc + c];
                mean /= count;
                double var = 0.0;
                for (std::size_t k = 0; k < p * p; ++k) {
                    double d = sp.patch.data[k * nc + c] - mean;
                    var += d * d;
                }
                var /= count;
                // Constant channels are only centered.
                const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
                for (std::size_t k = 0; k < p * p; ++k) {
                    double& v = sp.patch.data[k * nc + c];
                    v = (v - mean) * scale;
                }
            }
        }
    }
    return out;
}

}  // namespace xspec
