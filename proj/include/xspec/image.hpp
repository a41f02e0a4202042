#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xspec {

// Single-channel 2-D image, row-major, 64-bit samples.
class Image {
public:
    Image() = default;
    Image(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), data_(height * width, fill) {}
    Image(std::size_t height, std::size_t width, std::vector<double> data);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }

    std::span<double> pixels() noexcept { return data_; }
    std::span<const double> pixels() const noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

// Dense row-major tensor of arbitrary rank.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
    Tensor(std::vector<std::size_t> dims, std::vector<double> values);

    std::size_t rank() const noexcept { return shape.size(); }
    std::size_t size() const noexcept { return data.size(); }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t element_count(std::span<const std::size_t> shape);

}  // namespace xspec
