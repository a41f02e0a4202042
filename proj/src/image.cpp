#include "xspec/image.hpp"

#include <string>

#include "xspec/error.hpp"

namespace xspec {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::shape_mismatch: return "shape_mismatch";
        case ErrorKind::io: return "io";
        case ErrorKind::format: return "format";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

Image::Image(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    require(data_.size() == height_ * width_, ErrorKind::shape_mismatch,
            "image data length " + std::to_string(data_.size()) + " does not match " +
                std::to_string(height_) + "x" + std::to_string(width_));
}

std::size_t element_count(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : shape(std::move(dims)), data(element_count(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
    require(data.size() == element_count(shape), ErrorKind::shape_mismatch,
            "tensor data length does not match shape");
}

}  // namespace xspec
