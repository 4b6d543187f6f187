#include "aqua/image.hpp"

#include <cmath>
#include <string>

#include "aqua/errors.hpp"

namespace aqua {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw ValidationError("image dimensions must be >= 1, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    }
}

} // namespace

LinearImage::LinearImage(int width, int height) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(value_count(), 0.0);
}

LinearImage::LinearImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != value_count()) {
        throw ValidationError("image data length " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(width) + "x" +
                              std::to_string(height) + "x3");
    }
}

bool LinearImage::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

LinearImage LinearImage::center_crop(int new_width, int new_height) const {
    if (new_width > width_ || new_height > height_) {
        throw ValidationError("crop larger than image");
    }
    check_dims(new_width, new_height);
    const int x0 = (width_ - new_width) / 2;
    const int y0 = (height_ - new_height) / 2;
    LinearImage out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        const double* src = data_.data() + ((static_cast<std::size_t>(y + y0) * width_) + x0) * 3;
        double* dst = out.data() + static_cast<std::size_t>(y) * new_width * 3;
        std::copy(src, src + static_cast<std::size_t>(new_width) * 3, dst);
    }
    return out;
}

DepthMap::DepthMap(int width, int height, double fill) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(pixel_count(), fill);
}

DepthMap::DepthMap(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != pixel_count()) {
        throw ValidationError("depth data length does not match dimensions");
    }
}

bool DepthMap::all_valid() const {
    for (double v : data_) {
        if (!std::isfinite(v) || v <= 0.0) return false;
    }
    return true;
}

DepthMap DepthMap::center_crop(int new_width, int new_height) const {
    if (new_width > width_ || new_height > height_) {
        throw ValidationError("crop larger than depth map");
    }
    check_dims(new_width, new_height);
    const int x0 = (width_ - new_width) / 2;
    const int y0 = (height_ - new_height) / 2;
    DepthMap out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        const double* src = data_.data() + static_cast<std::size_t>(y + y0) * width_ + x0;
        std::copy(src, src + new_width, out.data() + static_cast<std::size_t>(y) * new_width);
    }
    return out;
}

} // namespace aqua
