#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace aqua {

/// Per-channel RGB triple. Used for attenuation coefficients, background
/// light and single pixels alike.
using Vec3 = std::array<double, 3>;

inline Vec3 operator*(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

/// H x W x 3 image of linear-light RGB radiance, row-major interleaved.
/// Values are nominally in [0,1]; intermediates may exceed the range and are
/// only clamped when encoded to an integer format.
class LinearImage {
public:
    LinearImage() = default;
    LinearImage(int width, int height);
    LinearImage(int width, int height, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t value_count() const { return pixel_count() * 3; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double at(int x, int y, int c) const { return data_[index(x, y, c)]; }
    double& at(int x, int y, int c) { return data_[index(x, y, c)]; }

    Vec3 pixel(int x, int y) const {
        const std::size_t i = index(x, y, 0);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set_pixel(int x, int y, const Vec3& rgb) {
        const std::size_t i = index(x, y, 0);
        data_[i] = rgb[0];
        data_[i + 1] = rgb[1];
        data_[i + 2] = rgb[2];
    }

    bool same_shape(const LinearImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool all_finite() const;

    /// Center crop to the given size. Throws ValidationError if larger than the image.
    LinearImage center_crop(int new_width, int new_height) const;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// H x W single-channel metric depth in meters. All values positive and finite.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int width, int height, double fill = 1.0);
    DepthMap(int width, int height, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    bool matches(const LinearImage& img) const {
        return width_ == img.width() && height_ == img.height();
    }
    /// True when every sample is finite and > 0.
    bool all_valid() const;

    DepthMap center_crop(int new_width, int new_height) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// CIE L*a*b* image (D65). L in [0,100], a/b roughly in [-128,127].
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<double> l;
    std::vector<double> a;
    std::vector<double> b;
};

/// sRGB-encoded integer image as stored in PNG files. `data` holds RGB codes
/// in [0, 2^bit_depth - 1] regardless of depth.
struct EncodedImage {
    int width = 0;
    int height = 0;
    int bit_depth = 8; // 8 or 16
    std::vector<std::uint16_t> data;

    std::uint16_t max_code() const { return bit_depth == 16 ? 65535 : 255; }
};

} // namespace aqua
