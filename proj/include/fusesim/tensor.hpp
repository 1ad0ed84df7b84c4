#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fusesim {

/// Dense n-d float tensor, row-major. Feature maps are [H, W, C].
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, float fill = 0.0f)
        : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}
    Tensor(std::vector<int> shape, std::vector<float> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (checked_size(shape_) != data_.size())
            throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape product " +
                                        std::to_string(checked_size(shape_)));
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
    int rank() const { return static_cast<int>(shape_.size()); }
    size_t size() const { return data_.size(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](size_t i) { return data_[i]; }
    float operator[](size_t i) const { return data_[i]; }

    // [H, W, C] access
    float& at3(int h, int w, int c) {
        return data_[(static_cast<size_t>(h) * shape_[1] + w) * shape_[2] + c];
    }
    float at3(int h, int w, int c) const {
        return data_[(static_cast<size_t>(h) * shape_[1] + w) * shape_[2] + c];
    }
    float& at2(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
    float at2(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static size_t checked_size(const std::vector<int>& shape) {
        size_t n = 1;
        for (int e : shape) {
            if (e < 1) throw std::invalid_argument("Tensor: extent must be >= 1, got " + std::to_string(e));
            n *= static_cast<size_t>(e);
        }
        return n;
    }

private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

/// Seeded uniform [-1, 1] tensor, for reproducible functional checks.
inline Tensor random_tensor(std::vector<int> shape, uint64_t seed) {
    Tensor t(std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

/// Convolution geometry. The classic N = H-K+1, M = W-K+1 sizing is the
/// stride-1 / pad-0 special case.
struct ConvGeometry {
    int input_h = 1;
    int input_w = 1;
    int channels_in = 1;
    int kernel = 1;
    int channels_out = 1;
    int stride = 1;
    int padding = 0;

    int out_h() const { return spatial_out(input_h); }
    int out_w() const { return spatial_out(input_w); }

    int spatial_out(int in) const {
        int n = (in + 2 * padding - kernel) / stride + 1;
        return n;
    }

    void validate() const {
        if (input_h < 1 || input_w < 1) throw std::invalid_argument("ConvGeometry: input dims must be >= 1");
        if (channels_in < 1) throw std::invalid_argument("ConvGeometry: channels_in must be >= 1");
        if (channels_out < 1) throw std::invalid_argument("ConvGeometry: channels_out must be >= 1");
        if (kernel < 1) throw std::invalid_argument("ConvGeometry: kernel must be >= 1");
        if (stride < 1) throw std::invalid_argument("ConvGeometry: stride must be >= 1");
        if (padding < 0) throw std::invalid_argument("ConvGeometry: padding must be >= 0");
        if (out_h() < 1 || out_w() < 1)
            throw std::invalid_argument("ConvGeometry: output spatial dims collapse to zero (kernel " +
                                        std::to_string(kernel) + " exceeds padded input)");
    }
};

}  // namespace fusesim
