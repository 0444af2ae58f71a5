#pragma once
// Dense containers used across the engine: Eigen row-major matrices for
// embedding tables (row = one entity/relation) and a plain order-3 tensor.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "error.hpp"

namespace migtf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = std::int64_t;

// Order-3 tensor, row-major layout data[(i*d1 + j)*d2 + k].
class Tensor3 {
public:
    Tensor3() : d0_(0), d1_(0), d2_(0) {}
    Tensor3(Index d0, Index d1, Index d2)
        : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<std::size_t>(d0 * d1 * d2), 0.0) {
        if (d0 < 0 || d1 < 0 || d2 < 0) fail(ErrorCode::shape, "Tensor3: negative extent");
    }

    Index dim(int mode) const {
        switch (mode) {
            case 0: return d0_;
            case 1: return d1_;
            case 2: return d2_;
        }
        fail(ErrorCode::shape, "Tensor3: mode out of range");
    }

    Index size() const { return d0_ * d1_ * d2_; }

    double& operator()(Index i, Index j, Index k) {
        return data_[static_cast<std::size_t>((i * d1_ + j) * d2_ + k)];
    }
    double operator()(Index i, Index j, Index k) const {
        return data_[static_cast<std::size_t>((i * d1_ + j) * d2_ + k)];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    bool same_shape(const Tensor3& other) const {
        return d0_ == other.d0_ && d1_ == other.d1_ && d2_ == other.d2_;
    }

private:
    Index d0_, d1_, d2_;
    std::vector<double> data_;
};

}  // namespace migtf
