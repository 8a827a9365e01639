// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tubal {

/// Sizes of a third-order tensor: rows (I1), columns (I2) and tube length (I3).
struct Dims {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t tubes = 0;

    std::size_t slice_size() const { return rows * cols; }
    std::size_t size() const { return rows * cols * tubes; }

    friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
    return std::to_string(d.rows) + "x" + std::to_string(d.cols) + "x" + std::to_string(d.tubes);
}

using SliceMap = Eigen::Map<Eigen::MatrixXd>;
using ConstSliceMap = Eigen::Map<const Eigen::MatrixXd>;

/// Dense real third-order tensor.
///
/// Element (i, j, k) lives at linear offset i + I1*j + I1*I2*k, so every
/// frontal slice is a contiguous column-major I1 x I2 matrix. The TNS1 file
/// format uses the same order.
class Tensor3 {
public:
    Tensor3() = default;

    Tensor3(std::size_t rows, std::size_t cols, std::size_t tubes)
        : dims_{rows, cols, tubes}, data_(rows * cols * tubes, 0.0) {}

    explicit Tensor3(Dims dims) : Tensor3(dims.rows, dims.cols, dims.tubes) {}

    Tensor3(Dims dims, std::vector<double> values) : dims_(dims), data_(std::move(values)) {
        if (data_.size() != dims_.size()) {
            throw Error(ErrorCode::DimMismatch, "value count " + std::to_string(data_.size()) +
                                                    " does not match dims " + tubal::to_string(dims_));
        }
    }

    const Dims& dims() const { return dims_; }
    std::size_t rows() const { return dims_.rows; }
    std::size_t cols() const { return dims_.cols; }
    std::size_t tubes() const { return dims_.tubes; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[i + dims_.rows * (j + dims_.cols * k)];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[i + dims_.rows * (j + dims_.cols * k)];
    }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    SliceMap slice(std::size_t k) {
        return {data_.data() + k * dims_.slice_size(), static_cast<Eigen::Index>(dims_.rows),
                static_cast<Eigen::Index>(dims_.cols)};
    }
    ConstSliceMap slice(std::size_t k) const {
        return {data_.data() + k * dims_.slice_size(), static_cast<Eigen::Index>(dims_.rows),
                static_cast<Eigen::Index>(dims_.cols)};
    }

    /// All entries viewed as an (I1*I2) x I3 matrix; column k is frontal slice k.
    Eigen::Map<const Eigen::MatrixXd> as_matrix() const {
        return {data_.data(), static_cast<Eigen::Index>(dims_.slice_size()),
                static_cast<Eigen::Index>(dims_.tubes)};
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Tensor3& operator+=(const Tensor3& other) {
        require_same_dims(other, "+=");
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
        return *this;
    }
    Tensor3& operator-=(const Tensor3& other) {
        require_same_dims(other, "-=");
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= other.data_[n];
        return *this;
    }
    Tensor3& operator*=(double alpha) {
        for (double& v : data_) v *= alpha;
        return *this;
    }

    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double alpha, Tensor3 a) { return a *= alpha; }
    friend Tensor3 operator*(Tensor3 a, double alpha) { return a *= alpha; }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    void require_same_dims(const Tensor3& other, const char* op) const {
        if (other.dims_ != dims_) {
            throw Error(ErrorCode::DimMismatch, std::string(op) + " on " + tubal::to_string(dims_) + " and " +
                                                    tubal::to_string(other.dims_));
        }
    }

    Dims dims_{};
    std::vector<double> data_;
};

inline double squared_norm(const Tensor3& x) {
    double sum = 0.0;
    for (double v : x.values()) sum += v * v;
    return sum;
}

inline double frobenius_norm(const Tensor3& x) { return std::sqrt(squared_norm(x)); }

inline double inner_product(const Tensor3& x, const Tensor3& y) {
    if (x.dims() != y.dims()) {
        throw Error(ErrorCode::DimMismatch,
                    "inner_product of " + to_string(x.dims()) + " and " + to_string(y.dims()));
    }
    double sum = 0.0;
    auto xs = x.values();
    auto ys = y.values();
    for (std::size_t n = 0; n < xs.size(); ++n) sum += xs[n] * ys[n];
    return sum;
}

/// Tubal transpose: every frontal slice is transposed and slices 2..I3 are
/// taken in reverse order.
inline Tensor3 transpose(const Tensor3& x) {
    const std::size_t n3 = x.tubes();
    Tensor3 out(x.cols(), x.rows(), n3);
    for (std::size_t k = 0; k < n3; ++k) {
        const std::size_t src = (k == 0) ? 0 : n3 - k;
        out.slice(k) = x.slice(src).transpose();
    }
    return out;
}

inline Tensor3 identity_tensor(std::size_t n, std::size_t tubes) {
    Tensor3 out(n, n, tubes);
    if (tubes > 0) out.slice(0).setIdentity();
    return out;
}

/// Stacks b below a (mode-1 concatenation).
inline Tensor3 concat_mode1(const Tensor3& a, const Tensor3& b) {
    if (a.cols() != b.cols() || a.tubes() != b.tubes()) {
        throw Error(ErrorCode::DimMismatch, "concat_mode1 of " + to_string(a.dims()) + " and " + to_string(b.dims()));
    }
    Tensor3 out(a.rows() + b.rows(), a.cols(), a.tubes());
    for (std::size_t k = 0; k < a.tubes(); ++k) {
        auto s = out.slice(k);
        s.topRows(static_cast<Eigen::Index>(a.rows())) = a.slice(k);
        s.bottomRows(static_cast<Eigen::Index>(b.rows())) = b.slice(k);
    }
    return out;
}

/// Places b to the right of a (mode-2 concatenation).
inline Tensor3 concat_mode2(const Tensor3& a, const Tensor3& b) {
    if (a.rows() != b.rows() || a.tubes() != b.tubes()) {
        throw Error(ErrorCode::DimMismatch, "concat_mode2 of " + to_string(a.dims()) + " and " + to_string(b.dims()));
    }
    Tensor3 out(a.rows(), a.cols() + b.cols(), a.tubes());
    for (std::size_t k = 0; k < a.tubes(); ++k) {
        auto s = out.slice(k);
        s.leftCols(static_cast<Eigen::Index>(a.cols())) = a.slice(k);
        s.rightCols(static_cast<Eigen::Index>(b.cols())) = b.slice(k);
    }
    return out;
}

/// Horizontal slices [first, first + count).
inline Tensor3 row_range(const Tensor3& x, std::size_t first, std::size_t count) {
    if (first + count > x.rows()) {
        throw Error(ErrorCode::DimMismatch, "row range exceeds " + to_string(x.dims()));
    }
    Tensor3 out(count, x.cols(), x.tubes());
    for (std::size_t k = 0; k < x.tubes(); ++k) {
        out.slice(k) = x.slice(k).middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    }
    return out;
}

/// Lateral slices [first, first + count).
inline Tensor3 col_range(const Tensor3& x, std::size_t first, std::size_t count) {
    if (first + count > x.cols()) {
        throw Error(ErrorCode::DimMismatch, "column range exceeds " + to_string(x.dims()));
    }
    Tensor3 out(x.rows(), count, x.tubes());
    for (std::size_t k = 0; k < x.tubes(); ++k) {
        out.slice(k) = x.slice(k).middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    }
    return out;
}

/// Relabels indices while keeping the linear-offset order of the entries.
inline Tensor3 reshape3(const Tensor3& x, Dims new_dims) {
    if (new_dims.size() != x.size()) {
        throw Error(ErrorCode::DimMismatch, "cannot reshape " + to_string(x.dims()) + " to " + to_string(new_dims));
    }
    return Tensor3(new_dims, std::vector<double>(x.values().begin(), x.values().end()));
}

}  // namespace tubal
