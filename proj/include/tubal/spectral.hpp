// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/tensor3.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

namespace tubal {

using cdouble = std::complex<double>;
using CSliceMap = Eigen::Map<Eigen::MatrixXcd>;
using ConstCSliceMap = Eigen::Map<const Eigen::MatrixXcd>;

/// Number of leading Fourier slices that determine the spectrum of a real
/// tensor, i.e. ceil((I3 + 1) / 2). For even I3 this includes the Nyquist
/// slice I3/2, so no special casing is needed anywhere else.
constexpr std::size_t leading_slices(std::size_t tubes) { return tubes / 2 + 1; }

/// Complex frontal slices after a DFT along every tube.
///
/// Storage mirrors Tensor3: an (I1*I2) x I3 column-major complex matrix whose
/// column k is Fourier slice k.
class SpectralTensor {
public:
    SpectralTensor() = default;
    explicit SpectralTensor(Dims dims)
        : dims_(dims), data_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dims.slice_size()),
                                                    static_cast<Eigen::Index>(dims.tubes))) {}

    const Dims& dims() const { return dims_; }

    CSliceMap slice(std::size_t k) {
        return {data_.data() + k * dims_.slice_size(), static_cast<Eigen::Index>(dims_.rows),
                static_cast<Eigen::Index>(dims_.cols)};
    }
    ConstCSliceMap slice(std::size_t k) const {
        return {data_.data() + k * dims_.slice_size(), static_cast<Eigen::Index>(dims_.rows),
                static_cast<Eigen::Index>(dims_.cols)};
    }

    Eigen::MatrixXcd& matrix() { return data_; }
    const Eigen::MatrixXcd& matrix() const { return data_; }

private:
    Dims dims_{};
    Eigen::MatrixXcd data_;
};

namespace detail {

// FFTW planning is not thread safe; execution of a finished plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class FftwPlan {
public:
    explicit FftwPlan(fftw_plan plan) : plan_(plan) {
        if (plan_ == nullptr) throw Error(ErrorCode::InvalidConfig, "FFTW failed to create a plan");
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

inline fftw_complex* as_fftw(cdouble* p) { return reinterpret_cast<fftw_complex*>(p); }

/// The first leading_slices(I3) Fourier slices of a real tensor. The rest of
/// the spectrum is their conjugate mirror and is never stored.
class HalfSpectrum {
public:
    HalfSpectrum() = default;
    explicit HalfSpectrum(Dims dims)
        : dims_(dims), data_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dims.slice_size()),
                                                    static_cast<Eigen::Index>(leading_slices(dims.tubes)))) {}

    const Dims& dims() const { return dims_; }
    std::size_t count() const { return static_cast<std::size_t>(data_.cols()); }

    CSliceMap slice(std::size_t k) {
        return {data_.data() + k * dims_.slice_size(), static_cast<Eigen::Index>(dims_.rows),
                static_cast<Eigen::Index>(dims_.cols)};
    }
    ConstCSliceMap slice(std::size_t k) const {
        return {data_.data() + k * dims_.slice_size(), static_cast<Eigen::Index>(dims_.rows),
                static_cast<Eigen::Index>(dims_.cols)};
    }

    /// Multiplicity of slice k in the full spectrum (1 for DC and Nyquist, else 2).
    double weight(std::size_t k) const {
        return (k == 0 || 2 * k == dims_.tubes) ? 1.0 : 2.0;
    }

    Eigen::MatrixXcd& matrix() { return data_; }
    const Eigen::MatrixXcd& matrix() const { return data_; }

private:
    Dims dims_{};
    Eigen::MatrixXcd data_;
};

/// Real-to-half-complex DFT of every tube (unnormalized).
inline HalfSpectrum forward_half(const Tensor3& x) {
    HalfSpectrum out(x.dims());
    const std::size_t plane = x.dims().slice_size();
    if (plane == 0 || x.tubes() == 0) return out;

    const int n = static_cast<int>(x.tubes());
    const int stride = static_cast<int>(plane);
    // r2c out-of-place transforms leave their input untouched.
    auto* in = const_cast<double*>(x.data());
    std::unique_lock lock(fftw_planner_mutex());
    FftwPlan plan(fftw_plan_many_dft_r2c(1, &n, stride, in, nullptr, stride, 1, as_fftw(out.matrix().data()),
                                         nullptr, stride, 1, FFTW_ESTIMATE));
    lock.unlock();
    plan.execute();
    return out;
}

/// Inverse of forward_half, including the 1/I3 normalization. Imaginary parts
/// of the DC and Nyquist slices are ignored, which is what taking the real
/// part of the full inverse would do.
inline Tensor3 inverse_half(const HalfSpectrum& xhat) {
    const Dims d = xhat.dims();
    Tensor3 out(d);
    const std::size_t plane = d.slice_size();
    if (plane == 0 || d.tubes == 0) return out;

    Eigen::MatrixXcd scratch = xhat.matrix();  // c2r overwrites its input
    const int n = static_cast<int>(d.tubes);
    const int stride = static_cast<int>(plane);
    std::unique_lock lock(fftw_planner_mutex());
    FftwPlan plan(fftw_plan_many_dft_c2r(1, &n, stride, as_fftw(scratch.data()), nullptr, stride, 1, out.data(),
                                         nullptr, stride, 1, FFTW_ESTIMATE));
    lock.unlock();
    plan.execute();
    out *= 1.0 / static_cast<double>(d.tubes);
    return out;
}

/// Sum over the full spectrum of squared slice norms, from the leading half.
inline double spectral_squared_norm(const HalfSpectrum& xhat) {
    double sum = 0.0;
    for (std::size_t k = 0; k < xhat.count(); ++k) sum += xhat.weight(k) * xhat.slice(k).squaredNorm();
    return sum;
}

}  // namespace detail

/// Unnormalized forward DFT of every tube, all I3 slices materialized.
inline SpectralTensor dft_tubes(const Tensor3& x) {
    const Dims d = x.dims();
    SpectralTensor out(d);
    const detail::HalfSpectrum half = detail::forward_half(x);
    for (std::size_t k = 0; k < half.count(); ++k) out.slice(k) = half.slice(k);
    for (std::size_t k = half.count(); k < d.tubes; ++k) out.slice(k) = half.slice(d.tubes - k).conjugate();
    return out;
}

/// Inverse DFT of every tube with 1/I3 normalization.
///
/// Throws ImaginaryResidue when max |imag| exceeds 1e-8 * (1 + max |real|),
/// which means the input was not the spectrum of a real tensor.
inline Tensor3 idft_tubes(const SpectralTensor& xhat) {
    const Dims d = xhat.dims();
    Tensor3 out(d);
    const std::size_t plane = d.slice_size();
    if (plane == 0 || d.tubes == 0) return out;

    Eigen::MatrixXcd scratch(static_cast<Eigen::Index>(plane), static_cast<Eigen::Index>(d.tubes));
    const int n = static_cast<int>(d.tubes);
    const int stride = static_cast<int>(plane);
    auto* in = const_cast<cdouble*>(xhat.matrix().data());
    {
        std::unique_lock lock(detail::fftw_planner_mutex());
        detail::FftwPlan plan(fftw_plan_many_dft(1, &n, stride, detail::as_fftw(in), nullptr, stride, 1,
                                                 detail::as_fftw(scratch.data()), nullptr, stride, 1, FFTW_BACKWARD,
                                                 FFTW_ESTIMATE | FFTW_PRESERVE_INPUT));
        lock.unlock();
        plan.execute();
    }
    scratch /= static_cast<double>(d.tubes);

    const double max_real = scratch.real().cwiseAbs().maxCoeff();
    const double max_imag = scratch.imag().cwiseAbs().maxCoeff();
    if (!(max_imag <= 1e-8 * (1.0 + max_real))) {
        throw Error(ErrorCode::ImaginaryResidue,
                    "inverse transform left imaginary part " + std::to_string(max_imag) + " against real scale " +
                        std::to_string(max_real));
    }
    Eigen::Map<Eigen::MatrixXd>(out.data(), static_cast<Eigen::Index>(plane), static_cast<Eigen::Index>(d.tubes)) =
        scratch.real();
    return out;
}

}  // namespace tubal
