#include "extlab/fft.hpp"

#include <cstring>

#include <fftw3.h>

namespace extlab {

Fft2D::Fft2D(int nx, int ny) : nx_(nx), ny_(ny) {
    buf_in_.resize(static_cast<size_t>(nx) * ny);
    buf_out_.resize(static_cast<size_t>(nx) * ny);
    auto* in = reinterpret_cast<fftw_complex*>(buf_in_.data());
    auto* out = reinterpret_cast<fftw_complex*>(buf_out_.data());
    // Row-major (ny rows of length nx): fftw's first dimension is the slowest.
    plan_fwd_ = fftw_plan_dft_2d(ny, nx, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_2d(ny, nx, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void Fft2D::forward(const std::complex<double>* in, std::complex<double>* out) const {
    std::memcpy(buf_in_.data(), in, buf_in_.size() * sizeof(std::complex<double>));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(out, buf_out_.data(), buf_out_.size() * sizeof(std::complex<double>));
}

void Fft2D::inverse(const std::complex<double>* in, std::complex<double>* out) const {
    std::memcpy(buf_in_.data(), in, buf_in_.size() * sizeof(std::complex<double>));
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    std::memcpy(out, buf_out_.data(), buf_out_.size() * sizeof(std::complex<double>));
}

}  // namespace extlab
