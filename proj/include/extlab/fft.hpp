#pragma once

#include <complex>
#include <vector>

namespace extlab {

// Thin deterministic wrapper over FFTW (FFTW_ESTIMATE plans only, so the
// algorithm choice never depends on machine timing).  Out-of-place c2c on
// row-major nx x ny data; unnormalized, forward kernel e^{-i x.xi}.
class Fft2D {
public:
    Fft2D(int nx, int ny);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int nx() const { return nx_; }
    int ny() const { return ny_; }

    void forward(const std::complex<double>* in, std::complex<double>* out) const;
    void inverse(const std::complex<double>* in, std::complex<double>* out) const;

private:
    int nx_, ny_;
    void* plan_fwd_;
    void* plan_inv_;
    mutable std::vector<std::complex<double>> buf_in_, buf_out_;
};

// Signed FFT frequency for bin k of an N-point transform with spacing dx.
inline double fft_frequency(int k, int n, double dx) {
    const int kk = (k <= n / 2) ? k : k - n;
    return 2.0 * 3.14159265358979323846 * kk / (n * dx);
}

}  // namespace extlab
