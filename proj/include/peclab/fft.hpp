#pragma once

#include <complex>
#include <vector>

namespace peclab {

/// Iterative radix-2 complex FFT with a precomputed root table.
/// Sizes must be powers of two.
class Fft1D {
public:
    explicit Fft1D(int n);

    int size() const { return n_; }
    void forward(std::complex<double>* a) const;
    void inverse(std::complex<double>* a) const;

private:
    int n_ = 0;
    std::vector<int> rev_;
    std::vector<std::complex<double>> roots_;  // e^{-2*pi*i*j/n}, j < n/2
};

int next_pow2(int n);

}  // namespace peclab
