#include "peclab/fft.hpp"

#include <cmath>

#include "peclab/errors.hpp"

namespace peclab {

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

Fft1D::Fft1D(int n) : n_(n) {
    if (n < 1 || (n & (n - 1)) != 0) throw ValidationError("Fft1D: size must be a power of two");
    rev_.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
        rev_[i] = r;
    }
    roots_.resize(n / 2 > 0 ? n / 2 : 1);
    for (int j = 0; j < n / 2; ++j) {
        const double ang = -2.0 * M_PI * j / n;
        roots_[j] = {std::cos(ang), std::sin(ang)};
    }
}

void Fft1D::forward(std::complex<double>* a) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
        if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                const std::complex<double> w = roots_[j * step];
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + half] * w;
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
}

void Fft1D::inverse(std::complex<double>* a) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) a[i] = std::conj(a[i]);
    forward(a);
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] = std::conj(a[i]) * inv;
}

}  // namespace peclab
