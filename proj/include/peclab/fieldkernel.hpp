#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "peclab/fft.hpp"
#include "peclab/raster.hpp"

namespace peclab {

/// Double-Gaussian energy point spread function:
///   f(r) = (1/(1+eta)) * [ exp(-r^2/alpha^2)/(pi alpha^2)
///                        + eta * exp(-r^2/beta^2)/(pi beta^2) ]
/// alpha is the forward-scattering range, beta the backscattering range and
/// eta the back-to-forward deposited-energy ratio.
struct PsfParams {
    double alpha_nm = 30.0;
    double beta_nm = 300.0;
    double eta = 5.0;

    void validate() const;
};

/// Discretized, truncated (r <= 3*beta) and unit-sum-normalized PSF.
struct Kernel {
    double pixel_size = 1.0;
    int radius = 0;  // pixels; weights span (2*radius+1)^2
    std::vector<double> weights;

    int side() const { return 2 * radius + 1; }
    double at(int dx, int dy) const {
        return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
    }
    double sum() const;
};

/// Full two-Gaussian kernel. Rejects pixel_size > alpha (undersampled forward lobe).
Kernel make_psf_kernel(const PsfParams& params, double pixel_size);

/// Backscatter Gaussian alone (range beta), used for local pattern density.
Kernel make_backscatter_kernel(const PsfParams& params, double pixel_size);

/// Zero-padded linear convolution, output on the input grid. FFT implementation,
/// OpenMP-parallel across transform lines.
RasterGrid convolve(const RasterGrid& field, const Kernel& kernel);

/// Direct double-sum reference. Serial; kept as the oracle for the FFT path.
RasterGrid convolve_direct(const RasterGrid& field, const Kernel& kernel);

/// Direct double sum with OpenMP over output pixels.
RasterGrid convolve_direct_parallel(const RasterGrid& field, const Kernel& kernel);

/// Direct evaluation of the convolution at a single output pixel.
double convolve_direct_at(const RasterGrid& field, const Kernel& kernel, int ix, int iy);

/// Local pattern density: pattern convolved with the normalized backscatter
/// Gaussian. Values clamped to [0,1] against FFT roundoff.
RasterGrid local_density(const RasterGrid& pattern, const PsfParams& params);

/// Caches the padded kernel spectrum for repeated convolutions on grids of
/// fixed dimensions (dose sweeps, refinement loops).
class ConvolutionPlan {
public:
    ConvolutionPlan(int field_width, int field_height, const Kernel& kernel);

    RasterGrid apply(const RasterGrid& field) const;

private:
    int fw_, fh_;
    int pw_, ph_;
    double kernel_pixel_size_;
    Fft1D fft_x_, fft_y_;
    std::vector<std::complex<double>> kernel_spectrum_;

    void fft2d(std::vector<std::complex<double>>& buf, bool inverse) const;
};

}  // namespace peclab
