#include "peclab/fieldkernel.hpp"

#include <algorithm>
#include <cmath>

#include "peclab/errors.hpp"

namespace peclab {

void PsfParams::validate() const {
    if (!(alpha_nm > 0.0) || !std::isfinite(alpha_nm)) {
        throw ValidationError("psf: alpha must be positive");
    }
    if (!(beta_nm > alpha_nm) || !std::isfinite(beta_nm)) {
        throw ValidationError("psf: beta must exceed alpha");
    }
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("psf: eta must be >= 0");
}

double Kernel::sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

namespace {

// fwd_amp * exp(-r^2/a^2) + bs_amp * exp(-r^2/b^2), truncated at 3b, unit sum.
Kernel build_kernel(double alpha, double beta, double fwd_amp, double bs_amp,
                    double pixel_size) {
    Kernel k;
    k.pixel_size = pixel_size;
    k.radius = static_cast<int>(std::ceil(3.0 * beta / pixel_size - 1e-12));
    const int side = k.side();
    k.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
    const double rmax2 = 9.0 * beta * beta;
    double total = 0.0;
    for (int dy = -k.radius; dy <= k.radius; ++dy) {
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
            const double r2 = (dx * dx + dy * dy) * pixel_size * pixel_size;
            if (r2 > rmax2) continue;
            const double v = fwd_amp * std::exp(-r2 / (alpha * alpha)) +
                             bs_amp * std::exp(-r2 / (beta * beta));
            k.weights[static_cast<std::size_t>(dy + k.radius) * side + (dx + k.radius)] = v;
            total += v;
        }
    }
    for (double& w : k.weights) w /= total;
    return k;
}

}  // namespace

Kernel make_psf_kernel(const PsfParams& params, double pixel_size) {
    params.validate();
    if (!(pixel_size > 0.0)) throw ValidationError("make_psf_kernel: pixel_size must be positive");
    if (pixel_size > params.alpha_nm) {
        throw ValidationError("make_psf_kernel: pixel_size " + std::to_string(pixel_size) +
                              " undersamples the forward lobe (alpha " +
                              std::to_string(params.alpha_nm) + ")");
    }
    const double a2 = params.alpha_nm * params.alpha_nm;
    const double b2 = params.beta_nm * params.beta_nm;
    return build_kernel(params.alpha_nm, params.beta_nm, 1.0 / a2, params.eta / b2, pixel_size);
}

Kernel make_backscatter_kernel(const PsfParams& params, double pixel_size) {
    params.validate();
    if (!(pixel_size > 0.0)) throw ValidationError("make_backscatter_kernel: pixel_size must be positive");
    return build_kernel(params.beta_nm, params.beta_nm, 0.0, 1.0, pixel_size);
}

namespace {

void check_conv_args(const RasterGrid& field, const Kernel& kernel) {
    if (field.pixel_size != kernel.pixel_size) {
        throw ValidationError("convolve: field pixel_size " + std::to_string(field.pixel_size) +
                              " does not match kernel pixel_size " +
                              std::to_string(kernel.pixel_size));
    }
    for (double v : field.values) {
        if (!std::isfinite(v)) throw ValidationError("convolve: field contains non-finite values");
    }
}

}  // namespace

double convolve_direct_at(const RasterGrid& field, const Kernel& kernel, int ix, int iy) {
    const int R = kernel.radius;
    double sum = 0.0;
    const int dy0 = std::max(-R, iy - (field.height - 1));
    const int dy1 = std::min(R, iy);
    const int dx0 = std::max(-R, ix - (field.width - 1));
    const int dx1 = std::min(R, ix);
    for (int dy = dy0; dy <= dy1; ++dy) {
        for (int dx = dx0; dx <= dx1; ++dx) {
            sum += field.at(ix - dx, iy - dy) * kernel.at(dx, dy);
        }
    }
    return sum;
}

RasterGrid convolve_direct(const RasterGrid& field, const Kernel& kernel) {
    check_conv_args(field, kernel);
    RasterGrid out(field.width, field.height, field.pixel_size, field.origin_x, field.origin_y);
    for (int iy = 0; iy < field.height; ++iy) {
        for (int ix = 0; ix < field.width; ++ix) {
            out.at(ix, iy) = convolve_direct_at(field, kernel, ix, iy);
        }
    }
    return out;
}

RasterGrid convolve_direct_parallel(const RasterGrid& field, const Kernel& kernel) {
    check_conv_args(field, kernel);
    RasterGrid out(field.width, field.height, field.pixel_size, field.origin_x, field.origin_y);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < field.height; ++iy) {
        for (int ix = 0; ix < field.width; ++ix) {
            out.at(ix, iy) = convolve_direct_at(field, kernel, ix, iy);
        }
    }
    return out;
}

ConvolutionPlan::ConvolutionPlan(int field_width, int field_height, const Kernel& kernel)
    : fw_(field_width), fh_(field_height),
      pw_(next_pow2(field_width + 2 * kernel.radius)),
      ph_(next_pow2(field_height + 2 * kernel.radius)),
      kernel_pixel_size_(kernel.pixel_size),
      fft_x_(pw_), fft_y_(ph_) {
    kernel_spectrum_.assign(static_cast<std::size_t>(pw_) * ph_, {0.0, 0.0});
    const int R = kernel.radius;
    // Kernel centered at the origin, wrapped into the padded frame.
    for (int dy = -R; dy <= R; ++dy) {
        const int py = (dy + ph_) % ph_;
        for (int dx = -R; dx <= R; ++dx) {
            const int px = (dx + pw_) % pw_;
            kernel_spectrum_[static_cast<std::size_t>(py) * pw_ + px] = kernel.at(dx, dy);
        }
    }
    fft2d(kernel_spectrum_, false);
}

void ConvolutionPlan::fft2d(std::vector<std::complex<double>>& buf, bool inverse) const {
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < ph_; ++iy) {
        std::complex<double>* row = buf.data() + static_cast<std::size_t>(iy) * pw_;
        if (inverse) fft_x_.inverse(row);
        else fft_x_.forward(row);
    }
#pragma omp parallel
    {
        std::vector<std::complex<double>> col(ph_);
#pragma omp for schedule(static)
        for (int ix = 0; ix < pw_; ++ix) {
            for (int iy = 0; iy < ph_; ++iy) col[iy] = buf[static_cast<std::size_t>(iy) * pw_ + ix];
            if (inverse) fft_y_.inverse(col.data());
            else fft_y_.forward(col.data());
            for (int iy = 0; iy < ph_; ++iy) buf[static_cast<std::size_t>(iy) * pw_ + ix] = col[iy];
        }
    }
}

RasterGrid ConvolutionPlan::apply(const RasterGrid& field) const {
    if (field.width != fw_ || field.height != fh_) {
        throw ValidationError("ConvolutionPlan: field dimensions do not match the plan");
    }
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(pw_) * ph_, {0.0, 0.0});
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < fh_; ++iy) {
        for (int ix = 0; ix < fw_; ++ix) {
            buf[static_cast<std::size_t>(iy) * pw_ + ix] = field.at(ix, iy);
        }
    }
    fft2d(buf, false);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < ph_; ++iy) {
        for (int ix = 0; ix < pw_; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * pw_ + ix;
            buf[i] *= kernel_spectrum_[i];
        }
    }
    fft2d(buf, true);

    RasterGrid out(fw_, fh_, field.pixel_size, field.origin_x, field.origin_y);
    for (int iy = 0; iy < fh_; ++iy) {
        for (int ix = 0; ix < fw_; ++ix) {
            out.at(ix, iy) = buf[static_cast<std::size_t>(iy) * pw_ + ix].real();
        }
    }
    return out;
}

RasterGrid convolve(const RasterGrid& field, const Kernel& kernel) {
    check_conv_args(field, kernel);
    ConvolutionPlan plan(field.width, field.height, kernel);
    return plan.apply(field);
}

RasterGrid local_density(const RasterGrid& pattern, const PsfParams& params) {
    if (!pattern.is_binary()) throw ValidationError("local_density: pattern must be binary");
    const Kernel kb = make_backscatter_kernel(params, pattern.pixel_size);
    RasterGrid density = convolve(pattern, kb);
    for (double& v : density.values) v = std::clamp(v, 0.0, 1.0);
    return density;
}

}  // namespace peclab
