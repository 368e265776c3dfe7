#include "peclab/pec.hpp"

#include <algorithm>
#include <cmath>

#include "peclab/errors.hpp"

namespace peclab {

double dl_model(double rho, double eta, double a) {
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("dl_model: rho must lie in (0,1)");
    if (!(eta >= 0.0)) throw ValidationError("dl_model: eta must be >= 0");
    if (!(a > 0.0)) throw ValidationError("dl_model: A must be positive");
    return a * (1.0 + eta) / (1.0 + 2.0 * rho * eta);
}

std::vector<double> isotonic_non_increasing(const std::vector<double>& y) {
    // PAVA on the negated sequence; blocks carry (sum, count).
    const std::size_t n = y.size();
    std::vector<double> block_mean(n), block_count(n);
    std::vector<std::size_t> block_start(n);
    std::size_t nb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        block_mean[nb] = y[i];
        block_count[nb] = 1.0;
        block_start[nb] = i;
        ++nb;
        while (nb > 1 && block_mean[nb - 2] < block_mean[nb - 1]) {
            const double c = block_count[nb - 2] + block_count[nb - 1];
            block_mean[nb - 2] =
                (block_mean[nb - 2] * block_count[nb - 2] + block_mean[nb - 1] * block_count[nb - 1]) / c;
            block_count[nb - 2] = c;
            --nb;
        }
    }
    std::vector<double> out(n);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t end = (b + 1 < nb) ? block_start[b + 1] : n;
        for (std::size_t i = block_start[b]; i < end; ++i) out[i] = block_mean[b];
    }
    return out;
}

std::optional<double> onset_from_counts(const std::vector<double>& doses,
                                        const std::vector<double>& f_under) {
    if (doses.size() != f_under.size() || doses.size() < 2) {
        throw ValidationError("onset_from_counts: need >= 2 (dose, f_u) samples");
    }
    for (std::size_t i = 0; i < doses.size(); ++i) {
        if (!(f_under[i] >= 0.0 && f_under[i] <= 1.0)) {
            throw ValidationError("onset_from_counts: f_u outside [0,1]");
        }
        if (i > 0 && !(doses[i] > doses[i - 1])) {
            throw ValidationError("onset_from_counts: doses must be strictly increasing");
        }
    }
    const std::vector<double> g = isotonic_non_increasing(f_under);
    // Crossing exists only if the projected curve has samples on both sides.
    std::ptrdiff_t last_above = -1;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] > 0.5) last_above = static_cast<std::ptrdiff_t>(i);
    }
    if (last_above < 0) return std::nullopt;                                  // never above
    if (last_above + 1 >= static_cast<std::ptrdiff_t>(g.size())) return std::nullopt;  // never drops
    const std::size_t i = static_cast<std::size_t>(last_above);
    const double t = (g[i] - 0.5) / (g[i] - g[i + 1]);
    return doses[i] + t * (doses[i + 1] - doses[i]);
}

namespace {

void validate_onsets(const std::vector<OnsetPoint>& pts, std::size_t min_count) {
    if (pts.size() < min_count) {
        throw ValidationError("fit_eta: need at least " + std::to_string(min_count) + " points");
    }
    for (const OnsetPoint& p : pts) {
        if (!(p.rho > 0.0 && p.rho < 1.0)) throw ValidationError("fit_eta: rho must lie in (0,1)");
        if (!(p.dl > 0.0) || !std::isfinite(p.dl)) {
            throw ValidationError("fit_eta: onset doses must be positive");
        }
    }
    const double r0 = pts.front().rho;
    bool distinct = false;
    for (const OnsetPoint& p : pts) {
        if (p.rho != r0) distinct = true;
    }
    if (!distinct) throw ValidationError("fit_eta: all rho equal, eta is unidentifiable");
}

double unweighted_r2(const std::vector<OnsetPoint>& pts, double eta, double a) {
    double mean = 0.0;
    for (const OnsetPoint& p : pts) mean += p.dl;
    mean /= static_cast<double>(pts.size());
    double ssr = 0.0, sst = 0.0;
    for (const OnsetPoint& p : pts) {
        const double r = p.dl - dl_model(p.rho, eta, a);
        ssr += r * r;
        sst += (p.dl - mean) * (p.dl - mean);
    }
    if (sst <= 0.0) return ssr <= 1e-20 ? 1.0 : 0.0;
    return std::clamp(1.0 - ssr / sst, 0.0, 1.0);
}

EtaFit closed_form_two_point(const OnsetPoint& p1, const OnsetPoint& p2) {
    EtaFit fit;
    fit.n_points = 2;
    fit.robust_weights = {1.0, 1.0};
    const double denom = 2.0 * (p2.rho * p2.dl - p1.rho * p1.dl);
    const double numer = p1.dl - p2.dl;
    double eta;
    if (denom == 0.0) {
        eta = (numer == 0.0) ? 0.0 : kEtaMax;
        fit.eta_clamped = numer != 0.0;
    } else {
        eta = numer / denom;
    }
    if (eta < 0.0) {
        fit.eta = 0.0;
        fit.eta_clamped = true;
        fit.a = 0.5 * (p1.dl + p2.dl);  // eta=0 model is the constant A
    } else if (eta > kEtaMax) {
        fit.eta = kEtaMax;
        fit.eta_clamped = true;
        fit.a = p1.dl * (1.0 + 2.0 * p1.rho * fit.eta) / (1.0 + fit.eta);
    } else {
        fit.eta = eta;
        fit.a = p1.dl * (1.0 + 2.0 * p1.rho * eta) / (1.0 + eta);
    }
    fit.r_squared = unweighted_r2({p1, p2}, fit.eta, fit.a);
    return fit;
}

}  // namespace

EtaFit fit_eta_irls(const std::vector<OnsetPoint>& points, double eta0, double a0) {
    validate_onsets(points, 2);
    const std::size_t n = points.size();
    double eta = std::clamp(eta0, 0.0, kEtaMax);
    double a = std::max(a0, 1e-12);
    std::vector<double> w(n, 1.0), rel(n);

    const int max_iter = 200;
    int it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        // Standardized residuals for a multiplicative error model.
        for (std::size_t i = 0; i < n; ++i) {
            const double m = dl_model(points[i].rho, eta, a);
            rel[i] = (points[i].dl - m) / m;
        }
        std::vector<double> absr(n);
        for (std::size_t i = 0; i < n; ++i) absr[i] = std::fabs(rel[i]);
        std::nth_element(absr.begin(), absr.begin() + n / 2, absr.end());
        double med = absr[n / 2];
        if (n % 2 == 0) {
            const double lo = *std::max_element(absr.begin(), absr.begin() + n / 2);
            med = 0.5 * (med + lo);
        }
        const double delta = 1.345 * med;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = (delta <= 0.0 || std::fabs(rel[i]) <= delta)
                       ? 1.0
                       : delta / std::fabs(rel[i]);
        }

        // Gauss-Newton on (a, eta) with 1/model scaling folded into the rows.
        double maa = 0.0, mae = 0.0, mee = 0.0, ga = 0.0, ge = 0.0, f0 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double rho = points[i].rho;
            const double den = 1.0 + 2.0 * rho * eta;
            const double m = a * (1.0 + eta) / den;
            const double ja = ((1.0 + eta) / den) / m;  // d(model)/dA / model = 1/A
            const double je = (a * (1.0 - 2.0 * rho) / (den * den)) / m;
            maa += w[i] * ja * ja;
            mae += w[i] * ja * je;
            mee += w[i] * je * je;
            ga += w[i] * ja * rel[i];
            ge += w[i] * je * rel[i];
            f0 += w[i] * rel[i] * rel[i];
        }
        const double det = maa * mee - mae * mae;
        if (!(std::fabs(det) > 1e-300)) break;
        const double step_a = (mee * ga - mae * ge) / det;
        const double step_e = (maa * ge - mae * ga) / det;

        double t = 1.0;
        double a_new = a, eta_new = eta;
        for (int ls = 0; ls < 40; ++ls) {
            a_new = std::max(a + t * step_a, 1e-12);
            eta_new = std::clamp(eta + t * step_e, 0.0, kEtaMax);
            double f = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double m = dl_model(points[i].rho, eta_new, a_new);
                const double r = (points[i].dl - m) / m;
                f += w[i] * r * r;
            }
            if (f <= f0) break;
            t *= 0.5;
        }
        const bool done = std::fabs(a_new - a) / a < 1e-12 &&
                          std::fabs(eta_new - eta) / (1.0 + eta) < 1e-12;
        a = a_new;
        eta = eta_new;
        if (done) {
            converged = true;
            break;
        }
    }

    EtaFit fit;
    fit.eta = eta;
    fit.a = a;
    fit.n_points = static_cast<int>(n);
    fit.robust_weights = w;
    fit.eta_clamped = (eta == 0.0 || eta == kEtaMax);
    fit.converged = converged;
    fit.iterations = it;
    fit.r_squared = unweighted_r2(points, eta, a);
    return fit;
}

EtaFit fit_eta(const std::vector<OnsetPoint>& points) {
    validate_onsets(points, 2);
    if (points.size() == 2) return closed_form_two_point(points[0], points[1]);

    // Initialize from the linearization 1/D = (1 + 2*rho*eta) / (A*(1+eta)).
    const std::size_t n = points.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const OnsetPoint& p : points) {
        const double y = 1.0 / p.dl;
        sx += p.rho;
        sy += y;
        sxx += p.rho * p.rho;
        sxy += p.rho * y;
    }
    const double nn = static_cast<double>(n);
    const double det = nn * sxx - sx * sx;
    const double b = (nn * sxy - sx * sy) / det;
    const double a_lin = sy / nn - b * sx / nn;
    double eta0;
    if (b <= 0.0) eta0 = 0.0;                 // onsets do not decrease with density
    else if (a_lin <= 0.0) eta0 = kEtaMax;    // 1/D line extrapolates through zero
    else eta0 = std::min(b / (2.0 * a_lin), kEtaMax);
    double a0 = 0.0;
    for (const OnsetPoint& p : points) {
        a0 += p.dl * (1.0 + 2.0 * p.rho * eta0) / (1.0 + eta0);
    }
    a0 /= nn;
    return fit_eta_irls(points, eta0, a0);
}

DoseMapResult dose_multiplier_map(const RasterGrid& pattern, double eta, const PsfParams& psf,
                                  bool refine, const RefineOptions& opts,
                                  const RasterGrid* precomputed_density) {
    psf.validate();
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw ValidationError("dose_multiplier_map: eta must be >= 0");
    }
    if (std::fabs(eta - psf.eta) > 1e-9 * std::max(1.0, std::fabs(eta))) {
        throw ValidationError("dose_multiplier_map: eta inconsistent with psf.eta");
    }
    if (!pattern.is_binary()) throw ValidationError("dose_multiplier_map: pattern must be binary");
    bool any = false;
    for (double v : pattern.values) any = any || (v != 0.0);
    if (!any) throw ValidationError("dose_multiplier_map: pattern is empty");

    if (precomputed_density && !precomputed_density->same_geometry(pattern)) {
        throw ValidationError("dose_multiplier_map: density grid geometry mismatch");
    }
    const RasterGrid density =
        precomputed_density ? *precomputed_density : local_density(pattern, psf);

    DoseMapResult res;
    res.multipliers = RasterGrid(pattern.width, pattern.height, pattern.pixel_size,
                                 pattern.origin_x, pattern.origin_y);
    for (std::size_t i = 0; i < pattern.values.size(); ++i) {
        res.multipliers.values[i] =
            pattern.values[i] != 0.0
                ? (1.0 + eta) / (1.0 + 2.0 * eta * density.values[i])
                : 1.0;
    }
    if (!refine) return res;

    if (!(opts.target_energy > 0.0)) {
        throw ValidationError("dose_multiplier_map: refine requires a positive target energy");
    }
    res.refined = true;
    const Kernel kernel = make_psf_kernel(psf, pattern.pixel_size);
    const ConvolutionPlan plan(pattern.width, pattern.height, kernel);

    RasterGrid dosed(pattern.width, pattern.height, pattern.pixel_size, pattern.origin_x,
                     pattern.origin_y);
    res.converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < pattern.values.size(); ++i) {
            dosed.values[i] = pattern.values[i] * res.multipliers.values[i];
        }
        const RasterGrid energy = plan.apply(dosed);
        double max_dev = 0.0;
        for (std::size_t i = 0; i < pattern.values.size(); ++i) {
            if (pattern.values[i] == 0.0) continue;
            max_dev = std::max(max_dev,
                               std::fabs(energy.values[i] / opts.target_energy - 1.0));
        }
        res.residual_history.push_back(max_dev);
        res.final_residual = max_dev;
        res.iterations = it + 1;
        if (max_dev < opts.tolerance) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < pattern.values.size(); ++i) {
            if (pattern.values[i] == 0.0) continue;
            const double ratio = opts.target_energy / std::max(energy.values[i], 1e-300);
            res.multipliers.values[i] *= std::pow(ratio, opts.damping);
        }
    }
    return res;
}

FlatnessReport flatness_report(const std::vector<OnsetPoint>& onsets) {
    if (onsets.size() < 2) throw ValidationError("flatness_report: need >= 2 onsets");
    double lo = onsets.front().dl, hi = lo, mean = 0.0;
    for (const OnsetPoint& p : onsets) {
        if (!(p.dl > 0.0)) throw ValidationError("flatness_report: onset doses must be positive");
        lo = std::min(lo, p.dl);
        hi = std::max(hi, p.dl);
        mean += p.dl;
    }
    mean /= static_cast<double>(onsets.size());
    double maxdev = 0.0;
    for (const OnsetPoint& p : onsets) maxdev = std::max(maxdev, std::fabs(p.dl - mean));
    return FlatnessReport{hi / lo, mean, maxdev};
}

double device_density(const RasterGrid& pattern, const RasterGrid& density) {
    if (!pattern.same_geometry(density)) {
        throw ValidationError("device_density: grid geometry mismatch");
    }
    double sum = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < pattern.values.size(); ++i) {
        if (pattern.values[i] != 0.0) {
            sum += density.values[i];
            ++count;
        }
    }
    if (count == 0) throw ValidationError("device_density: pattern is empty");
    return sum / static_cast<double>(count);
}

DeviceOutcome classify_at_dose(const ClassifyContext& ctx, const RasterGrid& unit_energy,
                               double dose, double threshold, double coverage_min,
                               double bridge_margin) {
    if (!(dose > 0.0)) throw ValidationError("classify_at_dose: dose must be positive");
    // Energy is linear in the base dose, so develop against threshold/dose.
    const RasterGrid developed = develop(unit_energy, threshold / dose);
    return classify_outcome(ctx, developed, coverage_min, bridge_margin);
}

OnsetSweepResult measure_onset(const ClassifyContext& ctx, const RasterGrid& unit_energy,
                               const std::vector<double>& doses, double threshold,
                               double coverage_min) {
    if (!unit_energy.same_geometry(ctx.design_raster)) {
        throw ValidationError("measure_onset: energy grid geometry mismatch");
    }
    // Sorted unit energies per rect: coverage at dose D is the fraction of the
    // rect's pixels with energy >= threshold/D, a binary search per rect.
    std::vector<std::vector<double>> sorted(ctx.rect_pixels.size());
    for (std::size_t ri = 0; ri < ctx.rect_pixels.size(); ++ri) {
        sorted[ri].reserve(ctx.rect_pixels[ri].size());
        for (int p : ctx.rect_pixels[ri]) sorted[ri].push_back(unit_energy.values[p]);
        std::sort(sorted[ri].begin(), sorted[ri].end());
    }
    OnsetSweepResult res;
    res.doses = doses;
    res.f_under.reserve(doses.size());
    for (double d : doses) {
        if (!(d > 0.0)) throw ValidationError("measure_onset: doses must be positive");
        const double level = threshold / d;
        bool under = false;
        for (const auto& e : sorted) {
            const auto it = std::lower_bound(e.begin(), e.end(), level);
            const auto covered = static_cast<double>(e.end() - it);
            if (covered < coverage_min * static_cast<double>(e.size())) {
                under = true;
                break;
            }
        }
        res.f_under.push_back(under ? 1.0 : 0.0);
    }
    res.onset = onset_from_counts(res.doses, res.f_under);
    return res;
}

}  // namespace peclab
