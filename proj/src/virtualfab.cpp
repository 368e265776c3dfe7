#include "peclab/virtualfab.hpp"

#include <algorithm>
#include <cmath>

#include "peclab/errors.hpp"
#include "peclab/pec.hpp"
#include "peclab/rng.hpp"

namespace peclab {

const std::array<const char*, 5> kFactorNames = {"D", "d_hsq", "d_al", "t_hsq", "t_mf312"};

const char* to_string(DeviceOutcome o) {
    switch (o) {
        case DeviceOutcome::WellFormed: return "WellFormed";
        case DeviceOutcome::Underexposed: return "Underexposed";
        case DeviceOutcome::Overexposed: return "Overexposed";
        case DeviceOutcome::Missing: return "Missing";
        case DeviceOutcome::Merged: return "Merged";
        case DeviceOutcome::Contamination: return "Contamination";
        case DeviceOutcome::Collapse: return "Collapse";
    }
    return "WellFormed";
}

DeviceOutcome outcome_from_string(const std::string& s) {
    static const std::array<DeviceOutcome, 7> all = {
        DeviceOutcome::WellFormed,   DeviceOutcome::Underexposed, DeviceOutcome::Overexposed,
        DeviceOutcome::Missing,      DeviceOutcome::Merged,       DeviceOutcome::Contamination,
        DeviceOutcome::Collapse};
    for (DeviceOutcome o : all) {
        if (s == to_string(o)) return o;
    }
    throw ValidationError("unknown device outcome '" + s + "'");
}

void DesignPoint::validate_physical() const {
    for (double v : as_array()) {
        if (!std::isfinite(v)) throw ValidationError("design point has non-finite factor");
    }
    if (!(dose > 0.0)) throw ValidationError("design point: dose must be positive");
    if (!(d_hsq > 0.0)) throw ValidationError("design point: resist thickness must be positive");
    if (d_al < 0.0) throw ValidationError("design point: cap thickness must be >= 0");
    if (t_hsq < 0.0) throw ValidationError("design point: exposure delay must be >= 0");
    if (!(t_mf312 > 0.0)) throw ValidationError("design point: development time must be positive");
}

std::uint64_t DesignPoint::hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (double v : as_array()) h = fnv1a_double(v, h);
    return h;
}

bool FactorBounds::contains(const DesignPoint& p) const {
    const auto a = p.as_array();
    for (int i = 0; i < 5; ++i) {
        if (a[i] < lo[i] || a[i] > hi[i]) return false;
    }
    return true;
}

void FactorBounds::validate() const {
    for (int i = 0; i < 5; ++i) {
        if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
            throw ValidationError(std::string("factor bounds invalid for ") + kFactorNames[i]);
        }
    }
}

namespace {
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}
}  // namespace

double FabModel::p_well(const DesignPoint& p) const {
    const double L = lower_edge(p.d_hsq);
    const double U = upper_edge(p.d_hsq, p.t_hsq, p.t_mf312);
    const double g = dose_curvature * (p.dose - L) * (U - p.dose) + dal_gain * (p.d_al - dal_ref);
    return sigmoid(g) * sigmoid((p.dose - gate_dose) / gate_width);
}

OutcomeProbabilities FabModel::probabilities(const DesignPoint& p) const {
    p.validate_physical();
    OutcomeProbabilities out;
    out.well = p_well(p);
    const double L = std::max(lower_edge(p.d_hsq), 1e-3);
    const double U = std::max(upper_edge(p.d_hsq, p.t_hsq, p.t_mf312), L + 1e-3);
    const double split = std::sqrt(L * U);  // residual: underexposed below, overexposed above
    if (p.dose < split) {
        out.under = 1.0 - out.well;
        out.over = 0.0;
    } else {
        out.under = 0.0;
        out.over = 1.0 - out.well;
    }
    return out;
}

DeviceOutcome process_response(const FabModel& model, const DesignPoint& point,
                               std::uint64_t seed) {
    const OutcomeProbabilities p = model.probabilities(point);
    SplitMix64 stream(mix_u64(seed, point.hash()));
    const double u = stream.next_double();
    if (u < p.under) return DeviceOutcome::Underexposed;
    if (u < p.under + p.well) return DeviceOutcome::WellFormed;
    return DeviceOutcome::Overexposed;
}

std::vector<DesignPoint> latin_hypercube_sample(const FactorBounds& bounds, long count,
                                                std::uint64_t seed) {
    bounds.validate();
    if (count < 1) throw ValidationError("latin_hypercube_sample: count must be >= 1");
    std::array<std::vector<long>, 5> perms;
    for (int d = 0; d < 5; ++d) {
        perms[d].resize(count);
        for (long i = 0; i < count; ++i) perms[d][i] = i;
        SplitMix64 rng = derived_stream(seed, 0x4C485321ULL + d);
        for (long i = count; i > 1; --i) {
            const long j = static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(i));
            std::swap(perms[d][i - 1], perms[d][j]);
        }
    }
    std::vector<DesignPoint> points(count);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
        std::array<double, 5> v{};
        for (int d = 0; d < 5; ++d) {
            SplitMix64 cell = derived_stream(
                seed, 0xCE11ULL ^ (static_cast<std::uint64_t>(d) << 40) ^
                          static_cast<std::uint64_t>(i));
            const double u = (static_cast<double>(perms[d][i]) + cell.next_double()) /
                             static_cast<double>(count);
            v[d] = bounds.lo[d] + u * (bounds.hi[d] - bounds.lo[d]);
        }
        points[i] = DesignPoint{v[0], v[1], v[2], v[3], v[4]};
    }
    return points;
}

double onset_dose_response(double rho, double dose, double eta_true, double a_true,
                           double width) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw ValidationError("onset_dose_response: rho must lie in (0,1)");
    }
    if (!(width > 0.0)) throw ValidationError("onset_dose_response: width must be positive");
    const double dl = dl_model(rho, eta_true, a_true);
    return sigmoid((dl - dose) / width);
}

RasterGrid simulate_exposure(const RasterGrid& pattern, double dose, const PsfParams& psf) {
    if (!(dose >= 0.0) || !std::isfinite(dose)) {
        throw ValidationError("simulate_exposure: dose must be >= 0");
    }
    if (!pattern.is_binary()) throw ValidationError("simulate_exposure: pattern must be binary");
    RasterGrid dosed = pattern;
    for (double& v : dosed.values) v *= dose;
    const Kernel k = make_psf_kernel(psf, pattern.pixel_size);
    return convolve(dosed, k);
}

RasterGrid simulate_exposure(const RasterGrid& pattern, const RasterGrid& dose,
                             const PsfParams& psf) {
    if (!pattern.is_binary()) throw ValidationError("simulate_exposure: pattern must be binary");
    if (!pattern.same_geometry(dose)) {
        throw ValidationError("simulate_exposure: dose grid geometry does not match pattern");
    }
    RasterGrid dosed = pattern;
    for (std::size_t i = 0; i < dosed.values.size(); ++i) {
        const double d = dose.values[i];
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw ValidationError("simulate_exposure: dose must be >= 0 everywhere");
        }
        dosed.values[i] *= d;
    }
    const Kernel k = make_psf_kernel(psf, pattern.pixel_size);
    return convolve(dosed, k);
}

RasterGrid develop(const RasterGrid& energy, double threshold) {
    if (!(threshold > 0.0)) throw ValidationError("develop: threshold must be positive");
    RasterGrid out = energy;
    for (double& v : out.values) v = (v >= threshold) ? 1.0 : 0.0;
    return out;
}

ClassifyContext::ClassifyContext(const Layout& layout, const RasterGrid& grid_geometry)
    : design(layout) {
    design.validate();
    RasterGrid raster(grid_geometry.width, grid_geometry.height, grid_geometry.pixel_size,
                      grid_geometry.origin_x, grid_geometry.origin_y);
    rect_pixels.resize(design.rects.size());
    for (std::size_t ri = 0; ri < design.rects.size(); ++ri) {
        const Rect& r = design.rects[ri];
        std::vector<int>& px = rect_pixels[ri];
        for (int iy = 0; iy < raster.height; ++iy) {
            const double cy = raster.center_y(iy);
            if (cy < r.y || cy >= r.y + r.h) continue;
            for (int ix = 0; ix < raster.width; ++ix) {
                if (r.contains(raster.center_x(ix), cy)) {
                    px.push_back(static_cast<int>(raster.idx(ix, iy)));
                    raster.values[raster.idx(ix, iy)] = 1.0;
                }
            }
        }
        if (px.empty()) {
            throw ValidationError("classify_outcome: rect " + std::to_string(ri) +
                                  " covers no pixel centers on this grid");
        }
    }
    design_raster = std::move(raster);
    for (double v : design_raster.values) design_pixel_count += (v != 0.0);

    const std::vector<Component> comps = connected_components(design_raster);
    design_component_count = static_cast<int>(comps.size());
    design_component_of_pixel.assign(design_raster.size(), -1);
    for (const Component& c : comps) {
        for (int p : c.pixels) design_component_of_pixel[p] = c.id;
    }
}

DeviceOutcome classify_outcome(const ClassifyContext& ctx, const RasterGrid& developed,
                               double coverage_min, double bridge_margin) {
    if (!developed.same_geometry(ctx.design_raster)) {
        throw ValidationError("classify_outcome: developed grid geometry mismatch");
    }

    // Underexposure takes precedence: a missing gate is fatal regardless of bridging.
    for (const auto& px : ctx.rect_pixels) {
        long covered = 0;
        for (int p : px) covered += (developed.values[p] != 0.0);
        if (static_cast<double>(covered) < coverage_min * static_cast<double>(px.size())) {
            return DeviceOutcome::Underexposed;
        }
    }

    const std::vector<Component> dev_comps = connected_components(developed);
    for (const Component& c : dev_comps) {
        int first = -1;
        for (int p : c.pixels) {
            const int dc = ctx.design_component_of_pixel[p];
            if (dc < 0) continue;
            if (first < 0) first = dc;
            else if (dc != first) return DeviceOutcome::Overexposed;  // bridged design regions
        }
    }

    long excess = 0;
    for (std::size_t i = 0; i < developed.values.size(); ++i) {
        excess += (developed.values[i] != 0.0 && ctx.design_raster.values[i] == 0.0);
    }
    if (static_cast<double>(excess) >
        bridge_margin * static_cast<double>(ctx.design_pixel_count)) {
        return DeviceOutcome::Overexposed;
    }
    return DeviceOutcome::WellFormed;
}

DeviceOutcome classify_outcome(const Layout& design, const RasterGrid& developed,
                               double coverage_min, double bridge_margin) {
    ClassifyContext ctx(design, developed);
    return classify_outcome(ctx, developed, coverage_min, bridge_margin);
}

ExposureResult expose_and_classify(const Layout& design, double pixel_size, double margin_nm,
                                   double dose, const PsfParams& psf, double threshold,
                                   double coverage_min, double bridge_margin) {
    ExposureResult res;
    const RasterGrid pattern = rasterize(design, pixel_size, margin_nm);
    res.energy = simulate_exposure(pattern, dose, psf);
    res.developed = develop(res.energy, threshold);
    res.outcome = classify_outcome(design, res.developed, coverage_min, bridge_margin);
    return res;
}

}  // namespace peclab
