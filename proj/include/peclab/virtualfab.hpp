#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "peclab/components.hpp"
#include "peclab/fieldkernel.hpp"
#include "peclab/raster.hpp"

namespace peclab {

/// Outcome taxonomy. The simulator emits the first three; the remaining labels
/// arrive only through external label ingestion. Missing and Merged map onto
/// Underexposed and Overexposed for yield arithmetic.
enum class DeviceOutcome {
    WellFormed,
    Underexposed,
    Overexposed,
    Missing,
    Merged,
    Contamination,
    Collapse,
};

const char* to_string(DeviceOutcome o);
DeviceOutcome outcome_from_string(const std::string& s);

inline bool counts_as_underexposed(DeviceOutcome o) {
    return o == DeviceOutcome::Underexposed || o == DeviceOutcome::Missing;
}
inline bool counts_as_overexposed(DeviceOutcome o) {
    return o == DeviceOutcome::Overexposed || o == DeviceOutcome::Merged;
}
inline bool is_yield(DeviceOutcome o) { return o == DeviceOutcome::WellFormed; }

/// One point in the five-factor process space.
struct DesignPoint {
    double dose = 1.0;      // D, mC/cm^2
    double d_hsq = 50.0;    // resist thickness, nm
    double d_al = 15.0;     // aluminum cap thickness, nm
    double t_hsq = 48.0;    // exposure delay, hr
    double t_mf312 = 2.0;   // development time, min

    std::array<double, 5> as_array() const { return {dose, d_hsq, d_al, t_hsq, t_mf312}; }

    /// Physical-domain check (positive dose, non-negative factors, finite).
    void validate_physical() const;

    std::uint64_t hash() const;
};

extern const std::array<const char*, 5> kFactorNames;  // D, d_hsq, d_al, t_hsq, t_mf312

struct FactorBounds {
    std::array<double, 5> lo{0.4, 20.0, 0.0, 10.0, 2.0};
    std::array<double, 5> hi{2.8, 80.0, 20.0, 120.0, 4.0};

    bool contains(const DesignPoint& p) const;
    void validate() const;
};

struct OutcomeProbabilities {
    double under = 0.0;
    double well = 0.0;
    double over = 0.0;
};

/// Phenomenological five-factor process response calibrated to the measured
/// yield curves: log-odds of a well-formed device are quadratic in dose with
/// 50% crossings at lower_edge/upper_edge, plus a linear aluminum-cap term and
/// a hard gate far below the working dose range.
struct FabModel {
    double dose_curvature = 2.7465307216702745;  // ln(3)/0.4
    double lower0 = 0.6, lower_dhsq = -0.004;
    double upper0 = 2.0, upper_dhsq = -0.016, upper_thsq = 0.007, upper_tmf = 0.15;
    double dal_gain = 0.9, dal_ref = 15.0;
    double gate_dose = 0.25, gate_width = 0.04;
    DesignPoint reference{};  // defaults are the reference design point

    double lower_edge(double d_hsq) const { return lower0 + lower_dhsq * (d_hsq - 50.0); }
    double upper_edge(double d_hsq, double t_hsq, double t_mf312) const {
        return upper0 + upper_dhsq * (d_hsq - 50.0) + upper_thsq * (t_hsq - 48.0) +
               upper_tmf * (t_mf312 - 2.0);
    }

    double p_well(const DesignPoint& p) const;
    OutcomeProbabilities probabilities(const DesignPoint& p) const;
};

/// Draws one outcome; deterministic in (point, seed) and independent of call order.
DeviceOutcome process_response(const FabModel& model, const DesignPoint& point,
                               std::uint64_t seed);

/// Latin-hypercube sample of the factor box: one stratum per point and axis,
/// deterministic in the seed and independent of evaluation order.
std::vector<DesignPoint> latin_hypercube_sample(const FactorBounds& bounds, long count,
                                                std::uint64_t seed);

/// Density-aware underexposure-probability generator for correction studies:
/// p_under = sigmoid((D_l(rho) - D)/width) with D_l from the onset-dose model.
double onset_dose_response(double rho, double dose, double eta_true, double a_true,
                           double width = 0.05);

/// Forward exposure model: energy = (dose * pattern) (*) PSF.
RasterGrid simulate_exposure(const RasterGrid& pattern, double dose, const PsfParams& psf);
RasterGrid simulate_exposure(const RasterGrid& pattern, const RasterGrid& dose,
                             const PsfParams& psf);

/// Negative-tone development: resist remains where energy >= threshold.
RasterGrid develop(const RasterGrid& energy, double threshold);

/// Precomputed per-layout state for repeated classification in dose sweeps.
struct ClassifyContext {
    Layout design;
    RasterGrid design_raster;
    std::vector<std::vector<int>> rect_pixels;   // per design rect, pixel indices
    std::vector<int> design_component_of_pixel;  // -1 where design is empty
    int design_component_count = 0;
    long design_pixel_count = 0;

    ClassifyContext(const Layout& layout, const RasterGrid& grid_geometry);
};

/// Geometric reinterpretation of the failure taxonomy. Underexposed if any
/// design rect is covered below coverage_min (this takes precedence); else
/// Overexposed if one developed region spans two design regions that are
/// disjoint in the design, or if developed-minus-design area exceeds
/// bridge_margin of the design area; else WellFormed.
DeviceOutcome classify_outcome(const Layout& design, const RasterGrid& developed,
                               double coverage_min = 0.5, double bridge_margin = 0.2);
DeviceOutcome classify_outcome(const ClassifyContext& ctx, const RasterGrid& developed,
                               double coverage_min = 0.5, double bridge_margin = 0.2);

/// Deposited energy, developed resist and the classified outcome.
struct ExposureResult {
    RasterGrid energy;
    RasterGrid developed;
    DeviceOutcome outcome = DeviceOutcome::Underexposed;
};

ExposureResult expose_and_classify(const Layout& design, double pixel_size, double margin_nm,
                                   double dose, const PsfParams& psf, double threshold,
                                   double coverage_min = 0.5, double bridge_margin = 0.2);

}  // namespace peclab
