#pragma once

#include <optional>
#include <vector>

#include "peclab/fieldkernel.hpp"
#include "peclab/virtualfab.hpp"

namespace peclab {

/// Onset dose versus local pattern density:
///   D_l(rho, eta) = A * (1 + eta) / (1 + 2 * rho * eta)
/// A is the baseline dose at half filling; the large-eta limit is A/(2*rho).
double dl_model(double rho, double eta, double a);

struct OnsetPoint {
    double rho = 0.0;  // local pattern density, in (0,1)
    double dl = 0.0;   // onset dose, mC/cm^2
};

inline constexpr double kEtaMax = 1e6;

struct EtaFit {
    double eta = 0.0;
    double a = 0.0;           // baseline dose at half filling
    double r_squared = 0.0;   // on unweighted residuals
    int n_points = 0;
    std::vector<double> robust_weights;
    bool eta_clamped = false;  // optimum hit the [0, kEtaMax] box
    bool converged = true;
    int iterations = 0;
};

/// Largest non-increasing projection (pool adjacent violators, L2).
std::vector<double> isotonic_non_increasing(const std::vector<double>& y);

/// 50% crossing of the underexposed fraction versus dose, after projecting
/// f_u onto a non-increasing shape. Returns nothing when the projected curve
/// never reaches both sides of 0.5.
std::optional<double> onset_from_counts(const std::vector<double>& doses,
                                        const std::vector<double>& f_under);

/// Robust fit of the onset-dose model. Two points invert in closed form;
/// more points run Huber-weighted iteratively-reweighted Gauss-Newton on
/// relative residuals (the noise on onset doses is multiplicative). The Huber
/// scale is 1.345 x median absolute (relative) residual, re-estimated each
/// iteration. A negative-eta optimum is clamped to 0 and flagged.
EtaFit fit_eta(const std::vector<OnsetPoint>& points);

/// The iterative path with explicit initialization, exposed so tests can
/// cross-check it against the two-point closed form.
EtaFit fit_eta_irls(const std::vector<OnsetPoint>& points, double eta0, double a0);

struct RefineOptions {
    double target_energy = 0.0;  // development threshold x safety factor
    double damping = 0.7;        // exponent on the per-pixel correction ratio
    double tolerance = 1e-3;     // max relative energy deviation on pattern pixels
    int max_iterations = 50;
};

struct DoseMapResult {
    RasterGrid multipliers;  // 1 off-pattern
    bool refined = false;
    bool converged = true;
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> residual_history;
};

/// Density-rule dose multipliers m = (1+eta)/(1+2*eta*rho(x)) on pattern
/// pixels. With refine, a damped fixed point m <- m*(E_target/E)^damping
/// equalizes simulated energy on the pattern; non-convergence within the
/// iteration cap is reported in the result, not thrown.
/// Requires eta to match psf.eta (the correction PSF carries the fitted eta).
/// A precomputed local_density grid may be passed to avoid recomputing it.
DoseMapResult dose_multiplier_map(const RasterGrid& pattern, double eta, const PsfParams& psf,
                                  bool refine, const RefineOptions& opts = {},
                                  const RasterGrid* precomputed_density = nullptr);

struct FlatnessReport {
    double ratio_max_min = 0.0;
    double mean = 0.0;
    double max_deviation = 0.0;  // max |D_l - mean|
};

FlatnessReport flatness_report(const std::vector<OnsetPoint>& onsets);

/// Mean local density over the pattern's set pixels: the rho assigned to a
/// simulated device.
double device_density(const RasterGrid& pattern, const RasterGrid& density);

DeviceOutcome classify_at_dose(const ClassifyContext& ctx, const RasterGrid& unit_energy,
                               double dose, double threshold, double coverage_min = 0.5,
                               double bridge_margin = 0.2);

struct OnsetSweepResult {
    std::vector<double> doses;
    std::vector<double> f_under;  // 0/1 per dose for one deterministic device
    std::optional<double> onset;
};

/// Dose sweep of one device using linearity of the exposure in the base dose:
/// unit_energy is the energy at base dose 1 (including any multiplier map).
/// Underexposure depends only on per-rect coverage, so the sweep works from
/// sorted per-rect energies instead of re-classifying the full grid.
OnsetSweepResult measure_onset(const ClassifyContext& ctx, const RasterGrid& unit_energy,
                               const std::vector<double>& doses, double threshold,
                               double coverage_min = 0.5);

}  // namespace peclab
