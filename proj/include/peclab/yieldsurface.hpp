#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peclab/virtualfab.hpp"

namespace peclab {

inline constexpr int kFeatureCount = 20;  // 5 linear + 5 squares + 10 interactions

/// Standardization constants plus the fixed quadratic expansion order:
/// z_0..z_4, z_i^2 (i ascending), then z_i*z_j for i<j lexicographic.
struct FeatureSpec {
    std::array<double, 5> mean{};
    std::array<double, 5> scale{1, 1, 1, 1, 1};

    static FeatureSpec fit(const std::vector<DesignPoint>& points);

    std::array<double, kFeatureCount> featurize(const DesignPoint& p) const;
    void validate() const;
};

struct LogisticModel {
    FeatureSpec features;
    std::array<double, kFeatureCount> weights{};
    double intercept = 0.0;

    // fit metadata
    double ridge = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    double holdout_accuracy = -1.0;  // negative when not evaluated
    int n_train = 0;
    int n_holdout = 0;

    double linear_predictor(const DesignPoint& p) const;
};

struct LabeledPoint {
    DesignPoint point;
    bool yield = false;  // WellFormed vs everything else
};

/// Ridge-penalized maximum likelihood by damped Newton iterations (the
/// intercept is not penalized). Converged when the gradient max-norm drops
/// below 1e-8, capped at 200 iterations; non-convergence is recorded on the
/// model, single-class data is rejected.
LogisticModel fit_logistic(const std::vector<LabeledPoint>& points, double ridge = 1e-3);

struct HoldoutFit {
    LogisticModel model;      // refit on the full set after validation
    double accuracy = 0.0;    // of the train-split model on the holdout split
    int n_train = 0;
    int n_holdout = 0;
};

/// Seeded 80/20 split, accuracy on the held-out fifth, then a refit on all
/// points so downstream sections use every label.
HoldoutFit fit_logistic_holdout(const std::vector<LabeledPoint>& points, double ridge,
                                std::uint64_t seed, double holdout_fraction = 0.2);

double predict_yield(const LogisticModel& model, const DesignPoint& p);

int axis_index(const std::string& name);  // rejects unknown names, listing the five factors

struct YieldCurve {
    int axis = 0;
    DesignPoint fixed;
    std::vector<std::pair<double, double>> samples;  // (factor value, f)
};

YieldCurve yield_section(const LogisticModel& model, int axis, const DesignPoint& fixed,
                         double lo, double hi, int n_samples);

struct ProcessWindow {
    double dl = 0.0;
    double du = 0.0;
    double latitude = 0.0;  // du - dl
};

struct WindowResult {
    std::optional<ProcessWindow> window;
    std::vector<double> crossings;  // every level crossing, ascending
    bool ambiguous = false;         // more than one super-level interval
};

/// Lower edge = first upward crossing of `level`, upper edge = last downward
/// crossing, linearly interpolated between samples. Requires a dose-axis curve.
WindowResult process_window(const YieldCurve& curve, double level = 0.5);

struct GridSpec {
    FactorBounds bounds;
    int samples_per_axis = 21;
};

struct Recommendation {
    DesignPoint best;
    double best_yield = 0.0;
    std::array<std::optional<std::pair<double, double>>, 5> intervals;
};

/// Coordinate-wise ascent on the grid to the model optimum, then per factor
/// the widest contiguous grid interval around the optimum whose 1-D section
/// stays at or above `level`. Returns nothing if no grid point reaches level.
std::optional<Recommendation> recommend_window(const LogisticModel& model, double level,
                                               const GridSpec& grid);

}  // namespace peclab
