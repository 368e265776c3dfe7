#include "peclab/yieldsurface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "peclab/errors.hpp"
#include "peclab/linalg.hpp"
#include "peclab/rng.hpp"

namespace peclab {

namespace {
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}
}  // namespace

FeatureSpec FeatureSpec::fit(const std::vector<DesignPoint>& points) {
    if (points.empty()) throw ValidationError("FeatureSpec::fit: no points");
    FeatureSpec spec;
    spec.mean.fill(0.0);
    for (const DesignPoint& p : points) {
        const auto a = p.as_array();
        for (int i = 0; i < 5; ++i) spec.mean[i] += a[i];
    }
    for (int i = 0; i < 5; ++i) spec.mean[i] /= static_cast<double>(points.size());
    std::array<double, 5> var{};
    for (const DesignPoint& p : points) {
        const auto a = p.as_array();
        for (int i = 0; i < 5; ++i) var[i] += (a[i] - spec.mean[i]) * (a[i] - spec.mean[i]);
    }
    for (int i = 0; i < 5; ++i) {
        const double sd = std::sqrt(var[i] / static_cast<double>(points.size()));
        spec.scale[i] = sd > 1e-12 ? sd : 1.0;  // constant factors stay centered at zero
    }
    return spec;
}

void FeatureSpec::validate() const {
    for (int i = 0; i < 5; ++i) {
        if (!std::isfinite(mean[i]) || !(scale[i] > 0.0) || !std::isfinite(scale[i])) {
            throw ValidationError("feature spec: standardization constants invalid");
        }
    }
}

std::array<double, kFeatureCount> FeatureSpec::featurize(const DesignPoint& p) const {
    validate();
    const auto a = p.as_array();
    std::array<double, 5> z;
    for (int i = 0; i < 5; ++i) {
        if (!std::isfinite(a[i])) throw ValidationError("featurize: non-finite factor");
        z[i] = (a[i] - mean[i]) / scale[i];
    }
    std::array<double, kFeatureCount> f{};
    int k = 0;
    for (int i = 0; i < 5; ++i) f[k++] = z[i];
    for (int i = 0; i < 5; ++i) f[k++] = z[i] * z[i];
    for (int i = 0; i < 5; ++i) {
        for (int j = i + 1; j < 5; ++j) f[k++] = z[i] * z[j];
    }
    return f;
}

double LogisticModel::linear_predictor(const DesignPoint& p) const {
    const auto f = features.featurize(p);
    double s = intercept;
    for (int i = 0; i < kFeatureCount; ++i) s += weights[i] * f[i];
    return s;
}

double predict_yield(const LogisticModel& model, const DesignPoint& p) {
    return sigmoid(model.linear_predictor(p));
}

LogisticModel fit_logistic(const std::vector<LabeledPoint>& points, double ridge) {
    const std::size_t n = points.size();
    const int dim = kFeatureCount + 1;  // + intercept
    if (n < 10 * static_cast<std::size_t>(kFeatureCount)) {
        throw ValidationError("fit_logistic: need at least " +
                              std::to_string(10 * kFeatureCount) + " points for " +
                              std::to_string(kFeatureCount) + " features, got " +
                              std::to_string(n));
    }
    std::size_t positives = 0;
    for (const LabeledPoint& lp : points) positives += lp.yield ? 1 : 0;
    if (positives == 0 || positives == n) {
        throw ValidationError("fit_logistic: training data contains a single class");
    }
    if (!(ridge >= 0.0)) throw ValidationError("fit_logistic: ridge must be >= 0");

    std::vector<DesignPoint> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = points[i].point;
    LogisticModel model;
    model.features = FeatureSpec::fit(raw);
    model.ridge = ridge;

    std::vector<double> X(n * kFeatureCount);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = model.features.featurize(points[i].point);
        std::copy(f.begin(), f.end(), X.begin() + i * kFeatureCount);
        y[i] = points[i].yield ? 1.0 : 0.0;
    }

    std::vector<double> w(dim, 0.0);  // [weights..., intercept]
    std::vector<double> p(n), grad(dim), hess(dim * dim);

    auto predict_all = [&](const std::vector<double>& coef) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = coef[dim - 1];
            const double* xi = X.data() + i * kFeatureCount;
            for (int j = 0; j < kFeatureCount; ++j) s += coef[j] * xi[j];
            p[i] = sigmoid(s);
        }
    };
    auto penalized_nll = [&](const std::vector<double>& coef) {
        double nll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = coef[dim - 1];
            const double* xi = X.data() + i * kFeatureCount;
            for (int j = 0; j < kFeatureCount; ++j) s += coef[j] * xi[j];
            // log(1 + e^s) - y*s, stably
            nll += (s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s))) - y[i] * s;
        }
        double pen = 0.0;
        for (int j = 0; j < kFeatureCount; ++j) pen += coef[j] * coef[j];
        return nll + 0.5 * ridge * pen;
    };

    const double tol = 1e-8;
    const int max_iter = 200;
    int it = 0;
    double gmax = 0.0;
    for (; it < max_iter; ++it) {
        predict_all(w);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = p[i] - y[i];
            const double* xi = X.data() + i * kFeatureCount;
            for (int j = 0; j < kFeatureCount; ++j) grad[j] += r * xi[j];
            grad[dim - 1] += r;
        }
        for (int j = 0; j < kFeatureCount; ++j) grad[j] += ridge * w[j];
        gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::fabs(g));
        if (gmax < tol) break;

        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double wt = std::max(p[i] * (1.0 - p[i]), 1e-10);
            const double* xi = X.data() + i * kFeatureCount;
            for (int a = 0; a < kFeatureCount; ++a) {
                const double wa = wt * xi[a];
                for (int b = a; b < kFeatureCount; ++b) hess[a * dim + b] += wa * xi[b];
                hess[a * dim + (dim - 1)] += wa;
            }
            hess[(dim - 1) * dim + (dim - 1)] += wt;
        }
        for (int j = 0; j < kFeatureCount; ++j) hess[j * dim + j] += ridge;
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < a; ++b) hess[a * dim + b] = hess[b * dim + a];
        }

        std::vector<double> rhs(dim);
        for (int j = 0; j < dim; ++j) rhs[j] = -grad[j];
        const std::vector<double> step = cholesky_solve(hess, rhs);

        const double f0 = penalized_nll(w);
        double slope = 0.0;
        for (int j = 0; j < dim; ++j) slope += grad[j] * step[j];
        double t = 1.0;
        std::vector<double> trial(dim);
        for (int ls = 0; ls < 50; ++ls) {
            for (int j = 0; j < dim; ++j) trial[j] = w[j] + t * step[j];
            if (penalized_nll(trial) <= f0 + 1e-4 * t * slope) break;
            t *= 0.5;
        }
        for (int j = 0; j < dim; ++j) w[j] += t * step[j];
    }

    std::copy(w.begin(), w.begin() + kFeatureCount, model.weights.begin());
    model.intercept = w[dim - 1];
    model.iterations = it;
    model.grad_norm = gmax;
    model.converged = gmax < tol;
    model.n_train = static_cast<int>(n);
    return model;
}

HoldoutFit fit_logistic_holdout(const std::vector<LabeledPoint>& points, double ridge,
                                std::uint64_t seed, double holdout_fraction) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw ValidationError("fit_logistic_holdout: fraction must lie in (0,1)");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng = derived_stream(seed, 0x686F6C64ULL);  // "hold"
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_hold = static_cast<std::size_t>(points.size() * holdout_fraction);
    std::vector<LabeledPoint> train, hold;
    train.reserve(points.size() - n_hold);
    hold.reserve(n_hold);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_hold ? hold : train).push_back(points[order[i]]);
    }

    const LogisticModel trained = fit_logistic(train, ridge);
    std::size_t correct = 0;
    for (const LabeledPoint& lp : hold) {
        const bool pred = predict_yield(trained, lp.point) >= 0.5;
        correct += (pred == lp.yield);
    }
    HoldoutFit out;
    out.accuracy = hold.empty() ? 0.0 : static_cast<double>(correct) / hold.size();
    out.n_train = static_cast<int>(train.size());
    out.n_holdout = static_cast<int>(hold.size());
    out.model = fit_logistic(points, ridge);
    out.model.holdout_accuracy = out.accuracy;
    out.model.n_train = out.n_train;
    out.model.n_holdout = out.n_holdout;
    return out;
}

int axis_index(const std::string& name) {
    for (int i = 0; i < 5; ++i) {
        if (name == kFactorNames[i]) return i;
    }
    std::string valid;
    for (int i = 0; i < 5; ++i) {
        valid += kFactorNames[i];
        if (i < 4) valid += ", ";
    }
    throw ValidationError("unknown factor axis '" + name + "'; valid axes: " + valid);
}

namespace {
DesignPoint with_factor(DesignPoint p, int axis, double value) {
    switch (axis) {
        case 0: p.dose = value; break;
        case 1: p.d_hsq = value; break;
        case 2: p.d_al = value; break;
        case 3: p.t_hsq = value; break;
        case 4: p.t_mf312 = value; break;
        default: throw ValidationError("factor axis out of range");
    }
    return p;
}
}  // namespace

YieldCurve yield_section(const LogisticModel& model, int axis, const DesignPoint& fixed,
                         double lo, double hi, int n_samples) {
    if (axis < 0 || axis > 4) throw ValidationError("yield_section: axis out of range");
    if (n_samples < 2) throw ValidationError("yield_section: need at least 2 samples");
    if (!(hi > lo)) throw ValidationError("yield_section: empty range");
    YieldCurve curve;
    curve.axis = axis;
    curve.fixed = fixed;
    curve.samples.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double v = lo + (hi - lo) * static_cast<double>(i) / (n_samples - 1);
        curve.samples.emplace_back(v, predict_yield(model, with_factor(fixed, axis, v)));
    }
    return curve;
}

WindowResult process_window(const YieldCurve& curve, double level) {
    if (curve.axis != 0) {
        throw ValidationError("process_window: curve axis must be dose (D)");
    }
    if (curve.samples.size() < 2) throw ValidationError("process_window: need >= 2 samples");
    WindowResult res;
    const auto& s = curve.samples;

    bool any_above = false;
    for (const auto& [x, f] : s) any_above = any_above || f >= level;
    if (!any_above) return res;  // curve never reaches the level

    std::vector<double> up, down;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double f0 = s[i].second, f1 = s[i + 1].second;
        if (f0 < level && f1 >= level) {
            const double t = (level - f0) / (f1 - f0);
            up.push_back(s[i].first + t * (s[i + 1].first - s[i].first));
        } else if (f0 >= level && f1 < level) {
            const double t = (f0 - level) / (f0 - f1);
            down.push_back(s[i].first + t * (s[i + 1].first - s[i].first));
        }
    }
    res.crossings = up;
    res.crossings.insert(res.crossings.end(), down.begin(), down.end());
    std::sort(res.crossings.begin(), res.crossings.end());

    // Count super-level intervals to flag ambiguity.
    int intervals = 0;
    bool in = false;
    for (const auto& [x, f] : s) {
        const bool above = f >= level;
        if (above && !in) ++intervals;
        in = above;
    }
    res.ambiguous = intervals > 1;

    ProcessWindow w;
    w.dl = up.empty() ? s.front().first : up.front();
    w.du = down.empty() ? s.back().first : down.back();
    w.latitude = w.du - w.dl;
    res.window = w;
    return res;
}

std::optional<Recommendation> recommend_window(const LogisticModel& model, double level,
                                               const GridSpec& grid) {
    grid.bounds.validate();
    if (grid.samples_per_axis < 2) throw ValidationError("recommend_window: grid too coarse");
    const int m = grid.samples_per_axis;
    auto grid_value = [&](int axis, int k) {
        return grid.bounds.lo[axis] +
               (grid.bounds.hi[axis] - grid.bounds.lo[axis]) * static_cast<double>(k) / (m - 1);
    };

    // Coordinate-wise ascent from the grid midpoint; deterministic tie-break
    // toward the lower index.
    std::array<int, 5> at;
    at.fill(m / 2);
    auto point_at = [&](const std::array<int, 5>& idx) {
        DesignPoint p;
        for (int ax = 0; ax < 5; ++ax) p = with_factor(p, ax, grid_value(ax, idx[ax]));
        return p;
    };
    double best = predict_yield(model, point_at(at));
    for (int pass = 0; pass < 20; ++pass) {
        bool moved = false;
        for (int ax = 0; ax < 5; ++ax) {
            int best_k = at[ax];
            double best_f = best;
            for (int k = 0; k < m; ++k) {
                auto idx = at;
                idx[ax] = k;
                const double f = predict_yield(model, point_at(idx));
                if (f > best_f + 1e-15) {
                    best_f = f;
                    best_k = k;
                }
            }
            if (best_k != at[ax]) {
                at[ax] = best_k;
                best = best_f;
                moved = true;
            }
        }
        if (!moved) break;
    }
    if (best < level) return std::nullopt;

    Recommendation rec;
    rec.best = point_at(at);
    rec.best_yield = best;
    for (int ax = 0; ax < 5; ++ax) {
        int lo = at[ax], hi = at[ax];
        while (lo > 0) {
            auto idx = at;
            idx[ax] = lo - 1;
            if (predict_yield(model, point_at(idx)) < level) break;
            --lo;
        }
        while (hi < m - 1) {
            auto idx = at;
            idx[ax] = hi + 1;
            if (predict_yield(model, point_at(idx)) < level) break;
            ++hi;
        }
        rec.intervals[ax] = std::make_pair(grid_value(ax, lo), grid_value(ax, hi));
    }
    return rec;
}

}  // namespace peclab
