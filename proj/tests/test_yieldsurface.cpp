#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "peclab/errors.hpp"
#include "peclab/rng.hpp"
#include "peclab/virtualfab.hpp"
#include "peclab/yieldsurface.hpp"

using namespace peclab;

namespace {

std::vector<LabeledPoint> generator_dataset(long count, std::uint64_t seed) {
    const FabModel fab;
    FactorBounds bounds;
    const auto pts = latin_hypercube_sample(bounds, count, seed);
    std::vector<LabeledPoint> labeled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        labeled[i].point = pts[i];
        labeled[i].yield = is_yield(process_response(fab, pts[i], mix_u64(seed, 0x524F5753ULL ^ i)));
    }
    return labeled;
}

/// Replicated two-cluster toy set: `reps` failures at dose lo, `reps`
/// successes at dose hi, everything else at the reference point.
std::vector<LabeledPoint> two_cluster(double lo, double hi, int reps) {
    std::vector<LabeledPoint> pts;
    const FabModel fab;
    for (int i = 0; i < reps; ++i) {
        DesignPoint a = fab.reference;
        a.dose = lo;
        pts.push_back({a, false});
        DesignPoint b = fab.reference;
        b.dose = hi;
        pts.push_back({b, true});
    }
    return pts;
}

double crossing_of_half(const LogisticModel& m, const DesignPoint& fixed, double lo, double hi) {
    double a = lo, b = hi;
    DesignPoint p = fixed;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        p.dose = mid;
        (predict_yield(m, p) < 0.5 ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("featurize: centering, determinism, hand-checked interaction") {
    FeatureSpec spec;
    spec.mean = {1.0, 50.0, 15.0, 48.0, 2.0};
    spec.scale = {0.5, 20.0, 5.0, 30.0, 1.0};

    const DesignPoint at_mean{1.0, 50.0, 15.0, 48.0, 2.0};
    const auto f0 = spec.featurize(at_mean);
    for (int i = 0; i < 5; ++i) CHECK(f0[i] == 0.0);

    const DesignPoint p{1.7, 38.0, 11.0, 90.0, 3.2};
    const auto f1 = spec.featurize(p);
    const auto f2 = spec.featurize(p);
    CHECK(f1 == f2);

    // interaction of (D, d_al): z_D * z_dal, at index 10 + offset of pair (0,2)
    const double zd = (1.7 - 1.0) / 0.5;
    const double za = (11.0 - 15.0) / 5.0;
    // pair order: (0,1),(0,2),(0,3),(0,4),(1,2),...
    CHECK(f1[10 + 1] == doctest::Approx(zd * za).epsilon(1e-15));
    // squares sit right after the linear block
    CHECK(f1[5] == doctest::Approx(zd * zd).epsilon(1e-15));

    DesignPoint bad = p;
    bad.dose = NAN;
    CHECK_THROWS_AS(spec.featurize(bad), ValidationError);
}

TEST_CASE("fit_logistic input guards") {
    CHECK_THROWS_AS(fit_logistic(two_cluster(0.8, 1.2, 20)), ValidationError);  // < 10x features
    std::vector<LabeledPoint> single;
    const FabModel fab;
    for (int i = 0; i < 300; ++i) {
        DesignPoint p = fab.reference;
        p.dose = 0.5 + i * 0.001;
        single.push_back({p, true});
    }
    CHECK_THROWS_AS(fit_logistic(single), ValidationError);  // one class
}

TEST_CASE("separable 1-D toy: decision boundary lands between the classes") {
    std::vector<LabeledPoint> pts;
    const FabModel fab;
    SplitMix64 rng(4);
    for (int i = 0; i < 300; ++i) {
        DesignPoint p = fab.reference;
        p.dose = rng.next_in(0.5, 0.9);
        pts.push_back({p, false});
        DesignPoint q = fab.reference;
        q.dose = rng.next_in(1.1, 1.5);
        pts.push_back({q, true});
    }
    const LogisticModel m = fit_logistic(pts);
    const double cross = crossing_of_half(m, fab.reference, 0.5, 1.5);
    CHECK(cross > 0.9);
    CHECK(cross < 1.1);
}

TEST_CASE("symmetric two-cluster data puts the crossing exactly between them") {
    const LogisticModel m = fit_logistic(two_cluster(0.8, 1.2, 150));
    const FabModel fab;
    const double cross = crossing_of_half(m, fab.reference, 0.8, 1.2);
    CHECK(cross == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fit is invariant to training-set permutation") {
    auto pts = generator_dataset(1200, 21);
    const LogisticModel m1 = fit_logistic(pts);
    // deterministic shuffle
    SplitMix64 rng(555);
    for (std::size_t i = pts.size(); i > 1; --i) {
        std::swap(pts[i - 1], pts[rng.next_u64() % i]);
    }
    const LogisticModel m2 = fit_logistic(pts);
    CHECK(m1.converged);
    CHECK(m2.converged);
    for (int i = 0; i < kFeatureCount; ++i) {
        CHECK(std::fabs(m1.weights[i] - m2.weights[i]) < 1e-8);
    }
    CHECK(std::fabs(m1.intercept - m2.intercept) < 1e-8);
}

TEST_CASE("predictions are invariant to raw-factor rescaling") {
    auto pts = generator_dataset(1200, 22);
    const LogisticModel m1 = fit_logistic(pts);
    auto scaled = pts;
    for (auto& lp : scaled) lp.point.dose *= 1000.0;  // relabel dose in different units
    const LogisticModel m2 = fit_logistic(scaled);
    for (int i = 0; i < 50; ++i) {
        DesignPoint p = pts[i * 7].point;
        DesignPoint q = p;
        q.dose *= 1000.0;
        CHECK(std::fabs(predict_yield(m1, p) - predict_yield(m2, q)) < 1e-6);
    }
}

TEST_CASE("predict_yield trivials and the monotone link") {
    LogisticModel m;
    m.features.mean = {1, 50, 15, 48, 2};
    m.features.scale = {1, 20, 6, 30, 1};
    CHECK(predict_yield(m, DesignPoint{}) == doctest::Approx(0.5));
    m.intercept = 30.0;
    CHECK(predict_yield(m, DesignPoint{}) > 0.999999);

    // strictly increasing in the linear predictor
    m.intercept = 0.0;
    m.weights[0] = 1.0;
    double prev = -1.0;
    for (double d = 0.5; d <= 3.0; d += 0.25) {
        DesignPoint p{d, 50, 15, 48, 2};
        const double f = predict_yield(m, p);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("generator round trip: accuracy, reference prediction, dose window") {
    const auto pts = generator_dataset(5000, 7);
    const HoldoutFit fit = fit_logistic_holdout(pts, 1e-3, 7);
    CHECK(fit.n_holdout == 1000);
    CHECK(fit.accuracy >= 0.90);
    CHECK(fit.model.converged);

    const FabModel fab;
    const double at_ref = predict_yield(fit.model, fab.reference);
    CHECK(at_ref == doctest::Approx(0.75).epsilon(0.07 / 0.75));

    const YieldCurve curve = yield_section(fit.model, 0, fab.reference, 0.4, 2.8, 481);
    const WindowResult win = process_window(curve, 0.5);
    REQUIRE(win.window.has_value());
    CHECK(win.window->dl == doctest::Approx(0.6).epsilon(0.1 / 0.6));
    CHECK(win.window->du == doctest::Approx(2.0).epsilon(0.2 / 2.0));
    CHECK(win.window->latitude == doctest::Approx(1.4).epsilon(0.2 / 1.4));

    // dose section is unimodal across the sampled range
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < curve.samples.size(); ++i) {
        if (curve.samples[i].second > curve.samples[i - 1].second &&
            curve.samples[i].second >= curve.samples[i + 1].second) {
            ++maxima;
        }
    }
    CHECK(maxima == 1);
    double peak = 0.0;
    for (const auto& [x, f] : curve.samples) peak = std::max(peak, f);
    CHECK(peak >= 0.65);
    CHECK(peak <= 0.85);
}

TEST_CASE("yield_section basics") {
    LogisticModel flat;
    flat.features.mean = {1, 50, 15, 48, 2};
    flat.features.scale = {1, 1, 1, 1, 1};
    flat.intercept = 0.3;
    const YieldCurve c = yield_section(flat, 2, DesignPoint{}, 0.0, 20.0, 5);
    for (const auto& [x, f] : c.samples) CHECK(f == c.samples.front().second);

    const YieldCurve two = yield_section(flat, 0, DesignPoint{}, 0.4, 2.8, 2);
    CHECK(two.samples.size() == 2);
    CHECK(two.samples.front().first == 0.4);
    CHECK(two.samples.back().first == 2.8);

    CHECK_THROWS_AS(yield_section(flat, 7, DesignPoint{}, 0, 1, 10), ValidationError);
    CHECK_THROWS_AS(yield_section(flat, 0, DesignPoint{}, 0, 1, 1), ValidationError);
    CHECK_THROWS_AS(axis_index("temperature"), ValidationError);
    CHECK(axis_index("t_mf312") == 4);
    try {
        axis_index("temperature");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        for (const char* name : kFactorNames) {
            CHECK(msg.find(name) != std::string::npos);
        }
    }
}

TEST_CASE("process_window: frozen hand interpolation") {
    YieldCurve c;
    c.axis = 0;
    c.samples = {{0.4, 0.1}, {0.8, 0.8}, {1.6, 0.8}, {2.4, 0.2}};
    const WindowResult r = process_window(c, 0.5);
    REQUIRE(r.window.has_value());
    // upward: 0.4 + (0.5-0.1)/(0.8-0.1)*0.4 = 0.6285714285714286
    CHECK(r.window->dl == doctest::Approx(0.6285714285714286).epsilon(1e-12));
    CHECK(r.window->du == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.window->latitude == doctest::Approx(1.3714285714285714).epsilon(1e-12));
    CHECK(!r.ambiguous);
    CHECK(r.crossings.size() == 2);
}

TEST_CASE("process_window: below-level, ambiguity, exact recovery") {
    YieldCurve low;
    low.axis = 0;
    low.samples = {{0.4, 0.1}, {1.0, 0.4}, {2.0, 0.2}};
    CHECK(!process_window(low, 0.5).window.has_value());

    YieldCurve twohump;
    twohump.axis = 0;
    twohump.samples = {{0.0, 0.1}, {1.0, 0.9}, {2.0, 0.1}, {3.0, 0.9}, {4.0, 0.1}};
    const WindowResult amb = process_window(twohump, 0.5);
    CHECK(amb.ambiguous);
    CHECK(amb.crossings.size() == 4);
    REQUIRE(amb.window.has_value());
    CHECK(amb.window->dl == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(amb.window->du == doctest::Approx(3.5).epsilon(1e-12));

    YieldCurve notdose;
    notdose.axis = 1;
    notdose.samples = {{0.0, 0.1}, {1.0, 0.9}};
    CHECK_THROWS_AS(process_window(notdose, 0.5), ValidationError);

    // piecewise-linear curves recover their construction crossings exactly
    SplitMix64 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const double up = rng.next_in(0.5, 1.2);
        const double down = rng.next_in(1.5, 2.6);
        YieldCurve c;
        c.axis = 0;
        // two segments crossing 0.5 at `up` and `down` exactly
        c.samples = {{up - 0.3, 0.2}, {up + 0.3, 0.8}, {down - 0.4, 0.9}, {down + 0.4, 0.1}};
        // fix slopes so the interpolated crossing is exact: f = 0.5 + (x-up)
        c.samples[0].second = 0.5 - 0.3;
        c.samples[1].second = 0.5 + 0.3;
        c.samples[2].second = 0.5 + 0.4;
        c.samples[3].second = 0.5 - 0.4;
        const WindowResult r = process_window(c, 0.5);
        REQUIRE(r.window.has_value());
        CHECK(std::fabs(r.window->dl - up) < 1e-12);
        CHECK(std::fabs(r.window->du - down) < 1e-12);
    }
}

TEST_CASE("recommend_window: trivial levels and the fitted round trip") {
    LogisticModel flat;
    flat.features.mean = {1, 50, 15, 48, 2};
    flat.features.scale = {1, 1, 1, 1, 1};
    flat.intercept = -2.0;  // constant 0.119

    GridSpec grid;
    const auto none = recommend_window(flat, 0.5, grid);
    CHECK(!none.has_value());

    const auto all = recommend_window(flat, 0.0, grid);
    REQUIRE(all.has_value());
    for (int ax = 0; ax < 5; ++ax) {
        REQUIRE(all->intervals[ax].has_value());
        CHECK(all->intervals[ax]->first == grid.bounds.lo[ax]);
        CHECK(all->intervals[ax]->second == grid.bounds.hi[ax]);
    }

    const auto pts = generator_dataset(5000, 7);
    const HoldoutFit fit = fit_logistic_holdout(pts, 1e-3, 7);
    const auto rec = recommend_window(fit.model, 0.5, grid);
    REQUIRE(rec.has_value());
    REQUIRE(rec->intervals[0].has_value());
    CHECK(rec->intervals[0]->first <= 0.7);
    CHECK(rec->intervals[0]->second >= 1.2);
}
