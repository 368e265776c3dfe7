#include "peclab/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "peclab/config.hpp"
#include "peclab/errors.hpp"
#include "peclab/jsonio.hpp"
#include "peclab/pec.hpp"
#include "peclab/rng.hpp"
#include "peclab/runreport.hpp"
#include "peclab/textio.hpp"
#include "peclab/virtualfab.hpp"
#include "peclab/yieldsurface.hpp"

namespace peclab {

namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

struct CommonArgs {
    std::string config_path;
    std::optional<long long> seed_flag;
};

struct RunContext {
    Config config;
    std::uint64_t seed = 0;
    std::string config_hash;
    clock_type::time_point start = clock_type::now();
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::string> outputs;

    void note_input(const std::string& path) { inputs.emplace_back(path, file_digest(path)); }
    void note_output(const std::string& path) { outputs.push_back(path); }

    void finish(const std::string& command) {
        if (outputs.empty()) return;
        RunReport report;
        report.command = command;
        report.config_hash = config_hash;
        report.input_digests = inputs;
        report.outputs = outputs;
        report.seed = seed;
        report.wall_ms = std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
        append_run_report(report, outputs.front());
    }
};

/// Seed precedence: PECLAB_SEED environment variable, then --seed, then config.
RunContext make_context(const CommonArgs& common) {
    RunContext ctx;
    if (!common.config_path.empty()) {
        ctx.config = Config::from_file(common.config_path);
        ctx.note_input(common.config_path);
    }
    ctx.seed = ctx.config.seed;
    if (common.seed_flag) ctx.seed = static_cast<std::uint64_t>(*common.seed_flag);
    if (const char* env = std::getenv("PECLAB_SEED")) {
        ctx.seed = static_cast<std::uint64_t>(parse_long(env, "PECLAB_SEED"));
    }
    ctx.config_hash = ctx.config.hash();
    return ctx;
}

void ensure_parent_dir(const std::string& path) {
    const fs::path dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
}

DesignPoint parse_point(const std::string& text) {
    std::array<double, 5> vals{};
    std::size_t pos = 0;
    for (int i = 0; i < 5; ++i) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok = comma == std::string::npos ? text.substr(pos)
                                                           : text.substr(pos, comma - pos);
        vals[i] = parse_double(tok, "design point");
        if (i < 4) {
            if (comma == std::string::npos) {
                throw ValidationError("design point needs 5 comma-separated values (D,d_hsq,d_al,t_hsq,t_mf312)");
            }
            pos = comma + 1;
        } else if (comma != std::string::npos) {
            throw ValidationError("design point has more than 5 values");
        }
    }
    return DesignPoint{vals[0], vals[1], vals[2], vals[3], vals[4]};
}

std::vector<double> parse_dose_range(const std::string& text) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
        throw ValidationError("dose range must be lo:hi:steps");
    }
    const double lo = parse_double(text.substr(0, c1), "dose range");
    const double hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "dose range");
    const long steps = parse_long(text.substr(c2 + 1), "dose range");
    if (!(lo > 0.0) || !(hi > lo) || steps < 2) throw ValidationError("dose range must satisfy 0 < lo < hi, steps >= 2");
    std::vector<double> doses(steps);
    for (long i = 0; i < steps; ++i) {
        doses[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    return doses;
}

// ---------------------------------------------------------------- gen-pattern

struct GenPatternArgs {
    int n = 6;
    double pitch = 70.0;
    double width = 0.0;
    double rho = 0.0;
    double length = 1820.0;
    std::string name = "lead_array";
    std::string out;
    std::string mask_pgm;
};

int cmd_gen_pattern(const CommonArgs& common, const GenPatternArgs& args) {
    RunContext ctx = make_context(common);
    if ((args.width > 0.0) == (args.rho > 0.0)) {
        throw ValidationError("gen-pattern: give exactly one of --width or --rho");
    }
    const double width = args.width > 0.0 ? args.width : args.rho * args.pitch;
    const Layout layout = lead_array(args.n, args.pitch, width, args.length, args.name);
    ensure_parent_dir(args.out);
    save_layout(args.out, layout);
    ctx.note_output(args.out);
    if (!args.mask_pgm.empty()) {
        const RasterGrid mask =
            rasterize(layout, ctx.config.pixel_size_nm, ctx.config.margin_nm());
        ensure_parent_dir(args.mask_pgm);
        write_pgm(args.mask_pgm, mask);
        ctx.note_output(args.mask_pgm);
    }
    std::cout << "wrote " << args.out << " (" << layout.rects.size()
              << " rects, fill " << format_double(layout.fill_fraction()) << ")\n";
    ctx.finish("gen-pattern");
    return 0;
}

// ---------------------------------------------------------------------- sweep

struct SweepArgs {
    long count = 0;
    int replicates = 1;
    std::string point;
    std::string engine = "response";
    std::string layout_path;
    std::string out;
};

int cmd_sweep(const CommonArgs& common, const SweepArgs& args) {
    RunContext ctx = make_context(common);
    const Config& cfg = ctx.config;
    if (args.replicates < 1) throw ValidationError("sweep: --replicates must be >= 1");
    if (args.engine != "response" && args.engine != "sim") {
        throw ValidationError("sweep: --engine must be 'response' or 'sim'");
    }

    std::vector<DesignPoint> points;
    if (!args.point.empty()) {
        const DesignPoint p = parse_point(args.point);
        if (!cfg.bounds.contains(p)) {
            throw ValidationError("sweep: --point lies outside the configured factor bounds");
        }
        points.push_back(p);
    } else {
        if (args.count < 1) throw ValidationError("sweep: --count must be >= 1");
        points = latin_hypercube_sample(cfg.bounds, args.count, ctx.seed);
        if (args.engine == "sim") {
            // only the dose enters the exposure simulation; the other factors
            // stay at the reference point instead of suggesting false variation
            for (DesignPoint& p : points) {
                const double d = p.dose;
                p = cfg.fab.reference;
                p.dose = d;
            }
        }
    }

    const long total = static_cast<long>(points.size()) * args.replicates;
    std::vector<DeviceOutcome> outcomes(total);

    if (args.engine == "response") {
#pragma omp parallel for schedule(static)
        for (long row = 0; row < total; ++row) {
            const DesignPoint& p = points[row / args.replicates];
            outcomes[row] = process_response(cfg.fab, p, mix_u64(ctx.seed, 0x524F5753ULL ^ row));
        }
    } else {
        if (args.layout_path.empty()) throw ValidationError("sweep: --engine sim requires --layout");
        const Layout layout = load_layout(args.layout_path);
        ctx.note_input(args.layout_path);
        const RasterGrid pattern = rasterize(layout, cfg.pixel_size_nm, cfg.margin_nm());
        const Kernel kernel = make_psf_kernel(cfg.psf, cfg.pixel_size_nm);
        const ConvolutionPlan plan(pattern.width, pattern.height, kernel);
        const RasterGrid unit_energy = plan.apply(pattern);
        const ClassifyContext cctx(layout, pattern);
        for (long row = 0; row < total; ++row) {
            const DesignPoint& p = points[row / args.replicates];
            outcomes[row] = classify_at_dose(cctx, unit_energy, p.dose, cfg.develop_threshold,
                                             cfg.coverage_min, cfg.bridge_margin);
        }
    }

    std::vector<std::vector<std::string>> rows;
    rows.reserve(total);
    for (long row = 0; row < total; ++row) {
        const DesignPoint& p = points[row / args.replicates];
        rows.push_back({format_double(p.dose), format_double(p.d_hsq), format_double(p.d_al),
                        format_double(p.t_hsq), format_double(p.t_mf312),
                        to_string(outcomes[row])});
    }
    ensure_parent_dir(args.out);
    write_csv(args.out, {"D", "d_hsq", "d_al", "t_hsq", "t_mf312", "outcome"}, rows);
    ctx.note_output(args.out);

    long wells = 0;
    for (DeviceOutcome o : outcomes) wells += is_yield(o);
    std::cout << "wrote " << args.out << ": " << total << " rows, WellFormed fraction "
              << format_double(static_cast<double>(wells) / static_cast<double>(total)) << "\n";
    ctx.finish("sweep");
    return 0;
}

// ------------------------------------------------------------------ fit-yield

struct FitYieldArgs {
    std::string labels;
    std::string out;
    double holdout = 0.2;
    double ridge = -1.0;  // <0: use config
};

std::vector<LabeledPoint> load_labeled_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::array<const char*, 6> need = {"D", "d_hsq", "d_al", "t_hsq", "t_mf312", "outcome"};
    std::array<int, 6> col{};
    for (std::size_t i = 0; i < need.size(); ++i) {
        col[i] = table.column(need[i]);
        if (col[i] < 0) throw ValidationError(path + ": missing column '" + std::string(need[i]) + "'");
    }
    std::vector<LabeledPoint> points;
    points.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string ctx = path + ": line " + std::to_string(r + 2);
        DesignPoint p{parse_double(row[col[0]], ctx), parse_double(row[col[1]], ctx),
                      parse_double(row[col[2]], ctx), parse_double(row[col[3]], ctx),
                      parse_double(row[col[4]], ctx)};
        DeviceOutcome o;
        try {
            o = outcome_from_string(row[col[5]]);
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        points.push_back(LabeledPoint{p, is_yield(o)});
    }
    if (points.empty()) throw ValidationError(path + ": no data rows");
    return points;
}

int cmd_fit_yield(const CommonArgs& common, const FitYieldArgs& args) {
    RunContext ctx = make_context(common);
    const std::vector<LabeledPoint> points = load_labeled_csv(args.labels);
    ctx.note_input(args.labels);
    const double ridge = args.ridge >= 0.0 ? args.ridge : ctx.config.ridge;
    const HoldoutFit fit = fit_logistic_holdout(points, ridge, ctx.seed, args.holdout);
    ensure_parent_dir(args.out);
    save_model(args.out, fit.model);
    ctx.note_output(args.out);
    std::cout << "holdout accuracy " << format_double(fit.accuracy) << " (" << fit.n_holdout
              << " of " << points.size() << " rows held out); model written to " << args.out
              << "\n";
    ctx.finish("fit-yield");
    return fit.model.converged ? 0 : 3;
}

// ------------------------------------------------------------ section / window

struct SectionArgs {
    std::string model;
    std::string axis = "D";
    double lo = 0.0, hi = 0.0;  // 0,0: config bounds for the axis
    int samples = 121;
    std::string fixed;
    std::string out_csv;
    std::string out_svg;
    std::string out_window;
    double level = 0.5;
};

YieldCurve compute_section(RunContext& ctx, const SectionArgs& args, const LogisticModel& model,
                           int axis) {
    const DesignPoint fixed =
        args.fixed.empty() ? ctx.config.fab.reference : parse_point(args.fixed);
    double lo = args.lo, hi = args.hi;
    if (lo == 0.0 && hi == 0.0) {
        lo = ctx.config.bounds.lo[axis];
        hi = ctx.config.bounds.hi[axis];
    }
    return yield_section(model, axis, fixed, lo, hi, args.samples);
}

void write_curve_outputs(RunContext& ctx, const SectionArgs& args, const YieldCurve& curve,
                         double guide_level) {
    if (!args.out_csv.empty()) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(curve.samples.size());
        for (const auto& [x, f] : curve.samples) {
            rows.push_back({format_double(x), format_double(f)});
        }
        ensure_parent_dir(args.out_csv);
        write_csv(args.out_csv, {kFactorNames[curve.axis], "f"}, rows);
        ctx.note_output(args.out_csv);
    }
    if (!args.out_svg.empty()) {
        const double lo = curve.samples.front().first;
        const double hi = curve.samples.back().first;
        SvgPlot plot(lo, hi, 0.0, 1.0, kFactorNames[curve.axis], "yield fraction f");
        plot.add_hline(guide_level, "#888888");
        plot.add_polyline(curve.samples, "#1f77b4");
        ensure_parent_dir(args.out_svg);
        plot.write(args.out_svg);
        ctx.note_output(args.out_svg);
    }
}

int cmd_section(const CommonArgs& common, const SectionArgs& args) {
    RunContext ctx = make_context(common);
    const LogisticModel model = load_model(args.model);
    ctx.note_input(args.model);
    const int axis = axis_index(args.axis);
    const YieldCurve curve = compute_section(ctx, args, model, axis);
    write_curve_outputs(ctx, args, curve, args.level);
    ctx.finish("section");
    return 0;
}

int cmd_window(const CommonArgs& common, const SectionArgs& args) {
    RunContext ctx = make_context(common);
    const LogisticModel model = load_model(args.model);
    ctx.note_input(args.model);
    const YieldCurve curve = compute_section(ctx, args, model, 0);  // dose axis
    const WindowResult res = process_window(curve, args.level);
    ensure_parent_dir(args.out_window);
    save_window(args.out_window, res, args.level);
    ctx.note_output(args.out_window);
    write_curve_outputs(ctx, args, curve, args.level);
    if (res.window) {
        std::cout << "D_l " << format_double(res.window->dl) << ", D_u "
                  << format_double(res.window->du) << ", latitude "
                  << format_double(res.window->latitude)
                  << (res.ambiguous ? " (ambiguous: multiple super-level intervals)" : "") << "\n";
    } else {
        std::cout << "curve never reaches level " << format_double(args.level) << "\n";
    }
    ctx.finish("window");
    return 0;
}

// -------------------------------------------------------------------- fit-eta

struct FitEtaArgs {
    std::string onsets;
    std::string fu;
    std::string out;
    std::string out_svg;
};

std::vector<OnsetPoint> onsets_from_fu_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int c_rho = table.column("rho"), c_d = table.column("D"), c_f = table.column("f_u");
    if (c_rho < 0 || c_d < 0 || c_f < 0) {
        throw ValidationError(path + ": need columns rho,D,f_u");
    }
    std::map<double, std::vector<std::pair<double, double>>> groups;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = path + ": line " + std::to_string(r + 2);
        groups[parse_double(table.rows[r][c_rho], ctx)].emplace_back(
            parse_double(table.rows[r][c_d], ctx), parse_double(table.rows[r][c_f], ctx));
    }
    std::vector<OnsetPoint> onsets;
    for (auto& [rho, samples] : groups) {
        std::sort(samples.begin(), samples.end());
        std::vector<double> doses, fu;
        for (const auto& [d, f] : samples) {
            doses.push_back(d);
            fu.push_back(f);
        }
        const auto onset = onset_from_counts(doses, fu);
        if (!onset) {
            std::cerr << "note: rho " << format_double(rho)
                      << " never crosses 50% underexposure; skipped\n";
            continue;
        }
        onsets.push_back(OnsetPoint{rho, *onset});
    }
    return onsets;
}

void write_eta_svg(const std::string& path, const EtaFit& fit,
                   const std::vector<OnsetPoint>& points) {
    SvgPlot plot(0.01, 100.0, 0.0, 5.0, "eta", "D_l / A", /*log_x=*/true);
    for (int i = 1; i <= 9; ++i) {
        const double rho = i / 10.0;
        std::vector<std::pair<double, double>> curve;
        for (int k = 0; k <= 160; ++k) {
            const double eta = std::pow(10.0, -2.0 + 4.0 * k / 160.0);
            curve.emplace_back(eta, (1.0 + eta) / (1.0 + 2.0 * rho * eta));
        }
        plot.add_polyline(curve, i == 5 ? "#333333" : "#9ecae1");
    }
    if (fit.eta > 0.01 && fit.eta < 100.0) plot.add_vline(fit.eta, "#d62728");
    std::vector<std::pair<double, double>> dots;
    for (const OnsetPoint& p : points) {
        const double x = std::clamp(fit.eta, 0.0101, 99.0);
        dots.emplace_back(x, p.dl / fit.a);
    }
    plot.add_points(dots, "#d62728");
    plot.write(path);
}

int cmd_fit_eta(const CommonArgs& common, const FitEtaArgs& args) {
    RunContext ctx = make_context(common);
    if (args.onsets.empty() == args.fu.empty()) {
        throw ValidationError("fit-eta: give exactly one of --onsets or --fu");
    }
    std::vector<OnsetPoint> points;
    if (!args.onsets.empty()) {
        const CsvTable table = read_csv(args.onsets);
        ctx.note_input(args.onsets);
        const int c_rho = table.column("rho"), c_dl = table.column("D_l");
        if (c_rho < 0 || c_dl < 0) throw ValidationError(args.onsets + ": need columns rho,D_l");
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const std::string rowctx = args.onsets + ": line " + std::to_string(r + 2);
            points.push_back(OnsetPoint{parse_double(table.rows[r][c_rho], rowctx),
                                        parse_double(table.rows[r][c_dl], rowctx)});
        }
    } else {
        points = onsets_from_fu_csv(args.fu);
        ctx.note_input(args.fu);
    }
    const EtaFit fit = fit_eta(points);
    ensure_parent_dir(args.out);
    save_eta_fit(args.out, fit);
    ctx.note_output(args.out);
    if (!args.out_svg.empty()) {
        ensure_parent_dir(args.out_svg);
        write_eta_svg(args.out_svg, fit, points);
        ctx.note_output(args.out_svg);
    }
    std::cout << "eta " << format_double(fit.eta) << ", A " << format_double(fit.a)
              << ", R^2 " << format_double(fit.r_squared) << " (" << fit.n_points << " points"
              << (fit.eta_clamped ? ", eta clamped" : "") << ")\n";
    ctx.finish("fit-eta");
    return 0;
}

// ----------------------------------------------------------------- psf-kernel

struct PsfKernelArgs {
    std::string out;
};

int cmd_psf_kernel(const CommonArgs& common, const PsfKernelArgs& args) {
    RunContext ctx = make_context(common);
    const Kernel k = make_psf_kernel(ctx.config.psf, ctx.config.pixel_size_nm);
    ensure_parent_dir(args.out);
    write_kernel_csv(args.out, k);
    ctx.note_output(args.out);
    std::cout << "wrote " << args.out << " (radius " << k.radius << " px, "
              << ctx.config.pixel_size_nm << " nm/px)\n";
    ctx.finish("psf-kernel");
    return 0;
}

// -------------------------------------------------------------------- correct

struct CorrectArgs {
    std::string etafit;
    double eta_override = -1.0;
    bool refine = false;
    std::string out_dir;
    std::string doses;
    std::vector<std::string> layouts;
};

int cmd_correct(const CommonArgs& common, const CorrectArgs& args) {
    RunContext ctx = make_context(common);
    const Config& cfg = ctx.config;
    if (args.layouts.empty()) throw ValidationError("correct: give at least one layout file");
    if (args.etafit.empty() && args.eta_override < 0.0) {
        throw ValidationError("correct: give --etafit or --eta");
    }

    double eta = args.eta_override;
    double fitted_a = 0.0;
    if (!args.etafit.empty()) {
        const EtaFit fit = load_eta_fit(args.etafit);
        ctx.note_input(args.etafit);
        if (args.eta_override < 0.0) eta = fit.eta;
        fitted_a = fit.a;
    }
    PsfParams psf = cfg.psf;
    psf.eta = eta;  // the correction PSF carries the applied eta

    const std::vector<double> doses =
        args.doses.empty() ? cfg.dose_grid() : parse_dose_range(args.doses);

    fs::create_directories(args.out_dir);
    nlohmann::json layouts_json = nlohmann::json::array();
    std::vector<OnsetPoint> uncorrected, corrected;
    bool refine_all_converged = true;

    std::map<std::pair<int, int>, std::unique_ptr<ConvolutionPlan>> plans;
    const Kernel process_kernel = make_psf_kernel(cfg.psf, cfg.pixel_size_nm);

    for (const std::string& lp : args.layouts) {
        const Layout layout = load_layout(lp);
        ctx.note_input(lp);
        const RasterGrid pattern = rasterize(layout, cfg.pixel_size_nm, cfg.margin_nm());
        const auto key = std::make_pair(pattern.width, pattern.height);
        if (!plans.count(key)) {
            plans[key] = std::make_unique<ConvolutionPlan>(pattern.width, pattern.height,
                                                           process_kernel);
        }
        const ConvolutionPlan& plan = *plans[key];
        const ClassifyContext cctx(layout, pattern);

        // density for both the correction rule and the device's rho
        const RasterGrid density = local_density(pattern, psf);
        const double rho_dev = device_density(pattern, density);

        const RasterGrid unit_energy = plan.apply(pattern);
        const OnsetSweepResult unc = measure_onset(cctx, unit_energy, doses,
                                                   cfg.develop_threshold, cfg.coverage_min);

        RefineOptions ropts;
        ropts.target_energy = cfg.develop_threshold * cfg.refine_safety;
        ropts.damping = cfg.refine_damping;
        ropts.tolerance = cfg.refine_tolerance;
        ropts.max_iterations = cfg.refine_max_iterations;
        const DoseMapResult map =
            dose_multiplier_map(pattern, eta, psf, args.refine, ropts, &density);
        if (args.refine && !map.converged) refine_all_converged = false;

        RasterGrid dosed = pattern;
        for (std::size_t i = 0; i < dosed.values.size(); ++i) {
            dosed.values[i] *= map.multipliers.values[i];
        }
        const RasterGrid corr_energy = plan.apply(dosed);
        const OnsetSweepResult cor = measure_onset(cctx, corr_energy, doses,
                                                   cfg.develop_threshold, cfg.coverage_min);

        const std::string stem = fs::path(lp).stem().string();
        const std::string map_csv = (fs::path(args.out_dir) / (stem + "_dosemap.csv")).string();
        write_grid_csv(map_csv, map.multipliers);
        ctx.note_output(map_csv);

        nlohmann::json rect_assign = nlohmann::json::array();
        for (std::size_t ri = 0; ri < cctx.rect_pixels.size(); ++ri) {
            double mean = 0.0;
            for (int p : cctx.rect_pixels[ri]) mean += map.multipliers.values[p];
            mean /= static_cast<double>(cctx.rect_pixels[ri].size());
            rect_assign.push_back({{"rect_id", ri}, {"multiplier", mean}});
        }
        const std::string map_json = (fs::path(args.out_dir) / (stem + "_dosemap.json")).string();
        write_text_file(map_json, rect_assign.dump(2) + "\n");
        ctx.note_output(map_json);

        if (unc.onset) uncorrected.push_back(OnsetPoint{rho_dev, *unc.onset});
        if (cor.onset) corrected.push_back(OnsetPoint{rho_dev, *cor.onset});
        layouts_json.push_back({
            {"layout", lp},
            {"rho_device", rho_dev},
            {"onset_uncorrected", unc.onset ? nlohmann::json(*unc.onset) : nlohmann::json()},
            {"onset_corrected", cor.onset ? nlohmann::json(*cor.onset) : nlohmann::json()},
            {"refine_converged", map.converged},
            {"refine_iterations", map.iterations},
            {"refine_residual", map.final_residual},
        });
    }

    nlohmann::json report;
    report["eta"] = eta;
    if (fitted_a > 0.0) report["A"] = fitted_a;
    report["refine"] = args.refine;
    report["layouts"] = layouts_json;
    auto flat_json = [](const std::vector<OnsetPoint>& onsets) -> nlohmann::json {
        if (onsets.size() < 2) return nullptr;
        const FlatnessReport f = flatness_report(onsets);
        return {{"ratio_max_min", f.ratio_max_min},
                {"mean", f.mean},
                {"max_deviation", f.max_deviation}};
    };
    report["uncorrected"] = flat_json(uncorrected);
    report["corrected"] = flat_json(corrected);
    const std::string report_path = (fs::path(args.out_dir) / "flatness.json").string();
    write_text_file(report_path, report.dump(2) + "\n");
    ctx.note_output(report_path);

    if (corrected.size() >= 2) {
        const FlatnessReport f = flatness_report(corrected);
        std::cout << "corrected onset ratio " << format_double(f.ratio_max_min) << " over "
                  << corrected.size() << " layouts (report: " << report_path << ")\n";
    } else {
        std::cout << "report: " << report_path << "\n";
    }
    ctx.finish("correct");
    if (args.refine && !refine_all_converged) {
        std::cerr << "warning: dose-map refinement did not reach tolerance on every layout\n";
        return 3;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"peclab: e-beam lithography process windows and proximity correction"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "key=value configuration file")
        ->configurable(false);
    long long seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");

    GenPatternArgs gen;
    auto* cmd_gen = app.add_subcommand("gen-pattern", "generate a lead-array layout");
    cmd_gen->add_option("--n", gen.n, "number of leads")->required();
    cmd_gen->add_option("--pitch", gen.pitch, "lead pitch, nm")->required();
    cmd_gen->add_option("--width", gen.width, "lead width, nm");
    cmd_gen->add_option("--rho", gen.rho, "target fill fraction (width = rho*pitch)");
    cmd_gen->add_option("--length", gen.length, "lead length, nm");
    cmd_gen->add_option("--name", gen.name, "layout name");
    cmd_gen->add_option("--out", gen.out, "output layout JSON")->required();
    cmd_gen->add_option("--mask-pgm", gen.mask_pgm, "also write the rasterized mask as PGM");

    SweepArgs sweep;
    auto* cmd_sw = app.add_subcommand("sweep", "sample design points and label outcomes");
    cmd_sw->add_option("--count", sweep.count, "number of sampled design points");
    cmd_sw->add_option("--replicates", sweep.replicates, "outcome draws per point");
    cmd_sw->add_option("--point", sweep.point, "fixed design point D,d_hsq,d_al,t_hsq,t_mf312");
    cmd_sw->add_option("--engine", sweep.engine, "response (process model) or sim (full exposure)");
    cmd_sw->add_option("--layout", sweep.layout_path, "layout JSON for --engine sim");
    cmd_sw->add_option("--out", sweep.out, "output labels CSV")->required();

    FitYieldArgs fy;
    auto* cmd_fy = app.add_subcommand("fit-yield", "fit the logistic yield surface");
    cmd_fy->add_option("--labels", fy.labels, "labels CSV")->required();
    cmd_fy->add_option("--out", fy.out, "output model JSON")->required();
    cmd_fy->add_option("--holdout", fy.holdout, "holdout fraction");
    cmd_fy->add_option("--ridge", fy.ridge, "ridge strength (default from config)");

    SectionArgs sec;
    auto* cmd_sec = app.add_subcommand("section", "1-D yield section through a fitted model");
    cmd_sec->add_option("--model", sec.model, "model JSON")->required();
    cmd_sec->add_option("--axis", sec.axis, "factor axis (D, d_hsq, d_al, t_hsq, t_mf312)");
    cmd_sec->add_option("--lo", sec.lo, "range start (default: config bounds)");
    cmd_sec->add_option("--hi", sec.hi, "range end");
    cmd_sec->add_option("--samples", sec.samples, "sample count");
    cmd_sec->add_option("--fixed", sec.fixed, "fixed point for the other factors");
    cmd_sec->add_option("--out-csv", sec.out_csv, "curve CSV output");
    cmd_sec->add_option("--out-svg", sec.out_svg, "curve SVG output");

    SectionArgs win;
    auto* cmd_win = app.add_subcommand("window", "dose process window from a fitted model");
    cmd_win->add_option("--model", win.model, "model JSON")->required();
    cmd_win->add_option("--lo", win.lo, "dose range start");
    cmd_win->add_option("--hi", win.hi, "dose range end");
    cmd_win->add_option("--samples", win.samples, "sample count");
    cmd_win->add_option("--fixed", win.fixed, "fixed point for the other factors");
    cmd_win->add_option("--level", win.level, "yield level defining the window");
    cmd_win->add_option("--out", win.out_window, "window JSON output")->required();
    cmd_win->add_option("--out-csv", win.out_csv, "curve CSV output");
    cmd_win->add_option("--out-svg", win.out_svg, "curve SVG output");

    FitEtaArgs fe;
    auto* cmd_fe = app.add_subcommand("fit-eta", "fit the onset-dose model");
    cmd_fe->add_option("--onsets", fe.onsets, "onset CSV (rho,D_l)");
    cmd_fe->add_option("--fu", fe.fu, "raw underexposure CSV (rho,D,f_u)");
    cmd_fe->add_option("--out", fe.out, "output fit JSON")->required();
    cmd_fe->add_option("--out-svg", fe.out_svg, "onset-model SVG output");

    PsfKernelArgs pk;
    auto* cmd_pk = app.add_subcommand("psf-kernel", "export the discretized energy PSF as CSV");
    cmd_pk->add_option("--out", pk.out, "output CSV")->required();

    CorrectArgs corr;
    auto* cmd_cor = app.add_subcommand("correct", "compute dose-multiplier maps and verify flatness");
    cmd_cor->add_option("--etafit", corr.etafit, "fitted eta JSON");
    cmd_cor->add_option("--eta", corr.eta_override, "eta override (skips --etafit)");
    cmd_cor->add_flag("--refine", corr.refine, "fixed-point energy equalization on top of the density rule");
    cmd_cor->add_option("--out-dir", corr.out_dir, "output directory")->required();
    cmd_cor->add_option("--doses", corr.doses, "onset sweep grid lo:hi:steps");
    cmd_cor->add_option("layouts", corr.layouts, "layout JSON files")->required();

    // global --config/--seed remain usable after the subcommand name
    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    std::vector<const char*> argv;
    argv.push_back("peclab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (seed_opt->count() > 0) common.seed_flag = seed_flag;
        if (cmd_gen->parsed()) return cmd_gen_pattern(common, gen);
        if (cmd_sw->parsed()) return cmd_sweep(common, sweep);
        if (cmd_fy->parsed()) return cmd_fit_yield(common, fy);
        if (cmd_sec->parsed()) return cmd_section(common, sec);
        if (cmd_win->parsed()) return cmd_window(common, win);
        if (cmd_fe->parsed()) return cmd_fit_eta(common, fe);
        if (cmd_pk->parsed()) return cmd_psf_kernel(common, pk);
        if (cmd_cor->parsed()) return cmd_correct(common, corr);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace peclab
