#include "peclab/jsonio.hpp"

#include <fstream>

#include <json.hpp>

#include "peclab/errors.hpp"
#include "peclab/textio.hpp"

namespace peclab {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

void dump_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

double require_number(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ValidationError(ctx + ": missing numeric field '" + key + "'");
    }
    return j[key].get<double>();
}

}  // namespace

void save_layout(const std::string& path, const Layout& layout) {
    layout.validate();
    json rects = json::array();
    for (const Rect& r : layout.rects) {
        rects.push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
    }
    dump_file(path, json{{"name", layout.name}, {"units", "nm"}, {"rects", rects}});
}

Layout load_layout(const std::string& path) {
    const json j = parse_file(path);
    if (!j.contains("units") || j["units"] != "nm") {
        throw ValidationError(path + ": layout units must be \"nm\"");
    }
    Layout layout;
    layout.name = j.value("name", "layout");
    if (!j.contains("rects") || !j["rects"].is_array() || j["rects"].empty()) {
        throw ValidationError(path + ": layout needs a non-empty rects array");
    }
    for (const auto& rj : j["rects"]) {
        layout.rects.push_back(Rect{require_number(rj, "x", path), require_number(rj, "y", path),
                                    require_number(rj, "w", path), require_number(rj, "h", path)});
    }
    layout.bbox = tight_bbox(layout.rects);
    layout.validate();
    return layout;
}

void save_model(const std::string& path, const LogisticModel& model) {
    json j;
    j["features"] = {
        {"names", {"D", "d_hsq", "d_al", "t_hsq", "t_mf312"}},
        {"mean", model.features.mean},
        {"scale", model.features.scale},
        {"expansion", "standardized linear + squares + pairwise interactions"},
    };
    j["weights"] = model.weights;
    j["intercept"] = model.intercept;
    j["fit"] = {
        {"ridge", model.ridge},
        {"iterations", model.iterations},
        {"grad_norm", model.grad_norm},
        {"converged", model.converged},
        {"holdout_accuracy", model.holdout_accuracy},
        {"n_train", model.n_train},
        {"n_holdout", model.n_holdout},
    };
    dump_file(path, j);
}

LogisticModel load_model(const std::string& path) {
    const json j = parse_file(path);
    LogisticModel model;
    try {
        const auto& f = j.at("features");
        for (int i = 0; i < 5; ++i) {
            model.features.mean[i] = f.at("mean").at(i).get<double>();
            model.features.scale[i] = f.at("scale").at(i).get<double>();
        }
        for (int i = 0; i < kFeatureCount; ++i) {
            model.weights[i] = j.at("weights").at(i).get<double>();
        }
        model.intercept = j.at("intercept").get<double>();
        const auto& fit = j.at("fit");
        model.ridge = fit.value("ridge", 0.0);
        model.iterations = fit.value("iterations", 0);
        model.grad_norm = fit.value("grad_norm", 0.0);
        model.converged = fit.value("converged", false);
        model.holdout_accuracy = fit.value("holdout_accuracy", -1.0);
        model.n_train = fit.value("n_train", 0);
        model.n_holdout = fit.value("n_holdout", 0);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": malformed model JSON: " + e.what());
    }
    model.features.validate();
    return model;
}

void save_eta_fit(const std::string& path, const EtaFit& fit) {
    dump_file(path, json{
                        {"eta", fit.eta},
                        {"A", fit.a},
                        {"r_squared", fit.r_squared},
                        {"n_points", fit.n_points},
                        {"robust_weights", fit.robust_weights},
                        {"eta_clamped", fit.eta_clamped},
                        {"converged", fit.converged},
                        {"iterations", fit.iterations},
                    });
}

EtaFit load_eta_fit(const std::string& path) {
    const json j = parse_file(path);
    EtaFit fit;
    fit.eta = require_number(j, "eta", path);
    fit.a = require_number(j, "A", path);
    fit.r_squared = j.value("r_squared", 0.0);
    fit.n_points = j.value("n_points", 0);
    if (j.contains("robust_weights")) {
        fit.robust_weights = j["robust_weights"].get<std::vector<double>>();
    }
    fit.eta_clamped = j.value("eta_clamped", false);
    fit.converged = j.value("converged", true);
    fit.iterations = j.value("iterations", 0);
    if (!(fit.eta >= 0.0)) throw ValidationError(path + ": eta must be >= 0");
    if (!(fit.a > 0.0)) throw ValidationError(path + ": A must be positive");
    return fit;
}

void save_window(const std::string& path, const WindowResult& result, double level) {
    json j;
    j["level"] = level;
    j["ambiguous"] = result.ambiguous;
    j["crossings"] = result.crossings;
    if (result.window) {
        j["D_l"] = result.window->dl;
        j["D_u"] = result.window->du;
        j["latitude"] = result.window->latitude;
    } else {
        j["window"] = nullptr;
    }
    dump_file(path, j);
}

}  // namespace peclab
