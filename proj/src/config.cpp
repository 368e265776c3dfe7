#include "peclab/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "peclab/errors.hpp"
#include "peclab/rng.hpp"
#include "peclab/textio.hpp"

namespace peclab {

std::vector<double> Config::dose_grid() const {
    std::vector<double> doses(sweep_dose_steps);
    for (int i = 0; i < sweep_dose_steps; ++i) {
        doses[i] = sweep_dose_lo +
                   (sweep_dose_hi - sweep_dose_lo) * static_cast<double>(i) /
                       (sweep_dose_steps - 1);
    }
    return doses;
}

void Config::validate() const {
    psf.validate();
    bounds.validate();
    if (!(pixel_size_nm > 0.0)) throw ValidationError("config: io.pixel_size_nm must be positive");
    if (!(margin_beta >= 0.0)) throw ValidationError("config: io.margin_beta must be >= 0");
    if (!(develop_threshold > 0.0)) {
        throw ValidationError("config: fab.develop_threshold must be positive");
    }
    if (!(coverage_min > 0.0 && coverage_min <= 1.0)) {
        throw ValidationError("config: fab.coverage_min must lie in (0,1]");
    }
    if (!(bridge_margin >= 0.0)) throw ValidationError("config: fab.bridge_margin must be >= 0");
    if (!(onset_width > 0.0)) throw ValidationError("config: fab.onset_width must be positive");
    if (!(ridge >= 0.0)) throw ValidationError("config: fit.ridge must be >= 0");
    if (!(refine_safety > 0.0)) throw ValidationError("config: fit.refine_safety must be positive");
    if (!(refine_damping > 0.0 && refine_damping <= 1.0)) {
        throw ValidationError("config: fit.refine_damping must lie in (0,1]");
    }
    if (!(refine_tolerance > 0.0)) throw ValidationError("config: fit.refine_tolerance must be positive");
    if (refine_max_iterations < 1) throw ValidationError("config: fit.refine_max_iterations must be >= 1");
    if (!(sweep_dose_lo > 0.0) || !(sweep_dose_hi > sweep_dose_lo) || sweep_dose_steps < 2) {
        throw ValidationError("config: sweep dose grid invalid");
    }
    if (!(fab.gate_width > 0.0) || !(fab.dose_curvature > 0.0)) {
        throw ValidationError("config: fab generator constants invalid");
    }
    fab.reference.validate_physical();
}

namespace {

struct KeyBinding {
    std::function<std::string(const Config&)> get;
    std::function<void(Config&, const std::string&, const std::string&)> set;
};

std::map<std::string, KeyBinding> key_table() {
    std::map<std::string, KeyBinding> keys;
    auto bind_double = [&](const std::string& name, auto member) {
        keys[name] = KeyBinding{
            [member](const Config& c) { return format_double(c.*member); },
            [member, name](Config& c, const std::string& v, const std::string& origin) {
                c.*member = parse_double(v, origin + ": key " + name);
            }};
    };
    auto bind_nested = [&](const std::string& name, auto getter, auto setter) {
        keys[name] = KeyBinding{getter, [setter, name](Config& c, const std::string& v,
                                                       const std::string& origin) {
                                    setter(c, parse_double(v, origin + ": key " + name));
                                }};
    };

    keys["seed"] = KeyBinding{
        [](const Config& c) { return std::to_string(c.seed); },
        [](Config& c, const std::string& v, const std::string& origin) {
            c.seed = static_cast<std::uint64_t>(parse_long(v, origin + ": key seed"));
        }};

    bind_nested("psf.alpha_nm", [](const Config& c) { return format_double(c.psf.alpha_nm); },
                [](Config& c, double v) { c.psf.alpha_nm = v; });
    bind_nested("psf.beta_nm", [](const Config& c) { return format_double(c.psf.beta_nm); },
                [](Config& c, double v) { c.psf.beta_nm = v; });
    bind_nested("psf.eta", [](const Config& c) { return format_double(c.psf.eta); },
                [](Config& c, double v) { c.psf.eta = v; });

    bind_double("io.pixel_size_nm", &Config::pixel_size_nm);
    bind_double("io.margin_beta", &Config::margin_beta);

    bind_double("fab.develop_threshold", &Config::develop_threshold);
    bind_double("fab.coverage_min", &Config::coverage_min);
    bind_double("fab.bridge_margin", &Config::bridge_margin);
    bind_double("fab.onset_width", &Config::onset_width);

    bind_nested("fab.dose_curvature", [](const Config& c) { return format_double(c.fab.dose_curvature); },
                [](Config& c, double v) { c.fab.dose_curvature = v; });
    bind_nested("fab.lower0", [](const Config& c) { return format_double(c.fab.lower0); },
                [](Config& c, double v) { c.fab.lower0 = v; });
    bind_nested("fab.lower_dhsq", [](const Config& c) { return format_double(c.fab.lower_dhsq); },
                [](Config& c, double v) { c.fab.lower_dhsq = v; });
    bind_nested("fab.upper0", [](const Config& c) { return format_double(c.fab.upper0); },
                [](Config& c, double v) { c.fab.upper0 = v; });
    bind_nested("fab.upper_dhsq", [](const Config& c) { return format_double(c.fab.upper_dhsq); },
                [](Config& c, double v) { c.fab.upper_dhsq = v; });
    bind_nested("fab.upper_thsq", [](const Config& c) { return format_double(c.fab.upper_thsq); },
                [](Config& c, double v) { c.fab.upper_thsq = v; });
    bind_nested("fab.upper_tmf", [](const Config& c) { return format_double(c.fab.upper_tmf); },
                [](Config& c, double v) { c.fab.upper_tmf = v; });
    bind_nested("fab.dal_gain", [](const Config& c) { return format_double(c.fab.dal_gain); },
                [](Config& c, double v) { c.fab.dal_gain = v; });
    bind_nested("fab.dal_ref", [](const Config& c) { return format_double(c.fab.dal_ref); },
                [](Config& c, double v) { c.fab.dal_ref = v; });
    bind_nested("fab.gate_dose", [](const Config& c) { return format_double(c.fab.gate_dose); },
                [](Config& c, double v) { c.fab.gate_dose = v; });
    bind_nested("fab.gate_width", [](const Config& c) { return format_double(c.fab.gate_width); },
                [](Config& c, double v) { c.fab.gate_width = v; });

    static const std::array<const char*, 5> suffix = {"d", "dhsq", "dal", "thsq", "tmf"};
    for (int i = 0; i < 5; ++i) {
        const std::string lo = std::string("bounds.") + suffix[i] + "_lo";
        const std::string hi = std::string("bounds.") + suffix[i] + "_hi";
        keys[lo] = KeyBinding{
            [i](const Config& c) { return format_double(c.bounds.lo[i]); },
            [i, lo](Config& c, const std::string& v, const std::string& origin) {
                c.bounds.lo[i] = parse_double(v, origin + ": key " + lo);
            }};
        keys[hi] = KeyBinding{
            [i](const Config& c) { return format_double(c.bounds.hi[i]); },
            [i, hi](Config& c, const std::string& v, const std::string& origin) {
                c.bounds.hi[i] = parse_double(v, origin + ": key " + hi);
            }};
    }

    bind_double("fit.ridge", &Config::ridge);
    bind_double("fit.refine_safety", &Config::refine_safety);
    bind_double("fit.refine_damping", &Config::refine_damping);
    bind_double("fit.refine_tolerance", &Config::refine_tolerance);
    keys["fit.refine_max_iterations"] = KeyBinding{
        [](const Config& c) { return std::to_string(c.refine_max_iterations); },
        [](Config& c, const std::string& v, const std::string& origin) {
            c.refine_max_iterations =
                static_cast<int>(parse_long(v, origin + ": key fit.refine_max_iterations"));
        }};

    bind_double("sweep.dose_lo", &Config::sweep_dose_lo);
    bind_double("sweep.dose_hi", &Config::sweep_dose_hi);
    keys["sweep.dose_steps"] = KeyBinding{
        [](const Config& c) { return std::to_string(c.sweep_dose_steps); },
        [](Config& c, const std::string& v, const std::string& origin) {
            c.sweep_dose_steps = static_cast<int>(parse_long(v, origin + ": key sweep.dose_steps"));
        }};
    return keys;
}

}  // namespace

std::string Config::canonical() const {
    const auto keys = key_table();
    std::string out;
    for (const auto& [name, binding] : keys) {  // std::map iterates sorted
        out += name + "=" + binding.get(*this) + "\n";
    }
    return out;
}

std::string Config::hash() const {
    const std::string c = canonical();
    const std::uint64_t h = fnv1a(c.data(), c.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

Config Config::from_text(const std::string& text, const std::string& origin) {
    Config cfg;
    const auto keys = key_table();
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string stripped = strip(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(origin + ": line " + std::to_string(lineno) +
                                  " is not a key=value pair");
        }
        const std::string key = strip(stripped.substr(0, eq));
        const std::string value = strip(stripped.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end()) {
            throw ValidationError(origin + ": unknown config key '" + key + "'");
        }
        it->second.set(cfg, value, origin);
    }
    cfg.validate();
    return cfg;
}

Config Config::from_file(const std::string& path) {
    return from_text(read_text_file(path), path);
}

}  // namespace peclab
