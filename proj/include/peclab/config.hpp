#pragma once

#include <cstdint>
#include <string>

#include "peclab/fieldkernel.hpp"
#include "peclab/virtualfab.hpp"

namespace peclab {

/// Full run configuration. Loaded from a plain key=value file; every key has
/// a default, unknown keys are rejected, values are bounds-checked.
struct Config {
    std::uint64_t seed = 42;

    PsfParams psf{};     // psf.alpha_nm, psf.beta_nm, psf.eta
    FabModel fab{};      // fab.* process-response calibration
    FactorBounds bounds{};  // bounds.<factor>_lo / _hi

    // io.*
    double pixel_size_nm = 5.0;
    double margin_beta = 3.0;  // grid margin in units of psf.beta_nm

    // fab.* (process, not generator shape)
    double develop_threshold = 0.26;
    double coverage_min = 0.5;
    double bridge_margin = 0.2;
    double onset_width = 0.05;

    // fit.*
    double ridge = 1e-3;
    double refine_safety = 1.05;   // E_target = develop_threshold * refine_safety
    double refine_damping = 1.0;
    double refine_tolerance = 1e-3;
    int refine_max_iterations = 50;

    // sweep.* dose grid used by onset sweeps
    double sweep_dose_lo = 0.3;
    double sweep_dose_hi = 3.2;
    int sweep_dose_steps = 233;

    double margin_nm() const { return margin_beta * psf.beta_nm; }
    std::vector<double> dose_grid() const;

    void validate() const;

    /// FNV-1a over the canonical (sorted key=value) rendering; equal iff the
    /// effective configuration content is equal.
    std::string hash() const;
    std::string canonical() const;

    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text, const std::string& origin = "<config>");
};

}  // namespace peclab
