#pragma once

#include <optional>
#include <vector>

#include "peclab/geometry.hpp"

namespace peclab {

/// Pixelized scalar field. Binary {0,1} for masks and developed resist,
/// non-negative real for energy, density and dose-multiplier fields.
/// Pixel (ix, iy) is centered at (origin_x + (ix+0.5)*pixel_size,
/// origin_y + (iy+0.5)*pixel_size).
struct RasterGrid {
    double pixel_size = 1.0;
    int width = 0;
    int height = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<double> values;

    RasterGrid() = default;
    RasterGrid(int w, int h, double px, double ox = 0.0, double oy = 0.0)
        : pixel_size(px), width(w), height(h), origin_x(ox), origin_y(oy),
          values(static_cast<std::size_t>(w) * h, 0.0) {}

    std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * width + ix; }
    double at(int ix, int iy) const { return values[idx(ix, iy)]; }
    double& at(int ix, int iy) { return values[idx(ix, iy)]; }
    std::size_t size() const { return values.size(); }

    double center_x(int ix) const { return origin_x + (ix + 0.5) * pixel_size; }
    double center_y(int iy) const { return origin_y + (iy + 0.5) * pixel_size; }

    bool is_binary() const;
    bool same_geometry(const RasterGrid& other) const;
};

/// Point-sampled rasterization: pixel = 1 iff its center lies inside any rect.
/// The grid covers the layout bbox plus margin_nm on every side, with the
/// margin rounded up to whole pixels so pixel phase is independent of margin.
/// Rejects pixel_size > min(rect dimension)/2, naming the offending rect.
RasterGrid rasterize(const Layout& layout, double pixel_size, double margin_nm = 0.0);

/// Mean pixel value, over the whole grid or over pixels whose centers fall in
/// `region` (nm coordinates). Rejects regions outside the grid or covering no
/// pixel centers.
double fill_fraction(const RasterGrid& grid, const std::optional<Rect>& region = std::nullopt);

}  // namespace peclab
