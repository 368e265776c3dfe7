#include "peclab/raster.hpp"

#include <algorithm>
#include <cmath>

#include "peclab/errors.hpp"

namespace peclab {

bool RasterGrid::is_binary() const {
    for (double v : values) {
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

bool RasterGrid::same_geometry(const RasterGrid& other) const {
    return width == other.width && height == other.height &&
           pixel_size == other.pixel_size && origin_x == other.origin_x &&
           origin_y == other.origin_y;
}

RasterGrid rasterize(const Layout& layout, double pixel_size, double margin_nm) {
    layout.validate();
    if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) {
        throw ValidationError("rasterize: pixel_size must be positive");
    }
    if (margin_nm < 0.0) throw ValidationError("rasterize: margin must be non-negative");
    for (std::size_t i = 0; i < layout.rects.size(); ++i) {
        const Rect& r = layout.rects[i];
        if (pixel_size > 0.5 * std::min(r.w, r.h)) {
            throw ValidationError("rasterize: pixel_size " + std::to_string(pixel_size) +
                                  " too coarse for rect " + std::to_string(i) + " of layout '" +
                                  layout.name + "' (min dimension " +
                                  std::to_string(std::min(r.w, r.h)) + ")");
        }
    }

    // Whole-pixel margin keeps pixel phase relative to the bbox fixed.
    const int margin_px = static_cast<int>(std::ceil(margin_nm / pixel_size - 1e-12));
    const int body_w = static_cast<int>(std::ceil(layout.bbox.w / pixel_size - 1e-12));
    const int body_h = static_cast<int>(std::ceil(layout.bbox.h / pixel_size - 1e-12));

    RasterGrid grid(body_w + 2 * margin_px, body_h + 2 * margin_px, pixel_size,
                    layout.bbox.x - margin_px * pixel_size,
                    layout.bbox.y - margin_px * pixel_size);

    for (const Rect& r : layout.rects) {
        // Pixel-center range covered by [r.x, r.x+r.w) x [r.y, r.y+r.h).
        const int ix0 = std::max(
            0, static_cast<int>(std::ceil((r.x - grid.origin_x) / pixel_size - 0.5)));
        const int iy0 = std::max(
            0, static_cast<int>(std::ceil((r.y - grid.origin_y) / pixel_size - 0.5)));
        for (int iy = iy0; iy < grid.height && grid.center_y(iy) < r.y + r.h; ++iy) {
            if (grid.center_y(iy) < r.y) continue;
            for (int ix = ix0; ix < grid.width && grid.center_x(ix) < r.x + r.w; ++ix) {
                if (grid.center_x(ix) >= r.x) grid.at(ix, iy) = 1.0;
            }
        }
    }
    return grid;
}

double fill_fraction(const RasterGrid& grid, const std::optional<Rect>& region) {
    if (grid.size() == 0) throw ValidationError("fill_fraction: empty grid");
    if (!region) {
        double sum = 0.0;
        for (double v : grid.values) sum += v;
        return sum / static_cast<double>(grid.size());
    }
    region->validate("fill_fraction region");
    const double gx0 = grid.origin_x, gy0 = grid.origin_y;
    const double gx1 = gx0 + grid.width * grid.pixel_size;
    const double gy1 = gy0 + grid.height * grid.pixel_size;
    if (region->x < gx0 - 1e-9 || region->y < gy0 - 1e-9 ||
        region->x + region->w > gx1 + 1e-9 || region->y + region->h > gy1 + 1e-9) {
        throw ValidationError("fill_fraction: region extends outside the grid");
    }
    double sum = 0.0;
    long count = 0;
    for (int iy = 0; iy < grid.height; ++iy) {
        const double cy = grid.center_y(iy);
        if (cy < region->y || cy >= region->y + region->h) continue;
        for (int ix = 0; ix < grid.width; ++ix) {
            const double cx = grid.center_x(ix);
            if (cx < region->x || cx >= region->x + region->w) continue;
            sum += grid.at(ix, iy);
            ++count;
        }
    }
    if (count == 0) throw ValidationError("fill_fraction: region covers no pixel centers");
    return sum / static_cast<double>(count);
}

}  // namespace peclab
