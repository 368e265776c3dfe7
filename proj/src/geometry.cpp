#include "peclab/geometry.hpp"

#include <cmath>
#include <limits>

#include "peclab/errors.hpp"

namespace peclab {

void Rect::validate(const std::string& context) const {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h))) {
        throw ValidationError(context + ": rect coordinates must be finite");
    }
    if (!(w > 0.0 && h > 0.0)) {
        throw ValidationError(context + ": rect extents must be positive (w=" +
                              std::to_string(w) + ", h=" + std::to_string(h) + ")");
    }
}

double Layout::fill_fraction() const {
    double area = 0.0;
    for (const Rect& r : rects) area += r.area();
    double box = bbox.area();
    if (box <= 0.0) throw ValidationError("layout '" + name + "': degenerate bbox");
    return area / box;
}

void Layout::validate() const {
    if (rects.empty()) throw ValidationError("layout '" + name + "': empty rect list");
    for (std::size_t i = 0; i < rects.size(); ++i) {
        rects[i].validate("layout '" + name + "' rect " + std::to_string(i));
        const Rect& r = rects[i];
        if (r.x < bbox.x || r.y < bbox.y || r.x + r.w > bbox.x + bbox.w + 1e-9 ||
            r.y + r.h > bbox.y + bbox.h + 1e-9) {
            throw ValidationError("layout '" + name + "': rect " + std::to_string(i) +
                                  " outside bbox");
        }
    }
}

Rect tight_bbox(const std::vector<Rect>& rects) {
    if (rects.empty()) throw ValidationError("tight_bbox: empty rect list");
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (const Rect& r : rects) {
        x0 = std::min(x0, r.x);
        y0 = std::min(y0, r.y);
        x1 = std::max(x1, r.x + r.w);
        y1 = std::max(y1, r.y + r.h);
    }
    return Rect{x0, y0, x1 - x0, y1 - y0};
}

Layout lead_array(int n, double pitch, double width, double length, const std::string& name) {
    if (n < 1) throw ValidationError("lead_array: n must be >= 1");
    if (!(pitch > 0.0) || !std::isfinite(pitch)) throw ValidationError("lead_array: pitch must be positive");
    if (!(width > 0.0)) throw ValidationError("lead_array: width must be positive");
    if (width >= pitch) {
        throw ValidationError("lead_array: width (" + std::to_string(width) +
                              ") must be smaller than pitch (" + std::to_string(pitch) +
                              "), otherwise leads overlap");
    }
    if (!(length > 0.0)) throw ValidationError("lead_array: length must be positive");

    Layout layout;
    layout.name = name;
    layout.rects.reserve(n);
    for (int k = 0; k < n; ++k) {
        layout.rects.push_back(Rect{k * pitch, 0.0, width, length});
    }
    layout.bbox = Rect{0.0, 0.0, n * pitch, length};
    return layout;
}

}  // namespace peclab
