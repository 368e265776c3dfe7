#pragma once

#include <string>
#include <vector>

namespace peclab {

/// Axis-aligned rectangle, nm units, half-open in both axes: [x, x+w) x [y, y+h).
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool contains(double px, double py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    double area() const { return w * h; }

    /// Throws ValidationError unless w > 0, h > 0 and all coordinates are finite.
    void validate(const std::string& context) const;
};

/// A device design: a named list of rectangles plus its bounding box.
/// Generators may set a bbox larger than the tight rect union (the lead-array
/// cell convention); loaded layouts get the tight union.
struct Layout {
    std::string name;
    std::vector<Rect> rects;
    Rect bbox;

    /// Sum of rect areas over bbox area. Equals width/pitch for lead arrays.
    double fill_fraction() const;

    void validate() const;
};

Rect tight_bbox(const std::vector<Rect>& rects);

/// n parallel leads at the given pitch; lead k occupies [k*pitch, k*pitch + width).
/// The bbox is the full n*pitch x length cell, so fill_fraction() == width/pitch.
Layout lead_array(int n, double pitch, double width, double length,
                  const std::string& name = "lead_array");

}  // namespace peclab
