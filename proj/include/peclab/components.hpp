#pragma once

#include <vector>

#include "peclab/raster.hpp"

namespace peclab {

/// One 4-connected region of set pixels. Pixels are linear row-major indices,
/// sorted ascending. Components are ordered by their first (row-major) pixel.
struct Component {
    int id = 0;
    std::vector<int> pixels;
    std::vector<int> source_rect_ids;  // design rects overlapping this region
};

/// BFS labeling with 4-connectivity. Empty grid gives an empty list.
std::vector<Component> connected_components(const RasterGrid& grid);

/// Fills source_rect_ids: rect i is attached to every component that owns at
/// least one pixel whose center lies inside rect i.
void attach_source_rects(std::vector<Component>& components, const RasterGrid& grid,
                         const Layout& layout);

}  // namespace peclab
