#include "peclab/components.hpp"

#include <algorithm>

#include "peclab/errors.hpp"

namespace peclab {

std::vector<Component> connected_components(const RasterGrid& grid) {
    if (!grid.is_binary()) throw ValidationError("connected_components: grid is not binary");

    const int w = grid.width, h = grid.height;
    std::vector<int> label(grid.size(), -1);
    std::vector<Component> out;
    std::vector<int> queue;

    for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
            const int start = static_cast<int>(grid.idx(ix, iy));
            if (grid.values[start] == 0.0 || label[start] >= 0) continue;

            Component comp;
            comp.id = static_cast<int>(out.size());
            queue.clear();
            queue.push_back(start);
            label[start] = comp.id;
            while (!queue.empty()) {
                const int p = queue.back();
                queue.pop_back();
                comp.pixels.push_back(p);
                const int px = p % w, py = p / w;
                const int nb[4] = {px > 0 ? p - 1 : -1, px + 1 < w ? p + 1 : -1,
                                   py > 0 ? p - w : -1, py + 1 < h ? p + w : -1};
                for (int q : nb) {
                    if (q >= 0 && grid.values[q] != 0.0 && label[q] < 0) {
                        label[q] = comp.id;
                        queue.push_back(q);
                    }
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end());
            out.push_back(std::move(comp));
        }
    }
    return out;
}

void attach_source_rects(std::vector<Component>& components, const RasterGrid& grid,
                         const Layout& layout) {
    std::vector<int> label(grid.size(), -1);
    for (const Component& c : components) {
        for (int p : c.pixels) label[p] = c.id;
    }
    for (Component& c : components) c.source_rect_ids.clear();

    for (std::size_t ri = 0; ri < layout.rects.size(); ++ri) {
        const Rect& r = layout.rects[ri];
        std::vector<char> hit(components.size(), 0);
        for (int iy = 0; iy < grid.height; ++iy) {
            const double cy = grid.center_y(iy);
            if (cy < r.y || cy >= r.y + r.h) continue;
            for (int ix = 0; ix < grid.width; ++ix) {
                if (!r.contains(grid.center_x(ix), cy)) continue;
                const int lab = label[grid.idx(ix, iy)];
                if (lab >= 0) hit[lab] = 1;
            }
        }
        for (std::size_t ci = 0; ci < components.size(); ++ci) {
            if (hit[ci]) components[ci].source_rect_ids.push_back(static_cast<int>(ri));
        }
    }
}

}  // namespace peclab
