#pragma once

#include <string>

#include "peclab/geometry.hpp"
#include "peclab/pec.hpp"
#include "peclab/yieldsurface.hpp"

namespace peclab {

/// Layout file schema: {"name": ..., "units": "nm", "rects": [{x,y,w,h}, ...]}.
void save_layout(const std::string& path, const Layout& layout);
Layout load_layout(const std::string& path);  // bbox = tight union of rects

void save_model(const std::string& path, const LogisticModel& model);
LogisticModel load_model(const std::string& path);

void save_eta_fit(const std::string& path, const EtaFit& fit);
EtaFit load_eta_fit(const std::string& path);

void save_window(const std::string& path, const WindowResult& result, double level);

}  // namespace peclab
