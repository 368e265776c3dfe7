#pragma once

#include <string>
#include <vector>

#include "peclab/fieldkernel.hpp"
#include "peclab/raster.hpp"

namespace peclab {

/// Shortest-round-trip decimal rendering capped at 17 significant digits.
/// Used everywhere a float reaches a file, so outputs are byte-stable.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

/// Comma-separated, '.' decimal, one header row. Throws ValidationError with
/// the line number on ragged rows.
CsvTable read_csv(const std::string& path);

double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Binary mask to 8-bit PGM (P5), set pixels white.
void write_pgm(const std::string& path, const RasterGrid& grid);

/// Real-valued grid as CSV, one row per grid row, width columns.
void write_grid_csv(const std::string& path, const RasterGrid& grid);

/// Kernel weights as CSV for inspection.
void write_kernel_csv(const std::string& path, const Kernel& kernel);

/// Minimal dependency-free SVG line plots: axes, ticks, polylines, guides.
class SvgPlot {
public:
    SvgPlot(double x_min, double x_max, double y_min, double y_max,
            std::string x_label, std::string y_label, bool log_x = false);

    void add_polyline(const std::vector<std::pair<double, double>>& pts,
                      const std::string& color, bool dashed = false);
    void add_points(const std::vector<std::pair<double, double>>& pts,
                    const std::string& color);
    void add_hline(double y, const std::string& color, bool dashed = true);
    void add_vline(double x, const std::string& color, bool dashed = true);

    std::string render() const;
    void write(const std::string& path) const;

private:
    double x_min_, x_max_, y_min_, y_max_;
    std::string x_label_, y_label_;
    bool log_x_;
    std::vector<std::string> shapes_;

    double sx(double x) const;
    double sy(double y) const;
};

}  // namespace peclab
