#include "peclab/textio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "peclab/errors.hpp"

namespace peclab {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 17);
    std::string s(buf, res.ptr);
    // Trim trailing zeros in the mantissa that precision-17 rendering keeps.
    const auto epos = s.find_first_of("eE");
    std::string mant = epos == std::string::npos ? s : s.substr(0, epos);
    const std::string exp = epos == std::string::npos ? "" : s.substr(epos);
    if (mant.find('.') != std::string::npos) {
        std::size_t last = mant.find_last_not_of('0');
        if (mant[last] == '.') --last;
        mant.erase(last + 1);
    }
    return mant + exp;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace

CsvTable read_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw ValidationError(path + ": line " + std::to_string(lineno) + " has " +
                                      std::to_string(fields.size()) + " fields, expected " +
                                      std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) throw ValidationError(path + ": empty CSV");
    return table;
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e) {
        throw ValidationError(context + ": cannot parse '" + s + "' as a number");
    }
    return v;
}

long parse_long(const std::string& s, const std::string& context) {
    long v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e) {
        throw ValidationError(context + ": cannot parse '" + s + "' as an integer");
    }
    return v;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void write_pgm(const std::string& path, const RasterGrid& grid) {
    if (!grid.is_binary()) throw ValidationError("write_pgm: grid must be binary");
    std::string out = "P5\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) +
                      "\n255\n";
    out.reserve(out.size() + grid.size());
    for (int iy = 0; iy < grid.height; ++iy) {
        for (int ix = 0; ix < grid.width; ++ix) {
            out += grid.at(ix, iy) != 0.0 ? static_cast<char>(255) : static_cast<char>(0);
        }
    }
    write_text_file(path, out);
}

void write_grid_csv(const std::string& path, const RasterGrid& grid) {
    std::string out;
    for (int iy = 0; iy < grid.height; ++iy) {
        for (int ix = 0; ix < grid.width; ++ix) {
            if (ix) out += ',';
            out += format_double(grid.at(ix, iy));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void write_kernel_csv(const std::string& path, const Kernel& kernel) {
    std::string out;
    for (int dy = -kernel.radius; dy <= kernel.radius; ++dy) {
        for (int dx = -kernel.radius; dx <= kernel.radius; ++dx) {
            if (dx > -kernel.radius) out += ',';
            out += format_double(kernel.at(dx, dy));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {
constexpr double kW = 640.0, kH = 420.0;
constexpr double kL = 70.0, kR = 20.0, kT = 20.0, kB = 50.0;
}  // namespace

SvgPlot::SvgPlot(double x_min, double x_max, double y_min, double y_max,
                 std::string x_label, std::string y_label, bool log_x)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max),
      x_label_(std::move(x_label)), y_label_(std::move(y_label)), log_x_(log_x) {
    if (log_x_ && !(x_min > 0.0)) throw ValidationError("SvgPlot: log axis needs positive range");
    if (!(x_max > x_min) || !(y_max > y_min)) throw ValidationError("SvgPlot: empty range");
}

double SvgPlot::sx(double x) const {
    const double t = log_x_ ? (std::log10(x) - std::log10(x_min_)) /
                                  (std::log10(x_max_) - std::log10(x_min_))
                            : (x - x_min_) / (x_max_ - x_min_);
    return kL + t * (kW - kL - kR);
}

double SvgPlot::sy(double y) const {
    const double t = (y - y_min_) / (y_max_ - y_min_);
    return kH - kB - t * (kH - kT - kB);
}

void SvgPlot::add_polyline(const std::vector<std::pair<double, double>>& pts,
                           const std::string& color, bool dashed) {
    std::string p = "<polyline fill=\"none\" stroke=\"" + color + "\"";
    if (dashed) p += " stroke-dasharray=\"6 4\"";
    p += " points=\"";
    for (const auto& [x, y] : pts) {
        p += format_double(sx(x)) + "," + format_double(sy(y)) + " ";
    }
    p += "\"/>";
    shapes_.push_back(std::move(p));
}

void SvgPlot::add_points(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color) {
    for (const auto& [x, y] : pts) {
        shapes_.push_back("<circle cx=\"" + format_double(sx(x)) + "\" cy=\"" +
                          format_double(sy(y)) + "\" r=\"3.5\" fill=\"" + color + "\"/>");
    }
}

void SvgPlot::add_hline(double y, const std::string& color, bool dashed) {
    std::string l = "<line x1=\"" + format_double(sx(x_min_)) + "\" y1=\"" + format_double(sy(y)) +
                    "\" x2=\"" + format_double(sx(x_max_)) + "\" y2=\"" + format_double(sy(y)) +
                    "\" stroke=\"" + color + "\"";
    if (dashed) l += " stroke-dasharray=\"4 4\"";
    l += "/>";
    shapes_.push_back(std::move(l));
}

void SvgPlot::add_vline(double x, const std::string& color, bool dashed) {
    std::string l = "<line x1=\"" + format_double(sx(x)) + "\" y1=\"" + format_double(sy(y_min_)) +
                    "\" x2=\"" + format_double(sx(x)) + "\" y2=\"" + format_double(sy(y_max_)) +
                    "\" stroke=\"" + color + "\"";
    if (dashed) l += " stroke-dasharray=\"4 4\"";
    l += "/>";
    shapes_.push_back(std::move(l));
}

std::string SvgPlot::render() const {
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(kW) +
                      "\" height=\"" + format_double(kH) + "\" viewBox=\"0 0 " +
                      format_double(kW) + " " + format_double(kH) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // frame
    svg += "<rect x=\"" + format_double(kL) + "\" y=\"" + format_double(kT) + "\" width=\"" +
           format_double(kW - kL - kR) + "\" height=\"" + format_double(kH - kT - kB) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    // ticks: 5 per axis
    for (int i = 0; i <= 4; ++i) {
        const double tx = log_x_ ? std::pow(10.0, std::log10(x_min_) +
                                                      (std::log10(x_max_) - std::log10(x_min_)) * i / 4.0)
                                 : x_min_ + (x_max_ - x_min_) * i / 4.0;
        const double ty = y_min_ + (y_max_ - y_min_) * i / 4.0;
        svg += "<line x1=\"" + format_double(sx(tx)) + "\" y1=\"" + format_double(kH - kB) +
               "\" x2=\"" + format_double(sx(tx)) + "\" y2=\"" + format_double(kH - kB + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_double(sx(tx)) + "\" y=\"" + format_double(kH - kB + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + format_double(std::round(tx * 1000) / 1000) +
               "</text>\n";
        svg += "<line x1=\"" + format_double(kL - 5) + "\" y1=\"" + format_double(sy(ty)) +
               "\" x2=\"" + format_double(kL) + "\" y2=\"" + format_double(sy(ty)) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_double(kL - 8) + "\" y=\"" + format_double(sy(ty) + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + format_double(std::round(ty * 1000) / 1000) +
               "</text>\n";
    }
    svg += "<text x=\"" + format_double((kL + kW - kR) / 2) + "\" y=\"" + format_double(kH - 12) +
           "\" font-size=\"13\" text-anchor=\"middle\">" + x_label_ + "</text>\n";
    svg += "<text x=\"16\" y=\"" + format_double((kT + kH - kB) / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           format_double((kT + kH - kB) / 2) + ")\">" + y_label_ + "</text>\n";
    for (const std::string& s : shapes_) svg += s + "\n";
    svg += "</svg>\n";
    return svg;
}

void SvgPlot::write(const std::string& path) const { write_text_file(path, render()); }

}  // namespace peclab
