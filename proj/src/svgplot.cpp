#include "trajflow/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "trajflow/csv.hpp"
#include "trajflow/errors.hpp"

namespace trajflow {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series, bool log_x) {
    const double width = 640, height = 420;
    const double ml = 66, mr = 24, mt = 40, mb = 52;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            const double xv = log_x ? std::log10(std::max(x, 1e-12)) : x;
            xmin = std::min(xmin, xv);
            xmax = std::max(xmax, xv);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) {
        const double xv = log_x ? std::log10(std::max(x, 1e-12)) : x;
        return ml + (xv - xmin) / (xmax - xmin) * pw;
    };
    auto sy = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::ofstream out(path);
    if (!out) throw IoError("svg: cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
           "font-family=\"sans-serif\">"
        << xml_escape(title) << "</text>\n";

    // axes and ticks
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double px = ml + pw * i / 4.0;
        const double label = log_x ? std::pow(10.0, fx) : fx;
        out << "<line x1=\"" << px << "\" y1=\"" << mt + ph << "\" x2=\"" << px << "\" y2=\""
            << mt + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px << "\" y=\"" << mt + ph + 19
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
            << num(label) << "</text>\n";
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double py = sy(fy);
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << num(fy)
            << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << xml_escape(x_label) << "</text>\n"
        << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (auto [x, y] : series[si].points) out << num(sx(x)) << ',' << num(sy(y)) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << ml + pw - 6 << "\" y=\"" << mt + 16 + 16 * static_cast<double>(si)
            << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" fill=\""
            << color << "\">" << xml_escape(series[si].label) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("svg: failed writing " + path);
}

void write_maze_overlay_svg(const std::string& path, const MazeSpec& maze,
                            const std::vector<Array>& trajs) {
    const double scale = 36.0;
    const double width = static_cast<double>(maze.cols) * scale;
    const double height = static_cast<double>(maze.rows) * scale;
    const double unit = scale / maze.cell_size;

    std::ofstream out(path);
    if (!out) throw IoError("svg: cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t r = 0; r < maze.rows; ++r) {
        for (std::size_t c = 0; c < maze.cols; ++c) {
            if (maze.occ[maze.index(r, c)]) {
                out << "<rect x=\"" << static_cast<double>(c) * scale << "\" y=\""
                    << static_cast<double>(r) * scale << "\" width=\"" << scale << "\" height=\""
                    << scale << "\" fill=\"#444444\"/>\n";
            }
        }
    }
    for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
        const Array& tr = trajs[ti];
        const char* color = ti == 0 ? "#000000" : kColors[(ti - 1) % 10];
        const char* width_attr = ti == 0 ? "2.5" : "1.4";
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width_attr
            << "\" opacity=\"" << (ti == 0 ? "1.0" : "0.75") << "\" points=\"";
        for (std::size_t i = 0; i < tr.dim(0); ++i) {
            out << num(tr.at(i, 0) * unit) << ',' << num(tr.at(i, 1) * unit) << ' ';
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("svg: failed writing " + path);
}

}  // namespace trajflow
