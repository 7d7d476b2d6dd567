#include "ambient/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "ambient/errors.hpp"
#include "ambient/grid_io.hpp"

namespace ambient::plot {

namespace {

// 5x7 glyphs, row strings top to bottom; lowercase maps to uppercase.
const std::map<char, std::array<const char*, 7>>& font() {
    static const std::map<char, std::array<const char*, 7>> f = {
        {'0', {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}},
        {'1', {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
        {'2', {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}},
        {'3', {" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "}},
        {'4', {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}},
        {'5', {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}},
        {'6', {" ### ", "#    ", "#    ", "#### ", "#   #", "#   #", " ### "}},
        {'7', {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "}},
        {'8', {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}},
        {'9', {" ### ", "#   #", "#   #", " ####", "    #", "    #", " ### "}},
        {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
        {'B', {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}},
        {'C', {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}},
        {'D', {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}},
        {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
        {'F', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}},
        {'G', {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ### "}},
        {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
        {'I', {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
        {'J', {"    #", "    #", "    #", "    #", "    #", "#   #", " ### "}},
        {'K', {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}},
        {'L', {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}},
        {'M', {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}},
        {'N', {"#   #", "##  #", "# # #", "#  ##", "#   #", "#   #", "#   #"}},
        {'O', {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
        {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
        {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
        {'R', {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}},
        {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
        {'T', {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'U', {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
        {'V', {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}},
        {'W', {"#   #", "#   #", "#   #", "# # #", "# # #", "## ##", "#   #"}},
        {'X', {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}},
        {'Y', {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'Z', {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}},
        {'.', {"     ", "     ", "     ", "     ", "     ", "  ## ", "  ## "}},
        {',', {"     ", "     ", "     ", "     ", "  ## ", "  #  ", " #   "}},
        {'-', {"     ", "     ", "     ", " ### ", "     ", "     ", "     "}},
        {'+', {"     ", "  #  ", "  #  ", "#####", "  #  ", "  #  ", "     "}},
        {'_', {"     ", "     ", "     ", "     ", "     ", "     ", "#####"}},
        {'/', {"    #", "    #", "   # ", "  #  ", " #   ", "#    ", "#    "}},
        {':', {"     ", "  ## ", "  ## ", "     ", "  ## ", "  ## ", "     "}},
        {'(', {"   # ", "  #  ", " #   ", " #   ", " #   ", "  #  ", "   # "}},
        {')', {" #   ", "  #  ", "   # ", "   # ", "   # ", "  #  ", " #   "}},
        {'=', {"     ", "     ", "#####", "     ", "#####", "     ", "     "}},
        {'%', {"##  #", "##  #", "   # ", "  #  ", " #   ", "#  ##", "#  ##"}},
        {' ', {"     ", "     ", "     ", "     ", "     ", "     ", "     "}},
    };
    return f;
}

constexpr Rgb kBlack{20, 20, 20};
constexpr Rgb kGrid{220, 220, 220};

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

Rgb palette(int i) {
    static const Rgb p[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                            {214, 39, 40},  {148, 103, 189}, {140, 86, 75}};
    return p[i % 6];
}

Canvas::Canvas(int w, int h) : width(w), height(h), px(static_cast<size_t>(w) * h * 3, 255) {}

void Canvas::set(int x, int y, Rgb c) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    px[i] = c.r;
    px[i + 1] = c.g;
    px[i + 2] = c.b;
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
        for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c);
}

void Canvas::line(double x0, double y0, double x1, double y1, Rgb c) {
    const double dx = x1 - x0, dy = y1 - y0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        set(static_cast<int>(std::lround(x0 + t * dx)), static_cast<int>(std::lround(y0 + t * dy)), c);
    }
}

void Canvas::text(int x, int y, const std::string& s, Rgb c) {
    const auto& f = font();
    int cx = x;
    for (char ch : s) {
        const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        auto it = f.find(up);
        if (it != f.end()) {
            for (int ry = 0; ry < 7; ++ry)
                for (int rx = 0; rx < 5; ++rx)
                    if (it->second[ry][rx] == '#') set(cx + rx, y + ry, c);
        }
        cx += 6;
    }
}

void Canvas::save(const std::filesystem::path& path) const {
    write_png(path, width, height, 3, px);
}

namespace {

struct Frame {
    int left, right, top, bottom;  // plot area in pixels
    double xmin, xmax, ymin, ymax;

    double sx(double x) const {
        return left + (x - xmin) / (xmax - xmin) * (right - left);
    }
    double sy(double y) const {
        return bottom - (y - ymin) / (ymax - ymin) * (bottom - top);
    }
};

void draw_axes(Canvas& cv, const Frame& fr, const std::string& x_label,
               const std::string& y_label, bool log_y) {
    for (int i = 0; i <= 4; ++i) {
        const double fx = fr.xmin + (fr.xmax - fr.xmin) * i / 4.0;
        const double fy = fr.ymin + (fr.ymax - fr.ymin) * i / 4.0;
        const int px = static_cast<int>(fr.sx(fx));
        const int py = static_cast<int>(fr.sy(fy));
        cv.line(px, fr.top, px, fr.bottom, kGrid);
        cv.line(fr.left, py, fr.right, py, kGrid);
        cv.text(px - 12, fr.bottom + 6, fmt_tick(fx), kBlack);
        const double shown_y = log_y ? std::pow(10.0, fy) : fy;
        cv.text(4, py - 3, fmt_tick(shown_y), kBlack);
    }
    cv.line(fr.left, fr.bottom, fr.right, fr.bottom, kBlack);
    cv.line(fr.left, fr.top, fr.left, fr.bottom, kBlack);
    cv.text((fr.left + fr.right) / 2 - 3 * static_cast<int>(x_label.size()), fr.bottom + 18,
            x_label, kBlack);
    cv.text(4, fr.top - 12, y_label + (log_y ? " (log)" : ""), kBlack);
}

}  // namespace

void line_chart(const std::filesystem::path& path, const std::vector<Series>& series,
                const std::string& x_label, const std::string& y_label, bool log_y, int width,
                int height) {
    if (series.empty()) throw ConfigError("line_chart: no series");
    Canvas cv(width, height);
    Frame fr{56, width - 12, 24, height - 40, 0, 1, 0, 1};

    bool any = false;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (log_y) {
                if (y <= 0.0) continue;
                y = std::log10(y);
            }
            if (!any) {
                xmin = xmax = s.x[i];
                ymin = ymax = y;
                any = true;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    if (!any) throw ConfigError("line_chart: no drawable points");
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    fr.xmin = xmin;
    fr.xmax = xmax;
    fr.ymin = ymin;
    fr.ymax = ymax;

    draw_axes(cv, fr, x_label, y_label, log_y);
    int li = 0;
    for (const auto& s : series) {
        double lx = 0, ly = 0;
        bool has_last = false;
        for (size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (log_y) {
                if (y <= 0.0) {
                    has_last = false;
                    continue;
                }
                y = std::log10(y);
            }
            const double cx = fr.sx(s.x[i]), cy = fr.sy(y);
            if (has_last) cv.line(lx, ly, cx, cy, s.color);
            lx = cx;
            ly = cy;
            has_last = true;
        }
        cv.fill_rect(fr.left + 8, fr.top + 6 + 12 * li, fr.left + 20, fr.top + 12 + 12 * li, s.color);
        cv.text(fr.left + 26, fr.top + 4 + 12 * li, s.label, kBlack);
        ++li;
    }
    cv.save(path);
}

void grouped_bar_chart(const std::filesystem::path& path,
                       const std::vector<std::string>& group_labels,
                       const std::vector<std::string>& series_labels,
                       const std::vector<std::vector<double>>& values, const std::string& y_label,
                       int width, int height) {
    if (values.size() != group_labels.size())
        throw ConfigError("grouped_bar_chart: group/value count mismatch");
    const int n_groups = static_cast<int>(group_labels.size());
    const int n_series = static_cast<int>(series_labels.size());
    if (n_groups == 0 || n_series == 0) throw ConfigError("grouped_bar_chart: empty input");

    double ymax = 0.0;
    for (const auto& g : values)
        for (double v : g) ymax = std::max(ymax, v);
    if (ymax <= 0.0) ymax = 1.0;

    Canvas cv(width, height);
    Frame fr{56, width - 12, 24, height - 40, 0, static_cast<double>(n_groups), 0, ymax * 1.08};
    for (int i = 0; i <= 4; ++i) {
        const double fy = fr.ymax * i / 4.0;
        const int py = static_cast<int>(fr.sy(fy));
        cv.line(fr.left, py, fr.right, py, kGrid);
        cv.text(4, py - 3, fmt_tick(fy), kBlack);
    }
    cv.line(fr.left, fr.bottom, fr.right, fr.bottom, kBlack);
    cv.line(fr.left, fr.top, fr.left, fr.bottom, kBlack);

    const double group_w = (fr.right - fr.left) / static_cast<double>(n_groups);
    const double bar_w = group_w * 0.8 / n_series;
    for (int g = 0; g < n_groups; ++g) {
        const double gx0 = fr.left + g * group_w + group_w * 0.1;
        for (int s = 0; s < n_series && s < static_cast<int>(values[g].size()); ++s) {
            const int x0 = static_cast<int>(gx0 + s * bar_w);
            const int x1 = static_cast<int>(gx0 + (s + 1) * bar_w) - 1;
            const int y1 = static_cast<int>(fr.sy(values[g][s]));
            cv.fill_rect(x0, y1, x1, fr.bottom - 1, palette(s));
        }
        cv.text(static_cast<int>(gx0 + group_w * 0.4 - 3.0 * group_labels[g].size()),
                fr.bottom + 6, group_labels[g], kBlack);
    }
    for (int s = 0; s < n_series; ++s) {
        cv.fill_rect(fr.left + 8, fr.top + 6 + 12 * s, fr.left + 20, fr.top + 12 + 12 * s, palette(s));
        cv.text(fr.left + 26, fr.top + 4 + 12 * s, series_labels[s], kBlack);
    }
    cv.text(4, fr.top - 12, y_label, kBlack);
    cv.save(path);
}

}  // namespace ambient::plot
