#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace ambient::plot {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

// Plots are a convenience rendering; the CSV written alongside is always
// the authoritative record.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    Rgb color;
};

Rgb palette(int i);

struct Canvas {
    int width, height;
    std::vector<std::uint8_t> px;  // RGB8

    Canvas(int w, int h);
    void set(int x, int y, Rgb c);
    void fill_rect(int x0, int y0, int x1, int y1, Rgb c);
    void line(double x0, double y0, double x1, double y1, Rgb c);
    void text(int x, int y, const std::string& s, Rgb c);  // 5x7 glyphs
    void save(const std::filesystem::path& path) const;
};

void line_chart(const std::filesystem::path& path, const std::vector<Series>& series,
                const std::string& x_label, const std::string& y_label, bool log_y = false,
                int width = 720, int height = 480);

// values[group][series]
void grouped_bar_chart(const std::filesystem::path& path,
                       const std::vector<std::string>& group_labels,
                       const std::vector<std::string>& series_labels,
                       const std::vector<std::vector<double>>& values,
                       const std::string& y_label, int width = 720, int height = 480);

}  // namespace ambient::plot
