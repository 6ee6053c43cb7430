#pragma once

// CSV, JSON and SVG sinks. CSV files are the data contract: a header row,
// fixed "%.12g" formatting, NaN written as an empty field.

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace llq::out {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
    /// Throws std::invalid_argument when the width differs from the header.
    void row(const std::vector<double>& values);
    void flush() { os_.flush(); }

private:
    std::filesystem::path path_;
    std::ofstream os_;
    std::size_t width_;
};

/// Formats one value the way CsvWriter does.
std::string format_value(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  ///< empty fields read back as NaN

    /// Index of a named column; throws std::out_of_range if absent.
    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

struct Series {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
    bool dashed = false;
    double width = 1.5;
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
    std::vector<double> vlines;  ///< dashed vertical markers
    /// Optional fixed ranges; NaN means automatic.
    double x_min = std::numeric_limits<double>::quiet_NaN();
    double x_max = std::numeric_limits<double>::quiet_NaN();
    double y_min = std::numeric_limits<double>::quiet_NaN();
    double y_max = std::numeric_limits<double>::quiet_NaN();
};

/// Static line plot. Non-finite points (and non-positive ones on log axes)
/// break the polyline.
void write_svg(const std::filesystem::path& path, const Plot& plot, int width = 720, int height = 480);

/// Distinct line colors, cycled.
const std::string& palette(std::size_t i);

}  // namespace llq::out
