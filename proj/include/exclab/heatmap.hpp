#pragma once

// Raster rendering of one sweep column.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace exclab {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;

    /// Throws UnknownColumn.
    std::size_t column(const std::string &name) const;
};

/// Parses a sweep CSV. Empty cells are missing values; "inf" and "nan" are
/// accepted. Throws MalformedCsv.
CsvTable read_csv(std::istream &in);

struct Heatmap {
    std::size_t width = 0;  ///< number of V_g points
    std::size_t height = 0; ///< number of V_sd points
    double min = 0.0;       ///< over finite cells
    double max = 0.0;
    std::size_t missing = 0; ///< empty or non-finite cells, drawn black
    std::vector<unsigned char> rgb; ///< row 0 is the largest V_sd
};

/// One pixel per grid point, V_g along x and V_sd along y (upwards), linear
/// blue-white-red map from min to max; a constant column is uniform.
/// Throws UnknownColumn or MalformedCsv.
Heatmap render_heatmap(const CsvTable &table, const std::string &column);

/// Binary P6 portable pixmap.
void write_ppm(std::ostream &out, const Heatmap &h);

/// Reads csv_path, writes out_path (PPM) and out_path + ".txt" with the
/// column name and its min/max.
Heatmap heatmap_file(const std::string &csv_path, const std::string &column, const std::string &out_path);

} // namespace exclab
