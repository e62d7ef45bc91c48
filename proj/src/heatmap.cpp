#include "exclab/heatmap.hpp"

#include "exclab/errors.hpp"
#include "exclab/format.hpp"
#include "exclab/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace exclab {

std::size_t CsvTable::column(const std::string &name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw UnknownColumn("column '" + name + "' not in CSV");
    }
    return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            return out;
        }
        start = comma + 1;
    }
}

std::optional<double> parse_cell(const std::string &cell, std::size_t line) {
    if (cell.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const char *end = cell.data() + cell.size();
    const auto r = std::from_chars(cell.data(), end, v);
    if (r.ec != std::errc{} || r.ptr != end) {
        throw MalformedCsv("line " + std::to_string(line) + ": bad number '" + cell + "'");
    }
    return v;
}

} // namespace

CsvTable read_csv(std::istream &in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line) || line.empty()) {
        throw MalformedCsv("missing header");
    }
    t.header = split_line(line);
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        const auto cells = split_line(line);
        if (cells.size() != t.header.size()) {
            throw MalformedCsv("line " + std::to_string(number) + ": expected " +
                               std::to_string(t.header.size()) + " cells, got " +
                               std::to_string(cells.size()));
        }
        std::vector<std::optional<double>> row;
        row.reserve(cells.size());
        for (const auto &c : cells) {
            row.push_back(parse_cell(c, number));
        }
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) {
        throw MalformedCsv("no data rows");
    }
    return t;
}

namespace {

std::array<unsigned char, 3> colour(double x) {
    // 0 -> blue, 0.5 -> white, 1 -> red
    const double lo[3] = {0.0, 0.0, 1.0};
    const double mid[3] = {1.0, 1.0, 1.0};
    const double hi[3] = {1.0, 0.0, 0.0};
    std::array<unsigned char, 3> out{};
    for (int k = 0; k < 3; ++k) {
        const double v = x < 0.5 ? lo[k] + (mid[k] - lo[k]) * (x / 0.5)
                                 : mid[k] + (hi[k] - mid[k]) * ((x - 0.5) / 0.5);
        out[k] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    }
    return out;
}

} // namespace

Heatmap render_heatmap(const CsvTable &table, const std::string &column) {
    const std::size_t value_col = table.column(column);
    std::size_t vg_col = 0, vsd_col = 0;
    try {
        vg_col = table.column("vg");
        vsd_col = table.column("vsd");
    } catch (const UnknownColumn &) {
        throw MalformedCsv("CSV needs vg and vsd columns to place pixels");
    }

    const auto &rows = table.rows;
    const auto first_vsd = rows.front()[vsd_col];
    if (!first_vsd) {
        throw MalformedCsv("empty vsd cell");
    }
    std::size_t width = 0;
    while (width < rows.size() && rows[width][vsd_col] == first_vsd) {
        ++width;
    }
    if (rows.size() % width != 0) {
        throw MalformedCsv("row count is not a multiple of the V_g points per V_sd line");
    }
    const std::size_t height = rows.size() / width;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k][vg_col] != rows[k % width][vg_col] ||
            rows[k][vsd_col] != rows[(k / width) * width][vsd_col]) {
            throw MalformedCsv("rows are not a V_sd-major grid");
        }
    }

    Heatmap h;
    h.width = width;
    h.height = height;
    h.min = std::numeric_limits<double>::infinity();
    h.max = -std::numeric_limits<double>::infinity();
    for (const auto &r : rows) {
        if (r[value_col] && std::isfinite(*r[value_col])) {
            h.min = std::min(h.min, *r[value_col]);
            h.max = std::max(h.max, *r[value_col]);
        } else {
            ++h.missing;
        }
    }
    if (h.missing == rows.size()) {
        h.min = h.max = std::numeric_limits<double>::quiet_NaN();
    }

    h.rgb.assign(width * height * 3, 0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto &v = rows[k][value_col];
        if (!v || !std::isfinite(*v)) {
            continue;
        }
        const double x = h.max > h.min ? (*v - h.min) / (h.max - h.min) : 0.5;
        const std::size_t px = k % width;
        const std::size_t py = height - 1 - k / width;
        const auto c = colour(x);
        std::copy(c.begin(), c.end(), h.rgb.begin() + static_cast<std::ptrdiff_t>((py * width + px) * 3));
    }
    return h;
}

void write_ppm(std::ostream &out, const Heatmap &h) {
    out << "P6\n" << h.width << ' ' << h.height << "\n255\n";
    out.write(reinterpret_cast<const char *>(h.rgb.data()), static_cast<std::streamsize>(h.rgb.size()));
}

Heatmap heatmap_file(const std::string &csv_path, const std::string &column, const std::string &out_path) {
    std::ifstream in(csv_path);
    if (!in) {
        throw MalformedCsv("cannot open " + csv_path);
    }
    const CsvTable table = read_csv(in);
    const Heatmap h = render_heatmap(table, column);

    std::ostringstream image;
    write_ppm(image, h);
    write_file_atomic(out_path, image.str());

    std::ostringstream note;
    note << "column " << column << "\nmin " << format_double(h.min) << "\nmax " << format_double(h.max)
         << "\nwidth " << h.width << "\nheight " << h.height << "\nmissing " << h.missing << '\n';
    write_file_atomic(out_path + ".txt", note.str());
    return h;
}

} // namespace exclab
