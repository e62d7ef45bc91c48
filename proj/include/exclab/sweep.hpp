#pragma once

// Grid evaluation of the double-dot observables and CSV output.

#include "exclab/config.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace exclab {

inline constexpr std::array<const char *, 27> kSweepColumns = {
    "vg",    "vsd",   "j_qr",  "d_qr",   "d1",    "d2",      "d3",     "fano",    "j_act",
    "j_sigma", "mu",  "e_t",   "var_t",  "e_tau", "cov_qt",  "p00",    "p10",     "p01",
    "p11",   "mi",    "p_suc", "p_fail", "p_dis", "tur_lhs", "tur_rhs", "kur_rhs", "cur_rhs"};

/// Index of a column name. Throws UnknownColumn.
std::size_t column_index(const std::string &name);

/// One grid point; an empty cell is a value that does not apply (p11 in
/// blockade mode, outcomes outside it, the Fano factor at zero current).
using SweepRow = std::array<std::optional<double>, kSweepColumns.size()>;

/// Every column at grid coordinate (vg, vsd). The vg column holds the grid
/// coordinate, i.e. the shifted gate when `shift` is set.
SweepRow compute_row(const SweepConfig &cfg, double vg, double vsd, bool shift);

/// Rows in V_sd-major order: row k is (vg[k % n_g], vsd[k / n_g]).
std::vector<SweepRow> run_sweep(const SweepConfig &cfg, bool shift, unsigned workers);

/// Columns selected by cfg.columns (all when empty). Throws UnknownColumn.
std::vector<std::size_t> selected_columns(const SweepConfig &cfg);

void write_csv_header(std::ostream &out, const std::vector<std::size_t> &columns);
void write_csv_row(std::ostream &out, const SweepRow &row, const std::vector<std::size_t> &columns);

/// Writes `content` to `path` through a temporary file and a rename, so a
/// partial file is never left behind.
void write_file_atomic(const std::string &path, const std::string &content);

} // namespace exclab
