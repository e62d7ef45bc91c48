#include "exclab/sweep.hpp"

#include "exclab/errors.hpp"
#include "exclab/excursion.hpp"
#include "exclab/format.hpp"
#include "exclab/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace exclab {

std::size_t column_index(const std::string &name) {
    for (std::size_t i = 0; i < kSweepColumns.size(); ++i) {
        if (name == kSweepColumns[i]) {
            return i;
        }
    }
    throw UnknownColumn("unknown column '" + name + "'");
}

SweepRow compute_row(const SweepConfig &cfg, double vg, double vsd, bool shift) {
    const DqdParams p = cfg.params(vg, vsd, shift);
    const RateMatrix m = build_model(p);
    const BlockDecomposition d = partition(m, kEmpty);
    const WeightScheme transport = transport_weights(Lead::right, m.size());
    const ExcursionReport r = excursion_report(d, transport);
    const Populations pop = populations(m);
    const BoundsReport b = uncertainty_bounds(d, p, transport);

    SweepRow row;
    auto set = [&row](const char *name, double v) { row[column_index(name)] = v; };
    set("vg", vg);
    set("vsd", vsd);
    set("j_qr", r.j);
    set("d_qr", r.d);
    set("d1", r.d1);
    set("d2", r.d2);
    set("d3", r.d3);
    if (std::abs(r.j) >= kZeroCurrent) {
        set("fano", fano(r.j, r.d));
    }
    set("j_act", b.j_activity);
    set("j_sigma", b.j_sigma);
    set("mu", r.mu);
    set("e_t", r.e_t);
    set("var_t", r.var_t);
    set("e_tau", r.e_tau);
    set("cov_qt", r.cov_qt);
    set("p00", pop.p00);
    set("p10", pop.p10);
    set("p01", pop.p01);
    if (!p.blockade) {
        set("p11", pop.p11);
    }
    set("mi", mutual_information(pop));
    if (p.blockade) {
        const OutcomeTriple o = success_fail_disaster(p);
        set("p_suc", o.p_suc);
        set("p_fail", o.p_fail);
        set("p_dis", o.p_dis);
    }
    set("tur_lhs", b.lhs);
    set("tur_rhs", b.tur_rhs);
    set("kur_rhs", b.kur_rhs);
    set("cur_rhs", b.cur_rhs);
    return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig &cfg, bool shift, unsigned workers) {
    cfg.validate();
    const std::size_t ng = cfg.vg.n, nsd = cfg.vsd.n;
    const std::size_t total = ng * nsd;
    std::vector<SweepRow> rows(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto work = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            try {
                rows[k] = compute_row(cfg, cfg.vg.at(k % ng), cfg.vsd.at(k / ng), shift);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_lock);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = total;
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(workers, 1, total);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < threads; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

std::vector<std::size_t> selected_columns(const SweepConfig &cfg) {
    std::vector<std::size_t> out;
    if (cfg.columns.empty()) {
        for (std::size_t i = 0; i < kSweepColumns.size(); ++i) {
            out.push_back(i);
        }
        return out;
    }
    for (const auto &name : cfg.columns) {
        out.push_back(column_index(name));
    }
    return out;
}

void write_csv_header(std::ostream &out, const std::vector<std::size_t> &columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << kSweepColumns[columns[i]];
    }
    out << '\n';
}

void write_csv_row(std::ostream &out, const SweepRow &row, const std::vector<std::size_t> &columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) {
            out << ',';
        }
        if (const auto &v = row[columns[i]]) {
            out << format_double(*v);
        }
    }
    out << '\n';
}

void write_file_atomic(const std::string &path, const std::string &content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write " + temp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(temp, ec);
            throw ConfigError("write failed for " + temp.string());
        }
    }
    std::error_code ec;
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp, ec);
        throw ConfigError("cannot rename into " + path);
    }
}

} // namespace exclab
