#include "exclab/config.hpp"

#include "exclab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

namespace exclab {

namespace {

std::string trim(const std::string &s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        parts.push_back(trim(item));
    }
    return parts;
}

double to_double(const std::string &key, const std::string &text) {
    double v = 0.0;
    const char *end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc{} || r.ptr != end || !std::isfinite(v)) {
        throw ConfigError("bad number for " + key + ": '" + text + "'");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string &key, const std::string &text) {
    std::uint64_t v = 0;
    const char *end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc{} || r.ptr != end) {
        throw ConfigError("bad integer for " + key + ": '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string &key, std::string text) {
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
    if (text == "1" || text == "true" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "0" || text == "false" || text == "no" || text == "off") {
        return false;
    }
    throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

} // namespace

double GridAxis::at(std::size_t i) const {
    if (n <= 1) {
        return lo;
    }
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void SweepConfig::validate() const {
    if (!(g > 0.0) || !(gamma > 0.0) || !(temperature > 0.0) || !(U >= 0.0)) {
        throw ConfigError("need g > 0, gamma > 0, temperature > 0, U >= 0");
    }
    for (const GridAxis *axis : {&vg, &vsd}) {
        if (axis->n < 1 || !(axis->lo <= axis->hi)) {
            throw ConfigError("grid axes need n >= 1 and lo <= hi");
        }
    }
    if (workers < 1) {
        throw ConfigError("workers must be at least 1");
    }
}

DqdParams SweepConfig::params(double vg_coord, double vsd_value, bool shift) const {
    const double vg_model = shift ? vg_coord - U / 2.0 : vg_coord;
    return DqdParams::symmetric(g, gamma, temperature, U, vg_model, vsd_value, blockade);
}

void apply_grid(SweepConfig &cfg, const std::string &spec) {
    for (const std::string &part : split(spec, ',')) {
        if (part.empty()) {
            continue;
        }
        const auto fields = split(part, ':');
        if (fields.size() != 4) {
            throw ConfigError("grid axis must be name:lo:hi:n, got '" + part + "'");
        }
        GridAxis axis{to_double("grid", fields[1]), to_double("grid", fields[2]),
                      static_cast<std::size_t>(to_unsigned("grid", fields[3]))};
        if (axis.n < 1 || !(axis.lo <= axis.hi)) {
            throw ConfigError("grid axis needs n >= 1 and lo <= hi: '" + part + "'");
        }
        if (fields[0] == "vg") {
            cfg.vg = axis;
        } else if (fields[0] == "vsd") {
            cfg.vsd = axis;
        } else {
            throw ConfigError("unknown grid axis '" + fields[0] + "'");
        }
    }
}

void apply_key(SweepConfig &cfg, const std::string &key, const std::string &value) {
    if (key == "g") {
        cfg.g = to_double(key, value);
    } else if (key == "gamma") {
        cfg.gamma = to_double(key, value);
    } else if (key == "temperature" || key == "T") {
        cfg.temperature = to_double(key, value);
    } else if (key == "U") {
        cfg.U = to_double(key, value);
    } else if (key == "vg" || key == "vsd") {
        apply_grid(cfg, key + ":" + value);
    } else if (key == "grid") {
        apply_grid(cfg, value);
    } else if (key == "blockade") {
        cfg.blockade = to_bool(key, value);
    } else if (key == "gate_shift") {
        cfg.gate_shift = to_bool(key, value);
    } else if (key == "workers") {
        const auto w = to_unsigned(key, value);
        if (w < 1 || w > 4096) {
            throw ConfigError("workers must be in [1, 4096]");
        }
        cfg.workers = static_cast<unsigned>(w);
    } else if (key == "seed") {
        cfg.seed = to_unsigned(key, value);
    } else if (key == "excursions") {
        cfg.excursions = static_cast<std::size_t>(to_unsigned(key, value));
    } else if (key == "columns") {
        cfg.columns.clear();
        for (const auto &c : split(value, ',')) {
            if (!c.empty()) {
                cfg.columns.push_back(c);
            }
        }
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

SweepConfig parse_config(std::istream &in, SweepConfig base) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        try {
            apply_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError &e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    return base;
}

SweepConfig load_config(const std::string &path, SweepConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    return parse_config(in, std::move(base));
}

unsigned resolve_workers(std::optional<unsigned> flag, unsigned configured) {
    if (flag) {
        if (*flag < 1) {
            throw ConfigError("--workers must be at least 1");
        }
        return *flag;
    }
    if (const char *env = std::getenv("EXCLAB_WORKERS"); env != nullptr && *env != '\0') {
        const auto w = to_unsigned("EXCLAB_WORKERS", trim(env));
        if (w < 1 || w > 4096) {
            throw ConfigError("EXCLAB_WORKERS must be in [1, 4096]");
        }
        return static_cast<unsigned>(w);
    }
    return configured;
}

} // namespace exclab
