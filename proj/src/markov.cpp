#include "exclab/markov.hpp"

#include "exclab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace exclab {

namespace {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

std::string entry_name(Eigen::Index to, Eigen::Index from) {
    std::ostringstream os;
    os << "(" << to << "<-" << from << ")";
    return os.str();
}

void check_dimensions(const RateMatrix &m, const WeightScheme &s) {
    if (s.size() != m.size()) {
        std::ostringstream os;
        os << "weight scheme '" << s.name() << "' has dimension " << s.size()
           << " but the chain has " << m.size() << " states";
        throw DimensionMismatch(os.str());
    }
}

} // namespace

bool is_irreducible(const Matrix &rates) {
    // Tarjan's strongly connected components on the edges y -> x with
    // W(x, y) > 0. Irreducible iff a single component covers every state.
    const auto n = static_cast<int>(rates.rows());
    if (n == 0) {
        return false;
    }
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int counter = 0;
    int components = 0;

    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w = 0; w < n; ++w) {
            if (w == v || !(rates(w, v) > 0.0)) {
                continue;
            }
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            ++components;
            int w = -1;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
            } while (w != v);
        }
    };

    visit(0);
    const bool all_reached = std::all_of(index.begin(), index.end(), [](int i) { return i >= 0; });
    return all_reached && components == 1;
}

RateMatrix validate_rate_matrix(const Matrix &raw, std::vector<std::string> labels) {
    if (raw.rows() != raw.cols()) {
        throw DimensionMismatch("rate matrix must be square");
    }
    const Eigen::Index n = raw.rows();
    if (n < 2) {
        throw DimensionMismatch("rate matrix needs at least two states");
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n) {
        throw DimensionMismatch("label count does not match the number of states");
    }
    for (Eigen::Index from = 0; from < n; ++from) {
        for (Eigen::Index to = 0; to < n; ++to) {
            const double w = raw(to, from);
            if (!std::isfinite(w)) {
                throw NegativeRate("non-finite rate at " + entry_name(to, from));
            }
            if (to == from) {
                if (w != 0.0) {
                    throw NonzeroDiagonal("diagonal entry " + entry_name(to, from) + " must be zero");
                }
            } else if (w < 0.0) {
                throw NegativeRate("negative rate at " + entry_name(to, from));
            }
        }
    }
    if (!is_irreducible(raw)) {
        throw Reducible("the directed graph of nonzero rates is not strongly connected");
    }

    RateMatrix m;
    m.rates_ = raw;
    m.escape_ = raw.colwise().sum().transpose();
    m.generator_ = raw;
    m.generator_.diagonal() = -m.escape_;
    if (labels.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) {
            labels.push_back(std::to_string(i));
        }
    }
    m.labels_ = std::move(labels);

    for (Eigen::Index x = 0; x < n; ++x) {
        const double sum = m.generator_.col(x).sum();
        if (std::abs(sum) > 1e-12 * m.escape_(x)) {
            throw SingularSystem("generator column " + std::to_string(x) + " does not sum to zero");
        }
    }
    return m;
}

ProbabilityVector steady_state(const RateMatrix &m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Matrix bordered = m.generator();
    bordered.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;

    const Eigen::FullPivLU<Matrix> lu(bordered);
    if (!lu.isInvertible()) {
        throw SingularSystem("bordered steady-state system is singular");
    }
    Vector p = lu.solve(rhs);

    for (Eigen::Index i = 0; i < n; ++i) {
        if (p(i) < -1e-12) {
            throw SingularSystem("steady state has a negative component");
        }
        p(i) = std::max(p(i), 0.0);
    }
    p /= p.sum();

    const double residual = (m.generator() * p).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-10 * m.max_escape_rate())) {
        throw SingularSystem("steady-state residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return ProbabilityVector{std::move(p)};
}

WeightScheme::WeightScheme(std::string name, Matrix weights, SchemeKind kind)
    : name_(std::move(name)), weights_(std::move(weights)), kind_(kind) {
    if (weights_.rows() != weights_.cols()) {
        throw InvalidScheme("weight matrix of '" + name_ + "' must be square");
    }
    weights_.diagonal().setZero();
    const Eigen::Index n = weights_.rows();

    if (kind_ == SchemeKind::state) {
        for (Eigen::Index y = 0; y < n; ++y) {
            const double value = n > 1 ? weights_((y + 1) % n, y) : 0.0;
            for (Eigen::Index x = 0; x < n; ++x) {
                if (x != y && weights_(x, y) != value) {
                    throw InvalidScheme("state scheme '" + name_ + "' must have constant off-diagonal columns");
                }
            }
        }
    }

    integer_valued_ = true;
    antisymmetric_ = true;
    for (Eigen::Index y = 0; y < n; ++y) {
        for (Eigen::Index x = 0; x < n; ++x) {
            const double w = weights_(x, y);
            if (!std::isfinite(w)) {
                throw InvalidScheme("weight scheme '" + name_ + "' has a non-finite entry");
            }
            if (w != std::round(w)) {
                integer_valued_ = false;
            }
            if (w != -weights_(y, x)) {
                antisymmetric_ = false;
            }
        }
    }
}

WeightScheme WeightScheme::zeros(std::size_t n, std::string name) {
    const auto dim = static_cast<Eigen::Index>(n);
    return WeightScheme(std::move(name), Matrix::Zero(dim, dim));
}

Matrix tilt_generator(const RateMatrix &m, const WeightScheme &s, double chi) {
    check_dimensions(m, s);
    Matrix tilted = m.generator();
    if (chi == 0.0) {
        return tilted;
    }
    const auto n = static_cast<Eigen::Index>(m.size());
    for (Eigen::Index y = 0; y < n; ++y) {
        for (Eigen::Index x = 0; x < n; ++x) {
            if (x != y) {
                tilted(x, y) = m.rates()(x, y) * std::exp(s.weights()(x, y) * chi);
            }
        }
    }
    return tilted;
}

namespace {

long double dominant_eigenvalue_ld(const RateMatrix &m, const WeightScheme &s, long double chi) {
    const auto n = static_cast<Eigen::Index>(m.size());
    LongMatrix tilted(n, n);
    for (Eigen::Index y = 0; y < n; ++y) {
        for (Eigen::Index x = 0; x < n; ++x) {
            const long double w = m.rates()(x, y);
            tilted(x, y) = (x == y) ? -static_cast<long double>(m.escape_rate(static_cast<std::size_t>(y)))
                                    : w * std::exp(static_cast<long double>(s.weights()(x, y)) * chi);
        }
    }
    // Escape rates re-summed in extended precision so that λ(0) = 0 holds to
    // long double accuracy.
    for (Eigen::Index y = 0; y < n; ++y) {
        long double gamma = 0.0L;
        for (Eigen::Index x = 0; x < n; ++x) {
            if (x != y) {
                gamma += static_cast<long double>(m.rates()(x, y));
            }
        }
        tilted(y, y) = -gamma;
    }

    Eigen::EigenSolver<LongMatrix> solver(tilted, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw EigenFailure("eigenvalue solver did not converge");
    }
    const auto values = solver.eigenvalues();
    long double best = -std::numeric_limits<long double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        best = std::max(best, values(i).real());
    }
    return best;
}

struct Richardson {
    double value;
    double error;
};

// Extrapolates a sequence of estimates with errors in even powers of h,
// each level halving h.
Richardson extrapolate(std::vector<long double> column) {
    const std::size_t levels = column.size();
    std::vector<std::vector<long double>> table(levels);
    for (std::size_t i = 0; i < levels; ++i) {
        table[i].push_back(column[i]);
        long double factor = 1.0L;
        for (std::size_t j = 1; j <= i; ++j) {
            factor *= 4.0L;
            const long double prev = table[i][j - 1];
            table[i].push_back(prev + (prev - table[i - 1][j - 1]) / (factor - 1.0L));
        }
    }
    const long double best = table[levels - 1][levels - 1];
    const long double runner = levels > 1 ? table[levels - 1][levels - 2] : best;
    return {static_cast<double>(best), static_cast<double>(std::abs(best - runner))};
}

} // namespace

double dominant_eigenvalue(const RateMatrix &m, const WeightScheme &s, double chi) {
    check_dimensions(m, s);
    return static_cast<double>(dominant_eigenvalue_ld(m, s, chi));
}

FcsResult fcs_current_noise(const RateMatrix &m, const WeightScheme &s, const FcsOptions &options) {
    check_dimensions(m, s);
    if (options.richardson_levels < 1 || !(options.initial_step > 0.0)) {
        throw StepCollapse("invalid finite-difference options");
    }
    if (s.is_null()) {
        return {0.0, 0.0, 0.0, 0.0};
    }

    const long double lambda0 = dominant_eigenvalue_ld(m, s, 0.0L);
    if (std::abs(lambda0) > 1e-12L * m.max_escape_rate()) {
        throw EigenFailure("dominant eigenvalue at zero counting field is not zero");
    }

    const double max_weight = s.weights().cwiseAbs().maxCoeff();
    long double h = options.initial_step / std::max(1.0, max_weight);
    std::vector<long double> first, second;
    for (int level = 0; level < options.richardson_levels; ++level, h /= 2.0L) {
        const long double plus = dominant_eigenvalue_ld(m, s, h);
        const long double minus = dominant_eigenvalue_ld(m, s, -h);
        first.push_back((plus - minus) / (2.0L * h));
        second.push_back((plus - 2.0L * lambda0 + minus) / (h * h));
    }
    const Richardson current = extrapolate(first);
    const Richardson noise = extrapolate(second);

    auto accepted = [&](const Richardson &r) {
        return std::isfinite(r.value) && r.error <= options.tolerance * std::max(1.0, std::abs(r.value));
    };
    if (!accepted(current) || !accepted(noise)) {
        std::ostringstream os;
        os << "Richardson refinement did not reach tolerance (current error " << current.error
           << ", noise error " << noise.error << ")";
        throw StepCollapse(os.str());
    }
    return {current.value, noise.value, current.error, noise.error};
}

} // namespace exclab
