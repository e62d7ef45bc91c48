#include "exclab/excursion.hpp"

#include "exclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace exclab {

namespace {

using RowVector = Eigen::RowVectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

void check_dimensions(const BlockDecomposition &d, const WeightScheme &s) {
    if (s.size() != d.parent().size()) {
        std::ostringstream os;
        os << "weight scheme '" << s.name() << "' has dimension " << s.size() << " but the chain has "
           << d.parent().size() << " states";
        throw DimensionMismatch(os.str());
    }
}

// Solves K x = rhs for a Z-matrix K (nonpositive off-diagonal) by Gaussian
// elimination without pivoting. All pivots are positive iff K is a
// nonsingular M-matrix, which is exactly the condition for the resolvent
// to exist as a Laplace transform.
Vector solve_mmatrix_system(Matrix k, Vector rhs) {
    const Eigen::Index n = k.rows();
    for (Eigen::Index p = 0; p < n; ++p) {
        const double pivot = k(p, p);
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            throw SingularResolvent("tilted resolvent does not exist at this point (non-positive pivot)");
        }
        for (Eigen::Index i = p + 1; i < n; ++i) {
            const double factor = k(i, p) / pivot;
            if (factor == 0.0) {
                continue;
            }
            k.row(i).tail(n - p) -= factor * k.row(p).tail(n - p);
            rhs(i) -= factor * rhs(p);
        }
    }
    Vector x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double acc = rhs(i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            acc -= k(i, j) * x(j);
        }
        x(i) = acc / k(i, i);
    }
    return x;
}

// Blocks of ν∘W and ν²∘W used by the insertion formulas.
struct WeightedBlocks {
    RowVector a1, a2;
    Vector b1, b2;
    Matrix B1, B2;
};

WeightedBlocks weighted_blocks(const BlockDecomposition &d, const WeightScheme &s) {
    const Matrix &W = d.parent().rates();
    const Matrix v1 = s.weights().cwiseProduct(W);
    const Matrix v2 = s.weights().cwiseProduct(v1);
    return WeightedBlocks{d.block_ab(v1), d.block_ab(v2), d.block_ba(v1),
                          d.block_ba(v2), d.block_b_offdiag(v1), d.block_b_offdiag(v2)};
}

} // namespace

Eigen::RowVectorXd BlockDecomposition::block_ab(const Matrix &full) const {
    RowVector out(static_cast<Eigen::Index>(b_.size()));
    for (std::size_t j = 0; j < b_.size(); ++j) {
        out(static_cast<Eigen::Index>(j)) = full(static_cast<Eigen::Index>(a_), static_cast<Eigen::Index>(b_[j]));
    }
    return out;
}

Vector BlockDecomposition::block_ba(const Matrix &full) const {
    Vector out(static_cast<Eigen::Index>(b_.size()));
    for (std::size_t i = 0; i < b_.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = full(static_cast<Eigen::Index>(b_[i]), static_cast<Eigen::Index>(a_));
    }
    return out;
}

Matrix BlockDecomposition::block_b_offdiag(const Matrix &full) const {
    const auto nb = static_cast<Eigen::Index>(b_.size());
    Matrix out = Matrix::Zero(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            if (i != j) {
                out(i, j) = full(static_cast<Eigen::Index>(b_[static_cast<std::size_t>(i)]),
                                 static_cast<Eigen::Index>(b_[static_cast<std::size_t>(j)]));
            }
        }
    }
    return out;
}

Matrix mmatrix_inverse(const Matrix &k, const Vector &deficits) {
    const Eigen::Index n = k.rows();
    if (k.cols() != n || deficits.size() != n) {
        throw DimensionMismatch("mmatrix_inverse: inconsistent dimensions");
    }
    Matrix a = k;
    Vector def = deficits;
    Matrix lower = Matrix::Zero(n, n); // multipliers, stored as -L (nonnegative)

    for (Eigen::Index p = 0; p < n; ++p) {
        double pivot = def(p);
        for (Eigen::Index i = p + 1; i < n; ++i) {
            pivot += -a(i, p);
        }
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            throw SingularB("fundamental matrix does not exist (zero pivot)");
        }
        a(p, p) = pivot;
        for (Eigen::Index i = p + 1; i < n; ++i) {
            lower(i, p) = -a(i, p) / pivot;
        }
        for (Eigen::Index j = p + 1; j < n; ++j) {
            const double out_of_j = -a(p, j);
            if (out_of_j == 0.0) {
                continue;
            }
            for (Eigen::Index i = p + 1; i < n; ++i) {
                if (i != j) {
                    a(i, j) -= lower(i, p) * out_of_j;
                }
            }
            def(j) += out_of_j * def(p) / pivot;
        }
    }

    Matrix inverse(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Vector y = Vector::Zero(n);
        y(c) = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index p = 0; p < i; ++p) {
                y(i) += lower(i, p) * y(p);
            }
        }
        Vector x(n);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double acc = y(i);
            for (Eigen::Index j = i + 1; j < n; ++j) {
                acc += -a(i, j) * x(j);
            }
            x(i) = acc / a(i, i);
        }
        inverse.col(c) = x;
    }
    return inverse;
}

BlockDecomposition partition(const RateMatrix &m, const std::vector<std::size_t> &a) {
    const std::size_t n = m.size();
    if (a.empty() || a.size() >= n) {
        throw BadPartition("region A must be a nonempty proper subset of the states");
    }
    if (a.size() != 1) {
        throw BadPartition("only single-state regions A are supported");
    }
    const std::size_t a_state = a.front();
    if (a_state >= n) {
        throw BadPartition("state index " + std::to_string(a_state) + " out of range");
    }

    BlockDecomposition d(m);
    d.a_ = a_state;
    for (std::size_t x = 0; x < n; ++x) {
        if (x != a_state) {
            d.b_.push_back(x);
        }
    }
    const auto nb = static_cast<Eigen::Index>(d.b_.size());
    d.escape_a_ = m.escape_rate(a_state);
    d.w_ab_ = d.block_ab(m.rates());
    d.w_ba_ = d.block_ba(m.rates());
    d.w_b_ = d.block_b_offdiag(m.rates());
    for (Eigen::Index i = 0; i < nb; ++i) {
        d.w_b_(i, i) = -m.escape_rate(d.b_[static_cast<std::size_t>(i)]);
    }

    // Column sums of -W_B are the rates back into A.
    if (!(d.w_ab_.maxCoeff() > 0.0)) {
        throw SingularB("W_B is not strictly substochastic: no transition returns to A");
    }
    d.fundamental_ = mmatrix_inverse(-d.w_b_, d.w_ab_.transpose());

    const Matrix &G = d.fundamental_;
    const Matrix residual = d.w_b_ * G + Matrix::Identity(nb, nb);
    const Matrix scale = d.w_b_.cwiseAbs() * G.cwiseAbs();
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            if (std::abs(residual(i, j)) > 1e-10 * std::max(scale(i, j), 1.0)) {
                throw SingularB("W_B G = -I violated beyond tolerance");
            }
        }
    }
    const double normalization = d.w_ab_.dot(G * d.w_ba_) / d.escape_a_;
    if (!(std::abs(normalization - 1.0) <= 1e-10)) {
        throw SingularB("excursion normalization identity violated: " + std::to_string(normalization));
    }
    return d;
}

namespace {

// Cancellation can leave a tiny negative number when the variance vanishes,
// e.g. entropy at equilibrium where every excursion produces exactly zero.
double rounded_variance(double second, double mean) { return std::max(0.0, second - mean * mean); }

} // namespace

TimeMoments time_moments(const BlockDecomposition &d) {
    const Matrix &G = d.fundamental();
    const Vector gb = G * d.w_ba();
    const RowVector ag = d.w_ab() * G;
    const double gamma_a = d.escape_a();

    const double mean = ag.dot(gb) / gamma_a;
    const double second = 2.0 * ag.dot(G * gb) / gamma_a;
    const double variance = rounded_variance(second, mean);
    const double tau = 1.0 / gamma_a;
    return TimeMoments{mean, second, variance, mean + tau, variance + tau * tau};
}

ObservableMoments observable_moments(const BlockDecomposition &d, const WeightScheme &s) {
    check_dimensions(d, s);
    if (s.is_null()) {
        return {0.0, 0.0, 0.0, 0.0, 0.0};
    }
    const WeightedBlocks v = weighted_blocks(d, s);
    const Matrix &G = d.fundamental();
    const Vector &b = d.w_ba();
    const double gamma_a = d.escape_a();

    const Vector gb = G * b;
    const RowVector ag = d.w_ab() * G;
    const Vector g_b1 = G * v.b1;
    const Vector g_B1_gb = G * (v.B1 * gb);
    const RowVector a1g = v.a1 * G;

    // Each derivative in the counting field inserts one weighted block; each
    // derivative in the Laplace variable inserts one extra G.
    const double mean = (v.a1.dot(gb) + ag.dot(v.B1 * gb) + ag.dot(v.b1)) / gamma_a;

    const double second = (v.a2.dot(gb) + ag.dot(v.B2 * gb) + ag.dot(v.b2) + 2.0 * ag.dot(v.B1 * g_B1_gb) +
                           2.0 * a1g.dot(v.B1 * gb) + 2.0 * a1g.dot(v.b1) + 2.0 * ag.dot(v.B1 * g_b1)) /
                          gamma_a;

    const double cross = (a1g.dot(gb) + ag.dot(g_b1) + ag.dot(g_B1_gb) + ag.dot(v.B1 * (G * gb))) / gamma_a;

    const double e_t = ag.dot(gb) / gamma_a;
    return ObservableMoments{mean, std::max(0.0, second), rounded_variance(second, mean), cross,
                             cross - mean * e_t};
}

double current(const BlockDecomposition &d, const WeightScheme &s) {
    return observable_moments(d, s).mean / time_moments(d).cycle_mean;
}

namespace {

NoiseDecomposition decompose(const TimeMoments &t, const ObservableMoments &q) {
    const double mu = t.cycle_mean;
    const double d1 = q.variance / mu;
    const double d2 = t.cycle_variance / (mu * mu * mu) * q.mean * q.mean;
    const double d3 = -2.0 * q.mean / (mu * mu) * q.covariance;
    return {d1, d2, d3, d1 + d2 + d3};
}

} // namespace

NoiseDecomposition noise_decomposition(const BlockDecomposition &d, const WeightScheme &s) {
    return decompose(time_moments(d), observable_moments(d, s));
}

ExcursionReport excursion_report(const BlockDecomposition &d, const WeightScheme &s) {
    const TimeMoments t = time_moments(d);
    const ObservableMoments q = observable_moments(d, s);
    const NoiseDecomposition noise = decompose(t, q);
    return ExcursionReport{t.mean,
                           t.variance,
                           1.0 / d.escape_a(),
                           t.cycle_mean,
                           t.cycle_variance,
                           q.mean,
                           q.variance,
                           q.covariance,
                           q.mean / t.cycle_mean,
                           noise.total,
                           noise.d1,
                           noise.d2,
                           noise.d3};
}

double tilted_resolvent(const BlockDecomposition &d, const WeightScheme &s, double chi, double shat) {
    check_dimensions(d, s);
    const Matrix &W = d.parent().rates();
    Matrix tilted(W.rows(), W.cols());
    for (Eigen::Index y = 0; y < W.cols(); ++y) {
        for (Eigen::Index x = 0; x < W.rows(); ++x) {
            tilted(x, y) = W(x, y) * std::exp(s.weights()(x, y) * chi);
        }
    }
    const RowVector a = d.block_ab(tilted);
    const Vector b = d.block_ba(tilted);
    Matrix k = -d.block_b_offdiag(tilted);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        k(i, i) = shat - d.w_b()(i, i);
    }
    const Vector x = solve_mmatrix_system(std::move(k), b);
    return a.dot(x) / d.escape_a();
}

std::complex<double> joint_characteristic(const BlockDecomposition &d, const WeightScheme &s, double xi,
                                          double shat) {
    check_dimensions(d, s);
    if (!(shat >= 0.0)) {
        throw SingularResolvent("joint characteristic function requires a non-negative Laplace variable");
    }
    const Matrix &W = d.parent().rates();
    const auto n = W.rows();
    ComplexMatrix tilted(n, n);
    for (Eigen::Index y = 0; y < n; ++y) {
        for (Eigen::Index x = 0; x < n; ++x) {
            tilted(x, y) = W(x, y) * std::polar(1.0, -s.weights()(x, y) * xi);
        }
    }
    const std::size_t a = d.state_a();
    const auto &b_states = d.states_b();
    const auto nb = static_cast<Eigen::Index>(b_states.size());
    Eigen::RowVectorXcd row(nb);
    ComplexVector col(nb);
    ComplexMatrix k(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        const auto bi = static_cast<Eigen::Index>(b_states[static_cast<std::size_t>(i)]);
        row(i) = tilted(static_cast<Eigen::Index>(a), bi);
        col(i) = tilted(bi, static_cast<Eigen::Index>(a));
        for (Eigen::Index j = 0; j < nb; ++j) {
            const auto bj = static_cast<Eigen::Index>(b_states[static_cast<std::size_t>(j)]);
            k(i, j) = (i == j) ? std::complex<double>(shat - d.w_b()(i, i), 0.0) : -tilted(bi, bj);
        }
    }
    const ComplexVector x = k.partialPivLu().solve(col);
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < nb; ++i) {
        acc += row(i) * x(i);
    }
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) {
        throw SingularResolvent("joint characteristic function is not finite");
    }
    return acc / d.escape_a();
}

double OutcomeDistribution::at(int q) const {
    if (q < min_q || q > max_q()) {
        return 0.0;
    }
    return probabilities[static_cast<std::size_t>(q - min_q)];
}

OutcomeDistribution outcome_distribution(const BlockDecomposition &d, const WeightScheme &s,
                                         const OutcomeOptions &options) {
    check_dimensions(d, s);
    if (!s.integer_valued()) {
        throw NonIntegerScheme("outcome distribution requires integer weights ('" + s.name() + "')");
    }
    if (options.max_q < options.min_q || options.initial_nodes < 2) {
        throw QuadratureFailure("invalid outcome range or node count");
    }
    const auto count = static_cast<std::size_t>(options.max_q - options.min_q + 1);
    constexpr double pi = std::numbers::pi;

    // sums[q] accumulates Σ_k M(ξ_k) exp(i q ξ_k) over the nodes used so far.
    std::vector<std::complex<double>> sums(count, 0.0);
    auto accumulate = [&](std::size_t nodes, std::size_t first, std::size_t stride) {
        for (std::size_t k = first; k < nodes; k += stride) {
            const double xi = -pi + 2.0 * pi * static_cast<double>(k) / static_cast<double>(nodes);
            const std::complex<double> m = joint_characteristic(d, s, xi, 0.0);
            const std::complex<double> step = std::polar(1.0, xi);
            std::complex<double> phase = std::polar(1.0, options.min_q * xi);
            for (std::size_t q = 0; q < count; ++q) {
                sums[q] += m * phase;
                phase *= step;
            }
        }
    };
    auto current = [&](std::size_t nodes) {
        std::vector<double> p(count);
        for (std::size_t q = 0; q < count; ++q) {
            p[q] = sums[q].real() / static_cast<double>(nodes);
        }
        return p;
    };

    std::size_t nodes = options.initial_nodes;
    accumulate(nodes, 0, 1);
    std::vector<double> previous = current(nodes);
    std::vector<double> probabilities;
    while (true) {
        if (2 * nodes > options.max_nodes) {
            throw QuadratureFailure("Fourier inversion did not converge");
        }
        accumulate(2 * nodes, 1, 2);
        nodes *= 2;
        std::vector<double> refined = current(nodes);
        double change = 0.0;
        for (std::size_t q = 0; q < count; ++q) {
            change = std::max(change, std::abs(refined[q] - previous[q]));
        }
        if (change < options.convergence) {
            probabilities = std::move(refined);
            break;
        }
        previous = std::move(refined);
    }

    double mass = 0.0;
    for (double &p : probabilities) {
        if (p < -1e-12) {
            throw QuadratureFailure("Fourier inversion produced a negative probability");
        }
        p = std::max(p, 0.0);
        mass += p;
    }
    if (mass < 1.0 - 1e-6) {
        std::ostringstream os;
        os << "q range [" << options.min_q << ", " << options.max_q << "] holds only " << mass
           << " of the probability mass; widen it";
        throw MassDeficit(os.str());
    }
    if (std::abs(1.0 - mass) < 1e-8) {
        for (double &p : probabilities) {
            p /= mass;
        }
    }
    return OutcomeDistribution{options.min_q, std::move(probabilities), nodes, mass};
}

double excess_time(const BlockDecomposition &d) {
    const ProbabilityVector p = steady_state(d.parent());
    const TimeMoments t = time_moments(d);
    const double gamma_a = d.escape_a();
    double residence_weighted = 0.0;
    for (std::size_t state : d.states_b()) {
        residence_weighted += p[state] / d.parent().escape_rate(state);
    }
    return (1.0 / gamma_a + t.cycle_mean * gamma_a * residence_weighted) / (1.0 + gamma_a * t.mean);
}

} // namespace exclab
