#pragma once

// Continuous-time Markov chains: validated generators, steady state, tilted
// generators and long-time counting statistics.
//
// Conventions: W(x, y) is the rate of the jump y -> x, so columns are
// "from" and rows are "to". Generator columns sum to zero.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace exclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class RateMatrix {
public:
    std::size_t size() const { return static_cast<std::size_t>(rates_.rows()); }

    /// Off-diagonal rates, zero diagonal.
    const Matrix &rates() const { return rates_; }
    double rate(std::size_t to, std::size_t from) const { return rates_(to, from); }

    /// Escape rates Γ_x = Σ_y W(y, x).
    const Vector &escape_rates() const { return escape_; }
    double escape_rate(std::size_t x) const { return escape_(x); }

    /// Generator: W off the diagonal, -Γ on it.
    const Matrix &generator() const { return generator_; }

    const std::vector<std::string> &labels() const { return labels_; }
    const std::string &label(std::size_t x) const { return labels_[x]; }

    double max_escape_rate() const { return escape_.maxCoeff(); }

private:
    friend RateMatrix validate_rate_matrix(const Matrix &, std::vector<std::string>);
    RateMatrix() = default;

    Matrix rates_;
    Vector escape_;
    Matrix generator_;
    std::vector<std::string> labels_;
};

/// Checks a raw rate matrix and assembles escape rates and generator.
///
/// Throws NegativeRate, NonzeroDiagonal, Reducible, DimensionMismatch.
/// Labels default to "0", "1", ... when empty.
RateMatrix validate_rate_matrix(const Matrix &raw, std::vector<std::string> labels = {});

/// True when the directed graph of nonzero rates is strongly connected.
bool is_irreducible(const Matrix &rates);

struct ProbabilityVector {
    Vector p;

    double operator[](std::size_t i) const { return p(static_cast<Eigen::Index>(i)); }
    std::size_t size() const { return static_cast<std::size_t>(p.size()); }
};

/// Unique stationary distribution from the bordered system (one balance row
/// replaced by normalization). Throws SingularSystem when the residual of
/// the solution exceeds 1e-10 * max Γ.
ProbabilityVector steady_state(const RateMatrix &m);

enum class SchemeKind { transition, state };

/// Weights ν(x, y) attached to the jump y -> x. The diagonal is ignored and
/// stored as zero.
class WeightScheme {
public:
    /// Throws InvalidScheme if a state scheme has non-constant columns or if
    /// the matrix is not square.
    WeightScheme(std::string name, Matrix weights, SchemeKind kind = SchemeKind::transition);

    /// Null scheme of dimension n.
    static WeightScheme zeros(std::size_t n, std::string name = "null");

    const std::string &name() const { return name_; }
    const Matrix &weights() const { return weights_; }
    double weight(std::size_t to, std::size_t from) const { return weights_(to, from); }
    SchemeKind kind() const { return kind_; }
    std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }

    bool integer_valued() const { return integer_valued_; }
    /// ν(x, y) = -ν(y, x) exactly; such schemes count thermodynamic currents.
    bool antisymmetric() const { return antisymmetric_; }
    bool is_null() const { return weights_.isZero(0.0); }

private:
    std::string name_;
    Matrix weights_;
    SchemeKind kind_;
    bool integer_valued_ = false;
    bool antisymmetric_ = false;
};

/// Off-diagonal entries W(x, y) * exp(ν(x, y) * chi), diagonal -Γ_x.
/// Throws DimensionMismatch when the scheme does not fit the chain.
Matrix tilt_generator(const RateMatrix &m, const WeightScheme &s, double chi);

struct FcsResult {
    double current;   ///< λ'(0)
    double noise;     ///< λ''(0)
    double current_error;
    double noise_error;
};

struct FcsOptions {
    /// Initial finite-difference step, divided by max(1, max |ν|).
    double initial_step = 1e-3;
    int richardson_levels = 3;
    /// Accepted Richardson error: tolerance * max(1, |value|).
    double tolerance = 1e-8;
};

/// Dominant (largest real part) eigenvalue of the tilted generator. The
/// eigenproblem is solved in extended precision.
double dominant_eigenvalue(const RateMatrix &m, const WeightScheme &s, double chi);

/// Long-time current and noise from derivatives of the dominant eigenvalue of
/// the tilted generator at chi = 0, by central differences with Richardson
/// extrapolation. Throws EigenFailure or StepCollapse.
FcsResult fcs_current_noise(const RateMatrix &m, const WeightScheme &s,
                            const FcsOptions &options = {});

} // namespace exclab
