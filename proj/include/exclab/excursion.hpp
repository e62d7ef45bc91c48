#pragma once

// Excursion statistics for a chain split into a single-state region A and
// its complement B. An excursion starts with the jump out of A and ends at
// the first return; a cycle is one excursion plus the following residence
// in A.

#include "exclab/markov.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace exclab {

class BlockDecomposition {
public:
    const RateMatrix &parent() const { return parent_; }
    std::size_t state_a() const { return a_; }
    const std::vector<std::size_t> &states_b() const { return b_; }

    /// Escape rate Γ_A of the A state; the A block of the generator is -Γ_A.
    double escape_a() const { return escape_a_; }
    /// 1 × |B| rates B -> A.
    const Eigen::RowVectorXd &w_ab() const { return w_ab_; }
    /// |B| × 1 rates A -> B.
    const Vector &w_ba() const { return w_ba_; }
    /// Generator restricted to B (substochastic).
    const Matrix &w_b() const { return w_b_; }
    /// Fundamental matrix (-W_B)^{-1}; entries are expected occupation times.
    const Matrix &fundamental() const { return fundamental_; }

    /// Restricts a per-transition matrix (rates or weights) to the blocks.
    Eigen::RowVectorXd block_ab(const Matrix &full) const;
    Vector block_ba(const Matrix &full) const;
    /// B block with its diagonal zeroed.
    Matrix block_b_offdiag(const Matrix &full) const;

private:
    friend BlockDecomposition partition(const RateMatrix &, const std::vector<std::size_t> &);
    explicit BlockDecomposition(RateMatrix parent) : parent_(std::move(parent)) {}

    RateMatrix parent_;
    std::size_t a_ = 0;
    std::vector<std::size_t> b_;
    double escape_a_ = 0.0;
    Eigen::RowVectorXd w_ab_;
    Vector w_ba_;
    Matrix w_b_;
    Matrix fundamental_;
};

/// Splits the chain into A and its complement. Only |A| = 1 is supported:
/// the renewal results (cycle mean and variance, noise decomposition) hold
/// for single-state A. Throws BadPartition or SingularB.
BlockDecomposition partition(const RateMatrix &m, const std::vector<std::size_t> &a);

inline BlockDecomposition partition(const RateMatrix &m, std::size_t a_state) {
    return partition(m, std::vector<std::size_t>{a_state});
}

/// Inverse of a nonsingular M-matrix whose column sums are the given
/// nonnegative deficits. The elimination never subtracts (GTH-style), so
/// every entry keeps full relative accuracy even when the matrix is badly
/// conditioned. Throws SingularB on a zero pivot.
Matrix mmatrix_inverse(const Matrix &k, const Vector &deficits);

struct TimeMoments {
    double mean;           ///< E(T)
    double second_moment;  ///< E(T²)
    double variance;       ///< var(T)
    double cycle_mean;     ///< μ = E(T) + 1/Γ_A
    double cycle_variance; ///< Δ² = var(T) + 1/Γ_A²
};

TimeMoments time_moments(const BlockDecomposition &d);

struct ObservableMoments {
    double mean;           ///< E(Q)
    double second_moment;  ///< E(Q²)
    double variance;       ///< var(Q)
    double cross_moment;   ///< E(QT)
    double covariance;     ///< cov(Q, T)
};

/// Per-excursion moments of a counting observable from the derivatives of
/// the tilted resolvent. Throws DimensionMismatch.
ObservableMoments observable_moments(const BlockDecomposition &d, const WeightScheme &s);

/// J = E(Q) / μ.
double current(const BlockDecomposition &d, const WeightScheme &s);

struct NoiseDecomposition {
    double d1; ///< var(Q) / μ
    double d2; ///< Δ² E(Q)² / μ³
    double d3; ///< -2 E(Q) cov(Q, T) / μ²
    double total;
};

NoiseDecomposition noise_decomposition(const BlockDecomposition &d, const WeightScheme &s);

struct ExcursionReport {
    double e_t;
    double var_t;
    double e_tau;
    double mu;
    double delta2;
    double e_q;
    double var_q;
    double cov_qt;
    double j;
    double d;
    double d1;
    double d2;
    double d3;
};

ExcursionReport excursion_report(const BlockDecomposition &d, const WeightScheme &s);

/// Real-tilted resolvent M(chi, s) = <a| W_AB(chi) (s - W_B(chi))^{-1} W_BA(chi) |a> / Γ_A,
/// i.e. E[exp(chi Q - s T)]. Throws SingularResolvent when s lies at or below
/// the spectral abscissa of the tilted B block.
double tilted_resolvent(const BlockDecomposition &d, const WeightScheme &s, double chi, double shat);

/// Joint characteristic function with the complex tilt exp(-i ν xi):
/// E[exp(-i xi Q - s T)]. Requires shat ≥ 0 (SingularResolvent otherwise).
std::complex<double> joint_characteristic(const BlockDecomposition &d, const WeightScheme &s,
                                          double xi, double shat);

struct OutcomeOptions {
    int min_q = -50;
    int max_q = 50;
    std::size_t initial_nodes = 4096;
    std::size_t max_nodes = 1u << 20;
    double convergence = 1e-10;
};

struct OutcomeDistribution {
    int min_q;
    std::vector<double> probabilities; ///< P(q) for q = min_q, min_q + 1, ...
    std::size_t nodes;                 ///< quadrature nodes of the accepted result
    double mass;                       ///< Σ P(q) before renormalization

    int max_q() const { return min_q + static_cast<int>(probabilities.size()) - 1; }
    double at(int q) const;
};

/// P(q) per excursion for an integer-valued scheme by trapezoidal Fourier
/// inversion of the characteristic function. Throws NonIntegerScheme,
/// MassDeficit (range misses more than 1e-6 of the mass) or
/// QuadratureFailure.
OutcomeDistribution outcome_distribution(const BlockDecomposition &d, const WeightScheme &s,
                                         const OutcomeOptions &options = {});

/// Excess time 𝒯 = (1/Γ_A + μ Γ_A <1_B|Γ_B^{-1}|p_B>) / (1 + Γ_A E(T)),
/// with p_B the B components of the normalized steady state.
double excess_time(const BlockDecomposition &d);

} // namespace exclab
