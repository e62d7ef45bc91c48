#pragma once

// Counting observables of the double quantum dot and the physics derived
// from them: outcome probabilities, blockade closed forms, populations,
// mutual information, Fano factor and uncertainty bounds.

#include "exclab/dqd.hpp"
#include "exclab/excursion.hpp"
#include "exclab/markov.hpp"

#include <optional>

namespace exclab {

enum class Lead { left, right };

/// Net number of electrons leaving the dots into the given lead. Weight +1
/// for an extraction into the lead, -1 for an injection from it.
WeightScheme transport_weights(Lead side, std::size_t n);

/// Every jump counts one.
WeightScheme activity_weights(std::size_t n);

/// ν(x, y) = log(W(x, y) / W(y, x)) on lead transitions, zero on hopping.
/// The log-ratios are taken from the energies directly, log(f / (1 - f)) =
/// -(ε - μ) / T. Throws DegenerateFermi when an occupation underflows to
/// exactly 0 or 1.
WeightScheme entropy_weights(const DqdParams &p);

/// State observable ν(x, y) = values[y] for every x ≠ y.
WeightScheme state_weights(const Vector &values, std::string name = "state");

/// State observable with weights 1/Γ_y; its current is identically one.
WeightScheme excess_time_weights(const RateMatrix &m);

struct OutcomeTriple {
    double p_suc;
    double p_fail;
    double p_dis;
};

/// Closed-form success/fail/disaster probabilities of the transport
/// observable in the blockade regime. The coupling prefactor written 2g² is
/// γ g_eff, which is 2g² for equal gates.
OutcomeTriple success_fail_disaster(const DqdParams &p);

/// How the coupling symbol of the blockade closed forms is read.
enum class CouplingReading {
    effective, ///< symbol = g_eff (matches the matrix engine)
    bare,      ///< symbol = bare g
};

struct BlockadeAnalytics {
    double e_t;
    double e_tau;
    double mu;
    double e_qr;
    double e_a;
    double e_sigma;
    double p_left;
    double p_right;
};

/// Closed-form blockade expressions, evaluated as printed. The printed mean
/// entropy production is not consistent with the chain (it is not even
/// dimensionally homogeneous); use blockade_entropy_mean for the correct
/// value.
BlockadeAnalytics blockade_analytics(const DqdParams &p,
                                     CouplingReading reading = CouplingReading::effective);

/// E(Σ) = (ζ_R - ζ_L) E(Q_R) with ζ_a = log((1 - f_a) / f_a); in closed form
/// for the blockade model.
double blockade_entropy_mean(const DqdParams &p);

struct Populations {
    double p00;
    double p10;
    double p01;
    double p11; ///< zero for the blockade model
    double p_left;
    double p_right;
};

Populations populations(const RateMatrix &m);

/// Mutual information (nats) between the occupations of the two dots,
/// treating (n_L, n_R) ∈ {0,1}² as a joint binary distribution.
double mutual_information(const Populations &pop);

/// Mutual information between the indicator events "only the left dot is
/// occupied" (p10) and "only the right dot is occupied" (p01).
double mutual_information_exclusive(const Populations &pop);

/// D / |J|, or D / J when signed. Throws DivergentFano when |J| < 1e-14.
double fano(double j, double d, bool signed_current = false);

struct BoundsReport {
    double j;
    double d;
    double lhs;      ///< D / J²; +inf when J vanishes
    double j_sigma;
    double j_activity;
    double tur_rhs;  ///< 2 / J_Σ
    double kur_rhs;  ///< 1 / J_A
    double cur_rhs;  ///< excess time
    std::optional<bool> tur_satisfied; ///< empty when the scheme is not antisymmetric
    bool kur_satisfied;
    bool cur_satisfied;
};

/// Currents below this magnitude are treated as exactly zero.
inline constexpr double kZeroCurrent = 1e-14;

BoundsReport uncertainty_bounds(const BlockDecomposition &d, const DqdParams &p, const WeightScheme &s);

} // namespace exclab
