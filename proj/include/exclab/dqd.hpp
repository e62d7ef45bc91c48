#pragma once

// Double quantum dot rate model. Units: k_B = ħ = e = 1, every energy and
// rate in MHz. States are ordered (00, 10, 01, 11); the Coulomb-blockade
// model drops 11 and keeps the order (00, 10, 01).

#include "exclab/markov.hpp"

#include <array>
#include <string>

namespace exclab {

enum DqdState : std::size_t { kEmpty = 0, kLeft = 1, kRight = 2, kBoth = 3 };

inline constexpr std::array<const char *, 4> kDqdLabels = {"00", "10", "01", "11"};

struct DqdParams {
    double g = 1.0;                          ///< bare inter-dot tunneling amplitude
    double gamma = 2.0 * 3.14159265358979323846 * 0.1; ///< dot-lead coupling
    double temperature = 2.0;
    double U = 10.0;                         ///< Coulomb repulsion
    double vg_left = 0.0;
    double vg_right = 0.0;
    double vsd = 0.0;                        ///< source-drain bias
    bool blockade = false;
    /// Common offset added to both chemical potentials. Zero everywhere in
    /// the physics; exposed so gauge invariance can be checked.
    double potential_offset = 0.0;

    /// Equal gates V_gL = V_gR = vg.
    static DqdParams symmetric(double g, double gamma, double temperature, double U, double vg,
                               double vsd, bool blockade = false);

    double mu_left() const { return -vsd / 2.0 + potential_offset; }
    double mu_right() const { return vsd / 2.0 + potential_offset; }
    double beta() const { return 1.0 / temperature; }
    std::size_t state_count() const { return blockade ? 3 : 4; }

    /// Throws InvalidParameters unless g > 0, γ > 0, T > 0, U ≥ 0 and all
    /// values are finite.
    void validate() const;
};

/// Fermi occupation and its complement, each evaluated without
/// cancellation so that 1 - f stays accurate when f rounds to one.
struct Occupation {
    double f;
    double complement;
};

/// Lead occupations for single (f) and double (f̃, shifted by U) occupancy.
struct FermiSet {
    Occupation left;
    Occupation right;
    Occupation left_tilde;
    Occupation right_tilde;

    double f_L() const { return left.f; }
    double f_R() const { return right.f; }
    double ft_L() const { return left_tilde.f; }
    double ft_R() const { return right_tilde.f; }
};

/// 1 / (exp((energy - mu) / T) + 1), stable for any magnitude of the argument.
double fermi(double energy, double mu, double temperature);

Occupation occupation(double energy, double mu, double temperature);

FermiSet fermi_set(const DqdParams &p);

/// g_eff = 2 g² γ / (γ² + (V_gL - V_gR)²).
double effective_coupling(double g, double gamma, double vg_left, double vg_right);

double effective_coupling(const DqdParams &p);

/// Four-state rate matrix. Requires p.blockade == false.
RateMatrix build_dqd(const DqdParams &p);

/// Three-state Coulomb-blockade rate matrix (f̃ = 0, state 11 removed).
/// Requires p.blockade == true.
RateMatrix build_dqd_blockade(const DqdParams &p);

/// Dispatches on p.blockade.
RateMatrix build_model(const DqdParams &p);

} // namespace exclab
