#include "exclab/dqd.hpp"

#include "exclab/errors.hpp"

#include <cmath>
#include <vector>

namespace exclab {

DqdParams DqdParams::symmetric(double g, double gamma, double temperature, double U, double vg,
                               double vsd, bool blockade) {
    DqdParams p;
    p.g = g;
    p.gamma = gamma;
    p.temperature = temperature;
    p.U = U;
    p.vg_left = vg;
    p.vg_right = vg;
    p.vsd = vsd;
    p.blockade = blockade;
    return p;
}

void DqdParams::validate() const {
    const double values[] = {g, gamma, temperature, U, vg_left, vg_right, vsd, potential_offset};
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidParameters("DQD parameters must be finite");
        }
    }
    if (!(g > 0.0)) {
        throw InvalidParameters("g must be positive");
    }
    if (!(gamma > 0.0)) {
        throw InvalidParameters("gamma must be positive");
    }
    if (!(temperature > 0.0)) {
        throw InvalidParameters("temperature must be positive");
    }
    if (!(U >= 0.0)) {
        throw InvalidParameters("U must be non-negative");
    }
}

Occupation occupation(double energy, double mu, double temperature) {
    const double x = (energy - mu) / temperature;
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return {e / (1.0 + e), 1.0 / (1.0 + e)};
    }
    const double e = std::exp(x);
    return {1.0 / (1.0 + e), e / (1.0 + e)};
}

double fermi(double energy, double mu, double temperature) {
    return occupation(energy, mu, temperature).f;
}

FermiSet fermi_set(const DqdParams &p) {
    const double T = p.temperature;
    return FermiSet{
        occupation(p.vg_left, p.mu_left(), T),
        occupation(p.vg_right, p.mu_right(), T),
        occupation(p.vg_left + p.U, p.mu_left(), T),
        occupation(p.vg_right + p.U, p.mu_right(), T),
    };
}

double effective_coupling(double g, double gamma, double vg_left, double vg_right) {
    const double detuning = vg_left - vg_right;
    return 2.0 * g * g * gamma / (gamma * gamma + detuning * detuning);
}

double effective_coupling(const DqdParams &p) {
    return effective_coupling(p.g, p.gamma, p.vg_left, p.vg_right);
}

namespace {

std::vector<std::string> labels(std::size_t n) {
    return {kDqdLabels.begin(), kDqdLabels.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace

RateMatrix build_dqd(const DqdParams &p) {
    if (p.blockade) {
        throw InvalidParameters("build_dqd called with blockade = true");
    }
    p.validate();
    const FermiSet f = fermi_set(p);
    const double gamma = p.gamma;
    const double hop = effective_coupling(p);

    Matrix W = Matrix::Zero(4, 4);
    W(kEmpty, kLeft) = gamma * f.left.complement;
    W(kEmpty, kRight) = gamma * f.right.complement;
    W(kLeft, kEmpty) = gamma * f.left.f;
    W(kLeft, kRight) = hop;
    W(kLeft, kBoth) = gamma * f.right_tilde.complement;
    W(kRight, kEmpty) = gamma * f.right.f;
    W(kRight, kLeft) = hop;
    W(kRight, kBoth) = gamma * f.left_tilde.complement;
    W(kBoth, kLeft) = gamma * f.right_tilde.f;
    W(kBoth, kRight) = gamma * f.left_tilde.f;
    return validate_rate_matrix(W, labels(4));
}

RateMatrix build_dqd_blockade(const DqdParams &p) {
    if (!p.blockade) {
        throw InvalidParameters("build_dqd_blockade called with blockade = false");
    }
    p.validate();
    const FermiSet f = fermi_set(p);
    const double gamma = p.gamma;
    const double hop = effective_coupling(p);

    Matrix W = Matrix::Zero(3, 3);
    W(kEmpty, kLeft) = gamma * f.left.complement;
    W(kEmpty, kRight) = gamma * f.right.complement;
    W(kLeft, kEmpty) = gamma * f.left.f;
    W(kLeft, kRight) = hop;
    W(kRight, kEmpty) = gamma * f.right.f;
    W(kRight, kLeft) = hop;
    return validate_rate_matrix(W, labels(3));
}

RateMatrix build_model(const DqdParams &p) {
    return p.blockade ? build_dqd_blockade(p) : build_dqd(p);
}

} // namespace exclab
