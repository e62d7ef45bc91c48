#include "exclab/observables.hpp"

#include "exclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace exclab {

namespace {

void require_dqd_size(std::size_t n) {
    if (n != 3 && n != 4) {
        throw DimensionMismatch("DQD schemes need 3 (blockade) or 4 states, got " + std::to_string(n));
    }
}

Matrix square(std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    return Matrix::Zero(dim, dim);
}

void set_pair(Matrix &nu, std::size_t to, std::size_t from, double forward) {
    nu(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = forward;
    nu(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = -forward;
}

void require_regular(const Occupation &o) {
    if (o.f == 0.0 || o.complement == 0.0) {
        throw DegenerateFermi("a lead occupation is exactly 0 or 1; the entropy weight diverges");
    }
}

} // namespace

WeightScheme transport_weights(Lead side, std::size_t n) {
    require_dqd_size(n);
    Matrix nu = square(n);
    if (side == Lead::right) {
        set_pair(nu, kEmpty, kRight, 1.0);
        if (n == 4) {
            set_pair(nu, kLeft, kBoth, 1.0);
        }
        return WeightScheme("transport_R", nu);
    }
    set_pair(nu, kEmpty, kLeft, 1.0);
    if (n == 4) {
        set_pair(nu, kRight, kBoth, 1.0);
    }
    return WeightScheme("transport_L", nu);
}

WeightScheme activity_weights(std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix nu = Matrix::Ones(dim, dim);
    nu.diagonal().setZero();
    return WeightScheme("activity", nu);
}

WeightScheme entropy_weights(const DqdParams &p) {
    p.validate();
    const std::size_t n = p.state_count();
    const FermiSet f = fermi_set(p);
    require_regular(f.left);
    require_regular(f.right);
    const double T = p.temperature;
    Matrix nu = square(n);
    // log(f / (1 - f)) = -(ε - μ) / T
    set_pair(nu, kLeft, kEmpty, -(p.vg_left - p.mu_left()) / T);
    set_pair(nu, kRight, kEmpty, -(p.vg_right - p.mu_right()) / T);
    if (n == 4) {
        require_regular(f.left_tilde);
        require_regular(f.right_tilde);
        set_pair(nu, kBoth, kLeft, -(p.vg_right + p.U - p.mu_right()) / T);
        set_pair(nu, kBoth, kRight, -(p.vg_left + p.U - p.mu_left()) / T);
    }
    return WeightScheme("entropy", nu);
}

WeightScheme state_weights(const Vector &values, std::string name) {
    const Eigen::Index n = values.size();
    Matrix nu(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        nu.row(x) = values.transpose();
    }
    return WeightScheme(std::move(name), nu, SchemeKind::state);
}

WeightScheme excess_time_weights(const RateMatrix &m) {
    return state_weights(m.escape_rates().cwiseInverse(), "excess_time");
}

OutcomeTriple success_fail_disaster(const DqdParams &p) {
    p.validate();
    const FermiSet f = fermi_set(p);
    const double fl = f.left.f, fr = f.right.f;
    const double cl = f.left.complement, cr = f.right.complement;
    const double coupling = p.gamma * effective_coupling(p); // 2g² for equal gates
    const double lambda = p.gamma * p.gamma * cl * cr;
    const double den = (fl + fr) * (coupling * (cl + cr) + lambda);
    return OutcomeTriple{
        coupling * fl * cr / den,
        (coupling * (fl * cl + fr * cr) + lambda * (fl + fr)) / den,
        coupling * fr * cl / den,
    };
}

BlockadeAnalytics blockade_analytics(const DqdParams &p, CouplingReading reading) {
    p.validate();
    const FermiSet f = fermi_set(p);
    const double fl = f.left.f, fr = f.right.f;
    const double cl = f.left.complement, cr = f.right.complement;
    const double gm = p.gamma;
    const double g = reading == CouplingReading::effective ? effective_coupling(p) : p.g;

    const double bracket = gm * cl * cr + g * (cl + cr);
    const double et_num = (2.0 * g + gm) * fr + (2.0 * g + gm - 2.0 * gm * fr) * fl;
    const double et_den = gm * (fl + fr) * bracket;

    BlockadeAnalytics out{};
    out.e_t = et_num / et_den;
    out.e_tau = 1.0 / (gm * (fl + fr));
    out.mu = (et_num + bracket) / et_den;
    out.e_qr = g * (fl - fr) / ((fl + fr) * bracket);
    out.e_a = (2.0 * g * g * (fl + fr) + 2.0 * gm * gm * cl * cr * (fl + fr) +
               g * gm * (fl * (5.0 - 6.0 * fr) + fr * (5.0 - 2.0 * fr) - 2.0 * fl * fl)) /
              (gm * (fl + fr) * bracket);

    // Printed form of the mean entropy production, transcribed term by term.
    const double zeta_l = (p.vg_left - p.mu_left()) / p.temperature;   // log(-1 + 1/f_L)
    const double zeta_r = (p.vg_right - p.mu_right()) / p.temperature; // log(-1 + 1/f_R)
    const double g2 = g * g;
    const double eta = (-2.0 * (-2.0 + fl + fr) * g2 + (-1.0 + fl) * (-1.0 + fr) * gm * gm) *
                       (fl * (-zeta_l) + fr * (-zeta_r));
    const double sigma_num = gm * (-1.0 + fl) * (2.0 * (fl + fr) * g2 - fl * (-1.0 + fr) * gm * gm) * zeta_l +
                             gm * (-1.0 + fr) * (2.0 * (fl + fr) * g2 - (-1.0 + fl) * fr * gm * gm) * zeta_r - eta;
    const double sigma_den = -2.0 * (2.0 + fl + fr) * g2 + (-1.0 + fl * fr) * gm * gm;
    out.e_sigma = sigma_num / sigma_den;

    const double pop_den = g * (2.0 + fl + fr) + gm * (1.0 - fl * fr);
    out.p_left = (g * fr + (g + gm - gm * fr) * fl) / pop_den;
    out.p_right = (fr * (g + gm) + fl * (g - gm * fr)) / pop_den;
    return out;
}

double blockade_entropy_mean(const DqdParams &p) {
    const double zeta_l = (p.vg_left - p.mu_left()) / p.temperature;
    const double zeta_r = (p.vg_right - p.mu_right()) / p.temperature;
    return (zeta_r - zeta_l) * blockade_analytics(p, CouplingReading::effective).e_qr;
}

Populations populations(const RateMatrix &m) {
    require_dqd_size(m.size());
    const ProbabilityVector p = steady_state(m);
    Populations out{};
    out.p00 = p[kEmpty];
    out.p10 = p[kLeft];
    out.p01 = p[kRight];
    out.p11 = m.size() == 4 ? p[kBoth] : 0.0;
    out.p_left = out.p10 + out.p11;
    out.p_right = out.p01 + out.p11;
    return out;
}

namespace {

double binary_mutual_information(double p00, double p10, double p01, double p11) {
    const double x1 = p10 + p11, y1 = p01 + p11;
    const double x0 = 1.0 - x1, y0 = 1.0 - y1;
    const double cells[4][3] = {{p00, x0, y0}, {p10, x1, y0}, {p01, x0, y1}, {p11, x1, y1}};
    double mi = 0.0;
    for (const auto &c : cells) {
        if (c[0] > 0.0) {
            mi += c[0] * std::log(c[0] / (c[1] * c[2]));
        }
    }
    return std::max(mi, 0.0);
}

} // namespace

double mutual_information(const Populations &pop) {
    return binary_mutual_information(pop.p00, pop.p10, pop.p01, pop.p11);
}

double mutual_information_exclusive(const Populations &pop) {
    return binary_mutual_information(1.0 - pop.p10 - pop.p01, pop.p10, pop.p01, 0.0);
}

double fano(double j, double d, bool signed_current) {
    if (std::abs(j) < kZeroCurrent) {
        throw DivergentFano("Fano factor diverges: the current vanishes");
    }
    return signed_current ? d / j : d / std::abs(j);
}

namespace {

bool holds(double lhs, double rhs) {
    if (std::isinf(lhs) && lhs > 0.0) {
        return true;
    }
    return lhs >= rhs * (1.0 - 1e-9);
}

} // namespace

BoundsReport uncertainty_bounds(const BlockDecomposition &d, const DqdParams &p, const WeightScheme &s) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const ExcursionReport r = excursion_report(d, s);
    const std::size_t n = d.parent().size();

    BoundsReport out{};
    out.j = r.j;
    out.d = r.d;
    out.lhs = std::abs(r.j) < kZeroCurrent ? inf : r.d / (r.j * r.j);
    out.j_sigma = current(d, entropy_weights(p));
    out.j_activity = current(d, activity_weights(n));
    out.tur_rhs = out.j_sigma <= kZeroCurrent ? inf : 2.0 / out.j_sigma;
    out.kur_rhs = 1.0 / out.j_activity;
    out.cur_rhs = excess_time(d);
    if (s.antisymmetric()) {
        out.tur_satisfied = holds(out.lhs, out.tur_rhs);
    }
    out.kur_satisfied = holds(out.lhs, out.kur_rhs);
    out.cur_satisfied = holds(out.lhs, out.cur_rhs);
    return out;
}

} // namespace exclab
