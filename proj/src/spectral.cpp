#include "wsc/spectral.hpp"

#include <cmath>
#include <string>

namespace wsc {

namespace {

// Floating-point edge safety: radicands mathematically >= 0 may dip slightly
// negative near the bulk edge.
double safe_sqrt(double x, const char* what) {
    if (x < 0.0) {
        if (x < -1e-12)
            throw DomainError(std::string(what) + ": negative radicand");
        x = 0.0;
    }
    return std::sqrt(x);
}

}  // namespace

AspectRatios AspectRatios::make(double gamma, double beta) {
    if (!(gamma > 0.0))
        throw DomainError("AspectRatios: gamma must be positive");
    if (!(beta >= 0.0 && beta < 1.0))
        throw DomainError("AspectRatios: beta must lie in [0, 1)");
    return AspectRatios{gamma, beta};
}

BulkGeometry bulk_geometry(const AspectRatios& r) {
    const double g = r.gamma, b = r.beta;
    const double root = std::sqrt(b + g - b * g);
    return BulkGeometry{
        std::sqrt((b + root) / (1.0 - b)),
        (1.0 + root) / (1.0 - b),
        (1.0 - root) / (1.0 - b),
    };
}

double mp_stieltjes(double beta, double z) {
    const double left_edge = (1.0 - std::sqrt(beta)) * (1.0 - std::sqrt(beta));
    if (!(z > 0.0 && z < left_edge))
        throw DomainError("mp_stieltjes: z must lie in (0, (1-sqrt(beta))^2)");
    if (beta == 0.0)
        return 1.0 / (1.0 - z);
    const double q = (z - 1.0 - beta) * (z - 1.0 - beta) - 4.0 * beta;
    return (1.0 - beta - z - safe_sqrt(q, "mp_stieltjes")) / (2.0 * beta * z);
}

double mp_stieltjes_deriv(double beta, double z) {
    const double left_edge = (1.0 - std::sqrt(beta)) * (1.0 - std::sqrt(beta));
    if (!(z > 0.0 && z < left_edge))
        throw DomainError("mp_stieltjes_deriv: z must lie in (0, (1-sqrt(beta))^2)");
    if (beta == 0.0)
        return 1.0 / ((1.0 - z) * (1.0 - z));
    const double rq = safe_sqrt((z - 1.0 - beta) * (z - 1.0 - beta) - 4.0 * beta,
                                "mp_stieltjes_deriv");
    const double num = 1.0 - beta - z - rq;
    const double dnum = -1.0 - (z - 1.0 - beta) / rq;
    const double den = 2.0 * beta * z;
    return (dnum * den - num * 2.0 * beta) / (den * den);
}

SpectralModel::SpectralModel(const AspectRatios& ratios)
    : ratios_(AspectRatios::make(ratios.gamma, ratios.beta)),
      bulk_(bulk_geometry(ratios_)),
      edge_(bulk_.theta_max * bulk_.theta_max) {}

void SpectralModel::require_above_edge(double z, const char* fn) const {
    if (!(z > edge_))
        throw DomainError(std::string(fn) + ": argument must exceed theta_max^2 = " +
                          std::to_string(edge_));
}

double SpectralModel::discriminant(double z) const {
    const double A = (1.0 - ratios_.beta) * z + (1.0 - ratios_.gamma);
    return A * A - 4.0 * z;
}

double SpectralModel::discriminant_deriv(double z) const {
    const double A = (1.0 - ratios_.beta) * z + (1.0 - ratios_.gamma);
    return 2.0 * (1.0 - ratios_.beta) * A - 4.0;
}

double SpectralModel::stieltjes_assoc(double z) const {
    require_above_edge(z, "stieltjes_assoc");
    const double g = ratios_.gamma, b = ratios_.beta;
    const double A = (1.0 - b) * z + (1.0 - g);
    const double B = g * A + 2.0 * b * z - g * safe_sqrt(discriminant(z), "stieltjes_assoc");
    return -B / (2.0 * z * (g + b * z));
}

double SpectralModel::stieltjes_assoc_deriv(double z) const {
    require_above_edge(z, "stieltjes_assoc_deriv");
    const double g = ratios_.gamma, b = ratios_.beta;
    const double A = (1.0 - b) * z + (1.0 - g);
    const double rd = safe_sqrt(discriminant(z), "stieltjes_assoc_deriv");
    const double B = g * A + 2.0 * b * z - g * rd;
    const double Bp = g * (1.0 - b) + 2.0 * b - g * discriminant_deriv(z) / (2.0 * rd);
    const double W = 2.0 * z * (g + b * z);
    const double Wp = 2.0 * g + 4.0 * b * z;
    return -(Bp * W - B * Wp) / (W * W);
}

double SpectralModel::stieltjes(double z) const {
    require_above_edge(z, "stieltjes");
    const double g = ratios_.gamma, b = ratios_.beta;
    const double A = (1.0 - b) * z + (1.0 - g);
    const double B = g * A + 2.0 * b * z - g * safe_sqrt(discriminant(z), "stieltjes");
    return 1.0 / (g * z) - 1.0 / z - B / (2.0 * g * z * (g + b * z));
}

double SpectralModel::stieltjes_deriv(double z) const {
    // Differentiated companion relation sunder = gamma*sbar - (1-gamma)/z.
    const double g = ratios_.gamma;
    return (stieltjes_assoc_deriv(z) - (1.0 - g) / (z * z)) / g;
}

double SpectralModel::zeta(double z) const {
    require_above_edge(z, "zeta");
    const double g = ratios_.gamma, b = ratios_.beta;
    const double N = (1.0 - b) * z - (1.0 - g) - safe_sqrt(discriminant(z), "zeta");
    return -N / (2.0 * (g + b - g * b) * z);
}

double SpectralModel::zeta_deriv(double z) const {
    require_above_edge(z, "zeta_deriv");
    const double g = ratios_.gamma, b = ratios_.beta;
    const double rd = safe_sqrt(discriminant(z), "zeta_deriv");
    const double N = (1.0 - b) * z - (1.0 - g) - rd;
    const double Np = (1.0 - b) - discriminant_deriv(z) / (2.0 * rd);
    const double K = 2.0 * (g + b - g * b);
    return -(Np * z - N) / (K * z * z);
}

double SpectralModel::psi_at(double z) const {
    const double g = ratios_.gamma, b = ratios_.beta;
    const double P = (1.0 - b) * z - 1.0 - g - safe_sqrt(discriminant(z), "psi");
    return P / (2.0 * (b * z + g));
}

double SpectralModel::psi(double z) const {
    require_above_edge(z, "psi");
    return psi_at(z);
}

double SpectralModel::psi_deriv(double z) const {
    require_above_edge(z, "psi_deriv");
    const double g = ratios_.gamma, b = ratios_.beta;
    const double rd = safe_sqrt(discriminant(z), "psi_deriv");
    const double P = (1.0 - b) * z - 1.0 - g - rd;
    const double Pp = (1.0 - b) - discriminant_deriv(z) / (2.0 * rd);
    const double Q = 2.0 * (b * z + g);
    return (Pp * Q - P * 2.0 * b) / (Q * Q);
}

double SpectralModel::phi(double z) const {
    const double su = stieltjes_assoc(z);
    const double sb = stieltjes(z);
    return -z * su * sb * sb;  // sunder < 0 above the edge
}

double SpectralModel::upsilon1(double z) const {
    const double s = stieltjes_assoc(z);
    return (1.0 - s + s * s * mp_stieltjes(ratios_.beta, -s)) / z;
}

double SpectralModel::upsilon1_deriv(double z) const {
    const double s = stieltjes_assoc(z);
    const double sp = stieltjes_assoc_deriv(z);
    const double M = mp_stieltjes(ratios_.beta, -s);
    const double Mp = mp_stieltjes_deriv(ratios_.beta, -s);
    const double num = 1.0 - s + s * s * M;
    const double dnum = -sp + 2.0 * s * sp * M - s * s * Mp * sp;
    return (dnum * z - num) / (z * z);
}

double SpectralModel::upsilon2(double z) const {
    const double g = ratios_.gamma;
    const double s = stieltjes_assoc(z);
    const double M = mp_stieltjes(ratios_.beta, -s);
    const double Mp = mp_stieltjes_deriv(ratios_.beta, -s);
    const double lead = (1.0 + g * (zeta(z) + z * zeta_deriv(z))) / (z * z);
    return lead * (1.0 - 2.0 * s * M + s * s * Mp);
}

double SpectralModel::e_func(double z) const {
    const double g = ratios_.gamma;
    const double sb = stieltjes(z);
    return g * zeta(z) * (upsilon1(z) + z * upsilon1_deriv(z)) -
           z * stieltjes_assoc(z) * (upsilon2(z) - sb * sb);
}

double SpectralModel::xi(double sigma) const {
    if (!(sigma >= bulk_.sigma_thresh))
        throw DomainError("xi: sigma below the detection threshold " +
                          std::to_string(bulk_.sigma_thresh));
    const double g = ratios_.gamma, b = ratios_.beta;
    const double s2 = sigma * sigma;
    return std::sqrt((1.0 + s2) * (g + s2) / ((1.0 - b) * s2 - b));
}

double SpectralModel::xi_inv(double theta) const {
    if (!(theta >= bulk_.theta_max))
        throw DomainError("xi_inv: theta below the bulk edge " +
                          std::to_string(bulk_.theta_max));
    return 1.0 / std::sqrt(psi_at(theta * theta));
}

double SpectralModel::wachter_density(double lambda) const {
    const double a = bulk_.theta_min * bulk_.theta_min;
    const double c = edge_;
    if (lambda <= a || lambda >= c)
        return 0.0;
    const double g = ratios_.gamma, b = ratios_.beta;
    return (1.0 - b) * std::sqrt((c - lambda) * (lambda - a)) /
           (2.0 * M_PI * lambda * (g + b * lambda));
}

double SpectralModel::atom_mass() const {
    return ratios_.gamma > 1.0 ? 1.0 - 1.0 / ratios_.gamma : 0.0;
}

}  // namespace wsc
