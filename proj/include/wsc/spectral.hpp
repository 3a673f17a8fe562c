#pragma once

#include "wsc/errors.hpp"

namespace wsc {

// Asymptotic shape parameters: gamma = lim p/n, beta = lim p/m.
// beta = 0 is allowed here (Marchenko-Pastur reduction); the denoiser
// requires beta > 0 since m is finite.
struct AspectRatios {
    double gamma;
    double beta;

    static AspectRatios make(double gamma, double beta);
};

// Detection threshold and bulk edges of the whitened noise singular values.
struct BulkGeometry {
    double sigma_thresh;
    double theta_max;
    double theta_min;
};

BulkGeometry bulk_geometry(const AspectRatios& ratios);

// Stieltjes transform of the Marchenko-Pastur law with ratio beta, evaluated
// left of the bulk: 0 < z < (1 - sqrt(beta))^2.
double mp_stieltjes(double beta, double z);
double mp_stieltjes_deriv(double beta, double z);

// Closed-form evaluator bundle for the spiked F-matrix spectral functions at
// fixed (gamma, beta). All functions of z take squared-singular-value
// arguments and require z strictly above the bulk edge theta_max^2.
// Derivatives are analytic, not finite differences: the estimator divides by
// psi' so derivative noise would propagate straight into the shrinkage
// weights.
class SpectralModel {
public:
    explicit SpectralModel(const AspectRatios& ratios);

    const AspectRatios& ratios() const { return ratios_; }
    const BulkGeometry& bulk() const { return bulk_; }
    double edge() const { return edge_; }  // theta_max^2

    // Stieltjes transform of Wachter's distribution and its companion.
    double stieltjes(double z) const;             // sbar
    double stieltjes_deriv(double z) const;
    double stieltjes_assoc(double z) const;       // sunder
    double stieltjes_assoc_deriv(double z) const;

    double zeta(double z) const;
    double zeta_deriv(double z) const;

    // psi = z * sunder * zeta; strictly decreasing, maps (theta_max^2, inf)
    // onto (0, 1/sigma_thresh^2).
    double psi(double z) const;
    double psi_deriv(double z) const;

    double phi(double z) const;  // z * |sunder| * sbar^2

    double upsilon1(double z) const;
    double upsilon1_deriv(double z) const;
    double upsilon2(double z) const;

    double e_func(double z) const;

    // Spike-forward map: location of the outlier produced by effective
    // intensity sigma >= sigma_thresh, and its inverse.
    double xi(double sigma) const;
    double xi_inv(double theta) const;

    // Continuous part of the limiting eigenvalue density; zero outside
    // [theta_min^2, theta_max^2]. The atom at 0 (gamma > 1) is reported
    // separately so quadrature against the density stays simple.
    double wachter_density(double lambda) const;
    double atom_mass() const;

private:
    void require_above_edge(double z, const char* fn) const;
    double discriminant(double z) const;
    double discriminant_deriv(double z) const;
    // psi without the strict edge guard; xi_inv(theta_max) needs the value
    // exactly at the edge, where psi itself is still finite.
    double psi_at(double z) const;

    AspectRatios ratios_;
    BulkGeometry bulk_;
    double edge_;
};

}  // namespace wsc
