#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsc/errors.hpp"
#include "wsc/spectral.hpp"

namespace wsc {

// Thrown by asymptotic_predictions when sqrt(tau)*sigma <= sigma_thresh:
// the spike is asymptotically invisible.
struct SubThresholdError : Error {
    using Error::Error;
};

struct CovarianceSpec {
    enum class Kind { Identity, LinSpaced, PolyDecay, ExplicitDiag };
    Kind kind = Kind::Identity;
    double kappa = 1.0;   // LinSpaced: diagonal linearly spaced in [1, kappa]
    double alpha = 1.0;   // PolyDecay: entries t^alpha, t linspaced in [t_lo, t_hi]
    double t_lo = 1.0;
    double t_hi = 3.0;
    std::vector<double> values;  // ExplicitDiag
    bool normalize_tau = false;  // rescale so p^-1 sum 1/Sigma_ii = 1

    Eigen::VectorXd build(Eigen::Index p) const;
};

struct NoiseDistribution {
    enum class Kind { Gaussian, Rademacher, StudentT };
    Kind kind = Kind::Gaussian;
    double df = 10.0;  // StudentT only; must exceed 2 for unit variance

    std::string name() const;
};

// Signal PC weight matrix for one spike: u = D w / ||D w||.
// QuadraticRamp is the diagonal with entries (k/p)^2, k = 1..p (scaled
// arbitrarily; the normalization of u cancels any scale).
enum class DWeightKind { Identity, QuadraticRamp };

struct SpikeSpec {
    double sigma;
    DWeightKind d_kind = DWeightKind::Identity;
};

struct GenerativeConfig {
    Eigen::Index p = 0, n = 0, m = 0;
    std::vector<SpikeSpec> spikes;
    CovarianceSpec cov;
    NoiseDistribution noise;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

struct Instance {
    Eigen::MatrixXd X;        // p x n signal
    Eigen::MatrixXd Y;        // X + Sigma^{1/2} Z / sqrt(n)
    Eigen::MatrixXd R_noise;  // Sigma^{1/2} Z'
    Eigen::MatrixXd U;        // p x r ground-truth left directions
    Eigen::MatrixXd V;        // n x r ground-truth right directions
    std::vector<double> sigma;
    Eigen::VectorXd cov_diag;
};

Instance generate(const GenerativeConfig& config);

// Alignment tau_k for each spike, consistent with the unit normalization of
// u: tr(D^T Sigma^{-1} D) / tr(D^T D). Equals p^-1 tr(D^T Sigma^{-1} D)
// whenever D has unit energy (Identity weights).
std::vector<double> true_tau(const GenerativeConfig& config);

struct Predictions {
    double y;        // outlier location Xi(sqrt(tau) sigma)
    double c2;       // squared weighted overlap <u, Sigma_hat^{1/2} u_w>
    double cbar2;    // squared right cosine
    double cross2;   // squared unwhitened overlap <u, Sigma_hat^{-1/2} u_w> (normalized)
    double norm2;    // ||Sigma_hat^{1/2} u_w||^2
    double ucos2;    // squared cosine <u, recolored u_w / norm>
    double eta;
    double t;
    double amse;     // this spike's AMSE contribution
};

Predictions asymptotic_predictions(const SpectralModel& model, double sigma,
                                   double tau, double mu);

// Convergence study: relative errors of the four tracked empirical
// quantities against their asymptotic predictions, in the fixed rank-1
// geometry with linearly spaced covariance (1..50) and quadratic-ramp
// signal weights.
struct StudyPoint {
    Eigen::Index p = 0;
    NoiseDistribution noise;
    int n_trials = 0;
};

struct StudyConfig {
    double gamma = 2.0 / 3.0;
    double beta = 0.25;
    double sigma_mult = 1.8;  // spike intensity in units of sigma_thresh
    std::uint64_t seed = 0;
    std::vector<StudyPoint> points;
    int threads = 1;
    bool serial_reference = false;  // force the plain serial loop
};

struct StudyRow {
    Eigen::Index p;
    std::string noise;
    std::string metric;  // theta, inner_cosine, outer_whitened, outer_unwhitened
    double mean;
    double stderr_;
    int n_trials;
};

std::vector<StudyRow> run_convergence_study(const StudyConfig& config);

// Shrinker comparison on shared instances.
enum class Method { WSC, OptShrink, TruncatedSVD };
std::string method_name(Method m);

struct ComparisonConfig {
    Eigen::Index p = 600, n = 1200, m = 1800;
    int r = 3;
    std::vector<double> kappas;
    std::vector<Method> methods;
    int n_trials = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    bool serial_reference = false;
};

struct ComparisonRow {
    double kappa;
    std::string method;
    double mean;  // mean ||X_hat - X||_F^2 / ||X||_F^2
    double stderr_;
    int n_trials;
};

std::vector<ComparisonRow> run_comparison(const ComparisonConfig& config);

// The per-trial empirical quantities of one convergence-study trial,
// exposed for tests.
struct TrialMetrics {
    double theta;
    double inner;     // |v_hat . v|
    double outer_w;   // |u_w . Sigma_hat^{1/2} u|
    double outer_uw;  // |u_w . Sigma_hat^{-1/2} u|
};

// One study trial at the given trial index, via the generalized-eigenvalue
// formulation (Cholesky solves only; no matrix square roots).
TrialMetrics study_trial(const GenerativeConfig& config, std::uint64_t master_seed,
                         std::uint64_t trial_index);

void write_study_csv(const std::vector<StudyRow>& rows, std::ostream& out);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace wsc
