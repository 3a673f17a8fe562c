#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "wsc/errors.hpp"
#include "wsc/spectral.hpp"

namespace wsc {

struct DenoiseInput {
    Eigen::MatrixXd Y;        // p x n, signal plus noise
    Eigen::MatrixXd R_noise;  // p x m, noise-only side samples
    std::optional<double> epsilon;  // rank-detection margin; nullopt = Auto
    std::optional<int> rank_cap;
};

struct SpikeEstimate {
    double theta_hat = 0.0;   // observed whitened singular value
    double tau_hat = 0.0;
    double sigma_hat = 0.0;
    double c_hat = 0.0;
    double cbar_hat = 0.0;
    double eta_hat = 0.0;
    double t_hat = 0.0;
    double recolored_norm_sq = 0.0;
    bool degenerate = false;  // tau denominator <= 0; spike kept with eta 0
    bool clamped = false;     // a cosine radicand was clamped to 0
};

struct DenoiseReport {
    Eigen::MatrixXd X_hat;
    int rank_hat = 0;
    std::vector<SpikeEstimate> spikes;  // descending theta_hat
    double mu_hat = 0.0;
    double amse_hat = 0.0;
    double gamma_hat = 0.0;  // p/n
    double beta_hat = 0.0;   // p/m
};

// Sigma_hat = R' R'^T / m. Rejects m < p and eigenvalue ratios below 1e-10.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& r_noise);

struct Whitened {
    Eigen::MatrixXd y_w;       // Sigma_hat^{-1/2} Y
    Eigen::MatrixXd inv_sqrt;  // Sigma_hat^{-1/2}
    Eigen::MatrixXd sqrt;      // Sigma_hat^{1/2}
};

// Both roots come from one symmetric eigendecomposition (functional
// calculus), so sqrt * inv_sqrt reproduces the identity to rounding.
Whitened whiten(const Eigen::MatrixXd& y, const Eigen::MatrixXd& sigma_hat);

// Default rank-detection margin: theta_max * n^{-1/3}, between the
// Tracy-Widom edge scale and O(1).
double auto_epsilon(const SpectralModel& model, Eigen::Index n);

int estimate_rank(const Eigen::VectorXd& singular_values_desc,
                  const SpectralModel& model, double epsilon,
                  std::optional<int> rank_cap = std::nullopt);

double estimate_tau(double theta_hat, double recolored_norm_sq, double mu_hat,
                    const SpectralModel& model);

struct SpikeParams {
    double sigma_hat;
    double c_hat;     // weighted overlap <u, Sigma_hat^{1/2} u_w>; can exceed 1
    double cbar_hat;  // right-vector cosine, clamped to [0, 1]
    bool clamped;
};

SpikeParams estimate_spike(double theta_hat, double tau_hat,
                           const SpectralModel& model);

double estimate_amse(const std::vector<SpikeEstimate>& spikes);

DenoiseReport denoise(const DenoiseInput& input);

}  // namespace wsc
