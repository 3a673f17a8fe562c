#include "wsc/denoiser.hpp"

#include <cmath>
#include <string>

#include "wsc/linalg.hpp"

namespace wsc {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& r_noise) {
    const Eigen::Index p = r_noise.rows();
    const Eigen::Index m = r_noise.cols();
    if (m < p)
        throw IllConditionedError(
            "sample_covariance: m >= p is required for an invertible noise "
            "covariance (got m = " + std::to_string(m) + ", p = " +
            std::to_string(p) + ")");
    Eigen::MatrixXd sigma(p, p);
    sigma.setZero();
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(r_noise, 1.0 / m);
    sigma.triangularView<Eigen::Upper>() = sigma.transpose();
    const Eigen::VectorXd ev = linalg::sym_eigvals(sigma);
    if (!(ev(0) > 1e-10 * ev(p - 1)))
        throw IllConditionedError(
            "sample_covariance: eigenvalue ratio below 1e-10 (min " +
            std::to_string(ev(0)) + ", max " + std::to_string(ev(p - 1)) + ")");
    return sigma;
}

Whitened whiten(const Eigen::MatrixXd& y, const Eigen::MatrixXd& sigma_hat) {
    const auto eig = linalg::sym_eig(sigma_hat);
    if (!(eig.values(0) > 0.0))
        throw IllConditionedError("whiten: covariance not positive definite");
    const Eigen::VectorXd root = eig.values.cwiseSqrt();
    Whitened w;
    w.sqrt = eig.vectors * root.asDiagonal() * eig.vectors.transpose();
    w.inv_sqrt = eig.vectors * root.cwiseInverse().asDiagonal() * eig.vectors.transpose();
    w.y_w = w.inv_sqrt * y;
    return w;
}

double auto_epsilon(const SpectralModel& model, Eigen::Index n) {
    return model.bulk().theta_max * std::pow(static_cast<double>(n), -1.0 / 3.0);
}

int estimate_rank(const Eigen::VectorXd& singular_values_desc,
                  const SpectralModel& model, double epsilon,
                  std::optional<int> rank_cap) {
    const double cut = model.bulk().theta_max + epsilon;
    int r = 0;
    for (Eigen::Index i = 0; i < singular_values_desc.size(); ++i) {
        if (singular_values_desc(i) > cut)
            ++r;
        else
            break;
    }
    if (rank_cap && r > *rank_cap) r = *rank_cap;
    return r;
}

double estimate_tau(double theta_hat, double recolored_norm_sq, double mu_hat,
                    const SpectralModel& model) {
    const double z = theta_hat * theta_hat;
    const double den = std::abs(model.psi_deriv(z)) * recolored_norm_sq -
                       mu_hat * model.e_func(z);
    if (!(den > 0.0))
        throw DegenerateSpikeError(
            "estimate_tau: nonpositive denominator (finite-sample violation of "
            "the norm identity); spike dropped");
    return model.phi(z) / den;
}

SpikeParams estimate_spike(double theta_hat, double tau_hat,
                           const SpectralModel& model) {
    if (!(tau_hat > 0.0))
        throw DomainError("estimate_spike: tau_hat must be positive");
    const double z = theta_hat * theta_hat;
    SpikeParams out;
    out.sigma_hat = model.xi_inv(theta_hat) / std::sqrt(tau_hat);
    out.clamped = false;
    double c2 = model.phi(z) / (tau_hat * std::abs(model.psi_deriv(z)));
    double cbar2 = model.stieltjes_assoc(z) * model.psi(z) / model.psi_deriv(z);
    if (c2 < 0.0) {
        c2 = 0.0;
        out.clamped = true;
    }
    if (cbar2 < 0.0) {
        cbar2 = 0.0;
        out.clamped = true;
    }
    if (cbar2 > 1.0) cbar2 = 1.0;
    out.c_hat = std::sqrt(c2);
    out.cbar_hat = std::sqrt(cbar2);
    return out;
}

double estimate_amse(const std::vector<SpikeEstimate>& spikes) {
    double amse = 0.0;
    for (const auto& s : spikes) {
        if (s.degenerate) continue;
        const double c2 = s.c_hat * s.c_hat;
        const double cbar2 = s.cbar_hat * s.cbar_hat;
        amse += s.sigma_hat * s.sigma_hat *
                (1.0 - c2 * cbar2 / s.recolored_norm_sq);
    }
    return amse;
}

DenoiseReport denoise(const DenoiseInput& input) {
    const Eigen::Index p = input.Y.rows();
    const Eigen::Index n = input.Y.cols();
    const Eigen::Index m = input.R_noise.cols();
    if (p < 2 || n < 2)
        throw DimensionError("denoise: Y must be at least 2 x 2");
    if (input.R_noise.rows() != p)
        throw DimensionError("denoise: Y and R_noise row counts differ (" +
                             std::to_string(p) + " vs " +
                             std::to_string(input.R_noise.rows()) + ")");
    if (input.epsilon && !(*input.epsilon > 0.0))
        throw ConfigError("denoise: epsilon must be positive");
    if (input.rank_cap && *input.rank_cap < 0)
        throw ConfigError("denoise: rank_cap must be nonnegative");
    if (m <= p)
        throw IllConditionedError(
            "denoise: need more noise-only samples than rows (m > p) to "
            "invert the covariance estimate");

    DenoiseReport report;
    report.gamma_hat = static_cast<double>(p) / static_cast<double>(n);
    report.beta_hat = static_cast<double>(p) / static_cast<double>(m);
    const SpectralModel model(
        AspectRatios::make(report.gamma_hat, report.beta_hat));

    const Eigen::MatrixXd sigma_hat = sample_covariance(input.R_noise);
    report.mu_hat = sigma_hat.trace() / static_cast<double>(p);

    const Whitened w = whiten(input.Y, sigma_hat);
    auto svd = linalg::svd_thin(w.y_w);
    linalg::fix_svd_signs(svd.u, svd.v);

    const double eps = input.epsilon ? *input.epsilon : auto_epsilon(model, n);
    report.rank_hat = estimate_rank(svd.s, model, eps, input.rank_cap);

    report.X_hat = Eigen::MatrixXd::Zero(p, n);
    for (int k = 0; k < report.rank_hat; ++k) {
        SpikeEstimate spike;
        spike.theta_hat = svd.s(k);
        const Eigen::VectorXd recolored = w.sqrt * svd.u.col(k);
        spike.recolored_norm_sq = recolored.squaredNorm();
        try {
            spike.tau_hat = estimate_tau(spike.theta_hat, spike.recolored_norm_sq,
                                         report.mu_hat, model);
            const SpikeParams params =
                estimate_spike(spike.theta_hat, spike.tau_hat, model);
            spike.sigma_hat = params.sigma_hat;
            spike.c_hat = params.c_hat;
            spike.cbar_hat = params.cbar_hat;
            spike.clamped = params.clamped;
            spike.eta_hat = spike.sigma_hat * spike.c_hat * spike.cbar_hat /
                            spike.recolored_norm_sq;
            spike.t_hat = spike.eta_hat * std::sqrt(spike.recolored_norm_sq);
            if (spike.eta_hat > 0.0)
                report.X_hat.noalias() +=
                    spike.eta_hat * recolored * svd.v.col(k).transpose();
        } catch (const DegenerateSpikeError&) {
            spike.degenerate = true;
        }
        report.spikes.push_back(spike);
    }
    report.amse_hat = estimate_amse(report.spikes);
    return report;
}

}  // namespace wsc
