#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "wsc/denoiser.hpp"
#include "wsc/linalg.hpp"
#include "wsc/simulation.hpp"
#include "wsc/spectral.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct SingleThread {
    SingleThread() { wsc::linalg::pin_blas_single_thread(); }
} pin;

wsc::Instance strong_instance(std::uint64_t seed, Eigen::Index p = 80) {
    wsc::GenerativeConfig cfg;
    cfg.p = p;
    cfg.n = 2 * p;
    cfg.m = 4 * p;
    cfg.spikes.push_back({6.0, wsc::DWeightKind::Identity});
    cfg.cov.kind = wsc::CovarianceSpec::Kind::LinSpaced;
    cfg.cov.kappa = 4.0;
    cfg.seed = seed;
    return wsc::generate(cfg);
}

}  // namespace

TEST_CASE("sample covariance") {
    MatrixXd r(2, 4);
    r << 1, 2, 3, 4, 0, 1, -1, 2;
    const MatrixXd s = wsc::sample_covariance(r);
    CHECK(s(0, 0) == doctest::Approx(30.0 / 4.0).epsilon(1e-15));
    CHECK(s(0, 1) == doctest::Approx(7.0 / 4.0).epsilon(1e-15));
    CHECK(s(1, 0) == s(0, 1));
    CHECK(s(1, 1) == doctest::Approx(6.0 / 4.0).epsilon(1e-15));

    // m < p is not enough samples to invert
    CHECK_THROWS_AS(wsc::sample_covariance(MatrixXd::Random(5, 4)),
                    wsc::IllConditionedError);
    // identical rows give a singular estimate
    MatrixXd degenerate = MatrixXd::Random(1, 8).replicate(3, 1);
    CHECK_THROWS_AS(wsc::sample_covariance(degenerate), wsc::IllConditionedError);
}

TEST_CASE("whitening is an exact functional calculus") {
    const auto inst = strong_instance(7);
    const MatrixXd sigma_hat = wsc::sample_covariance(inst.R_noise);
    const auto w = wsc::whiten(inst.Y, sigma_hat);
    const Eigen::Index p = sigma_hat.rows();

    CHECK((w.sqrt * w.inv_sqrt - MatrixXd::Identity(p, p)).norm() < 1e-10);
    CHECK((w.inv_sqrt * sigma_hat * w.inv_sqrt - MatrixXd::Identity(p, p)).norm() <
          1e-9);
    CHECK((w.sqrt * w.sqrt - sigma_hat).norm() < 1e-9 * sigma_hat.norm());
    CHECK((w.y_w - w.inv_sqrt * inst.Y).norm() == 0.0);
}

TEST_CASE("rank estimation from whitened singular values") {
    const wsc::SpectralModel model(wsc::AspectRatios::make(0.5, 0.25));
    const double edge = model.bulk().theta_max;
    const double eps = 0.05;

    VectorXd s(5);
    s << edge + 1.0, edge + 0.3, edge + 2 * eps, edge + 0.5 * eps, edge - 0.1;
    CHECK(wsc::estimate_rank(s, model, eps) == 3);
    CHECK(wsc::estimate_rank(s, model, eps, 2) == 2);
    CHECK(wsc::estimate_rank(s, model, eps, 0) == 0);

    VectorXd noise(3);
    noise << edge + 0.5 * eps, edge - 0.2, edge - 0.4;
    CHECK(wsc::estimate_rank(noise, model, eps) == 0);

    CHECK(wsc::auto_epsilon(model, 1000) ==
          doctest::Approx(edge * std::pow(1000.0, -1.0 / 3.0)).epsilon(1e-12));
    CHECK(wsc::auto_epsilon(model, 8000) < wsc::auto_epsilon(model, 1000));
}

TEST_CASE("spike parameter recovery at the asymptotic fixed point") {
    // With theta at the deterministic outlier location and the exact tau,
    // the estimator must return the generating parameters.
    const wsc::SpectralModel model(wsc::AspectRatios::make(2.0 / 3.0, 0.25));
    const double sigma = 1.9, tau = 1.0, mu = 2.5;
    const double y = model.xi(std::sqrt(tau) * sigma);
    CHECK(y == doctest::Approx(2.8324118342703777).epsilon(1e-12));

    const auto sp = wsc::estimate_spike(y, tau, model);
    CHECK(sp.sigma_hat == doctest::Approx(sigma).epsilon(1e-10));
    CHECK(sp.c_hat ==
          doctest::Approx(std::sqrt(0.45679868646603267)).epsilon(1e-10));
    CHECK(sp.cbar_hat ==
          doctest::Approx(std::sqrt(0.6225052207694716)).epsilon(1e-10));
    CHECK_FALSE(sp.clamped);

    // tau from the limiting recolored norm; closes the loop
    const double z = y * y;
    const double norm2 =
        (mu * model.e_func(z) + model.phi(z) / tau) / -model.psi_deriv(z);
    CHECK(norm2 == doctest::Approx(0.8435415825244429).epsilon(1e-10));
    CHECK(wsc::estimate_tau(y, norm2, mu, model) == doctest::Approx(tau).epsilon(1e-8));

    // a norm too small for the identity marks the spike degenerate
    CHECK_THROWS_AS(wsc::estimate_tau(y, 1e-6, mu, model),
                    wsc::DegenerateSpikeError);
}

TEST_CASE("weighted overlap may exceed one") {
    // The recolored-side overlap is norm-weighted, not a cosine: in strongly
    // anisotropic geometries it exceeds 1 and must not be clamped.
    const wsc::SpectralModel model(wsc::AspectRatios::make(2.0 / 3.0, 0.25));
    const double tau = 0.02482884376730403, sigma = 13.934797622339834;
    const double y = model.xi(std::sqrt(tau) * sigma);
    const auto sp = wsc::estimate_spike(y, tau, model);
    CHECK(sp.c_hat == doctest::Approx(std::sqrt(21.472415403595697)).epsilon(1e-10));
    CHECK(sp.cbar_hat == doctest::Approx(std::sqrt(0.7199167882086164)).epsilon(1e-10));
    CHECK(sp.cbar_hat <= 1.0);
}

TEST_CASE("amse accumulates non-degenerate spikes") {
    std::vector<wsc::SpikeEstimate> spikes(2);
    spikes[0].sigma_hat = 2.0;
    spikes[0].c_hat = 0.8;
    spikes[0].cbar_hat = 0.9;
    spikes[0].recolored_norm_sq = 1.1;
    spikes[1].sigma_hat = 1.5;
    spikes[1].degenerate = true;
    // degenerate spikes carry no usable sigma estimate and are skipped
    const double expected = 4.0 * (1.0 - 0.64 * 0.81 / 1.1);
    CHECK(wsc::estimate_amse(spikes) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("denoise recovers a strong planted spike") {
    const auto inst = strong_instance(42, 100);
    wsc::DenoiseInput in;
    in.Y = inst.Y;
    in.R_noise = inst.R_noise;
    const auto rep = wsc::denoise(in);

    CHECK(rep.rank_hat == 1);
    REQUIRE(rep.spikes.size() == 1);
    CHECK(rep.gamma_hat == doctest::Approx(0.5));
    CHECK(rep.beta_hat == doctest::Approx(0.25));
    CHECK(rep.mu_hat == doctest::Approx(inst.cov_diag.mean()).epsilon(0.3));
    CHECK(rep.spikes[0].sigma_hat == doctest::Approx(6.0).epsilon(0.35));
    const double rel =
        (rep.X_hat - inst.X).squaredNorm() / inst.X.squaredNorm();
    CHECK(rel < 0.35);
    // shrinkage beats keeping the raw spike energy on this instance
    CHECK(rep.amse_hat > 0.0);
    CHECK(rep.amse_hat < 36.0);
}

TEST_CASE("denoise equivariance") {
    const auto inst = strong_instance(3, 60);
    wsc::DenoiseInput in;
    in.Y = inst.Y;
    in.R_noise = inst.R_noise;
    const auto base = wsc::denoise(in);

    SUBCASE("common scaling of data and noise") {
        wsc::DenoiseInput scaled;
        scaled.Y = 2.0 * inst.Y;
        scaled.R_noise = 2.0 * inst.R_noise;
        const auto rep = wsc::denoise(scaled);
        CHECK(rep.rank_hat == base.rank_hat);
        CHECK((rep.X_hat - 2.0 * base.X_hat).norm() < 1e-7 * base.X_hat.norm());
        REQUIRE(!rep.spikes.empty());
        CHECK(rep.spikes[0].theta_hat ==
              doctest::Approx(base.spikes[0].theta_hat).epsilon(1e-10));
        CHECK(rep.spikes[0].sigma_hat ==
              doctest::Approx(2.0 * base.spikes[0].sigma_hat).epsilon(1e-8));
    }

    SUBCASE("row permutation") {
        const Eigen::Index p = inst.Y.rows();
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(p);
        perm.setIdentity();
        std::mt19937_64 g(11);
        std::shuffle(perm.indices().data(), perm.indices().data() + p, g);
        wsc::DenoiseInput permuted;
        permuted.Y = perm * inst.Y;
        permuted.R_noise = perm * inst.R_noise;
        const auto rep = wsc::denoise(permuted);
        CHECK(rep.rank_hat == base.rank_hat);
        CHECK((rep.X_hat - perm * base.X_hat).norm() < 1e-7 * base.X_hat.norm());
    }
}

TEST_CASE("pure noise yields empty estimate") {
    wsc::GenerativeConfig cfg;
    cfg.p = 80;
    cfg.n = 160;
    cfg.m = 320;
    cfg.cov.kind = wsc::CovarianceSpec::Kind::LinSpaced;
    cfg.cov.kappa = 10.0;
    cfg.seed = 5;
    const auto inst = wsc::generate(cfg);
    wsc::DenoiseInput in;
    in.Y = inst.Y;
    in.R_noise = inst.R_noise;
    const auto rep = wsc::denoise(in);
    CHECK(rep.rank_hat == 0);
    CHECK(rep.X_hat.norm() == 0.0);
    CHECK(rep.amse_hat == 0.0);
}

TEST_CASE("input validation") {
    const auto inst = strong_instance(1, 40);
    wsc::DenoiseInput in;
    in.Y = inst.Y;
    in.R_noise = inst.R_noise;

    SUBCASE("row mismatch") {
        in.R_noise = MatrixXd::Random(in.Y.rows() + 1, 200);
        CHECK_THROWS_AS(wsc::denoise(in), wsc::DimensionError);
    }
    SUBCASE("bad epsilon") {
        in.epsilon = -0.5;
        CHECK_THROWS_AS(wsc::denoise(in), wsc::ConfigError);
    }
    SUBCASE("bad rank cap") {
        in.rank_cap = -2;
        CHECK_THROWS_AS(wsc::denoise(in), wsc::ConfigError);
    }
    SUBCASE("too few noise samples") {
        in.R_noise = in.R_noise.leftCols(in.Y.rows() - 1).eval();
        CHECK_THROWS_AS(wsc::denoise(in), wsc::IllConditionedError);
    }
}
