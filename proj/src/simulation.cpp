#include "wsc/simulation.hpp"

#include <cmath>
#include <ostream>

#include "wsc/baselines.hpp"
#include "wsc/denoiser.hpp"
#include "wsc/matrix_io.hpp"
#include "wsc/rng.hpp"

namespace wsc {

namespace {

// Stream salts: signal directions, noise body, auxiliary (chi-squared)
// draws. Separate streams keep the uniform sequence feeding the noise body
// identical across distributions (common random numbers).
constexpr std::uint64_t kSignalSalt = 0x7369676e616cull;
constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ull;
constexpr std::uint64_t kAuxSalt = 0x617578ull;

double draw_noise(const NoiseDistribution& d, Rng& primary, Rng& aux) {
    const double u = primary.uniform();
    switch (d.kind) {
        case NoiseDistribution::Kind::Gaussian:
            return inverse_normal_cdf(u);
        case NoiseDistribution::Kind::Rademacher:
            return u < 0.5 ? -1.0 : 1.0;
        case NoiseDistribution::Kind::StudentT: {
            // z / sqrt(w / df), scaled by sqrt((df-2)/df) for unit variance.
            const double z = inverse_normal_cdf(u);
            const double w = aux.chi_squared(d.df);
            return z * std::sqrt((d.df - 2.0) / w);
        }
    }
    return 0.0;
}

void fill_noise(Eigen::MatrixXd& z, const NoiseDistribution& d, Rng& primary,
                Rng& aux) {
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i)
            z(i, j) = draw_noise(d, primary, aux);
}

Eigen::VectorXd d_weights(DWeightKind kind, Eigen::Index p) {
    Eigen::VectorXd d(p);
    switch (kind) {
        case DWeightKind::Identity:
            d.setOnes();
            break;
        case DWeightKind::QuadraticRamp:
            for (Eigen::Index k = 0; k < p; ++k) {
                const double x = static_cast<double>(k + 1) / static_cast<double>(p);
                d(k) = x * x;
            }
            break;
    }
    return d;
}

void gram_schmidt(Eigen::MatrixXd& a) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        for (Eigen::Index j = 0; j < k; ++j)
            a.col(k) -= a.col(j).dot(a.col(k)) * a.col(j);
        const double nrm = a.col(k).norm();
        if (!(nrm > 1e-12))
            throw ConfigError("generate: degenerate random directions");
        a.col(k) /= nrm;
    }
}

}  // namespace

Eigen::VectorXd CovarianceSpec::build(Eigen::Index p) const {
    Eigen::VectorXd diag(p);
    switch (kind) {
        case Kind::Identity:
            diag.setOnes();
            break;
        case Kind::LinSpaced:
            if (!(kappa >= 1.0))
                throw ConfigError("CovarianceSpec: kappa must be >= 1");
            diag = Eigen::VectorXd::LinSpaced(p, 1.0, kappa);
            break;
        case Kind::PolyDecay: {
            if (!(t_lo > 0.0 && t_hi > t_lo))
                throw ConfigError("CovarianceSpec: need 0 < t_lo < t_hi");
            const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(p, t_lo, t_hi);
            diag = t.array().pow(alpha);
            break;
        }
        case Kind::ExplicitDiag:
            if (static_cast<Eigen::Index>(values.size()) != p)
                throw ConfigError("CovarianceSpec: explicit diagonal has wrong length");
            diag = Eigen::Map<const Eigen::VectorXd>(values.data(), p);
            break;
    }
    if (!(diag.minCoeff() > 0.0))
        throw ConfigError("CovarianceSpec: eigenvalues must be strictly positive");
    if (normalize_tau)
        diag *= diag.cwiseInverse().mean();  // now p^-1 sum 1/diag = 1
    return diag;
}

std::string NoiseDistribution::name() const {
    switch (kind) {
        case Kind::Gaussian:
            return "gaussian";
        case Kind::Rademacher:
            return "rademacher";
        case Kind::StudentT: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "student_t_%g", df);
            return buf;
        }
    }
    return "?";
}

void GenerativeConfig::validate() const {
    if (p < 2 || n < 2)
        throw ConfigError("GenerativeConfig: p and n must be at least 2");
    if (m < p)
        throw ConfigError("GenerativeConfig: m >= p required");
    if (noise.kind == NoiseDistribution::Kind::StudentT && !(noise.df > 2.0))
        throw ConfigError("GenerativeConfig: StudentT df must exceed 2");
    for (const auto& s : spikes)
        if (!(s.sigma > 0.0))
            throw ConfigError("GenerativeConfig: spike sigma must be positive");
    for (std::size_t i = 0; i < spikes.size(); ++i)
        for (std::size_t j = i + 1; j < spikes.size(); ++j)
            if (spikes[i].sigma == spikes[j].sigma &&
                spikes[i].d_kind == spikes[j].d_kind)
                throw ConfigError(
                    "GenerativeConfig: effective spike intensities must be distinct");
}

Instance generate(const GenerativeConfig& config) {
    config.validate();
    const Eigen::Index p = config.p, n = config.n, m = config.m;
    const Eigen::Index r = static_cast<Eigen::Index>(config.spikes.size());

    Instance inst;
    inst.cov_diag = config.cov.build(p);
    const Eigen::VectorXd root = inst.cov_diag.cwiseSqrt();

    Rng signal_rng(mix64(config.seed ^ kSignalSalt));
    inst.U.resize(p, r);
    inst.V.resize(n, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const Eigen::VectorXd d =
            d_weights(config.spikes[static_cast<std::size_t>(k)].d_kind, p);
        for (Eigen::Index i = 0; i < p; ++i)
            inst.U(i, k) = d(i) * signal_rng.gaussian();
        for (Eigen::Index i = 0; i < n; ++i)
            inst.V(i, k) = signal_rng.gaussian();
    }
    gram_schmidt(inst.U);
    gram_schmidt(inst.V);

    inst.sigma.clear();
    for (const auto& s : config.spikes) inst.sigma.push_back(s.sigma);

    inst.X = Eigen::MatrixXd::Zero(p, n);
    for (Eigen::Index k = 0; k < r; ++k)
        inst.X.noalias() +=
            inst.sigma[static_cast<std::size_t>(k)] * inst.U.col(k) *
            inst.V.col(k).transpose();

    Rng noise_rng(mix64(config.seed ^ kNoiseSalt));
    Rng aux_rng(mix64(config.seed ^ kAuxSalt));
    Eigen::MatrixXd z(p, n);
    fill_noise(z, config.noise, noise_rng, aux_rng);
    inst.Y = inst.X + (root.asDiagonal() * z) / std::sqrt(static_cast<double>(n));

    Eigen::MatrixXd zp(p, m);
    fill_noise(zp, config.noise, noise_rng, aux_rng);
    inst.R_noise = root.asDiagonal() * zp;
    return inst;
}

std::vector<double> true_tau(const GenerativeConfig& config) {
    const Eigen::VectorXd diag = config.cov.build(config.p);
    std::vector<double> out;
    for (const auto& s : config.spikes) {
        const Eigen::VectorXd d = d_weights(s.d_kind, config.p);
        const double num = (d.array().square() / diag.array()).sum();
        const double den = d.squaredNorm();
        out.push_back(num / den);
    }
    return out;
}

Predictions asymptotic_predictions(const SpectralModel& model, double sigma,
                                   double tau, double mu) {
    if (!(tau > 0.0) || !(sigma > 0.0) || !(mu > 0.0))
        throw ConfigError("asymptotic_predictions: sigma, tau, mu must be positive");
    const double eff = std::sqrt(tau) * sigma;
    if (!(eff > model.bulk().sigma_thresh))
        throw SubThresholdError(
            "asymptotic_predictions: sqrt(tau)*sigma <= sigma_thresh; the spike "
            "is asymptotically invisible");
    Predictions pr;
    pr.y = model.xi(eff);
    const double z = pr.y * pr.y;
    const double apd = std::abs(model.psi_deriv(z));
    pr.c2 = model.phi(z) / (tau * apd);
    pr.cbar2 = model.stieltjes_assoc(z) * model.psi(z) / model.psi_deriv(z);
    pr.cross2 = tau * model.zeta(z) * model.psi(z) / model.psi_deriv(z);
    pr.norm2 = (mu * model.e_func(z) + model.phi(z) / tau) / apd;
    pr.ucos2 = model.phi(z) / (tau * mu * model.e_func(z) + model.phi(z));
    pr.eta = sigma * std::sqrt(pr.c2 * pr.cbar2) / pr.norm2;
    pr.t = pr.eta * std::sqrt(pr.norm2);
    pr.amse = sigma * sigma * (1.0 - pr.c2 * pr.cbar2 / pr.norm2);
    return pr;
}

namespace {

template <class F>
void for_each_trial(int n_trials, int threads, bool serial, F&& body) {
    if (serial || threads <= 1) {
        // Serial reference path, kept as the ground truth for the parallel
        // runner's output.
        for (int t = 0; t < n_trials; ++t) body(t);
        return;
    }
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int t = 0; t < n_trials; ++t) body(t);
}

struct MeanStderr {
    double mean;
    double stderr_;
};

MeanStderr reduce(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return {mean, sd / std::sqrt(n)};
}

GenerativeConfig study_config(Eigen::Index p, double gamma, double beta,
                              double sigma_mult, const NoiseDistribution& noise) {
    GenerativeConfig cfg;
    cfg.p = p;
    cfg.n = static_cast<Eigen::Index>(std::llround(static_cast<double>(p) / gamma));
    cfg.m = static_cast<Eigen::Index>(std::llround(static_cast<double>(p) / beta));
    cfg.cov.kind = CovarianceSpec::Kind::LinSpaced;
    cfg.cov.kappa = 50.0;
    cfg.noise = noise;
    cfg.spikes = {{1.0, DWeightKind::QuadraticRamp}};  // sigma patched below
    const double tau = true_tau(cfg)[0];
    const SpectralModel model(AspectRatios::make(
        static_cast<double>(p) / static_cast<double>(cfg.n),
        static_cast<double>(p) / static_cast<double>(cfg.m)));
    cfg.spikes[0].sigma =
        sigma_mult * model.bulk().sigma_thresh / std::sqrt(tau);
    return cfg;
}

}  // namespace

TrialMetrics study_trial(const GenerativeConfig& config, std::uint64_t master_seed,
                         std::uint64_t trial_index) {
    GenerativeConfig cfg = config;
    cfg.seed = trial_seed(master_seed, trial_index);
    const Instance inst = generate(cfg);
    const Eigen::Index p = cfg.p, m = cfg.m;

    Eigen::MatrixXd sigma(p, p);
    sigma.noalias() = inst.R_noise * inst.R_noise.transpose();
    sigma /= static_cast<double>(m);
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw IllConditionedError("study_trial: sample covariance not SPD");

    // Top generalized eigenpair of (Y Y^T, Sigma_hat) by power iteration:
    // g is Sigma_hat^{-1/2} times the top whitened left singular vector, up
    // to scale, and lambda = theta_hat^2.
    const Eigen::VectorXd u = inst.U.col(0);
    const Eigen::VectorXd v = inst.V.col(0);
    Eigen::VectorXd g = u.normalized();
    Eigen::VectorXd sg = sigma * g;
    double lam = 0.0, prev = -1.0;
    for (int iter = 0; iter < 500; ++iter) {
        const Eigen::VectorXd yt = inst.Y.transpose() * g;
        const Eigen::VectorXd w = inst.Y * yt;
        lam = g.dot(w) / g.dot(sg);
        Eigen::VectorXd gn = llt.solve(w);
        const double nn = gn.norm();
        sg = w / nn;
        g = gn / nn;
        if (prev > 0.0 && std::abs(lam - prev) <= 1e-12 * lam) break;
        prev = lam;
    }

    TrialMetrics out;
    out.theta = std::sqrt(lam);
    const double cn = std::sqrt(g.dot(sg));
    out.outer_w = std::abs(sg.dot(u)) / cn;
    out.outer_uw = std::abs(g.dot(u)) / cn;
    const Eigen::VectorXd vhat = (inst.Y.transpose() * g).normalized();
    out.inner = std::abs(vhat.dot(v));
    return out;
}

std::vector<StudyRow> run_convergence_study(const StudyConfig& config) {
    static const char* kMetrics[] = {"theta", "inner_cosine", "outer_whitened",
                                     "outer_unwhitened"};
    std::vector<StudyRow> rows;
    for (const auto& point : config.points) {
        const GenerativeConfig cfg =
            study_config(point.p, config.gamma, config.beta, config.sigma_mult,
                         point.noise);
        const SpectralModel model(AspectRatios::make(
            static_cast<double>(cfg.p) / static_cast<double>(cfg.n),
            static_cast<double>(cfg.p) / static_cast<double>(cfg.m)));
        const double tau = true_tau(cfg)[0];
        const double mu = cfg.cov.build(cfg.p).mean();
        const Predictions pr =
            asymptotic_predictions(model, cfg.spikes[0].sigma, tau, mu);
        const double pred[4] = {pr.y, std::sqrt(pr.cbar2), std::sqrt(pr.c2),
                                std::sqrt(pr.cross2)};

        std::vector<std::vector<double>> errs(4,
                                              std::vector<double>(point.n_trials));
        // Each study point draws trial seeds from its own offset so that
        // adding a point never perturbs another point's stream.
        const std::uint64_t point_seed =
            mix64(config.seed ^ mix64(static_cast<std::uint64_t>(point.p)));
        for_each_trial(point.n_trials, config.threads, config.serial_reference,
                       [&](int t) {
                           const TrialMetrics tm = study_trial(
                               cfg, point_seed, static_cast<std::uint64_t>(t));
                           const double emp[4] = {tm.theta, tm.inner, tm.outer_w,
                                                  tm.outer_uw};
                           for (int k = 0; k < 4; ++k)
                               errs[k][static_cast<std::size_t>(t)] =
                                   std::abs(emp[k] - pred[k]) / std::abs(pred[k]);
                       });
        for (int k = 0; k < 4; ++k) {
            const MeanStderr ms = reduce(errs[static_cast<std::size_t>(k)]);
            rows.push_back({point.p, point.noise.name(), kMetrics[k], ms.mean,
                            ms.stderr_, point.n_trials});
        }
    }
    return rows;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::WSC:
            return "wsc";
        case Method::OptShrink:
            return "optshrink";
        case Method::TruncatedSVD:
            return "tsvd";
    }
    return "?";
}

std::vector<ComparisonRow> run_comparison(const ComparisonConfig& config) {
    if (config.methods.empty() || config.kappas.empty() || config.n_trials <= 0)
        throw ConfigError("run_comparison: methods, kappas and n_trials required");
    std::vector<ComparisonRow> rows;
    for (const double kappa : config.kappas) {
        GenerativeConfig cfg;
        cfg.p = config.p;
        cfg.n = config.n;
        cfg.m = config.m;
        cfg.cov.kind = CovarianceSpec::Kind::LinSpaced;
        cfg.cov.kappa = kappa;
        cfg.cov.normalize_tau = true;  // tau = 1 exactly
        const SpectralModel model(AspectRatios::make(
            static_cast<double>(cfg.p) / static_cast<double>(cfg.n),
            static_cast<double>(cfg.p) / static_cast<double>(cfg.m)));
        for (int j = 1; j <= config.r; ++j)
            cfg.spikes.push_back(
                {model.bulk().sigma_thresh *
                     (1.0 + static_cast<double>(config.r - j + 1) /
                                static_cast<double>(config.r)),
                 DWeightKind::Identity});

        const std::size_t n_methods = config.methods.size();
        std::vector<std::vector<double>> errs(
            n_methods, std::vector<double>(config.n_trials));
        const std::uint64_t kappa_seed =
            mix64(config.seed ^ mix64(static_cast<std::uint64_t>(
                                  std::llround(kappa * 4096.0))));
        for_each_trial(
            config.n_trials, config.threads, config.serial_reference, [&](int t) {
                GenerativeConfig trial_cfg = cfg;
                trial_cfg.seed =
                    trial_seed(kappa_seed, static_cast<std::uint64_t>(t));
                const Instance inst = generate(trial_cfg);
                const double nx = inst.X.squaredNorm();
                for (std::size_t mi = 0; mi < n_methods; ++mi) {
                    Eigen::MatrixXd x_hat;
                    switch (config.methods[mi]) {
                        case Method::WSC: {
                            DenoiseInput in;
                            in.Y = inst.Y;
                            in.R_noise = inst.R_noise;
                            in.rank_cap = config.r;
                            x_hat = denoise(in).X_hat;
                            break;
                        }
                        case Method::OptShrink:
                            x_hat = optshrink(inst.Y, config.r);
                            break;
                        case Method::TruncatedSVD:
                            x_hat = truncated_svd(inst.Y, config.r);
                            break;
                    }
                    errs[mi][static_cast<std::size_t>(t)] =
                        (x_hat - inst.X).squaredNorm() / nx;
                }
            });
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            const MeanStderr ms = reduce(errs[mi]);
            rows.push_back({kappa, method_name(config.methods[mi]), ms.mean,
                            ms.stderr_, config.n_trials});
        }
    }
    return rows;
}

void write_study_csv(const std::vector<StudyRow>& rows, std::ostream& out) {
    out << "p,noise,metric,mean,stderr,n_trials\n";
    for (const auto& r : rows)
        out << r.p << ',' << r.noise << ',' << r.metric << ','
            << io::format_double(r.mean) << ',' << io::format_double(r.stderr_)
            << ',' << r.n_trials << '\n';
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          std::ostream& out) {
    out << "kappa,method,mean,stderr,n_trials\n";
    for (const auto& r : rows)
        out << io::format_double(r.kappa) << ',' << r.method << ','
            << io::format_double(r.mean) << ',' << io::format_double(r.stderr_)
            << ',' << r.n_trials << '\n';
}

}  // namespace wsc
