#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsc/baselines.hpp"
#include "wsc/denoiser.hpp"
#include "wsc/errors.hpp"
#include "wsc/linalg.hpp"
#include "wsc/matrix_io.hpp"
#include "wsc/simulation.hpp"
#include "wsc/spectral.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitConditioning = 3;
constexpr int kExitDimensions = 4;
constexpr int kExitDomain = 5;

json spike_to_json(const wsc::SpikeEstimate& s) {
    return json{{"theta_hat", s.theta_hat},
                {"tau_hat", s.tau_hat},
                {"sigma_hat", s.sigma_hat},
                {"c_hat", s.c_hat},
                {"cbar_hat", s.cbar_hat},
                {"eta_hat", s.eta_hat},
                {"t_hat", s.t_hat},
                {"recolored_norm_sq", s.recolored_norm_sq},
                {"degenerate", s.degenerate},
                {"clamped", s.clamped}};
}

int run_denoise(const std::string& input, const std::string& noise,
                const std::string& epsilon, std::optional<int> rank_cap,
                const std::string& out, const std::string& report_path) {
    wsc::DenoiseInput in;
    in.Y = wsc::io::read_matrix(input);
    in.R_noise = wsc::io::read_matrix(noise);
    if (epsilon != "auto") {
        char* end = nullptr;
        const double e = std::strtod(epsilon.c_str(), &end);
        if (end == epsilon.c_str() || *end != '\0' || !(e > 0.0))
            throw wsc::ConfigError("--epsilon must be 'auto' or a positive number");
        in.epsilon = e;
    }
    in.rank_cap = rank_cap;
    const wsc::DenoiseReport report = wsc::denoise(in);
    wsc::io::write_matrix(out, report.X_hat);
    json spikes = json::array();
    for (const auto& s : report.spikes) spikes.push_back(spike_to_json(s));
    const json doc{{"rank_hat", report.rank_hat},
                   {"mu_hat", report.mu_hat},
                   {"amse_hat", report.amse_hat},
                   {"gamma_hat", report.gamma_hat},
                   {"beta_hat", report.beta_hat},
                   {"spikes", spikes}};
    std::ofstream rep(report_path, std::ios::binary);
    if (!rep)
        throw wsc::IoError(report_path + ": cannot open for writing");
    rep << doc.dump(2) << '\n';
    if (!rep)
        throw wsc::IoError(report_path + ": write failed");
    return kExitOk;
}

wsc::NoiseDistribution parse_noise(const json& point) {
    const std::string name = point.at("noise").get<std::string>();
    wsc::NoiseDistribution d;
    if (name == "gaussian") {
        d.kind = wsc::NoiseDistribution::Kind::Gaussian;
    } else if (name == "rademacher") {
        d.kind = wsc::NoiseDistribution::Kind::Rademacher;
    } else if (name == "student_t") {
        d.kind = wsc::NoiseDistribution::Kind::StudentT;
        d.df = point.at("df").get<double>();
    } else {
        throw wsc::ConfigError("unknown noise distribution '" + name + "'");
    }
    return d;
}

int run_simulate(const std::string& config_path, const std::string& out,
                 int threads, bool serial) {
    std::ifstream cf(config_path);
    if (!cf)
        throw wsc::IoError(config_path + ": cannot open for reading");
    json cfg;
    try {
        cfg = json::parse(cf);
    } catch (const json::parse_error& e) {
        throw wsc::IoError(config_path + ": " + e.what());
    }

    std::ofstream csv(out, std::ios::binary);
    if (!csv)
        throw wsc::IoError(out + ": cannot open for writing");

    const std::string study = cfg.at("study").get<std::string>();
    if (study == "convergence") {
        wsc::StudyConfig sc;
        sc.gamma = cfg.at("gamma").get<double>();
        sc.beta = cfg.at("beta").get<double>();
        sc.sigma_mult = cfg.value("sigma_mult", 1.8);
        sc.seed = cfg.at("seed").get<std::uint64_t>();
        sc.threads = threads;
        sc.serial_reference = serial;
        for (const auto& point : cfg.at("points")) {
            wsc::StudyPoint sp;
            sp.p = point.at("p").get<Eigen::Index>();
            sp.noise = parse_noise(point);
            sp.n_trials = point.at("trials").get<int>();
            sc.points.push_back(sp);
        }
        wsc::write_study_csv(wsc::run_convergence_study(sc), csv);
    } else if (study == "comparison") {
        wsc::ComparisonConfig cc;
        cc.p = cfg.at("p").get<Eigen::Index>();
        cc.n = cfg.at("n").get<Eigen::Index>();
        cc.m = cfg.at("m").get<Eigen::Index>();
        cc.r = cfg.at("r").get<int>();
        cc.kappas = cfg.at("kappas").get<std::vector<double>>();
        cc.n_trials = cfg.at("trials").get<int>();
        cc.seed = cfg.at("seed").get<std::uint64_t>();
        cc.threads = threads;
        cc.serial_reference = serial;
        for (const auto& name : cfg.at("methods")) {
            const std::string s = name.get<std::string>();
            if (s == "wsc")
                cc.methods.push_back(wsc::Method::WSC);
            else if (s == "optshrink")
                cc.methods.push_back(wsc::Method::OptShrink);
            else if (s == "tsvd")
                cc.methods.push_back(wsc::Method::TruncatedSVD);
            else
                throw wsc::ConfigError("unknown method '" + s + "'");
        }
        wsc::write_comparison_csv(wsc::run_comparison(cc), csv);
    } else {
        throw wsc::ConfigError("unknown study '" + study + "'");
    }
    if (!csv)
        throw wsc::IoError(out + ": write failed");

    const json manifest{{"command", "simulate"}, {"config", cfg}, {"out", out}};
    std::ofstream mf(out + ".manifest.json", std::ios::binary);
    if (!mf)
        throw wsc::IoError(out + ".manifest.json: cannot open for writing");
    mf << manifest.dump(2) << '\n';
    return kExitOk;
}

int run_spectral(double gamma, double beta, const std::string& fn, double from,
                 double to, int points) {
    const wsc::SpectralModel model(wsc::AspectRatios::make(gamma, beta));
    const auto& bulk = model.bulk();
    if (fn == "sigma_thresh" || fn == "theta_max" || fn == "theta_min") {
        const double v = fn == "sigma_thresh"  ? bulk.sigma_thresh
                         : fn == "theta_max" ? bulk.theta_max
                                             : bulk.theta_min;
        std::cout << fn << ',' << wsc::io::format_double(v) << '\n';
        return kExitOk;
    }
    if (points < 1)
        throw wsc::ConfigError("--points must be at least 1");
    if (points > 1 && !(to > from))
        throw wsc::ConfigError("--to must exceed --from");
    for (int i = 0; i < points; ++i) {
        const double x =
            points == 1 ? from
                        : from + (to - from) * static_cast<double>(i) /
                              static_cast<double>(points - 1);
        double v;
        if (fn == "sbar")
            v = model.stieltjes(x);
        else if (fn == "sassoc")
            v = model.stieltjes_assoc(x);
        else if (fn == "zeta")
            v = model.zeta(x);
        else if (fn == "psi")
            v = model.psi(x);
        else if (fn == "phi")
            v = model.phi(x);
        else if (fn == "xi")
            v = model.xi(x);
        else if (fn == "xi_inv")
            v = model.xi_inv(x);
        else if (fn == "upsilon1")
            v = model.upsilon1(x);
        else if (fn == "upsilon2")
            v = model.upsilon2(x);
        else if (fn == "E")
            v = model.e_func(x);
        else if (fn == "density")
            v = model.wachter_density(x);
        else
            throw wsc::ConfigError("unknown function '" + fn + "'");
        std::cout << wsc::io::format_double(x) << ','
                  << wsc::io::format_double(v) << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    wsc::linalg::pin_blas_single_thread();

    CLI::App app{"Optimal singular value shrinkage for low-rank denoising "
                 "under correlated noise with noise-only side samples"};
    app.require_subcommand(1);

    auto* den = app.add_subcommand("denoise", "Denoise a matrix");
    std::string den_input, den_noise, den_out, den_report;
    std::string den_epsilon = "auto";
    int den_rank_cap = -1;
    den->add_option("--input", den_input, "Observed matrix Y (p x n)")->required();
    den->add_option("--noise", den_noise, "Noise-only samples R' (p x m)")->required();
    den->add_option("--epsilon", den_epsilon, "Rank-detection margin or 'auto'");
    den->add_option("--rank-cap", den_rank_cap, "Upper bound on the rank");
    den->add_option("--out", den_out, "Output path for X_hat")->required();
    den->add_option("--report", den_report, "Output path for the JSON report")
        ->required();

    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
    std::string sim_config, sim_out;
    int sim_threads = 1;
    bool sim_serial = false;
    sim->add_option("--config", sim_config, "Study config JSON")->required();
    sim->add_option("--out", sim_out, "Output CSV path")->required();
    sim->add_option("--threads", sim_threads, "Worker threads for trials");
    sim->add_flag("--serial", sim_serial, "Use the serial reference runner");

    auto* spec = app.add_subcommand("spectral", "Evaluate a spectral function");
    double sp_gamma = 0, sp_beta = 0, sp_from = 0, sp_to = 0;
    int sp_points = 1;
    std::string sp_fn;
    spec->add_option("--gamma", sp_gamma, "Aspect ratio p/n")->required();
    spec->add_option("--beta", sp_beta, "Aspect ratio p/m")->required();
    spec->add_option("--fn", sp_fn, "Function name")->required();
    spec->add_option("--from", sp_from, "Grid start");
    spec->add_option("--to", sp_to, "Grid end");
    spec->add_option("--points", sp_points, "Grid size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (den->parsed())
            return run_denoise(den_input, den_noise, den_epsilon,
                               den_rank_cap >= 0
                                   ? std::optional<int>(den_rank_cap)
                                   : std::nullopt,
                               den_out, den_report);
        if (sim->parsed())
            return run_simulate(sim_config, sim_out, sim_threads, sim_serial);
        if (spec->parsed())
            return run_spectral(sp_gamma, sp_beta, sp_fn, sp_from, sp_to,
                                sp_points);
    } catch (const wsc::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const wsc::IllConditionedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConditioning;
    } catch (const wsc::DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDimensions;
    } catch (const wsc::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const wsc::SubThresholdError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const wsc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
