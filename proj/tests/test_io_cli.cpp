#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wsc/denoiser.hpp"
#include "wsc/errors.hpp"
#include "wsc/linalg.hpp"
#include "wsc/matrix_io.hpp"
#include "wsc/simulation.hpp"

namespace fs = std::filesystem;
using Eigen::MatrixXd;

namespace {

struct SingleThread {
    SingleThread() { wsc::linalg::pin_blas_single_thread(); }
} pin;

fs::path temp_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "wsc_io_cli_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string cli_path() {
    const char* env = std::getenv("WSC_CLI");
    REQUIRE_MESSAGE(env != nullptr, "WSC_CLI must point at the CLI binary");
    return env;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > " +
                            (temp_dir() / "stdout.txt").string() + " 2> " +
                            (temp_dir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("csv round trip preserves every bit") {
    MatrixXd m(3, 2);
    m << 1.0, -2.5, 1.0 / 3.0, 1e-308, 3.141592653589793, -1e30;
    const auto path = temp_dir() / "round.csv";
    wsc::io::write_matrix(path.string(), m);
    const MatrixXd back = wsc::io::read_matrix(path.string());
    CHECK(back == m);
}

TEST_CASE("binary round trip preserves every bit") {
    const MatrixXd m = MatrixXd::Random(17, 9);
    const auto path = temp_dir() / "round.wsc1";
    wsc::io::write_matrix(path.string(), m);
    const MatrixXd back = wsc::io::read_matrix(path.string());
    CHECK(back == m);
    // magic bytes up front
    CHECK(slurp(path).substr(0, 4) == "WSC1");
}

TEST_CASE("reader rejects malformed input") {
    CHECK_THROWS_AS(wsc::io::read_matrix((temp_dir() / "missing.csv").string()),
                    wsc::IoError);

    const auto ragged = temp_dir() / "ragged.csv";
    spit(ragged, "1,2,3\n4,5\n");
    CHECK_THROWS_AS(wsc::io::read_matrix(ragged.string()), wsc::IoError);

    const auto nonnum = temp_dir() / "nonnum.csv";
    spit(nonnum, "1,2\n3,abc\n");
    CHECK_THROWS_AS(wsc::io::read_matrix(nonnum.string()), wsc::IoError);

    const auto nonfinite = temp_dir() / "inf.csv";
    spit(nonfinite, "1,2\n3,inf\n");
    CHECK_THROWS_AS(wsc::io::read_matrix(nonfinite.string()), wsc::IoError);

    const auto empty = temp_dir() / "empty.csv";
    spit(empty, "");
    CHECK_THROWS_AS(wsc::io::read_matrix(empty.string()), wsc::IoError);
}

TEST_CASE("cli denoise matches the library and reports canonically") {
    wsc::GenerativeConfig cfg;
    cfg.p = 70;
    cfg.n = 140;
    cfg.m = 280;
    cfg.spikes.push_back({6.0, wsc::DWeightKind::Identity});
    cfg.cov.kind = wsc::CovarianceSpec::Kind::LinSpaced;
    cfg.cov.kappa = 4.0;
    cfg.seed = 2024;
    const auto inst = wsc::generate(cfg);

    const auto ypath = temp_dir() / "y.csv";
    const auto rpath = temp_dir() / "r.csv";
    const auto xpath = temp_dir() / "xhat.csv";
    const auto repo = temp_dir() / "report.json";
    wsc::io::write_matrix(ypath.string(), inst.Y);
    wsc::io::write_matrix(rpath.string(), inst.R_noise);

    const int code = run_cli("denoise --input " + ypath.string() + " --noise " +
                             rpath.string() + " --out " + xpath.string() +
                             " --report " + repo.string());
    CHECK(code == 0);

    wsc::DenoiseInput in;
    in.Y = inst.Y;
    in.R_noise = inst.R_noise;
    const auto rep = wsc::denoise(in);
    const MatrixXd xhat = wsc::io::read_matrix(xpath.string());
    CHECK(xhat == rep.X_hat);  // same code path, identical bits

    const std::string raw = slurp(repo);
    const auto doc = nlohmann::json::parse(raw);
    CHECK(doc.at("rank_hat").get<int>() == rep.rank_hat);
    CHECK(doc.at("amse_hat").get<double>() == rep.amse_hat);
    CHECK(doc.at("spikes").size() == rep.spikes.size());
    CHECK(doc.at("spikes")[0].at("sigma_hat").get<double>() ==
          rep.spikes[0].sigma_hat);
    // canonical form: parse and re-serialize reproduces the bytes
    CHECK(doc.dump(2) + "\n" == raw);

    // a second run reproduces the report byte for byte
    const int again = run_cli("denoise --input " + ypath.string() +
                              " --noise " + rpath.string() + " --out " +
                              xpath.string() + " --report " + repo.string());
    CHECK(again == 0);
    CHECK(slurp(repo) == raw);
}

TEST_CASE("cli exit codes") {
    const auto ypath = temp_dir() / "y.csv";  // written by the previous case
    const auto rpath = temp_dir() / "r.csv";
    const auto sink = (temp_dir() / "sink.csv").string();
    const auto sinkrep = (temp_dir() / "sink.json").string();

    SUBCASE("missing file is an io error") {
        CHECK(run_cli("denoise --input /nonexistent.csv --noise " +
                      rpath.string() + " --out " + sink + " --report " +
                      sinkrep) == 2);
    }
    SUBCASE("row mismatch is a dimension error") {
        const auto bad = temp_dir() / "bad_rows.csv";
        wsc::io::write_matrix(bad.string(), MatrixXd::Random(5, 300));
        CHECK(run_cli("denoise --input " + ypath.string() + " --noise " +
                      bad.string() + " --out " + sink + " --report " +
                      sinkrep) == 4);
    }
    SUBCASE("too few noise columns is a conditioning error") {
        const auto thin = temp_dir() / "thin.csv";
        wsc::io::write_matrix(thin.string(), MatrixXd::Random(70, 60));
        CHECK(run_cli("denoise --input " + ypath.string() + " --noise " +
                      thin.string() + " --out " + sink + " --report " +
                      sinkrep) == 3);
    }
    SUBCASE("spectral function inside the bulk is a domain error") {
        CHECK(run_cli("spectral --gamma 0.6666666666666666 --beta 0.25 "
                      "--fn psi --from 1.0 --points 1") == 5);
    }
    SUBCASE("unknown spectral function is a usage error") {
        CHECK(run_cli("spectral --gamma 0.5 --beta 0.25 --fn nope --from 9 "
                      "--points 1") == 2);
    }
    SUBCASE("bad epsilon is a usage error") {
        CHECK(run_cli("denoise --input " + ypath.string() + " --noise " +
                      rpath.string() + " --out " + sink + " --report " +
                      sinkrep + " --epsilon -1") == 2);
    }
}

TEST_CASE("cli spectral prints oracle values") {
    CHECK(run_cli("spectral --gamma 0.6666666666666666 --beta 0.25 "
                  "--fn sigma_thresh") == 0);
    CHECK(slurp(temp_dir() / "stdout.txt") ==
          "sigma_thresh,1.2198499381942784\n");

    CHECK(run_cli("spectral --gamma 0.6666666666666666 --beta 0.25 --fn sbar "
                  "--from 6.809343801468028 --points 1") == 0);
    CHECK(slurp(temp_dir() / "stdout.txt") ==
          "6.8093438014680281,-0.20587664459983956\n");
}

TEST_CASE("cli simulate runs a tiny study reproducibly") {
    const auto cfgpath = temp_dir() / "study.json";
    spit(cfgpath, R"({
  "study": "convergence",
  "gamma": 0.6666666666666666,
  "beta": 0.25,
  "sigma_mult": 1.8,
  "seed": 31337,
  "points": [{"p": 120, "noise": "gaussian", "trials": 4}]
})");
    const auto out = temp_dir() / "study.csv";
    CHECK(run_cli("simulate --config " + cfgpath.string() + " --out " +
                  out.string()) == 0);
    const std::string first = slurp(out);
    CHECK(first.rfind("p,noise,metric,mean,stderr,n_trials\n", 0) == 0);
    CHECK(fs::exists(out.string() + ".manifest.json"));

    CHECK(run_cli("simulate --config " + cfgpath.string() + " --out " +
                  out.string() + " --threads 2") == 0);
    CHECK(slurp(out) == first);  // thread count cannot change the bytes

    SUBCASE("unknown study key is a usage error") {
        spit(cfgpath, R"({"study": "nope"})");
        CHECK(run_cli("simulate --config " + cfgpath.string() + " --out " +
                      out.string()) == 2);
    }
    SUBCASE("malformed json is an io error") {
        spit(cfgpath, "{oops");
        CHECK(run_cli("simulate --config " + cfgpath.string() + " --out " +
                      out.string()) == 2);
    }
}
