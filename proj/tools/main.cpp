// SPDX-License-Identifier: Apache-2.0
//
// lsmimo: large-system analysis and precoder design for MIMO systems
// with MMSE receivers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Command-line front end. Exit codes: 0 success, 1 usage error, 2 numerical
// failure, 3 self-test failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lsmimo/lsmimo.hpp>

namespace {

using namespace lsmimo;

/// Thrown for malformed invocations; maps to exit code 1.
struct UsageFailure {
    std::string message;
};

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_mc;
    std::optional<long> t;
    std::optional<long> r;
    std::optional<double> snr_db;
    std::optional<double> sigma2;
    std::string ct_path;
    std::string cr_path;
    std::string out_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment configuration file");
    cmd->add_option("--seed", flags.seed, "base seed of every random stream");
    cmd->add_option("--n-mc", flags.n_mc, "Monte Carlo realizations");
    cmd->add_option("--t", flags.t, "transmit antennas");
    cmd->add_option("--r", flags.r, "receive antennas");
    cmd->add_option("--snr-db", flags.snr_db, "SNR in dB (sigma^2 = 10^(-SNR/10))");
    cmd->add_option("--sigma2", flags.sigma2, "noise variance (overrides --snr-db)");
    cmd->add_option("--ct", flags.ct_path, "transmit correlation matrix (JSON)");
    cmd->add_option("--cr", flags.cr_path, "receive correlation matrix (JSON)");
    cmd->add_option("--out", flags.out_path, "output file (default: stdout)");
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageFailure{"cannot open config file " + path};
    Json j;
    try {
        in >> j;
        return config_from_json(j);
    } catch (const Json::exception& e) {
        throw UsageFailure{"invalid config file " + path + ": " + e.what()};
    } catch (const DomainError& e) {
        throw UsageFailure{"invalid config file " + path + ": " + e.what()};
    }
}

ExperimentConfig resolve_config(const CommonFlags& flags) {
    ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path);
    if (flags.t) cfg.t = *flags.t;
    if (flags.r) cfg.r = *flags.r;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.n_mc) cfg.n_mc = *flags.n_mc;
    if (flags.snr_db) cfg.snr_grid_db = {*flags.snr_db};
    if (!flags.ct_path.empty()) {
        cfg.transmit.clustered = false;
        cfg.transmit.explicit_matrix = load_matrix(flags.ct_path);
        cfg.t = cfg.transmit.explicit_matrix.rows();
    }
    if (!flags.cr_path.empty()) {
        cfg.receive.clustered = false;
        cfg.receive.explicit_matrix = load_matrix(flags.cr_path);
        cfg.r = cfg.receive.explicit_matrix.rows();
    }
    validate_config(cfg);
    return cfg;
}

double resolve_sigma2(const CommonFlags& flags, const ExperimentConfig& cfg) {
    if (flags.sigma2) {
        if (!(*flags.sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
        return *flags.sigma2;
    }
    return snr_db_to_sigma2(cfg.snr_grid_db.front());
}

void emit(const CommonFlags& flags, const Json& payload) {
    if (flags.out_path.empty()) {
        std::cout << payload.dump(2) << "\n";
        return;
    }
    std::ofstream out(flags.out_path);
    if (!out) throw DomainError("cannot open output file " + flags.out_path);
    out << payload.dump(2) << "\n";
}

int run_fixed_point(const CommonFlags& flags) {
    const ExperimentConfig cfg = resolve_config(flags);
    const double sigma2 = resolve_sigma2(flags, cfg);
    const ChannelModel model = build_model(cfg, sigma2);
    const FixedPointSolution fp = solve_fixed_point(model.c_t, model.c_r, sigma2);
    Json out = fixed_point_to_json(fp);
    out["snr_db"] = -10.0 * std::log10(sigma2) + 0.0;  // normalize -0
    emit(flags, out);
    return 0;
}

int run_emi(const CommonFlags& flags, const std::string& lambda_csv,
            const std::string& samples_path) {
    const ExperimentConfig cfg = resolve_config(flags);
    const double sigma2 = resolve_sigma2(flags, cfg);
    const ChannelModel model = build_model(cfg, sigma2);

    CMatrix k = CMatrix::Identity(cfg.t, cfg.t);
    if (!lambda_csv.empty()) {
        std::vector<double> entries;
        std::stringstream ss(lambda_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                entries.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw UsageFailure{"--lambda expects comma-separated numbers, got '" + item + "'"};
            }
        }
        RVector lambda = Eigen::Map<RVector>(entries.data(), entries.size());
        k = assemble_precoder(model.c_t, lambda);
    }
    if (!samples_path.empty()) save_sinr_samples_csv(samples_path, model, k, cfg.n_mc, cfg.seed);
    const CMatrix c_eff = effective_transmit_correlation(model, k);
    const FixedPointSolution fp = solve_fixed_point(c_eff, model.c_r, sigma2);
    const ApproxReport rep = i_bar(fp);
    const McEstimate mc = emi_estimate(model, k, cfg.n_mc, cfg.seed);

    const double log2 = std::log(2.0);
    Json out;
    out["sigma2"] = sigma2;
    out["i_hat_nats"] = rep.i_hat;
    out["j_bar_nats"] = rep.j_bar;
    out["i_bar_nats"] = rep.i_bar;
    out["i_hat_bits"] = rep.i_hat / log2;
    out["j_bar_bits"] = rep.j_bar / log2;
    out["i_bar_bits"] = rep.i_bar / log2;
    out["i_mc"] = estimate_to_json(mc);
    emit(flags, out);
    return 0;
}

int run_optimize(const CommonFlags& flags, const std::string& objective, int random_starts) {
    const ExperimentConfig cfg = resolve_config(flags);
    const double sigma2 = resolve_sigma2(flags, cfg);
    const ChannelModel model = build_model(cfg, sigma2);

    if (objective == "true-structured" || objective == "true-general") {
        const TrueEmiResult res =
            optimize_true_emi(model, objective == "true-structured", cfg.n_mc, cfg.seed);
        Json out;
        out["objective_nats"] = res.objective;
        out["converged"] = res.converged;
        out["iterations"] = res.iterations;
        out["high_variance"] = res.high_variance;
        out["k_opt"] = matrix_to_json(res.k_opt);
        if (res.lambda_opt.size()) {
            Json lambda = Json::array();
            for (Index j = 0; j < res.lambda_opt.size(); ++j) lambda.push_back(res.lambda_opt(j));
            out["lambda_opt"] = lambda;
        }
        emit(flags, out);
        return 0;
    }

    PgOptions pg;
    pg.with_correction = objective != "ihat";
    const HermitianEig eig_t = herm_eig(model.c_t);
    const HermitianEig eig_r = herm_eig(model.c_r);
    const OptimResult res =
        projected_gradient_multistart(eig_t.eigenvalues.cwiseMax(0.0),
                                      eig_r.eigenvalues.cwiseMax(0.0), sigma2, pg,
                                      random_starts, cfg.seed);
    Json out = optim_result_to_json(res);
    out["objective"] = objective;
    out["precoder"] = matrix_to_json(assemble_precoder(model.c_t, res.lambda_opt));
    emit(flags, out);
    return 0;
}

int run_select_antennas(const CommonFlags& flags) {
    const ExperimentConfig cfg = resolve_config(flags);
    const double sigma2 = resolve_sigma2(flags, cfg);
    const AntennaSelection sel = antenna_selection_iid(static_cast<int>(cfg.t), sigma2);
    Json out = antenna_selection_to_json(sel);
    out["t"] = cfg.t;
    out["sigma2"] = sigma2;
    emit(flags, out);
    return 0;
}

int run_figure_cmd(const CommonFlags& flags, int id) {
    if (id < 1 || id > 5) throw UsageFailure{"--id must be in 1..5, got " + std::to_string(id)};
    ExperimentConfig cfg = figure_default_config(id);
    if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path);
    if (flags.t) cfg.t = *flags.t;
    if (flags.r) cfg.r = *flags.r;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.n_mc) cfg.n_mc = *flags.n_mc;
    if (flags.snr_db) cfg.snr_grid_db = {*flags.snr_db};
    const std::string out_path =
        flags.out_path.empty() ? ("figure" + std::to_string(id) + ".csv") : flags.out_path;
    run_figure(id, cfg, out_path);
    std::cout << out_path << "\n";
    return 0;
}

int run_timing_cmd(const CommonFlags& flags) {
    ExperimentConfig cfg;
    cfg.t = cfg.r = 4;
    cfg.transmit = {true, 3.14159265358979323846 / 4.0, 0.5, {}};
    cfg.receive = {true, 3.14159265358979323846 / 12.0, 0.4, {}};
    cfg.snr_grid_db = {10.0};
    if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.n_mc) cfg.n_mc = *flags.n_mc;
    emit(flags, run_timing(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"large-system analysis and precoder design for MIMO MMSE receivers"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string optimize_objective = "ibar";
    int random_starts = 3;
    int figure_id = 0;

    CLI::App* fixed_point = app.add_subcommand("fixed-point", "solve the deterministic equivalents");
    add_common_flags(fixed_point, flags);

    CLI::App* emi = app.add_subcommand("emi", "approximations and Monte Carlo mutual information");
    add_common_flags(emi, flags);
    std::string lambda_csv;
    std::string samples_path;
    emi->add_option("--lambda", lambda_csv, "comma-separated structured allocation");
    emi->add_option("--samples-out", samples_path, "write raw per-realization SINR samples as CSV");

    CLI::App* optimize = app.add_subcommand("optimize", "precoder optimization");
    add_common_flags(optimize, flags);
    optimize->add_option("--objective", optimize_objective,
                         "ibar | ihat | true-structured | true-general");
    optimize->add_option("--random-starts", random_starts, "extra random multi-start points");

    CLI::App* select = app.add_subcommand("select-antennas", "closed-form i.i.d. antenna selection");
    add_common_flags(select, flags);

    CLI::App* figure = app.add_subcommand("figure", "write one experiment sweep as CSV");
    add_common_flags(figure, flags);
    figure->add_option("--id", figure_id, "figure id in 1..5")->required();

    CLI::App* timing = app.add_subcommand("timing", "wall-clock comparison of the optimizers");
    add_common_flags(timing, flags);

    app.add_subcommand("selftest", "run the seeded property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fixed_point->parsed()) return run_fixed_point(flags);
        if (emi->parsed()) return run_emi(flags, lambda_csv, samples_path);
        if (optimize->parsed()) return run_optimize(flags, optimize_objective, random_starts);
        if (select->parsed()) return run_select_antennas(flags);
        if (figure->parsed()) return run_figure_cmd(flags, figure_id);
        if (timing->parsed()) return run_timing_cmd(flags);
        // selftest
        const SelftestReport report = lsmimo::selftest(&std::cout);
        if (!report.all_pass) {
            std::cerr << "selftest: " << report.checks.size() << " checks, at least one failed\n";
            return 3;
        }
        std::cout << "selftest: all " << report.checks.size() << " checks passed\n";
        return 0;
    } catch (const UsageFailure& e) {
        std::cerr << "usage error: " << e.message << "\n";
        return 1;
    } catch (const lsmimo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
