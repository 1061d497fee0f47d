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
// Experiment driver behind the CLI: canned figure sweeps written as CSV,
// a timing comparison of the optimization routes, and a seeded self-test of
// the library's key identities. Every CSV starts with a comment line that
// pins the configuration hash and the seed, and reruns with the same
// configuration are byte-identical.

#ifndef LSMIMO_EXPERIMENTS_HPP
#define LSMIMO_EXPERIMENTS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "io.hpp"

namespace lsmimo {

enum class Scheme {
    none,
    ibar_structured,
    ihat_structured,
    true_structured,
    true_general,
    antenna_selection,
};

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::none: return "none";
        case Scheme::ibar_structured: return "ibar_structured";
        case Scheme::ihat_structured: return "ihat_structured";
        case Scheme::true_structured: return "true_structured";
        case Scheme::true_general: return "true_general";
        case Scheme::antenna_selection: return "antenna_selection";
    }
    return "none";
}

inline Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::none, Scheme::ibar_structured, Scheme::ihat_structured,
                     Scheme::true_structured, Scheme::true_general, Scheme::antenna_selection})
        if (scheme_name(s) == name) return s;
    throw DomainError("unknown scheme: " + name);
}

/// One side of the correlation configuration: a clustered-scatterer spec, an
/// explicit matrix, or (the default) no correlation at all.
struct SideConfig {
    bool clustered = false;
    double mean_angle = 0.0;
    double angle_std = 0.0;
    CMatrix explicit_matrix;  // empty and !clustered means identity
};

struct ExperimentConfig {
    Index t = 4;
    Index r = 4;
    std::vector<double> snr_grid_db = {0.0, 5.0, 10.0, 15.0};
    SideConfig transmit;
    SideConfig receive;
    std::int64_t n_mc = 1000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::none;
    std::vector<Scheme> timing_schemes = {Scheme::ibar_structured, Scheme::ihat_structured,
                                          Scheme::true_structured};
};

/// SNR in dB maps to sigma^2 = 10^(-SNR/10); signal and channel power are
/// unit-normalized so this is the only free definition.
inline double snr_db_to_sigma2(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

inline Json side_to_json(const SideConfig& side) {
    if (side.clustered)
        return Json{{"cluster", Json{{"mean_angle", side.mean_angle},
                                     {"angle_std", side.angle_std}}}};
    if (side.explicit_matrix.size() == 0) return Json{{"identity", true}};
    return Json{{"matrix", matrix_to_json(side.explicit_matrix)}};
}

inline SideConfig side_from_json(const Json& j) {
    SideConfig side;
    if (j.contains("cluster")) {
        side.clustered = true;
        side.mean_angle = j.at("cluster").at("mean_angle").get<double>();
        side.angle_std = j.at("cluster").at("angle_std").get<double>();
    } else if (j.contains("matrix")) {
        side.explicit_matrix = matrix_from_json(j.at("matrix"));
    } else if (!j.contains("identity")) {
        throw DomainError("correlation side needs a cluster, matrix or identity entry");
    }
    return side;
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.t < 1 || cfg.r < 1) throw DomainError("config: antenna counts must be >= 1");
    if (cfg.snr_grid_db.empty()) throw DomainError("config: snr_grid_db must be nonempty");
    if (cfg.n_mc < 2) throw DomainError("config: n_mc must be >= 2");
}

inline Json config_to_json(const ExperimentConfig& cfg) {
    Json schemes = Json::array();
    for (Scheme s : cfg.timing_schemes) schemes.push_back(scheme_name(s));
    return Json{{"t", cfg.t},
                {"r", cfg.r},
                {"snr_grid_db", cfg.snr_grid_db},
                {"correlation", Json{{"transmit", side_to_json(cfg.transmit)},
                                     {"receive", side_to_json(cfg.receive)}}},
                {"n_mc", cfg.n_mc},
                {"seed", cfg.seed},
                {"scheme", scheme_name(cfg.scheme)},
                {"timing_schemes", std::move(schemes)}};
}

inline ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig cfg;
    if (j.contains("t")) cfg.t = j.at("t").get<Index>();
    if (j.contains("r")) cfg.r = j.at("r").get<Index>();
    if (j.contains("snr_grid_db")) cfg.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    if (j.contains("correlation")) {
        const Json& c = j.at("correlation");
        if (c.contains("transmit")) cfg.transmit = side_from_json(c.at("transmit"));
        if (c.contains("receive")) cfg.receive = side_from_json(c.at("receive"));
    }
    if (j.contains("n_mc")) cfg.n_mc = j.at("n_mc").get<std::int64_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scheme")) cfg.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    if (j.contains("timing_schemes")) {
        cfg.timing_schemes.clear();
        for (const auto& name : j.at("timing_schemes"))
            cfg.timing_schemes.push_back(scheme_from_name(name.get<std::string>()));
    }
    validate_config(cfg);
    return cfg;
}

/// FNV-1a over the canonical JSON dump; pins a configuration in CSV headers.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline CMatrix side_matrix(const SideConfig& side, Index n) {
    if (side.clustered) return clustered_correlation({side.mean_angle, side.angle_std, n});
    if (side.explicit_matrix.size() == 0) return CMatrix::Identity(n, n);
    return side.explicit_matrix;
}

}  // namespace detail

inline ChannelModel build_model(const ExperimentConfig& cfg, double sigma2) {
    return make_channel_model(detail::side_matrix(cfg.transmit, cfg.t),
                              detail::side_matrix(cfg.receive, cfg.r), sigma2);
}

namespace detail {

constexpr double kLog2 = 0.69314718055994530942;

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) {
        const std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        out_.open(path, std::ios::binary);  // binary keeps line endings stable
        if (!out_) throw DomainError("cannot open output file " + path);
    }

    void comment(const std::string& line) { out_ << "# " << line << "\n"; }

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i)
            out_ << (i ? "," : "") << names[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_value(values[i]);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

inline std::string hash_comment(const ExperimentConfig& cfg, int figure_id) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "lsmimo figure %d | config_hash=%016llx seed=%llu",
                  figure_id, static_cast<unsigned long long>(config_hash(cfg)),
                  static_cast<unsigned long long>(cfg.seed));
    return buf;
}

inline std::string format_snr_label(double snr_db) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", snr_db);
    std::string s = buf;
    for (char& c : s)
        if (c == '.' || c == '-') c = c == '.' ? 'p' : 'm';
    return s;
}

}  // namespace detail

/// Default parameters of the five canned experiment sweeps.
inline ExperimentConfig figure_default_config(int id) {
    ExperimentConfig cfg;
    const double pi = 3.14159265358979323846;
    switch (id) {
        case 1:
            cfg.t = cfg.r = 4;
            cfg.transmit = {true, pi / 4.0, 0.5, {}};
            cfg.receive = {true, pi / 12.0, 0.5, {}};
            cfg.snr_grid_db = {-5, 0, 5, 10, 15, 20};
            break;
        case 2:
            cfg.t = cfg.r = 4;
            cfg.transmit = {true, pi / 4.0, 0.5, {}};
            cfg.receive = {true, pi / 12.0, 0.4, {}};
            cfg.snr_grid_db = {0, 6};
            break;
        case 3:
            // i.i.d. channel: the default identity correlation on both sides
            cfg.t = cfg.r = 8;
            cfg.snr_grid_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
            break;
        case 4:
            cfg.t = cfg.r = 8;
            cfg.snr_grid_db = {15};
            break;
        case 5:
            cfg.t = cfg.r = 4;
            cfg.transmit = {true, pi / 4.0, 0.5, {}};
            cfg.receive = {true, pi / 12.0, 0.4, {}};
            cfg.snr_grid_db = {0, 5, 10, 15};
            break;
        default:
            throw DomainError("figure id must be in 1..5, got " + std::to_string(id));
    }
    return cfg;
}

namespace detail {

/// Accuracy of the approximations against Monte Carlo, one row per SNR.
inline void run_figure1(const ExperimentConfig& cfg, CsvWriter& csv) {
    csv.header({"snr_db", "i_mc_nats", "i_mc_stderr_nats", "i_hat_nats", "i_bar_nats",
                "i_mc_bits", "i_mc_stderr_bits", "i_hat_bits", "i_bar_bits"});
    for (double snr : cfg.snr_grid_db) {
        const double sigma2 = snr_db_to_sigma2(snr);
        const ChannelModel model = build_model(cfg, sigma2);
        const FixedPointSolution fp = solve_fixed_point(model.c_t, model.c_r, sigma2);
        const ApproxReport rep = i_bar(fp);
        const McEstimate mc =
            emi_estimate(model, CMatrix::Identity(cfg.t, cfg.t), cfg.n_mc, cfg.seed);
        csv.row({snr, mc.mean, mc.std_error, rep.i_hat, rep.i_bar, mc.mean / kLog2,
                 mc.std_error / kLog2, rep.i_hat / kLog2, rep.i_bar / kLog2});
    }
}

/// Relative error of both approximations versus the transmit angular spread,
/// one row per sigma_phi^2, one column pair per SNR grid entry.
inline void run_figure2(const ExperimentConfig& cfg, CsvWriter& csv) {
    std::vector<std::string> cols = {"sigma_phi_t_sq"};
    for (double snr : cfg.snr_grid_db) {
        const std::string label = format_snr_label(snr);
        cols.push_back("rel_err_i_hat_snr" + label + "db");
        cols.push_back("rel_err_i_bar_snr" + label + "db");
    }
    csv.header(cols);
    for (int step = 1; step <= 20; ++step) {
        const double spread_sq = 0.05 * step;
        std::vector<double> row = {spread_sq};
        for (double snr : cfg.snr_grid_db) {
            const double sigma2 = snr_db_to_sigma2(snr);
            ExperimentConfig local = cfg;
            local.transmit.angle_std = std::sqrt(spread_sq);
            const ChannelModel model = build_model(local, sigma2);
            const FixedPointSolution fp = solve_fixed_point(model.c_t, model.c_r, sigma2);
            const ApproxReport rep = i_bar(fp);
            const McEstimate mc =
                emi_estimate(model, CMatrix::Identity(cfg.t, cfg.t), cfg.n_mc, cfg.seed);
            row.push_back(std::abs(mc.mean - rep.i_hat) / mc.mean);
            row.push_back(std::abs(mc.mean - rep.i_bar) / mc.mean);
        }
        csv.row(row);
    }
}

inline RVector sparse_uniform_allocation(Index t, int s) {
    RVector lambda = RVector::Zero(t);
    for (int j = 0; j < s; ++j) lambda(j) = static_cast<double>(t) / static_cast<double>(s);
    return lambda;
}

/// Antenna-selection comparison for an i.i.d. channel: s = 3t/4 versus s = t
/// across SNR.
inline void run_figure3(const ExperimentConfig& cfg, CsvWriter& csv) {
    const int s_small = std::max(1, static_cast<int>((3 * cfg.t) / 4));
    const int s_full = static_cast<int>(cfg.t);
    const RVector ones_r = RVector::Ones(cfg.r);
    std::vector<std::string> cols = {"snr_db"};
    for (int s : {s_small, s_full}) {
        const std::string tag = "_s" + std::to_string(s);
        for (const char* base : {"i_hat", "i_bar", "i_mc", "i_mc_stderr"}) {
            cols.push_back(std::string(base) + tag + "_nats");
            cols.push_back(std::string(base) + tag + "_bits");
        }
    }
    csv.header(cols);
    for (double snr : cfg.snr_grid_db) {
        const double sigma2 = snr_db_to_sigma2(snr);
        const ChannelModel model = build_model(cfg, sigma2);
        std::vector<double> row = {snr};
        for (int s : {s_small, s_full}) {
            const RVector lambda = sparse_uniform_allocation(cfg.t, s);
            const double ihat_v = structured_objective(lambda, ones_r, sigma2, false);
            const double ibar_v = structured_objective(lambda, ones_r, sigma2, true);
            const CMatrix k = lambda.cwiseSqrt().cast<Complex>().asDiagonal();
            const McEstimate mc = emi_estimate(model, k, cfg.n_mc, cfg.seed);
            for (double v : {ihat_v, ibar_v, mc.mean, mc.std_error}) {
                row.push_back(v);
                row.push_back(v / kLog2);
            }
        }
        csv.row(row);
    }
}

/// Mutual information versus the number of active antennas at fixed SNR.
inline void run_figure4(const ExperimentConfig& cfg, CsvWriter& csv) {
    const double snr = cfg.snr_grid_db.front();
    const double sigma2 = snr_db_to_sigma2(snr);
    const ChannelModel model = build_model(cfg, sigma2);
    const RVector ones_r = RVector::Ones(cfg.r);
    csv.header({"s", "snr_db", "i_hat_nats", "i_bar_nats", "i_mc_nats", "i_mc_stderr_nats",
                "i_hat_bits", "i_bar_bits", "i_mc_bits", "i_mc_stderr_bits"});
    for (int s = 1; s <= cfg.t; ++s) {
        const RVector lambda = sparse_uniform_allocation(cfg.t, s);
        const double ihat_v = structured_objective(lambda, ones_r, sigma2, false);
        const double ibar_v = structured_objective(lambda, ones_r, sigma2, true);
        const CMatrix k = lambda.cwiseSqrt().cast<Complex>().asDiagonal();
        const McEstimate mc = emi_estimate(model, k, cfg.n_mc, cfg.seed);
        csv.row({static_cast<double>(s), snr, ihat_v, ibar_v, mc.mean, mc.std_error,
                 ihat_v / kLog2, ibar_v / kLog2, mc.mean / kLog2, mc.std_error / kLog2});
    }
}

/// Monte Carlo mutual information of the five precoding schemes across SNR.
inline void run_figure5(const ExperimentConfig& cfg, CsvWriter& csv) {
    std::vector<std::string> cols = {"snr_db"};
    for (const char* tag : {"none", "ibar_struct", "ihat_struct", "true_struct", "true_general"}) {
        cols.push_back(std::string("i_") + tag + "_nats");
        cols.push_back(std::string("i_") + tag + "_stderr_nats");
        cols.push_back(std::string("i_") + tag + "_bits");
        cols.push_back(std::string("i_") + tag + "_stderr_bits");
    }
    csv.header(cols);
    const std::uint64_t eval_seed = cfg.seed ^ 0xD1B54A32D192ED03ull;
    for (double snr : cfg.snr_grid_db) {
        const double sigma2 = snr_db_to_sigma2(snr);
        const ChannelModel model = build_model(cfg, sigma2);
        const HermitianEig eig_t = herm_eig(model.c_t);
        const HermitianEig eig_r = herm_eig(model.c_r);
        const RVector d = eig_t.eigenvalues.cwiseMax(0.0);
        const RVector cr = eig_r.eigenvalues.cwiseMax(0.0);

        std::vector<CMatrix> precoders;
        precoders.push_back(CMatrix::Identity(cfg.t, cfg.t));
        PgOptions pg;
        pg.with_correction = true;
        precoders.push_back(assemble_precoder(
            model.c_t,
            projected_gradient_multistart(d, cr, sigma2, pg, 3, cfg.seed).lambda_opt));
        pg.with_correction = false;
        precoders.push_back(assemble_precoder(
            model.c_t,
            projected_gradient_multistart(d, cr, sigma2, pg, 3, cfg.seed).lambda_opt));
        precoders.push_back(optimize_true_emi(model, true, cfg.n_mc, cfg.seed).k_opt);
        precoders.push_back(optimize_true_emi(model, false, cfg.n_mc, cfg.seed).k_opt);

        std::vector<double> row = {snr};
        for (const CMatrix& k : precoders) {
            const McEstimate mc = emi_estimate(model, k, cfg.n_mc, eval_seed);
            row.push_back(mc.mean);
            row.push_back(mc.std_error);
            row.push_back(mc.mean / kLog2);
            row.push_back(mc.std_error / kLog2);
        }
        csv.row(row);
    }
}

}  // namespace detail

/// Writes the CSV of figure `id` (1..5) to out_path; deterministic for a
/// fixed configuration.
inline std::string run_figure(int id, const ExperimentConfig& cfg, const std::string& out_path) {
    validate_config(cfg);
    if (id < 1 || id > 5) throw DomainError("figure id must be in 1..5, got " + std::to_string(id));
    detail::CsvWriter csv(out_path);
    csv.comment(detail::hash_comment(cfg, id));
    switch (id) {
        case 1: detail::run_figure1(cfg, csv); break;
        case 2: detail::run_figure2(cfg, csv); break;
        case 3: detail::run_figure3(cfg, csv); break;
        case 4: detail::run_figure4(cfg, csv); break;
        case 5: detail::run_figure5(cfg, csv); break;
    }
    return out_path;
}

/// Wall-clock comparison of the optimization routes at the configured size.
/// The surrogate routes are averaged over several repetitions because a
/// single run takes milliseconds.
inline Json run_timing(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const double sigma2 = snr_db_to_sigma2(cfg.snr_grid_db.front());
    const ChannelModel model = build_model(cfg, sigma2);
    const HermitianEig eig_t = herm_eig(model.c_t);
    const HermitianEig eig_r = herm_eig(model.c_r);
    const RVector d = eig_t.eigenvalues.cwiseMax(0.0);
    const RVector cr = eig_r.eigenvalues.cwiseMax(0.0);

    const auto stopwatch = [](const auto& fn, int reps) {
        const auto start = std::chrono::steady_clock::now();
        for (int i = 0; i < reps; ++i) fn();
        const auto stop = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(stop - start).count() / reps;
    };

    Json seconds = Json::object();
    for (Scheme s : cfg.timing_schemes) {
        switch (s) {
            case Scheme::ibar_structured: {
                PgOptions pg;
                pg.with_correction = true;
                seconds[scheme_name(s)] = stopwatch(
                    [&] { projected_gradient_multistart(d, cr, sigma2, pg, 0, cfg.seed); }, 5);
                break;
            }
            case Scheme::ihat_structured: {
                PgOptions pg;
                pg.with_correction = false;
                seconds[scheme_name(s)] = stopwatch(
                    [&] { projected_gradient_multistart(d, cr, sigma2, pg, 0, cfg.seed); }, 5);
                break;
            }
            case Scheme::true_structured:
                seconds[scheme_name(s)] = stopwatch(
                    [&] { optimize_true_emi(model, true, cfg.n_mc, cfg.seed); }, 1);
                break;
            case Scheme::true_general:
                seconds[scheme_name(s)] = stopwatch(
                    [&] { optimize_true_emi(model, false, cfg.n_mc, cfg.seed); }, 1);
                break;
            default:
                break;
        }
    }
    Json out;
    out["scheme_seconds"] = seconds;
    out["t"] = cfg.t;
    out["r"] = cfg.r;
    out["n_mc"] = cfg.n_mc;
    out["snr_db"] = cfg.snr_grid_db.front();
    std::ostringstream hw;
    hw << "wall-clock, " << std::thread::hardware_concurrency() << " hardware threads";
    out["hardware"] = hw.str();
    return out;
}

// --------------------------------------------------------------------------
// Self-test
// --------------------------------------------------------------------------

struct SelftestCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool all_pass = true;
};

namespace detail {

inline CMatrix random_psd(Index n, RngStream& rng) {
    const CMatrix m = sample_circular_gaussian(n, n, rng);
    return normalize_trace(hermitian_part(m * m.adjoint()) + 0.05 * CMatrix::Identity(n, n));
}

inline CMatrix random_boundary_precoder(Index t, RngStream& rng) {
    const CMatrix g = sample_circular_gaussian(t, t, rng);
    return g / std::sqrt(g.squaredNorm() / static_cast<double>(t));
}

inline void record(SelftestReport& report, std::ostream* log, const std::string& name, bool pass,
                   const std::string& detail) {
    report.checks.push_back({name, pass, detail});
    report.all_pass = report.all_pass && pass;
    if (log) *log << (pass ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : " | " + detail)
                  << "\n";
}

/// Root of sigma^2 x + (1/t) sum_j lambda_j x / (1 + lambda_j x) = 1, the
/// scalar equation behind the i.i.d. first-order objective. The left side is
/// increasing and concave, so Newton from below converges monotonically;
/// this route never touches the coupled two-variable solver.
inline double iid_scalar_root(const RVector& lambda, double sigma2, double warm) {
    const double t = static_cast<double>(lambda.size());
    double x = warm > 0.0 ? warm : 1.0 / sigma2;
    for (int it = 0; it < 100; ++it) {
        double h = sigma2 * x - 1.0;
        double hp = sigma2;
        for (Index j = 0; j < lambda.size(); ++j) {
            if (lambda(j) == 0.0) continue;
            const double w = 1.0 + lambda(j) * x;
            h += lambda(j) * x / (w * t);
            hp += lambda(j) / (w * w * t);
        }
        const double step = h / hp;
        x -= step;
        if (x < 0.0) x = 1e-12;
        if (std::abs(step) < 1e-15 * std::max(x, 1e-12)) break;
    }
    return x;
}

/// Brute-force maximum of the first-order objective over a dense grid of the
/// scaled simplex (u_j = lambda_j / t, sum u_j <= 1) for i.i.d. channels.
/// Exploits permutation symmetry by enumerating the sorted cone.
inline double iid_grid_maximum(int t, double sigma2, int resolution) {
    double best = 0.0;
    const double tn = static_cast<double>(t);
    double warm = 1.0 / sigma2;
    RVector lambda(t);
    const auto evaluate = [&]() {
        warm = iid_scalar_root(lambda, sigma2, warm);
        double obj = 0.0;
        for (int q = 0; q < t; ++q)
            if (lambda(q) > 0.0) obj += std::log1p(lambda(q) * warm);
        if (obj > best) best = obj;
    };
    if (t == 2) {
        for (int i = resolution; i >= 0; --i) {  // u1, descending cone
            for (int j = std::min(i, resolution - i); j >= 0; --j) {  // u2 <= u1
                lambda(0) = tn * i / resolution;
                lambda(1) = tn * j / resolution;
                evaluate();
            }
        }
        return best;
    }
    if (t == 3) {
        for (int i = resolution; i >= 0; --i)
            for (int j = std::min(i, resolution - i); j >= 0; --j)
                for (int k = std::min(j, resolution - i - j); k >= 0; --k) {
                    lambda(0) = tn * i / resolution;
                    lambda(1) = tn * j / resolution;
                    lambda(2) = tn * k / resolution;
                    evaluate();
                }
        return best;
    }
    throw DomainError("iid_grid_maximum implemented for t in {2, 3}");
}

}  // namespace detail

/// Seeded property suite over the library's key identities. Prints one line
/// per check to `log` when given; returns the full report.
inline SelftestReport selftest(std::ostream* log = nullptr) {
    SelftestReport report;
    const std::uint64_t seed = 0xC0FFEEull;

    {  // fixed-point residuals, positivity, trace identities, uniqueness
        bool pass = true;
        std::string detail;
        int case_index = 0;
        for (Index t : {2, 4, 8, 16}) {
            for (double sigma2 : {1e-3, 0.1, 1.0, 10.0}) {
                RngStream rng(seed, static_cast<std::uint64_t>(case_index++));
                const Index r = t;
                const CMatrix ct = detail::random_psd(t, rng);
                const CMatrix cr = detail::random_psd(r, rng);
                const FixedPointSolution fp = solve_fixed_point(ct, cr, sigma2);
                const double delta_check =
                    (ct * fp.t_t).trace().real() / static_cast<double>(t);
                const double dt_check =
                    (cr * fp.t_r).trace().real() / static_cast<double>(t);
                const bool ok = fp.residual < 1e-12 && fp.stability > 0.0 && fp.delta > 0.0 &&
                                fp.delta_tilde > 0.0 &&
                                std::abs(fp.delta - delta_check) <= 1e-10 * std::max(1.0, fp.delta) &&
                                std::abs(fp.delta_tilde - dt_check) <=
                                    1e-10 * std::max(1.0, fp.delta_tilde);
                // uniqueness probe: restart ten times farther away
                const HermitianEig et = herm_eig(ct);
                const HermitianEig er = herm_eig(cr);
                const double far = 10.0 * et.eigenvalues.sum() / (static_cast<double>(t) * sigma2);
                const ScalarFixedPoint again = solve_fixed_point_eigs(
                    et.eigenvalues.cwiseMax(0.0), er.eigenvalues.cwiseMax(0.0), sigma2, {}, &far);
                const bool unique =
                    std::abs(again.delta - fp.delta) <= 1e-10 * std::max(1.0, fp.delta);
                if (!(ok && unique)) {
                    pass = false;
                    detail = "t=" + std::to_string(t) + " sigma2=" + std::to_string(sigma2) +
                             " residual=" + std::to_string(fp.residual);
                }
            }
        }
        detail::record(report, log, "fixed_point_residuals", pass, detail);
    }

    {  // implicit-differentiation gradient versus central finite differences
        bool pass = true;
        std::string detail;
        int idx = 0;
        for (Index t : {2, 4, 8}) {
            for (int rep = 0; rep < 7; ++rep) {
                RngStream rng(seed + 1, static_cast<std::uint64_t>(idx++));
                RVector lambda(t), cr(t);
                for (Index j = 0; j < t; ++j) lambda(j) = 0.05 + 2.0 * rng.uniform();
                for (Index j = 0; j < t; ++j) cr(j) = 0.2 + 2.0 * rng.uniform();
                const double sigma2 = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
                const RVector g = grad_lambda(lambda, cr, sigma2);
                for (Index j = 0; j < t; ++j) {
                    const double h = 1e-6 * std::max(1.0, lambda(j));
                    RVector lp = lambda, lm = lambda;
                    lp(j) += h;
                    lm(j) -= h;
                    const double fd = (structured_objective(lp, cr, sigma2) -
                                       structured_objective(lm, cr, sigma2)) /
                                      (2.0 * h);
                    const double rel =
                        std::abs(fd - g(j)) / std::max({std::abs(fd), std::abs(g(j)), 1e-12});
                    if (rel > 1e-5) {
                        pass = false;
                        detail = "t=" + std::to_string(t) + " coord=" + std::to_string(j) +
                                 " rel=" + std::to_string(rel);
                    }
                }
            }
        }
        detail::record(report, log, "gradient_finite_difference", pass, detail);
    }

    {  // diagonalized precoder dominates in both approximation terms
        bool pass = true;
        std::string detail;
        for (int rep = 0; rep < 50; ++rep) {
            RngStream rng(seed + 2, static_cast<std::uint64_t>(rep));
            const Index t = 4;
            const CMatrix ct = detail::random_psd(t, rng);
            const CMatrix cr = detail::random_psd(t, rng);
            const CMatrix k = detail::random_boundary_precoder(t, rng);
            const double sigma2 = std::pow(10.0, -1.5 + 2.0 * rng.uniform());
            const DominancePair dom = prop3_dominance_check(k, ct, cr, sigma2);
            if (dom.i_hat_k > dom.i_hat_kd + 1e-10 || dom.j_bar_k > dom.j_bar_kd + 1e-10) {
                pass = false;
                detail = "rep=" + std::to_string(rep);
            }
        }
        detail::record(report, log, "diagonalization_dominance", pass, detail);
    }

    {  // general correction formula reduces to the closed form on diagonals
        bool pass = true;
        std::string detail;
        for (int rep = 0; rep < 20; ++rep) {
            RngStream rng(seed + 3, static_cast<std::uint64_t>(rep));
            const Index t = 4;
            RVector lambda(t);
            for (Index j = 0; j < t; ++j) lambda(j) = 2.0 * rng.uniform();
            const CMatrix cr = detail::random_psd(t, rng);
            const double sigma2 = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
            CMatrix lam_mat = CMatrix::Zero(t, t);
            lam_mat.diagonal() = lambda.cast<Complex>();
            const FixedPointSolution fp = solve_fixed_point(lam_mat, cr, sigma2);
            const double general = j_bar(fp);
            const double u = sigma2 * sigma2 * fp.gamma * fp.gamma_tilde;
            const double reduced = 0.5 * u / (1.0 - u);
            if (std::abs(general - reduced) > 1e-12 * std::max(1.0, reduced)) {
                pass = false;
                detail = "rep=" + std::to_string(rep) + " diff=" +
                         std::to_string(general - reduced);
            }
        }
        detail::record(report, log, "correction_dual_path", pass, detail);
    }

    {  // structured objective equals the full matrix route
        bool pass = true;
        std::string detail;
        for (int rep = 0; rep < 20; ++rep) {
            RngStream rng(seed + 4, static_cast<std::uint64_t>(rep));
            const Index t = 4;
            const CMatrix ct = detail::random_psd(t, rng);
            const CMatrix cr = detail::random_psd(t, rng);
            const HermitianEig eig = herm_eig(ct);
            RVector weights(t);
            for (Index j = 0; j < t; ++j) weights(j) = -std::log(std::max(rng.uniform(), 1e-300));
            weights /= weights.sum();
            RVector lambda(t);
            for (Index j = 0; j < t; ++j)
                lambda(j) = static_cast<double>(t) * weights(j) * eig.eigenvalues(j);
            const double sigma2 = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
            const double direct = problem1_objective(lambda, cr, sigma2);
            const CMatrix k = assemble_precoder(ct, lambda);
            const FixedPointSolution fp =
                solve_fixed_point(hermitian_part(k.adjoint() * ct * k), cr, sigma2);
            const double via_matrix = i_bar(fp).i_bar;
            if (std::abs(direct - via_matrix) > 1e-10 * std::max(1.0, std::abs(direct))) {
                pass = false;
                detail = "rep=" + std::to_string(rep) + " diff=" +
                         std::to_string(direct - via_matrix);
            }
        }
        detail::record(report, log, "structured_objective_identity", pass, detail);
    }

    {  // antenna-selection closed form against two brute-force routes
        bool pass = true;
        std::string detail;
        for (int t : {2, 3, 8}) {
            for (double sigma2 : {1.0, snr_db_to_sigma2(15.0)}) {
                const AntennaSelection sel = antenna_selection_iid(t, sigma2);
                const RVector ones = RVector::Ones(t);
                // route 1: evaluate every s-uniform candidate through the solver
                for (int s = 1; s <= t; ++s) {
                    const double via_solver = structured_objective(
                        detail::sparse_uniform_allocation(t, s), ones, sigma2, false);
                    if (std::abs(via_solver - sel.per_s[static_cast<std::size_t>(s - 1)]) >
                        1e-10 * std::max(1.0, via_solver)) {
                        pass = false;
                        detail = "solver route t=" + std::to_string(t) + " s=" + std::to_string(s);
                    }
                }
                // route 2: dense simplex grid at t = 2, 3
                if (t <= 3) {
                    const double grid = detail::iid_grid_maximum(t, sigma2, 1000);
                    if (grid > sel.objective_nats + 1e-9 ||
                        sel.objective_nats - grid > 1e-3) {
                        pass = false;
                        detail = "grid route t=" + std::to_string(t) +
                                 " gap=" + std::to_string(sel.objective_nats - grid);
                    }
                }
            }
        }
        detail::record(report, log, "antenna_selection_oracle", pass, detail);
    }

    return report;
}

}  // namespace lsmimo

#endif  // LSMIMO_EXPERIMENTS_HPP
