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
// JSON wire formats. Matrices travel as
//   {"rows": m, "cols": n, "re": [...], "im": [...]}
// with both coefficient arrays in row-major order.

#ifndef LSMIMO_IO_HPP
#define LSMIMO_IO_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "largesys.hpp"
#include "matcore.hpp"
#include "mcsim.hpp"
#include "optimize.hpp"

namespace lsmimo {

using Json = nlohmann::json;

inline Json matrix_to_json(const CMatrix& a) {
    Json j;
    j["rows"] = a.rows();
    j["cols"] = a.cols();
    Json re = Json::array();
    Json im = Json::array();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k) {
            re.push_back(a(i, k).real());
            im.push_back(a(i, k).imag());
        }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

inline CMatrix matrix_from_json(const Json& j) {
    if (!j.contains("rows") || !j.contains("cols") || !j.contains("re"))
        throw DomainError("matrix_from_json: need rows, cols and re fields");
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    if (rows < 0 || cols < 0) throw DomainError("matrix_from_json: negative dimensions");
    const auto& re = j.at("re");
    const bool has_im = j.contains("im");
    if (static_cast<Index>(re.size()) != rows * cols ||
        (has_im && static_cast<Index>(j.at("im").size()) != rows * cols))
        throw DimensionError("matrix_from_json: coefficient count does not match rows*cols");
    CMatrix a(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k) {
            const std::size_t flat = static_cast<std::size_t>(i * cols + k);
            const double real = re.at(flat).get<double>();
            const double imag = has_im ? j.at("im").at(flat).get<double>() : 0.0;
            a(i, k) = Complex(real, imag);
        }
    if (!a.allFinite()) throw DomainError("matrix_from_json: entries must be finite");
    return a;
}

inline CMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("load_matrix: cannot open " + path);
    Json j;
    in >> j;
    return matrix_from_json(j);
}

inline void save_matrix(const std::string& path, const CMatrix& a) {
    std::ofstream out(path);
    if (!out) throw DomainError("save_matrix: cannot open " + path);
    out << matrix_to_json(a).dump(2) << "\n";
}

inline Json estimate_to_json(const McEstimate& e) {
    return Json{{"mean", e.mean},
                {"std_error", e.std_error},
                {"n", e.n},
                {"seed", e.seed}};
}

inline Json fixed_point_to_json(const FixedPointSolution& fp) {
    return Json{{"delta", fp.delta},
                {"delta_tilde", fp.delta_tilde},
                {"gamma", fp.gamma},
                {"gamma_tilde", fp.gamma_tilde},
                {"stability", fp.stability},
                {"residual", fp.residual},
                {"iterations", fp.iterations},
                {"sigma2", fp.sigma2},
                {"t", fp.t},
                {"r", fp.r}};
}

inline Json optim_result_to_json(const OptimResult& res) {
    Json trace = Json::array();
    for (const TraceEntry& e : res.trace)
        trace.push_back(Json{{"iteration", e.iteration},
                             {"objective", e.objective},
                             {"gradient_norm", e.gradient_norm},
                             {"projected", e.projected}});
    Json lambda = Json::array();
    for (Index j = 0; j < res.lambda_opt.size(); ++j) lambda.push_back(res.lambda_opt(j));
    return Json{{"lambda_opt", std::move(lambda)},
                {"objective_nats", res.objective},
                {"converged", res.converged},
                {"iterations", res.iterations},
                {"trace", std::move(trace)}};
}

/// Raw per-realization record: one CSV row per channel draw with the
/// per-stream SINRs and the realized mutual information.
inline void save_sinr_samples_csv(const std::string& path, const ChannelModel& model,
                                  const CMatrix& k, std::int64_t n, std::uint64_t seed,
                                  int workers = 0) {
    const Eigen::MatrixXd beta = sinr_samples(model, k, n, seed, workers);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("save_sinr_samples_csv: cannot open " + path);
    out << "# lsmimo sinr samples | seed=" << seed << " n=" << n << "\n";
    out << "realization";
    for (Index j = 0; j < beta.cols(); ++j) out << ",beta_" << j + 1;
    out << ",emi_nats\n";
    char buf[40];
    for (Index i = 0; i < beta.rows(); ++i) {
        out << i;
        double emi = 0.0;
        for (Index j = 0; j < beta.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.12g", beta(i, j));
            out << "," << buf;
            emi += std::log1p(beta(i, j));
        }
        std::snprintf(buf, sizeof(buf), "%.12g", emi);
        out << "," << buf << "\n";
    }
}

inline Json antenna_selection_to_json(const AntennaSelection& sel) {
    Json per_s = Json::array();
    for (std::size_t i = 0; i < sel.per_s.size(); ++i)
        per_s.push_back(Json{{"s", i + 1}, {"objective_nats", sel.per_s[i]}});
    return Json{{"s_opt", sel.s_opt},
                {"objective_nats", sel.objective_nats},
                {"objective_bits", sel.objective_nats / std::log(2.0)},
                {"per_s", std::move(per_s)}};
}

}  // namespace lsmimo

#endif  // LSMIMO_IO_HPP
