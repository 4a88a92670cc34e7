// Copyright 2026 The fockwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file bench.hpp
 * Scaling benchmark over the cutoff for the fill strategies.
 *
 * CSV columns (frozen):
 *   strategy,M,C,pivots,amplitudes,peak_bytes,wall_seconds,executed
 * `executed` is 0 when the row was counted rather than run (naive density
 * fills above the cell cap); wall_seconds is then 0.
 */
#pragma once

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "conditional.hpp"
#include "gaussian.hpp"
#include "gbs.hpp"
#include "vanilla.hpp"

namespace fockwalk {

enum class Strategy { StateVector, NaiveDensity, Alg1, Alg1Buffered, Alg2 };

inline const char *to_string(Strategy s) {
    switch (s) {
    case Strategy::StateVector:
        return "statevec";
    case Strategy::NaiveDensity:
        return "naive_dm";
    case Strategy::Alg1:
        return "alg1";
    case Strategy::Alg1Buffered:
        return "alg1_buffered";
    case Strategy::Alg2:
        return "alg2";
    }
    return "?";
}

inline Strategy strategy_from_string(const std::string &s) {
    for (Strategy t : {Strategy::StateVector, Strategy::NaiveDensity, Strategy::Alg1,
                       Strategy::Alg1Buffered, Strategy::Alg2}) {
        if (s == to_string(t)) {
            return t;
        }
    }
    throw ValidationError("unknown strategy '" + s + "'");
}

struct BenchRow {
    Strategy strategy = Strategy::Alg1;
    int M = 0;
    int C = 0;
    std::size_t pivots = 0;
    std::size_t amplitudes = 0;
    std::size_t peak_bytes = 0;
    double wall_seconds = 0.0;
    bool executed = true;
};

struct BenchOptions {
    int threads = 1;
    std::uint64_t seed = 7;
    /// Naive density fills with more cells than this are counted, not run.
    std::size_t naive_cell_cap = std::size_t{1} << 22;
};

/// Squeezed inputs, Haar interferometer, small displacement. Lossy unless
/// `lossless`. Seeded by (seed, M) so every C sees the same circuit.
inline CircuitSpec bench_circuit(int M, int C, bool lossless, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(M));
    CircuitSpec s = CircuitSpec::vacuum(M, C);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto &sq : s.squeeze_params) {
        sq = {0.2 + 0.2 * u(rng), 2.0 * M_PI * u(rng)};
    }
    s.interferometer = haar_unitary(M, rng);
    for (auto &a : s.displacements) {
        a = std::polar(0.1, 2.0 * M_PI * u(rng));
    }
    if (!lossless) {
        for (double &eta : s.loss_transmissivity) {
            eta = 0.8 + 0.15 * u(rng);
        }
    }
    return s;
}

inline BenchRow bench_one(Strategy st, int M, int C, const BenchOptions &opt = {}) {
    BenchRow row;
    row.strategy = st;
    row.M = M;
    row.C = C;
    const auto t0 = std::chrono::steady_clock::now();
    switch (st) {
    case Strategy::StateVector: {
        const GaussianData psi =
            to_statevector_params(build_complex_state(bench_circuit(M, C, true, opt.seed)));
        FillOptions fo;
        fo.threads = opt.threads;
        const FillResult r = fill_full(psi, CutoffSpec::local(std::vector<int>(M, C)), fo);
        row.pivots = r.pivots_applied;
        row.amplitudes = r.amplitudes_written;
        row.peak_bytes = r.tensor.cells() * kBytesPerAmplitude;
        break;
    }
    case Strategy::NaiveDensity: {
        const std::vector<int> ext(2 * static_cast<std::size_t>(M), C);
        const std::size_t cells = shape_size(ext);
        row.amplitudes = cells;
        row.peak_bytes = cells * kBytesPerAmplitude;
        if (cells > opt.naive_cell_cap) {
            row.pivots = count_full_fill_pivots(ext, false);
            row.executed = false;
            return row;
        }
        const GaussianData rho =
            to_density_params(build_complex_state(bench_circuit(M, C, false, opt.seed)));
        FillOptions fo;
        fo.threads = opt.threads;
        const FillResult r = fill_full(rho, CutoffSpec::local(std::vector<int>(M, C)), fo);
        row.pivots = r.pivots_applied;
        row.amplitudes = r.amplitudes_written;
        break;
    }
    case Strategy::Alg1:
    case Strategy::Alg1Buffered: {
        const GaussianData rho =
            to_density_params(build_complex_state(bench_circuit(M, C, false, opt.seed)));
        GbsOptions go;
        go.threads = opt.threads;
        go.buffered = st == Strategy::Alg1Buffered;
        const GbsResult r = run_gbs(rho, std::vector<int>(M, C), go);
        row.pivots = r.counters.pivots();
        row.amplitudes = r.counters.amplitudes_written();
        row.peak_bytes = r.counters.peak_bytes();
        break;
    }
    case Strategy::Alg2: {
        if (M < 2) {
            throw ValidationError("alg2 needs at least two modes");
        }
        const GaussianData rho =
            to_density_params(build_complex_state(bench_circuit(M, C, false, opt.seed)));
        ConditionalOptions co;
        co.threads = opt.threads;
        co.validate = false;
        const ConditionalBatch r =
            run_conditional(rho, std::vector<int>(M, C), {M - 1}, co);
        row.pivots = r.counters.fine_pivots();
        row.amplitudes = r.counters.amplitudes_written();
        row.peak_bytes = r.counters.peak_bytes();
        break;
    }
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    row.wall_seconds = dt.count();
    return row;
}

inline std::vector<BenchRow> run_bench(const std::vector<Strategy> &strategies, int M,
                                       const std::vector<int> &cutoffs,
                                       const BenchOptions &opt = {}) {
    std::vector<BenchRow> rows;
    for (Strategy s : strategies) {
        for (int C : cutoffs) {
            rows.push_back(bench_one(s, M, C, opt));
        }
    }
    return rows;
}

inline void write_bench_csv(std::ostream &os, const std::vector<BenchRow> &rows) {
    os << "strategy,M,C,pivots,amplitudes,peak_bytes,wall_seconds,executed\n";
    for (const BenchRow &r : rows) {
        os << to_string(r.strategy) << ',' << r.M << ',' << r.C << ',' << r.pivots << ','
           << r.amplitudes << ',' << r.peak_bytes << ',' << r.wall_seconds << ','
           << (r.executed ? 1 : 0) << '\n';
    }
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("slope fit needs at least two matching points");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Pivot-count slope of one strategy's rows.
inline double pivot_slope(const std::vector<BenchRow> &rows, Strategy s) {
    std::vector<double> x;
    std::vector<double> y;
    for (const BenchRow &r : rows) {
        if (r.strategy == s) {
            x.push_back(r.C);
            y.push_back(static_cast<double>(r.pivots));
        }
    }
    return loglog_slope(x, y);
}

} // namespace fockwalk
