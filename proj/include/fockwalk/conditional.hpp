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
 * @file conditional.hpp
 * Unnormalized density matrices of the undetected modes, one per PNR pattern
 * on the detected modes. The trace of each block is the probability of its
 * pattern.
 *
 * Block layout: a block is indexed like the undetected part of the lattice,
 * [m_u1, n_u1, m_u2, n_u2, ...] for the undetected modes in ascending order,
 * row-major. As a matrix its rows are (m_u1, m_u2, ...) and its columns
 * (n_u1, n_u2, ...).
 */
#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gbs.hpp"
#include "selective.hpp"

namespace fockwalk {

struct ConditionalOptions {
    bool buffered = true;
    int threads = 1;
    bool with_grad = false;
    /// Check Hermiticity, positivity and total trace of the output.
    bool validate = true;
    double hermitian_tolerance = 1e-10;
    double eigenvalue_floor = -1e-9;
};

struct ConditionalBatch {
    std::vector<int> undetected; ///< 0-based, ascending
    std::vector<int> detected;   ///< 0-based, ascending
    std::vector<int> pattern_shape;
    std::vector<int> block_shape;
    std::size_t block_cells = 0;
    /// patterns x block_cells values, patterns row-major over `detected`.
    std::vector<cplx> blocks;
    std::vector<double> traces;
    /// with_grad only: patterns x block_cells bundles of width 1 + D + D^2,
    /// derivative components in the caller's (unpermuted) Fock order.
    std::optional<std::vector<cplx>> bundles;
    std::size_t bundle_width = 1;
    ScheduleCounters counters;

    [[nodiscard]] std::size_t patterns() const { return traces.size(); }

    [[nodiscard]] std::size_t pattern_index(std::span<const int> n) const {
        const auto st = row_major_strides(pattern_shape);
        std::size_t lin = 0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            lin += static_cast<std::size_t>(n[i]) * st[i];
        }
        return lin;
    }

    /// Rows (m_u...), columns (n_u...).
    [[nodiscard]] CMatrix block_matrix(std::size_t pattern) const {
        const std::size_t U = undetected.size();
        std::vector<int> side(U);
        for (std::size_t i = 0; i < U; ++i) {
            side[i] = block_shape[2 * i];
        }
        const auto side_strides = row_major_strides(side);
        const auto bst = row_major_strides(block_shape);
        const auto n = static_cast<Eigen::Index>(shape_size(side));
        CMatrix out(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) {
                std::size_t lin = 0;
                auto rr = static_cast<std::size_t>(r);
                auto cc = static_cast<std::size_t>(c);
                for (std::size_t i = 0; i < U; ++i) {
                    lin += (rr / side_strides[i]) * bst[2 * i] + (cc / side_strides[i]) * bst[2 * i + 1];
                    rr %= side_strides[i];
                    cc %= side_strides[i];
                }
                out(r, c) = blocks[pattern * block_cells + lin];
            }
        }
        return out;
    }
};

namespace detail {

/// Fock-position permutation putting the modes of `order` first, in that order.
inline std::vector<int> fock_permutation(const std::vector<int> &order) {
    std::vector<int> perm(2 * order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        perm[2 * i] = 2 * order[i];
        perm[2 * i + 1] = 2 * order[i] + 1;
    }
    return perm;
}

inline GaussianData permute_params(const GaussianData &p, const std::vector<int> &perm) {
    GaussianData out = p;
    const auto D = static_cast<Eigen::Index>(perm.size());
    for (Eigen::Index i = 0; i < D; ++i) {
        out.b(i) = p.b(perm[i]);
        for (Eigen::Index j = 0; j < D; ++j) {
            out.A(i, j) = p.A(perm[i], perm[j]);
        }
    }
    return out;
}

/// Bundle component index in permuted order -> same component in caller order.
inline std::vector<std::size_t> unpermute_components(const std::vector<int> &perm) {
    const std::size_t D = perm.size();
    std::vector<std::size_t> map(1 + D + D * D);
    map[0] = 0;
    for (std::size_t p = 0; p < D; ++p) {
        map[1 + p] = 1 + static_cast<std::size_t>(perm[p]);
        for (std::size_t q = 0; q < D; ++q) {
            map[1 + D + p * D + q] =
                1 + D + static_cast<std::size_t>(perm[p]) * D + static_cast<std::size_t>(perm[q]);
        }
    }
    return map;
}

} // namespace detail

/// Checks every block for Hermiticity and positivity and the total trace;
/// returns an empty string when all hold.
inline std::string check_conditional_batch(const ConditionalBatch &batch, double herm_tol = 1e-10,
                                           double eig_floor = -1e-9) {
    double total = 0.0;
    for (std::size_t p = 0; p < batch.patterns(); ++p) {
        const CMatrix B = batch.block_matrix(p);
        const double herm = B.size() ? (B - B.adjoint()).cwiseAbs().maxCoeff() : 0.0;
        if (herm > herm_tol) {
            return "block " + std::to_string(p) + " is not Hermitian (" + std::to_string(herm) + ")";
        }
        const CMatrix H = 0.5 * (B + B.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < eig_floor) {
            return "block " + std::to_string(p) + " has eigenvalue " +
                   std::to_string(es.eigenvalues().minCoeff());
        }
        total += batch.traces[p];
    }
    if (total > 1.0 + 1e-10) {
        return "total trace " + std::to_string(total) + " exceeds 1";
    }
    return {};
}

/**
 * Conditional states of `undetected` (0-based modes) for every pattern of the
 * remaining modes below their cutoffs. `params` are density-matrix parameters
 * in the caller's mode order.
 */
inline ConditionalBatch run_conditional(const GaussianData &params, const std::vector<int> &cutoffs,
                                        std::vector<int> undetected,
                                        const ConditionalOptions &opt = {}) {
    if (params.representation != Representation::DensityMatrix) {
        throw ValidationError("conditional states need density-matrix parameters");
    }
    const int M = params.modes;
    if (static_cast<int>(cutoffs.size()) != M) {
        throw ValidationError("one cutoff per mode is required");
    }
    std::sort(undetected.begin(), undetected.end());
    undetected.erase(std::unique(undetected.begin(), undetected.end()), undetected.end());
    if (undetected.empty()) {
        throw ValidationError("all modes are detected; use the GBS path");
    }
    if (static_cast<int>(undetected.size()) >= M) {
        throw ValidationError("no mode is detected; use the full fill");
    }
    if (undetected.front() < 0 || undetected.back() >= M) {
        throw ValidationError("undetected mode outside 0..M-1");
    }
    std::vector<int> detected;
    for (int i = 0; i < M; ++i) {
        if (!std::binary_search(undetected.begin(), undetected.end(), i)) {
            detected.push_back(i);
        }
    }
    std::vector<int> order = undetected;
    order.insert(order.end(), detected.begin(), detected.end());
    const std::vector<int> perm = detail::fock_permutation(order);
    const GaussianData permuted = detail::permute_params(params, perm);

    std::vector<int> ucut;
    std::vector<int> dcut;
    for (int u : undetected) {
        ucut.push_back(cutoffs[u]);
    }
    for (int d : detected) {
        dcut.push_back(cutoffs[d]);
    }
    SelectiveOptions sopt;
    sopt.buffered = opt.buffered;
    sopt.threads = opt.threads;
    sopt.with_grad = opt.with_grad;
    SelectiveResult run = run_selective(&permuted, ucut, PatternBounds::local(dcut), sopt);

    ConditionalBatch out;
    out.undetected = undetected;
    out.detected = detected;
    out.pattern_shape = dcut;
    out.block_shape = run.block_extents;
    out.block_cells = run.counters.block_cells;
    out.counters = run.counters;
    const std::size_t uw = run.counters.value_width;
    out.bundle_width = uw;
    const std::size_t patterns = run.store.diagonal_cells();
    const auto &diag = run.store.diagonal();
    out.blocks.resize(patterns * out.block_cells);
    for (std::size_t i = 0; i < out.blocks.size(); ++i) {
        out.blocks[i] = diag[i * uw];
    }
    const auto bst = row_major_strides(out.block_shape);
    std::vector<std::size_t> trace_cells;
    for (std::size_t lin = 0; lin < out.block_cells; ++lin) {
        std::size_t rem = lin;
        bool on_diag = true;
        int prev = 0;
        for (std::size_t l = 0; l < bst.size(); ++l) {
            const int v = static_cast<int>(rem / bst[l]);
            rem %= bst[l];
            if (l % 2 == 1 && v != prev) {
                on_diag = false;
            }
            prev = v;
        }
        if (on_diag) {
            trace_cells.push_back(lin);
        }
    }
    out.traces.assign(patterns, 0.0);
    for (std::size_t p = 0; p < patterns; ++p) {
        for (std::size_t lin : trace_cells) {
            out.traces[p] += out.blocks[p * out.block_cells + lin].real();
        }
    }
    if (opt.with_grad) {
        const auto map = detail::unpermute_components(perm);
        std::vector<cplx> b(patterns * out.block_cells * uw);
        for (std::size_t cell = 0; cell < patterns * out.block_cells; ++cell) {
            for (std::size_t c = 0; c < uw; ++c) {
                b[cell * uw + map[c]] = diag[cell * uw + c];
            }
        }
        out.bundles = std::move(b);
    }
    if (opt.validate) {
        const std::string problem =
            check_conditional_batch(out, opt.hermitian_tolerance, opt.eigenvalue_floor);
        if (!problem.empty()) {
            throw InvariantError(problem);
        }
    }
    return out;
}

} // namespace fockwalk
