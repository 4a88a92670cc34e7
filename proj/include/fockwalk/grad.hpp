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
 * @file grad.hpp
 * Gradient bundles and the upstream contraction.
 *
 * A bundle is [G, dG/db_0 .. dG/db_{D-1}, dG/dA_00 .. dG/dA_{D-1,D-1}], with A
 * row-major. G0 is held constant: every amplitude is proportional to G0, so a
 * caller whose loss depends on G0 adds (G_k / G0) dG0/dtheta themselves.
 *
 * The recurrence is only path independent for symmetric A. The A partials are
 * those of the schedule that produced them; the symmetric combination
 * dG/dA_mn + dG/dA_nm is the same for every schedule.
 */
#pragma once

#include <span>

#include "conditional.hpp"
#include "gbs.hpp"
#include "vanilla.hpp"

namespace fockwalk {

inline std::size_t grad_db_index(std::size_t m) { return 1 + m; }
inline std::size_t grad_dA_index(std::size_t m, std::size_t n, std::size_t D) {
    return 1 + D + m * D + n;
}

/// dL/db* and dL/dA* for a real loss L of the amplitudes.
struct UpstreamGradient {
    CVector db;
    CMatrix dA;
};

/**
 * Sum over cells of upstream_k * conj(local gradient of G_k), where upstream_k
 * is dL/dG_k*. `bundles` holds one bundle of width 1 + D + D^2 per cell.
 */
inline UpstreamGradient contract_upstream(std::span<const cplx> upstream,
                                          std::span<const cplx> bundles, int D) {
    const auto d = static_cast<std::size_t>(D);
    const std::size_t width = bundle_width(D, true);
    if (bundles.size() != upstream.size() * width) {
        throw ValidationError("upstream tensor does not match the bundle tensor (" +
                              std::to_string(upstream.size()) + " cells vs " +
                              std::to_string(bundles.size() / width) + ")");
    }
    UpstreamGradient g{CVector::Zero(D), CMatrix::Zero(D, D)};
    for (std::size_t k = 0; k < upstream.size(); ++k) {
        const cplx up = upstream[k];
        if (up == cplx{}) {
            continue;
        }
        const cplx *b = bundles.data() + k * width;
        for (std::size_t m = 0; m < d; ++m) {
            g.db(static_cast<Eigen::Index>(m)) += up * std::conj(b[grad_db_index(m)]);
            for (std::size_t n = 0; n < d; ++n) {
                g.dA(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) +=
                    up * std::conj(b[grad_dA_index(m, n, d)]);
            }
        }
    }
    return g;
}

inline UpstreamGradient contract_upstream(const DenseTensor &upstream, const DenseTensor &bundles) {
    if (upstream.shape() != bundles.shape() || upstream.width() != 1) {
        throw ValidationError("upstream shape " + detail::format_index(upstream.shape()) +
                              " does not match bundle shape " +
                              detail::format_index(bundles.shape()));
    }
    return contract_upstream(upstream.data(), bundles.data(), static_cast<int>(bundles.rank()));
}

/// apply_pivot on a tensor of bundles.
inline void apply_pivot_with_grad(const GaussianData &params, DenseTensor &store,
                                  const FockIndex &pivot) {
    if (store.width() != bundle_width(params.dim(), true)) {
        throw ValidationError("tensor cells are not gradient bundles");
    }
    apply_pivot(params, store, pivot);
}

inline FillResult fill_full_with_grad(const GaussianData &params, const CutoffSpec &bounds,
                                      int threads = 1) {
    FillOptions opt;
    opt.threads = threads;
    opt.with_grad = true;
    return fill_full(params, bounds, opt);
}

inline GbsResult run_gbs_with_grad(const GaussianData &params, const std::vector<int> &cutoffs,
                                   GbsOptions opt = {}) {
    opt.with_grad = true;
    return run_gbs(params, cutoffs, opt);
}

inline ConditionalBatch run_conditional_with_grad(const GaussianData &params,
                                                  const std::vector<int> &cutoffs,
                                                  std::vector<int> undetected,
                                                  ConditionalOptions opt = {}) {
    opt.with_grad = true;
    return run_conditional(params, cutoffs, std::move(undetected), opt);
}

} // namespace fockwalk
