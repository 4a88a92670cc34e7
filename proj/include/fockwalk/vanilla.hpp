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
 * @file vanilla.hpp
 * Full-lattice walker: every in-bound amplitude is computed, pivots taken in
 * order of increasing weight. This is the production ket path and the
 * brute-force reference for the selective density-matrix schedulers.
 *
 * Within one weight class every target k' is owned by exactly one pivot,
 * k' - 1_f with f the first nonzero coordinate of k'. Owned writes are
 * disjoint, so pivots of a class can run on any number of threads and the
 * result is bit-identical to a sequential walk.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gaussian.hpp"
#include "kernel.hpp"
#include "lattice.hpp"
#include "parallel.hpp"

namespace fockwalk {

namespace detail {

inline void check_pivot_reads(const DenseTensor &store, const FockIndex &pivot, bool need_pivot) {
    if (!store.contains(pivot)) {
        throw InvariantError("pivot " + format_index(pivot) + " is outside the tensor");
    }
    if (need_pivot && !store.written(store.linear(pivot))) {
        throw InvariantError("pivot " + format_index(pivot) + " read before it was written");
    }
    for (std::size_t l = 0; l < pivot.size(); ++l) {
        if (pivot[l] == 0) {
            continue;
        }
        const FockIndex r = pivot.decremented(l);
        if (!store.written(store.linear(r))) {
            throw InvariantError("read " + format_index(r) + " of pivot " + format_index(pivot) +
                                 " was never written");
        }
    }
}

inline void apply_pivot_impl(const GaussianData &params, DenseTensor &store,
                             const FockIndex &pivot, bool read_pivot) {
    const int D = params.dim();
    if (static_cast<int>(store.rank()) != D) {
        throw ValidationError("tensor rank does not match the parameter dimension");
    }
    const bool grad = store.width() > 1;
    if (grad && store.width() != bundle_width(D, true)) {
        throw ValidationError("tensor width is neither 1 nor 1 + D + D^2");
    }
    check_pivot_reads(store, pivot, read_pivot || grad);
    const PivotKernel kernel(params, grad);
    std::vector<const cplx *> reads(D, nullptr);
    for (int l = 0; l < D; ++l) {
        if (pivot[l] > 0) {
            reads[l] = store.cell(store.linear(pivot.decremented(l)));
        }
    }
    const cplx *piv = (read_pivot || grad) ? store.cell(store.linear(pivot)) : nullptr;
    std::vector<int> dirs;
    std::vector<cplx *> outs;
    for (int i = 0; i < D; ++i) {
        const FockIndex t = pivot.incremented(i);
        if (store.contains(t)) {
            dirs.push_back(i);
            outs.push_back(store.cell(store.linear(t)));
        }
    }
    kernel.apply(pivot.values(), piv, reads, dirs, outs);
    for (int i : dirs) {
        store.mark_written(store.linear(pivot.incremented(i)));
    }
}

} // namespace detail

/// Applies the full hypercross at `pivot`, writing every in-bound k + 1_i.
/// Throws InvariantError when a needed read has not been written.
inline void apply_pivot(const GaussianData &params, DenseTensor &store, const FockIndex &pivot) {
    detail::apply_pivot_impl(params, store, pivot, true);
}

/// b = 0 variant: the pivot value is never read. Only odd-weight pivots make
/// sense here since their targets are the even-weight (nonzero) amplitudes.
inline void apply_pivot_no_displacement(const GaussianData &params, DenseTensor &store,
                                        const FockIndex &pivot) {
    if ((params.b.array() != cplx{0.0, 0.0}).any()) {
        throw ValidationError("apply_pivot_no_displacement called with b != 0");
    }
    if (weight(pivot) % 2 == 0) {
        throw ValidationError("no-displacement pivots must have odd weight");
    }
    detail::apply_pivot_impl(params, store, pivot, false);
}

struct FillOptions {
    int threads = 1;
    bool with_grad = false;
    /// Use the odd-weight-pivot fill when b = 0 (ignored with gradients on).
    bool allow_checkered = true;
};

struct FillResult {
    DenseTensor tensor;
    std::size_t pivots_applied = 0;
    std::size_t amplitudes_written = 0;
    /// Highest weight class that was written.
    int last_weight = 0;
    bool checkered = false;
    /// ProbabilityMass only: whether the threshold was reached before the cap.
    bool threshold_reached = false;
    double probability_mass = 0.0;
    /// ProbabilityMass only: total photon number at which the walk stopped.
    int photons_reached = 0;
};

namespace detail {

/// Diagonal probability carried by the cells of one weight class.
inline double class_probability(const DenseTensor &t, Representation rep,
                                const std::vector<int> &flat, std::size_t D) {
    double p = 0.0;
    const std::size_t n = flat.size() / std::max<std::size_t>(D, 1);
    for (std::size_t j = 0; j < n; ++j) {
        const int *k = flat.data() + j * D;
        std::size_t lin = 0;
        bool diag = true;
        for (std::size_t i = 0; i < D; ++i) {
            lin += static_cast<std::size_t>(k[i]) * t.strides()[i];
            if (rep == Representation::DensityMatrix && i % 2 == 1 && k[i] != k[i - 1]) {
                diag = false;
            }
        }
        if (!diag) {
            continue;
        }
        const cplx v = t.value(lin);
        p += rep == Representation::DensityMatrix ? v.real() : std::norm(v);
    }
    return p;
}

} // namespace detail

/// Fills every in-bound amplitude, seeded by G0 at the origin.
inline FillResult fill_full(const GaussianData &params, const CutoffSpec &bounds,
                            const FillOptions &opt = {}) {
    const int D = params.dim();
    const auto Du = static_cast<std::size_t>(D);
    const std::vector<int> ext = bounds.extents(Du);
    const std::size_t width = bundle_width(D, opt.with_grad);
    const bool checkered = opt.allow_checkered && !opt.with_grad &&
                           (params.b.array() == cplx{0.0, 0.0}).all();
    const bool read_pivot = !checkered;

    FillResult res;
    res.checkered = checkered;
    res.tensor = DenseTensor(ext, width);
    DenseTensor &T = res.tensor;
    write_seed(params, width, T.cell(0));
    T.mark_written(0);
    res.amplitudes_written = 1;

    const bool by_mass = bounds.kind == CutoffSpec::Kind::ProbabilityMass;
    double mass = params.representation == Representation::DensityMatrix ? params.G0.real()
                                                                         : std::norm(params.G0);
    res.probability_mass = mass;
    if (by_mass && mass >= bounds.threshold) {
        res.threshold_reached = true;
        return res;
    }

    const PivotKernel kernel(params, opt.with_grad);
    const int limit = bounds.weight_limit(Du);
    const auto &strides = T.strides();
    auto admits = [&](const int *k, int i) {
        if (k[i] + 1 >= ext[i]) {
            return false;
        }
        if (bounds.kind == CutoffSpec::Kind::GlobalWeight) {
            int w = 1;
            for (std::size_t j = 0; j < Du; ++j) {
                w += k[j];
            }
            return w < bounds.w_max;
        }
        return true;
    };

    std::vector<int> flat;
    std::vector<int> next_flat;
    for (int w = 0; w + 1 < limit; ++w) {
        const bool active = !checkered || (w % 2 == 1);
        flat.clear();
        detail::for_each_composition(w, ext, [&](const std::vector<int> &k) {
            flat.insert(flat.end(), k.begin(), k.end());
        });
        const std::size_t n = flat.size() / Du;
        std::vector<std::uint8_t> used(n, 0);
        if (active) {
            parallel_for(n, opt.threads, [&](std::size_t j) {
                const int *k = flat.data() + j * Du;
                int first_nz = D - 1;
                for (int i = 0; i < D; ++i) {
                    if (k[i] != 0) {
                        first_nz = i;
                        break;
                    }
                }
                std::array<int, 64> dirs_buf{};
                std::array<cplx *, 64> outs_buf{};
                std::array<const cplx *, 64> reads_buf{};
                std::size_t nd = 0;
                std::size_t lin = 0;
                for (std::size_t i = 0; i < Du; ++i) {
                    lin += static_cast<std::size_t>(k[i]) * strides[i];
                }
                for (int i = 0; i <= first_nz; ++i) {
                    if (admits(k, i)) {
                        dirs_buf[nd] = i;
                        outs_buf[nd] = T.cell(lin + strides[i]);
                        ++nd;
                    }
                }
                if (nd == 0) {
                    return;
                }
                for (int l = 0; l < D; ++l) {
                    reads_buf[l] = k[l] > 0 ? T.cell(lin - strides[l]) : nullptr;
                }
                const cplx *piv = read_pivot ? T.cell(lin) : nullptr;
                kernel.apply(std::span<const int>(k, Du), piv,
                             std::span<const cplx *const>(reads_buf.data(), Du),
                             std::span<const int>(dirs_buf.data(), nd),
                             std::span<cplx *const>(outs_buf.data(), nd));
                for (std::size_t q = 0; q < nd; ++q) {
                    T.mark_written(lin + strides[dirs_buf[q]]);
                }
                used[j] = static_cast<std::uint8_t>(nd);
            });
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j] != 0) {
                ++res.pivots_applied;
                res.amplitudes_written += used[j];
            }
        }
        res.last_weight = w + 1;
        if (by_mass) {
            next_flat.clear();
            detail::for_each_composition(w + 1, ext, [&](const std::vector<int> &k) {
                next_flat.insert(next_flat.end(), k.begin(), k.end());
            });
            mass += detail::class_probability(T, params.representation, next_flat, Du);
            res.probability_mass = mass;
            const bool dm = params.representation == Representation::DensityMatrix;
            if ((!dm || (w + 1) % 2 == 0) && mass >= bounds.threshold) {
                res.threshold_reached = true;
                res.photons_reached = dm ? (w + 1) / 2 : w + 1;
                break;
            }
        }
    }
    if (by_mass && !res.threshold_reached) {
        res.photons_reached = params.representation == Representation::DensityMatrix
                                  ? res.last_weight / 2
                                  : res.last_weight;
    }
    return res;
}

/// Number of pivots the full fill applies on a box lattice, without running it.
/// `checkered` restricts to odd-weight pivots.
inline std::size_t count_full_fill_pivots(std::span<const int> ext, bool checkered) {
    const std::size_t D = ext.size();
    // counts[p] = tuples over a coordinate range with weight parity p
    auto box = [&](std::size_t from, int lo_first, int hi_first) {
        std::array<std::size_t, 2> acc{0, 0};
        for (int v = lo_first; v <= hi_first; ++v) {
            acc[v % 2] += 1;
        }
        for (std::size_t j = from + 1; j < D; ++j) {
            const auto e = static_cast<std::size_t>(ext[j]);
            const std::size_t even = (e + 1) / 2;
            const std::size_t odd = e / 2;
            acc = {acc[0] * even + acc[1] * odd, acc[0] * odd + acc[1] * even};
        }
        return acc;
    };
    std::size_t total = 0;
    bool any_wide_before = false;
    for (std::size_t f = 0; f < D; ++f) {
        const int hi = any_wide_before ? ext[f] - 1 : ext[f] - 2;
        if (hi >= 1) {
            const auto acc = box(f, 1, hi);
            total += checkered ? acc[1] : acc[0] + acc[1];
        }
        if (ext[f] >= 2) {
            any_wide_before = true;
        }
    }
    // The origin owns every direction.
    if (!checkered && any_wide_before) {
        total += 1;
    }
    return total;
}

/// p(n) = G[n1 n1 n2 n2 ...] sliced out of a full density-matrix tensor.
inline std::vector<double> diagonal_of_density(const DenseTensor &rho, std::span<const int> cutoffs,
                                               double imag_tol = 1e-12) {
    const std::size_t M = cutoffs.size();
    std::vector<double> p(shape_size(cutoffs));
    const auto st = row_major_strides(cutoffs);
    for (std::size_t lin = 0; lin < p.size(); ++lin) {
        FockIndex k(2 * M);
        std::size_t rem = lin;
        for (std::size_t i = 0; i < M; ++i) {
            k[2 * i] = k[2 * i + 1] = static_cast<int>(rem / st[i]);
            rem %= st[i];
        }
        const cplx v = rho(k);
        if (std::abs(v.imag()) > imag_tol) {
            throw InvariantError("diagonal amplitude " + detail::format_index(k) +
                                 " has imaginary part " + std::to_string(v.imag()));
        }
        p[lin] = v.real();
    }
    return p;
}

} // namespace fockwalk
