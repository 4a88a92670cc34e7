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
 * @file gbs.hpp
 * Photon-number probabilities p(n) = G[n1 n1 n2 n2 ...] of a fully detected
 * Gaussian density matrix, computed without touching the rest of the lattice.
 */
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selective.hpp"

namespace fockwalk {

/// Real tensor of detection probabilities, row-major over the photon pattern.
struct ProbabilityTensor {
    std::vector<int> shape;
    std::vector<double> values;

    [[nodiscard]] double operator()(std::span<const int> n) const {
        std::size_t lin = 0;
        const auto st = row_major_strides(shape);
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (n[i] < 0 || n[i] >= shape[i]) {
                return 0.0;
            }
            lin += static_cast<std::size_t>(n[i]) * st[i];
        }
        return values[lin];
    }
    [[nodiscard]] double operator()(std::initializer_list<int> n) const {
        return (*this)(std::span<const int>(n.begin(), n.size()));
    }
    [[nodiscard]] double sum() const {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
};

struct GbsOptions {
    bool buffered = false;
    int threads = 1;
    bool with_grad = false;
    bool record_curve = false;
    bool record_plan = false;
    /// Largest |Im p(n)| accepted before the result is declared broken.
    double imag_tolerance = 1e-12;
};

struct GbsResult {
    ProbabilityTensor probabilities;
    /// with_grad only: one bundle per pattern, shape = pattern shape.
    std::optional<DenseTensor> bundles;
    ScheduleCounters counters;
    std::vector<CurvePoint> curve;
    std::vector<PlannedPivot> plan;
};

namespace detail {

inline ProbabilityTensor real_diagonal(const BufferedStore &store, std::size_t width,
                                       double imag_tol) {
    ProbabilityTensor p;
    p.shape = store.diag_shape();
    p.values.assign(store.diagonal_cells(), 0.0);
    const auto &diag = store.diagonal();
    for (std::size_t lin = 0; lin < p.values.size(); ++lin) {
        const cplx v = diag[lin * width];
        if (std::abs(v.imag()) > imag_tol) {
            throw InvariantError("diagonal amplitude " + std::to_string(lin) +
                                 " has imaginary part " + std::to_string(v.imag()));
        }
        p.values[lin] = v.real();
    }
    return p;
}

inline DenseTensor bundles_of(const BufferedStore &store, std::size_t width) {
    DenseTensor t(store.diag_shape(), width);
    std::copy(store.diagonal().begin(), store.diagonal().end(), t.data().begin());
    for (std::size_t lin = 0; lin < t.cells(); ++lin) {
        if (store.diagonal_written(lin)) {
            t.mark_written(lin);
        }
    }
    return t;
}

inline void require_density(const GaussianData &params, std::size_t modes) {
    if (params.representation != Representation::DensityMatrix) {
        throw ValidationError("GBS probabilities need density-matrix parameters");
    }
    if (static_cast<std::size_t>(params.modes) != modes) {
        throw ValidationError("one cutoff per mode is required");
    }
}

inline SelectiveOptions selective_options(const GbsOptions &opt) {
    return {opt.buffered, opt.threads, opt.with_grad, opt.record_curve, opt.record_plan};
}

} // namespace detail

/// p(n) for every pattern below the per-mode cutoffs.
inline GbsResult run_gbs(const GaussianData &params, const std::vector<int> &cutoffs,
                         const GbsOptions &opt = {}) {
    detail::require_density(params, cutoffs.size());
    SelectiveResult run =
        run_selective(&params, {}, PatternBounds::local(cutoffs), detail::selective_options(opt));
    const std::size_t width = run.counters.value_width;
    GbsResult out;
    out.probabilities = detail::real_diagonal(run.store, width, opt.imag_tolerance);
    if (opt.with_grad) {
        out.bundles = detail::bundles_of(run.store, width);
    }
    out.counters = run.counters;
    out.curve = std::move(run.curve);
    out.plan = std::move(run.plan);
    return out;
}

struct GbsGlobalResult {
    std::map<std::vector<int>, double> probabilities;
    std::optional<DenseTensor> bundles;
    ScheduleCounters counters;
    std::vector<PlannedPivot> plan;
};

/// p(n) for every pattern with n_1 + ... + n_M < n_max.
inline GbsGlobalResult run_gbs_global_cutoff(const GaussianData &params, int n_max,
                                             const GbsOptions &opt = {}) {
    if (params.representation != Representation::DensityMatrix) {
        throw ValidationError("GBS probabilities need density-matrix parameters");
    }
    SelectiveResult run = run_selective(&params, {}, PatternBounds::global(params.modes, n_max),
                                        detail::selective_options(opt));
    const std::size_t width = run.counters.value_width;
    const ProbabilityTensor dense = detail::real_diagonal(run.store, width, opt.imag_tolerance);
    GbsGlobalResult out;
    for (int S = 0; S < n_max; ++S) {
        detail::for_each_composition(S, dense.shape, [&](const std::vector<int> &n) {
            out.probabilities.emplace(n, dense(n));
        });
    }
    if (opt.with_grad) {
        out.bundles = detail::bundles_of(run.store, width);
    }
    out.counters = run.counters;
    out.plan = std::move(run.plan);
    return out;
}

struct PivotPlan {
    std::vector<PlannedPivot> pivots;
    ScheduleCounters counters;
};

/// The schedule for M detected modes, without arithmetic. `needs_pivot_values`
/// matches a displaced or gradient run.
inline PivotPlan plan_pivots(const std::vector<int> &cutoffs, bool needs_pivot_values = false) {
    SelectiveOptions opt;
    opt.record_plan = true;
    opt.with_grad = needs_pivot_values;
    SelectiveResult run = run_selective(nullptr, {}, PatternBounds::local(cutoffs), opt);
    return {std::move(run.plan), run.counters};
}

/// (C_1 - 1) prod_{i>1} C_i + sum_K (C_K - 1) prod_{i>K} C_i.
inline std::size_t gbs_pivot_count(const std::vector<int> &cutoffs) {
    const std::size_t M = cutoffs.size();
    auto tail = [&](std::size_t from) {
        std::size_t p = 1;
        for (std::size_t i = from; i < M; ++i) {
            p *= static_cast<std::size_t>(cutoffs[i]);
        }
        return p;
    };
    std::size_t total = static_cast<std::size_t>(cutoffs[0] - 1) * tail(1);
    for (std::size_t K = 0; K < M; ++K) {
        total += static_cast<std::size_t>(cutoffs[K] - 1) * tail(K + 1);
    }
    return total;
}

inline std::size_t ipow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= base;
    }
    return r;
}

/// 2 C^M - C^(M-1) - 1.
inline std::size_t gbs_pivot_count(int M, int C) {
    const auto c = static_cast<std::size_t>(C);
    return 2 * ipow(c, M) - ipow(c, M - 1) - 1;
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

/// Global-cutoff pivot count as the sum over photon numbers N < n_max.
inline std::size_t gbs_global_pivot_sum(int M, int n_max) {
    std::size_t total = 0;
    for (int N = 0; N < n_max; ++N) {
        const auto n = static_cast<std::size_t>(N);
        total += binomial(n + M - 1, n);
        for (int K = 1; K <= M; ++K) {
            total += binomial(n + static_cast<std::size_t>(M - K), n);
        }
    }
    return total;
}

/// The binomial closed form C(n_max+M-1, n_max) + C(n_max+M, n_max) - 1.
inline std::size_t gbs_global_pivot_closed_form(int M, int n_max) {
    const auto n = static_cast<std::size_t>(n_max);
    return binomial(n + M - 1, n) + binomial(n + M, n) - 1;
}

/// Written cells per offset type, in OffsetType order.
using WrittenCounts = std::array<std::size_t, kOffsetTypes>;

/// Closed-form written counts for M modes with equal cutoffs C.
inline WrittenCounts gbs_written_closed_form(int M, int C) {
    const auto c = static_cast<std::size_t>(C);
    const std::size_t cm1 = ipow(c, M - 1);
    WrittenCounts w{};
    w[static_cast<std::size_t>(OffsetType::One)] =
        (c - 1) * cm1 + (c - 2) * cm1 +
        (M >= 2 ? static_cast<std::size_t>(2 * M - 2) * (c - 1) * (c - 1) * ipow(c, M - 2) : 0);
    w[static_cast<std::size_t>(OffsetType::Zero)] = ipow(c, M);
    std::size_t two = 0;
    std::size_t pairs = 0;
    for (int K = 0; K < M; ++K) {
        two += ipow(c, M - K - 1);
        if (M - K - 1 > 0) {
            pairs += static_cast<std::size_t>(M - K - 1) * ipow(c, M - K - 2);
        }
    }
    w[static_cast<std::size_t>(OffsetType::Two)] = (c - 2) * two;
    w[static_cast<std::size_t>(OffsetType::OneZeroOneZero)] = (c - 1) * (c - 1) * pairs;
    w[static_cast<std::size_t>(OffsetType::OneZeroZeroOne)] = (c - 1) * (c - 1) * pairs;
    return w;
}

/// Written cells per offset type, measured by a bookkeeping-only run. For equal
/// cutoffs the result is checked against the closed forms.
inline WrittenCounts count_written(const std::vector<int> &cutoffs) {
    const SelectiveResult run = run_selective(nullptr, {}, PatternBounds::local(cutoffs));
    const WrittenCounts measured = run.counters.written;
    const bool equal = std::all_of(cutoffs.begin(), cutoffs.end(),
                                   [&](int c) { return c == cutoffs.front(); });
    if (equal && cutoffs.front() >= 2) {
        const WrittenCounts closed =
            gbs_written_closed_form(static_cast<int>(cutoffs.size()), cutoffs.front());
        if (closed != measured) {
            throw InvariantError("written counts disagree with the closed forms for " +
                                 detail::format_index(cutoffs));
        }
    }
    return measured;
}

} // namespace fockwalk
