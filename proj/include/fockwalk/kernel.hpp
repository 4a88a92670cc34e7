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
 * @file kernel.hpp
 * One application of the Fock recurrence around a pivot k:
 *
 *   G[k + 1_i] = ( b_i G[k] + sum_l sqrt(k_l) A_il G[k - 1_l] ) / sqrt(k_i + 1)
 *
 * written as a vector add plus a matrix-vector product on sqrt-rescaled reads.
 * With gradients on, every cell is a bundle [G, dG/db_0..dG/db_{D-1},
 * dG/dA_00..dG/dA_{D-1,D-1}] (row-major in A) and the same linear map is
 * applied to every component, plus the two source terms
 *
 *   d/db_m : + delta_im G[k]
 *   d/dA_mn: + delta_im sqrt(k_n) G[k - 1_n]
 *
 * G0 is a constant of the walk: the seed bundle is (G0, 0, 0).
 */
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "core.hpp"
#include "gaussian.hpp"

namespace fockwalk {

/// sqrt(n) for small n from a table.
inline double sqrt_int(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(4096);
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = std::sqrt(static_cast<double>(i));
        }
        return t;
    }();
    return n < static_cast<int>(table.size()) ? table[n] : std::sqrt(static_cast<double>(n));
}

/// Number of complex values per lattice cell: 1 or 1 + D + D^2.
inline std::size_t bundle_width(int D, bool with_grad) {
    const auto d = static_cast<std::size_t>(D);
    return with_grad ? 1 + d + d * d : 1;
}

class PivotKernel {
  public:
    PivotKernel(const GaussianData &params, bool with_grad)
        : D_(params.dim()), width_(bundle_width(params.dim(), with_grad)), grad_(with_grad),
          A_(static_cast<std::size_t>(D_) * D_), b_(D_) {
        for (int i = 0; i < D_; ++i) {
            b_[i] = params.b(i);
            for (int l = 0; l < D_; ++l) {
                A_[static_cast<std::size_t>(i) * D_ + l] = params.A(i, l);
            }
        }
    }

    [[nodiscard]] int dim() const { return D_; }
    [[nodiscard]] std::size_t width() const { return width_; }
    [[nodiscard]] bool with_grad() const { return grad_; }

    /**
     * Writes G[k + 1_i] for every i in `dirs` into `outs` (same order).
     * `pivot` may be null when b = 0 and gradients are off; a null read stands
     * for a zero amplitude. `reads[l]` is the cell at k - 1_l.
     */
    void apply(std::span<const int> k, const cplx *pivot, std::span<const cplx *const> reads,
               std::span<const int> dirs, std::span<cplx *const> outs) const {
        thread_local std::vector<cplx> rescaled;
        thread_local std::vector<int> active;
        rescaled.resize(static_cast<std::size_t>(D_) * width_);
        active.clear();
        for (int l = 0; l < D_; ++l) {
            const cplx *src = reads[l];
            if (src == nullptr || k[l] == 0) {
                continue;
            }
            const double s = sqrt_int(k[l]);
            cplx *dst = rescaled.data() + static_cast<std::size_t>(l) * width_;
            for (std::size_t c = 0; c < width_; ++c) {
                dst[c] = s * src[c];
            }
            active.push_back(l);
        }
        for (std::size_t w = 0; w < dirs.size(); ++w) {
            const int i = dirs[w];
            cplx *out = outs[w];
            const cplx bi = b_[i];
            if (pivot != nullptr && bi != cplx{}) {
                for (std::size_t c = 0; c < width_; ++c) {
                    out[c] = bi * pivot[c];
                }
            } else {
                for (std::size_t c = 0; c < width_; ++c) {
                    out[c] = cplx{};
                }
            }
            const cplx *Arow = A_.data() + static_cast<std::size_t>(i) * D_;
            for (int l : active) {
                const cplx a = Arow[l];
                const cplx *src = rescaled.data() + static_cast<std::size_t>(l) * width_;
                for (std::size_t c = 0; c < width_; ++c) {
                    out[c] += a * src[c];
                }
            }
            if (grad_) {
                if (pivot != nullptr) {
                    out[1 + i] += pivot[0];
                }
                cplx *dA_row = out + 1 + D_ + static_cast<std::size_t>(i) * D_;
                for (int l : active) {
                    dA_row[l] += rescaled[static_cast<std::size_t>(l) * width_];
                }
            }
            const double inv = 1.0 / sqrt_int(k[i] + 1);
            for (std::size_t c = 0; c < width_; ++c) {
                out[c] *= inv;
            }
        }
    }

  private:
    int D_;
    std::size_t width_;
    bool grad_;
    std::vector<cplx> A_;
    std::vector<cplx> b_;
};

/// Seed cell: (G0, 0, ..., 0).
inline void write_seed(const GaussianData &params, std::size_t width, cplx *cell) {
    cell[0] = params.G0;
    for (std::size_t c = 1; c < width; ++c) {
        cell[c] = cplx{};
    }
}

} // namespace fockwalk
