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
 * @file selective.hpp
 * Selective pivot placement over the detected modes of a density matrix.
 *
 * The lattice is split as k = [f, X]: f runs over the 2U indices of the
 * undetected modes (the "block"), X over the 2Md indices of the detected modes
 * (the "coarse index"). With U = 0 a block is a single amplitude and the walk
 * is the plain diagonal GBS schedule; with U > 0 every coarse pivot stands for
 * one fine pivot per block cell and only writes along detected directions.
 *
 * For each coarse weight 2S the schedule applies
 *   diagonal pivots      Y = [a,a,b,b,...]   with sum(Y) = S, then
 *   off-diagonal pivots  Y + 1_{m_d}         when Y is zero on modes < d.
 *
 * A write is only performed if some later pivot consumes it, either in its
 * read group or as its own pivot cell. Pivot cells that nobody reads as part
 * of a read group are released right after use, so in buffered mode the
 * off-diagonal buffer ends empty.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "core.hpp"
#include "gaussian.hpp"
#include "kernel.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "store.hpp"
#include "vanilla.hpp"

namespace fockwalk {

/// Bound on the detected-mode patterns: per-mode cutoffs or a total photon number.
struct PatternBounds {
    enum class Kind { Local, Global };
    Kind kind = Kind::Local;
    std::vector<int> cutoffs; ///< Local: one per detected mode
    int n_max = 0;            ///< Global: patterns with total photons < n_max
    int modes = 0;

    static PatternBounds local(std::vector<int> c) {
        const int md = static_cast<int>(c.size());
        return {Kind::Local, std::move(c), 0, md};
    }
    static PatternBounds global(int modes, int n_max) { return {Kind::Global, {}, n_max, modes}; }

    [[nodiscard]] std::vector<int> shape() const {
        return kind == Kind::Local ? cutoffs : std::vector<int>(modes, std::max(n_max, 1));
    }
};

struct SelectiveOptions {
    bool buffered = false;
    int threads = 1;
    bool with_grad = false;
    bool record_curve = false;
    bool record_plan = false;
};

enum class PivotKind { Diagonal, OffDiagonal };

struct PlannedPivot {
    PivotKind kind = PivotKind::Diagonal;
    std::vector<int> diag; ///< photon pattern [a, b, c, ...]
    int mode = 0;          ///< off-diagonal only: 1-based K of diag + 1_{2K-1}

    bool operator==(const PlannedPivot &) const = default;
};

struct ScheduleCounters {
    std::size_t diagonal_pivots = 0;
    std::size_t offdiagonal_pivots = 0;
    /// Pivots applied while filling the leading block (U > 0 only).
    std::size_t block_fill_pivots = 0;
    /// Coarse cells written per offset type; the seed counts as offset0.
    std::array<std::size_t, kOffsetTypes> written{};
    std::size_t block_cells = 1;
    std::size_t value_width = 1;
    /// Largest number of coarse cells held at once by the sequential schedule.
    std::size_t peak_cells = 0;
    std::size_t final_diag_cells = 0;
    std::size_t final_offdiag_cells = 0;

    [[nodiscard]] std::size_t pivots() const { return diagonal_pivots + offdiagonal_pivots; }
    /// One fine pivot per block cell per coarse pivot, plus the block fill.
    [[nodiscard]] std::size_t fine_pivots() const {
        return pivots() * block_cells + block_fill_pivots;
    }
    [[nodiscard]] std::size_t written_cells() const {
        return std::accumulate(written.begin(), written.end(), std::size_t{0});
    }
    [[nodiscard]] std::size_t written_of(OffsetType t) const {
        return written[static_cast<std::size_t>(t)];
    }
    /// Fine amplitudes written, counting the block-fill cells once.
    [[nodiscard]] std::size_t amplitudes_written() const { return written_cells() * block_cells; }
    [[nodiscard]] std::size_t peak_values() const { return peak_cells * block_cells * value_width; }
    [[nodiscard]] std::size_t peak_bytes() const { return peak_values() * kBytesPerAmplitude; }
};

/// Stored coarse cells after a given number of applied pivots.
struct CurvePoint {
    std::size_t pivots = 0;
    std::size_t stored_cells = 0;
    /// Last pivot of a photon-number class (all pivots with pattern sum S).
    bool class_end = false;
};

struct SelectiveResult {
    BufferedStore store;
    ScheduleCounters counters;
    std::vector<CurvePoint> curve;
    std::vector<PlannedPivot> plan;
    std::vector<int> block_extents;
};

namespace detail {

class SelectiveWalker {
  public:
    SelectiveWalker(const GaussianData *params, std::vector<int> undetected_cutoffs,
                    PatternBounds bounds, SelectiveOptions opt)
        : params_(params), bounds_(std::move(bounds)), opt_(opt),
          md_(static_cast<std::size_t>(bounds_.modes)), u_(undetected_cutoffs.size()),
          shape_(bounds_.shape()) {
        if (md_ == 0) {
            throw ValidationError("at least one detected mode is required");
        }
        if (bounds_.kind == PatternBounds::Kind::Local) {
            if (bounds_.cutoffs.size() != md_) {
                throw ValidationError("one cutoff per detected mode is required");
            }
            for (int c : bounds_.cutoffs) {
                if (c < 1) {
                    throw ValidationError("cutoffs must be >= 1");
                }
            }
        } else if (bounds_.n_max < 1) {
            throw ValidationError("the global photon cutoff must be >= 1");
        }
        for (int c : undetected_cutoffs) {
            if (c < 1) {
                throw ValidationError("cutoffs must be >= 1");
            }
            bext_.push_back(c);
            bext_.push_back(c);
        }
        bstrides_ = row_major_strides(bext_);
        block_cells_ = shape_size(bext_);
        dim_ = static_cast<int>(2 * (u_ + md_));
        if (params_ != nullptr) {
            if (params_->representation != Representation::DensityMatrix) {
                throw ValidationError("selective walks need density-matrix parameters");
            }
            if (params_->dim() != dim_) {
                throw ValidationError("parameter dimension does not match the mode count");
            }
        }
        unit_width_ = bundle_width(dim_, opt_.with_grad);
        cells_needed_ = u_ > 0 || opt_.with_grad ||
                        (params_ != nullptr && (params_->b.array() != cplx{0.0, 0.0}).any());
        if (params_ != nullptr) {
            kernel_.emplace(*params_, opt_.with_grad);
        }
        // Fine cells in order of increasing weight, lexicographic within a weight.
        fine_order_.resize(block_cells_);
        std::iota(fine_order_.begin(), fine_order_.end(), std::size_t{0});
        fine_coords_.resize(block_cells_ * 2 * u_);
        std::vector<int> fine_weight(block_cells_, 0);
        for (std::size_t lin = 0; lin < block_cells_; ++lin) {
            std::size_t rem = lin;
            for (std::size_t l = 0; l < 2 * u_; ++l) {
                const int v = static_cast<int>(rem / bstrides_[l]);
                rem %= bstrides_[l];
                fine_coords_[lin * 2 * u_ + l] = v;
                fine_weight[lin] += v;
            }
        }
        std::stable_sort(fine_order_.begin(), fine_order_.end(),
                         [&](std::size_t a, std::size_t b) { return fine_weight[a] < fine_weight[b]; });
    }

    SelectiveResult run() {
        const std::size_t cell_width = params_ != nullptr ? block_cells_ * unit_width_ : 0;
        SelectiveResult res{BufferedStore(shape_, cell_width, opt_.buffered), {}, {}, {}, bext_};
        BufferedStore &store = res.store;
        ScheduleCounters &cnt = res.counters;
        cnt.block_cells = block_cells_;
        cnt.value_width = unit_width_;

        seed(store, cnt);
        logical_ = 1;
        cnt.peak_cells = 1;
        if (opt_.record_curve) {
            res.curve.push_back({0, logical_, true});
        }

        const int s_last = bounds_.kind == PatternBounds::Kind::Local
                               ? std::accumulate(shape_.begin(), shape_.end(), 0) - static_cast<int>(md_)
                               : bounds_.n_max - 1;
        std::vector<Step> batch;
        for (int S = 0; S <= s_last; ++S) {
            std::vector<std::vector<int>> diag_set;
            for_each_composition(S, shape_, [&](const std::vector<int> &y) { diag_set.push_back(y); });

            batch.clear();
            for (const auto &y : diag_set) {
                if (diag_guard(y)) {
                    batch.push_back(diagonal_step(y));
                }
            }
            execute(batch, store, res);

            batch.clear();
            for (const auto &y : diag_set) {
                for (std::size_t d = 0; d < md_; ++d) {
                    if (off_guard(y, d)) {
                        batch.push_back(offdiagonal_step(y, d));
                    }
                }
            }
            execute(batch, store, res);
            if (opt_.record_curve) {
                res.curve.back().class_end = true;
            }
        }

        for (std::size_t t = 0; t < kOffsetTypes; ++t) {
            cnt.written[t] = store.written(static_cast<OffsetType>(t));
        }
        cnt.final_diag_cells = store.live_diag();
        cnt.final_offdiag_cells = store.live_offdiag();
        return res;
    }

  private:
    struct Step {
        PivotKind kind = PivotKind::Diagonal;
        std::size_t mode = 0;
        std::vector<int> y;
        std::vector<int> coarse;
        OffsetKey pivot_key;
        bool release_pivot = false;
        std::vector<std::pair<std::size_t, OffsetKey>> reads;
        std::vector<std::pair<std::size_t, OffsetKey>> writes;
        const cplx *pivot_cell = nullptr;
        std::vector<const cplx *> read_cells;
        std::vector<cplx *> write_cells;
    };

    [[nodiscard]] bool pattern_ok(const std::vector<int> &y) const {
        if (bounds_.kind == PatternBounds::Kind::Global) {
            return std::accumulate(y.begin(), y.end(), 0) < bounds_.n_max;
        }
        for (std::size_t i = 0; i < md_; ++i) {
            if (y[i] >= shape_[i]) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] bool in_bounds(const std::vector<int> &x) const {
        if (bounds_.kind == PatternBounds::Kind::Global) {
            return std::accumulate(x.begin(), x.end(), 0) < 2 * bounds_.n_max;
        }
        for (std::size_t i = 0; i < 2 * md_; ++i) {
            if (x[i] >= shape_[i / 2]) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] bool diag_guard(const std::vector<int> &y) const {
        if (!pattern_ok(y)) {
            return false;
        }
        if (bounds_.kind == PatternBounds::Kind::Global) {
            return true;
        }
        // With C_1 = 1 the printed guard admits no diagonal pivot at all, which
        // would leave every off-diagonal pivot cell unwritten.
        return y[0] < shape_[0] - 1 || shape_[0] == 1;
    }

    [[nodiscard]] bool off_guard(const std::vector<int> &y, std::size_t d) const {
        if (!pattern_ok(y)) {
            return false;
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (y[i] != 0) {
                return false;
            }
        }
        return bounds_.kind == PatternBounds::Kind::Global || y[d] < shape_[d] - 1;
    }

    static std::vector<int> coarse_of(const std::vector<int> &y) {
        std::vector<int> x(2 * y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            x[2 * i] = x[2 * i + 1] = y[i];
        }
        return x;
    }

    static std::vector<int> bumped(const std::vector<int> &y, std::size_t d) {
        std::vector<int> z = y;
        ++z[d];
        return z;
    }

    void add_reads(Step &st, std::size_t from, const BufferedStore &store) const {
        for (std::size_t j = from; j < 2 * md_; ++j) {
            if (st.coarse[j] == 0) {
                continue;
            }
            std::vector<int> r = st.coarse;
            --r[j];
            st.reads.emplace_back(j, classify_offset(r, store.diag_strides()));
        }
    }

    Step diagonal_step(const std::vector<int> &y) {
        Step st;
        st.kind = PivotKind::Diagonal;
        st.y = y;
        st.coarse = coarse_of(y);
        for (std::size_t j = 0; j < 2 * md_; ++j) {
            std::vector<int> x = st.coarse;
            ++x[j];
            if (!in_bounds(x)) {
                continue;
            }
            const std::size_t d = j / 2;
            const bool reader = diag_guard(bumped(y, d));
            const bool own_cell = j % 2 == 0 && off_guard(y, d);
            if (reader || own_cell) {
                st.writes.emplace_back(j, OffsetKey{});
            }
        }
        return st;
    }

    Step offdiagonal_step(const std::vector<int> &y, std::size_t d) {
        Step st;
        st.kind = PivotKind::OffDiagonal;
        st.mode = d;
        st.y = y;
        st.coarse = coarse_of(y);
        ++st.coarse[2 * d];
        st.release_pivot = !diag_guard(bumped(y, d));
        for (std::size_t j = 2 * d; j < 2 * md_; ++j) {
            std::vector<int> x = st.coarse;
            ++x[j];
            if (!in_bounds(x)) {
                continue;
            }
            const std::size_t i = j / 2;
            bool needed = false;
            if (j == 2 * d + 1) {
                needed = true; // the next diagonal amplitude
            } else {
                needed = off_guard(bumped(y, i), d);
            }
            if (needed) {
                st.writes.emplace_back(j, OffsetKey{});
            }
        }
        return st;
    }

    void seed(BufferedStore &store, ScheduleCounters &cnt) {
        const OffsetKey origin{0, 0};
        cplx *cell = store.write(origin);
        if (params_ == nullptr) {
            cnt.block_fill_pivots = u_ > 0 ? count_full_fill_pivots(bext_, false) : 0;
            return;
        }
        write_seed(*params_, unit_width_, cell);
        if (u_ == 0) {
            return;
        }
        // Leading block: full fill along the undetected directions only.
        const auto D = static_cast<std::size_t>(dim_);
        std::vector<int> k(D, 0);
        std::vector<const cplx *> reads(D, nullptr);
        std::vector<int> dirs;
        std::vector<cplx *> outs;
        for (std::size_t lin : fine_order_) {
            const int *f = fine_coords_.data() + lin * 2 * u_;
            int first_nz = static_cast<int>(2 * u_) - 1;
            for (std::size_t l = 0; l < 2 * u_; ++l) {
                if (f[l] != 0) {
                    first_nz = static_cast<int>(l);
                    break;
                }
            }
            dirs.clear();
            outs.clear();
            for (int i = 0; i <= first_nz; ++i) {
                if (f[i] + 1 < bext_[i]) {
                    dirs.push_back(i);
                    outs.push_back(cell + (lin + bstrides_[i]) * unit_width_);
                }
            }
            if (dirs.empty()) {
                continue;
            }
            for (std::size_t l = 0; l < 2 * u_; ++l) {
                k[l] = f[l];
                reads[l] = f[l] > 0 ? cell + (lin - bstrides_[l]) * unit_width_ : nullptr;
            }
            kernel_->apply(k, cell + lin * unit_width_, reads, dirs, outs);
            ++cnt.block_fill_pivots;
        }
    }

    void execute(std::vector<Step> &batch, BufferedStore &store, SelectiveResult &res) {
        if (batch.empty()) {
            return;
        }
        const bool numeric = params_ != nullptr;
        // Resolve reads and allocate every write of the batch. No pivot of a
        // batch reads what another pivot of the same batch writes.
        for (Step &st : batch) {
            st.pivot_key = store.key(st.coarse);
            add_reads(st, st.kind == PivotKind::OffDiagonal ? 2 * st.mode : 0, store);
            if (!store.contains(st.pivot_key)) {
                throw InvariantError("read-before-write: pivot " + format_index(st.coarse) +
                                     " was never written");
            }
            st.pivot_cell = numeric && cells_needed_ ? store.lookup(st.pivot_key) : nullptr;
            st.read_cells.assign(2 * md_, nullptr);
            for (auto &[j, key] : st.reads) {
                if (!store.contains(key)) {
                    std::vector<int> r = st.coarse;
                    --r[j];
                    throw InvariantError("read-before-write: pivot " + format_index(st.coarse) +
                                         " reads " + format_index(r));
                }
                st.read_cells[j] = numeric ? store.lookup(key) : nullptr;
            }
            st.write_cells.clear();
            for (auto &[j, key] : st.writes) {
                std::vector<int> x = st.coarse;
                ++x[j];
                key = store.key(x);
                st.write_cells.push_back(store.write(key));
            }
        }

        if (numeric) {
            compute(batch);
        }

        ScheduleCounters &cnt = res.counters;
        for (const Step &st : batch) {
            logical_ += st.writes.size();
            cnt.peak_cells = std::max(cnt.peak_cells, logical_);
            std::size_t dropped = 0;
            for (const auto &[j, key] : st.reads) {
                store.consume(key);
                dropped += key.tag != 0 ? 1 : 0;
            }
            if (st.release_pivot) {
                store.release(st.pivot_key);
                ++dropped;
            }
            if (opt_.buffered) {
                logical_ -= dropped;
            }
            if (st.kind == PivotKind::Diagonal) {
                ++cnt.diagonal_pivots;
            } else {
                ++cnt.offdiagonal_pivots;
            }
            if (opt_.record_curve) {
                res.curve.push_back({cnt.pivots(), logical_, false});
            }
            if (opt_.record_plan) {
                res.plan.push_back({st.kind, st.y,
                                    st.kind == PivotKind::OffDiagonal ? static_cast<int>(st.mode) + 1 : 0});
            }
        }
    }

    void compute(const std::vector<Step> &batch) const {
        const std::size_t n = batch.size() * block_cells_;
        const auto D = static_cast<std::size_t>(dim_);
        const std::size_t off = 2 * u_;
        parallel_for(n, opt_.threads, [&](std::size_t item) {
            const Step &st = batch[item / block_cells_];
            const std::size_t lin = fine_order_[item % block_cells_];
            const int *f = fine_coords_.data() + lin * off;
            std::array<int, 64> k{};
            std::array<const cplx *, 64> reads{};
            std::array<int, 64> dirs{};
            std::array<cplx *, 64> outs{};
            for (std::size_t l = 0; l < off; ++l) {
                k[l] = f[l];
                reads[l] = f[l] > 0 && st.pivot_cell != nullptr
                               ? st.pivot_cell + (lin - bstrides_[l]) * unit_width_
                               : nullptr;
            }
            for (std::size_t j = 0; j < 2 * md_; ++j) {
                k[off + j] = st.coarse[j];
                reads[off + j] =
                    st.read_cells[j] != nullptr ? st.read_cells[j] + lin * unit_width_ : nullptr;
            }
            for (std::size_t w = 0; w < st.writes.size(); ++w) {
                dirs[w] = static_cast<int>(off + st.writes[w].first);
                outs[w] = st.write_cells[w] + lin * unit_width_;
            }
            const cplx *piv = st.pivot_cell != nullptr ? st.pivot_cell + lin * unit_width_ : nullptr;
            kernel_->apply(std::span<const int>(k.data(), D), piv,
                           std::span<const cplx *const>(reads.data(), D),
                           std::span<const int>(dirs.data(), st.writes.size()),
                           std::span<cplx *const>(outs.data(), st.writes.size()));
        });
    }

    const GaussianData *params_;
    PatternBounds bounds_;
    SelectiveOptions opt_;
    std::size_t md_;
    std::size_t u_;
    std::vector<int> shape_;
    std::vector<int> bext_;
    std::vector<std::size_t> bstrides_;
    std::size_t block_cells_ = 1;
    int dim_ = 0;
    std::size_t unit_width_ = 1;
    bool cells_needed_ = false;
    std::optional<PivotKernel> kernel_;
    std::vector<std::size_t> fine_order_;
    std::vector<int> fine_coords_;
    std::size_t logical_ = 0;
};

} // namespace detail

/**
 * Runs the selective schedule. `params` must list the undetected modes first
 * (their cutoffs in `undetected_cutoffs`); pass nullptr for a bookkeeping-only
 * run that produces counters, plan and curve without any arithmetic.
 */
inline SelectiveResult run_selective(const GaussianData *params, std::vector<int> undetected_cutoffs,
                                     PatternBounds bounds, const SelectiveOptions &opt = {}) {
    detail::SelectiveWalker walker(params, std::move(undetected_cutoffs), std::move(bounds), opt);
    return walker.run();
}

} // namespace fockwalk
