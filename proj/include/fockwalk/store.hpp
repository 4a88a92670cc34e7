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
 * @file store.hpp
 * Amplitude storage for the selective density-matrix walkers.
 *
 * A coarse index has 2 Md entries [m_1, n_1, ..., m_Md, n_Md]. Every index the
 * schedulers touch is diag + offset with diag = [a,a,b,b,...] and offset one of
 *
 *   offset0    0
 *   offset1    1_p                 (any position p)
 *   offset2    2 * 1_{m_d}
 *   offset1010 1_{m_d} + 1_{m_i}   (i > d)
 *   offset1001 1_{m_d} + 1_{n_i}   (i > d)
 *
 * Diagonal cells (offset0) live in a dense tensor and persist; everything else
 * sits in a hash map keyed by (diag, tag) and is consumed exactly once.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "lattice.hpp"

namespace fockwalk {

enum class OffsetType : std::uint8_t { Zero, One, Two, OneZeroOneZero, OneZeroZeroOne };

inline constexpr std::size_t kOffsetTypes = 5;

inline std::string to_string(OffsetType t) {
    switch (t) {
    case OffsetType::Zero:
        return "offset0";
    case OffsetType::One:
        return "offset1";
    case OffsetType::Two:
        return "offset2";
    case OffsetType::OneZeroOneZero:
        return "offset1010";
    case OffsetType::OneZeroZeroOne:
        return "offset1001";
    }
    return "?";
}

struct OffsetKey {
    std::uint64_t diag = 0; ///< row-major linear index of the diag pattern
    std::uint32_t tag = 0;  ///< 0 for offset0, otherwise see OffsetCodec

    bool operator==(const OffsetKey &) const = default;
};

struct OffsetKeyHash {
    std::size_t operator()(const OffsetKey &k) const noexcept {
        std::uint64_t h = k.diag * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(k.tag) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

/// Packs (type, positions) into a tag for a lattice of Md coarse modes.
class OffsetCodec {
  public:
    explicit OffsetCodec(std::size_t modes) : md_(static_cast<std::uint32_t>(modes)) {}

    [[nodiscard]] std::uint32_t one(std::size_t position) const {
        return 1 + static_cast<std::uint32_t>(position);
    }
    [[nodiscard]] std::uint32_t two(std::size_t d) const {
        return 1 + 2 * md_ + static_cast<std::uint32_t>(d);
    }
    [[nodiscard]] std::uint32_t t1010(std::size_t d, std::size_t i) const {
        return 1 + 3 * md_ + static_cast<std::uint32_t>(d * md_ + i);
    }
    [[nodiscard]] std::uint32_t t1001(std::size_t d, std::size_t i) const {
        return 1 + 3 * md_ + md_ * md_ + static_cast<std::uint32_t>(d * md_ + i);
    }

    [[nodiscard]] OffsetType type(std::uint32_t tag) const {
        if (tag == 0) {
            return OffsetType::Zero;
        }
        if (tag <= 2 * md_) {
            return OffsetType::One;
        }
        if (tag <= 3 * md_) {
            return OffsetType::Two;
        }
        if (tag <= 3 * md_ + md_ * md_) {
            return OffsetType::OneZeroOneZero;
        }
        return OffsetType::OneZeroZeroOne;
    }

  private:
    std::uint32_t md_;
};

/**
 * Splits a coarse index into (diag, offset). `diag_strides` are the row-major
 * strides of the diag pattern tensor. Throws InvariantError for any shape
 * outside the taxonomy, including offset0110 (a lowered bra index before a
 * raised one), which the schedule never produces.
 */
inline OffsetKey classify_offset(std::span<const int> k, std::span<const std::size_t> diag_strides) {
    const std::size_t md = k.size() / 2;
    if (k.size() != 2 * md || diag_strides.size() != md) {
        throw InvariantError("coarse index has the wrong length");
    }
    const OffsetCodec codec(md);
    std::uint64_t lin = 0;
    std::array<std::size_t, 2> where{};
    std::array<int, 2> delta{};
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < md; ++i) {
        const int m = k[2 * i];
        const int n = k[2 * i + 1];
        if (m < 0 || n < 0) {
            throw InvariantError("negative coarse index " + detail::format_index(k));
        }
        lin += static_cast<std::uint64_t>(std::min(m, n)) * diag_strides[i];
        if (m != n) {
            if (nnz == 2) {
                throw InvariantError("index " + detail::format_index(k) + " is not diag + offset");
            }
            where[nnz] = i;
            delta[nnz] = m - n;
            ++nnz;
        }
    }
    OffsetKey key{lin, 0};
    if (nnz == 0) {
        return key;
    }
    if (nnz == 1) {
        if (delta[0] == 1) {
            key.tag = codec.one(2 * where[0]);
        } else if (delta[0] == -1) {
            key.tag = codec.one(2 * where[0] + 1);
        } else if (delta[0] == 2) {
            key.tag = codec.two(where[0]);
        } else {
            throw InvariantError("index " + detail::format_index(k) + " is not diag + offset");
        }
        return key;
    }
    if (delta[0] == 1 && delta[1] == 1) {
        key.tag = codec.t1010(where[0], where[1]);
    } else if (delta[0] == 1 && delta[1] == -1) {
        key.tag = codec.t1001(where[0], where[1]);
    } else if (delta[0] == -1 && delta[1] == 1) {
        throw InvariantError("offset0110 at " + detail::format_index(k));
    } else {
        throw InvariantError("index " + detail::format_index(k) + " is not diag + offset");
    }
    return key;
}

/**
 * Diagonal tensor plus the off-diagonal buffer. A cell holds `width` complex
 * values (a whole fine block, possibly of gradient bundles); width 0 runs the
 * bookkeeping only.
 *
 * Lookups are const and may run concurrently; write/consume/release must be
 * called from one thread.
 */
class BufferedStore {
  public:
    BufferedStore(std::vector<int> diag_shape, std::size_t width, bool evict)
        : shape_(std::move(diag_shape)), strides_(row_major_strides(shape_)), codec_(shape_.size()),
          width_(width), evict_(evict), diag_cells_(shape_size(shape_)),
          diag_(diag_cells_ * width_, cplx{}), diag_written_(diag_cells_, 0) {}

    [[nodiscard]] const std::vector<int> &diag_shape() const { return shape_; }
    [[nodiscard]] const std::vector<std::size_t> &diag_strides() const { return strides_; }
    [[nodiscard]] const OffsetCodec &codec() const { return codec_; }
    [[nodiscard]] std::size_t width() const { return width_; }
    [[nodiscard]] bool evicting() const { return evict_; }

    [[nodiscard]] OffsetKey key(std::span<const int> coarse) const {
        return classify_offset(coarse, strides_);
    }

    /// Allocates a zeroed cell. Writing a key twice is a scheduler bug.
    cplx *write(const OffsetKey &k) {
        const OffsetType t = codec_.type(k.tag);
        ++written_[static_cast<std::size_t>(t)];
        if (t == OffsetType::Zero) {
            if (diag_written_[k.diag] != 0) {
                throw InvariantError("diagonal cell " + std::to_string(k.diag) + " written twice");
            }
            diag_written_[k.diag] = 1;
            ++live_diag_;
            bump_peak();
            return diag_.data() + k.diag * width_;
        }
        auto [it, fresh] = offdiag_.try_emplace(k);
        if (!fresh) {
            throw InvariantError("off-diagonal cell (" + std::to_string(k.diag) + ", " +
                                 to_string(t) + ") written twice");
        }
        it->second.data.assign(width_, cplx{});
        ++live_offdiag_;
        bump_peak();
        return it->second.data.data();
    }

    /// Pointer to a stored cell or nullptr if it was never written (or evicted).
    [[nodiscard]] const cplx *lookup(const OffsetKey &k) const {
        if (k.tag == 0) {
            return diag_written_[k.diag] != 0 ? diag_.data() + k.diag * width_ : nullptr;
        }
        auto it = offdiag_.find(k);
        if (it == offdiag_.end() || it->second.consumed) {
            return nullptr;
        }
        return it->second.data.data();
    }

    /// Whether the cell is written and not yet consumed. Unlike lookup() this
    /// also works in bookkeeping-only mode.
    [[nodiscard]] bool contains(const OffsetKey &k) const {
        if (k.tag == 0) {
            return diag_written_[k.diag] != 0;
        }
        auto it = offdiag_.find(k);
        return it != offdiag_.end() && !it->second.consumed;
    }

    /// The single read-group read of an off-diagonal cell; diagonal cells persist.
    void consume(const OffsetKey &k) {
        if (k.tag == 0) {
            if (diag_written_[k.diag] == 0) {
                throw InvariantError("read of unwritten diagonal cell " + std::to_string(k.diag));
            }
            return;
        }
        drop(k, "read");
    }

    /// Drops a cell that is never going to be read again (a terminal pivot).
    void release(const OffsetKey &k) {
        if (k.tag == 0) {
            throw InvariantError("diagonal cells are never released");
        }
        drop(k, "released");
    }

    [[nodiscard]] std::size_t live_offdiag() const { return live_offdiag_; }
    [[nodiscard]] std::size_t live_diag() const { return live_diag_; }
    [[nodiscard]] std::size_t live_cells() const { return live_offdiag_ + live_diag_; }
    [[nodiscard]] std::size_t peak_cells() const { return peak_; }
    [[nodiscard]] std::size_t written(OffsetType t) const {
        return written_[static_cast<std::size_t>(t)];
    }
    [[nodiscard]] std::size_t written_total() const {
        std::size_t s = 0;
        for (std::size_t v : written_) {
            s += v;
        }
        return s;
    }

    /// Dense diagonal tensor (cells of `width` values); unwritten cells are 0.
    [[nodiscard]] const std::vector<cplx> &diagonal() const { return diag_; }
    [[nodiscard]] bool diagonal_written(std::size_t lin) const { return diag_written_[lin] != 0; }
    [[nodiscard]] std::size_t diagonal_cells() const { return diag_cells_; }

  private:
    struct Slot {
        std::vector<cplx> data;
        bool consumed = false;
    };

    void drop(const OffsetKey &k, const char *what) {
        auto it = offdiag_.find(k);
        if (it == offdiag_.end()) {
            throw InvariantError(std::string("off-diagonal cell ") + std::to_string(k.diag) + "/" +
                                 to_string(codec_.type(k.tag)) + " " + what + " but never written");
        }
        if (it->second.consumed) {
            throw InvariantError(std::string("off-diagonal cell ") + std::to_string(k.diag) + "/" +
                                 to_string(codec_.type(k.tag)) + " " + what + " twice");
        }
        if (evict_) {
            offdiag_.erase(it);
            --live_offdiag_;
        } else {
            it->second.consumed = true;
        }
    }

    void bump_peak() { peak_ = std::max(peak_, live_offdiag_ + live_diag_); }

    std::vector<int> shape_;
    std::vector<std::size_t> strides_;
    OffsetCodec codec_;
    std::size_t width_;
    bool evict_;
    std::size_t diag_cells_;
    std::vector<cplx> diag_;
    std::vector<std::uint8_t> diag_written_;
    std::unordered_map<OffsetKey, Slot, OffsetKeyHash> offdiag_;
    std::size_t live_offdiag_ = 0;
    std::size_t live_diag_ = 0;
    std::size_t peak_ = 0;
    std::array<std::size_t, kOffsetTypes> written_{};
};

} // namespace fockwalk
