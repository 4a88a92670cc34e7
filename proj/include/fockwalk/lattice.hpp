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
 * @file lattice.hpp
 * Fock-index arithmetic, cutoff predicates and the dense amplitude tensor.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "core.hpp"

namespace fockwalk {

/// Integer lattice coordinate of a Fock amplitude.
class FockIndex {
  public:
    FockIndex() = default;
    explicit FockIndex(std::size_t dim) : k_(dim, 0) {}
    FockIndex(std::initializer_list<int> k) : k_(k) {}
    explicit FockIndex(std::vector<int> k) : k_(std::move(k)) {}

    [[nodiscard]] std::size_t size() const { return k_.size(); }
    int &operator[](std::size_t i) { return k_[i]; }
    int operator[](std::size_t i) const { return k_[i]; }
    [[nodiscard]] const std::vector<int> &values() const { return k_; }
    [[nodiscard]] auto begin() const { return k_.begin(); }
    [[nodiscard]] auto end() const { return k_.end(); }

    [[nodiscard]] FockIndex incremented(std::size_t i) const {
        FockIndex r = *this;
        ++r.k_[i];
        return r;
    }
    /// May produce a negative entry; such an index denotes a zero amplitude.
    [[nodiscard]] FockIndex decremented(std::size_t i) const {
        FockIndex r = *this;
        --r.k_[i];
        return r;
    }
    [[nodiscard]] bool has_negative() const {
        return std::any_of(k_.begin(), k_.end(), [](int v) { return v < 0; });
    }

    auto operator<=>(const FockIndex &) const = default;
    bool operator==(const FockIndex &) const = default;

  private:
    std::vector<int> k_;
};

inline int weight(const FockIndex &k) { return std::accumulate(k.begin(), k.end(), 0); }

/// Lattice bound. Local uses per-mode cutoffs (both indices of a density-matrix
/// pair are bounded by the same cutoff); GlobalWeight bounds w(k) < w_max;
/// ProbabilityMass walks until the accumulated diagonal probability reaches
/// the threshold, with `cutoffs` acting as the storage cap.
struct CutoffSpec {
    enum class Kind { Local, GlobalWeight, ProbabilityMass };
    Kind kind = Kind::Local;
    std::vector<int> cutoffs;
    int w_max = 0;
    double threshold = 0.0;

    static CutoffSpec local(std::vector<int> c) { return {Kind::Local, std::move(c), 0, 0.0}; }
    static CutoffSpec global_weight(int w) { return {Kind::GlobalWeight, {}, w, 0.0}; }
    /// w_max = N_max for kets and 2 N_max for density matrices.
    static CutoffSpec global_photons(int n_max, Representation rep) {
        return global_weight(rep == Representation::StateVector ? n_max : 2 * n_max);
    }
    static CutoffSpec probability_mass(double x, std::vector<int> cap) {
        return {Kind::ProbabilityMass, std::move(cap), 0, x};
    }

    /// Per-coordinate exclusive upper bound of a D-dimensional index.
    [[nodiscard]] std::vector<int> extents(std::size_t D) const {
        if (kind == Kind::GlobalWeight) {
            return std::vector<int>(D, std::max(w_max, 1));
        }
        if (cutoffs.size() == D) {
            return cutoffs;
        }
        if (2 * cutoffs.size() == D) {
            std::vector<int> out(D);
            for (std::size_t i = 0; i < cutoffs.size(); ++i) {
                out[2 * i] = out[2 * i + 1] = cutoffs[i];
            }
            return out;
        }
        throw ValidationError("cutoff list does not match the lattice dimension");
    }

    [[nodiscard]] bool admits(const FockIndex &k) const {
        if (k.has_negative()) {
            return false;
        }
        if (kind == Kind::GlobalWeight) {
            return weight(k) < w_max;
        }
        const auto ext = extents(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (k[i] >= ext[i]) {
                return false;
            }
        }
        return true;
    }

    /// Largest weight that can satisfy the bound, plus one.
    [[nodiscard]] int weight_limit(std::size_t D) const {
        if (kind == Kind::GlobalWeight) {
            return w_max;
        }
        int s = 0;
        for (int e : extents(D)) {
            s += e - 1;
        }
        return s + 1;
    }
};

namespace detail {

/// Calls f(k) for every k with sum w and 0 <= k_i < ext_i, lexicographically.
template <typename F>
void for_each_composition(int w, std::span<const int> ext, F &&f) {
    const std::size_t D = ext.size();
    if (D == 0) {
        if (w == 0) {
            std::vector<int> empty;
            f(empty);
        }
        return;
    }
    std::vector<int> suffix_cap(D + 1, 0);
    for (std::size_t i = D; i-- > 0;) {
        suffix_cap[i] = suffix_cap[i + 1] + ext[i] - 1;
    }
    if (w < 0 || w > suffix_cap[0]) {
        return;
    }
    std::vector<int> k(D, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int rem) {
        if (pos + 1 == D) {
            if (rem < ext[pos]) {
                k[pos] = rem;
                f(k);
            }
            return;
        }
        const int lo = std::max(0, rem - suffix_cap[pos + 1]);
        const int hi = std::min(ext[pos] - 1, rem);
        for (int v = lo; v <= hi; ++v) {
            k[pos] = v;
            rec(pos + 1, rem - v);
        }
    };
    rec(0, w);
}

} // namespace detail

/// All in-bound D-dimensional indices of weight w, in lexicographic order.
inline std::vector<FockIndex> indices_of_weight(int w, const CutoffSpec &bounds, std::size_t D) {
    std::vector<FockIndex> out;
    auto ext = bounds.extents(D);
    if (bounds.kind == CutoffSpec::Kind::GlobalWeight && w >= bounds.w_max) {
        return out;
    }
    detail::for_each_composition(w, ext, [&](const std::vector<int> &k) { out.emplace_back(k); });
    return out;
}

/// Paired density-matrix indices [a,a,b,b,...] with a+b+... = S and each
/// photon number below its mode cutoff, in lexicographic order.
inline std::vector<FockIndex> diagonal_indices_of_weight(int S, std::span<const int> cutoffs) {
    std::vector<FockIndex> out;
    detail::for_each_composition(S, cutoffs, [&](const std::vector<int> &n) {
        FockIndex k(2 * n.size());
        for (std::size_t i = 0; i < n.size(); ++i) {
            k[2 * i] = k[2 * i + 1] = n[i];
        }
        out.push_back(std::move(k));
    });
    return out;
}

/// Row-major strides for a shape.
inline std::vector<std::size_t> row_major_strides(std::span<const int> shape) {
    std::vector<std::size_t> s(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) {
        s[i - 1] = s[i] * static_cast<std::size_t>(shape[i]);
    }
    return s;
}

inline std::size_t shape_size(std::span<const int> shape) {
    std::size_t n = 1;
    for (int e : shape) {
        n *= static_cast<std::size_t>(e);
    }
    return n;
}

/// Dense row-major tensor of cells; each cell holds `width` complex values
/// (1 for plain amplitudes, 1 + D + D^2 for gradient bundles). Unwritten cells
/// are exactly zero and flagged as such.
class DenseTensor {
  public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<int> shape, std::size_t width = 1)
        : shape_(std::move(shape)), strides_(row_major_strides(shape_)), width_(width),
          cells_(shape_size(shape_)), data_(cells_ * width_, cplx{}), written_(cells_, 0) {}

    [[nodiscard]] const std::vector<int> &shape() const { return shape_; }
    [[nodiscard]] std::size_t rank() const { return shape_.size(); }
    [[nodiscard]] std::size_t width() const { return width_; }
    [[nodiscard]] std::size_t cells() const { return cells_; }
    [[nodiscard]] const std::vector<std::size_t> &strides() const { return strides_; }

    [[nodiscard]] bool contains(const FockIndex &k) const {
        if (k.size() != shape_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (k[i] < 0 || k[i] >= shape_[i]) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] std::size_t linear(const FockIndex &k) const {
        std::size_t off = 0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            off += static_cast<std::size_t>(k[i]) * strides_[i];
        }
        return off;
    }

    [[nodiscard]] FockIndex unravel(std::size_t lin) const {
        FockIndex k(shape_.size());
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            k[i] = static_cast<int>(lin / strides_[i]);
            lin %= strides_[i];
        }
        return k;
    }

    cplx *cell(std::size_t lin) { return data_.data() + lin * width_; }
    [[nodiscard]] const cplx *cell(std::size_t lin) const { return data_.data() + lin * width_; }

    /// Scalar value of the cell (component 0).
    [[nodiscard]] cplx operator()(const FockIndex &k) const {
        return contains(k) ? data_[linear(k) * width_] : cplx{};
    }
    [[nodiscard]] cplx value(std::size_t lin) const { return data_[lin * width_]; }

    [[nodiscard]] bool written(std::size_t lin) const { return written_[lin] != 0; }
    void mark_written(std::size_t lin) { written_[lin] = 1; }
    [[nodiscard]] std::size_t written_count() const {
        return static_cast<std::size_t>(std::count(written_.begin(), written_.end(), 1));
    }

    [[nodiscard]] const std::vector<cplx> &data() const { return data_; }
    std::vector<cplx> &data() { return data_; }

    /// Copy of component c of every cell.
    [[nodiscard]] DenseTensor component(std::size_t c) const {
        DenseTensor out(shape_, 1);
        for (std::size_t i = 0; i < cells_; ++i) {
            out.data_[i] = data_[i * width_ + c];
            out.written_[i] = written_[i];
        }
        return out;
    }

  private:
    std::vector<int> shape_;
    std::vector<std::size_t> strides_;
    std::size_t width_ = 1;
    std::size_t cells_ = 0;
    std::vector<cplx> data_;
    std::vector<std::uint8_t> written_;
};

} // namespace fockwalk
