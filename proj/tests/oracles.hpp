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

// Closed-form Fock amplitudes and distributions used as independent oracles,
// plus helpers shared by the test binaries.
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <random>
#include <vector>

#include "fockwalk/fockwalk.hpp"

namespace fockwalk::testing {

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Thermal state: p(n) = nbar^n / (nbar + 1)^(n + 1).
inline double thermal_p(double nbar, int n) {
    return std::pow(nbar, n) / std::pow(nbar + 1.0, n + 1);
}

/// Squeezed vacuum ket, phase 0: psi_{2n} = tanh(r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r).
inline double squeezed_ket(double r, int k) {
    if (k % 2 != 0) {
        return 0.0;
    }
    const int n = k / 2;
    return std::pow(std::tanh(r), n) * std::sqrt(factorial(2 * n)) /
           (std::pow(2.0, n) * factorial(n)) / std::sqrt(std::cosh(r));
}

inline double squeezed_p(double r, int k) { return squeezed_ket(r, k) * squeezed_ket(r, k); }

/// Coherent state ket in the gauge where psi_0 is real-positive.
inline cplx coherent_ket(cplx alpha, int n) {
    return std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(factorial(n));
}

inline double coherent_p(cplx alpha, int n) {
    return std::exp(-std::norm(alpha)) * std::pow(std::norm(alpha), n) / factorial(n);
}

/// Two-mode squeezed vacuum: |psi_{nn}|^2 = tanh(r)^(2n) / cosh(r)^2.
inline double tmsv_p(double r, int n) {
    return std::pow(std::tanh(r), 2 * n) / std::pow(std::cosh(r), 2);
}

/// Photon-number distribution of a lossy squeezer: mean eta sinh^2 r.
inline double lossy_squeezer_mean(double r, double eta) { return eta * std::sinh(r) * std::sinh(r); }

/// Squeezers r and r e^{i pi} on modes 1, 2 mixed on a 50:50 beamsplitter:
/// a two-mode squeezed vacuum.
inline CircuitSpec tmsv_spec(double r, int cutoff) {
    CircuitSpec s = CircuitSpec::vacuum(2, cutoff);
    s.squeeze_params = {{r, 0.0}, {r, M_PI}};
    s.interferometer = beamsplitter_unitary(2, 0, 1, M_PI / 4);
    return s;
}

struct RandomCircuit {
    CircuitSpec spec;
    std::uint64_t seed = 0;
};

/// Seeded random circuit: squeezing r in [0.1, 0.6], Haar interferometer,
/// uniform loss `eta`, optional displacement of size <= 0.3.
inline CircuitSpec random_spec(int M, const std::vector<int> &cutoffs, double eta, bool displaced,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CircuitSpec s = CircuitSpec::vacuum(M, 1);
    s.cutoffs = cutoffs;
    for (auto &sq : s.squeeze_params) {
        sq = {0.1 + 0.5 * u(rng), 2.0 * M_PI * u(rng)};
    }
    s.interferometer = haar_unitary(M, rng);
    s.loss_transmissivity.assign(M, eta);
    if (displaced) {
        for (auto &a : s.displacements) {
            a = std::polar(0.3 * u(rng), 2.0 * M_PI * u(rng));
        }
    }
    return s;
}

/// Random (A, b) of dimension D with spectral radius well below 1. Values are
/// not tied to any physical state; the recurrence does not care.
inline GaussianData random_params(int D, Representation rep, bool with_b, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    GaussianData p;
    p.representation = rep;
    p.modes = rep == Representation::DensityMatrix ? D / 2 : D;
    p.A = CMatrix(D, D);
    p.b = CVector::Zero(D);
    for (int i = 0; i < D; ++i) {
        for (int j = 0; j < D; ++j) {
            p.A(i, j) = cplx(g(rng), g(rng)) * (0.3 / D);
        }
        if (with_b) {
            p.b(i) = cplx(g(rng), g(rng)) * 0.3;
        }
    }
    p.G0 = cplx(0.7 + 0.1 * g(rng), 0.1 * g(rng));
    p.zero_displacement = !with_b;
    return p;
}

/// The density-matrix block G[m_u..., n_u..., p p ...] of a full fill, for
/// comparison with conditional blocks (undetected given 0-based, ascending).
inline cplx full_fill_entry(const DenseTensor &rho, const std::vector<int> &undetected,
                            const std::vector<int> &detected, std::span<const int> pattern,
                            std::span<const int> block_index) {
    FockIndex k(rho.rank());
    for (std::size_t i = 0; i < undetected.size(); ++i) {
        k[2 * undetected[i]] = block_index[2 * i];
        k[2 * undetected[i] + 1] = block_index[2 * i + 1];
    }
    for (std::size_t i = 0; i < detected.size(); ++i) {
        k[2 * detected[i]] = k[2 * detected[i] + 1] = pattern[i];
    }
    return rho(k);
}

inline std::vector<int> unravel(std::size_t lin, const std::vector<int> &shape) {
    std::vector<int> out(shape.size());
    const auto st = row_major_strides(shape);
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out[i] = static_cast<int>(lin / st[i]);
        lin %= st[i];
    }
    return out;
}

/// Largest |block - full-fill slice| over every pattern and block cell.
inline double conditional_vs_full(const ConditionalBatch &b, const DenseTensor &rho) {
    double worst = 0.0;
    for (std::size_t p = 0; p < b.patterns(); ++p) {
        const auto pat = unravel(p, b.pattern_shape);
        for (std::size_t c = 0; c < b.block_cells; ++c) {
            const auto bi = unravel(c, b.block_shape);
            const cplx ref = full_fill_entry(rho, b.undetected, b.detected, pat, bi);
            worst = std::max(worst, std::abs(b.blocks[p * b.block_cells + c] - ref));
        }
    }
    return worst;
}

/// Largest |p(n) - full-fill diagonal|.
inline double gbs_vs_full(const ProbabilityTensor &p, const DenseTensor &rho,
                          const std::vector<int> &cutoffs) {
    const auto ref = diagonal_of_density(rho, cutoffs);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        worst = std::max(worst, std::abs(p.values[i] - ref[i]));
    }
    return worst;
}

/// Relative error with an absolute floor, as used by the gradient checks.
inline double rel_err(cplx got, cplx want, double floor = 1e-10) {
    return std::abs(got - want) / std::max(std::abs(want), floor);
}

/// Central-difference check of gradient bundles: every output value against
/// every b_m and A_mn, accepted when |got - fd| <= floor + rel |fd|.
struct FdReport {
    std::size_t checked = 0;
    std::size_t mismatches = 0;
    double worst = 0.0; ///< largest |got - fd| / (floor + rel |fd|)
    std::string first;
};

using FdValues = std::function<std::vector<cplx>(const GaussianData &)>;

inline FdReport fd_check(const GaussianData &p, const std::vector<cplx> &bundles, const FdValues &values,
                         double step = 1e-6, double rel = 1e-5, double floor = 1e-10) {
    const int D = p.dim();
    const std::size_t width = bundle_width(D, true);
    const std::size_t cells = bundles.size() / width;
    FdReport rep;
    auto compare = [&](const GaussianData &plus, const GaussianData &minus, std::size_t comp,
                       const std::string &label) {
        const auto vp = values(plus);
        const auto vm = values(minus);
        for (std::size_t c = 0; c < cells; ++c) {
            const cplx fd = (vp[c] - vm[c]) / (2.0 * step);
            const cplx got = bundles[c * width + comp];
            const double e = std::abs(got - fd) / (floor + rel * std::abs(fd));
            rep.worst = std::max(rep.worst, e);
            ++rep.checked;
            if (e > 1.0 && rep.mismatches++ == 0) {
                std::ostringstream ss;
                ss << "cell " << c << " " << label << ": bundle " << got << " vs fd " << fd;
                rep.first = ss.str();
            }
        }
    };
    for (int m = 0; m < D; ++m) {
        GaussianData plus = p;
        GaussianData minus = p;
        plus.b(m) += step;
        minus.b(m) -= step;
        plus.zero_displacement = minus.zero_displacement = false;
        compare(plus, minus, grad_db_index(static_cast<std::size_t>(m)), "db" + std::to_string(m));
        for (int n = 0; n < D; ++n) {
            GaussianData ap = p;
            GaussianData am = p;
            ap.A(m, n) += step;
            am.A(m, n) -= step;
            compare(ap, am,
                    grad_dA_index(static_cast<std::size_t>(m), static_cast<std::size_t>(n),
                                  static_cast<std::size_t>(D)),
                    "dA" + std::to_string(m) + std::to_string(n));
        }
    }
    return rep;
}

/// Values of a plain (non-checkered) full fill, for finite differences.
inline std::vector<cplx> fill_values(const GaussianData &p, const CutoffSpec &b) {
    FillOptions o;
    o.allow_checkered = false;
    return fill_full(p, b, o).tensor.data();
}

} // namespace fockwalk::testing
