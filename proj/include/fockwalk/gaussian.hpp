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
 * @file gaussian.hpp
 * Pre-detector Gaussian states and their recurrence parameters (A, b, G0).
 *
 * Conventions
 * -----------
 * Complex basis ordering is (a_1..a_M, a†_1..a†_M) and the vacuum has
 * sigma = ½·1. Quadratures are x = (a + a†)/√2, p = (a - a†)/(i√2), so the
 * basis change from a real covariance V (ordering x_1..x_M, p_1..p_M) is
 * sigma = W V W† with W = (1/√2)[[1, i1], [1, -i1]].
 *
 * A squeezer with parameters (r, phase) acts on one mode as the Bogoliubov map
 * a -> a cosh r + a† e^{i phase} sinh r. With this sign the single-mode ket
 * parameter is A_psi = e^{i phase} tanh r.
 *
 * Fock-index ordering of density-matrix parameters
 * ------------------------------------------------
 * A density-matrix Fock index is interleaved per mode, k = [m_1, n_1, m_2,
 * n_2, ...] with G_k = <m_1 m_2 ..| rho |n_1 n_2 ..>. The block formulas
 * A = P sigma_- sigma_+^{-1} and b = P sigma_+^{-1} mu are produced in the
 * block ordering (a.., a†..); the a† half drives the bra index m_i and the a
 * half drives the ket index n_i. GaussianData stores A and b already permuted
 * into the interleaved Fock ordering so walkers index them directly.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "core.hpp"

namespace fockwalk {

inline constexpr double kUnitaryTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPurityTolerance = 1e-9;

struct SqueezeParam {
    double r = 0.0;
    double phase = 0.0;
};

/// How the photon-number lattice is bounded when the spec is run.
struct CutoffMode {
    enum class Kind { Local, GlobalPhotons, ProbabilityMass };
    Kind kind = Kind::Local;
    int n_max = 0;          // GlobalPhotons
    double threshold = 0.0; // ProbabilityMass

    static CutoffMode local() { return {}; }
    static CutoffMode global_photons(int n) { return {Kind::GlobalPhotons, n, 0.0}; }
    static CutoffMode probability_mass(double x) { return {Kind::ProbabilityMass, 0, x}; }
};

/// User-facing circuit description: squeezed vacua, an interferometer, loss,
/// displacements and the PNR detector layout. detected_modes are 1-based.
struct CircuitSpec {
    int modes = 0;
    std::vector<SqueezeParam> squeeze_params;
    CMatrix interferometer;
    std::vector<double> loss_transmissivity;
    std::vector<cplx> displacements;
    std::vector<int> cutoffs;
    std::vector<int> detected_modes;
    CutoffMode cutoff_mode;

    /// Throws ValidationError on the first violated invariant.
    void validate() const {
        const auto M = static_cast<std::size_t>(modes);
        if (modes < 1) {
            throw ValidationError("modes must be a positive integer");
        }
        if (squeeze_params.size() != M) {
            throw ValidationError("squeeze_params must have one entry per mode");
        }
        if (interferometer.rows() != modes || interferometer.cols() != modes) {
            throw ValidationError("interferometer must be an M x M matrix");
        }
        const CMatrix gram = interferometer * interferometer.adjoint();
        const double err = (gram - CMatrix::Identity(modes, modes)).cwiseAbs().maxCoeff();
        if (!(err <= kUnitaryTolerance)) {
            throw ValidationError("interferometer is not unitary (max |UU^dag - 1| = " +
                                  std::to_string(err) + ")");
        }
        if (loss_transmissivity.size() != M) {
            throw ValidationError("loss_transmissivity must have one entry per mode");
        }
        for (double eta : loss_transmissivity) {
            if (!(eta >= 0.0 && eta <= 1.0)) {
                throw ValidationError("loss transmissivity outside [0, 1]");
            }
        }
        if (displacements.size() != M) {
            throw ValidationError("displacements must have one entry per mode");
        }
        if (cutoffs.size() != M) {
            throw ValidationError("cutoffs must have one entry per mode");
        }
        for (int c : cutoffs) {
            if (c < 1) {
                throw ValidationError("cutoffs must be >= 1");
            }
        }
        std::set<int> seen;
        for (int d : detected_modes) {
            if (d < 1 || d > modes) {
                throw ValidationError("detected mode " + std::to_string(d) + " outside 1..M");
            }
            if (!seen.insert(d).second) {
                throw ValidationError("detected mode " + std::to_string(d) + " listed twice");
            }
        }
        if (cutoff_mode.kind == CutoffMode::Kind::GlobalPhotons && cutoff_mode.n_max < 1) {
            throw ValidationError("GlobalPhotons needs n_max >= 1");
        }
        if (cutoff_mode.kind == CutoffMode::Kind::ProbabilityMass &&
            !(cutoff_mode.threshold > 0.0 && cutoff_mode.threshold < 1.0)) {
            throw ValidationError("ProbabilityMass threshold must lie in (0, 1)");
        }
    }

    [[nodiscard]] bool lossless() const {
        return std::all_of(loss_transmissivity.begin(), loss_transmissivity.end(),
                           [](double eta) { return eta == 1.0; });
    }

    [[nodiscard]] bool displaced() const {
        return std::any_of(displacements.begin(), displacements.end(),
                           [](cplx a) { return a != cplx{0.0, 0.0}; });
    }

    [[nodiscard]] bool all_detected() const {
        return static_cast<int>(detected_modes.size()) == modes;
    }

    /// 0-based undetected modes in ascending order.
    [[nodiscard]] std::vector<int> undetected_modes() const {
        std::vector<int> out;
        for (int i = 1; i <= modes; ++i) {
            if (std::find(detected_modes.begin(), detected_modes.end(), i) ==
                detected_modes.end()) {
                out.push_back(i - 1);
            }
        }
        return out;
    }

    /// A spec with M vacuum inputs, identity interferometer and no loss.
    static CircuitSpec vacuum(int M, int cutoff) {
        CircuitSpec s;
        s.modes = M;
        s.squeeze_params.assign(M, {});
        s.interferometer = CMatrix::Identity(M, M);
        s.loss_transmissivity.assign(M, 1.0);
        s.displacements.assign(M, cplx{});
        s.cutoffs.assign(M, cutoff);
        for (int i = 1; i <= M; ++i) {
            s.detected_modes.push_back(i);
        }
        return s;
    }
};

/// Pre-detector Gaussian state in the complex (a/a†) basis.
struct ComplexGaussianState {
    CMatrix sigma;
    CVector mu;
    int modes = 0;

    [[nodiscard]] bool is_hermitian(double tol = kHermitianTolerance) const {
        return (sigma - sigma.adjoint()).cwiseAbs().maxCoeff() <= tol;
    }

    /// 1/sqrt(det(2 sigma)); equals 1 exactly for pure states.
    [[nodiscard]] double purity() const {
        const cplx det = (2.0 * sigma).determinant();
        return 1.0 / std::sqrt(det.real());
    }

    [[nodiscard]] double mean_photon_number(int mode) const {
        return sigma(mode, mode).real() - 0.5 + std::norm(mu(mode));
    }
};

inline ComplexGaussianState vacuum_state(int M) {
    return {0.5 * CMatrix::Identity(2 * M, 2 * M), CVector::Zero(2 * M), M};
}

inline ComplexGaussianState thermal_state(const std::vector<double> &nbar) {
    const int M = static_cast<int>(nbar.size());
    ComplexGaussianState s = vacuum_state(M);
    for (int i = 0; i < M; ++i) {
        s.sigma(i, i) = nbar[i] + 0.5;
        s.sigma(M + i, M + i) = nbar[i] + 0.5;
    }
    return s;
}

inline ComplexGaussianState coherent_state(const std::vector<cplx> &alpha) {
    const int M = static_cast<int>(alpha.size());
    ComplexGaussianState s = vacuum_state(M);
    for (int i = 0; i < M; ++i) {
        s.mu(i) = alpha[i];
        s.mu(M + i) = std::conj(alpha[i]);
    }
    return s;
}

/// W = (1/√2)[[1, i1], [1, -i1]]: maps (x.., p..) to (a.., a†..).
inline CMatrix quadrature_to_complex(int M) {
    const double s = 1.0 / std::numbers::sqrt2;
    CMatrix W = CMatrix::Zero(2 * M, 2 * M);
    for (int i = 0; i < M; ++i) {
        W(i, i) = s;
        W(i, M + i) = cplx{0.0, s};
        W(M + i, i) = s;
        W(M + i, M + i) = cplx{0.0, -s};
    }
    return W;
}

inline CMatrix complex_from_quadrature(const RMatrix &V) {
    const int M = static_cast<int>(V.rows() / 2);
    const CMatrix W = quadrature_to_complex(M);
    return W * V.cast<cplx>() * W.adjoint();
}

inline RMatrix quadrature_from_complex(const CMatrix &sigma) {
    const int M = static_cast<int>(sigma.rows() / 2);
    const CMatrix W = quadrature_to_complex(M);
    return (W.adjoint() * sigma * W).real();
}

/// Haar-random M x M unitary (QR of a Ginibre matrix with phase fix).
template <typename Rng>
CMatrix haar_unitary(int M, Rng &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix Z(M, M);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            Z(i, j) = cplx{g(rng), g(rng)} / std::numbers::sqrt2;
        }
    }
    Eigen::HouseholderQR<CMatrix> qr(Z);
    CMatrix Q = qr.householderQ();
    const CMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < M; ++j) {
        const cplx d = R(j, j);
        Q.col(j) *= d / std::abs(d);
    }
    // Re-orthonormalise to push UU† - 1 down to a few ulps.
    Eigen::HouseholderQR<CMatrix> qr2(Q);
    CMatrix Q2 = qr2.householderQ();
    const CMatrix R2 = qr2.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < M; ++j) {
        Q2.col(j) *= R2(j, j) / std::abs(R2(j, j));
    }
    return Q2;
}

/// Beamsplitter between modes i and j (0-based) embedded in an M x M identity.
inline CMatrix beamsplitter_unitary(int M, int i, int j, double theta, double phi = 0.0) {
    CMatrix U = CMatrix::Identity(M, M);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const cplx e = std::polar(1.0, phi);
    U(i, i) = c;
    U(i, j) = -std::conj(e) * s;
    U(j, i) = e * s;
    U(j, j) = c;
    return U;
}

/// Vacuum -> squeezers -> interferometer -> loss -> displacements.
inline ComplexGaussianState build_complex_state(const CircuitSpec &spec) {
    spec.validate();
    const int M = spec.modes;
    ComplexGaussianState st = vacuum_state(M);

    CMatrix S = CMatrix::Identity(2 * M, 2 * M);
    for (int i = 0; i < M; ++i) {
        const auto [r, phase] = spec.squeeze_params[i];
        if (r == 0.0) {
            continue;
        }
        const cplx e = std::polar(1.0, phase);
        S(i, i) = std::cosh(r);
        S(i, M + i) = e * std::sinh(r);
        S(M + i, i) = std::conj(e) * std::sinh(r);
        S(M + i, M + i) = std::cosh(r);
    }
    CMatrix sigma = S * st.sigma * S.adjoint();

    CMatrix T = CMatrix::Zero(2 * M, 2 * M);
    T.topLeftCorner(M, M) = spec.interferometer;
    T.bottomRightCorner(M, M) = spec.interferometer.conjugate();
    sigma = T * sigma * T.adjoint();

    if (!spec.lossless()) {
        CVector root(2 * M);
        for (int i = 0; i < M; ++i) {
            root(i) = root(M + i) = std::sqrt(spec.loss_transmissivity[i]);
        }
        for (int r = 0; r < 2 * M; ++r) {
            for (int c = 0; c < 2 * M; ++c) {
                sigma(r, c) *= root(r) * root(c);
            }
            sigma(r, r) += 0.5 * (1.0 - std::norm(root(r)));
        }
    }
    // Symmetrise away round-off so downstream Hermiticity checks are exact.
    st.sigma = 0.5 * (sigma + sigma.adjoint());

    for (int i = 0; i < M; ++i) {
        st.mu(i) = spec.displacements[i];
        st.mu(M + i) = std::conj(spec.displacements[i]);
    }
    return st;
}

/// Recurrence parameters of a Gaussian state, in interleaved Fock ordering for
/// density matrices (see file comment).
struct GaussianData {
    CMatrix A;
    CVector b;
    cplx G0{1.0, 0.0};
    Representation representation = Representation::DensityMatrix;
    int modes = 0;
    bool zero_displacement = true;
    double spectral_radius = 0.0;

    [[nodiscard]] int dim() const { return static_cast<int>(b.size()); }
    [[nodiscard]] bool physical() const { return spectral_radius < 1.0; }
};

namespace detail {

/// Fock position f -> block index: bra m_i <- a†_i, ket n_i <- a_i.
inline std::vector<int> fock_to_block_order(int M) {
    std::vector<int> perm(2 * M);
    for (int i = 0; i < M; ++i) {
        perm[2 * i] = M + i;
        perm[2 * i + 1] = i;
    }
    return perm;
}

inline double spectral_radius(const CMatrix &A) {
    if (A.size() == 0) {
        return 0.0;
    }
    Eigen::ComplexEigenSolver<CMatrix> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace detail

inline GaussianData to_density_params(const ComplexGaussianState &state) {
    const int M = state.modes;
    const int D = 2 * M;
    const CMatrix id = CMatrix::Identity(D, D);
    const CMatrix sigma_plus = state.sigma + 0.5 * id;
    const CMatrix sigma_minus = state.sigma - 0.5 * id;

    Eigen::FullPivLU<CMatrix> lu(sigma_plus);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
        throw ValidationError("degenerate Gaussian state: sigma + 1/2 is singular");
    }
    const CMatrix inv = lu.inverse();

    CMatrix P = CMatrix::Zero(D, D);
    P.topRightCorner(M, M).setIdentity();
    P.bottomLeftCorner(M, M).setIdentity();

    const CMatrix A_block = P * sigma_minus * inv;
    const bool zero_mu = (state.mu.array() == cplx{0.0, 0.0}).all();
    const CVector b_block = zero_mu ? CVector::Zero(D) : CVector(P * inv * state.mu);

    const double det = lu.determinant().real();
    double exponent = 0.0;
    if (!zero_mu) {
        exponent = -0.5 * (state.mu.adjoint() * inv * state.mu)(0, 0).real();
    }

    GaussianData out;
    out.representation = Representation::DensityMatrix;
    out.modes = M;
    out.zero_displacement = zero_mu;
    out.G0 = std::exp(exponent) / std::sqrt(det);
    out.A.resize(D, D);
    out.b.resize(D);
    const auto perm = detail::fock_to_block_order(M);
    for (int f = 0; f < D; ++f) {
        out.b(f) = b_block(perm[f]);
        for (int g = 0; g < D; ++g) {
            out.A(f, g) = A_block(perm[f], perm[g]);
        }
    }
    out.spectral_radius = detail::spectral_radius(out.A);
    return out;
}

inline GaussianData to_statevector_params(const ComplexGaussianState &state) {
    if (std::abs(state.purity() - 1.0) > kPurityTolerance) {
        throw ValidationError("state is mixed (purity " + std::to_string(state.purity()) +
                              "); use the density-matrix path");
    }
    const GaussianData rho = to_density_params(state);
    const int M = state.modes;
    GaussianData psi;
    psi.representation = Representation::StateVector;
    psi.modes = M;
    psi.zero_displacement = rho.zero_displacement;
    psi.A.resize(M, M);
    psi.b.resize(M);
    double mismatch = 0.0;
    for (int i = 0; i < M; ++i) {
        psi.b(i) = rho.b(2 * i);
        mismatch = std::max(mismatch, std::abs(rho.b(2 * i + 1) - std::conj(psi.b(i))));
        for (int j = 0; j < M; ++j) {
            psi.A(i, j) = rho.A(2 * i, 2 * j);
            mismatch =
                std::max(mismatch, std::abs(rho.A(2 * i + 1, 2 * j + 1) - std::conj(psi.A(i, j))));
            mismatch = std::max(mismatch, std::abs(rho.A(2 * i, 2 * j + 1)));
            mismatch = std::max(mismatch, std::abs(rho.A(2 * i + 1, 2 * j)));
        }
    }
    if (mismatch > kPurityTolerance) {
        throw InvariantError("pure-state A_rho is not a conjugate direct sum (mismatch " +
                             std::to_string(mismatch) + ")");
    }
    psi.G0 = std::sqrt(rho.G0.real());
    psi.spectral_radius = detail::spectral_radius(psi.A);
    return psi;
}

/// Builds density-matrix parameters A_psi* (+) A_psi from ket parameters,
/// interleaved per mode.
inline GaussianData direct_sum_density(const GaussianData &psi) {
    const int M = psi.modes;
    GaussianData rho;
    rho.representation = Representation::DensityMatrix;
    rho.modes = M;
    rho.zero_displacement = psi.zero_displacement;
    rho.A = CMatrix::Zero(2 * M, 2 * M);
    rho.b.resize(2 * M);
    for (int i = 0; i < M; ++i) {
        rho.b(2 * i) = psi.b(i);
        rho.b(2 * i + 1) = std::conj(psi.b(i));
        for (int j = 0; j < M; ++j) {
            rho.A(2 * i, 2 * j) = psi.A(i, j);
            rho.A(2 * i + 1, 2 * j + 1) = std::conj(psi.A(i, j));
        }
    }
    rho.G0 = psi.G0 * std::conj(psi.G0);
    rho.spectral_radius = detail::spectral_radius(rho.A);
    return rho;
}

/// Reorders modes so that mode order[j] becomes mode j.
inline ComplexGaussianState permute_modes(const ComplexGaussianState &s,
                                          const std::vector<int> &order) {
    const int M = s.modes;
    std::vector<int> idx(2 * M);
    for (int j = 0; j < M; ++j) {
        idx[j] = order[j];
        idx[M + j] = M + order[j];
    }
    ComplexGaussianState out{CMatrix(2 * M, 2 * M), CVector(2 * M), M};
    for (int r = 0; r < 2 * M; ++r) {
        out.mu(r) = s.mu(idx[r]);
        for (int c = 0; c < 2 * M; ++c) {
            out.sigma(r, c) = s.sigma(idx[r], idx[c]);
        }
    }
    return out;
}

/// Marginal state on the listed modes (partial trace of a Gaussian state).
inline ComplexGaussianState reduced_state(const ComplexGaussianState &s,
                                          const std::vector<int> &keep) {
    const int M = s.modes;
    const int K = static_cast<int>(keep.size());
    std::vector<int> idx(2 * K);
    for (int j = 0; j < K; ++j) {
        idx[j] = keep[j];
        idx[K + j] = M + keep[j];
    }
    ComplexGaussianState out{CMatrix(2 * K, 2 * K), CVector(2 * K), K};
    for (int r = 0; r < 2 * K; ++r) {
        out.mu(r) = s.mu(idx[r]);
        for (int c = 0; c < 2 * K; ++c) {
            out.sigma(r, c) = s.sigma(idx[r], idx[c]);
        }
    }
    return out;
}

} // namespace fockwalk
