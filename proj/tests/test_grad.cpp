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

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace fockwalk;
using namespace fockwalk::testing;

namespace {

constexpr double kStep = 1e-6;
constexpr double kRel = 1e-5;
constexpr double kFloor = 1e-10;

bool close(cplx got, cplx want) { return std::abs(got - want) <= kFloor + kRel * std::abs(want); }

using Values = FdValues;

int check_against_fd(const GaussianData &p, const std::vector<cplx> &bundles, const Values &values,
                     const std::string &what) {
    const FdReport r = fd_check(p, bundles, values, kStep, kRel, kFloor);
    if (r.mismatches > 0) {
        ADD_FAILURE() << what << ": " << r.mismatches << " of " << r.checked << " mismatched, first "
                      << r.first;
    }
    return static_cast<int>(r.mismatches);
}

} // namespace

TEST(Grad, VacuumFirstPivotDbIsKronecker) {
    const GaussianData p = to_density_params(vacuum_state(2));
    const FillResult r = fill_full_with_grad(p, CutoffSpec::local({2, 2}));
    const auto D = static_cast<std::size_t>(p.dim());
    for (std::size_t i = 0; i < D; ++i) {
        FockIndex k(D);
        k[i] = 1;
        const cplx *cell = r.tensor.cell(r.tensor.linear(k));
        EXPECT_EQ(cell[0], cplx(0.0, 0.0));
        for (std::size_t m = 0; m < D; ++m) {
            EXPECT_EQ(cell[grad_db_index(m)], m == i ? p.G0 : cplx(0.0, 0.0));
        }
    }
}

TEST(Grad, ThermalOnePhotonDerivative) {
    const GaussianData p = to_density_params(thermal_state({1.0}));
    const FillResult r = fill_full_with_grad(p, CutoffSpec::local({2}));
    const cplx *cell = r.tensor.cell(r.tensor.linear(FockIndex{1, 1}));
    // The full fill reaches [1,1] from the pivot [0,1], which reads A_01.
    const cplx dA01 = cell[grad_dA_index(0, 1, 2)];
    EXPECT_NEAR(std::abs(dA01 - p.G0), 0.0, 1e-15);
    GaussianData plus = p;
    GaussianData minus = p;
    plus.A(0, 1) += kStep;
    minus.A(0, 1) -= kStep;
    const auto fp = fill_full(plus, CutoffSpec::local({2})).tensor(FockIndex{1, 1});
    const auto fm = fill_full(minus, CutoffSpec::local({2})).tensor(FockIndex{1, 1});
    EXPECT_TRUE(close(dA01, (fp - fm) / (2.0 * kStep)));
    // The symmetric combination does not depend on the path.
    EXPECT_NEAR(std::abs(dA01 + cell[grad_dA_index(1, 0, 2)] - p.G0), 0.0, 1e-15);
}

TEST(Grad, FullFillMatchesFiniteDifferences) {
    std::mt19937_64 pick(2024);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int M = 1 + static_cast<int>(pick() % 2);
        const bool density = seed % 3 != 0;
        const int D = density ? 2 * M : M;
        std::vector<int> cut(M);
        for (int &c : cut) {
            c = 2 + static_cast<int>(pick() % 3);
        }
        const GaussianData p = random_params(
            D, density ? Representation::DensityMatrix : Representation::StateVector, seed % 2 == 0, seed);
        const CutoffSpec b = CutoffSpec::local(cut);
        const FillResult r = fill_full_with_grad(p, b);
        const int bad = check_against_fd(p, r.tensor.data(),
                                         [&](const GaussianData &q) { return fill_values(q, b); },
                                         "seed " + std::to_string(seed));
        EXPECT_EQ(bad, 0) << "seed " << seed;
    }
}

TEST(Grad, GbsBundlesMatchFiniteDifferences) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const int M = 1 + static_cast<int>(seed % 2);
        const std::vector<int> cut(M, 3 + static_cast<int>(seed % 2));
        const GaussianData p = random_params(2 * M, Representation::DensityMatrix, seed % 3 == 0, seed);
        GbsOptions o;
        o.with_grad = true;
        o.imag_tolerance = std::numeric_limits<double>::infinity();
        const GbsResult r = run_gbs(p, cut, o);
        ASSERT_TRUE(r.bundles);
        const Values values = [&](const GaussianData &q) {
            return run_gbs(q, cut, o).bundles->component(0).data();
        };
        EXPECT_EQ(check_against_fd(p, r.bundles->data(), values, "gbs seed " + std::to_string(seed)), 0);
    }
}

TEST(Grad, ConditionalBundlesMatchFiniteDifferences) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const std::vector<int> cut{3, 2, 3};
        const std::vector<int> und{static_cast<int>(seed % 3)};
        const GaussianData p = random_params(6, Representation::DensityMatrix, seed != 2, seed + 40);
        ConditionalOptions o;
        o.with_grad = true;
        o.validate = false;
        const ConditionalBatch b = run_conditional(p, cut, und, o);
        ASSERT_TRUE(b.bundles);
        const Values values = [&](const GaussianData &q) { return run_conditional(q, cut, und, o).blocks; };
        EXPECT_EQ(check_against_fd(p, *b.bundles, values, "conditional seed " + std::to_string(seed)), 0);
    }
}

TEST(Grad, SymmetricPartialsAgreeAcrossSchedules) {
    const std::vector<int> cut{3, 3};
    const GaussianData p = to_density_params(build_complex_state(random_spec(2, cut, 0.8, true, 5)));
    const GbsResult g = run_gbs_with_grad(p, cut);
    const FillResult f = fill_full_with_grad(p, CutoffSpec::local(cut));
    const std::size_t D = 4;
    for (std::size_t lin = 0; lin < g.bundles->cells(); ++lin) {
        const auto n = unravel(lin, cut);
        const cplx *a = g.bundles->cell(lin);
        const cplx *b = f.tensor.cell(f.tensor.linear(FockIndex{n[0], n[0], n[1], n[1]}));
        EXPECT_NEAR(std::abs(a[0] - b[0]), 0.0, 1e-12);
        for (std::size_t m = 0; m < D; ++m) {
            EXPECT_NEAR(std::abs(a[grad_db_index(m)] - b[grad_db_index(m)]), 0.0, 1e-12);
            for (std::size_t k = m; k < D; ++k) {
                const cplx sa = a[grad_dA_index(m, k, D)] + (m != k ? a[grad_dA_index(k, m, D)] : 0.0);
                const cplx sb = b[grad_dA_index(m, k, D)] + (m != k ? b[grad_dA_index(k, m, D)] : 0.0);
                EXPECT_NEAR(std::abs(sa - sb), 0.0, 1e-12);
            }
        }
    }
}

TEST(Contract, SelectsOneCell) {
    const GaussianData p = random_params(2, Representation::DensityMatrix, true, 3);
    const FillResult r = fill_full_with_grad(p, CutoffSpec::local({3}));
    DenseTensor up({3, 3});
    const std::size_t lin = r.tensor.linear(FockIndex{2, 2});
    up.data()[lin] = 1.0;
    const UpstreamGradient g = contract_upstream(up, r.tensor);
    const cplx *cell = r.tensor.cell(lin);
    for (int m = 0; m < 2; ++m) {
        EXPECT_EQ(g.db(m), std::conj(cell[grad_db_index(static_cast<std::size_t>(m))]));
        for (int n = 0; n < 2; ++n) {
            EXPECT_EQ(g.dA(m, n), std::conj(cell[grad_dA_index(static_cast<std::size_t>(m),
                                                                static_cast<std::size_t>(n), 2)]));
        }
    }
}

TEST(Contract, ZeroUpstreamGivesZero) {
    const GaussianData p = random_params(2, Representation::DensityMatrix, true, 3);
    const FillResult r = fill_full_with_grad(p, CutoffSpec::local({3}));
    const UpstreamGradient g = contract_upstream(DenseTensor({3, 3}), r.tensor);
    EXPECT_EQ(g.db.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.dA.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Contract, IsLinear) {
    const GaussianData p = random_params(4, Representation::DensityMatrix, true, 8);
    const FillResult r = fill_full_with_grad(p, CutoffSpec::local({3, 2}));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    DenseTensor u1(r.tensor.shape());
    DenseTensor u2(r.tensor.shape());
    DenseTensor mix(r.tensor.shape());
    const cplx a(0.3, -1.2);
    const cplx b(-0.7, 0.4);
    for (std::size_t i = 0; i < u1.cells(); ++i) {
        u1.data()[i] = cplx(g(rng), g(rng));
        u2.data()[i] = cplx(g(rng), g(rng));
        mix.data()[i] = a * u1.data()[i] + b * u2.data()[i];
    }
    const UpstreamGradient g1 = contract_upstream(u1, r.tensor);
    const UpstreamGradient g2 = contract_upstream(u2, r.tensor);
    const UpstreamGradient gm = contract_upstream(mix, r.tensor);
    EXPECT_LE((gm.db - (a * g1.db + b * g2.db)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((gm.dA - (a * g1.dA + b * g2.dA)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Contract, ShapeMismatchIsAnError) {
    const GaussianData p = random_params(2, Representation::DensityMatrix, true, 3);
    const FillResult r = fill_full_with_grad(p, CutoffSpec::local({3}));
    EXPECT_THROW(contract_upstream(DenseTensor({3, 2}), r.tensor), ValidationError);
    EXPECT_THROW(contract_upstream(std::vector<cplx>(4), r.tensor.data(), 2), ValidationError);
}

TEST(Contract, SumOfProbabilitiesOnThermalFamily) {
    for (double nbar : {0.3, 1.0, 2.0}) {
        const GaussianData p = to_density_params(thermal_state({nbar}));
        const std::vector<int> cut{6};
        const GbsResult r = run_gbs_with_grad(p, cut);
        const std::vector<cplx> up(r.bundles->cells(), cplx(1.0, 0.0));
        const UpstreamGradient g = contract_upstream(up, r.bundles->data(), 2);
        GbsOptions o;
        o.imag_tolerance = std::numeric_limits<double>::infinity();
        o.with_grad = true;
        auto L = [&](const GaussianData &q) {
            cplx s = 0.0;
            for (cplx v : run_gbs(q, cut, o).bundles->component(0).data()) {
                s += v;
            }
            return s;
        };
        for (int m = 0; m < 2; ++m) {
            for (int n = 0; n < 2; ++n) {
                GaussianData ap = p;
                GaussianData am = p;
                ap.A(m, n) += kStep;
                am.A(m, n) -= kStep;
                const cplx fd = (L(ap) - L(am)) / (2.0 * kStep);
                EXPECT_TRUE(close(g.dA(m, n), std::conj(fd))) << nbar << " " << m << n;
            }
        }
    }
}

TEST(Grad, BundleMemoryRatio) {
    const std::vector<int> cut(4, 3);
    const GaussianData rho = to_density_params(build_complex_state(random_spec(4, cut, 0.9, false, 1)));
    GbsOptions o;
    const GbsResult plain = run_gbs(rho, cut, o);
    o.with_grad = true;
    const GbsResult grad = run_gbs(rho, cut, o);
    EXPECT_EQ(grad.counters.peak_bytes(), 73 * plain.counters.peak_bytes());
    EXPECT_EQ(bundle_width(8, true), 73u);

    const GaussianData psi = to_statevector_params(build_complex_state(random_spec(4, cut, 1.0, true, 1)));
    const FillResult v = fill_full(psi, CutoffSpec::local(cut));
    const FillResult b = fill_full_with_grad(psi, CutoffSpec::local(cut));
    EXPECT_EQ(b.tensor.data().size(), 21 * v.tensor.data().size());
}

TEST(Grad, ChainThroughCircuitParameters) {
    // dp(n)/dtheta for the first squeezing amplitude of a 2-mode GBS circuit:
    // bundle contraction with numerically differentiated (A, b, G0) versus a
    // finite difference of the whole pipeline.
    const std::vector<int> cut{4, 4};
    const CircuitSpec base = random_spec(2, cut, 0.8, true, 17);
    auto params = [&](double dr) {
        CircuitSpec s = base;
        s.squeeze_params[0].r += dr;
        return to_density_params(build_complex_state(s));
    };
    const double h = 1e-6;
    const GaussianData p0 = params(0.0);
    const GaussianData pp = params(h);
    const GaussianData pm = params(-h);
    const CMatrix dA = (pp.A - pm.A) / (2 * h);
    const CVector db = (pp.b - pm.b) / (2 * h);
    const cplx dG0 = (pp.G0 - pm.G0) / (2 * h);
    const GbsResult r = run_gbs_with_grad(p0, cut);
    const GbsResult rp = run_gbs(pp, cut);
    const GbsResult rm = run_gbs(pm, cut);
    const std::size_t D = 4;
    for (std::size_t lin = 0; lin < r.bundles->cells(); ++lin) {
        const cplx *cell = r.bundles->cell(lin);
        cplx chain = cell[0] / p0.G0 * dG0;
        for (std::size_t m = 0; m < D; ++m) {
            chain += cell[grad_db_index(m)] * db(static_cast<Eigen::Index>(m));
            for (std::size_t n = 0; n < D; ++n) {
                chain += cell[grad_dA_index(m, n, D)] *
                         dA(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
            }
        }
        const double fd = (rp.probabilities.values[lin] - rm.probabilities.values[lin]) / (2 * h);
        EXPECT_LE(std::abs(chain - fd), 1e-10 + 1e-4 * std::abs(fd)) << "cell " << lin;
        EXPECT_LE(std::abs(chain.imag()), 1e-8);
    }
}
