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

// fockwalk command-line driver.
//
//   fockwalk statevec    SPEC.json [--grad] [--global-cutoff N] [--prob-mass x] --out DIR
//   fockwalk gbs         SPEC.json [--buffered] [--grad] [--global-cutoff N] --out DIR
//   fockwalk conditional SPEC.json [--grad] --out DIR
//   fockwalk bench       [--modes M] [--cutoffs 4,6,..] [--strategies a,b] --out DIR
//
// Exit codes: 0 ok, 2 validation error, 3 internal invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fockwalk/fockwalk.hpp"

namespace fs = std::filesystem;
using namespace fockwalk;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInvariant = 3;

/// Tensors up to this many cells also get a plain JSON copy.
constexpr std::size_t kJsonCellLimit = 4096;

struct Common {
    std::string spec_path;
    std::string out_dir = "out";
    int threads = 1;
    bool grad = false;
    std::optional<int> global_cutoff;
    std::optional<double> prob_mass;
    bool buffered = false;
};

struct Loaded {
    CircuitSpec spec;
    std::string digest;
};

Loaded load_spec(const Common &c) {
    const std::string text = read_file(c.spec_path);
    Loaded l{parse_circuit_spec(text), fnv1a_hex(text)};
    if (c.global_cutoff) {
        l.spec.cutoff_mode = CutoffMode::global_photons(*c.global_cutoff);
    }
    if (c.prob_mass) {
        l.spec.cutoff_mode = CutoffMode::probability_mass(*c.prob_mass);
    }
    l.spec.validate();
    return l;
}

void emit_tensor(RunReport &rep, const fs::path &dir, const std::string &stem,
                 const TensorHeader &h, std::span<const cplx> values) {
    const fs::path bin = dir / (stem + ".bin");
    write_tensor_binary(bin, h, values);
    rep.outputs.push_back(bin.string());
    const std::size_t cells = values.size() / std::max<std::size_t>(h.width, 1);
    if (cells <= kJsonCellLimit) {
        const fs::path js = dir / (stem + ".json");
        write_json(js, tensor_to_json(h, values));
        rep.outputs.push_back(js.string());
    }
}

void emit_report(RunReport &rep, const fs::path &dir) {
    rep.timer.stop();
    const fs::path p = dir / "report.json";
    rep.outputs.push_back(p.string());
    write_json(p, rep.to_json());
    std::cout << p.string() << "\n";
}

json grad_layout(int D) {
    return {{"components", "[G, dG/db_0..db_{D-1}, dG/dA_00..dA_{D-1,D-1} row-major]"},
            {"D", D},
            {"width", bundle_width(D, true)},
            {"note", "G0 is held constant; add (G_k/G0) dG0 externally if needed"}};
}

int cmd_statevec(const Common &c) {
    RunReport rep;
    rep.command = "statevec";
    rep.timer.start("parse");
    const Loaded in = load_spec(c);
    rep.input_digest = in.digest;
    if (!in.spec.lossless()) {
        throw ValidationError(
            "statevec needs a lossless circuit; this one has loss, use `fockwalk gbs` or "
            "`fockwalk conditional` (density-matrix path)");
    }
    rep.timer.start("parameters");
    const GaussianData psi = to_statevector_params(build_complex_state(in.spec));
    CutoffSpec bounds = CutoffSpec::local(in.spec.cutoffs);
    if (in.spec.cutoff_mode.kind == CutoffMode::Kind::GlobalPhotons) {
        bounds = CutoffSpec::global_photons(in.spec.cutoff_mode.n_max, Representation::StateVector);
    } else if (in.spec.cutoff_mode.kind == CutoffMode::Kind::ProbabilityMass) {
        bounds = CutoffSpec::probability_mass(in.spec.cutoff_mode.threshold, in.spec.cutoffs);
    }
    rep.timer.start("fill");
    FillOptions fo;
    fo.threads = c.threads;
    fo.with_grad = c.grad;
    const FillResult r = fill_full(psi, bounds, fo);
    rep.timer.start("write");
    const fs::path dir = c.out_dir;
    TensorHeader h;
    h.shape = r.tensor.shape();
    h.index_convention = "ket [n_1, ..., n_M], row-major";
    h.metadata = {{"G0", {psi.G0.real(), psi.G0.imag()}}};
    const DenseTensor values = r.tensor.component(0);
    emit_tensor(rep, dir, "statevector", h, values.data());
    if (c.grad) {
        TensorHeader g = h;
        g.width = r.tensor.width();
        g.metadata["gradient"] = grad_layout(psi.dim());
        emit_tensor(rep, dir, "statevector_grad", g, r.tensor.data());
    }
    rep.counters = {{"pivots_applied", r.pivots_applied},
                    {"amplitudes_written", r.amplitudes_written},
                    {"checkered", r.checkered},
                    {"last_weight", r.last_weight},
                    {"peak_buffer_bytes", r.tensor.data().size() * kBytesPerAmplitude}};
    if (bounds.kind == CutoffSpec::Kind::ProbabilityMass) {
        rep.extra["probability_mass"] = {{"threshold", bounds.threshold},
                                         {"reached", r.threshold_reached},
                                         {"mass", r.probability_mass},
                                         {"photons", r.photons_reached}};
    }
    emit_report(rep, dir);
    return 0;
}

void write_curve(RunReport &rep, const fs::path &dir, const std::vector<CurvePoint> &curve,
                 std::size_t bytes_per_cell) {
    const fs::path p = dir / "buffer_curve.csv";
    fs::create_directories(dir);
    std::ofstream os(p);
    os << "pivots,stored_cells,stored_bytes,class_end\n";
    for (const CurvePoint &pt : curve) {
        os << pt.pivots << ',' << pt.stored_cells << ',' << pt.stored_cells * bytes_per_cell << ','
           << (pt.class_end ? 1 : 0) << '\n';
    }
    rep.outputs.push_back(p.string());
}

int cmd_gbs(const Common &c) {
    RunReport rep;
    rep.command = "gbs";
    rep.timer.start("parse");
    const Loaded in = load_spec(c);
    rep.input_digest = in.digest;
    if (!in.spec.all_detected()) {
        throw ValidationError("gbs needs every mode in detected_modes; use `fockwalk conditional` "
                              "when some modes stay undetected");
    }
    if (in.spec.cutoff_mode.kind == CutoffMode::Kind::ProbabilityMass) {
        throw ValidationError("--prob-mass applies to statevec only");
    }
    rep.timer.start("parameters");
    const GaussianData rho = to_density_params(build_complex_state(in.spec));
    GbsOptions go;
    go.buffered = c.buffered;
    go.threads = c.threads;
    go.with_grad = c.grad;
    go.record_curve = true;
    const fs::path dir = c.out_dir;
    TensorHeader h;
    h.dtype = DType::Float64;
    h.metadata = {{"G0", rho.G0.real()}, {"buffered", c.buffered}};
    const int D = rho.dim();

    if (in.spec.cutoff_mode.kind == CutoffMode::Kind::GlobalPhotons) {
        const int n_max = in.spec.cutoff_mode.n_max;
        rep.timer.start("walk");
        const GbsGlobalResult r = run_gbs_global_cutoff(rho, n_max, go);
        rep.timer.start("write");
        h.shape.assign(static_cast<std::size_t>(in.spec.modes), n_max);
        h.index_convention = "p[n_1, ..., n_M], row-major; cells with sum(n) >= n_max are 0";
        h.metadata["global_cutoff"] = n_max;
        std::vector<cplx> dense(shape_size(h.shape));
        const auto st = row_major_strides(h.shape);
        for (const auto &[n, p] : r.probabilities) {
            std::size_t lin = 0;
            for (std::size_t i = 0; i < n.size(); ++i) {
                lin += static_cast<std::size_t>(n[i]) * st[i];
            }
            dense[lin] = p;
        }
        emit_tensor(rep, dir, "probabilities", h, dense);
        if (r.bundles) {
            TensorHeader g = h;
            g.dtype = DType::Complex128;
            g.width = r.bundles->width();
            g.metadata["gradient"] = grad_layout(D);
            emit_tensor(rep, dir, "probabilities_grad", g, r.bundles->data());
        }
        rep.counters = counters_to_json(r.counters);
        rep.extra["closed_form_pivots"] = gbs_global_pivot_closed_form(in.spec.modes, n_max);
        rep.extra["summed_pivots"] = gbs_global_pivot_sum(in.spec.modes, n_max);
    } else {
        rep.timer.start("walk");
        const GbsResult r = run_gbs(rho, in.spec.cutoffs, go);
        rep.timer.start("write");
        h.shape = r.probabilities.shape;
        h.index_convention = "p[n_1, ..., n_M], row-major";
        const std::vector<cplx> vals(r.probabilities.values.begin(), r.probabilities.values.end());
        emit_tensor(rep, dir, "probabilities", h, vals);
        if (r.bundles) {
            TensorHeader g = h;
            g.dtype = DType::Complex128;
            g.width = r.bundles->width();
            g.metadata["gradient"] = grad_layout(D);
            emit_tensor(rep, dir, "probabilities_grad", g, r.bundles->data());
        }
        write_curve(rep, dir, r.curve, r.counters.block_cells * r.counters.value_width *
                                           kBytesPerAmplitude);
        rep.counters = counters_to_json(r.counters);
        rep.extra["formula_pivots"] = gbs_pivot_count(in.spec.cutoffs);
        rep.extra["probability_sum"] = r.probabilities.sum();
    }
    emit_report(rep, dir);
    return 0;
}

int cmd_conditional(const Common &c) {
    RunReport rep;
    rep.command = "conditional";
    rep.timer.start("parse");
    const Loaded in = load_spec(c);
    rep.input_digest = in.digest;
    const std::vector<int> undetected = in.spec.undetected_modes();
    if (in.spec.detected_modes.empty() || undetected.empty()) {
        throw ValidationError("conditional needs detected_modes to be a proper nonempty subset of "
                              "the modes");
    }
    if (in.spec.cutoff_mode.kind != CutoffMode::Kind::Local) {
        throw ValidationError("conditional supports local cutoffs only");
    }
    rep.timer.start("parameters");
    const GaussianData rho = to_density_params(build_complex_state(in.spec));
    rep.timer.start("walk");
    ConditionalOptions co;
    co.buffered = true;
    co.threads = c.threads;
    co.with_grad = c.grad;
    const ConditionalBatch b = run_conditional(rho, in.spec.cutoffs, undetected, co);
    rep.timer.start("write");
    const fs::path dir = c.out_dir;
    std::vector<int> detected1;
    std::vector<int> undetected1;
    for (int d : b.detected) {
        detected1.push_back(d + 1);
    }
    for (int u : b.undetected) {
        undetected1.push_back(u + 1);
    }
    TensorHeader h;
    h.shape = b.pattern_shape;
    h.shape.insert(h.shape.end(), b.block_shape.begin(), b.block_shape.end());
    h.index_convention = "[pattern over detected modes] x [m_u1, n_u1, m_u2, n_u2, ...], row-major";
    h.metadata = {{"detected_modes", detected1}, {"undetected_modes", undetected1}};
    emit_tensor(rep, dir, "conditional_states", h, b.blocks);
    TensorHeader t;
    t.dtype = DType::Float64;
    t.shape = b.pattern_shape;
    t.index_convention = "trace per pattern over detected modes, row-major";
    t.metadata = h.metadata;
    const std::vector<cplx> traces(b.traces.begin(), b.traces.end());
    emit_tensor(rep, dir, "pattern_probabilities", t, traces);
    if (b.bundles) {
        TensorHeader g = h;
        g.width = b.bundle_width;
        g.metadata["gradient"] = grad_layout(rho.dim());
        emit_tensor(rep, dir, "conditional_states_grad", g, *b.bundles);
    }
    rep.counters = counters_to_json(b.counters);
    emit_report(rep, dir);
    return 0;
}

struct BenchArgs {
    int modes = 4;
    std::vector<int> cutoffs{4, 6, 8, 10, 12};
    std::vector<std::string> strategies{"statevec", "naive_dm", "alg1", "alg1_buffered", "alg2"};
    std::size_t naive_cap = std::size_t{1} << 22;
};

int cmd_bench(const Common &c, const BenchArgs &a) {
    RunReport rep;
    rep.command = "bench";
    rep.timer.start("bench");
    std::vector<Strategy> strategies;
    for (const std::string &s : a.strategies) {
        strategies.push_back(strategy_from_string(s));
    }
    BenchOptions bo;
    bo.threads = c.threads;
    bo.naive_cell_cap = a.naive_cap;
    const std::vector<BenchRow> rows = run_bench(strategies, a.modes, a.cutoffs, bo);
    rep.timer.start("write");
    const fs::path dir = c.out_dir;
    fs::create_directories(dir);
    const fs::path csv = dir / "bench.csv";
    {
        std::ofstream os(csv);
        write_bench_csv(os, rows);
    }
    rep.outputs.push_back(csv.string());
    json slopes;
    if (a.cutoffs.size() >= 2) {
        for (Strategy s : strategies) {
            slopes[to_string(s)] = pivot_slope(rows, s);
        }
    }
    rep.input_digest = fnv1a_hex(json{{"modes", a.modes}, {"cutoffs", a.cutoffs},
                                      {"strategies", a.strategies}}
                                     .dump());
    rep.extra["pivot_slopes"] = slopes;
    emit_report(rep, dir);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"fockwalk: Fock amplitudes, PNR probabilities and conditional states of Gaussian "
                 "circuits"};
    app.require_subcommand(1);
    Common c;
    BenchArgs ba;

    auto add_common = [&](CLI::App *sub, bool with_spec) {
        if (with_spec) {
            sub->add_option("spec", c.spec_path, "CircuitSpec JSON file")->required();
        }
        sub->add_option("--out", c.out_dir, "output directory");
        sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    CLI::App *sv = app.add_subcommand("statevec", "state-vector fill of a lossless circuit");
    add_common(sv, true);
    sv->add_flag("--grad", c.grad, "co-walk gradient bundles");
    sv->add_option("--global-cutoff", c.global_cutoff, "total photon bound N (n_1+..+n_M < N)");
    sv->add_option("--prob-mass", c.prob_mass, "stop once this much probability is covered");

    CLI::App *gb = app.add_subcommand("gbs", "PNR probabilities of a fully detected circuit");
    add_common(gb, true);
    gb->add_flag("--buffered", c.buffered, "evict off-diagonal amplitudes after use");
    gb->add_flag("--grad", c.grad, "co-walk gradient bundles");
    gb->add_option("--global-cutoff", c.global_cutoff, "total photon bound N");
    gb->add_option("--prob-mass", c.prob_mass, "not supported for gbs");

    CLI::App *cd = app.add_subcommand("conditional", "conditional states of undetected modes");
    add_common(cd, true);
    cd->add_flag("--buffered", c.buffered, "accepted for symmetry; conditional always buffers");
    cd->add_flag("--grad", c.grad, "co-walk gradient bundles");

    CLI::App *bn = app.add_subcommand("bench", "cutoff scaling benchmark, CSV output");
    add_common(bn, false);
    bn->add_option("--modes", ba.modes, "number of modes")->check(CLI::PositiveNumber);
    bn->add_option("--cutoffs", ba.cutoffs, "cutoff values")->delimiter(',');
    bn->add_option("--strategies", ba.strategies,
                   "statevec,naive_dm,alg1,alg1_buffered,alg2")
        ->delimiter(',');
    bn->add_option("--naive-cap", ba.naive_cap, "naive fills above this many cells are counted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (sv->parsed()) {
            return cmd_statevec(c);
        }
        if (gb->parsed()) {
            return cmd_gbs(c);
        }
        if (cd->parsed()) {
            return cmd_conditional(c);
        }
        return cmd_bench(c, ba);
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvariantError &e) {
        std::cerr << "internal invariant violated: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const json::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
