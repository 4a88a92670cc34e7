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
 * @file io.hpp
 * CircuitSpec JSON ingestion, tensor files and run reports.
 *
 * Tensor file: one line of JSON (the header, no embedded newlines) followed by
 * the payload, little-endian f64. Complex tensors store re, im interleaved;
 * a cell of width w stores its w components back to back.
 */
#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaussian.hpp"
#include "selective.hpp"

namespace fockwalk {

using nlohmann::json;

namespace detail {

inline cplx complex_from_json(const json &j, const char *what) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ValidationError(std::string(what) + ": complex numbers are written as [re, im]");
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

template <typename T>
T get_field(const json &j, const char *key) {
    if (!j.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace detail

/// Parses the CircuitSpec schema and validates it.
inline CircuitSpec circuit_spec_from_json(const json &j) {
    if (!j.is_object()) {
        throw ValidationError("a circuit spec is a JSON object");
    }
    CircuitSpec s;
    s.modes = detail::get_field<int>(j, "modes");
    if (s.modes < 1) {
        throw ValidationError("modes must be a positive integer");
    }
    const auto M = static_cast<std::size_t>(s.modes);

    const json &sq = j.contains("squeeze_params") ? j.at("squeeze_params") : json::array();
    for (const auto &e : sq) {
        if (e.is_array() && e.size() == 2) {
            s.squeeze_params.push_back({e[0].get<double>(), e[1].get<double>()});
        } else if (e.is_object()) {
            s.squeeze_params.push_back({e.value("r", 0.0), e.value("phase", 0.0)});
        } else {
            throw ValidationError("squeeze_params entries are [r, phase] or {r, phase}");
        }
    }
    if (!j.contains("squeeze_params")) {
        s.squeeze_params.assign(M, {});
    }

    if (j.contains("interferometer")) {
        const json &U = j.at("interferometer");
        if (!U.is_array() || U.size() != M) {
            throw ValidationError("interferometer must be an M x M nested array");
        }
        s.interferometer = CMatrix::Zero(s.modes, s.modes);
        for (std::size_t r = 0; r < M; ++r) {
            if (!U[r].is_array() || U[r].size() != M) {
                throw ValidationError("interferometer must be an M x M nested array");
            }
            for (std::size_t c = 0; c < M; ++c) {
                s.interferometer(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    detail::complex_from_json(U[r][c], "interferometer");
            }
        }
    } else {
        s.interferometer = CMatrix::Identity(s.modes, s.modes);
    }

    s.loss_transmissivity = j.contains("loss_transmissivity")
                                ? detail::get_field<std::vector<double>>(j, "loss_transmissivity")
                                : std::vector<double>(M, 1.0);
    if (j.contains("displacements")) {
        for (const auto &a : j.at("displacements")) {
            s.displacements.push_back(detail::complex_from_json(a, "displacements"));
        }
    } else {
        s.displacements.assign(M, cplx{});
    }
    s.cutoffs = detail::get_field<std::vector<int>>(j, "cutoffs");
    s.detected_modes = j.contains("detected_modes")
                           ? detail::get_field<std::vector<int>>(j, "detected_modes")
                           : std::vector<int>{};

    if (j.contains("cutoff_mode")) {
        const json &cm = j.at("cutoff_mode");
        if (cm.is_string() && cm.get<std::string>() == "Local") {
            s.cutoff_mode = CutoffMode::local();
        } else if (cm.is_object() && cm.contains("GlobalPhotons")) {
            s.cutoff_mode = CutoffMode::global_photons(cm.at("GlobalPhotons").get<int>());
        } else if (cm.is_object() && cm.contains("ProbabilityMass")) {
            s.cutoff_mode = CutoffMode::probability_mass(cm.at("ProbabilityMass").get<double>());
        } else {
            throw ValidationError(
                "cutoff_mode is \"Local\", {\"GlobalPhotons\": N} or {\"ProbabilityMass\": x}");
        }
    }
    s.validate();
    return s;
}

inline json to_json(const CircuitSpec &s) {
    json j;
    j["modes"] = s.modes;
    j["squeeze_params"] = json::array();
    for (const auto &p : s.squeeze_params) {
        j["squeeze_params"].push_back({p.r, p.phase});
    }
    j["interferometer"] = json::array();
    for (Eigen::Index r = 0; r < s.interferometer.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < s.interferometer.cols(); ++c) {
            row.push_back(detail::complex_to_json(s.interferometer(r, c)));
        }
        j["interferometer"].push_back(row);
    }
    j["loss_transmissivity"] = s.loss_transmissivity;
    j["displacements"] = json::array();
    for (cplx a : s.displacements) {
        j["displacements"].push_back(detail::complex_to_json(a));
    }
    j["cutoffs"] = s.cutoffs;
    j["detected_modes"] = s.detected_modes;
    switch (s.cutoff_mode.kind) {
    case CutoffMode::Kind::Local:
        j["cutoff_mode"] = "Local";
        break;
    case CutoffMode::Kind::GlobalPhotons:
        j["cutoff_mode"] = {{"GlobalPhotons", s.cutoff_mode.n_max}};
        break;
    case CutoffMode::Kind::ProbabilityMass:
        j["cutoff_mode"] = {{"ProbabilityMass", s.cutoff_mode.threshold}};
        break;
    }
    return j;
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline CircuitSpec parse_circuit_spec(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
    return circuit_spec_from_json(j);
}

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

enum class DType { Float64, Complex128 };

struct TensorHeader {
    DType dtype = DType::Complex128;
    std::vector<int> shape;
    std::size_t width = 1;
    std::string index_convention;
    json metadata = json::object();

    [[nodiscard]] json to_json() const {
        json j;
        j["format"] = "fockwalk-tensor";
        j["version"] = 1;
        j["dtype"] = dtype == DType::Float64 ? "float64" : "complex128";
        j["byte_order"] = "little";
        j["shape"] = shape;
        j["width"] = width;
        j["index_convention"] = index_convention;
        j["metadata"] = metadata;
        return j;
    }

    static TensorHeader from_json(const json &j) {
        TensorHeader h;
        h.dtype = j.at("dtype").get<std::string>() == "float64" ? DType::Float64 : DType::Complex128;
        h.shape = j.at("shape").get<std::vector<int>>();
        h.width = j.at("width").get<std::size_t>();
        h.index_convention = j.at("index_convention").get<std::string>();
        h.metadata = j.value("metadata", json::object());
        return h;
    }
};

namespace detail {

inline void put_f64(std::string &out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.append(buf, 8);
}

inline double get_f64(const char *p) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, p, 8);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return std::bit_cast<double>(bits);
}

inline void write_bytes(const std::filesystem::path &path, const std::string &bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace detail

/// Header line + payload as one byte string (what write_tensor_binary writes).
inline std::string encode_tensor(const TensorHeader &h, std::span<const cplx> values) {
    std::string out = h.to_json().dump();
    out.push_back('\n');
    for (cplx v : values) {
        detail::put_f64(out, v.real());
        if (h.dtype == DType::Complex128) {
            detail::put_f64(out, v.imag());
        }
    }
    return out;
}

inline void write_tensor_binary(const std::filesystem::path &path, const TensorHeader &h,
                                std::span<const cplx> values) {
    detail::write_bytes(path, encode_tensor(h, values));
}

inline void write_tensor_binary(const std::filesystem::path &path, TensorHeader h,
                                std::span<const double> values) {
    h.dtype = DType::Float64;
    std::vector<cplx> tmp(values.begin(), values.end());
    detail::write_bytes(path, encode_tensor(h, tmp));
}

struct LoadedTensor {
    TensorHeader header;
    std::vector<cplx> values;
};

inline LoadedTensor read_tensor_binary(const std::filesystem::path &path) {
    const std::string bytes = read_file(path);
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) {
        throw ValidationError(path.string() + " has no header line");
    }
    LoadedTensor t;
    t.header = TensorHeader::from_json(json::parse(bytes.substr(0, nl)));
    const std::size_t per = t.header.dtype == DType::Complex128 ? 16 : 8;
    const std::size_t n = (bytes.size() - nl - 1) / per;
    t.values.resize(n);
    const char *p = bytes.data() + nl + 1;
    for (std::size_t i = 0; i < n; ++i, p += per) {
        t.values[i] = {detail::get_f64(p), per == 16 ? detail::get_f64(p + 8) : 0.0};
    }
    return t;
}

/// Plain JSON form for small tensors: header fields plus "data".
inline json tensor_to_json(const TensorHeader &h, std::span<const cplx> values) {
    json j = h.to_json();
    j.erase("byte_order");
    json data = json::array();
    for (cplx v : values) {
        if (h.dtype == DType::Float64) {
            data.push_back(v.real());
        } else {
            data.push_back(detail::complex_to_json(v));
        }
    }
    j["data"] = std::move(data);
    return j;
}

inline void write_json(const std::filesystem::path &path, const json &j) {
    detail::write_bytes(path, j.dump(2) + "\n");
}

/// Wall-clock phases, in the order they were started.
class PhaseTimer {
  public:
    void start(std::string name) {
        stop();
        current_ = std::move(name);
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        if (current_.empty()) {
            return;
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0_;
        phases_.push_back({current_, dt.count()});
        current_.clear();
    }
    [[nodiscard]] json to_json() const {
        json j = json::array();
        for (const auto &[name, sec] : phases_) {
            j.push_back({{"phase", name}, {"seconds", sec}});
        }
        return j;
    }

  private:
    std::string current_;
    std::chrono::steady_clock::time_point t0_;
    std::vector<std::pair<std::string, double>> phases_;
};

inline json counters_to_json(const ScheduleCounters &c) {
    json w;
    for (std::size_t t = 0; t < kOffsetTypes; ++t) {
        w[to_string(static_cast<OffsetType>(t))] = c.written[t];
    }
    return {{"pivots_applied", c.pivots()},
            {"diagonal_pivots", c.diagonal_pivots},
            {"offdiagonal_pivots", c.offdiagonal_pivots},
            {"fine_pivots", c.fine_pivots()},
            {"block_fill_pivots", c.block_fill_pivots},
            {"block_cells", c.block_cells},
            {"value_width", c.value_width},
            {"amplitudes_written", c.amplitudes_written()},
            {"written_cells", w},
            {"peak_buffer_cells", c.peak_cells},
            {"peak_buffer_bytes", c.peak_bytes()},
            {"final_diagonal_cells", c.final_diag_cells},
            {"final_offdiagonal_cells", c.final_offdiag_cells}};
}

struct RunReport {
    std::string command;
    std::string input_digest;
    PhaseTimer timer;
    json counters = json::object();
    json outputs = json::array();
    json extra = json::object();

    [[nodiscard]] json to_json() const {
        json j{{"command", command},
               {"input_digest", input_digest},
               {"phases", timer.to_json()},
               {"counters", counters},
               {"outputs", outputs}};
        for (const auto &[k, v] : extra.items()) {
            j[k] = v;
        }
        return j;
    }
};

} // namespace fockwalk
