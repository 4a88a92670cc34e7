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
 * @file core.hpp
 * Scalar aliases, matrix aliases and the two error families used across the
 * library.
 */
#pragma once

#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fockwalk {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

/// Bytes used to account for one stored complex amplitude (two f64).
inline constexpr std::size_t kBytesPerAmplitude = 16;

/// Bad user input: malformed spec, non-unitary interferometer, wrong mode set.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A broken internal contract: read-before-write, double write, double read.
/// Seeing one of these means a scheduler bug, not bad input.
class InvariantError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Whether a Gaussian object is represented as a ket or as a density matrix.
enum class Representation { StateVector, DensityMatrix };

inline const char *to_string(Representation r) {
    return r == Representation::StateVector ? "StateVector" : "DensityMatrix";
}

namespace detail {

template <typename Container>
std::string format_index(const Container &k) {
    std::ostringstream oss;
    oss << '[';
    bool first = true;
    for (auto v : k) {
        if (!first) {
            oss << ',';
        }
        oss << v;
        first = false;
    }
    oss << ']';
    return oss.str();
}

} // namespace detail

} // namespace fockwalk
