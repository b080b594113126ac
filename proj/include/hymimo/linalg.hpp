// SPDX-License-Identifier: Apache-2.0
//
// hymimo: link-level simulation of hybrid OTFS/OFDM downlink massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HYMIMO_LINALG_HPP
#define HYMIMO_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace hymimo {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Dense Kronecker product A (p x q) otimes B (r x s) -> (pr x qs).
inline CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline void require_finite(const CMat& m, const char* where) {
    if (!m.allFinite()) throw std::runtime_error(std::string("non-finite entries in ") + where);
}

}  // namespace hymimo

#endif
