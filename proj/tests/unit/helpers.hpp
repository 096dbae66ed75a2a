/*
 * Copyright 2026 The smoothdyn Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <smoothdyn/error.hpp>
#include <smoothdyn/linalg.hpp>
#include <smoothdyn/rng.hpp>

#include <doctest.h>

#include <random>

namespace smoothdyn::test {

inline RealMatrix random_real(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    RealMatrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
    return m;
}

inline ComplexMatrix random_complex(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = Complex(n(rng), n(rng));
    return m;
}

template <typename T>
Matrix<T> random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    if constexpr (is_complex_v<T>)
        return random_complex(rng, rows, cols, scale);
    else
        return random_real(rng, rows, cols, scale);
}

/// Kind of the smoothdyn::Error thrown by fn; fails the test when nothing is thrown.
template <typename Fn>
ErrorKind error_kind_of(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::config;
}

} // namespace smoothdyn::test
