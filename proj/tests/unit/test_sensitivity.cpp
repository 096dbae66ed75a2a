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

#include "helpers.hpp"

#include <smoothdyn/sensitivity.hpp>

#include <doctest.h>

#include <sstream>

using namespace smoothdyn;
using namespace smoothdyn::test;

namespace {

SensitivityConfig small_config()
{
    SensitivityConfig c;
    c.data.count = 60;
    c.data.sources = 3;
    c.data.side_mean = 6.0;
    c.data.side_std = 1.0;
    c.data.side_min = 4;
    c.data.seed = 2;
    c.width = 4;
    c.seeds = 2;
    c.t_max_values = {1, 3, 10};
    c.seed = 5;
    c.threads = 1;
    return c;
}

} // namespace

TEST_SUITE("sensitivity")
{
    TEST_CASE("sweep shape and determinism")
    {
        SensitivityConfig c = small_config();
        const SensitivityResult a = run_sensitivity(c);
        c.threads = 3;
        c.data.threads = 3;
        const SensitivityResult b = run_sensitivity(c);
        REQUIRE(a.rows.size() == 3);
        CHECK(a.mean_input_rq > 0.0);
        for (std::size_t k = 0; k < a.rows.size(); ++k) {
            CHECK(a.rows[k].t_max == c.t_max_values[k]);
            CHECK(a.rows[k].kl_per_seed.size() == 2);
            CHECK(a.rows[k].kl_mean >= 0.0);
            CHECK(a.rows[k].kl_per_seed == b.rows[k].kl_per_seed);
        }
        // A near-exact exponential keeps the input distribution.
        CHECK(a.rows.back().kl_mean < a.rows.front().kl_mean);
    }

    TEST_CASE("layer parameters depend on the seed index only")
    {
        const SensitivityConfig c = small_config();
        Model<double> m1(sensitivity_model_spec(c, 1, 0));
        Model<double> m10(sensitivity_model_spec(c, 10, 0));
        Model<double> other(sensitivity_model_spec(c, 1, 1));
        CHECK(m1.params()[0].value == m10.params()[0].value);
        CHECK(m1.params()[0].value != other.params()[0].value);
        CHECK(m10.spec().layers.back().t_max == 10);
    }

    TEST_CASE("csv output")
    {
        SensitivityResult r;
        r.mean_input_rq = 0.5;
        r.rows.push_back({3, 0.1, 0.01, 0.4, {0.1}});
        std::ostringstream out;
        write_sensitivity_csv(out, r);
        CHECK(out.str().find("t_max,kl_mean,kl_std,mean_output_rq,mean_input_rq\n3,") == 0);
    }

    TEST_CASE("validation")
    {
        SensitivityConfig c = small_config();
        c.layer = LayerKind::sep_uni;
        CHECK(error_kind_of([&] { c.validate(); }) == ErrorKind::config);
        c = small_config();
        c.t_max_values.clear();
        CHECK(error_kind_of([&] { c.validate(); }) == ErrorKind::config);
    }
}
