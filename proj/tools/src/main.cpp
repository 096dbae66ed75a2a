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

#include "commands.hpp"

#include <smoothdyn/error.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

int report_error(std::string_view kind, const std::string& message, int code)
{
    const nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
    std::cerr << j.dump() << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace smoothdyn::cli;

    CLI::App app{"Smoothness-aware graph and mesh dynamics models"};
    app.require_subcommand(0, 1);
    CommonOptions opts;
    app.add_option("--threads", opts.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    bool show_version = false;
    app.add_flag("--version", show_version, "Print build metadata and exit");

    std::string config, out, data, checkpoint, init, pred, truth, in;
    std::vector<std::string> metrics;
    int steps = 0;

    auto* gen = app.add_subcommand("gen-data", "Generate grid-heat or mesh PDE trajectories");
    gen->add_option("--config", config, "Config JSON")->required();
    gen->add_option("--out", out, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Train a model; writes history.csv and checkpoint/");
    tr->add_option("--config", config, "Config JSON")->required();
    tr->add_option("--data", data, "Directory written by gen-data")->required();
    tr->add_option("--out", out, "Output directory")->required();

    auto* ro = app.add_subcommand("rollout", "Autoregressive rollout from a checkpoint");
    ro->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    ro->add_option("--init", init, "Trajectory whose first frames seed the rollout")->required();
    ro->add_option("--steps", steps, "Predicted frames")->required()->check(CLI::PositiveNumber);
    ro->add_option("--out", out, "Output directory")->required();

    auto* ev = app.add_subcommand("eval", "Metrics of a predicted trajectory against the truth");
    ev->add_option("--pred", pred, "Predicted trajectory")->required();
    ev->add_option("--truth", truth, "Ground-truth trajectory")->required();
    ev->add_option("--metrics", metrics, "nrmse,smape,re,mre,err_smooth")->delimiter(',')->required();
    ev->add_option("--out", out, "Output directory")->required();

    auto* se = app.add_subcommand("sensitivity", "KL divergence of Rayleigh quotients against Taylor order");
    se->add_option("--config", config, "Config JSON")->required();
    se->add_option("--out", out, "Output directory")->required();

    auto* bo = app.add_subcommand("bound", "Lower bound on the error of unitary maps");
    bo->add_option("--config", config, "Config JSON")->required();
    bo->add_option("--out", out, "Output directory")->required();

    auto* mp = app.add_subcommand("mesh-prep", "Manifold check and intrinsic Delaunay rewiring");
    mp->add_option("--in", in, "Mesh file (.off or .obj)")->required();
    mp->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    if (show_version) {
        std::cout << version_string();
        return 0;
    }

    try {
        if (*gen) {
            cmd_gen_data(config, out, opts);
        } else if (*tr) {
            cmd_train(config, data, out, opts);
        } else if (*ro) {
            cmd_rollout(checkpoint, init, steps, out);
        } else if (*ev) {
            cmd_eval(pred, truth, metrics, out);
        } else if (*se) {
            cmd_sensitivity(config, out, opts);
        } else if (*bo) {
            cmd_bound(config, out, opts);
        } else if (*mp) {
            cmd_mesh_prep(in, out);
        } else {
            std::cout << app.help();
            return 2;
        }
    } catch (const smoothdyn::Error& e) {
        return report_error(smoothdyn::to_string(e.kind()), e.what(), smoothdyn::exit_code(e.kind()));
    } catch (const nlohmann::json::exception& e) {
        return report_error("config", e.what(), smoothdyn::exit_code(smoothdyn::ErrorKind::config));
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
    return 0;
}
