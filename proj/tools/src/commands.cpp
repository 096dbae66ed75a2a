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
#include "config.hpp"

#include <smoothdyn/bound.hpp>
#include <smoothdyn/dataset.hpp>
#include <smoothdyn/graph.hpp>
#include <smoothdyn/mesh_io.hpp>
#include <smoothdyn/metrics.hpp>
#include <smoothdyn/model.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/sensitivity.hpp>
#include <smoothdyn/train.hpp>
#include <smoothdyn/trajectory_io.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#ifndef SMOOTHDYN_VERSION
#define SMOOTHDYN_VERSION "unknown"
#endif
#ifndef SMOOTHDYN_BUILD_TYPE
#define SMOOTHDYN_BUILD_TYPE "unknown"
#endif

namespace fs = std::filesystem;

namespace smoothdyn::cli {

namespace {

void make_out_dir(const std::string& out)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    require(!ec, ErrorKind::io, out + ": cannot create directory: " + ec.message());
}

void write_json(const std::string& path, const json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

void require_file(const std::string& path, const std::string& what)
{
    require(fs::exists(path), ErrorKind::io, what + " '" + path + "' does not exist");
}

std::string config_dir(const std::string& config)
{
    const fs::path parent = fs::absolute(config).parent_path();
    return parent.string();
}

std::string generic(const fs::path& p)
{
    return p.lexically_normal().generic_string();
}

json grid_domain(int rows, int cols)
{
    return json{{"type", "grid"}, {"rows", rows}, {"cols", cols}};
}

std::string domain_key(const json& d)
{
    return d.dump();
}

template <typename F>
auto with_model(const ModelSpec& spec, F&& f)
{
    if (spec.scalar_kind == ScalarKind::complex128) {
        Model<Complex> m(spec);
        return f(m);
    }
    Model<double> m(spec);
    return f(m);
}

template <typename F>
auto with_checkpoint(const std::string& dir, F&& f)
{
    const ModelSpec spec = read_checkpoint_spec(dir);
    if (spec.scalar_kind == ScalarKind::complex128) {
        Model<Complex> m = load_checkpoint<Complex>(dir);
        return f(m);
    }
    Model<double> m = load_checkpoint<double>(dir);
    return f(m);
}

} // namespace

Domain load_domain(const json& descriptor, const std::string& base_dir)
{
    const std::string where = "domain";
    require(descriptor.is_object() && descriptor.contains("type"), ErrorKind::config, where + ": missing 'type'");
    const std::string type = descriptor.at("type").get<std::string>();
    Domain d;
    d.descriptor = descriptor;
    if (type == "grid") {
        check_keys(descriptor, {"type", "rows", "cols"}, where);
        const int rows = descriptor.at("rows").get<int>();
        const int cols = descriptor.at("cols").get<int>();
        require(rows >= 1 && cols >= 1, ErrorKind::config, where + ": bad grid shape");
        d.op = std::make_shared<const SparseOperator>(normalized_adjacency_sparse(grid_graph(rows, cols)));
        d.positions = RealMatrix::Zero(static_cast<Eigen::Index>(rows) * cols, 3);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                d.positions(r * cols + c, 0) = r;
                d.positions(r * cols + c, 1) = c;
            }
        return d;
    }
    if (type == "mesh") {
        check_keys(descriptor, {"type", "path", "rewire"}, where);
        fs::path p = descriptor.at("path").get<std::string>();
        if (p.is_relative()) p = fs::path(base_dir) / p;
        require_file(p.string(), "mesh");
        const TriMesh mesh = load_mesh(p.string());
        const MeshOperators ops = mesh_operators(mesh, descriptor.value("rewire", true));
        d.descriptor["path"] = generic(fs::absolute(p));
        d.op = ops.adjacency;
        d.positions = mesh.positions();
        return d;
    }
    fail(ErrorKind::config, where + ": unknown type '" + type + "'");
}

void save_trajectory_with_domain(const std::string& path, const Trajectory& traj, const json& domain)
{
    save_trajectory(path, traj);
    write_json(path + ".json", json{{"domain", domain}, {"truncated", traj.truncated}});
}

Trajectory load_trajectory_with_domain(const std::string& path, json* domain)
{
    require_file(path, "trajectory");
    Trajectory traj = load_trajectory(path);
    const std::string sidecar = path + ".json";
    require_file(sidecar, "trajectory sidecar");
    const json meta = read_json_file(sidecar);
    check_keys(meta, {"domain", "truncated"}, sidecar);
    traj.truncated = meta.value("truncated", false);
    if (domain) {
        *domain = meta.at("domain");
        if (domain->value("type", "") == "mesh") {
            fs::path p = domain->at("path").get<std::string>();
            if (p.is_relative()) (*domain)["path"] = generic(fs::absolute(fs::path(path).parent_path() / p));
        }
    }
    return traj;
}

// ---------------------------------------------------------------- gen-data

void cmd_gen_data(const std::string& config, const std::string& out, const CommonOptions& opts)
{
    require_file(config, "config");
    GenDataConfig cfg = gen_data_config_from_json(read_json_file(config));
    for (auto& m : cfg.meshes)
        if (m.shape == "file" && fs::path(m.path).is_relative()) m.path = generic(fs::path(config_dir(config)) / m.path);
    make_out_dir(out);
    json manifest{{"kind", cfg.kind}, {"seed", cfg.seed}, {"entries", json::array()}};

    if (cfg.kind == "heat_grid") {
        HeatGridConfig hg = cfg.heat_grid;
        hg.threads = opts.threads;
        const auto samples = gen_heat_grid_dataset(hg);
        make_out_dir(out + "/samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            char name[32];
            std::snprintf(name, sizeof name, "samples/%06zu.traj", i);
            Trajectory t;
            if (s.trajectory) {
                t = *s.trajectory;
            } else {
                t.times = {hg.input_time, hg.target_time};
                t.frames = {s.input, s.target};
            }
            save_trajectory_with_domain(out + "/" + name, t, grid_domain(s.rows, s.cols));
            manifest["entries"].push_back({{"file", name}, {"domain", grid_domain(s.rows, s.cols)},
                {"input_time", hg.input_time}, {"target_time", hg.target_time}});
        }
    } else {
        make_out_dir(out + "/meshes");
        make_out_dir(out + "/trajectories");
        for (std::size_t m = 0; m < cfg.meshes.size(); ++m) {
            const MeshSource& src = cfg.meshes[m];
            const TriMesh mesh = build_mesh(src);
            const std::string mesh_file = "meshes/" + src.name + ".off";
            save_off(out + "/" + mesh_file, mesh);
            const MeshOperators ops = mesh_operators(mesh, cfg.rewire);
            const auto trajs = gen_mesh_trajectories(
                mesh, ops, cfg.pde, cfg.initial_conditions, derive_seed(cfg.seed, "mesh:" + src.name));
            for (std::size_t k = 0; k < trajs.size(); ++k) {
                const std::string file = "trajectories/" + src.name + "_" + std::to_string(k) + ".traj";
                const json domain{{"type", "mesh"}, {"path", "../" + mesh_file}, {"rewire", cfg.rewire}};
                save_trajectory_with_domain(out + "/" + file, trajs[k], domain);
                manifest["entries"].push_back(
                    {{"file", file}, {"domain", {{"type", "mesh"}, {"path", mesh_file}, {"rewire", cfg.rewire}}},
                        {"frames", trajs[k].size()}, {"dt", cfg.pde.dt}});
            }
        }
    }
    write_json(out + "/manifest.json", manifest);
    write_json(out + "/resolved_config.json", gen_data_config_to_json(cfg));
}

// ---------------------------------------------------------------- train

namespace {

std::vector<SequenceSample> load_sequences(const std::string& data_dir)
{
    const std::string manifest_path = data_dir + "/manifest.json";
    require_file(manifest_path, "dataset manifest");
    const json manifest = read_json_file(manifest_path);
    check_keys(manifest, {"kind", "seed", "entries"}, manifest_path);
    const std::string kind = manifest.at("kind").get<std::string>();
    std::map<std::string, OperatorPtr> ops;
    std::vector<SequenceSample> data;
    for (const json& e : manifest.at("entries")) {
        const std::string file = data_dir + "/" + e.at("file").get<std::string>();
        require_file(file, "trajectory");
        const Trajectory t = load_trajectory(file);
        const json& dom = e.at("domain");
        auto& op = ops[domain_key(dom)];
        if (!op) op = load_domain(dom, data_dir).op;
        SequenceSample s{op, {}};
        if (kind == "heat_grid") {
            for (const char* key : {"input_time", "target_time"}) {
                const double time = e.at(key).get<double>();
                std::size_t k = 0;
                while (k < t.times.size() && std::abs(t.times[k] - time) > 1e-9) ++k;
                require(k < t.times.size(), ErrorKind::io, file + ": no frame at time " + std::to_string(time));
                s.frames.push_back(t.frames[k]);
            }
        } else {
            s.frames = t.frames;
        }
        data.push_back(std::move(s));
    }
    require(!data.empty(), ErrorKind::io, manifest_path + ": no entries");
    return data;
}

template <typename T>
TrainResult train_one(Model<T>& model, const std::vector<SequenceSample>& data, const TrainConfig& tc, const std::string& dir)
{
    make_out_dir(dir);
    TrainResult r = train(model, data, tc);
    save_history_csv(dir + "/history.csv", r.history);
    save_checkpoint(dir + "/checkpoint", model);
    write_json(dir + "/train_status.json",
        json{{"diverged", r.diverged}, {"message", r.message}, {"parameter_count", model.parameter_count()},
            {"epochs_run", r.history.size()}});
    return r;
}

std::string lr_label(double lr)
{
    std::ostringstream s;
    s << "lr_" << std::setprecision(6) << lr;
    return s.str();
}

} // namespace

void cmd_train(const std::string& config, const std::string& data_dir, const std::string& out, const CommonOptions&)
{
    require_file(config, "config");
    const TrainRunConfig cfg = train_run_config_from_json(read_json_file(config));
    const auto data = load_sequences(data_dir);
    make_out_dir(out);
    write_json(out + "/resolved_config.json", train_run_config_to_json(cfg));
    const ModelSpec spec = cfg.resolved_model();

    if (cfg.lr_sweep.empty()) {
        with_model(spec, [&](auto& model) { return train_one(model, data, cfg.train, out); });
        return;
    }
    std::ostringstream summary;
    summary << "lr,final_train_mse,final_val_mse,best_val_mse,diverged,dir\n" << std::setprecision(17);
    for (double lr : cfg.lr_sweep) {
        TrainConfig tc = cfg.train;
        tc.lr = lr;
        const std::string dir = lr_label(lr);
        const TrainResult r = with_model(spec, [&](auto& model) { return train_one(model, data, tc, out + "/" + dir); });
        double best = std::numeric_limits<double>::quiet_NaN();
        for (const auto& e : r.history)
            if (!(e.val_mse >= best)) best = e.val_mse;
        const double tr = r.history.empty() ? std::nan("") : r.history.back().train_mse;
        const double va = r.history.empty() ? std::nan("") : r.history.back().val_mse;
        summary << lr << ',' << tr << ',' << va << ',' << best << ',' << (r.diverged ? 1 : 0) << ',' << dir << '\n';
    }
    write_text_file(out + "/sweep.csv", summary.str());
}

// ---------------------------------------------------------------- rollout

void cmd_rollout(const std::string& checkpoint, const std::string& init, int steps, const std::string& out)
{
    require(fs::is_directory(checkpoint), ErrorKind::io, "checkpoint '" + checkpoint + "' is not a directory");
    require(steps >= 1, ErrorKind::argument, "rollout: --steps must be >= 1");
    json domain;
    const Trajectory t0 = load_trajectory_with_domain(init, &domain);
    const Domain dom = load_domain(domain, fs::path(init).parent_path().string());
    make_out_dir(out);

    Trajectory pred = with_checkpoint(checkpoint, [&](auto& model) {
        const int fw = model.spec().frame_width;
        const int window = model.spec().input_width() / fw;
        require(static_cast<int>(t0.size()) >= window, ErrorKind::argument,
            "rollout: init has " + std::to_string(t0.size()) + " frames, the model needs " + std::to_string(window));
        std::vector<RealMatrix> first(t0.frames.begin(), t0.frames.begin() + window);
        Trajectory p = rollout(model, dom.op, first, steps);
        const double t_last = t0.times[static_cast<std::size_t>(window) - 1];
        const double dt = t0.size() >= 2 ? t0.times[1] - t0.times[0] : 1.0;
        for (std::size_t k = 0; k < p.times.size(); ++k) p.times[k] = t_last + dt * static_cast<double>(k + 1);
        return p;
    });
    if (pred.frames.empty()) {
        // Nothing finite to store; keep a marker so eval reports the truncation.
        write_json(out + "/rollout_status.json", json{{"truncated", true}, {"frames", 0}});
        fail(ErrorKind::numerical, "rollout: the first prediction is not finite");
    }
    save_trajectory_with_domain(out + "/rollout.traj", pred, dom.descriptor);
    write_json(out + "/rollout_status.json", json{{"truncated", pred.truncated}, {"frames", pred.size()}});
    write_json(out + "/resolved_config.json",
        json{{"checkpoint", generic(fs::absolute(checkpoint))}, {"init", generic(fs::absolute(init))}, {"steps", steps}});
}

// ---------------------------------------------------------------- eval

void cmd_eval(
    const std::string& pred_path,
    const std::string& truth_path,
    const std::vector<std::string>& metrics,
    const std::string& out)
{
    static const std::set<std::string> known{"nrmse", "smape", "re", "mre", "err_smooth"};
    require(!metrics.empty(), ErrorKind::config, "eval: no metrics selected");
    for (const auto& m : metrics) require(known.count(m) != 0, ErrorKind::config, "eval: unknown metric '" + m + "'");

    json pred_domain, truth_domain;
    const Trajectory pred = load_trajectory_with_domain(pred_path, &pred_domain);
    const Trajectory truth = load_trajectory_with_domain(truth_path, &truth_domain);
    require(pred_domain == truth_domain, ErrorKind::argument, "eval: prediction and truth live on different domains");
    const Domain dom = load_domain(pred_domain, ".");

    // Align truth frames to prediction times.
    Trajectory target;
    target.times = pred.times;
    for (double t : pred.times) {
        std::size_t k = 0;
        while (k < truth.times.size() && std::abs(truth.times[k] - t) > 1e-9 * std::max(1.0, std::abs(t))) ++k;
        require(k < truth.times.size(), ErrorKind::argument, "eval: truth has no frame at time " + std::to_string(t));
        target.frames.push_back(truth.frames[k]);
    }

    const std::string run_id = fs::path(pred_path).stem().string();
    const std::string mesh_id = pred_domain.value("type", "") == "mesh"
        ? fs::path(pred_domain.at("path").get<std::string>()).stem().string()
        : "grid_" + std::to_string(pred_domain.value("rows", 0)) + "x" + std::to_string(pred_domain.value("cols", 0));
    std::vector<MetricRow> rows;
    for (const auto& m : metrics) {
        double v = 0.0;
        if (m == "nrmse") {
            v = nrmse(pred, target);
        } else if (m == "smape") {
            v = smape(pred, target);
        } else if (m == "re") {
            v = rayleigh_error(pred, target, *dom.op).value;
        } else if (m == "mre") {
            v = mre(pred.frames, target.frames, *dom.op);
        } else {
            // Eight equal bins up to a quarter of the bounding-box diagonal.
            const double diag = (dom.positions.colwise().maxCoeff() - dom.positions.colwise().minCoeff()).norm();
            std::vector<double> edges;
            for (int k = 0; k <= 8; ++k) edges.push_back(0.25 * diag * k / 8.0);
            v = err_smooth({dom.positions}, {pred}, {target}, edges).value;
        }
        rows.push_back({run_id, mesh_id, m, v});
    }
    make_out_dir(out);
    std::ofstream csv(out + "/metrics.csv");
    require(static_cast<bool>(csv), ErrorKind::io, out + "/metrics.csv: cannot write");
    write_metric_csv(csv, rows);
    const json meta{{"pred", generic(fs::absolute(pred_path))}, {"truth", generic(fs::absolute(truth_path))},
        {"frames", pred.size()}, {"truncated", pred.truncated}};
    write_text_file(out + "/metrics.json", metric_summary_json(rows, meta.dump()) + "\n");
    write_json(out + "/resolved_config.json", json{{"pred", meta["pred"]}, {"truth", meta["truth"]}, {"metrics", metrics}});
}

// ---------------------------------------------------------------- sensitivity

void cmd_sensitivity(const std::string& config, const std::string& out, const CommonOptions& opts)
{
    require_file(config, "config");
    SensitivityRunConfig cfg = sensitivity_config_from_json(read_json_file(config));
    cfg.sweep.threads = opts.threads;
    make_out_dir(out);
    write_json(out + "/resolved_config.json", sensitivity_config_to_json(cfg));
    const SensitivityResult r = run_sensitivity(cfg.sweep);
    std::ofstream csv(out + "/sensitivity.csv");
    require(static_cast<bool>(csv), ErrorKind::io, out + "/sensitivity.csv: cannot write");
    write_sensitivity_csv(csv, r);
}

// ---------------------------------------------------------------- bound

void cmd_bound(const std::string& config, const std::string& out, const CommonOptions& opts)
{
    require_file(config, "config");
    const BoundRunConfig cfg = bound_config_from_json(read_json_file(config));
    make_out_dir(out);
    write_json(out + "/resolved_config.json", bound_config_to_json(cfg));
    const OrbitSampler sampler = cfg.sampler();

    json report;
    const BoundEstimate est =
        lower_bound_estimate(sampler, radius_grid(sampler, cfg.radii), cfg.samples, cfg.mode, opts.threads);
    report["bound"] = est.value;
    report["mc_stderr"] = est.mc_stderr;
    report["mode"] = to_string(cfg.mode);
    report["truncated_mass"] = est.truncated_mass;
    report["warnings"] = est.warnings;
    const VarianceMode other = cfg.mode == VarianceMode::norm ? VarianceMode::vector : VarianceMode::norm;
    const BoundEstimate alt =
        lower_bound_estimate(sampler, radius_grid(sampler, cfg.radii), cfg.samples, other, opts.threads);
    report["alternate"] = {{"mode", to_string(other)}, {"bound", alt.value}, {"mc_stderr", alt.mc_stderr}};

    if (cfg.unitary != "none") {
        VectorFn map;
        if (cfg.unitary == "fit_rotation") {
            const RotationFit fit =
                fit_rotation(sampler, cfg.fit_batch, cfg.fit_steps, cfg.fit_lr, derive_seed(cfg.seed, "fit"));
            const RealMatrix rot = fit.rotation;
            map = [rot](const Eigen::VectorXd& z) -> Eigen::VectorXd { return rot * z; };
            json r = json::array();
            for (Eigen::Index i = 0; i < rot.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index k = 0; k < rot.cols(); ++k) row.push_back(rot(i, k));
                r.push_back(row);
            }
            report["fit"] = {{"rotation", r}, {"final_loss", fit.final_loss}, {"steps", fit.steps}};
        } else {
            map = norm_matched_map(sampler.target);
        }
        OrbitSampler eval_sampler = sampler;
        eval_sampler.seed = derive_seed(cfg.seed, "eval");
        const BoundReport br = verify_bound(eval_sampler, map, cfg.eval_samples, cfg.mode, cfg.radii, opts.threads);
        const double combined = std::sqrt(br.empirical_stderr * br.empirical_stderr + est.mc_stderr * est.mc_stderr);
        report["unitary"] = cfg.unitary;
        report["empirical_error"] = br.empirical_error;
        report["empirical_stderr"] = br.empirical_stderr;
        report["satisfied"] = br.empirical_error >= est.value - 3.0 * combined;
    }
    write_json(out + "/bound_report.json", report);
}

// ---------------------------------------------------------------- mesh-prep

void cmd_mesh_prep(const std::string& in, const std::string& out)
{
    require_file(in, "mesh");
    const TriMesh mesh = load_mesh(in);
    const ManifoldReport manifold = check_manifold(mesh);
    json report{{"input", generic(fs::absolute(in))}, {"vertices", mesh.vertex_count()},
        {"faces", mesh.faces().size()}, {"edges", mesh.edges().size()}, {"manifold", manifold.manifold()},
        {"boundary_edges", manifold.boundary_edges}};
    json bad_edges = json::array();
    for (const auto& e : manifold.edges) bad_edges.push_back({{"edge", {e.edge.first, e.edge.second}}, {"faces", e.face_count}});
    json bad_vertices = json::array();
    for (const auto& v : manifold.vertices) bad_vertices.push_back({{"vertex", v.vertex}, {"reason", v.reason}});
    report["edge_violations"] = bad_edges;
    report["vertex_violations"] = bad_vertices;
    make_out_dir(out);
    if (!manifold.manifold()) {
        write_json(out + "/rewiring_report.json", report);
        fail(ErrorKind::geometry, "mesh-prep: '" + in + "' is not a manifold mesh");
    }
    const IntrinsicMesh intrinsic = IntrinsicMesh::from_embedded(mesh);
    report["delaunay_violations_before"] = delaunay_violations(intrinsic).size();
    const MeshOperators ops = mesh_operators(mesh, true);
    const IntrinsicMesh rewired = intrinsic_delaunay_flip(intrinsic);
    report["delaunay_violations_after"] = delaunay_violations(rewired).size();
    report["flips"] = ops.flips;
    report["min_offdiagonal_weight"] = ops.min_offdiagonal_weight();
    report["surface_area"] = mesh.surface_area();
    write_text_file(out + "/operators.json", mesh_operators_to_json(ops) + "\n");
    write_json(out + "/rewiring_report.json", report);
    write_json(out + "/resolved_config.json", json{{"in", generic(fs::absolute(in))}});
}

std::string version_string()
{
    std::ostringstream s;
    s << "smoothdyn " << SMOOTHDYN_VERSION << "\n";
    s << "build type: " << SMOOTHDYN_BUILD_TYPE << "\n";
#if defined(__clang__)
    s << "compiler: clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__ << "\n";
#elif defined(__GNUC__)
    s << "compiler: gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__ << "\n";
#endif
    s << "eigen: " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << "\n";
    s << "c++: " << __cplusplus << "\n";
    return s.str();
}

} // namespace smoothdyn::cli
