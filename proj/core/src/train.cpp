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

#include <smoothdyn/graph.hpp>
#include <smoothdyn/rng.hpp>
#include <smoothdyn/train.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace smoothdyn {

void TrainConfig::validate() const
{
    require(lr >= 0.0 && std::isfinite(lr), ErrorKind::config, "train: lr must be finite and >= 0");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::config, "train: betas must lie in [0, 1)");
    require(epochs >= 1, ErrorKind::config, "train: epochs must be >= 1");
    require(batch_size >= 1, ErrorKind::config, "train: batch_size must be >= 1");
    require(bptt_rollout >= 1, ErrorKind::config, "train: bptt_rollout must be >= 1");
    require(input_window >= 1, ErrorKind::config, "train: input_window must be >= 1");
    require(!grad_clip || *grad_clip > 0.0, ErrorKind::config, "train: grad_clip must be > 0");
    require(val_fraction >= 0.0 && val_fraction < 1.0, ErrorKind::config, "train: val_fraction must lie in [0, 1)");
    require(windows_per_epoch >= 0, ErrorKind::config, "train: windows_per_epoch must be >= 0");
}

template <typename T>
NodeId mse_loss(Tape<T>& tape, NodeId pred, NodeId target)
{
    return tape.mse(pred, target);
}

template <typename T>
void adam_step(const std::vector<Param<T>*>& params, AdamState<T>& state, double lr, double beta1, double beta2, double eps)
{
    if (state.m.size() != params.size()) {
        state.step = 0;
        state.m.clear();
        state.v.clear();
        for (const Param<T>* p : params) {
            state.m.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
            state.v.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
        }
    }
    for (const Param<T>* p : params) {
        if (!p->grad.allFinite()) fail(ErrorKind::numerical, "adam: non-finite gradient in parameter '" + p->name + "'");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param<T>& p = *params[k];
        require(
            state.m[k].rows() == p.value.rows() && state.m[k].cols() == p.value.cols(),
            ErrorKind::dimension,
            "adam: state shape does not match parameter '" + p.name + "'");
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * p.grad;
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * p.grad.cwiseAbs2().template cast<T>();
        const RealMatrix denom = (state.v[k].real() / c2).cwiseSqrt().array() + eps;
        p.value.array() -= (lr / c1) * state.m[k].array() / denom.array().template cast<T>();
    }
}

template <typename T>
double clip_grad_norm(const std::vector<Param<T>*>& params, double max_norm)
{
    double sq = 0.0;
    for (const Param<T>* p : params) sq += p->grad.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > max_norm && std::isfinite(norm)) {
        const double scale = max_norm / norm;
        for (Param<T>* p : params) p->grad *= scale;
    }
    return norm;
}

std::vector<Window> enumerate_windows(const std::vector<SequenceSample>& data, int input_window, int horizon)
{
    std::vector<Window> out;
    const auto need = static_cast<std::size_t>(input_window + horizon);
    for (std::size_t s = 0; s < data.size(); ++s) {
        const std::size_t frames = data[s].frames.size();
        for (std::size_t start = 0; start + need <= frames; ++start) out.push_back({s, start});
    }
    return out;
}

RealMatrix stack_frames(const std::vector<RealMatrix>& frames, std::size_t start, std::size_t count)
{
    require(count >= 1 && start + count <= frames.size(), ErrorKind::argument, "stack_frames: range out of bounds");
    const Eigen::Index n = frames[start].rows();
    const Eigen::Index fw = frames[start].cols();
    RealMatrix out(n, fw * static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
        const RealMatrix& f = frames[start + k];
        if (f.rows() != n || f.cols() != fw) fail(ErrorKind::dimension, "stack_frames: frames differ in shape");
        out.middleCols(static_cast<Eigen::Index>(k) * fw, fw) = f;
    }
    return out;
}

namespace {

/// Drops the oldest frame of the window and appends `pred`.
template <typename T>
NodeId shift_window(Tape<T>& tape, NodeId x, NodeId pred, int window, Eigen::Index fw)
{
    if (window == 1) return pred;
    const Eigen::Index width = fw * window;
    const NodeId kept = tape.zero_pad(tape.slice_columns(x, fw, width - fw), width);
    Matrix<T> place = Matrix<T>::Zero(fw, width);
    for (Eigen::Index i = 0; i < fw; ++i) place(i, width - fw + i) = T(1.0);
    return tape.add(kept, tape.matmul(pred, tape.constant(std::move(place))));
}

RealMatrix shift_window(const RealMatrix& x, const RealMatrix& pred)
{
    const Eigen::Index fw = pred.cols();
    RealMatrix out(x.rows(), x.cols());
    out.leftCols(x.cols() - fw) = x.rightCols(x.cols() - fw);
    out.rightCols(fw) = pred;
    return out;
}

void check_data(const std::vector<SequenceSample>& data, const ModelSpec& spec, int input_window)
{
    require(!data.empty(), ErrorKind::argument, "train: empty dataset");
    require(
        spec.input_width() == spec.frame_width * input_window,
        ErrorKind::config,
        "train: model input width " + std::to_string(spec.input_width()) + " != frame_width x input_window (" +
            std::to_string(spec.frame_width) + " x " + std::to_string(input_window) + ")");
    for (std::size_t s = 0; s < data.size(); ++s) {
        require(data[s].op != nullptr, ErrorKind::argument, "train: sample " + std::to_string(s) + " has no operator");
        for (const RealMatrix& f : data[s].frames) {
            if (f.rows() != data[s].op->rows() || f.cols() != spec.frame_width) {
                fail(
                    ErrorKind::dimension,
                    "train: sample " + std::to_string(s) + " has a frame of shape " + std::to_string(f.rows()) + "x" +
                        std::to_string(f.cols()) + ", expected " + std::to_string(data[s].op->rows()) + "x" +
                        std::to_string(spec.frame_width));
            }
        }
    }
}

double safe_rq(const SparseOperator& op, const RealMatrix& x, std::size_t& skipped)
{
    if (x.squaredNorm() == 0.0 || !x.allFinite()) {
        ++skipped;
        return 0.0;
    }
    return rayleigh_quotient_operator(op, x);
}

} // namespace

template <typename T>
EpochRecord evaluate_windows(
    Model<T>& model,
    const std::vector<SequenceSample>& data,
    const std::vector<Window>& windows,
    int input_window,
    int horizon)
{
    EpochRecord rec;
    if (windows.empty()) return rec;
    double mse_sum = 0.0;
    double pred_rq = 0.0;
    double target_rq = 0.0;
    std::size_t rq_count = 0;
    for (const Window& w : windows) {
        const SequenceSample& s = data[w.sample];
        RealMatrix x = stack_frames(s.frames, w.start, static_cast<std::size_t>(input_window));
        double window_mse = 0.0;
        for (int r = 0; r < horizon; ++r) {
            const RealMatrix pred = model.predict(x, s.op);
            const RealMatrix& target = s.frames[w.start + static_cast<std::size_t>(input_window + r)];
            window_mse += (pred - target).squaredNorm() / static_cast<double>(target.size());
            if (r == 0) {
                std::size_t skipped = 0;
                const double p = safe_rq(*s.op, pred, skipped);
                const double t = safe_rq(*s.op, target, skipped);
                if (skipped == 0) {
                    pred_rq += p;
                    target_rq += t;
                    ++rq_count;
                }
            }
            if (r + 1 < horizon) x = input_window == 1 ? pred : shift_window(x, pred);
        }
        mse_sum += window_mse / horizon;
    }
    rec.val_mse = mse_sum / static_cast<double>(windows.size());
    if (rq_count > 0) {
        rec.mean_pred_rq = pred_rq / static_cast<double>(rq_count);
        rec.mean_target_rq = target_rq / static_cast<double>(rq_count);
    }
    return rec;
}

template <typename T>
TrainResult train(Model<T>& model, const std::vector<SequenceSample>& data, const TrainConfig& cfg)
{
    cfg.validate();
    check_data(data, model.spec(), cfg.input_window);
    const int horizon = cfg.bptt_rollout;
    std::vector<Window> windows = enumerate_windows(data, cfg.input_window, horizon);
    require(
        !windows.empty(),
        ErrorKind::config,
        "train: no sequence has input_window + bptt_rollout = " + std::to_string(cfg.input_window + horizon) + " frames");

    Rng split_rng(derive_seed(cfg.seed, "split"));
    std::shuffle(windows.begin(), windows.end(), split_rng);
    std::size_t n_val = static_cast<std::size_t>(std::lround(cfg.val_fraction * static_cast<double>(windows.size())));
    if (cfg.val_fraction > 0.0 && n_val == 0 && windows.size() >= 2) n_val = 1;
    n_val = std::min(n_val, windows.size() - 1);
    std::vector<Window> val(windows.begin(), windows.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<Window> tr(windows.begin() + static_cast<std::ptrdiff_t>(n_val), windows.end());
    auto by_position = [](const Window& a, const Window& b) {
        return a.sample != b.sample ? a.sample < b.sample : a.start < b.start;
    };
    std::sort(val.begin(), val.end(), by_position);
    std::sort(tr.begin(), tr.end(), by_position);

    const Eigen::Index fw = model.spec().frame_width;
    const std::vector<Param<T>*> params = model.param_ptrs();
    AdamState<T> adam;
    Rng order_rng(derive_seed(cfg.seed, "order"));
    TrainResult result;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::size_t> order(tr.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (cfg.windows_per_epoch > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, tr.size() - 1);
            order.resize(static_cast<std::size_t>(cfg.windows_per_epoch));
            for (auto& o : order) o = pick(order_rng);
        } else {
            std::shuffle(order.begin(), order.end(), order_rng);
        }
        // Per-slot losses, summed in slot order so lr = 0 gives identical epochs.
        std::vector<double> slot_loss(tr.size(), 0.0);
        std::vector<int> slot_hits(tr.size(), 0);

        for (std::size_t b0 = 0; b0 < order.size() && !result.diverged; b0 += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(cfg.batch_size));
            const T scale = T(1.0 / static_cast<double>(b1 - b0));
            zero_grad(params);
            for (std::size_t k = b0; k < b1; ++k) {
                const Window& w = tr[order[k]];
                const SequenceSample& s = data[w.sample];
                Tape<T> tape;
                NodeId x = tape.constant(to_scalar<T>(stack_frames(s.frames, w.start, static_cast<std::size_t>(cfg.input_window))));
                NodeId loss = 0;
                for (int r = 0; r < horizon; ++r) {
                    const NodeId pred = model.forward(tape, x, s.op);
                    const NodeId target = tape.constant(
                        to_scalar<T>(s.frames[w.start + static_cast<std::size_t>(cfg.input_window + r)]));
                    const NodeId step = mse_loss(tape, pred, target);
                    loss = r == 0 ? step : tape.add(loss, step);
                    if (r + 1 < horizon) x = shift_window(tape, x, pred, cfg.input_window, fw);
                }
                const double value = std::real(tape.value(loss)(0, 0)) / horizon;
                if (!std::isfinite(value)) {
                    result.diverged = true;
                    result.message = "non-finite training loss in epoch " + std::to_string(epoch);
                    break;
                }
                slot_loss[order[k]] += value;
                ++slot_hits[order[k]];
                tape.backward(tape.scalar_multiply(scale, loss));
            }
            if (result.diverged) break;
            if (cfg.grad_clip) clip_grad_norm(params, *cfg.grad_clip);
            try {
                adam_step(params, adam, cfg.lr, cfg.beta1, cfg.beta2);
            } catch (const Error& e) {
                result.diverged = true;
                result.message = e.what();
            }
        }

        EpochRecord rec = evaluate_windows(model, data, val, cfg.input_window, horizon);
        rec.epoch = epoch;
        double total = 0.0;
        int hits = 0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            total += slot_loss[k];
            hits += slot_hits[k];
        }
        rec.train_mse = hits > 0 ? total / hits : std::numeric_limits<double>::quiet_NaN();
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!std::isfinite(rec.val_mse) && !result.diverged) {
            result.diverged = true;
            result.message = "non-finite validation loss in epoch " + std::to_string(epoch);
        }
        result.history.push_back(rec);
        if (result.diverged) break;
    }
    return result;
}

template <typename T>
Trajectory rollout(Model<T>& model, const OperatorPtr& op, const std::vector<RealMatrix>& initial_window, int steps)
{
    require(op != nullptr, ErrorKind::argument, "rollout: no operator");
    require(steps >= 1, ErrorKind::argument, "rollout: steps must be >= 1");
    const int window = static_cast<int>(initial_window.size());
    require(
        window >= 1 && model.spec().input_width() == model.spec().frame_width * window,
        ErrorKind::dimension,
        "rollout: model expects " + std::to_string(model.spec().input_width() / model.spec().frame_width) +
            " input frames, got " + std::to_string(window));
    Trajectory out;
    out.domain_id = "rollout";
    RealMatrix x = stack_frames(initial_window, 0, initial_window.size());
    for (int k = 1; k <= steps; ++k) {
        RealMatrix pred = model.predict(x, op);
        if (!pred.allFinite()) {
            out.truncated = true;
            break;
        }
        out.times.push_back(static_cast<double>(k));
        out.frames.push_back(pred);
        if (k < steps) x = window == 1 ? pred : shift_window(x, pred);
    }
    return out;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history)
{
    out << "epoch,train_mse,val_mse,mean_pred_rq,mean_target_rq,seconds\n";
    out << std::setprecision(17);
    for (const EpochRecord& r : history) {
        out << r.epoch << ',' << r.train_mse << ',' << r.val_mse << ',' << r.mean_pred_rq << ',' << r.mean_target_rq << ','
            << r.seconds << '\n';
    }
}

void save_history_csv(const std::string& path, const std::vector<EpochRecord>& history)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path + "'");
    write_history_csv(out, history);
}

#define SMOOTHDYN_INSTANTIATE(T)                                                                                      \
    template NodeId mse_loss(Tape<T>&, NodeId, NodeId);                                                               \
    template void adam_step(const std::vector<Param<T>*>&, AdamState<T>&, double, double, double, double);           \
    template double clip_grad_norm(const std::vector<Param<T>*>&, double);                                            \
    template EpochRecord evaluate_windows(Model<T>&, const std::vector<SequenceSample>&, const std::vector<Window>&, int, int); \
    template TrainResult train(Model<T>&, const std::vector<SequenceSample>&, const TrainConfig&);                    \
    template Trajectory rollout(Model<T>&, const OperatorPtr&, const std::vector<RealMatrix>&, int);

SMOOTHDYN_INSTANTIATE(double)
SMOOTHDYN_INSTANTIATE(Complex)

#undef SMOOTHDYN_INSTANTIATE

} // namespace smoothdyn
