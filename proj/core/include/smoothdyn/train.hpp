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

#include <smoothdyn/dataset.hpp>
#include <smoothdyn/model.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace smoothdyn {

struct TrainConfig
{
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int epochs = 20;
    int batch_size = 16;
    /// Autoregressive steps backpropagated per window.
    int bptt_rollout = 3;
    /// Frames per model input.
    int input_window = 1;
    std::uint64_t seed = 0;
    /// Global-norm clipping threshold; none disables clipping.
    std::optional<double> grad_clip = 1.0;
    /// Fraction of windows held out for validation.
    double val_fraction = 0.2;
    /// Training windows drawn per epoch; 0 uses every training window.
    int windows_per_epoch = 0;

    void validate() const;
};

/// Mean squared difference over all entries, as a 1x1 node.
template <typename T>
NodeId mse_loss(Tape<T>& tape, NodeId pred, NodeId target);

template <typename T>
struct AdamState
{
    long step = 0;
    std::vector<Matrix<T>> m;
    std::vector<Matrix<T>> v;
};

/// One bias-corrected Adam update from the gradients stored in `params`.
/// A non-finite gradient raises a numerical error naming the parameter.
template <typename T>
void adam_step(
    const std::vector<Param<T>*>& params,
    AdamState<T>& state,
    double lr,
    double beta1,
    double beta2,
    double eps = 1e-8);

/// Scales all gradients so their joint Frobenius norm is at most `max_norm`.
/// Returns the norm before scaling.
template <typename T>
double clip_grad_norm(const std::vector<Param<T>*>& params, double max_norm);

struct EpochRecord
{
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    /// Mean Rayleigh quotient of first-step validation predictions and their targets.
    double mean_pred_rq = 0.0;
    double mean_target_rq = 0.0;
    double seconds = 0.0;
};

struct TrainResult
{
    std::vector<EpochRecord> history;
    bool diverged = false;
    std::string message;
};

/// A training window: sample index and first input frame.
struct Window
{
    std::size_t sample = 0;
    std::size_t start = 0;
};

/// All windows with `input_window` input frames followed by `horizon` targets.
std::vector<Window> enumerate_windows(const std::vector<SequenceSample>& data, int input_window, int horizon);

/// Columns of frames[start .. start + count) side by side.
RealMatrix stack_frames(const std::vector<RealMatrix>& frames, std::size_t start, std::size_t count);

/// Teacher-forced first window, then `bptt_rollout` free-running steps whose
/// per-step MSE is averaged and backpropagated.
template <typename T>
TrainResult train(Model<T>& model, const std::vector<SequenceSample>& data, const TrainConfig& cfg);

/// Average per-step MSE and prediction RQ statistics over `windows`, no gradients.
template <typename T>
EpochRecord evaluate_windows(
    Model<T>& model,
    const std::vector<SequenceSample>& data,
    const std::vector<Window>& windows,
    int input_window,
    int horizon);

/// Applies the model repeatedly, shifting the window. Returns `steps` predicted
/// frames at times 1..steps; a non-finite prediction stops early and sets
/// `truncated`.
template <typename T>
Trajectory rollout(
    Model<T>& model,
    const OperatorPtr& op,
    const std::vector<RealMatrix>& initial_window,
    int steps);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);
void save_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

} // namespace smoothdyn
