#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sinnet/jet.hpp"
#include "sinnet/network.hpp"
#include "sinnet/signal.hpp"

namespace sinnet {

enum class Task { kFit, kPoissonGrad, kPoissonLap, kBurgersIdent };

std::string to_string(Task task);

/// Training data laid out column-wise.
///
/// FIT:           targets are output_dim x N values.
/// POISSON_GRAD:  targets are input_dim x N gradient components.
/// POISSON_LAP:   targets are 1 x N Laplacian values.
/// BURGERS_IDENT: points are (tau, x) with tau = 2 t - 1, targets 1 x N u.
struct TrainData {
  Matrix points;
  Matrix targets;
  /// Optional held-out FIT set; its loss is logged next to the train loss.
  std::optional<std::pair<Matrix, Matrix>> test;
  /// Optional value targets for the final metrics (defaults to FIT targets).
  /// For the Poisson tasks the constant offset is removed before scoring,
  /// since derivative supervision cannot determine it.
  std::optional<std::pair<Matrix, Matrix>> eval;
};

/// Maps a Burgers dataset to the network's (tau, x) input convention.
TrainData burgers_train_data(const PdeDataset& data);

/// dt / dtau for the Burgers time rescaling tau = 2 t - 1.
inline constexpr double kBurgersTimeScale = 2.0;

struct TrainConfig {
  Task task = Task::kFit;
  std::size_t steps = 1000;
  double learning_rate = 1e-3;
  std::optional<double> first_layer_lr;
  /// Rates decay exponentially to this fraction of their start by the last step.
  double final_lr_factor = 1.0;
  /// Full-batch L-BFGS iterations run after the Adam steps (0 disables).
  std::size_t lbfgs_steps = 0;
  std::optional<std::size_t> batch_size;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t record_every = 100;

  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  ParamGradient grads;
  /// d loss / d (lambda1, lambda2) for BURGERS_IDENT, empty otherwise.
  std::vector<double> lambda_grads;
};

/// Loss and exact gradients over all columns of (points, targets). The
/// Burgers loss is MSE(u - u_obs) + MSE(u_t + l1 u u_x - l2 u_xx).
/// With `with_gradients` false only `loss` is filled in.
LossResult compute_loss(Task task, const SinusoidalNetwork& net, const Matrix& points, const Matrix& targets,
                        std::span<const double> lambdas = {}, bool with_gradients = true);

/// Loss value only, evaluated in column chunks to bound memory. Equals
/// compute_loss(...).loss up to summation order.
double loss_value(Task task, const SinusoidalNetwork& net, const Matrix& points, const Matrix& targets,
                  std::span<const double> lambdas = {});

struct Metrics {
  double mse = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
};

/// mse over all entries; psnr = -10 log10(mse) for unit-peak data.
Metrics evaluate(const SinusoidalNetwork& net, const Matrix& points, const Matrix& targets);
Metrics metrics_from_mse(double mse);

struct HistoryEntry {
  std::size_t step = 0;
  double train_loss = 0.0;
  std::optional<double> test_loss;
};

struct TrainReport {
  std::string status = "ok";  // "ok" or "diverged"
  std::size_t steps_completed = 0;  // Adam steps
  std::size_t lbfgs_iterations = 0;
  std::vector<HistoryEntry> loss_history;
  Metrics final_metrics;
  std::optional<std::pair<double, double>> identified_params;
  /// (step, lambda1, lambda2) at every recorded step; BURGERS_IDENT only.
  std::vector<std::tuple<std::size_t, double, double>> identified_params_history;
  std::vector<std::pair<std::size_t, double>> first_layer_spectral_norm_history;
};

/// Largest singular value by power iteration on W^T W (or W W^T, whichever
/// is smaller).
double spectral_norm(const Matrix& w, int max_iterations = 20, double tolerance = 1e-6);

/// Adam on every parameter (and on lambda for BURGERS_IDENT, starting at 0),
/// then optionally L-BFGS on the full data. Records the full-data loss and
/// the first-layer spectral norm at step 0, every `record_every` steps, and
/// at the last step; L-BFGS iterations continue the step count. A
/// non-finite loss stops training with status "diverged".
TrainReport train(SinusoidalNetwork& net, const TrainConfig& config, const TrainData& data);

nlohmann::json to_json(const TrainReport& report);
nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const NetworkConfig& config);

/// JSON number, or the string "inf"/"-inf"/"nan" for non-finite values.
nlohmann::json json_number(double v);

}  // namespace sinnet
