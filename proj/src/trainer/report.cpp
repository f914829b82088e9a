#include <cmath>

#include "sinnet/trainer.hpp"

namespace sinnet {

using nlohmann::json;

json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json to_json(const TrainReport& report) {
  json j;
  j["status"] = report.status;
  j["steps_completed"] = report.steps_completed;
  j["lbfgs_iterations"] = report.lbfgs_iterations;
  json loss = json::array();
  json test = json::array();
  for (const auto& e : report.loss_history) {
    loss.push_back({e.step, json_number(e.train_loss)});
    if (e.test_loss) test.push_back({e.step, json_number(*e.test_loss)});
  }
  j["loss_history"] = std::move(loss);
  if (!test.empty()) j["test_loss_history"] = std::move(test);
  j["final_metrics"] = {{"mse", json_number(report.final_metrics.mse)},
                        {"psnr", json_number(report.final_metrics.psnr)}};
  if (report.identified_params) {
    j["identified_params"] = {{"lambda1", json_number(report.identified_params->first)},
                              {"lambda2", json_number(report.identified_params->second)}};
  } else {
    j["identified_params"] = nullptr;
  }
  if (!report.identified_params_history.empty()) {
    json lambdas = json::array();
    for (const auto& [step, l1, l2] : report.identified_params_history) {
      lambdas.push_back({step, json_number(l1), json_number(l2)});
    }
    j["identified_params_history"] = std::move(lambdas);
  }
  json norms = json::array();
  for (const auto& [step, v] : report.first_layer_spectral_norm_history) norms.push_back({step, json_number(v)});
  j["first_layer_spectral_norm_history"] = std::move(norms);
  return j;
}

json to_json(const TrainConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  j["steps"] = c.steps;
  j["learning_rate"] = c.learning_rate;
  j["first_layer_lr"] = c.first_layer_lr ? json(*c.first_layer_lr) : json(nullptr);
  j["final_lr_factor"] = c.final_lr_factor;
  j["lbfgs_steps"] = c.lbfgs_steps;
  j["batch_size"] = c.batch_size ? json(*c.batch_size) : json(nullptr);
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_eps"] = c.adam_eps;
  j["seed"] = c.seed;
  j["record_every"] = c.record_every;
  return j;
}

json to_json(const NetworkConfig& c) {
  json j;
  j["input_dim"] = c.input_dim;
  j["hidden_widths"] = c.hidden_widths;
  j["output_dim"] = c.output_dim;
  j["omega"] = c.omega;
  j["per_axis_scale"] = c.per_axis_scale.empty() ? std::vector<double>(c.input_dim, 1.0) : c.per_axis_scale;
  j["init_scheme"] = to_string(c.init);
  if (c.init == InitScheme::kSirenUniform) j["siren_c"] = c.siren_c;
  j["parametrization"] = to_string(c.parametrization);
  j["seed"] = c.seed;
  return j;
}

}  // namespace sinnet
