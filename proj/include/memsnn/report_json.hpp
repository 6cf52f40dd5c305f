#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "memsnn/analysis.hpp"
#include "memsnn/config.hpp"

namespace memsnn {

inline nlohmann::ordered_json report_to_json(const Report& r, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  j["correct"] = r.correct;
  j["no_decision"] = r.no_decision_total;
  j["classes"] = r.classes;
  nlohmann::ordered_json recall = nlohmann::ordered_json::object();
  nlohmann::ordered_json no_dec = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    recall[std::to_string(r.classes[k])] = r.recall[k];
    no_dec[std::to_string(r.classes[k])] = r.no_decision[k];
  }
  j["per_class_recall"] = recall;
  j["per_class_no_decision"] = no_dec;
  j["confusion"] = r.confusion;
  j["seed"] = cfg.sim.seed;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : to_map(cfg)) echo[k] = v;
  j["config"] = echo;
  return j;
}

inline nlohmann::ordered_json optional_to_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace memsnn
