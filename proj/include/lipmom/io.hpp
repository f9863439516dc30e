#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "lipmom/datagen.hpp"

namespace lipmom {

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// Generating function from JSON:
///   {"kind": "linear", "coeffs": [...]}, {"kind": "ones"} (all-ones of dimension p),
///   {"kind": "kernel_unit", "kernel": {...}, "x0": 0.3}.
Truth truth_from_json(const nlohmann::json& j, Eigen::Index p);

/// Dataset from {"csv": path, "truth"?: {...}} or
/// {"generate": {"N", "p", "seed", "design", "noise", "truth", "contamination"?}}.
/// Relative csv paths resolve against `base_dir`.
Dataset dataset_from_json(const nlohmann::json& j, const std::string& base_dir = {});

}  // namespace lipmom
