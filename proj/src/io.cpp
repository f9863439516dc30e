#include "lipmom/io.hpp"

#include <filesystem>
#include <fstream>

#include "lipmom/error.hpp"

namespace lipmom {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Truth truth_from_json(const nlohmann::json& j, Eigen::Index p) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    const auto c = j.at("coeffs").get<std::vector<double>>();
    return LinearTruth{Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()))};
  }
  if (kind == "ones") return LinearTruth{Eigen::VectorXd::Ones(p)};
  if (kind == "kernel_unit") {
    const KernelSpec kernel = j.at("kernel").get<KernelSpec>();
    return unit_norm_kernel_truth(kernel, j.value("x0", 0.3));
  }
  throw DomainError("unknown truth kind: " + kind);
}

Dataset dataset_from_json(const nlohmann::json& j, const std::string& base_dir) {
  if (j.contains("csv")) {
    std::filesystem::path path = j.at("csv").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
    Dataset data = read_dataset_csv(path.string());
    if (j.contains("truth")) data.truth = truth_from_json(j.at("truth"), data.dim());
    return data;
  }
  if (!j.contains("generate")) throw DomainError("data: expected \"csv\" or \"generate\"");
  const auto& g = j.at("generate");
  const auto n = g.at("N").get<Eigen::Index>();
  const auto p = g.value("p", Eigen::Index{1});
  const auto seed = g.value("seed", std::uint64_t{0});
  const DesignSpec design = g.contains("design") ? g.at("design").get<DesignSpec>() : DesignSpec{};
  const NoiseSpec noise = g.contains("noise") ? g.at("noise").get<NoiseSpec>() : NoiseSpec{};
  const Truth truth = truth_from_json(g.value("truth", nlohmann::json{{"kind", "ones"}}), p);
  Dataset data = make_regression_dataset(design, noise, truth, n, seed);
  if (g.contains("contamination")) {
    const auto& c = g.at("contamination");
    data = contaminate(data, c.at("frac").get<double>(), c.value("magnitude", 1e6),
                       contamination_mode_from_string(c.value("mode", std::string("x_only"))), seed);
  }
  return data;
}

}  // namespace lipmom
