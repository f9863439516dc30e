#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lipmom/rkhs.hpp"

namespace lipmom {

enum class DesignKind { gaussian_iso, student, uniform_unit };

/// Law of the rows of the design. `student` coordinates are rescaled to unit
/// variance; `uniform_unit` draws scalar points on [0,1] for kernel settings.
struct DesignSpec {
  DesignKind kind = DesignKind::gaussian_iso;
  double nu = 5.0;
};

enum class NoiseKind { gaussian, student, cauchy, uniform };

/// Symmetric noise law. `scale` is sigma (gaussian), the scale of the
/// student / cauchy law, or the half-width (uniform).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double scale = 1.0;
  double nu = 3.0;

  static NoiseSpec gaussian(double sigma) { return {NoiseKind::gaussian, sigma, 0.0}; }
  static NoiseSpec student(double nu, double scale = 1.0) { return {NoiseKind::student, scale, nu}; }
  static NoiseSpec cauchy(double scale = 1.0) { return {NoiseKind::cauchy, scale, 0.0}; }
  static NoiseSpec uniform(double half_width) { return {NoiseKind::uniform, half_width, 0.0}; }
};

struct LinearTruth {
  Eigen::VectorXd coeffs;
};

struct KernelTruth {
  KernelSpec kernel;
  KernelModel function;
};

using Truth = std::variant<std::monostate, LinearTruth, KernelTruth>;

/// Evaluates the generating function on the rows of `inputs`.
Eigen::VectorXd evaluate_truth(const Truth& truth, const Eigen::MatrixXd& inputs);

struct Dataset {
  Eigen::MatrixXd inputs;   // N x p
  Eigen::VectorXd targets;  // N
  Truth truth;
  std::vector<Eigen::Index> outliers;  // sorted, unique

  Eigen::Index size() const noexcept { return targets.size(); }
  Eigen::Index dim() const noexcept { return inputs.cols(); }
  bool is_outlier(Eigen::Index i) const;
};

/// S disjoint blocks of floor(N/S) indices; the N mod S leftovers are dropped.
struct BlockPartition {
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> dropped;

  std::size_t count() const noexcept { return blocks.size(); }
};

enum class ContaminationMode { x_only, y_only, both };

Eigen::MatrixXd generate_design(const DesignSpec& design, Eigen::Index n, Eigen::Index p, std::uint64_t seed);
Eigen::VectorXd generate_noise(const NoiseSpec& noise, Eigen::Index n, std::uint64_t seed);

/// targets = truth(inputs) + noise, no outliers.
Dataset make_regression_dataset(const DesignSpec& design, const NoiseSpec& noise, const Truth& truth,
                                Eigen::Index n, std::uint64_t seed);

/// Replaces floor(frac N) random rows with entries of absolute size
/// `magnitude`, sign alternating across outlier rows.
Dataset contaminate(const Dataset& data, double frac, double magnitude, ContaminationMode mode,
                    std::uint64_t seed);

BlockPartition partition_blocks(Eigen::Index n, Eigen::Index s, std::uint64_t seed);

/// Kernel truth f* = K(x0, .) / sqrt(K(x0, x0)), unit RKHS norm.
KernelTruth unit_norm_kernel_truth(const KernelSpec& kernel, double x0);

/// CSV with header x_1..x_p,y,is_outlier.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

ContaminationMode contamination_mode_from_string(const std::string& name);

void to_json(nlohmann::json& j, const DesignSpec& spec);
void from_json(const nlohmann::json& j, DesignSpec& spec);
void to_json(nlohmann::json& j, const NoiseSpec& spec);
void from_json(const nlohmann::json& j, NoiseSpec& spec);

}  // namespace lipmom
