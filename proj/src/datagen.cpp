#include "lipmom/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "lipmom/error.hpp"
#include "lipmom/random.hpp"

namespace lipmom {

bool Dataset::is_outlier(Eigen::Index i) const {
  return std::binary_search(outliers.begin(), outliers.end(), i);
}

Eigen::VectorXd evaluate_truth(const Truth& truth, const Eigen::MatrixXd& inputs) {
  if (const auto* lin = std::get_if<LinearTruth>(&truth)) {
    if (lin->coeffs.size() != inputs.cols()) throw DomainError("evaluate_truth: dimension mismatch");
    return inputs * lin->coeffs;
  }
  if (const auto* ker = std::get_if<KernelTruth>(&truth))
    return predict_kernel(ker->kernel, ker->function, inputs);
  throw DomainError("evaluate_truth: dataset has no generating function");
}

Eigen::MatrixXd generate_design(const DesignSpec& design, Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw DomainError("generate_design: N and p must be >= 1");
  auto eng = make_engine(seed, {stream::design});
  Eigen::MatrixXd x(n, p);
  switch (design.kind) {
    case DesignKind::gaussian_iso: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = dist(eng);
      break;
    }
    case DesignKind::student: {
      if (!(design.nu > 2.0)) throw DomainError("generate_design: student design needs nu > 2");
      std::student_t_distribution<double> dist(design.nu);
      const double scale = 1.0 / std::sqrt(design.nu / (design.nu - 2.0));
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = scale * dist(eng);
      break;
    }
    case DesignKind::uniform_unit: {
      std::uniform_real_distribution<double> dist(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = dist(eng);
      break;
    }
  }
  return x;
}

Eigen::VectorXd generate_noise(const NoiseSpec& noise, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw DomainError("generate_noise: N must be >= 1");
  auto eng = make_engine(seed, {stream::noise});
  Eigen::VectorXd w(n);
  switch (noise.kind) {
    case NoiseKind::gaussian: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = noise.scale * dist(eng);
      break;
    }
    case NoiseKind::student: {
      std::student_t_distribution<double> dist(noise.nu);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = noise.scale * dist(eng);
      break;
    }
    case NoiseKind::cauchy: {
      std::cauchy_distribution<double> dist(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = noise.scale * dist(eng);
      break;
    }
    case NoiseKind::uniform: {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = noise.scale * dist(eng);
      break;
    }
  }
  return w;
}

Dataset make_regression_dataset(const DesignSpec& design, const NoiseSpec& noise, const Truth& truth,
                                Eigen::Index n, std::uint64_t seed) {
  Eigen::Index p = 0;
  if (const auto* lin = std::get_if<LinearTruth>(&truth)) {
    p = lin->coeffs.size();
    if (p < 1) throw DomainError("make_regression_dataset: empty coefficient vector");
    if (design.kind == DesignKind::uniform_unit && p != 1)
      throw DomainError("make_regression_dataset: uniform design is one-dimensional");
  } else if (const auto* ker = std::get_if<KernelTruth>(&truth)) {
    p = ker->function.training_inputs.cols();
    if (ker->kernel.kind == KernelKind::synthetic_mercer && design.kind != DesignKind::uniform_unit)
      throw DomainError("make_regression_dataset: synthetic_mercer truth needs a uniform_unit design");
    if (ker->kernel.kind == KernelKind::synthetic_mercer && p != 1)
      throw DomainError("make_regression_dataset: dimension mismatch between truth and design");
  } else {
    throw DomainError("make_regression_dataset: truth required");
  }
  Dataset data;
  data.inputs = generate_design(design, n, p, seed);
  data.targets = evaluate_truth(truth, data.inputs) + generate_noise(noise, n, seed);
  data.truth = truth;
  return data;
}

Dataset contaminate(const Dataset& data, double frac, double magnitude, ContaminationMode mode,
                    std::uint64_t seed) {
  if (!(frac >= 0.0 && frac < 1.0)) throw DomainError("contaminate: frac must lie in [0,1)");
  if (!(magnitude > 0.0)) throw DomainError("contaminate: magnitude must be > 0");
  const Eigen::Index n = data.size();
  const auto count = static_cast<Eigen::Index>(std::floor(frac * static_cast<double>(n)));
  Dataset out = data;
  if (count == 0) return out;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto eng = make_engine(seed, {stream::outliers});
  std::shuffle(idx.begin(), idx.end(), eng);
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());

  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double value = (k % 2 == 0 ? 1.0 : -1.0) * magnitude;
    const Eigen::Index i = idx[k];
    if (mode != ContaminationMode::y_only) out.inputs.row(i).setConstant(value);
    if (mode != ContaminationMode::x_only) out.targets[i] = value;
  }
  std::vector<Eigen::Index> merged;
  std::set_union(data.outliers.begin(), data.outliers.end(), idx.begin(), idx.end(),
                 std::back_inserter(merged));
  out.outliers = std::move(merged);
  return out;
}

BlockPartition partition_blocks(Eigen::Index n, Eigen::Index s, std::uint64_t seed) {
  if (s < 1) throw DomainError("partition_blocks: S must be >= 1");
  if (s > n) throw DomainError("partition_blocks: S exceeds N");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto eng = make_engine(seed, {stream::partition});
  std::shuffle(idx.begin(), idx.end(), eng);

  const Eigen::Index size = n / s;
  BlockPartition part;
  part.blocks.resize(static_cast<std::size_t>(s));
  for (Eigen::Index b = 0; b < s; ++b) {
    auto first = idx.begin() + b * size;
    part.blocks[static_cast<std::size_t>(b)].assign(first, first + size);
  }
  part.dropped.assign(idx.begin() + s * size, idx.end());
  return part;
}

KernelTruth unit_norm_kernel_truth(const KernelSpec& kernel, double x0) {
  KernelTruth truth;
  truth.kernel = kernel;
  truth.function.training_inputs = Eigen::MatrixXd::Constant(1, 1, x0);
  truth.function.coefficients = Eigen::VectorXd::Constant(1, 1.0 / std::sqrt(kernel_eval(kernel, x0, x0)));
  return truth;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << "x_" << (j + 1) << ',';
  out << "y,is_outlier\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << data.inputs(i, j) << ',';
    out << data.targets[i] << ',' << (data.is_outlier(i) ? 1 : 0) << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_dataset_csv(out, data);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("dataset csv: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "is_outlier")
    throw DomainError("dataset csv: header must be x_1..x_p,y,is_outlier");
  const std::size_t p = header.size() - 2;
  for (std::size_t j = 0; j < p; ++j)
    if (header[j] != "x_" + std::to_string(j + 1)) throw DomainError("dataset csv: bad column " + header[j]);

  std::vector<double> values;
  std::vector<Eigen::Index> outliers;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col < p + 1) {
        values.push_back(std::stod(cell));
      } else if (col == p + 1) {
        if (std::stoi(cell) != 0) outliers.push_back(rows);
      }
      ++col;
    }
    if (col != p + 2) throw DomainError("dataset csv: row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  Dataset data;
  data.inputs.resize(rows, static_cast<Eigen::Index>(p));
  data.targets.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < p; ++j)
      data.inputs(i, static_cast<Eigen::Index>(j)) = values[static_cast<std::size_t>(i) * (p + 1) + j];
    data.targets[i] = values[static_cast<std::size_t>(i) * (p + 1) + p];
  }
  data.outliers = std::move(outliers);
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(in);
}

ContaminationMode contamination_mode_from_string(const std::string& name) {
  if (name == "x_only") return ContaminationMode::x_only;
  if (name == "y_only") return ContaminationMode::y_only;
  if (name == "both") return ContaminationMode::both;
  throw DomainError("unknown contamination mode: " + name);
}

void to_json(nlohmann::json& j, const DesignSpec& spec) {
  switch (spec.kind) {
    case DesignKind::gaussian_iso: j = {{"kind", "gaussian_iso"}}; break;
    case DesignKind::student: j = {{"kind", "student"}, {"nu", spec.nu}}; break;
    case DesignKind::uniform_unit: j = {{"kind", "uniform_unit"}}; break;
  }
}

void from_json(const nlohmann::json& j, DesignSpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "gaussian_iso") spec = {DesignKind::gaussian_iso, 0.0};
  else if (kind == "student") spec = {DesignKind::student, j.at("nu").get<double>()};
  else if (kind == "uniform_unit") spec = {DesignKind::uniform_unit, 0.0};
  else throw DomainError("unknown design kind: " + kind);
}

void to_json(nlohmann::json& j, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::gaussian: j = {{"kind", "gaussian"}, {"sigma", spec.scale}}; break;
    case NoiseKind::student: j = {{"kind", "student"}, {"nu", spec.nu}, {"scale", spec.scale}}; break;
    case NoiseKind::cauchy: j = {{"kind", "cauchy"}, {"scale", spec.scale}}; break;
    case NoiseKind::uniform: j = {{"kind", "uniform"}, {"half_width", spec.scale}}; break;
  }
}

void from_json(const nlohmann::json& j, NoiseSpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") spec = NoiseSpec::gaussian(j.value("sigma", 1.0));
  else if (kind == "student") spec = NoiseSpec::student(j.at("nu").get<double>(), j.value("scale", 1.0));
  else if (kind == "cauchy") spec = NoiseSpec::cauchy(j.value("scale", 1.0));
  else if (kind == "uniform") spec = NoiseSpec::uniform(j.value("half_width", 1.0));
  else throw DomainError("unknown noise law: " + kind);
}

}  // namespace lipmom
