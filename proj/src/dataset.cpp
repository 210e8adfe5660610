#include "spectrafit/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spectrafit/error.hpp"
#include "spectrafit/random.hpp"

namespace spectrafit {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw ValidationError(where + ": '" + s + "' is not a finite number");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void Dataset::validate(double tau_unit) const {
  if (size() < 1) throw ValidationError("dataset is empty");
  if (dim() < 1) throw ValidationError("dataset has zero dimension");
  if (y.size() != u.cols()) throw ValidationError("dataset has mismatched u and y counts");
  for (int i = 0; i < size(); ++i) {
    if (std::abs(u.col(i).norm() - 1.0) > tau_unit)
      throw ValidationError("direction " + std::to_string(i) + " is not unit norm");
    if (!std::isfinite(y[i])) throw ValidationError("value " + std::to_string(i) + " is not finite");
  }
}

Dataset synth(const ShapeSpec& shape, int n, const NoiseSpec& noise, std::uint64_t seed) {
  if (n < 1) throw ValidationError("synth needs n >= 1");
  if (!(noise.sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
  const int d = shape.dim();
  Dataset ds;
  ds.u.resize(d, n);
  ds.y.resize(n);
  Rng rng(seed, 0);
  for (int i = 0; i < n; ++i) {
    ds.u.col(i) = rng.direction(d);
    const double eps = rng.normal();
    ds.y[i] = true_support(shape, ds.u.col(i)) + noise.sigma * eps;
  }
  ds.meta = {noise.sigma, seed, shape.to_string()};
  return ds;
}

Dataset synth_grid(const ShapeSpec& shape, const Eigen::MatrixXd& directions) {
  if (directions.rows() != shape.dim())
    throw ValidationError("synth_grid: directions have dimension " + std::to_string(directions.rows()) +
                          ", shape needs " + std::to_string(shape.dim()));
  Dataset ds;
  ds.u = directions;
  ds.y.resize(directions.cols());
  for (Eigen::Index i = 0; i < directions.cols(); ++i) ds.y[i] = true_support(shape, directions.col(i));
  ds.meta = {0.0, std::nullopt, shape.to_string()};
  ds.validate();
  return ds;
}

Dataset subset(const Dataset& ds, const std::vector<int>& idx) {
  Dataset out;
  out.u.resize(ds.dim(), static_cast<Eigen::Index>(idx.size()));
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.u.col(static_cast<Eigen::Index>(k)) = ds.u.col(idx[k]);
    out.y[static_cast<Eigen::Index>(k)] = ds.y[idx[k]];
  }
  out.meta = ds.meta;
  return out;
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  if (!ds.meta.shape.empty()) out += "# shape=" + ds.meta.shape + "\n";
  if (ds.meta.sigma) out += "# sigma=" + format_double(*ds.meta.sigma) + "\n";
  if (ds.meta.seed) out += "# seed=" + std::to_string(*ds.meta.seed) + "\n";
  for (int k = 0; k < ds.dim(); ++k) out += "u" + std::to_string(k + 1) + ",";
  out += "y\n";
  for (int i = 0; i < ds.size(); ++i) {
    for (int k = 0; k < ds.dim(); ++k) out += format_double(ds.u(k, i)) + ",";
    out += format_double(ds.y[i]) + "\n";
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << to_csv(ds);
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

Dataset parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  DatasetMeta meta;
  int d = -1;
  std::vector<double> values;
  auto where = [&] { return source + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string val = line.substr(eq + 1);
      if (key == "shape") meta.shape = val;
      else if (key == "sigma") meta.sigma = parse_double(val, where());
      else if (key == "seed") meta.seed = std::stoull(val);
      continue;
    }
    const auto cells = split(line, ',');
    if (d < 0) {
      if (cells.size() < 2 || cells.back() != "y")
        throw ValidationError(where() + ": header must be u1,...,ud,y");
      for (std::size_t k = 0; k + 1 < cells.size(); ++k)
        if (cells[k] != "u" + std::to_string(k + 1))
          throw ValidationError(where() + ": header must be u1,...,ud,y");
      d = static_cast<int>(cells.size()) - 1;
      continue;
    }
    if (static_cast<int>(cells.size()) != d + 1)
      throw ValidationError(where() + ": expected " + std::to_string(d + 1) + " fields, got " +
                            std::to_string(cells.size()));
    for (const auto& c : cells) values.push_back(parse_double(c, where()));
  }
  if (d < 0) throw ValidationError(source + ": missing header");

  const int n = static_cast<int>(values.size()) / (d + 1);
  Dataset ds;
  ds.u.resize(d, n);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) ds.u(k, i) = values[static_cast<std::size_t>(i * (d + 1) + k)];
    ds.y[i] = values[static_cast<std::size_t>(i * (d + 1) + d)];
  }
  ds.meta = meta;
  ds.validate();
  return ds;
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

}  // namespace spectrafit
