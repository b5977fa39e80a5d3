// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sidpmm/util.hpp"

namespace sidpmm {

// Plain word-vector text format: "N dim" header, then one "key v1 ... vdim"
// line per entry. Keys are terms for word embeddings and document ids for
// document vectors. Values use 17 significant digits so a round trip is
// value-exact.
inline void write_vectors(const std::string& path, const std::vector<std::string>& keys,
                          const std::vector<Eigen::VectorXd>& vecs) {
  if (keys.size() != vecs.size())
    throw std::invalid_argument("write_vectors: keys/vectors length mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vectors: " + path);
  const Eigen::Index dim = vecs.empty() ? 0 : vecs.front().size();
  out << keys.size() << ' ' << dim << '\n';
  char buf[64];
  for (size_t i = 0; i < keys.size(); ++i) {
    if (vecs[i].size() != dim) throw std::invalid_argument("write_vectors: ragged dimensions");
    out << keys[i];
    for (Eigen::Index j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof(buf), " %.17g", vecs[i](j));
      out << buf;
    }
    out << '\n';
  }
}

struct VectorFile {
  std::vector<std::string> keys;
  std::vector<Eigen::VectorXd> vectors;
};

inline VectorFile read_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vectors: " + path);
  size_t n = 0;
  Eigen::Index dim = 0;
  if (!(in >> n >> dim)) throw std::runtime_error("bad vector file header: " + path);
  VectorFile out;
  out.keys.reserve(n);
  out.vectors.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::string key;
    if (!(in >> key)) throw std::runtime_error(path + ": truncated at entry " + std::to_string(i));
    Eigen::VectorXd v(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (!(in >> v(j)))
        throw std::runtime_error(path + ": truncated vector for key " + key);
    }
    out.keys.push_back(std::move(key));
    out.vectors.push_back(std::move(v));
  }
  return out;
}

// Per-dimension standardization to zero mean and unit variance across the
// collection; a dimension with (near) zero spread is centered only. Keeps the
// identity prior Sigma0 = I calibrated.
inline void standardize_vectors(std::vector<Eigen::VectorXd>& vecs) {
  if (vecs.empty()) return;
  const Eigen::Index dim = vecs.front().size();
  const double n = static_cast<double>(vecs.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& v : vecs) mean += v;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& v : vecs) var += (v - mean).array().square().matrix();
  var /= n;
  Eigen::VectorXd scale(dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    scale(j) = var(j) > 1e-24 ? 1.0 / std::sqrt(var(j)) : 1.0;
  for (auto& v : vecs) v = (v - mean).cwiseProduct(scale);
}

}  // namespace sidpmm
