#pragma once

#include "json.hpp"

#include <Eigen/Core>

namespace emoeeg::jsonio {

template <class Derived>
nlohmann::json vector_to_json(const Eigen::DenseBase<Derived>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Row-major nested arrays.
template <class Derived>
nlohmann::json matrix_to_json(const Eigen::DenseBase<Derived>& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j);

// `cols` is used when the array is empty so a 0 x d matrix keeps its width.
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols = 0);

}  // namespace emoeeg::jsonio
