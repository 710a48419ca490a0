#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "fmgls/linalg.hpp"

namespace fmgls {

std::uint64_t splitmix64(std::uint64_t x);
// Seed for a node of the (root, path...) tree; distinct paths give
// statistically independent streams.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Vector normal_vector(Eigen::Index n);
  Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fmgls
