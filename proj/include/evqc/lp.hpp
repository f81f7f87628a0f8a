#pragma once

#include <cstddef>
#include <vector>

namespace evqc::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Dense two-phase tableau simplex for
///     maximize c'x  subject to  A x <= b,  x >= 0.
/// `b` may have negative entries; phase one then finds a feasible basis.
/// Dantzig pricing with index tie-breaks, switching to Bland's rule after a
/// run of degenerate pivots so it cannot cycle.
class DenseSimplex {
 public:
  using Matrix = std::vector<std::vector<double>>;

  DenseSimplex(const Matrix& a, const std::vector<double>& b, const std::vector<double>& c);

  Result solve(std::size_t max_iterations = 1'000'000);

 private:
  void pivot(std::size_t r, std::size_t s);
  Status run(std::size_t objective_row, std::size_t& budget);

  std::size_t m_, n_;
  std::vector<long> basis_, nonbasis_;
  std::vector<double> tab_;  // (m + 2) x (n + 2), row-major
  std::size_t stride_;

  double& at(std::size_t i, std::size_t j) { return tab_[i * stride_ + j]; }
};

}  // namespace evqc::lp
