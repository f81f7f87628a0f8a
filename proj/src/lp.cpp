#include "evqc/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace evqc::lp {

namespace {

constexpr double kEps = 1e-11;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

}  // namespace

// Tableau layout: rows 0..m-1 constraints, row m the objective, row m+1
// the phase-one objective; column n is the artificial variable, column
// n+1 the right-hand side. Nonbasic index -1 marks the artificial.
DenseSimplex::DenseSimplex(const Matrix& a, const std::vector<double>& b, const std::vector<double>& c)
    : m_(b.size()), n_(c.size()), basis_(m_), nonbasis_(n_ + 1), stride_(n_ + 2) {
  if (a.size() != m_) throw std::invalid_argument("constraint matrix row count mismatch");
  tab_.assign((m_ + 2) * stride_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    if (a[i].size() != n_) throw std::invalid_argument("constraint matrix column count mismatch");
    for (std::size_t j = 0; j < n_; ++j) at(i, j) = a[i][j];
    basis_[i] = static_cast<long>(n_ + i);
    at(i, n_) = -1.0;
    at(i, n_ + 1) = b[i];
  }
  for (std::size_t j = 0; j < n_; ++j) {
    nonbasis_[j] = static_cast<long>(j);
    at(m_, j) = -c[j];
  }
  nonbasis_[n_] = -1;
  at(m_ + 1, n_) = 1.0;
}

void DenseSimplex::pivot(std::size_t r, std::size_t s) {
  const double inv = 1.0 / at(r, s);
  double* prow = &tab_[r * stride_];
  for (std::size_t i = 0; i < m_ + 2; ++i) {
    if (i == r) continue;
    double* row = &tab_[i * stride_];
    if (std::abs(row[s]) <= kEps) {
      row[s] *= -inv;
      continue;
    }
    const double f = row[s] * inv;
    for (std::size_t j = 0; j < n_ + 2; ++j) row[j] -= prow[j] * f;
    row[s] = -f;
  }
  for (std::size_t j = 0; j < n_ + 2; ++j) prow[j] *= inv;
  prow[s] = inv;
  std::swap(basis_[r], nonbasis_[s]);
}

Status DenseSimplex::run(std::size_t obj, std::size_t& budget) {
  const long skip = obj == m_ + 1 ? -2 : -1;  // artificial leaves play in phase two
  std::size_t degenerate_run = 0;
  for (;;) {
    if (budget-- == 0) return Status::IterationLimit;
    const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
    long s = -1;
    for (std::size_t j = 0; j <= n_; ++j) {
      if (obj == m_ && nonbasis_[j] == skip) continue;
      const double d = at(obj, j);
      if (d >= -kEps) continue;
      if (s < 0) {
        s = static_cast<long>(j);
      } else if (bland) {
        if (nonbasis_[j] < nonbasis_[s]) s = static_cast<long>(j);
      } else if (d < at(obj, s) || (d == at(obj, s) && nonbasis_[j] < nonbasis_[s])) {
        s = static_cast<long>(j);
      }
    }
    if (s < 0) return Status::Optimal;

    long r = -1;
    double best = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double coef = at(i, s);
      if (coef <= kEps) continue;
      const double ratio = at(i, n_ + 1) / coef;
      if (r < 0 || ratio < best - kEps ||
          (ratio <= best + kEps && basis_[i] < basis_[r])) {
        r = static_cast<long>(i);
        best = ratio;
      }
    }
    if (r < 0) return Status::Unbounded;
    degenerate_run = best <= kEps ? degenerate_run + 1 : 0;
    pivot(static_cast<std::size_t>(r), static_cast<std::size_t>(s));
  }
}

Result DenseSimplex::solve(std::size_t max_iterations) {
  Result res;
  std::size_t budget = max_iterations;

  std::size_t r = 0;
  for (std::size_t i = 1; i < m_; ++i) {
    if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
  }
  if (m_ > 0 && at(r, n_ + 1) < -kEps) {
    // Phase one: minimize the artificial variable.
    pivot(r, n_);
    const Status st = run(m_ + 1, budget);
    if (st == Status::IterationLimit) return {Status::IterationLimit, 0.0, {}};
    if (at(m_ + 1, n_ + 1) < -1e-9) return {Status::Infeasible, 0.0, {}};
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] != -1) continue;
      std::size_t s = 0;
      for (std::size_t j = 1; j <= n_; ++j) {
        if (std::abs(at(i, j)) > std::abs(at(i, s))) s = j;
      }
      pivot(i, s);
    }
  }
  const Status st = run(m_, budget);
  res.status = st;
  if (st != Status::Optimal) return res;
  res.x.assign(n_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    if (basis_[i] >= 0 && static_cast<std::size_t>(basis_[i]) < n_) res.x[basis_[i]] = at(i, n_ + 1);
  }
  res.objective = at(m_, n_ + 1);
  return res;
}

}  // namespace evqc::lp
