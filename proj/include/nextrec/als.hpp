#pragma once

// Alternating least squares kernels. Each half-sweep solves one small ridge
// system per factor row; rows are independent, so the OpenMP version and the
// serial reference produce bit-identical results.

#include <cstdint>
#include <span>
#include <vector>

#include "nextrec/models.hpp"
#include "nextrec/numerics.hpp"

namespace nextrec {

enum class FactorRole { user, last, next };

// Instance ids grouped by the row they touch, CSR style.
struct RowGroups {
  std::vector<std::size_t> offsets;  // size rows + 1
  std::vector<std::uint32_t> members;

  std::span<const std::uint32_t> row(std::size_t r) const {
    return {members.data() + offsets[r], offsets[r + 1] - offsets[r]};
  }
  std::size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

RowGroups group_rows(std::span<const TrainingInstance> instances, FactorRole role,
                     std::size_t rows);

struct AlsLayout {
  RowGroups users;
  RowGroups last;
  RowGroups next;

  static AlsLayout build(std::span<const TrainingInstance> instances, std::size_t n_users,
                         std::size_t n_articles);
};

struct AlsFactors {
  Matrix& user;
  Matrix& last;
  Matrix& next;
};

// Updates every row of the chosen factor; rows without instances keep their
// value. For the user role the regressors are X_i + Y_j with targets
// t - X_i.Y_j, and symmetrically for the others.
void als_half_sweep(FactorRole role, std::span<const TrainingInstance> instances,
                    const AlsLayout& layout, AlsFactors factors, double lambda);
void als_half_sweep_reference(FactorRole role, std::span<const TrainingInstance> instances,
                              const AlsLayout& layout, AlsFactors factors, double lambda);

// Single-row solve shared by both half-sweep versions.
void als_update_row(FactorRole role, std::size_t row, std::span<const TrainingInstance> instances,
                    std::span<const std::uint32_t> members, AlsFactors factors, double lambda);

}  // namespace nextrec
