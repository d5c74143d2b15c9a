#include "nextrec/als.hpp"

namespace nextrec {

RowGroups group_rows(std::span<const TrainingInstance> instances, FactorRole role,
                     std::size_t rows) {
  auto key = [role](const TrainingInstance& inst) -> std::size_t {
    switch (role) {
      case FactorRole::user: return inst.u;
      case FactorRole::last: return inst.i;
      case FactorRole::next: return inst.j;
    }
    return 0;
  };
  RowGroups groups;
  groups.offsets.assign(rows + 1, 0);
  for (const auto& inst : instances) ++groups.offsets[key(inst) + 1];
  for (std::size_t r = 0; r < rows; ++r) groups.offsets[r + 1] += groups.offsets[r];
  groups.members.resize(instances.size());
  std::vector<std::size_t> fill(groups.offsets.begin(), groups.offsets.end() - 1);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    groups.members[fill[key(instances[k])]++] = static_cast<std::uint32_t>(k);
  }
  return groups;
}

AlsLayout AlsLayout::build(std::span<const TrainingInstance> instances, std::size_t n_users,
                           std::size_t n_articles) {
  return AlsLayout{group_rows(instances, FactorRole::user, n_users),
                   group_rows(instances, FactorRole::last, n_articles),
                   group_rows(instances, FactorRole::next, n_articles)};
}

void als_update_row(FactorRole role, std::size_t row, std::span<const TrainingInstance> instances,
                    std::span<const std::uint32_t> members, AlsFactors factors, double lambda) {
  if (members.empty()) return;
  const Eigen::Index d = factors.user.cols();
  Matrix gram = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  Vector g(d);
  for (std::uint32_t idx : members) {
    const auto& inst = instances[idx];
    const auto u = factors.user.row(inst.u);
    const auto x = factors.last.row(inst.i);
    const auto y = factors.next.row(inst.j);
    double target = inst.target;
    switch (role) {
      case FactorRole::user:
        g = (x + y).transpose();
        target -= x.dot(y);
        break;
      case FactorRole::last:
        g = (u + y).transpose();
        target -= u.dot(y);
        break;
      case FactorRole::next:
        g = (u + x).transpose();
        target -= u.dot(x);
        break;
    }
    gram.noalias() += inst.weight * g * g.transpose();
    rhs.noalias() += (inst.weight * target) * g;
  }
  solve_spd_inplace(gram, rhs, lambda);
  Matrix& out = role == FactorRole::user ? factors.user
                : role == FactorRole::last ? factors.last
                                           : factors.next;
  out.row(static_cast<Eigen::Index>(row)) = rhs.transpose();
}

namespace {

const RowGroups& groups_for(FactorRole role, const AlsLayout& layout) {
  return role == FactorRole::user ? layout.users
         : role == FactorRole::last ? layout.last
                                    : layout.next;
}

}  // namespace

void als_half_sweep(FactorRole role, std::span<const TrainingInstance> instances,
                    const AlsLayout& layout, AlsFactors factors, double lambda) {
  const RowGroups& groups = groups_for(role, layout);
  const auto rows = static_cast<std::ptrdiff_t>(groups.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    als_update_row(role, static_cast<std::size_t>(r), instances,
                   groups.row(static_cast<std::size_t>(r)), factors, lambda);
  }
}

void als_half_sweep_reference(FactorRole role, std::span<const TrainingInstance> instances,
                              const AlsLayout& layout, AlsFactors factors, double lambda) {
  const RowGroups& groups = groups_for(role, layout);
  for (std::size_t r = 0; r < groups.rows(); ++r) {
    als_update_row(role, r, instances, groups.row(r), factors, lambda);
  }
}

}  // namespace nextrec
