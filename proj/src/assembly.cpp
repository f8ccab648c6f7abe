#include "eigfem/assembly.hpp"

#include <ostream>
#include <vector>

namespace eigfem {

namespace {

template <class LocalMat>
SparseSym assemble(const Mesh &mesh, const DofMap &dofmap, LocalMat &&local) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_triangles()) * 16);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const LocalBasis basis = local_basis(g, dofmap.kind);
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    local(g, basis, m);
    for (int i = 0; i < basis.count; ++i) {
      const int gi = dofmap.full_to_free[dofmap.cell_dofs[t][i]];
      if (gi < 0) continue;
      for (int j = 0; j < basis.count; ++j) {
        const int gj = dofmap.full_to_free[dofmap.cell_dofs[t][j]];
        if (gj < 0) continue;
        trips.emplace_back(gi, gj, m(i, j));
      }
    }
  }
  SparseSym a(dofmap.n_free, dofmap.n_free);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

}  // namespace

SparseSym assemble_stiffness(const Mesh &mesh, const DofMap &dofmap) {
  return assemble(mesh, dofmap,
                  [](const ElementGeometry &g, const LocalBasis &basis,
                     Eigen::Matrix4d &m) {
                    for (int i = 0; i < basis.count; ++i)
                      for (int j = i; j < basis.count; ++j) {
                        const double v = integrate_tri(
                            g.p, tri_rule_deg2(), [&](const Eigen::Vector2d &x) {
                              return basis.fn[i].grad(x).dot(basis.fn[j].grad(x));
                            });
                        m(i, j) = m(j, i) = v;
                      }
                  });
}

SparseSym assemble_mass(const Mesh &mesh, const DofMap &dofmap) {
  return assemble(mesh, dofmap,
                  [](const ElementGeometry &g, const LocalBasis &basis,
                     Eigen::Matrix4d &m) {
                    for (int i = 0; i < basis.count; ++i)
                      for (int j = i; j < basis.count; ++j) {
                        const double v = integrate_tri(
                            g.p, tri_rule_deg4(), [&](const Eigen::Vector2d &x) {
                              return basis.fn[i].value(x) * basis.fn[j].value(x);
                            });
                        m(i, j) = m(j, i) = v;
                      }
                  });
}

void write_coordinate(std::ostream &os, const SparseSym &m) {
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseSym::InnerIterator it(m, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace eigfem
