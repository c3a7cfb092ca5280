#pragma once

#include "accretive/operators.hpp"
#include "energy.hpp"

namespace accretive::detail {

/// Bulk energy (1/p) Σ_T |T| |∇u|^p + (m/p) Σ_i a_i |u_i|^p on the disk mesh.
inline PowerEnergy disk_energy(const DiskMesh& mesh, double p, double m) {
    PowerEnergy E;
    E.p = p;
    E.nodes = mesh.node_count();
    E.cells.reserve(mesh.triangles().size());
    for (const auto& t : mesh.triangles()) {
        Cell c;
        c.v = t.v;
        c.gx = t.gx;
        c.gy = t.gy;
        c.weight = t.area;
        E.cells.push_back(c);
    }
    E.mass = mesh.node_area();
    for (double& a : E.mass) a *= m;
    return E;
}

}  // namespace accretive::detail
