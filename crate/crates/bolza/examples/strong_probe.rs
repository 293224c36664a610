use bolza::fields::{holomorphic_basis_with_gap, Fem, Weight};
use bolza::geom::mesh_domain_level;
use bolza::geom::VertTag;
use std::sync::Arc;

fn main() {
    for level in [3u32, 4] {
        let fem = Fem::new(Arc::new(mesh_domain_level(level).unwrap()));
        let h2 = holomorphic_basis_with_gap(&fem, 2, 1e2).unwrap();
        let mu = h2.basis[0].conj_field().metric_dual(&fem, 1);
        let win = Weight::raw(-2, 0);
        let b = fem.dbar_weak(win);
        let r = b.mul_herm(&mu.dofs);
        // classify dofs: interior vertex, side vertex, side edge-node, interior edge-node, face-node
        let domain = &fem.domain;
        let nv = domain.n_verts();
        let ne = domain.n_edges();
        let mut groups: std::collections::HashMap<&str, (f64, usize)> = Default::default();
        for (dof, &node) in fem.dof.master_nodes.iter().enumerate() {
            let cls = if node < nv {
                match domain.tags[node] {
                    VertTag::Interior => "vert-int",
                    VertTag::Side { .. } => "vert-side",
                    VertTag::Corner { .. } => "vert-corner",
                }
            } else if node < nv + 2 * ne {
                let e = (node - nv) / 2;
                let (a, bb) = domain.edges[e];
                if domain.edge_side(a, bb).is_some() {
                    "edge-side"
                } else {
                    "edge-int"
                }
            } else {
                "face"
            };
            let entry = groups.entry(cls).or_insert((0.0, 0));
            entry.0 = entry.0.max(r[dof].norm());
            entry.1 += 1;
        }
        print!("level {level}: ");
        for (k, v) in groups.iter() {
            print!("{k}: max|r|={:.2e} (n={})  ", v.0, v.1);
        }
        println!();
    }
}
