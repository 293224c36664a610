use bolza::fields::{dbar_adj, holomorphic_basis_with_gap, kaehler_residual, Fem};
use bolza::geom::mesh_domain_level;
use std::sync::Arc;

fn main() {
    let mut prev = (0.0, 0.0, 0.0);
    for level in [2u32, 3, 4, 5] {
        let fem = Fem::new(Arc::new(mesh_domain_level(level).unwrap()));
        let h2 = holomorphic_basis_with_gap(&fem, 2, 20.0).unwrap();
        let mu = h2.basis[0].conj_field().metric_dual(&fem, 1);
        let adj = dbar_adj(&fem, &mu).unwrap();
        let r1 = adj.l2_norm(&fem) / mu.l2_norm(&fem);
        let h1 = holomorphic_basis_with_gap(&fem, 1, 20.0).unwrap();
        let a01 = h1.basis[0].conj_field();
        let r2 = kaehler_residual(&fem, &a01).unwrap();
        // also a rough (0,1) field: conj of hol 2-diff dualized once (weight (-1,1)->kaehler needs q=1 *, p arbitrary)
        let r3 = kaehler_residual(&fem, &mu).unwrap();
        if level > 2 {
            println!(
                "level {level}: dbar*mu {r1:.5} (x{:.2})  kaehler(0,1) {r2:.6} (x{:.2})  kaehler(-1,1) {r3:.6} (x{:.2})",
                prev.0 / r1, prev.1 / r2, prev.2 / r3
            );
        } else {
            println!("level {level}: dbar*mu {r1:.5}  kaehler(0,1) {r2:.6}  kaehler(-1,1) {r3:.6}");
        }
        prev = (r1, r2, r3);
    }
}
