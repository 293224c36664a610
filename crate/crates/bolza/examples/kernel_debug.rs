use bolza::fields::{dbar_kernel, Fem, Weight};
use bolza::geom::mesh_domain_level;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let level: u32 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(4);
    let ms: Vec<i32> = args.get(2).map(|s| s.split(',').map(|x| x.parse().unwrap()).collect()).unwrap_or(vec![1, 2, 3]);
    let t0 = Instant::now();
    let fem = Fem::new(Arc::new(mesh_domain_level(level).unwrap()));
    println!("level {level}: n_dof = {} (setup {:.1?})", fem.n_dof(), t0.elapsed());
    for m in ms {
        let t = Instant::now();
        // warm the factor-free assemblies first for fair timing
        let _ = fem.dbar_dirichlet(Weight::raw(2 * m, 0));
        let ta = t.elapsed();
        let expected = [0, 2, 3, 5][m as usize];
        match dbar_kernel(&fem, 2 * m, expected, 1.0) {
            Ok(rep) => {
                let s: Vec<String> = rep.sigmas.iter().take(expected + 3).map(|v| format!("{v:.3e}")).collect();
                println!("  m={m}: dim={} gap={:.2e} [assembly {ta:.1?}, total {:.1?}] sigmas={}",
                    rep.basis.len(), rep.gap, t.elapsed(), s.join(" "));
            }
            Err(e) => println!("  m={m}: {e} [{:.1?}]", t.elapsed()),
        }
    }
}
