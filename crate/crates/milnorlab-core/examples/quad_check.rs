use milnorlab_core::geom::quad::{integrate_family, FormKind, QuadOptions, Region};
use milnorlab_core::germ::presets::preset;

fn main() {
    let opts = QuadOptions::default().with_active(&[FormKind::Area, FormKind::OmegaT, FormKind::OmegaN]);
    let tau = std::f64::consts::TAU;
    let args: Vec<String> = std::env::args().collect();
    let which: Vec<&str> = if args.len() > 1 {
        args[1].split(',').collect()
    } else {
        vec!["node", "immcusp", "whitney3d", "cuspfiber"]
    };

    for name in which {
        let fam = preset(name).unwrap();
        println!("== {name}");
        for &eps in &fam.eps_schedule {
            let r0 = integrate_family(&fam, 0.0, Region::Ball { eps }, &opts).unwrap();
            let t0 = r0.value.get(FormKind::OmegaT);
            let n0 = r0.value.get(FormKind::OmegaN);
            for &s in &fam.s_schedule {
                let t = std::time::Instant::now();
                let rs = integrate_family(&fam, s, Region::Ball { eps }, &opts).unwrap();
                let ts = rs.value.get(FormKind::OmegaT);
                let ns = rs.value.get(FormKind::OmegaN);
                let lt = -(ts - t0) / tau;
                let ln = -(ns - n0) / tau;
                println!(
                    "  eps={eps:<5} s={s:<8.1e} lT={lt:>9.5} lN={ln:>9.5}  (evals {}+{}, conv {}, {:?})",
                    rs.evals, r0.evals, rs.converged && r0.converged, t.elapsed()
                );
            }
        }
    }
}
