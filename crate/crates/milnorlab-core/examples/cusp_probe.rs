use milnorlab_core::geom::quad::{integrate_family, FormKind, QuadOptions, Region};
use milnorlab_core::germ::presets::preset;

fn main() {
    let opts = QuadOptions::default()
        .with_active(&[FormKind::Area, FormKind::OmegaT, FormKind::OmegaN]);
    // explicit cusp (z^2, z^3) = immcusp at s = 0
    let imm = preset("immcusp").unwrap();
    let cusp = preset("cuspfiber").unwrap();
    for eps in [0.25, 0.45] {
        let t = std::time::Instant::now();
        let re = integrate_family(&imm, 0.0, Region::Ball { eps }, &opts).unwrap();
        println!("explicit cusp eps={eps}: area={:.8} omega_t={:.8} (evals {}, conv {}, {:?})",
            re.value.get(FormKind::Area), re.value.get(FormKind::OmegaT), re.evals, re.converged, t.elapsed());
        let opts2 = QuadOptions { max_evals: 3_000_000, ..opts.clone() };
        let t = std::time::Instant::now();
        let ri = integrate_family(&cusp, 0.0, Region::Ball { eps }, &opts2).unwrap();
        println!("implicit cusp eps={eps}: area={:.8} omega_t={:.8} (evals {}, conv {}, {:?})",
            ri.value.get(FormKind::Area), ri.value.get(FormKind::OmegaT), ri.evals, ri.converged, t.elapsed());
    }
}
