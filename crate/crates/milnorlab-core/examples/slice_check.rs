use milnorlab_core::braid::slice::{slice_sphere, SliceOptions};
use milnorlab_core::geom::boundary::{boundary_integral, gauss_bonnet_euler, BoundaryForm};
use milnorlab_core::geom::quad::QuadOptions;
use milnorlab_core::germ::presets::preset;

fn main() {
    let sopts = SliceOptions::default();
    let qopts = QuadOptions::default();

    // Sigma_0 slices
    for (name, eps) in [("node", 0.1), ("immcusp", 0.1), ("cuspfiber", 0.3), ("whitney3d", 0.1), ("plane", 0.5)] {
        let fam = preset(name).unwrap();
        match slice_sphere(&fam, 0.0, eps, &sopts) {
            Ok(sl) => {
                let winds: Vec<i32> = sl.components.iter().map(|c| c.winding).collect();
                let sizes: Vec<usize> = sl.components.iter().map(|c| c.vertices.len()).collect();
                println!("{name} S0 slice eps={eps}: {} comps, windings {winds:?}, strands {}, sizes {sizes:?}",
                    sl.components.len(), sl.strand_total());
            }
            Err(e) => println!("{name} S0 slice FAILED: {e}"),
        }
    }

    // k_g on the flat plane: unit circle -> 2 pi
    let plane = preset("plane").unwrap();
    let sl = slice_sphere(&plane, 0.01, 0.5, &sopts).unwrap();
    let (kg, _) = boundary_integral(&plane, 0.01, &sl, BoundaryForm::GeodesicCurvature).unwrap();
    println!("plane kg at eps=0.5: {kg:.8} (expect {:.8})", std::f64::consts::TAU);

    // chi estimates
    for (name, s, eps, expect) in [
        ("node", 2.5e-4, 0.1, 0i64),
        ("immcusp", 5e-4, 0.1, 1),
        ("whitney3d", 1e-3, 0.1, 1),
        ("cuspfiber", 1e-4, 0.3, -1),
    ] {
        let fam = preset(name).unwrap();
        let t = std::time::Instant::now();
        match gauss_bonnet_euler(&fam, s, eps, &qopts, &sopts) {
            Ok(r) => println!(
                "{name} chi(s={s}, eps={eps}): raw {:.5} snap {:?} expect {expect} (kg={:.5}, {:?})",
                r.chi_raw, r.chi, r.kg, t.elapsed()
            ),
            Err(e) => println!("{name} chi FAILED: {e}"),
        }
    }

    // kg of cusp Sigma_0 tends to 2 * 2pi
    let imm = preset("immcusp").unwrap();
    for eps in [0.2, 0.1, 0.05] {
        let sl = slice_sphere(&imm, 0.0, eps, &sopts).unwrap();
        let (kg, _) = boundary_integral(&imm, 0.0, &sl, BoundaryForm::GeodesicCurvature).unwrap();
        let (wn, _) = boundary_integral(&imm, 0.0, &sl, BoundaryForm::NormalConnection { x: [0.0, 0.0, 0.0, 1.0] }).unwrap();
        println!("immcusp S0 eps={eps}: kg = {:.6} (4pi = {:.6}), omegaN = {:.6}", kg, 2.0 * std::f64::consts::TAU, wn);
    }
}
