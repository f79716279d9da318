use milnorlab_core::braid::invariants::*;
use milnorlab_core::braid::slice::{slice_sphere, SliceOptions};
use milnorlab_core::geom::boundary::pick_framing_field;
use milnorlab_core::geom::quad::QuadOptions;
use milnorlab_core::germ::presets::preset;

fn main() {
    // Hopf reference: complex coordinate circles
    for n in [720, 1440] {
        let l = hopf_reference_linking(n).unwrap();
        println!("hopf lk at mesh {n}: raw = {:.12} snapped {:?} dev {:.3e}", l.raw, l.snapped, (l.raw - l.raw.round()).abs());
    }

    let sopts = SliceOptions::default();

    // NODE limit slice: 2 components, |lk| = 1, e_i = 0
    let node = preset("node").unwrap();
    let sl = slice_sphere(&node, 0.0, 0.1, &sopts).unwrap();
    let x = pick_framing_field(&node, 0.0, &sl).unwrap();
    let inv = crossing_number(&sl, node.p, x, 0.001, 720).unwrap();
    println!("node S0: e = {:?} (raw {:?}), lk12 = {} (raw {:.6}), e_total = {}",
        inv.e, inv.e_raw, inv.lk[0][1], inv.lk_raw[0][1], inv.e_total);

    // CUSPFIBER limit slice: trefoil, 2 strands, |e| = 3
    let cusp = preset("cuspfiber").unwrap();
    let sl = slice_sphere(&cusp, 0.0, 0.3, &sopts).unwrap();
    let x = pick_framing_field(&cusp, 0.0, &sl).unwrap();
    let inv = crossing_number(&sl, cusp.p, x, 0.003, 720).unwrap();
    println!("cuspfiber S0 trefoil: strands = {}, e = {:?} (raw {:?})", inv.strands, inv.e, inv.e_raw);

    // WHITNEY3D limit slice: e = 0
    let wh = preset("whitney3d").unwrap();
    let sl = slice_sphere(&wh, 0.0, 0.1, &sopts).unwrap();
    let x = pick_framing_field(&wh, 0.0, &sl).unwrap();
    let inv = crossing_number(&sl, wh.p, x, 0.001, 720).unwrap();
    println!("whitney3d S0: strands = {}, e = {:?} (raw {:?})", inv.strands, inv.e, inv.e_raw);

    // IMMCUSP S0 slice axis test
    let imm = preset("immcusp").unwrap();
    let sl = slice_sphere(&imm, 0.0, 0.1, &sopts).unwrap();
    let chart = &imm.charts[0];
    let plane = imm.branch_plane(chart).unwrap();
    let rep = axis_test(&sl, imm.p, plane);
    println!("immcusp S0 axis w.r.t tangent plane: verdict {} (min_norm2 {:.3e}, min_rate {:.3e}, monotone {})",
        rep.verdict, rep.min_norm2, rep.min_rate, rep.monotone);

    // plane circle in P itself -> verdict false
    let plane_fam = preset("plane").unwrap();
    let sl = slice_sphere(&plane_fam, 0.01, 0.5, &sopts).unwrap();
    let pl = plane_fam.branch_plane(&plane_fam.charts[0]).unwrap();
    let rep = axis_test(&sl, plane_fam.p, pl);
    println!("plane slice axis w.r.t own plane: verdict {} (min_norm2 {:.3e})", rep.verdict, rep.min_norm2);

    // bennequin on cuspfiber
    let qopts = QuadOptions::default();
    let rep = bennequin_check(&cusp, 1e-4, 0.3, &qopts, &sopts).unwrap();
    println!("cuspfiber bennequin: chi_raw {:.4}, n {}, e {}, slice_ineq {}, two_sided {}",
        rep.chi_raw, rep.strands, rep.e_total, rep.slice_inequality, rep.two_sided);
}
