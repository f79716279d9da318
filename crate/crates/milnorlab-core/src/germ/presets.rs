//! Built-in families. Each preset is stored as a document in the family
//! format and parsed on demand, so the presets exercise the same loading
//! path as user files.

use crate::error::{Error, Result};
use crate::germ::dsl::parse_family;
use crate::germ::family::SurfaceFamily;

/// Table row for `list-presets`: name plus the expected invariants.
#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    pub mu_t: f64,
    pub mu_n: f64,
    pub summary: &'static str,
}

const PLANE: &str = r#"
[family]
name = "plane"
flags = holomorphic, minimal, embedded
p = (0, 0, 0, 0)
s_schedule = 1e-2, 5e-3, 2.5e-3
eps_schedule = 0.3, 0.2, 0.1

[chart "plane"]
domain = annulus(0, 1.0)
map_c = (z, 0)

[branch]
branches = (N=1, s=1)
"#;

const NODE: &str = r#"
[family]
name = "node"
flags = holomorphic, minimal
p = (0, 0, 0, 0)
s_schedule = 1e-3, 2.5e-4, 6.25e-5
eps_schedule = 0.2, 0.1, 0.05

# smooth fibers {c2^2 - c1^2 = s}; the two limit planes are separate charts
[chart "fiber"]
domain = annulus(1e-5, 0.9)
map_c = ( (z - s/z)/2 , (z + s/z)/2 )
limit = exclude

[chart "plane_a"]
domain = annulus(0, 0.9)
map_c = ( z/2, z/2 )
limit = only

[chart "plane_b"]
domain = annulus(0, 0.9)
map_c = ( 0 - z/2, z/2 )
limit = only

[branch]
branches = (N=1, s=1), (N=1, s=1)
"#;

const IMMCUSP: &str = r#"
[family]
name = "immcusp"
flags = holomorphic, minimal
p = (0, 0, 0, 0)
s_schedule = 2e-3, 5e-4, 1.25e-4
eps_schedule = 0.2, 0.1, 0.05

[chart "main"]
domain = annulus(0, 1.1)
map_c = (z^2, z^3 + s*z)

[branch]
branches = (N=2, s=1)
"#;

const CUSPFIBER: &str = r#"
[family]
name = "cuspfiber"
flags = holomorphic, minimal, embedded
p = (0, 0, 0, 0)
s_schedule = 5e-4, 1e-4, 2e-5, 4e-6
eps_schedule = 0.45, 0.35, 0.25

[implicit "fiber"]
P = y^2 - x^3 - s
base = x
sheets = 2
base_domain = disc(0.7)
rho_cut = 0.004

[branch]
branches = (N=2, s=1)
"#;

const WHITNEY3D: &str = r#"
[family]
name = "whitney3d"
flags = contained_in_r3, embedded
p = (0, 0, 0, 0)
s_schedule = 4e-3, 1e-3, 2.5e-4
eps_schedule = 0.2, 0.1, 0.05

[chart "main"]
domain = annulus(0, 1.0)
map_r = (re(z^2), im(z^2), re(z^3) + s*re(z), 0)

[branch]
branches = (N=2, s=1)
"#;

const HOPFREF: &str = r#"
[family]
name = "hopfref"
flags = holomorphic, minimal
p = (0, 0, 0, 0)
s_schedule = 1e-2, 5e-3
eps_schedule = 0.9, 0.6, 0.3

[chart "plane_u"]
domain = annulus(0, 1.2)
map_c = (z, 0)

[chart "plane_v"]
domain = annulus(0, 1.2)
map_c = (0, z)

[branch]
branches = (N=1, s=1), (N=1, s=1)
"#;

const NONMIN: &str = r#"
[family]
name = "nonmin"
flags = embedded
p = (0, 0, 0, 0)
s_schedule = 1e-2, 5e-3
eps_schedule = 0.3, 0.2, 0.1

[chart "graph"]
domain = annulus(0, 1.0)
map_r = (re(z), im(z), re(z)^2, 0)

[branch]
branches = (N=1, s=1)
"#;

const TABLE: &[(&str, &str, PresetInfo)] = &[
    ("plane", PLANE, PresetInfo {
        name: "plane",
        mu_t: 0.0,
        mu_n: 0.0,
        summary: "flat complex line, nothing concentrates",
    }),
    ("node", NODE, PresetInfo {
        name: "node",
        mu_t: 2.0,
        mu_n: -2.0,
        summary: "node uv = s degenerating to two transverse planes",
    }),
    ("immcusp", IMMCUSP, PresetInfo {
        name: "immcusp",
        mu_t: 1.0,
        mu_n: -1.0,
        summary: "immersed smoothing (z^2, z^3 + s z) of the cusp",
    }),
    ("cuspfiber", CUSPFIBER, PresetInfo {
        name: "cuspfiber",
        mu_t: 3.0,
        mu_n: -3.0,
        summary: "Milnor fiber y^2 = x^3 + s of the cusp",
    }),
    ("whitney3d", WHITNEY3D, PresetInfo {
        name: "whitney3d",
        mu_t: 1.0,
        mu_n: 0.0,
        summary: "branch point inside R^3 x {0}, normal bundle stays flat",
    }),
    ("hopfref", HOPFREF, PresetInfo {
        name: "hopfref",
        mu_t: 0.0,
        mu_n: 0.0,
        summary: "two constant transverse complex planes; linking calibration",
    }),
    ("nonmin", NONMIN, PresetInfo {
        name: "nonmin",
        mu_t: 0.0,
        mu_n: 0.0,
        summary: "non-minimal graph, negative control for lift residuals",
    }),
];

pub fn preset_names() -> Vec<&'static str> {
    TABLE.iter().map(|(n, _, _)| *n).collect()
}

pub fn preset_infos() -> Vec<PresetInfo> {
    TABLE.iter().map(|(_, _, i)| *i).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    let lower = name.to_ascii_lowercase();
    TABLE
        .iter()
        .find(|(n, _, _)| *n == lower)
        .map(|(_, src, _)| *src)
        .ok_or_else(|| Error::UnknownPreset(name.into()))
}

pub fn preset(name: &str) -> Result<SurfaceFamily> {
    parse_family(preset_source(name)?)
}

pub fn preset_info(name: &str) -> Result<PresetInfo> {
    let lower = name.to_ascii_lowercase();
    TABLE
        .iter()
        .find(|(n, _, _)| *n == lower)
        .map(|(_, _, i)| *i)
        .ok_or_else(|| Error::UnknownPreset(name.into()))
}
