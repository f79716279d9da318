use milnorlab_core::germ::presets;
use milnorlab_core::germ::{parse_family, print_family};

fn main() {
    for name in presets::preset_names() {
        match presets::preset(name) {
            Ok(fam) => {
                let printed = print_family(&fam);
                match parse_family(&printed) {
                    Ok(fam2) => {
                        let rt = if fam == fam2 { "roundtrip ok" } else { "ROUNDTRIP MISMATCH" };
                        println!("{name}: ok ({} charts, strands {}) {rt}", fam.charts.len(), fam.branch.strand_total());
                    }
                    Err(e) => println!("{name}: REPRINT PARSE FAILED: {e}\n---\n{printed}"),
                }
            }
            Err(e) => println!("{name}: FAILED: {e}"),
        }
    }
}
