//! Membership of a few `rho_{a,a'}` states at levels 1 and 2, in both
//! formalisms.

use patterns::Regime;
use relax::{check_membership, Formalism, Hierarchy, ModelOptions};
use sdp::SolveOptions;
use states::{family_rho_aap, Scale};

fn main() {
    let mo = ModelOptions::default();
    let so = SolveOptions::default();
    for &(a, ap) in &[(3.0, 0.5), (2.0, 0.4), (2.0, 2.0), (1.5, 1.5)] {
        let rho = family_rho_aap(a, ap, Scale::Raw);
        for t in 1..=2 {
            for f in [Formalism::Moment, Formalism::Tensor] {
                match check_membership(&rho, t, Regime::Cldui, Hierarchy::Dps, f, &mo, &so) {
                    Ok(r) => println!(
                        "a={a} a'={ap} t={t} {f:?}: {:?} margin={:.3e} ({:.3}s, blocks {:?})",
                        r.verdict, r.margin, r.seconds, r.lmi_block_sizes
                    ),
                    Err(e) => println!("a={a} a'={ap} t={t} {f:?}: {e}"),
                }
            }
        }
    }
}
