//! Dyadic maximal function and dyadic BMO norm.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::grid::{check_support, check_window, Levels};
use crate::haar::HaarExpansion;
use crate::interval::{pow2, DyadicInterval};
use crate::step::PiecewiseConstant;

/// `Mf(x) = max |I|^{-1} ∫_I |f|` over dyadic `I ∋ x` inside `root` with
/// scale in `[min_scale, root.scale]`. Constant on cells of scale `min_scale`.
pub fn dyadic_maximal(
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<PiecewiseConstant> {
    check_window(root, min_scale)?;
    check_support(f, root)?;
    let levels = Levels::from_function(&f.abs(), root, min_scale);
    let mut running = levels.avg[0].clone();
    for row in &levels.avg[1..] {
        running = row
            .iter()
            .enumerate()
            .map(|(j, a)| a.max(running[j / 2]))
            .collect();
    }
    Ok(PiecewiseConstant::from_cells(root.start(), pow2(min_scale), running).simplified())
}

/// `sup_J ( |J|^{-1} Σ_{I ⊆ J} c_I² )^{1/2}` over dyadic `J` inside the root.
/// The mean coefficient is excluded.
pub fn bmo_norm(e: &HaarExpansion) -> f64 {
    let energy = subtree_energy(e);
    energy
        .iter()
        .map(|(j, s)| (s / j.len()).sqrt())
        .fold(0.0, f64::max)
}

/// `Σ_{I ⊆ J} c_I²` for every `J` that contains a nonzero coefficient.
pub(crate) fn subtree_energy(e: &HaarExpansion) -> BTreeMap<DyadicInterval, f64> {
    let mut energy: BTreeMap<DyadicInterval, f64> = BTreeMap::new();
    for (i, c) in &e.coeffs {
        if *c == 0.0 {
            continue;
        }
        let c2 = c * c;
        let mut j = *i;
        loop {
            *energy.entry(j).or_insert(0.0) += c2;
            if j.scale >= e.root.scale {
                break;
            }
            j = j.parent();
        }
    }
    energy
}
