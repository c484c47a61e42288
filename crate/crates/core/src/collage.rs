//! Collage gap and the collage bound `h_p(L, A) <= h_p(L, W(L)) / (1 - s)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::Result;
use crate::hyperspace::{hausdorff_unchecked, CompactSet};
use crate::ifs::Ifs;

/// `ε = h_p(L, W(L))`, condensation set included. `W(L)` is computed without
/// snapping so that ε is exact for finite `L`.
pub fn collage_gap(ifs: &Ifs, l: &CompactSet) -> Result<f64> {
    l.validate(ifs.space())?;
    let image = ifs.hutchinson_exact(l)?;
    let l = CompactSet::Finite(l.rasterize(ifs.snap())?);
    hausdorff_unchecked(ifs.space(), &l, &image)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollageReport {
    pub epsilon: f64,
    /// `h_p(L, A)` for the computed attractor.
    pub distance: f64,
    /// `ε / (1 - s)`
    pub bound: f64,
    /// `tol / (1 - s) + 2 snap`, the numerical allowance.
    pub slack: f64,
    pub holds: bool,
    pub attractor_iterations: usize,
}

impl CollageReport {
    pub const CSV_HEADER: &'static str = "epsilon,distance,bound,slack,holds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.epsilon, self.distance, self.bound, self.slack, self.holds
        )
    }

    pub fn verdict(&self) -> String {
        if self.holds {
            format!(
                "collage bound holds: h_p(L,A) = {} <= ε/(1-s) = {} (+ slack {})",
                self.distance, self.bound, self.slack
            )
        } else {
            format!(
                "collage bound VIOLATED: h_p(L,A) = {} > ε/(1-s) + slack = {} + {}",
                self.distance, self.bound, self.slack
            )
        }
    }
}

/// Computes ε, the attractor (seeded from `L`) and checks
/// `h_p(L, A) <= ε/(1-s) + slack`.
pub fn collage_bound_check(ifs: &Ifs, l: &CompactSet, tol: f64, max_iter: usize) -> Result<CollageReport> {
    let epsilon = collage_gap(ifs, l)?;
    let (attractor, diag) = ifs.attractor(l, tol, max_iter)?;
    let lf = CompactSet::Finite(l.rasterize(ifs.snap())?);
    let distance = hausdorff_unchecked(ifs.space(), &lf, &attractor)?;
    let s = ifs.factor();
    let bound = epsilon / (1.0 - s);
    let slack = tol / (1.0 - s) + 2.0 * ifs.snap();
    Ok(CollageReport {
        epsilon,
        distance,
        bound,
        slack,
        holds: distance <= bound + slack,
        attractor_iterations: diag.iterations,
    })
}

/// Runs [`collage_bound_check`] over many cases on the current rayon pool.
/// Output order follows input order.
pub fn collage_sweep(cases: &[(Ifs, CompactSet)], tol: f64, max_iter: usize) -> Result<Vec<CollageReport>> {
    cases
        .par_iter()
        .map(|(ifs, l)| collage_bound_check(ifs, l, tol, max_iter))
        .collect()
}

/// CSV with a header and one row per report, prefixed by the case index.
pub fn sweep_csv(reports: &[CollageReport]) -> String {
    let mut out = format!("case,{}\n", CollageReport::CSV_HEADER);
    for (i, r) in reports.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", r.csv_row());
    }
    out
}
