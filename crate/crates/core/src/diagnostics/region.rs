use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on the scaling relation `2/q + 3/p = 1 + r`.
const LINE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Every condition of the Besov criterion holds.
    UniquenessRegion,
    /// A strict inequality holds only with equality, or `(p, q) = (∞, 1)`.
    ExcludedBoundary,
    /// `2/q + 3/p > 1` outside the uniqueness region.
    RegionIOpen,
    /// `2/q + 3/p ≤ 1`: the Lebesgue criterion on `∇B` applies.
    RegionIIRegular,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::UniquenessRegion => "uniqueness_region",
            Classification::ExcludedBoundary => "excluded_boundary",
            Classification::RegionIOpen => "region_I_open",
            Classification::RegionIIRegular => "region_II_regular",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponents `(p, q, r)` for `∇×B ∈ L^q(0,T; B^r_{p,∞})` with their class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriterionTriple {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub classification: Classification,
}

fn inv(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Total classification of `(p, q, r)`.
///
/// The strict conditions are `r ∈ (0, 1]`, `p > 3/(1+r)` and
/// `(p, q) ≠ (∞, 1)`. A triple that meets each of them or sits exactly on its
/// boundary (`r = 0`, `p = 3/(1+r)`, the excluded corner), with at least one
/// boundary hit, is `excluded_boundary`. Otherwise it is `uniqueness_region`
/// when the strict conditions hold and `2/q + 3/p = 1 + r`, and is split by
/// `2/q + 3/p ≤ 1` in every remaining case.
pub fn region_classify(p: f64, q: f64, r: f64) -> Result<CriterionTriple> {
    for (name, v) in [("p", p), ("q", q)] {
        if v.is_nan() || v < 1.0 {
            return Err(Error::param(name, format!("exponent must lie in [1, ∞], got {v}")));
        }
    }
    if !r.is_finite() {
        return Err(Error::param("r", format!("regularity must be finite, got {r}")));
    }
    let s = 2.0 * inv(q) + 3.0 * inv(p);
    let classification = match strict_conditions(p, q, r) {
        Some(true) => Classification::ExcludedBoundary,
        Some(false) if (s - (1.0 + r)).abs() <= LINE_TOL => Classification::UniquenessRegion,
        _ if s <= 1.0 => Classification::RegionIIRegular,
        _ => Classification::RegionIOpen,
    };
    Ok(CriterionTriple {
        p,
        q,
        r,
        classification,
    })
}

/// `None` if a strict condition fails beyond its boundary, otherwise whether
/// any condition holds only with equality.
fn strict_conditions(p: f64, q: f64, r: f64) -> Option<bool> {
    let mut boundary = false;
    if r == 0.0 {
        boundary = true;
    } else if !(r > 0.0 && r <= 1.0) {
        return None;
    }
    let p_min = 3.0 / (1.0 + r);
    if p.is_finite() && (p - p_min).abs() <= LINE_TOL * p_min {
        boundary = true;
    } else if p < p_min {
        return None;
    }
    if p.is_infinite() && q == 1.0 {
        boundary = true;
    }
    Some(boundary)
}

/// The four labeled points of the region diagram with their spaces.
pub fn figure_points() -> Vec<(&'static str, &'static str, CriterionTriple)> {
    let inf = f64::INFINITY;
    [
        ("P1", "L^{3/2}(B^1_{inf,inf})", inf, 1.0, 1.0),
        ("P2", "L^inf(B^1_{1,inf})", 1.5, inf, 1.0),
        ("P3", "L^3(B^0_{inf,inf})", inf, 2.0, 0.0),
        ("P4", "L^inf(B^0_{2,inf})", 3.0, inf, 0.0),
    ]
    .into_iter()
    .map(|(label, space, p, q, r)| {
        (label, space, region_classify(p, q, r).expect("valid exponents"))
    })
    .collect()
}
