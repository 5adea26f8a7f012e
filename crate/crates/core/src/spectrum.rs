//! Closed-form Dirac spectrum of a flat torus with an arbitrary spin
//! structure.
//!
//! On T = R²/Γ with holonomy χ the eigenvalues are λ = ±2π|v + δ_χ| over
//! the dual lattice v ∈ Γ*, each dual point contributing one positive and
//! one negative eigenvalue of the rank-2 spinor bundle (and a kernel of
//! complex dimension 2 at v + δ_χ = 0, which occurs exactly for the
//! trivial spin structure).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::lattice::{LatticeBasis, SpinStructure, Vec2};

/// Cap on the number of enumerated dual-lattice points.
pub const ENUMERATION_CAP: usize = 4_000_000;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// One eigenvalue of D with its complex multiplicity and a frequency
/// ξ = 2π(v + δ_χ) realizing |λ| = |ξ|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub multiplicity: u32,
    pub frequency: Vec2,
}

/// Twisted frequency ξ = 2π((a + eps1/2)·γ1* + (b + eps2/2)·γ2*).
pub(crate) fn frequency(b: &LatticeBasis, s: SpinStructure, a: i64, bb: i64) -> Vec2 {
    let d = b.dual();
    let ca = a as f64 + 0.5 * s.eps1 as i64 as f64;
    let cb = bb as f64 + 0.5 * s.eps2 as i64 as f64;
    TAU * (ca * d.v1()) + TAU * (cb * d.v2())
}

/// Index window guaranteed to contain every v ∈ Γ* with |v + δ_χ| <= r:
/// the coefficient of v + δ_χ along γi* is its pairing with v_i, so it is
/// bounded by r·|v_i|.
fn index_bounds(b: &LatticeBasis, r: f64) -> (i64, i64) {
    let a = (r * b.v1().norm() + 0.5).ceil() as i64 + 1;
    let bb = (r * b.v2().norm() + 0.5).ceil() as i64 + 1;
    (a, bb)
}

/// All Dirac eigenvalues with |λ| <= cutoff, sorted by |λ| then sign,
/// with coincident |λ| merged (tolerance 1e−12 relative).
pub fn dirac_spectrum(
    b: &LatticeBasis,
    s: SpinStructure,
    cutoff: f64,
) -> Result<Vec<SpectrumEntry>> {
    if cutoff <= 0.0 {
        return Err(Error::Parameter("cutoff must be positive".into()));
    }
    let r = cutoff / TAU;
    let (amax, bmax) = index_bounds(b, r);
    let count = (2 * amax + 1) as usize * (2 * bmax + 1) as usize;
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationLimit {
            entries: count,
            cap: ENUMERATION_CAP,
        });
    }

    let keep = cutoff * (1.0 + 1e-12) + 1e-300;
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for a in -amax..=amax {
        for bb in -bmax..=bmax {
            let xi = frequency(b, s, a, bb);
            let n = xi.norm();
            if n > keep {
                continue;
            }
            if n <= 1e-12 * TAU {
                // Kernel mode: the Clifford symbol vanishes, both spinor
                // components are harmonic.
                entries.push(SpectrumEntry {
                    lambda: 0.0,
                    multiplicity: 2,
                    frequency: xi,
                });
            } else {
                entries.push(SpectrumEntry {
                    lambda: -n,
                    multiplicity: 1,
                    frequency: xi,
                });
                entries.push(SpectrumEntry {
                    lambda: n,
                    multiplicity: 1,
                    frequency: xi,
                });
            }
        }
    }

    entries.sort_by(|p, q| {
        (p.lambda.abs(), p.lambda.signum(), p.frequency.x, p.frequency.y)
            .partial_cmp(&(q.lambda.abs(), q.lambda.signum(), q.frequency.x, q.frequency.y))
            .unwrap()
    });

    let mut merged: Vec<SpectrumEntry> = Vec::new();
    for e in entries {
        match merged.last_mut() {
            Some(last)
                if (last.lambda - e.lambda).abs() <= 1e-12 * (1.0 + e.lambda.abs()) =>
            {
                last.multiplicity += e.multiplicity;
            }
            _ => merged.push(e),
        }
    }
    Ok(merged)
}

/// The first (smallest nonnegative) Dirac eigenvalue min 2π|v + δ_χ|;
/// zero exactly for the trivial spin structure.
pub fn first_eigenvalue(b: &LatticeBasis, s: SpinStructure) -> f64 {
    first_mode(b, s).0
}

/// First eigenvalue together with the realizing index pair.
pub(crate) fn first_mode(b: &LatticeBasis, s: SpinStructure) -> (f64, (i64, i64)) {
    // Upper bound from a small window, then an exhaustive window from it.
    let mut best = f64::INFINITY;
    let mut arg = (0, 0);
    for a in -1..=1 {
        for bb in -1..=1 {
            let n = frequency(b, s, a, bb).norm();
            if n < best {
                best = n;
                arg = (a, bb);
            }
        }
    }
    let (amax, bmax) = index_bounds(b, best / TAU);
    for a in -amax..=amax {
        for bb in -bmax..=bmax {
            let n = frequency(b, s, a, bb).norm();
            if n < best {
                best = n;
                arg = (a, bb);
            }
        }
    }
    if s.is_trivial() {
        debug_assert!(best < 1e-12);
        return (0.0, (0, 0));
    }
    (best, arg)
}

/// λ₁ · √area — invariant under similarity transformations of the basis.
pub fn normalized_first(b: &LatticeBasis, s: SpinStructure) -> f64 {
    first_eigenvalue(b, s) * b.area().sqrt()
}

/// The constant-modulus plane-wave eigenspinor of a spectrum entry,
/// normalized to ∫|ψ|⁴ = 1.  Applying the Dirac operator reproduces
/// λ·ψ (a parallel spinor for kernel entries).
pub fn eigenspinor(
    b: &LatticeBasis,
    s: SpinStructure,
    entry: &SpectrumEntry,
) -> Result<SpinorField> {
    // Recover the index pair from the frequency through the pairing with
    // the primal basis.
    let fa = entry.frequency.dot(b.v1()) / TAU - 0.5 * s.eps1 as i64 as f64;
    let fb = entry.frequency.dot(b.v2()) / TAU - 0.5 * s.eps2 as i64 as f64;
    let (a, bb) = (fa.round() as i64, fb.round() as i64);
    let xi = frequency(b, s, a, bb);
    if (xi - entry.frequency).norm() > 1e-9 * (1.0 + entry.frequency.norm()) {
        return Err(Error::Parameter(
            "spectrum entry does not belong to this lattice and spin structure".into(),
        ));
    }

    let amp = symbol_eigenvector(xi, entry.lambda >= 0.0);
    let scale = b.area().powf(-0.25);
    let n = a.unsigned_abs().max(bb.unsigned_abs()).max(1) as usize;
    let mut f = SpinorField::zero(*b, s, n)?;
    f.set_mode(a, bb, [scale * amp[0], scale * amp[1]]);
    Ok(f)
}

/// Unit eigenvector of the Clifford symbol ξ1·σ1 + ξ2·σ2 for eigenvalue
/// ±|ξ| (kernel element (1,0) at ξ = 0).
pub(crate) fn symbol_eigenvector(xi: Vec2, positive: bool) -> [Complex64; 2] {
    let w = Complex64::new(xi.x, xi.y);
    if w.norm() <= f64::MIN_POSITIVE {
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    let sign = if positive { 1.0 } else { -1.0 };
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    [
        sign * w.conj() / w.norm() * inv_sqrt2,
        Complex64::new(inv_sqrt2, 0.0),
    ]
}
