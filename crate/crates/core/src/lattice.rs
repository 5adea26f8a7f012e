//! Lattices in R², spin structures as holonomy parities, dual lattices,
//! and reduction to the fundamental domain of the spin-conformal moduli
//! space
//!
//! ```text
//!   M_1 = { (x,y) : |x| <= 1/2,  y > 0,  y^2 + (|x|-1/2)^2 >= 1/4 }
//! ```
//!
//! with the boundary identification (x,y) ~ (-x,y).  A spin structure on
//! T = R²/Γ is the holonomy homomorphism χ: Γ → {±1}, stored as one
//! parity bit per basis vector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for membership and boundary tests.
pub const GEOM_TOL: f64 = 1e-9;

/// Iteration cap for the hyperbolic reduction loop.
const REDUCE_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// An oriented basis (v1, v2) of a rank-2 lattice Γ ⊂ R², det(v1,v2) > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    v1: Vec2,
    v2: Vec2,
}

impl LatticeBasis {
    pub fn new(v1: Vec2, v2: Vec2) -> Result<Self> {
        let det = v1.x * v2.y - v1.y * v2.x;
        let scale = v1.norm() * v2.norm();
        if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidLattice(format!(
                "degenerate basis, det = {det:.3e}"
            )));
        }
        if det < 0.0 {
            return Err(Error::InvalidLattice(
                "orientation-reversing basis (det < 0)".into(),
            ));
        }
        Ok(LatticeBasis { v1, v2 })
    }

    /// The canonical torus basis ((1,0),(x,y)) for a moduli point.
    pub fn canonical(p: ModuliPoint) -> Result<Self> {
        LatticeBasis::new(Vec2::new(1.0, 0.0), Vec2::new(p.x, p.y))
    }

    pub fn v1(&self) -> Vec2 {
        self.v1
    }

    pub fn v2(&self) -> Vec2 {
        self.v2
    }

    pub fn det(&self) -> f64 {
        self.v1.x * self.v2.y - self.v1.y * self.v2.x
    }

    /// Area of the torus R²/Γ.
    pub fn area(&self) -> f64 {
        self.det()
    }

    /// The dual basis (γ1*, γ2*) of Γ*, with <γi*, vj> = δ_ij.
    pub fn dual(&self) -> LatticeBasis {
        let d = self.det();
        LatticeBasis {
            v1: Vec2::new(self.v2.y / d, -self.v2.x / d),
            v2: Vec2::new(-self.v1.y / d, self.v1.x / d),
        }
    }
}

/// Dual basis of Γ*, ordered so that the pairing matrix is the identity.
pub fn dual_basis(b: &LatticeBasis) -> LatticeBasis {
    b.dual()
}

/// The holonomy homomorphism χ: Γ → {−1,+1}, as parity bits on the basis:
/// `eps_i = false` ⇔ χ(v_i) = +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinStructure {
    pub eps1: bool,
    pub eps2: bool,
}

impl SpinStructure {
    pub fn new(eps1: bool, eps2: bool) -> Self {
        SpinStructure { eps1, eps2 }
    }

    pub fn trivial() -> Self {
        SpinStructure::new(false, false)
    }

    /// The canonical parities (0,1) of the normalization lemma.
    pub fn canonical() -> Self {
        SpinStructure::new(false, true)
    }

    pub fn is_trivial(&self) -> bool {
        !self.eps1 && !self.eps2
    }

    /// χ(a·v1 + b·v2) = (−1)^(a·eps1 + b·eps2).
    pub fn chi(&self, a: i64, b: i64) -> i32 {
        let e = (a & 1) * self.eps1 as i64 + (b & 1) * self.eps2 as i64;
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn parities(&self) -> (u8, u8) {
        (self.eps1 as u8, self.eps2 as u8)
    }
}

/// The spin shift vector δ_χ = (eps1·γ1* + eps2·γ2*)/2 ∈ (1/2)Γ*.
pub fn spin_shift(b: &LatticeBasis, s: SpinStructure) -> Vec2 {
    let d = b.dual();
    0.5 * (s.eps1 as i64 as f64 * d.v1()) + 0.5 * (s.eps2 as i64 as f64 * d.v2())
}

/// Canonical coordinates in the fundamental domain M_1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub x: f64,
    pub y: f64,
}

impl ModuliPoint {
    pub fn new(x: f64, y: f64) -> Self {
        ModuliPoint { x, y }
    }

    /// Membership in M_1 with boundary tolerance.
    pub fn contains(&self) -> bool {
        moduli_contains(*self)
    }

    /// Distance of (x,y) to the circle constraint; >= 0 inside.
    fn circle_slack(&self) -> f64 {
        self.y * self.y + (self.x.abs() - 0.5).powi(2) - 0.25
    }

    /// Whether the point lies on the boundary of M_1 (within tolerance).
    pub fn on_boundary(&self) -> bool {
        self.contains()
            && ((self.x.abs() - 0.5).abs() <= GEOM_TOL || self.circle_slack().abs() <= GEOM_TOL)
    }

    /// Boundary identification (x,y) ~ (−x,y), canonicalized to x >= 0.
    pub fn canonicalized(&self) -> ModuliPoint {
        if self.x < 0.0 && self.on_boundary() {
            ModuliPoint::new(-self.x, self.y)
        } else {
            *self
        }
    }
}

/// True iff |x| <= 1/2, y > 0 and y² + (|x|−1/2)² >= 1/4 (with tolerance).
pub fn moduli_contains(p: ModuliPoint) -> bool {
    p.x.abs() <= 0.5 + GEOM_TOL && p.y > 0.0 && p.circle_slack() >= -GEOM_TOL
}

/// Audit trail of `reduce_to_moduli`: an integer unimodular basis change
/// followed by an orientation-preserving similarity of R².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisChange {
    /// Row-major: new_i = Σ_j matrix[i][j] · old_j, det = +1.
    pub matrix: [[i64; 2]; 2],
    /// Rotation angle of the similarity, radians.
    pub rotation: f64,
    /// Scale factor of the similarity, positive.
    pub scale: f64,
}

impl BasisChange {
    pub fn det(&self) -> i64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// Apply (matrix, similarity) to a basis; reproduces ((1,0),(x,y)) for
    /// the basis that was reduced.
    pub fn apply(&self, b: &LatticeBasis) -> (Vec2, Vec2) {
        let rot = Complex64::from_polar(self.scale, self.rotation);
        let w1 = self.matrix[0][0] as f64 * b.v1().to_complex()
            + self.matrix[0][1] as f64 * b.v2().to_complex();
        let w2 = self.matrix[1][0] as f64 * b.v1().to_complex()
            + self.matrix[1][1] as f64 * b.v2().to_complex();
        let w1 = rot * w1;
        let w2 = rot * w2;
        (Vec2::new(w1.re, w1.im), Vec2::new(w2.re, w2.im))
    }
}

/// State of the reduction walk: basis vectors as complex numbers, the
/// accumulated unimodular matrix, and the spin parities.
struct ReduceState {
    w1: Complex64,
    w2: Complex64,
    mat: [[i64; 2]; 2],
    eps1: bool,
    eps2: bool,
}

impl ReduceState {
    /// new_1 = a·w1 + b·w2, new_2 = c·w1 + d·w2; parities transform as a
    /// homomorphism: eps_i' = Σ coeffs·eps mod 2.
    fn apply(&mut self, a: i64, b: i64, c: i64, d: i64) {
        debug_assert_eq!(a * d - b * c, 1);
        let (w1, w2) = (self.w1, self.w2);
        self.w1 = a as f64 * w1 + b as f64 * w2;
        self.w2 = c as f64 * w1 + d as f64 * w2;
        let m = self.mat;
        self.mat = [
            [
                a * m[0][0] + b * m[1][0],
                a * m[0][1] + b * m[1][1],
            ],
            [
                c * m[0][0] + d * m[1][0],
                c * m[0][1] + d * m[1][1],
            ],
        ];
        let (e1, e2) = (self.eps1 as i64, self.eps2 as i64);
        self.eps1 = (a * e1 + b * e2) % 2 != 0;
        self.eps2 = (c * e1 + d * e2) % 2 != 0;
    }

    fn tau(&self) -> Complex64 {
        self.w2 / self.w1
    }
}

/// Reduce (basis, nontrivial spin structure) to its canonical representative
/// in M_1: the transformed basis is ((1,0),(x,y)) with parities (0,1).
///
/// The walk uses exactly the unimodular moves whose mod-2 matrix is
/// lower-left triangular (these preserve parities (0,1)): translations
/// τ → τ ± 1 and the inversions τ → τ/(1 ± 2τ) attached to the two
/// boundary circles |τ ∓ 1/2| = 1/2.
pub fn reduce_to_moduli(
    b: &LatticeBasis,
    s: SpinStructure,
) -> Result<(ModuliPoint, BasisChange)> {
    if s.is_trivial() {
        return Err(Error::UnsupportedSpin(
            "the trivial spin structure has no moduli representative".into(),
        ));
    }
    let mut st = ReduceState {
        w1: b.v1().to_complex(),
        w2: b.v2().to_complex(),
        mat: [[1, 0], [0, 1]],
        eps1: s.eps1,
        eps2: s.eps2,
    };

    // Normalize the parities to (0,1) first.
    match (st.eps1, st.eps2) {
        (false, true) => {}
        (true, true) => st.apply(1, -1, 0, 1),  // v1 -> v1 - v2
        (true, false) => st.apply(0, 1, -1, 0), // swap with orientation fix
        (false, false) => unreachable!(),
    }
    debug_assert!(!st.eps1 && st.eps2);

    // Hyperbolic reduction on τ = w2/w1.
    let mut done = false;
    for _ in 0..REDUCE_MAX_ITERS {
        let n = st.tau().re.round();
        if n != 0.0 {
            // τ -> τ - n, i.e. v2 -> v2 - n·v1 (keeps parities).
            st.apply(1, 0, -(n as i64), 1);
        }
        let tau = st.tau();
        if (tau + 0.5).norm() < 0.5 - GEOM_TOL {
            st.apply(1, 2, 0, 1); // τ -> τ/(1 + 2τ)
        } else if (tau - 0.5).norm() < 0.5 - GEOM_TOL {
            st.apply(1, -2, 0, 1); // τ -> τ/(1 - 2τ)
        } else {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::ReductionFailed(format!(
            "no fixed point after {REDUCE_MAX_ITERS} moves"
        )));
    }

    // Boundary tie-breaking: canonicalize ∂M_1 points to x >= 0.
    let tau = st.tau();
    if tau.re < 0.0 {
        if (tau.re + 0.5).abs() <= GEOM_TOL {
            st.apply(1, 0, 1, 1); // x = -1/2  ->  x = +1/2
        } else if ((tau + 0.5).norm() - 0.5).abs() <= GEOM_TOL {
            st.apply(1, 2, 0, 1); // left circle -> right circle
        }
    }

    let tau = st.tau();
    let point = ModuliPoint::new(tau.re, tau.im);
    if !moduli_contains(point) {
        return Err(Error::ReductionFailed(format!(
            "final point ({}, {}) escaped M_1",
            point.x, point.y
        )));
    }
    debug_assert!(!st.eps1 && st.eps2);

    let change = BasisChange {
        matrix: st.mat,
        rotation: -st.w1.arg(),
        scale: 1.0 / st.w1.norm(),
    };
    Ok((point, change))
}

/// JSON wire form of a lattice with spin structure:
/// `{"v1":[a,b],"v2":[c,d],"eps":[e1,e2]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinLatticeJson {
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub eps: [u8; 2],
}

impl SpinLatticeJson {
    pub fn pack(b: &LatticeBasis, s: SpinStructure) -> Self {
        SpinLatticeJson {
            v1: [b.v1().x, b.v1().y],
            v2: [b.v2().x, b.v2().y],
            eps: [s.eps1 as u8, s.eps2 as u8],
        }
    }

    pub fn unpack(&self) -> Result<(LatticeBasis, SpinStructure)> {
        if self.eps[0] > 1 || self.eps[1] > 1 {
            return Err(Error::Parse("eps entries must be 0 or 1".into()));
        }
        let b = LatticeBasis::new(
            Vec2::new(self.v1[0], self.v1[1]),
            Vec2::new(self.v2[0], self.v2[1]),
        )?;
        Ok((b, SpinStructure::new(self.eps[0] == 1, self.eps[1] == 1)))
    }
}
