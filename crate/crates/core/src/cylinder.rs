//! The flat cylinder Z_{x₀,y₀} = ℝ² / ℤ·(x₀,y₀), its Mercator map to
//! the doubly pointed round sphere, and the cutoff/transplant
//! constructions used to compare torus minimizers against the sphere
//! bound 2√π for compactly supported spinors.
//!
//! Cylinder points are written p = s·e₁ + t·(x₀,y₀) with t ∈ [0,1)
//! periodic and s ∈ ℝ axial.  The spin structure is the nontrivial one:
//! spinors are anti-periodic along the period direction, so their
//! t-expansion runs over half-integer frequencies m + 1/2.  The Dirac
//! operator is discretized with an exact twisted-Fourier derivative in t
//! and 4th-order central finite differences in s, with Dirichlet-zero
//! padding beyond the compact support.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{SpinorField, SynthPlan};
use crate::lattice::{spin_shift, Vec2};
use crate::minimize::fast_grid_size;

const TAU: f64 = 2.0 * std::f64::consts::PI;

type Spinor = [Complex64; 2];

const ZERO_SPINOR: Spinor = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];

/// Number of grid cells beyond the support kept identically zero, so
/// that the finite-difference stencil never reads truncated data.
pub const SUPPORT_PAD: usize = 8;

/// Uniform grid on the truncated cylinder [−S, S] × (ℝ/ℤ).
#[derive(Debug, Clone)]
pub struct CylinderGrid {
    period: Vec2,
    axial_extent: f64,
    periodic_resolution: usize,
    axial_resolution: usize,
}

impl CylinderGrid {
    pub fn new(
        period: Vec2,
        axial_extent: f64,
        periodic_resolution: usize,
        axial_resolution: usize,
    ) -> Result<Self> {
        if period.y <= 0.0 || !period.x.is_finite() || !period.y.is_finite() {
            return Err(Error::Parameter(
                "cylinder period vector must have positive y component".into(),
            ));
        }
        if axial_extent <= 0.0 {
            return Err(Error::Parameter("axial extent must be positive".into()));
        }
        if periodic_resolution < 4 || periodic_resolution % 2 != 0 {
            return Err(Error::Parameter(
                "periodic resolution must be even and at least 4 (half-integer spectrum)".into(),
            ));
        }
        if axial_resolution < 4 * SUPPORT_PAD + 5 {
            return Err(Error::Parameter(format!(
                "axial resolution must exceed {}",
                4 * SUPPORT_PAD + 5
            )));
        }
        Ok(CylinderGrid {
            period,
            axial_extent,
            periodic_resolution,
            axial_resolution,
        })
    }

    pub fn period(&self) -> Vec2 {
        self.period
    }

    pub fn axial_extent(&self) -> f64 {
        self.axial_extent
    }

    pub fn periodic_resolution(&self) -> usize {
        self.periodic_resolution
    }

    pub fn axial_resolution(&self) -> usize {
        self.axial_resolution
    }

    /// Axial spacing h; nodes are s_i = −S + i·h, i = 0..axial_resolution.
    pub fn axial_step(&self) -> f64 {
        2.0 * self.axial_extent / (self.axial_resolution - 1) as f64
    }

    pub fn axial_node(&self, i: usize) -> f64 {
        -self.axial_extent + i as f64 * self.axial_step()
    }

    /// Cartesian quadrature weight of one grid cell (the (s,t) → (x,y)
    /// Jacobian is the period height y₀).
    pub fn cell_weight(&self) -> f64 {
        self.axial_step() * self.period.y / self.periodic_resolution as f64
    }
}

/// Spinor samples on a cylinder grid, stored axial-major:
/// `values[i * Q + j]` is the node (s_i, t_j = j/Q).
#[derive(Debug, Clone)]
pub struct CylinderSamples {
    grid: CylinderGrid,
    values: Vec<Spinor>,
}

impl CylinderSamples {
    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Spinor] {
        &self.values
    }
}

/// C² quintic smoothstep: 0 at u ≤ 0, 1 at u ≥ 1, max slope 1.875.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// Axial cutoff profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffProfile {
    /// ≡1 on [0,1], ≡0 outside [−1,2], ramps of width 1.
    Eta,
    /// ≡1 on [0,1], ≡0 outside [−w,1+w], |derivative| ≤ 1.875/w ≤ 2/w.
    Gamma { width: f64 },
}

impl CutoffProfile {
    pub fn eval(&self, s: f64) -> f64 {
        let w = match self {
            CutoffProfile::Eta => 1.0,
            CutoffProfile::Gamma { width } => *width,
        };
        if s < 0.0 {
            smoothstep((s + w) / w)
        } else if s <= 1.0 {
            1.0
        } else {
            smoothstep((1.0 + w - s) / w)
        }
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        match self {
            CutoffProfile::Eta => (-1.0, 2.0),
            CutoffProfile::Gamma { width } => (-width, 1.0 + width),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let CutoffProfile::Gamma { width } = self {
            if !(*width > 0.0) {
                return Err(Error::Parameter("gamma cutoff width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Mercator map Z_{0,2π} → S²: (x,y) ↦ (sin y/cosh x, cos y/cosh x, tanh x).
/// It is a conformal bijection onto the sphere minus the poles; the poles
/// are the limits x → ±∞.
pub fn mercator(p: Vec2) -> [f64; 3] {
    let c = p.x.cosh();
    [p.y.sin() / c, p.y.cos() / c, p.x.tanh()]
}

/// Conformal factor of the Mercator map: f(x,y) = 1/cosh x, so that the
/// pullback of the round metric is f²·(Euclidean).
pub fn conformal_factor(p: Vec2) -> f64 {
    1.0 / p.x.cosh()
}

/// Lift a torus spinor to the cylinder cover and multiply by an axial
/// cutoff.  The torus must have basis ((1,0), period) and an
/// anti-periodic parity along the period direction; the cutoff support,
/// padded by `SUPPORT_PAD` cells, must fit inside the axial extent.
pub fn transplant(
    f: &SpinorField,
    cutoff: CutoffProfile,
    grid: &CylinderGrid,
) -> Result<CylinderSamples> {
    cutoff.validate()?;
    let b = f.basis();
    if (b.v1() - Vec2::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Parameter(
            "transplant expects a torus basis of the form ((1,0),(x,y))".into(),
        ));
    }
    if (b.v2() - grid.period).norm() > 1e-9 {
        return Err(Error::Parameter(
            "cylinder period vector must equal the second torus basis vector".into(),
        ));
    }
    if !f.spin().eps2 {
        return Err(Error::Parity(
            "torus parity along the period direction is periodic; the cylinder spin structure is anti-periodic".into(),
        ));
    }
    let (lo, hi) = cutoff.support();
    let pad = SUPPORT_PAD as f64 * grid.axial_step();
    if lo - pad < -grid.axial_extent || hi + pad > grid.axial_extent {
        return Err(Error::Support(format!(
            "cutoff support [{lo}, {hi}] plus {SUPPORT_PAD}-cell padding exceeds axial extent {}",
            grid.axial_extent
        )));
    }

    // ψ(s,t) = Σ_b e^{i s β_b + 2πi(b+ε₂/2)t} Σ_a c_{ab} e^{i s α_a},
    // where ξ_x(a,b) = α_a + β_b splits over the dual basis; the pairing
    // ⟨ξ, period⟩ = 2π(b + ε₂/2) is exact.
    let dual = b.dual();
    let delta = spin_shift(b, f.spin());
    let n = f.window() as i64;
    let dim = f.dim();
    let q = grid.periodic_resolution;
    let (e1h, e2h) = (
        f.spin().eps1 as i64 as f64 * 0.5,
        f.spin().eps2 as i64 as f64 * 0.5,
    );
    let alpha: Vec<f64> = (-n..=n)
        .map(|a| TAU * (a as f64 + e1h) * dual.v1().x)
        .collect();
    let beta: Vec<f64> = (-n..=n)
        .map(|bb| TAU * (bb as f64 + e2h) * dual.v2().x)
        .collect();
    debug_assert!((delta.x - (e1h * dual.v1().x + e2h * dual.v2().x)).abs() < 1e-12);
    // Periodic phase table e^{2πi(b+ε₂/2) j/Q}.
    let tphase: Vec<Complex64> = (0..dim * q)
        .map(|k| {
            let (bi, j) = (k / q, k % q);
            let mu = (bi as i64 - n) as f64 + e2h;
            Complex64::from_polar(1.0, TAU * mu * j as f64 / q as f64)
        })
        .collect();

    let mut values = vec![ZERO_SPINOR; grid.axial_resolution * q];
    let coeffs = f.coeffs();
    let mut col = vec![ZERO_SPINOR; dim];
    for i in 0..grid.axial_resolution {
        let s = grid.axial_node(i);
        let cut = cutoff.eval(s);
        if cut == 0.0 {
            continue;
        }
        for (bi, c) in col.iter_mut().enumerate() {
            let mut acc = ZERO_SPINOR;
            for (ai, &al) in alpha.iter().enumerate() {
                let ph = Complex64::from_polar(1.0, s * al);
                let m = coeffs[ai * dim + bi];
                acc[0] += ph * m[0];
                acc[1] += ph * m[1];
            }
            let ph = Complex64::from_polar(cut, s * beta[bi]);
            *c = [ph * acc[0], ph * acc[1]];
        }
        for j in 0..q {
            let mut v = ZERO_SPINOR;
            for (bi, c) in col.iter().enumerate() {
                let ph = tphase[bi * q + j];
                v[0] += ph * c[0];
                v[1] += ph * c[1];
            }
            values[i * q + j] = v;
        }
    }
    Ok(CylinderSamples {
        grid: grid.clone(),
        values,
    })
}

/// Anti-periodic spectral derivative kernel: b_j = Σ_k κ(j−k) f_k
/// reproduces ∂_t exactly on span{e^{2πi(m+1/2)t}}, |m+1/2| ≤ Q/2.
fn twisted_derivative_kernel(q: usize) -> Vec<Complex64> {
    let half = q as i64 / 2;
    let mut kernel = vec![Complex64::new(0.0, 0.0); 2 * q - 1];
    for (idx, k) in kernel.iter_mut().enumerate() {
        let d = idx as i64 - (q as i64 - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -half..half {
            let mu = m as f64 + 0.5;
            acc += Complex64::new(0.0, TAU * mu) * Complex64::from_polar(1.0, TAU * mu * d as f64 / q as f64);
        }
        *k = acc / q as f64;
    }
    kernel
}

/// J on the cylinder for compactly supported samples:
/// (∫|Dψ|^{4/3})^{3/2} / |∫⟨Dψ,ψ⟩| with D = exact twisted Fourier in t
/// and 4th-order central differences in s.
pub fn cylinder_j(samples: &CylinderSamples) -> Result<f64> {
    let grid = &samples.grid;
    let q = grid.periodic_resolution;
    let ns = grid.axial_resolution;
    let vals = &samples.values;

    // Compact support: the outer SUPPORT_PAD axial rows must vanish.
    let peak = vals
        .iter()
        .map(|v| v[0].norm() + v[1].norm())
        .fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Err(Error::DegeneratePairing(0.0));
    }
    for i in (0..SUPPORT_PAD).chain(ns - SUPPORT_PAD..ns) {
        for j in 0..q {
            let v = vals[i * q + j];
            if v[0].norm() + v[1].norm() > 1e-12 * peak {
                return Err(Error::Support(format!(
                    "field is not compactly supported: nonzero sample in boundary row {i}"
                )));
            }
        }
    }

    let h = grid.axial_step();
    let y = grid.period.y;
    let r = grid.period.x / y;
    let kernel = twisted_derivative_kernel(q);
    let w = grid.cell_weight();

    // ∂_t row by row (dense twisted kernel), then assemble Dψ.
    let mut num = 0.0;
    let mut pairing = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let mut bt = vec![ZERO_SPINOR; q];
    let fetch = |i: i64, j: usize| -> Spinor {
        if i < 0 || i >= ns as i64 {
            ZERO_SPINOR
        } else {
            vals[i as usize * q + j]
        }
    };
    let cplus = Complex64::new(1.0, r); // 1 + i·r
    let cminus = Complex64::new(1.0, -r);
    let iy = Complex64::new(0.0, 1.0 / y);
    let mi = Complex64::new(0.0, -1.0);
    for i in 0..ns {
        for (j, b) in bt.iter_mut().enumerate() {
            let mut acc = ZERO_SPINOR;
            for k in 0..q {
                let ph = kernel[(q as i64 - 1 + j as i64 - k as i64) as usize];
                let v = vals[i * q + k];
                acc[0] += ph * v[0];
                acc[1] += ph * v[1];
            }
            *b = acc;
        }
        for j in 0..q {
            let ii = i as i64;
            let mut a = ZERO_SPINOR;
            for k in 0..2 {
                a[k] = (-fetch(ii + 2, j)[k] + 8.0 * fetch(ii + 1, j)[k]
                    - 8.0 * fetch(ii - 1, j)[k]
                    + fetch(ii - 2, j)[k])
                    / (12.0 * h);
            }
            let b = bt[j];
            let d0 = mi * (cplus * a[1] - iy * b[1]);
            let d1 = mi * (cminus * a[0] + iy * b[0]);
            let v = vals[i * q + j];
            let n2 = d0.norm_sqr() + d1.norm_sqr();
            let c3 = n2.cbrt();
            num += c3 * c3;
            pairing += d0.conj() * v[0] + d1.conj() * v[1];
            scale += n2.sqrt() * (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        }
    }
    num *= w;
    let pairing = (pairing * w).conj();
    let scale = scale * w;
    if pairing.im.abs() > 1e-8 * (scale + f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "cylinder pairing not real: im = {:.3e}, scale = {:.3e}",
            pairing.im, scale
        )));
    }
    if pairing.re.abs() <= 1e-10 * (scale + f64::MIN_POSITIVE) {
        return Err(Error::DegeneratePairing(pairing.re.abs()));
    }
    Ok(num.powf(1.5) / pairing.re.abs())
}

/// Brute-force search over axial strips A_l = {t₁ ∈ [l/n, (l+1)/n)}:
/// returns the strip of least ∫|ψ|⁴ mass and that mass.  Requires the
/// field normalized to ∫|ψ|⁴ = 1; the minimum is always ≤ 1/n.
pub fn best_translation(f: &SpinorField, n_strips: usize) -> Result<(usize, f64)> {
    if n_strips < 1 {
        return Err(Error::Parameter("n_strips must be at least 1".into()));
    }
    let dim = f.dim();
    let base = crate::field::MIN_OVERSAMPLE * dim;
    let per_strip = base.div_ceil(n_strips).max(4);
    let m1 = n_strips * per_strip;
    let m2 = fast_grid_size(base);
    let plan = SynthPlan::new(f, m1, m2)?;
    let g = plan.synth(f.coeffs());
    let w = g.cell_area();
    let mut mass = vec![0.0f64; n_strips];
    for (i, v) in g.values().iter().enumerate() {
        let row = i / m2;
        let n2 = v[0].norm_sqr() + v[1].norm_sqr();
        mass[row / per_strip] += n2 * n2 * w;
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > 1e-3 {
        return Err(Error::Parameter(format!(
            "field is not normalized: quadrature of the quartic integral is {total:.6}"
        )));
    }
    let mut best = 0;
    for (l, &m) in mass.iter().enumerate() {
        if m < mass[best] {
            best = l;
        }
    }
    Ok((best, mass[best]))
}

/// A random smooth compactly supported anti-periodic spinor: a few
/// half-integer harmonics in t under a random quintic-ramp envelope in s.
pub fn random_bump_spinor<R: Rng>(grid: &CylinderGrid, rng: &mut R) -> Result<CylinderSamples> {
    let q = grid.periodic_resolution;
    let ns = grid.axial_resolution;
    let s_max = grid.axial_extent - (SUPPORT_PAD + 1) as f64 * grid.axial_step();
    if s_max <= 0.3 {
        return Err(Error::Parameter(
            "axial extent too small for a padded bump".into(),
        ));
    }
    // Plateau [u0, u1] and ramp width, all inside [−s_max, s_max].
    let ramp = 0.2 + 0.3 * rng.gen::<f64>();
    let span = 2.0 * s_max - 2.0 * ramp;
    let len = (0.1 + 0.4 * rng.gen::<f64>()) * span;
    let u0 = -s_max + ramp + rng.gen::<f64>() * (span - len);
    let u1 = u0 + len;
    let envelope = |s: f64| -> f64 {
        if s < u0 {
            smoothstep((s - (u0 - ramp)) / ramp)
        } else if s <= u1 {
            1.0
        } else {
            smoothstep(((u1 + ramp) - s) / ramp)
        }
    };

    let kmax = (q / 2 - 1).min(3) as i64;
    let nmodes = (2 * kmax) as usize; // m ∈ [−kmax, kmax), μ = m + 1/2
    let mut coeff = vec![ZERO_SPINOR; nmodes];
    for c in &mut coeff {
        for k in 0..2 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c[k] = Complex64::new(re, im);
        }
    }
    let mut values = vec![ZERO_SPINOR; ns * q];
    for i in 0..ns {
        let env = envelope(grid.axial_node(i));
        if env == 0.0 {
            continue;
        }
        for j in 0..q {
            let t = j as f64 / q as f64;
            let mut v = ZERO_SPINOR;
            for (mi, c) in coeff.iter().enumerate() {
                let mu = (mi as i64 - kmax) as f64 + 0.5;
                let ph = Complex64::from_polar(env, TAU * mu * t);
                v[0] += ph * c[0];
                v[1] += ph * c[1];
            }
            values[i * q + j] = v;
        }
    }
    Ok(CylinderSamples {
        grid: grid.clone(),
        values,
    })
}
