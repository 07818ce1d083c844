//! Domains, polar quadrature grids and evaluation sets.
//!
//! All quadrature lives on the unit disc: a conformal domain is handled by
//! pulling points back through the supplied biholomorphism and weighting with
//! the Jacobian `|psi'|^2`, so the domain itself is never meshed.

use crate::{Complex64, Error, Result};
use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to machine precision
/// for the orders used here (n <= a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A planar domain: the unit disc, or a conformal image of it described by a
/// closed-form polynomial inverse map `psi = phi^{-1}: D -> Omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    UnitDisc,
    /// `psi(zeta) = sum_k coeffs[k] * zeta^{k+1}`, univalent on the disc.
    /// The forward map `phi` is recovered by Newton inversion and
    /// `phi'(z) = 1 / psi'(phi(z))`.
    Conformal { psi: Vec<Complex64> },
}

impl DomainSpec {
    /// Quadratic one-parameter family `psi(zeta) = zeta + c zeta^2`, univalent
    /// for `|c| < 1/2`.
    pub fn quadratic(c: Complex64) -> Result<Self> {
        if c.norm() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "quadratic map requires |c| < 1/2, got |c| = {}",
                c.norm()
            )));
        }
        Ok(DomainSpec::Conformal {
            psi: vec![Complex64::new(1.0, 0.0), c],
        })
    }

    pub fn is_disc(&self) -> bool {
        matches!(self, DomainSpec::UnitDisc)
    }

    /// The inverse map `psi: D -> Omega` (identity on the disc).
    pub fn psi(&self, zeta: Complex64) -> Complex64 {
        match self {
            DomainSpec::UnitDisc => zeta,
            DomainSpec::Conformal { psi } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for &c in psi.iter().rev() {
                    acc = (acc + c) * zeta;
                }
                acc
            }
        }
    }

    /// `psi'(zeta)`.
    pub fn psi_prime(&self, zeta: Complex64) -> Complex64 {
        match self {
            DomainSpec::UnitDisc => Complex64::new(1.0, 0.0),
            DomainSpec::Conformal { psi } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &c) in psi.iter().enumerate().rev() {
                    acc = acc * zeta + c * (k as f64 + 1.0);
                }
                acc
            }
        }
    }

    /// Forward map `phi: Omega -> D` by Newton inversion of `psi`.
    pub fn forward(&self, z: Complex64) -> Result<Complex64> {
        match self {
            DomainSpec::UnitDisc => Ok(z),
            DomainSpec::Conformal { psi } => {
                let lead = psi[0];
                let mut zeta = z / lead;
                for _ in 0..60 {
                    let dp = self.psi_prime(zeta);
                    if dp.norm() < 1e-14 {
                        return Err(Error::OutsideDomain(format!(
                            "Newton inversion stalled at zeta = {zeta}"
                        )));
                    }
                    let step = (self.psi(zeta) - z) / dp;
                    zeta -= step;
                    if step.norm() < 1e-15 {
                        break;
                    }
                }
                if (self.psi(zeta) - z).norm() > 1e-10 {
                    return Err(Error::OutsideDomain(format!(
                        "forward map failed to converge at z = {z}"
                    )));
                }
                Ok(zeta)
            }
        }
    }

    /// `phi'(z) = 1 / psi'(phi(z))`.
    pub fn phi_prime(&self, z: Complex64) -> Result<Complex64> {
        match self {
            DomainSpec::UnitDisc => Ok(Complex64::new(1.0, 0.0)),
            _ => {
                let zeta = self.forward(z)?;
                Ok(Complex64::new(1.0, 0.0) / self.psi_prime(zeta))
            }
        }
    }

    /// `phi'` at a point whose pullback coordinate is already known.
    pub fn phi_prime_at_pullback(&self, zeta: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) / self.psi_prime(zeta)
    }

    /// Distance from an interior point to the boundary. Exact on the disc,
    /// estimated on conformal images from a dense boundary sample.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match self {
            DomainSpec::UnitDisc => 1.0 - z.norm(),
            DomainSpec::Conformal { .. } => {
                let n = 720;
                let mut d = f64::INFINITY;
                for k in 0..n {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    let b = self.psi(Complex64::from_polar(1.0, th));
                    d = d.min((z - b).norm());
                }
                d
            }
        }
    }

    /// Univalence probe: `psi' != 0` on a dense sample of the closed disc.
    pub fn check_univalence(&self) -> Result<()> {
        for ir in 0..=24 {
            let r = ir as f64 / 24.0;
            for it in 0..64 {
                let th = 2.0 * std::f64::consts::PI * it as f64 / 64.0;
                let zeta = Complex64::from_polar(r, th);
                if self.psi_prime(zeta).norm() < 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "psi' vanishes near zeta = {zeta}: map is not univalent"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `psi(zeta)` for `zeta` strictly inside the disc: quadrature and evaluation
/// points on `Omega` are realized as images of disc points, with the Jacobian
/// `|psi'|^2` carried by the weights.
pub fn pullback_point(domain: &DomainSpec, zeta: Complex64) -> Result<Complex64> {
    if zeta.norm() >= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "pullback requires |zeta| < 1, got |zeta| = {}",
            zeta.norm()
        )));
    }
    Ok(domain.psi(zeta))
}

/// Tensor polar quadrature rule on the unit disc: Gauss-Legendre in the
/// radius (weights carry the Jacobian `r`), equispaced angles with uniform
/// weight. Weight sum is exactly pi.
#[derive(Debug, Clone)]
pub struct FactorGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub margin: f64,
    /// radial nodes in (0, 1)
    pub radii: Vec<f64>,
    /// radial weights including the Jacobian r (integrate f(r) r dr over [0,1])
    pub radial_weights: Vec<f64>,
    /// flattened nodes, index = ir * n_theta + it
    pub nodes: Vec<Complex64>,
    /// matching area weights
    pub weights: Vec<f64>,
}

impl FactorGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a scalar sample vector against the rule.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(&w, &v)| v * w)
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }
}

/// Build the polar tensor rule on the disc.
pub fn make_disc_grid(n_r: usize, n_theta: usize, margin: f64) -> Result<FactorGrid> {
    if n_r < 4 {
        return Err(Error::InvalidGrid(format!("n_r must be >= 4, got {n_r}")));
    }
    if n_theta < 8 {
        return Err(Error::InvalidGrid(format!(
            "n_theta must be >= 8, got {n_theta}"
        )));
    }
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::InvalidGrid(format!(
            "margin must lie in (0, 0.5), got {margin}"
        )));
    }
    let (x, wx) = gauss_legendre(n_r);
    let radii: Vec<f64> = x.iter().map(|&t| 0.5 * (t + 1.0)).collect();
    let radial_weights: Vec<f64> = wx
        .iter()
        .zip(&radii)
        .map(|(&w, &r)| 0.5 * w * r)
        .collect();
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_r * n_theta);
    let mut weights = Vec::with_capacity(n_r * n_theta);
    for (ir, &r) in radii.iter().enumerate() {
        for it in 0..n_theta {
            let th = dtheta * it as f64;
            nodes.push(Complex64::from_polar(r, th));
            weights.push(radial_weights[ir] * dtheta);
        }
    }
    Ok(FactorGrid {
        n_r,
        n_theta,
        margin,
        radii,
        radial_weights,
        nodes,
        weights,
    })
}

/// Interior evaluation set for one factor: scaled Gauss-Legendre radii kept a
/// margin away from the boundary, golden-ratio-offset angles so evaluation
/// points never collide with quadrature angles. Carries weights so it doubles
/// as an interior L^p proxy rule (weight sum pi (1-margin)^2).
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub n_r: usize,
    pub n_theta: usize,
    pub margin: f64,
    pub radii: Vec<f64>,
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl EvalSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn make_eval_set(n_r: usize, n_theta: usize, margin: f64) -> Result<EvalSet> {
    if n_r < 1 || n_theta < 1 {
        return Err(Error::InvalidGrid("evaluation set must be non-empty".into()));
    }
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::InvalidGrid(format!(
            "margin must lie in (0, 0.5), got {margin}"
        )));
    }
    let rmax = 1.0 - margin;
    let (x, wx) = gauss_legendre(n_r);
    let radii: Vec<f64> = x.iter().map(|&t| 0.5 * (t + 1.0) * rmax).collect();
    let golden = 0.5 * (5.0_f64.sqrt() - 1.0);
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
    let mut points = Vec::with_capacity(n_r * n_theta);
    let mut weights = Vec::with_capacity(n_r * n_theta);
    for (ir, &r) in radii.iter().enumerate() {
        let wr = 0.5 * wx[ir] * rmax * r;
        for it in 0..n_theta {
            let th = dtheta * (it as f64 + golden);
            points.push(Complex64::from_polar(r, th));
            weights.push(wr * dtheta);
        }
    }
    Ok(EvalSet {
        n_r,
        n_theta,
        margin,
        radii,
        points,
        weights,
    })
}

/// Per-factor grid sizes; the same rule is used in every slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub n_r: usize,
    pub n_theta: usize,
    pub margin: f64,
    pub eval_n_r: usize,
    pub eval_n_theta: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            n_r: 32,
            n_theta: 128,
            margin: 0.05,
            eval_n_r: 8,
            eval_n_theta: 16,
        }
    }
}

impl GridParams {
    pub fn scaled(&self, s: f64) -> GridParams {
        let f = |v: usize| ((v as f64 * s).round() as usize).max(4);
        GridParams {
            n_r: f(self.n_r),
            n_theta: ((self.n_theta as f64 * s).round() as usize).max(8),
            margin: self.margin,
            eval_n_r: self.eval_n_r,
            eval_n_theta: self.eval_n_theta,
        }
    }
}

/// Tensor quadrature over `Omega^n`: one quadrature rule and one evaluation
/// set per factor. Immutable after construction and safe to share.
#[derive(Debug, Clone)]
pub struct ProductGrid {
    pub dim: usize,
    pub quad: FactorGrid,
    pub eval: EvalSet,
}

impl ProductGrid {
    pub fn new(dim: usize, params: GridParams) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::DimensionMismatch(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        let quad = make_disc_grid(params.n_r, params.n_theta, params.margin)?;
        let eval = make_eval_set(params.eval_n_r, params.eval_n_theta, params.margin)?;
        Ok(ProductGrid { dim, quad, eval })
    }

    /// Number of points in the product evaluation set.
    pub fn eval_count(&self) -> usize {
        self.eval.len().pow(self.dim as u32)
    }

    /// Decode a flattened product-evaluation index into per-slot indices.
    pub fn eval_multi_index(&self, mut flat: usize) -> Vec<usize> {
        let m = self.eval.len();
        let mut idx = vec![0usize; self.dim];
        for slot in (0..self.dim).rev() {
            idx[slot] = flat % m;
            flat /= m;
        }
        idx
    }

    /// The product evaluation point for a flattened index (disc coordinates).
    pub fn eval_point(&self, flat: usize) -> Vec<Complex64> {
        self.eval_multi_index(flat)
            .into_iter()
            .map(|i| self.eval.points[i])
            .collect()
    }
}
