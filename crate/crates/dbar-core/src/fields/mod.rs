//! Scalar fields and (0,1)-forms on `Omega^n`.
//!
//! A [`ScalarField`] is carried in one of three representations: a finite
//! monomial expansion (exact arithmetic, preferred interchange format), grid
//! samples over the product evaluation lattice (solver output), or an
//! analytic closure (non-polynomial experiment presets, which must be
//! resampled on arbitrary mixed quadrature grids and therefore cannot live as
//! fixed samples).

pub mod expr;
pub mod mollify;
pub mod monomial;
pub mod tensor;

pub use expr::parse_expression;
pub use mollify::dilate_mollify;
pub use monomial::MonomialField;
pub use tensor::{CMatrix, Tensor};

use crate::geometry::{EvalSet, ProductGrid};
use crate::{Complex64, Error, Result};
use std::fmt;
use std::sync::Arc;

/// A field given by a closure; used for non-polynomial presets.
#[derive(Clone)]
pub struct AnalyticField {
    pub dim: usize,
    pub f: Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticField(dim={})", self.dim)
    }
}

/// Samples over the product evaluation lattice (one polar eval set per slot).
#[derive(Debug, Clone)]
pub struct GridSamplesField {
    pub dim: usize,
    pub axes: Arc<EvalSet>,
    pub tensor: Tensor,
}

/// An n-variate complex scalar field.
#[derive(Debug, Clone)]
pub enum ScalarField {
    Monomials(MonomialField),
    Grid(GridSamplesField),
    Analytic(AnalyticField),
}

impl ScalarField {
    pub fn dim(&self) -> usize {
        match self {
            ScalarField::Monomials(m) => m.dim(),
            ScalarField::Grid(g) => g.dim,
            ScalarField::Analytic(a) => a.dim,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScalarField::Monomials(_) => "monomials",
            ScalarField::Grid(_) => "grid",
            ScalarField::Analytic(_) => "analytic",
        }
    }

    /// Pointwise evaluation; grid samples cannot be evaluated off-lattice.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            ScalarField::Monomials(m) => Ok(m.eval(z)),
            ScalarField::Analytic(a) => Ok((a.f)(z)),
            ScalarField::Grid(_) => Err(Error::Representation(
                "grid samples cannot be evaluated at arbitrary points".into(),
            )),
        }
    }

    pub fn from_fn(
        dim: usize,
        f: impl Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        ScalarField::Analytic(AnalyticField { dim, f: Arc::new(f) })
    }
}

/// The datum `f = sum_j f_j dzbar_j`.
#[derive(Debug, Clone)]
pub struct OneForm {
    pub dim: usize,
    pub comps: Vec<ScalarField>,
}

impl OneForm {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::DimensionMismatch("one-form needs components".into()));
        }
        let dim = comps.len();
        for c in &comps {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "component dimension {} != component count {dim}",
                    c.dim()
                )));
            }
        }
        let kind = comps[0].kind();
        if comps.iter().any(|c| c.kind() != kind) {
            return Err(Error::Representation(
                "all one-form components must share a representation kind".into(),
            ));
        }
        Ok(OneForm { dim, comps })
    }

    pub fn from_monomials(comps: Vec<MonomialField>) -> Result<Self> {
        Self::new(comps.into_iter().map(ScalarField::Monomials).collect())
    }

    pub fn monomials(&self) -> Option<Vec<&MonomialField>> {
        self.comps
            .iter()
            .map(|c| match c {
                ScalarField::Monomials(m) => Some(m),
                _ => None,
            })
            .collect()
    }
}

/// Apply `dbar` to a scalar field, returning the (0,1)-form of all
/// `d/dzbar_j` derivatives. Exact on monomial expansions; spectral (angular
/// Fourier modes plus barycentric radial differentiation) on polar grid
/// samples.
pub fn dbar_apply(u: &ScalarField) -> Result<OneForm> {
    match u {
        ScalarField::Monomials(m) => {
            let comps = (0..m.dim()).map(|j| ScalarField::Monomials(m.dbar(j))).collect();
            OneForm::new(comps)
        }
        ScalarField::Grid(g) => {
            let d = dbar_matrix(&g.axes);
            let comps = (0..g.dim)
                .map(|j| {
                    ScalarField::Grid(GridSamplesField {
                        dim: g.dim,
                        axes: g.axes.clone(),
                        tensor: g.tensor.apply_axis(j, &d),
                    })
                })
                .collect();
            OneForm::new(comps)
        }
        ScalarField::Analytic(_) => Err(Error::Representation(
            "dbar needs a monomial expansion or polar grid samples".into(),
        )),
    }
}

/// Spectral `d/dzbar` matrix on one polar evaluation lattice:
/// `dzbar = e^{i theta}/2 (d_r + (i/r) d_theta)` with the angular derivative
/// taken in Fourier modes and the radial one through the barycentric
/// differentiation matrix on the Gauss-Legendre radii.
pub fn dbar_matrix(axes: &EvalSet) -> CMatrix {
    let nr = axes.n_r;
    let nt = axes.n_theta;
    let n = nr * nt;
    let dr = barycentric_diff(&axes.radii);
    let dth = angular_diff(nt);
    let mut m = CMatrix::zeros(n, n);
    for ir in 0..nr {
        for it in 0..nt {
            let row = ir * nt + it;
            let z = axes.points[row];
            let phase = Complex64::from_polar(0.5, z.arg());
            // radial part: couples ir' at the same angle
            for ir2 in 0..nr {
                let v = phase * dr[ir * nr + ir2];
                let col = ir2 * nt + it;
                m.set(row, col, m.get(row, col) + v);
            }
            // angular part: couples it' at the same radius
            let coef = phase * Complex64::new(0.0, 1.0) / axes.radii[ir];
            for it2 in 0..nt {
                let v = coef * dth.get(it, it2);
                let col = ir * nt + it2;
                m.set(row, col, m.get(row, col) + v);
            }
        }
    }
    m
}

/// Barycentric differentiation matrix on arbitrary distinct nodes.
fn barycentric_diff(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![1.0f64; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= x[j] - x[k];
            }
        }
    }
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Spectral angular differentiation matrix for a uniform grid (any phase
/// offset; the offset cancels in the mode representation).
fn angular_diff(nt: usize) -> CMatrix {
    let mut m = CMatrix::zeros(nt, nt);
    // D = F^{-1} diag(i m) F with modes m in [-nt/2, nt/2), Nyquist zeroed
    for j in 0..nt {
        for jp in 0..nt {
            let mut acc = Complex64::new(0.0, 0.0);
            for mm in 0..nt {
                let m_signed = if mm <= nt / 2 { mm as i64 } else { mm as i64 - nt as i64 };
                if nt % 2 == 0 && mm == nt / 2 {
                    continue; // Nyquist derivative dropped
                }
                let ang = 2.0 * std::f64::consts::PI * (m_signed as f64) * (j as f64 - jp as f64)
                    / nt as f64;
                acc += Complex64::new(0.0, m_signed as f64) * Complex64::from_polar(1.0, ang);
            }
            m.set(j, jp, acc / nt as f64);
        }
    }
    m
}

/// Sample a monomial or analytic field on the product evaluation lattice.
pub fn sample_on_eval(f: &ScalarField, grid: &ProductGrid) -> Result<GridSamplesField> {
    let dim = grid.dim;
    if f.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "field dimension {} vs grid dimension {dim}",
            f.dim()
        )));
    }
    let m = grid.eval.len();
    let pts = grid.eval.points.clone();
    let tensor = match f {
        ScalarField::Grid(g) => g.tensor.clone(),
        _ => Tensor::from_fn(vec![m; dim], |idx| {
            let z: Vec<Complex64> = idx.iter().map(|&i| pts[i]).collect();
            f.eval(&z).expect("evaluable field")
        }),
    };
    Ok(GridSamplesField {
        dim,
        axes: Arc::new(grid.eval.clone()),
        tensor,
    })
}

/// Max over slot pairs and evaluation points of
/// `|df_i/dzbar_j - df_j/dzbar_i|`: zero exactly when `f` is dbar-closed.
pub fn dbar_closed_check(f: &OneForm, grid: &ProductGrid) -> Result<f64> {
    if f.dim < 2 {
        return Ok(0.0);
    }
    if f.dim != grid.dim {
        return Err(Error::DimensionMismatch(
            "form and grid dimensions differ".into(),
        ));
    }
    // cross derivatives per representation
    let cross = |comp: &ScalarField, slot: usize| -> Result<Tensor> {
        match comp {
            ScalarField::Monomials(m) => {
                let d = m.dbar(slot);
                Ok(sample_on_eval(&ScalarField::Monomials(d), grid)?.tensor)
            }
            _ => {
                let g = sample_on_eval(comp, grid)?;
                let dm = dbar_matrix(&g.axes);
                Ok(g.tensor.apply_axis(slot, &dm))
            }
        }
    };
    let mut worst: f64 = 0.0;
    for i in 0..f.dim {
        for j in (i + 1)..f.dim {
            let dij = cross(&f.comps[i], j)?;
            let dji = cross(&f.comps[j], i)?;
            worst = worst.max(dij.sub(&dji).sup_norm());
        }
    }
    Ok(worst)
}

/// Weight data for the weighted sup-norm estimates: exponent `alpha` applied
/// to the boundary distance of one slot.
#[derive(Debug, Clone, Copy)]
pub struct WeightSpec {
    pub alpha: f64,
}

impl WeightSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must lie in [0,1), got {alpha}"
            )));
        }
        Ok(WeightSpec { alpha })
    }

    /// `d_Omega(z)^alpha` for an interior point.
    pub fn weight(&self, domain: &crate::geometry::DomainSpec, z: Complex64) -> f64 {
        domain.boundary_distance(z).max(0.0).powf(self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GridParams, ProductGrid};

    fn grid2() -> ProductGrid {
        ProductGrid::new(
            2,
            GridParams {
                n_r: 8,
                n_theta: 16,
                margin: 0.05,
                eval_n_r: 8,
                eval_n_theta: 16,
                ..GridParams::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn closed_check_examples() {
        let g = grid2();
        // f = (zbar2, zbar1) is closed
        let f = OneForm::from_monomials(vec![
            MonomialField::coordinate(2, 1, true),
            MonomialField::coordinate(2, 0, true),
        ])
        .unwrap();
        assert!(dbar_closed_check(&f, &g).unwrap() < 1e-13);

        // f = (zbar2, 0): residual exactly 1
        let f2 = OneForm::from_monomials(vec![
            MonomialField::coordinate(2, 1, true),
            MonomialField::zero(2),
        ])
        .unwrap();
        let r = dbar_closed_check(&f2, &g).unwrap();
        assert!((r - 1.0).abs() < 1e-12);

        // holomorphic Kerzman-type coefficients: closed
        let f3 = OneForm::from_monomials(vec![
            MonomialField::coordinate(2, 1, false).pow(3),
            MonomialField::coordinate(2, 0, false).pow(2),
        ])
        .unwrap();
        assert!(dbar_closed_check(&f3, &g).unwrap() < 1e-13);
    }

    #[test]
    fn grid_dbar_matches_monomial_dbar() {
        let g = grid2();
        // u = z1^2 zbar1 + z2 zbar2^3 as grid samples
        let z1 = MonomialField::coordinate(2, 0, false);
        let zb1 = MonomialField::coordinate(2, 0, true);
        let z2 = MonomialField::coordinate(2, 1, false);
        let zb2 = MonomialField::coordinate(2, 1, true);
        let u = z1.pow(2).mul(&zb1).add(&z2.mul(&zb2.pow(3)));
        let ug = sample_on_eval(&ScalarField::Monomials(u.clone()), &g).unwrap();

        let grid_form = dbar_apply(&ScalarField::Grid(ug)).unwrap();
        for j in 0..2 {
            let exact = sample_on_eval(&ScalarField::Monomials(u.dbar(j)), &g).unwrap();
            match &grid_form.comps[j] {
                ScalarField::Grid(gf) => {
                    let err = gf.tensor.sub(&exact.tensor).sup_norm();
                    assert!(err < 1e-9, "spectral dbar error in slot {j}: {err}");
                }
                _ => panic!("expected grid output"),
            }
        }
    }

    #[test]
    fn monomial_grid_round_trip() {
        // evaluation of a monomial expansion at grid points equals its
        // grid-samples conversion
        let g = grid2();
        let f = MonomialField::coordinate(2, 0, false)
            .pow(2)
            .mul(&MonomialField::coordinate(2, 1, true));
        let gs = sample_on_eval(&ScalarField::Monomials(f.clone()), &g).unwrap();
        let m = g.eval.len();
        for flat in [0usize, 7, 63, m * m - 1] {
            let (i, j) = (flat / m, flat % m);
            let z = [g.eval.points[i], g.eval.points[j]];
            assert!((gs.tensor.get(&[i, j]) - f.eval(&z)).norm() < 1e-12);
        }
    }

    #[test]
    fn weight_spec_validation() {
        assert!(WeightSpec::new(1.0).is_err());
        assert!(WeightSpec::new(-0.1).is_err());
        let w = WeightSpec::new(0.5).unwrap();
        let d = crate::geometry::DomainSpec::UnitDisc;
        let v = w.weight(&d, Complex64::new(0.0, 0.0));
        assert!((v - 1.0).abs() < 1e-15);
    }
}
