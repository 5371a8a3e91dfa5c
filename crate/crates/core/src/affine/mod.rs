//! Affine sl2 at level ℓ: Verma and Fock truncations, Heisenberg
//! exponentials, Z- and ψ-operators, vacuum spaces and the E(U) functor.

pub mod eu;
pub mod fock;
pub mod heisenberg;
pub mod lincomb;
pub mod omega;
pub mod psi;
pub mod verma;
pub mod zops;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::scalars::{int, q_to_rat, Rational, Q};

pub use lincomb::LinComb;

/// Index of a basis element of the finite-dimensional Lie algebra.
pub type Letter = usize;

/// Structure data of a finite-dimensional Lie algebra with an invariant
/// form and a root grading, plus the level of the affinization.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineData {
    pub names: Vec<String>,
    /// `bracket[x][y] = Σ c_z z`.
    pub bracket: Vec<Vec<Vec<(Letter, Rational)>>>,
    pub form: Vec<Vec<Rational>>,
    /// Root of each basis element as a multiple of the simple root.
    pub root: Vec<i64>,
    /// The Cartan element `h` with `h(0)` acting by `2·root`.
    pub cartan: Letter,
    pub level: Q,
}

pub const E: Letter = 0;
pub const H: Letter = 1;
pub const F: Letter = 2;

impl AffineData {
    /// sl2 in the basis `{e, h, f}` with `⟨e,f⟩ = 1`, `⟨h,h⟩ = 2`.
    pub fn sl2(level: Q) -> Result<Self> {
        if level.is_zero() {
            return Err(Error::InvalidLevel(crate::scalars::fmt_q(&level)));
        }
        let mut bracket = vec![vec![Vec::new(); 3]; 3];
        bracket[E][F] = vec![(H, int(1))];
        bracket[F][E] = vec![(H, int(-1))];
        bracket[H][E] = vec![(E, int(2))];
        bracket[E][H] = vec![(E, int(-2))];
        bracket[H][F] = vec![(F, int(-2))];
        bracket[F][H] = vec![(F, int(2))];
        let mut form = vec![vec![Rational::zero(); 3]; 3];
        form[E][F] = int(1);
        form[F][E] = int(1);
        form[H][H] = int(2);
        Ok(AffineData {
            names: vec!["e".into(), "h".into(), "f".into()],
            bracket,
            form,
            root: vec![1, 0, -1],
            cartan: H,
            level,
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn level_rat(&self) -> Rational {
        q_to_rat(&self.level)
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name)
    }

    /// Same data with `bracket[x][y]` coefficient of `z` replaced (and the
    /// antisymmetric partner left untouched).
    pub fn with_structure_fault(&self, x: Letter, y: Letter, z: Letter, value: Rational) -> Self {
        let mut d = self.clone();
        let entry = &mut d.bracket[x][y];
        entry.retain(|(w, _)| *w != z);
        if !value.is_zero() {
            entry.push((z, value));
        }
        d
    }

    pub fn with_form_fault(&self, x: Letter, y: Letter, value: Rational) -> Self {
        let mut d = self.clone();
        d.form[x][y] = value;
        d
    }

    fn bracket_vec(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            for j in 0..n {
                if x[i].is_zero() || y[j].is_zero() {
                    continue;
                }
                for (z, c) in &self.bracket[i][j] {
                    out[*z] += &x[i] * &y[j] * c;
                }
            }
        }
        out
    }

    fn form_vec(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += &x[i] * &y[j] * &self.form[i][j];
            }
        }
        acc
    }

    fn unit(&self, i: Letter) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        v[i] = int(1);
        v
    }

    /// Antisymmetry, Jacobi identity and invariance of the form on basis
    /// elements.
    pub fn check_invariants(&self) -> CheckReport {
        let n = self.dim();
        let mut rep = CheckReport::new("affine.lie_algebra", format!("dim={n}"));
        let name = |i: usize| self.names[i].clone();
        for x in 0..n {
            for y in 0..n {
                let (ux, uy) = (self.unit(x), self.unit(y));
                let xy = self.bracket_vec(&ux, &uy);
                let yx = self.bracket_vec(&uy, &ux);
                rep.checked += 1;
                if xy.iter().zip(&yx).any(|(a, b)| a != &-b) {
                    rep.fail(format!("antisymmetry [{} , {}]", name(x), name(y)));
                }
                if self.form[x][y] != self.form[y][x] {
                    rep.fail(format!("form symmetry <{}, {}>", name(x), name(y)));
                }
                for z in 0..n {
                    let uz = self.unit(z);
                    let a = self.bracket_vec(&ux, &self.bracket_vec(&uy, &uz));
                    let b = self.bracket_vec(&uy, &self.bracket_vec(&uz, &ux));
                    let c = self.bracket_vec(&uz, &self.bracket_vec(&ux, &uy));
                    rep.checked += 2;
                    if (0..n).any(|i| !(&a[i] + &b[i] + &c[i]).is_zero()) {
                        rep.fail(format!("Jacobi on ({}, {}, {})", name(x), name(y), name(z)));
                    }
                    if self.form_vec(&xy, &uz) != self.form_vec(&ux, &self.bracket_vec(&uy, &uz)) {
                        rep.fail(format!(
                            "invariance <[{}, {}], {}>",
                            name(x),
                            name(y),
                            name(z)
                        ));
                    }
                }
            }
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::qi;

    #[test]
    fn sl2_invariants() {
        let d = AffineData::sl2(qi(3)).unwrap();
        assert!(d.check_invariants().passed);
        assert!(matches!(
            AffineData::sl2(qi(0)),
            Err(Error::InvalidLevel(_))
        ));
    }

    #[test]
    fn structure_fault_breaks_invariants() {
        let d = AffineData::sl2(qi(3))
            .unwrap()
            .with_structure_fault(H, E, E, int(3));
        assert!(!d.check_invariants().passed);
    }
}
