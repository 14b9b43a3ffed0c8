use nalgebra::{DMatrix, DVector};

use super::process::ProcessParams;
use crate::error::{invalid, Result};

const SYMPLECTIC_TOL: f64 = 1e-10;

/// Affine symplectic map `m ↦ S·m + δ`, `Σ ↦ S·Σ·Sᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
}

/// Standard symplectic form with 2×2 blocks `[[0, 1], [−1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

impl SymplecticOp {
    /// Validates `SᵀΩS = Ω` to 1e-10.
    pub fn new(matrix: DMatrix<f64>, displacement: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || dim % 2 != 0 || matrix.ncols() != dim || displacement.len() != dim {
            return Err(invalid("symplectic operation has inconsistent dimensions"));
        }
        let op = Self {
            matrix,
            displacement,
        };
        let err = op.symplectic_error();
        if err > SYMPLECTIC_TOL {
            return Err(invalid(format!(
                "matrix is not symplectic (error {err:.3e})"
            )));
        }
        Ok(op)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: DVector::zeros(2 * n_modes),
        }
    }

    /// Exchanges the two modes of a two-mode system.
    pub fn swap() -> Self {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = 1.0;
        m[(1, 3)] = 1.0;
        m[(2, 0)] = 1.0;
        m[(3, 1)] = 1.0;
        Self {
            matrix: m,
            displacement: DVector::zeros(4),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    /// `max |SᵀΩS − Ω|`.
    pub fn symplectic_error(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (self.matrix.transpose() * &omega * &self.matrix - omega)
            .abs()
            .max()
    }

    /// The map obtained by applying `self` first and `next` afterwards.
    pub fn then(&self, next: &SymplecticOp) -> Result<SymplecticOp> {
        if next.n_modes() != self.n_modes() {
            return Err(invalid(
                "cannot compose operations on different mode counts",
            ));
        }
        Ok(Self {
            matrix: &next.matrix * &self.matrix,
            displacement: &next.matrix * &self.displacement + &next.displacement,
        })
    }

    /// Lifts the operation to an `n_modes` system, acting on `modes` in order.
    pub(crate) fn embed(&self, n_modes: usize, modes: &[usize]) -> SymplecticOp {
        if n_modes == self.n_modes() && modes.iter().enumerate().all(|(i, &m)| i == m) {
            return self.clone();
        }
        let dim = 2 * n_modes;
        let mut matrix = DMatrix::identity(dim, dim);
        let mut displacement = DVector::zeros(dim);
        for (a, &ma) in modes.iter().enumerate() {
            for q in 0..2 {
                displacement[2 * ma + q] = self.displacement[2 * a + q];
                matrix[(2 * ma + q, 2 * ma + q)] = 0.0;
            }
        }
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        matrix[(2 * ma + qa, 2 * mb + qb)] = self.matrix[(2 * a + qa, 2 * b + qb)];
                    }
                }
            }
        }
        SymplecticOp {
            matrix,
            displacement,
        }
    }
}

/// Two-mode beam splitter of transmittance `t`:
/// `out₁ = √t·in₁ + √(1−t)·in₂`, `out₂ = −√(1−t)·in₁ + √t·in₂`,
/// identically on the x and p quadratures.
pub fn bs_symplectic(t: f64) -> Result<SymplecticOp> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("transmittance must be in [0, 1], got {t}")));
    }
    let a = t.sqrt();
    let b = (1.0 - t).sqrt();
    let mut m = DMatrix::zeros(4, 4);
    for q in 0..2 {
        m[(q, q)] = a;
        m[(q, 2 + q)] = b;
        m[(2 + q, q)] = -b;
        m[(2 + q, 2 + q)] = a;
    }
    Ok(SymplecticOp {
        matrix: m,
        displacement: DVector::zeros(4),
    })
}

/// Single-mode map of the process: `m ↦ R(Φ)·Sq(w, α)·m + d·(cos β, sin β)`.
pub fn process_symplectic(p: &ProcessParams) -> SymplecticOp {
    let lin = p.linear();
    let disp = p.displacement();
    SymplecticOp {
        matrix: DMatrix::from_column_slice(2, 2, lin.as_slice()),
        displacement: DVector::from_column_slice(disp.as_slice()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianState;

    fn mat4(rows: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
        rows
    }

    fn mul4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    #[test]
    fn bs_limits() {
        let id = bs_symplectic(1.0).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));
        let swap = bs_symplectic(0.0).unwrap();
        // (in₂, −in₁)
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(swap.matrix(), &expected);
        assert!(bs_symplectic(-0.1).is_err());
        assert!(bs_symplectic(1.5).is_err());
    }

    #[test]
    fn balanced_bs_twice() {
        // hand-written balanced splitter and its square
        let h = 0.5_f64.sqrt();
        let b = mat4([
            [h, 0.0, h, 0.0],
            [0.0, h, 0.0, h],
            [-h, 0.0, h, 0.0],
            [0.0, -h, 0.0, h],
        ]);
        let bb = mul4(&b, &b);
        // twice gives (in₂, −in₁): the second output carries −in₁ and the
        // first output carries in₂
        let expected = mat4([
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ]);
        let op = bs_symplectic(0.5).unwrap();
        let twice = op.then(&op).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((bb[i][j] - expected[i][j]).abs() < 1e-15);
                assert!((twice.matrix()[(i, j)] - bb[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn process_examples() {
        let id = process_symplectic(&ProcessParams::identity());
        assert_eq!(id, SymplecticOp::identity(1));

        let sq = process_symplectic(&ProcessParams::from_q(0.0, 2.0, 0.0, 0.0, 0.0).unwrap());
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!((sq.matrix() - expected).abs().max() < 1e-15);

        let p = ProcessParams::new(0.7, 0.0, 0.0, 4.0, 0.5).unwrap();
        let op = process_symplectic(&p);
        let (s, c) = (0.7_f64.sin(), 0.7_f64.cos());
        let expected = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((op.matrix() - expected).abs().max() < 1e-15);
        assert!((op.displacement()[0] - 4.0 * 0.5_f64.cos()).abs() < 1e-15);
        assert!((op.displacement()[1] - 4.0 * 0.5_f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn process_op_moves_moments() {
        let p = ProcessParams::from_q(0.7, 2.0, -0.3, 4.0, 0.5).unwrap();
        let s = GaussianState::coherent(3.0, 0.2).unwrap();
        let out = s.apply(&process_symplectic(&p), &[0]).unwrap();
        let lin = p.linear();
        let m = lin * s.mode_mean(0) + p.displacement();
        assert!((out.mode_mean(0) - m).abs().max() < 1e-12);
        assert!((out.mode_cov(0) - lin * lin.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn new_rejects_non_symplectic() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(SymplecticOp::new(m, DVector::zeros(2)).is_err());
        assert!(
            SymplecticOp::new(SymplecticOp::swap().matrix().clone(), DVector::zeros(4)).is_ok()
        );
    }

    #[test]
    fn embedding_single_mode_op() {
        let p = ProcessParams::new(0.4, 0.3, 0.1, 1.0, 0.0).unwrap();
        let op = process_symplectic(&p).embed(2, &[1]);
        assert!(op.symplectic_error() < 1e-12);
        assert_eq!(op.matrix()[(0, 0)], 1.0);
        assert_eq!(op.displacement()[2], 1.0);
        assert_eq!(op.displacement()[0], 0.0);
    }
}
