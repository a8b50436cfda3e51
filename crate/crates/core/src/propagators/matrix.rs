use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::numerics::{jacobi_eigh, DenseMatrix, SymmetricEigen};

use super::sampled::{SchemeKind, SplitOrder, SplitScheme};

const PSD_FLOOR: f64 = -1e-10;
const MAX_DRAWS: usize = 10;

/// Two symmetric positive semidefinite matrices with cached spectra.
///
/// In product formulas `a` plays the kinetic part and `b` the potential.
#[derive(Debug, Clone)]
pub struct MatrixPair {
    a: DenseMatrix,
    b: DenseMatrix,
    eig_a: SymmetricEigen,
    eig_b: SymmetricEigen,
    eig_h: SymmetricEigen,
}

impl MatrixPair {
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
            return invalid(format!(
                "pair needs square matrices of equal size, got {}x{} and {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ));
        }
        let eig_a = jacobi_eigh(&a)?;
        let eig_b = jacobi_eigh(&b)?;
        for (name, eig) in [("A", &eig_a), ("B", &eig_b)] {
            if let Some(&min) = eig.values.first() {
                if min < PSD_FLOOR {
                    return invalid(format!("{name} is not positive semidefinite (eigenvalue {min:e})"));
                }
            }
        }
        let eig_h = jacobi_eigh(&a.add(&b)?.symmetrized())?;
        Ok(Self { a, b, eig_a, eig_b, eig_h })
    }

    /// `A = diag(1, 0)`, `B = [[1, 1], [1, 1]]`.
    pub fn fixed() -> Self {
        let a = DenseMatrix::diagonal(&[1.0, 0.0]);
        let b = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).expect("2x2");
        Self::new(a, b).expect("fixed pair is PSD")
    }

    /// Wishart-type pair `GGᵀ/dim` with Gaussian `G`, drawn from `seed`.
    pub fn random(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut last = None;
        for _ in 0..MAX_DRAWS {
            let mut draw = || {
                let data = (0..dim * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let g = DenseMatrix::new(dim, dim, data).expect("sized");
                g.matmul(&g.transpose()).expect("square").scaled(1.0 / dim as f64).symmetrized()
            };
            let a = draw();
            let b = draw();
            match Self::new(a, b) {
                Ok(p) => return Ok(p),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::Precondition("no PSD pair drawn".into())))
    }

    /// Commuting pair of nonnegative diagonal matrices.
    pub fn commuting(dim: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let da: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..2.0)).collect();
        let db: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..2.0)).collect();
        Self::new(DenseMatrix::diagonal(&da), DenseMatrix::diagonal(&db))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(DenseMatrix::zeros(dim, dim), DenseMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    /// Spectral decomposition of `H = A + B`.
    pub fn h_eigen(&self) -> &SymmetricEigen {
        &self.eig_h
    }

    pub fn exp_a(&self, s: f64) -> DenseMatrix {
        self.eig_a.map(|l| (-s * l).exp())
    }

    pub fn exp_b(&self, s: f64) -> DenseMatrix {
        self.eig_b.map(|l| (-s * l).exp())
    }

    /// `e^{−t(A+B)}`
    pub fn semigroup(&self, t: f64) -> DenseMatrix {
        self.eig_h.map(|l| (-t * l).exp())
    }

    /// `‖AB − BA‖_max`
    pub fn commutator_defect(&self) -> f64 {
        let ab = self.a.matmul(&self.b).expect("square");
        let ba = self.b.matmul(&self.a).expect("square");
        ab.sub(&ba).expect("square").max_abs()
    }
}

/// `m^n` by binary exponentiation.
pub fn matrix_power(m: &DenseMatrix, n: u32) -> Result<DenseMatrix> {
    if !m.is_square() {
        return invalid("matrix power needs a square matrix");
    }
    let mut result = DenseMatrix::identity(m.rows());
    let mut base = m.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.matmul(&base)?;
        }
        e >>= 1;
        if e > 0 {
            base = base.matmul(&base)?;
        }
    }
    Ok(result)
}

/// n-step product formula for `e^{−t(A+B)}` with `A` kinetic and `B` potential.
pub fn matrix_product_formula(pair: &MatrixPair, t: f64, n: u32, scheme: SplitScheme) -> Result<DenseMatrix> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("time must be positive, got {t}"));
    }
    if n == 0 {
        return invalid("step count must be at least 1");
    }
    let tau = t / f64::from(n);
    let step = match (scheme.kind, scheme.outer) {
        (SchemeKind::Symmetric, SplitOrder::Potential) => {
            let h = pair.exp_b(0.5 * tau);
            h.matmul(&pair.exp_a(tau))?.matmul(&h)?
        }
        (SchemeKind::Symmetric, SplitOrder::Kinetic) => {
            let h = pair.exp_a(0.5 * tau);
            h.matmul(&pair.exp_b(tau))?.matmul(&h)?
        }
        (SchemeKind::Nonsymmetric, SplitOrder::Kinetic) => pair.exp_a(tau).matmul(&pair.exp_b(tau))?,
        (SchemeKind::Nonsymmetric, SplitOrder::Potential) => pair.exp_b(tau).matmul(&pair.exp_a(tau))?,
    };
    matrix_power(&step, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::spectral_norm;

    #[test]
    fn commuting_pair_is_exact() {
        let pair = MatrixPair::commuting(5, 1).unwrap();
        let exact = pair.semigroup(1.3);
        for scheme in [
            SplitScheme::SYMMETRIC_POTENTIAL,
            SplitScheme::SYMMETRIC_KINETIC,
            SplitScheme::new(SchemeKind::Nonsymmetric, SplitOrder::Kinetic),
        ] {
            for n in [1, 3, 16] {
                let p = matrix_product_formula(&pair, 1.3, n, scheme).unwrap();
                assert!(p.sub(&exact).unwrap().max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let a = DenseMatrix::diagonal(&[1.0, -0.5]);
        assert!(MatrixPair::new(a, DenseMatrix::identity(2)).is_err());
        let b = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(MatrixPair::new(DenseMatrix::identity(2), b).is_err());
        assert!(MatrixPair::new(DenseMatrix::identity(2), DenseMatrix::identity(3)).is_err());
    }

    #[test]
    fn random_pair_is_seeded() {
        let p = MatrixPair::random(6, 42).unwrap();
        let q = MatrixPair::random(6, 42).unwrap();
        assert_eq!(p.a(), q.a());
        assert!(p.commutator_defect() > 1e-3);
        assert!(p.h_eigen().values[0] >= -1e-10);
    }

    #[test]
    fn symmetric_single_step_error_is_cubic_in_t() {
        let pair = MatrixPair::fixed();
        let err = |t: f64| {
            let p = matrix_product_formula(&pair, t, 1, SplitScheme::SYMMETRIC_POTENTIAL).unwrap();
            spectral_norm(&p.sub(&pair.semigroup(t)).unwrap()).unwrap()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 8.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn power_by_squaring() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(matrix_power(&m, 5).unwrap()[(0, 1)], 5.0);
        assert_eq!(matrix_power(&m, 0).unwrap(), DenseMatrix::identity(2));
    }
}
