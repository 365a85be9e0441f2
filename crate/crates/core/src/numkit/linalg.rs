//! Dense Hermitian matrices and a cyclic complex Jacobi eigensolver.

use std::ops::Index;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 30;
const OFF_DIAG_REL_TOL: f64 = 1e-13;

/// Row-major `dim × dim` complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianMatrix {
    /// Validates `m[i][j] = conj(m[j][i])` within 1e-12 (scaled by the
    /// largest entry when that exceeds one). The stored matrix is the exact
    /// Hermitian part, so downstream code never sees the residue.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Contract(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Contract("matrix entries must be finite".into()));
        }
        let scale = entries.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let mut sym = entries.clone();
        for i in 0..dim {
            for j in i..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i].conj();
                if (a - b).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::Contract(format!(
                        "matrix is not Hermitian at ({i}, {j}): {a} vs conj {b}"
                    )));
                }
                let avg = (a + b) * 0.5;
                sym[i * dim + j] = avg;
                sym[j * dim + i] = avg.conj();
            }
        }
        Ok(HermitianMatrix { dim, entries: sym })
    }

    /// Builds from separate real and imaginary row-major parts.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Contract("real and imaginary parts differ in length".into()));
        }
        Self::new(dim, re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect())
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = C64::new(d, 0.0);
        }
        HermitianMatrix { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self + s·other`, which stays Hermitian for real `s`.
    pub fn add_scaled(&self, s: f64, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim != other.dim {
            return Err(Error::Contract("dimension mismatch".into()));
        }
        Ok(HermitianMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b * s).collect(),
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// True when every entry has zero imaginary part (real symmetric).
    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

/// Eigen-decomposition with eigenvalues ascending and `vectors[k]` the
/// normalized eigenvector belonging to `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub sweeps: usize,
}

/// Cyclic Jacobi with unitary 2×2 rotations.
///
/// Each rotation first removes the phase of `a_pq` and then applies the
/// classic real Jacobi rotation to the resulting real symmetric block.
/// Converges when the off-diagonal Frobenius norm drops to `1e-13·‖m‖_F`;
/// gives up after 30 sweeps.
pub fn hermitian_eig(m: &HermitianMatrix) -> Result<Eigen> {
    let n = m.dim;
    let mut a = m.entries.clone();
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    let norm = m.frobenius_norm();
    let off_norm = |a: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= OFF_DIAG_REL_TOL * norm {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off, norm });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                // A <- J^† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * jpp + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = order.iter().map(|&col| (0..n).map(|row| v[row * n + col]).collect()).collect();
    Ok(Eigen { values, vectors, sweeps })
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn check_decomposition(m: &HermitianMatrix, e: &Eigen) {
        let n = m.dim();
        let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for (k, vk) in e.vectors.iter().enumerate() {
            let mv = m.apply(vk);
            let resid: f64 = mv.iter().zip(vk).map(|(a, b)| (a - b * e.values[k]).norm_sqr()).sum::<f64>().sqrt();
            assert!(resid <= 1e-10 * scale, "residual {resid}");
            for (l, vl) in e.vectors.iter().enumerate() {
                let expect = if k == l { 1.0 } else { 0.0 };
                assert!((inner(vk, vl) - expect).norm() <= 1e-10);
            }
        }
        let mut recon = vec![c(0.0, 0.0); n * n];
        for (lam, vk) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                for j in 0..n {
                    recon[i * n + j] += vk[i] * vk[j].conj() * *lam;
                }
            }
        }
        let err: f64 = recon.iter().zip(m.entries()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-9 * scale, "reconstruction error {err}");
    }

    #[test]
    fn diagonal_input() {
        let m = HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn two_state_matrix() {
        // [[μ-δ, x], [x, μ+δ]] with μ=0, δ=1, x=0.5 → ∓√(1.25)
        let m = HermitianMatrix::new(2, vec![c(-1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]).unwrap();
        let e = hermitian_eig(&m).unwrap();
        assert!((e.values[0] + 1.118_033_988_749_895).abs() < 1e-12);
        assert!((e.values[1] - 1.118_033_988_749_895).abs() < 1e-12);
        check_decomposition(&m, &e);
    }

    #[test]
    fn identity_is_degenerate() {
        let m = HermitianMatrix::from_real_diagonal(&[1.0; 4]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        check_decomposition(&m, &e);
    }

    #[test]
    fn complex_pauli_y() {
        let m = HermitianMatrix::new(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let e = hermitian_eig(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        check_decomposition(&m, &e);
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(HermitianMatrix::new(2, vec![c(0.0, 1.0); 3]).is_err());
    }

    fn hermitian_strategy() -> impl Strategy<Value = HermitianMatrix> {
        (1usize..=16).prop_flat_map(|n| {
            proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64), n * n).prop_map(move |raw| {
                let mut e = vec![c(0.0, 0.0); n * n];
                for i in 0..n {
                    for j in 0..n {
                        let a = c(raw[i * n + j].0, raw[i * n + j].1);
                        let b = c(raw[j * n + i].0, raw[j * n + i].1);
                        e[i * n + j] = (a + b.conj()) * 0.5;
                    }
                }
                HermitianMatrix::new(n, e).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_hermitian(m in hermitian_strategy()) {
            let e = hermitian_eig(&m).unwrap();
            check_decomposition(&m, &e);
        }
    }

    #[test]
    fn dimension_64() {
        let n = 64;
        let mut e = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let x = ((i * 31 + j * 17) % 13) as f64 - 6.0;
                let y = ((i * 7 + j * 3) % 11) as f64 - 5.0;
                e[i * n + j] += c(x, y) * 0.5;
                e[j * n + i] += c(x, -y) * 0.5;
            }
        }
        let m = HermitianMatrix::new(n, e).unwrap();
        let eig = hermitian_eig(&m).unwrap();
        check_decomposition(&m, &eig);
    }
}
