//! Random `l1`-regularized NSDP instances
//!
//! ```text
//! min  sum_i (d_i x_i^4 / 4 + c_i |x_i|^3 / 3) + x'Qx / 2 + b'x + ||x||_1
//! s.t. -A_0 - sum_i x_i A_i  negative semidefinite
//! ```
//!
//! with `Q = U Diag(a) U'`, `A_i = U_i Diag(a^i) U_i'` and `b = U Diag(abar) bbar`.
//!
//! Randomness comes from a single ChaCha20 stream seeded with
//! `ChaCha20Rng::seed_from_u64(seed)`, drawn in this order:
//!
//! 1. `U`: an `n x n` standard normal matrix, column by column, orthogonalized
//!    by QR with the diagonal of `R` made positive;
//! 2. `a`, `c`, `d`: for every coordinate one uniform `[0, 1)` draw decides
//!    membership (`< 0.2`), and members get a second uniform draw scaled to
//!    `(0, 100)`;
//! 3. `bbar`: `n` normal draws with mean 10 and standard deviation 1;
//! 4. for `i = 0..=n`: `U_i` (`m x m`, as for `U`) followed by `a^i`, which is
//!    uniform on `[10, 100]` entrywise for `i = 0` and sparse as in step 2 otherwise.
//!
//! The same `(n, m, seed)` reproduces the instance bit for bit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Normal, Open01, StandardNormal};
use smba_core::problem::instances::nsdp_problem;
use smba_core::problem::DCProblem;

use crate::error::{AppError, Result};
use crate::problem_file::{Family, ProblemFile};

const DENSITY: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct NsdpInstance {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: DVector<f64>,
    /// `A_0, ..., A_n`.
    pub a: Vec<DMatrix<f64>>,
}

pub fn generate_nsdp(n: usize, m: usize, seed: u64) -> Result<NsdpInstance> {
    if n == 0 || m == 0 {
        return Err(AppError::Invalid(format!(
            "instance dimensions must be positive, got n = {n}, m = {m}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let u = random_orthogonal(&mut rng, n);
    let a = sparse_vector(&mut rng, n);
    let c = sparse_vector(&mut rng, n);
    let d = sparse_vector(&mut rng, n);
    let normal = Normal::new(10.0, 1.0).expect("valid normal parameters");
    let bbar = DVector::from_fn(n, |_, _| rng.sample(normal));

    let mut mats = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let ui = random_orthogonal(&mut rng, m);
        let ai = if i == 0 {
            DVector::from_fn(m, |_, _| rng.random_range(10.0..=100.0))
        } else {
            sparse_vector(&mut rng, m)
        };
        mats.push(congruence(&ui, &ai));
    }

    let q = congruence(&u, &a);
    let support = a.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
    let b = &u * bbar.component_mul(&support);
    Ok(NsdpInstance {
        n,
        m,
        seed,
        q,
        b,
        c,
        d,
        a: mats,
    })
}

/// `U Diag(w) U'`, symmetrized exactly.
fn congruence(u: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let scaled = u * DMatrix::from_diagonal(w);
    let m = scaled * u.transpose();
    (&m + m.transpose()) * 0.5
}

fn random_orthogonal(rng: &mut ChaCha20Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn sparse_vector(rng: &mut ChaCha20Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        if rng.random::<f64>() < DENSITY {
            100.0 * rng.sample::<f64, _>(Open01)
        } else {
            0.0
        }
    })
}

impl NsdpInstance {
    pub fn to_problem(&self) -> Result<DCProblem> {
        Ok(nsdp_problem(
            self.q.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            &self.a,
            1.0,
        )?)
    }

    pub fn to_file(&self) -> ProblemFile {
        let row_major = |mat: &DMatrix<f64>| mat.transpose().as_slice().to_vec();
        ProblemFile {
            family: Family::Psd,
            n: self.n,
            m: self.m,
            p: None,
            q: row_major(&self.q),
            b: self.b.as_slice().to_vec(),
            c: self.c.as_slice().to_vec(),
            d: self.d.as_slice().to_vec(),
            a: self.a.iter().map(row_major).collect(),
            l1_weight: 1.0,
            alpha4: None,
            x0: None,
            seed: Some(self.seed),
        }
    }
}
