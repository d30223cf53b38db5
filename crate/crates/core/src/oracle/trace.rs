//! Two-spin density matrices and projector traces.
//!
//! Spin `1` acts on the left tensor factor, spin `2` on the right. Photon
//! polarization angles enter through projector axes with doubled angles,
//! `x(θ) = (cos 2θ, sin 2θ, 0)`, so that `x(a)·x(b) = cos 2(a − b)`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use super::{JointDistribution16, OracleModel};
use crate::model::{Settings, SpinValue};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `[σx, σy, σz]`
pub fn pauli() -> [Matrix2<C>; 3] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

fn on_first(m: &Matrix2<C>) -> Matrix4<C> {
    let mut out = Matrix4::zeros();
    for r in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                out[(2 * r + j, 2 * k + j)] = m[(r, k)];
            }
        }
    }
    out
}

fn on_second(m: &Matrix2<C>) -> Matrix4<C> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for r in 0..2 {
            for k in 0..2 {
                out[(2 * i + r, 2 * i + k)] = m[(r, k)];
            }
        }
    }
    out
}

/// `σ1·σ2 = Σ_k σ1^k σ2^k`
pub fn sigma_dot_sigma() -> Matrix4<C> {
    pauli()
        .iter()
        .map(|p| on_first(p) * on_second(p))
        .fold(Matrix4::zeros(), |acc, m| acc + m)
}

/// A 4×4 complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix4(Matrix4<C>);

impl HermitianMatrix4 {
    /// `None` if `m` is not Hermitian within `1e−12`.
    pub fn new(m: Matrix4<C>) -> Option<Self> {
        let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        (dev <= 1e-12).then_some(HermitianMatrix4(m))
    }

    pub fn matrix(&self) -> &Matrix4<C> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = self.0.symmetric_eigen();
        let mut v: [f64; 4] = std::array::from_fn(|i| eig.eigenvalues[i]);
        v.sort_by(f64::total_cmp);
        v
    }

    /// Positive semidefinite (to `−1e−12`) with unit trace.
    pub fn is_density(&self) -> bool {
        (self.trace() - 1.0).abs() <= 1e-12 && self.eigenvalues().iter().all(|&l| l >= -1e-12)
    }
}

/// `(𝟙 − q σ1·σ2) / 4`
pub fn rho_q(q: f64) -> HermitianMatrix4 {
    let m = (Matrix4::identity() - sigma_dot_sigma() * c(q, 0.0)) * c(0.25, 0.0);
    HermitianMatrix4::new(m).expect("isotropic two-spin operator is Hermitian")
}

/// The singlet state.
pub fn singlet() -> HermitianMatrix4 {
    rho_q(1.0)
}

pub fn rho_q_eigenvalues(q: f64) -> [f64; 4] {
    rho_q(q).eigenvalues()
}

/// Whether `(𝟙 − q σ1·σ2)/4` is a valid density matrix; true exactly for
/// `−1/3 ≤ q ≤ 1`.
pub fn rho_q_is_density(q: f64) -> bool {
    rho_q(q).is_density()
}

/// Projector `(𝟙 + S σ·x)/2` onto outcome `S` along the photon axis at angle
/// `theta`, as a 2×2 matrix.
pub fn projector(s: SpinValue, theta: f64) -> Matrix2<C> {
    let [sx, sy, _] = pauli();
    let axis = sx * c((2.0 * theta).cos(), 0.0) + sy * c((2.0 * theta).sin(), 0.0);
    (Matrix2::identity() + axis * c(s.value() as f64, 0.0)) * c(0.5, 0.0)
}

/// `Tr[ρ M1(a) M1(c) M1(a) M2(b) M2(d) M2(b)]` for every outcome.
pub fn quantum_joint_trace(settings: &Settings) -> JointDistribution16 {
    let rho = singlet();
    JointDistribution16::from_fn(OracleModel::QuantumTrace, 1.0, |s| {
        let sv = s.map(|v| SpinValue::try_from(v).expect("outcome values are ±1"));
        let m1a = on_first(&projector(sv[0], settings.a.0));
        let m3c = on_first(&projector(sv[2], settings.c.0));
        let m2b = on_second(&projector(sv[1], settings.b.0));
        let m4d = on_second(&projector(sv[3], settings.d.0));
        (rho.matrix() * m1a * m3c * m1a * m2b * m4d * m2b).trace().re
    })
}
