//! Haar-distributed unitaries on U(4) and Haar-random pure states.
//!
//! Two structurally different samplers are provided. [`sample_hurwitz`]
//! composes elementary two-level rotations with Hurwitz's angle
//! distribution; [`sample_ginibre`] orthonormalises a complex Gaussian
//! matrix. Agreement between them is what the tests rely on.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qlinalg::{c, CMatrix, Complex};
use crate::{Error, Result};

/// The random stream handed to samplers and trajectories.
pub type Stream = ChaCha8Rng;

/// Stream ids at or above this value are reserved for the random-state oracle.
pub const ORACLE_STREAM_BASE: u64 = 1 << 63;

/// Master seed. Child streams are derived from `(seed, index)`, so every
/// trajectory gets its own reproducible stream independent of scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn stream(self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

impl FromStr for Seed {
    type Err = Error;

    /// Accepts decimal or `0x`-prefixed hexadecimal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse::<u64>(),
        };
        parsed
            .map(Seed)
            .map_err(|e| Error::Parse(format!("invalid seed {s:?}: {e}")))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A 4×4 unitary acting on the system qubit and one environment qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary4 {
    m: CMatrix,
}

impl Unitary4 {
    /// Wraps a matrix, checking `U†U = I` to 1e-10.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::Dimension(format!(
                "collision unitary must be 4x4, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let dev = m.unitarity_deviation();
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary (deviation {dev:e})"
            )));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self { m: CMatrix::identity(4) }
    }

    /// Exchanges the two qubits.
    pub fn swap() -> Self {
        let m = CMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )
        .expect("4x4");
        Self { m }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex {
        self.m[(i, j)]
    }
}

/// Which Haar construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    #[default]
    Hurwitz,
    Ginibre,
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Unitary4 {
        match self {
            Sampler::Hurwitz => sample_hurwitz(rng),
            Sampler::Ginibre => sample_ginibre(rng),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sampler::Hurwitz => "hurwitz",
            Sampler::Ginibre => "ginibre",
        }
    }
}

impl FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hurwitz" => Ok(Sampler::Hurwitz),
            "ginibre" => Ok(Sampler::Ginibre),
            other => Err(Error::Parse(format!(
                "unknown sampler {other:?} (expected hurwitz or ginibre)"
            ))),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Right-multiplies `u` by the two-level rotation on coordinates `(i, j)`:
///
/// ```text
/// E_ii =  cos φ e^{iψ}    E_ij = sin φ e^{iχ}
/// E_ji = −sin φ e^{−iχ}   E_jj = cos φ e^{−iψ}
/// ```
fn rotate_columns(u: &mut CMatrix, i: usize, j: usize, cos_phi: f64, psi: f64, chi: f64) {
    let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
    let eii = Complex::from_polar(cos_phi, psi);
    let eij = Complex::from_polar(sin_phi, chi);
    let eji = -Complex::from_polar(sin_phi, -chi);
    let ejj = Complex::from_polar(cos_phi, -psi);
    for k in 0..u.rows() {
        let uki = u[(k, i)];
        let ukj = u[(k, j)];
        u[(k, i)] = uki * eii + ukj * eji;
        u[(k, j)] = uki * eij + ukj * ejj;
    }
}

/// Haar-random U(4) from the Hurwitz composition of two-level rotations.
///
/// `U = e^{iα} E₁ E₂ E₃` with `E_k = E^{(k−1,k)} ⋯ E^{(0,k)}`. Only the
/// rotation touching coordinate 0 carries a `χ` phase. For the rotation on
/// coordinates `(r, k)` (0-based `r`), `cos φ = ξ^{1/(2(r+1))}` with `ξ`
/// uniform; `ψ`, `χ` and `α` are uniform on `[0, 2π)`.
pub fn sample_hurwitz<R: Rng + ?Sized>(rng: &mut R) -> Unitary4 {
    const N: usize = 4;
    let alpha = rng.random::<f64>() * TAU;
    let mut u = CMatrix::identity(N);
    for k in 1..N {
        for r in (0..k).rev() {
            let xi: f64 = rng.random();
            let psi = rng.random::<f64>() * TAU;
            let chi = if r == 0 { rng.random::<f64>() * TAU } else { 0.0 };
            let cos_phi = xi.powf(1.0 / (2.0 * (r + 1) as f64));
            rotate_columns(&mut u, r, k, cos_phi, psi, chi);
        }
    }
    Unitary4 {
        m: u.scale(Complex::from_polar(1.0, alpha)),
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random U(4) as the Q factor of a complex Ginibre matrix.
///
/// Modified Gram–Schmidt leaves a positive real diagonal in R, which is the
/// phase convention that makes Q exactly Haar distributed.
pub fn sample_ginibre<R: Rng + ?Sized>(rng: &mut R) -> Unitary4 {
    const N: usize = 4;
    let mut cols: [[Complex; N]; N] = [[Complex::default(); N]; N];
    for col in cols.iter_mut() {
        for z in col.iter_mut() {
            *z = gaussian(rng);
        }
    }
    for j in 0..N {
        for i in 0..j {
            let proj: Complex = (0..N).map(|k| cols[i][k].conj() * cols[j][k]).sum();
            let qi = cols[i];
            for (z, q) in cols[j].iter_mut().zip(qi) {
                *z -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut m = CMatrix::zeros(N, N);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    Unitary4 { m }
}

/// Unit vector uniform on the complex sphere of dimension 2, 4 or 8.
pub fn sample_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Vec<Complex>> {
    if !matches!(dim, 2 | 4 | 8) {
        return Err(Error::InvalidArgument(format!(
            "pure-state dimension must be 2, 4 or 8, got {dim}"
        )));
    }
    let mut v: Vec<Complex> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(v)
}
