//! Pauli-weight Markov chain.
//!
//! Writing the three-qubit density matrix in the orthonormal basis
//! `σ^{α₀}⊗σ^{α₁}⊗σ^{α₂} / √8`, the Haar average of the squared coefficients
//! evolves linearly under a random collision: `w(t+1) = M w(t)`. A collision
//! on a pair keeps the identity label of that pair and spreads every other
//! label of the pair uniformly over the 15 non-identity labels.

use crate::engine::{Pair, StateVector};
use crate::qlinalg::{c, sym_eigvals, Complex};
use crate::stats::Series;
use crate::{Error, Result};

/// Number of three-qubit Pauli labels.
pub const LABELS: usize = 64;

/// Eigenvalues closer than this are counted as one with multiplicity.
pub const CLUSTER_TOL: f64 = 1e-8;

const STOCHASTIC_TOL: f64 = 1e-12;

/// Index of the label `(α₀, α₁, α₂)`, with `0, x, y, z ↦ 0, 1, 2, 3`.
pub fn label_index(a: [usize; 3]) -> usize {
    16 * a[0] + 4 * a[1] + a[2]
}

pub fn label_of(index: usize) -> [usize; 3] {
    [index / 16, (index / 4) % 4, index % 4]
}

/// Squared Pauli coefficients `c²`, one per label.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliWeightVector {
    w: Vec<f64>,
}

impl PauliWeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() != LABELS {
            return Err(Error::Dimension(format!("weight vector needs 64 entries, got {}", w.len())));
        }
        if let Some(i) = w.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument(format!("weight {i} is {}", w[i])));
        }
        Ok(Self { w })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn at(&self, a: [usize; 3]) -> f64 {
        self.w[label_index(a)]
    }

    /// Purity of qubit 0, `4 Σ_{α₀} w[(α₀,0,0)]`.
    pub fn system_purity(&self) -> f64 {
        4.0 * (0..4).map(|a0| self.at([a0, 0, 0])).sum::<f64>()
    }
}

/// A 64×64 column-stochastic matrix acting on [`PauliWeightVector`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    /// Row-major; `data[to * 64 + from]`.
    data: Vec<f64>,
}

impl MixingMatrix {
    /// Validates non-negativity and unit column sums.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.len() != LABELS * LABELS {
            return Err(Error::Dimension(format!(
                "mixing matrix needs {} entries, got {}",
                LABELS * LABELS,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument("mixing matrix has negative or non-finite entries".into()));
        }
        for col in 0..LABELS {
            let s: f64 = (0..LABELS).map(|row| data[row * LABELS + col]).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidArgument(format!("column {col} sums to {s}")));
            }
        }
        Ok(Self { data })
    }

    pub fn identity() -> Self {
        let mut data = vec![0.0; LABELS * LABELS];
        for i in 0..LABELS {
            data[i * LABELS + i] = 1.0;
        }
        Self { data }
    }

    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.data[to * LABELS + from]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, from: usize) -> Vec<f64> {
        (0..LABELS).map(|to| self.get(to, from)).collect()
    }

    pub fn apply(&self, w: &PauliWeightVector) -> PauliWeightVector {
        let out = self
            .data
            .chunks_exact(LABELS)
            .map(|row| row.iter().zip(&w.w).map(|(m, x)| m * x).sum::<f64>().max(0.0))
            .collect();
        PauliWeightVector { w: out }
    }

    fn is_symmetric(&self) -> bool {
        (0..LABELS).all(|i| (i + 1..LABELS).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= 1e-12))
    }
}

/// Mixer for one collision pair, acting as the identity on the third qubit.
pub fn pair_mixer(pair: Pair) -> MixingMatrix {
    let (i, j) = (0, pair.env_qubit());
    let mut data = vec![0.0; LABELS * LABELS];
    for from in 0..LABELS {
        let a = label_of(from);
        if a[i] == 0 && a[j] == 0 {
            data[from * LABELS + from] = 1.0;
            continue;
        }
        for x in 0..4 {
            for y in 0..4 {
                if x == 0 && y == 0 {
                    continue;
                }
                let mut b = a;
                b[i] = x;
                b[j] = y;
                data[label_index(b) * LABELS + from] += 1.0 / 15.0;
            }
        }
    }
    MixingMatrix { data }
}

/// `M = ½ (M₀₁ + M₀₂)`, the chain for a uniformly random choice of pair.
pub fn build_m() -> MixingMatrix {
    let a = pair_mixer(Pair::P01);
    let b = pair_mixer(Pair::P02);
    let data = a.data.iter().zip(&b.data).map(|(x, y)| 0.5 * (x + y)).collect();
    MixingMatrix { data }
}

/// Eigenvalues in descending order. Only symmetric matrices are accepted;
/// use [`spectrum_reversible`] for chains that are symmetric after a
/// diagonal similarity.
pub fn spectrum(m: &MixingMatrix) -> Result<Vec<f64>> {
    if !m.is_symmetric() {
        return Err(Error::Numerical(
            "mixing matrix is not symmetric; use spectrum_reversible with its stationary weights".into(),
        ));
    }
    sym_eigvals(LABELS, &m.data)
}

/// Eigenvalues of an `n×n` column-stochastic matrix `p` (row-major,
/// `p[to*n+from]`) that satisfies detailed balance with `weights`, computed
/// from the symmetric matrix `D^{-1/2} P D^{1/2}`.
pub fn spectrum_reversible(n: usize, p: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if p.len() != n * n || weights.len() != n {
        return Err(Error::Dimension(format!("expected {n}x{n} matrix and {n} weights")));
    }
    if weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
        return Err(Error::InvalidArgument("stationary weights must be positive".into()));
    }
    let mut s = vec![0.0; n * n];
    for to in 0..n {
        for from in 0..n {
            s[to * n + from] = p[to * n + from] * (weights[from] / weights[to]).sqrt();
        }
    }
    sym_eigvals(n, &s).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Numerical(format!("chain is not reversible: {msg}")),
        other => other,
    })
}

/// Groups a descending spectrum into `(value, multiplicity)` clusters.
pub fn cluster(eigs: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &e in eigs {
        match out.last_mut() {
            Some((v, k)) if (*v - e).abs() <= tol => *k += 1,
            _ => out.push((e, 1)),
        }
    }
    out
}

/// Largest eigenvalue strictly below 1.
pub fn second_eigenvalue(eigs: &[f64]) -> Option<f64> {
    eigs.iter().copied().find(|e| *e < 1.0 - CLUSTER_TOL)
}

/// Asymptotic purity-decay rate `−ln(1−Δ)`.
pub fn decay_rate(m: &MixingMatrix) -> Result<f64> {
    rate_from_spectrum(&spectrum(m)?)
}

pub fn rate_from_spectrum(eigs: &[f64]) -> Result<f64> {
    match second_eigenvalue(eigs) {
        Some(l) if l > 0.0 => Ok(-l.ln()),
        Some(l) => Err(Error::Numerical(format!("second eigenvalue {l} is not positive"))),
        None => Err(Error::Numerical("spectrum has no eigenvalue below 1".into())),
    }
}

/// `P|x⟩ = phase · |x'⟩` for a single-qubit Pauli on bit `bit`.
fn pauli_action(label: usize, bit: usize, x: usize) -> (usize, Complex) {
    let b = (x >> bit) & 1;
    let sign = if b == 0 { 1.0 } else { -1.0 };
    match label {
        0 => (x, c(1.0, 0.0)),
        1 => (x ^ (1 << bit), c(1.0, 0.0)),
        2 => (x ^ (1 << bit), c(0.0, sign)),
        _ => (x, c(sign, 0.0)),
    }
}

/// `w[α] = ⟨ψ|σ^α|ψ⟩² / 8`.
pub fn weights_from_state(s: &StateVector) -> PauliWeightVector {
    let amps = s.amplitudes();
    let mut w = vec![0.0; LABELS];
    for (idx, slot) in w.iter_mut().enumerate() {
        let a = label_of(idx);
        let mut expect = Complex::default();
        for (x, &amp) in amps.iter().enumerate() {
            let mut y = x;
            let mut phase = c(1.0, 0.0);
            for (q, &l) in a.iter().enumerate() {
                let (ny, ph) = pauli_action(l, 2 - q, y);
                y = ny;
                phase *= ph;
            }
            expect += amps[y].conj() * phase * amp;
        }
        *slot = expect.re * expect.re / 8.0;
    }
    PauliWeightVector { w }
}

/// Predicted ensemble purity `P(t)` for `t = 0..=t_max`.
pub fn predict_purity(m: &MixingMatrix, w0: &PauliWeightVector, t_max: usize) -> Result<Series> {
    let mut w = w0.clone();
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(w.system_purity());
    for _ in 0..t_max {
        w = m.apply(&w);
        out.push(w.system_purity());
    }
    Series::new(out)
}

/// The eight support classes, as bitmasks over qubits `{0,1,2}` (bit q set
/// when qubit q carries a non-identity Pauli).
pub const SUPPORTS: usize = 8;

/// Number of Pauli labels with support `mask`.
pub fn support_size(mask: usize) -> usize {
    3usize.pow(mask.count_ones())
}

/// Exact chain over support classes, `l[to*8 + from]`.
///
/// Under a collision on `(i, j)` a class meeting `{i, j}` moves its
/// `{i, j}` part to `{i}`, `{j}` or `{i, j}` with probability 1/5, 1/5, 3/5.
pub fn lump_by_support() -> Vec<f64> {
    let mut l = vec![0.0; SUPPORTS * SUPPORTS];
    for env in [1usize, 2] {
        let pair_mask = 1 | (1 << env);
        for from in 0..SUPPORTS {
            if from & pair_mask == 0 {
                l[from * SUPPORTS + from] += 0.5;
                continue;
            }
            let rest = from & !pair_mask;
            for (part, p) in [(1usize, 0.2), (1 << env, 0.2), (pair_mask, 0.6)] {
                l[(rest | part) * SUPPORTS + from] += 0.5 * p;
            }
        }
    }
    l
}

/// Spectrum of [`lump_by_support`], via its stationary weights `3^|S|`.
pub fn lumped_spectrum() -> Result<Vec<f64>> {
    let weights: Vec<f64> = (0..SUPPORTS).map(|s| support_size(s) as f64).collect();
    spectrum_reversible(SUPPORTS, &lump_by_support(), &weights)
}

/// Support mask of a label.
pub fn support_of(index: usize) -> usize {
    label_of(index)
        .iter()
        .enumerate()
        .fold(0, |acc, (q, &a)| if a != 0 { acc | (1 << q) } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{self, named_initial};
    use crate::haar::{sample_hurwitz, Seed};
    use crate::observables;
    use crate::stats::moments;
    use rand::Rng;

    #[test]
    fn label_indexing_round_trips() {
        for i in 0..LABELS {
            assert_eq!(label_index(label_of(i)), i);
        }
        assert_eq!(label_index([1, 0, 0]), 16);
        assert_eq!(label_index([0, 3, 2]), 14);
    }

    #[test]
    fn identity_column_is_fixed() {
        for pair in [Pair::P01, Pair::P02] {
            let col = pair_mixer(pair).column(0);
            assert_eq!(col[0], 1.0);
            assert_eq!(col.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn x00_column_spreads_uniformly_over_pair_labels() {
        let col = pair_mixer(Pair::P01).column(label_index([1, 0, 0]));
        for (to, &v) in col.iter().enumerate() {
            let b = label_of(to);
            let expected = if b[2] == 0 && (b[0], b[1]) != (0, 0) { 1.0 / 15.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15, "{b:?}");
        }
    }

    #[test]
    fn matrices_are_column_stochastic() {
        for m in [pair_mixer(Pair::P01), pair_mixer(Pair::P02), build_m()] {
            assert!(MixingMatrix::new(m.as_slice().to_vec()).is_ok());
        }
        let mut bad = MixingMatrix::identity().as_slice().to_vec();
        bad[1] = 0.5;
        assert!(MixingMatrix::new(bad).is_err());
        assert!(MixingMatrix::new(vec![0.0; 10]).is_err());
    }

    #[test]
    fn identity_spectrum() {
        let eigs = spectrum(&MixingMatrix::identity()).unwrap();
        assert!(eigs.iter().all(|&e| (e - 1.0).abs() < 1e-15));
        assert!(decay_rate(&MixingMatrix::identity()).is_err());
    }

    #[test]
    fn spectrum_of_m_has_paper_structure() {
        let eigs = spectrum(&build_m()).unwrap();
        assert_eq!(eigs.len(), 64);
        let cl = cluster(&eigs, CLUSTER_TOL);
        assert!((cl[0].0 - 1.0).abs() < 1e-10 && cl[0].1 == 2, "{cl:?}");
        assert!((cl[1].0 - 0.7).abs() < 1e-10 && cl[1].1 == 2, "{cl:?}");
        assert!((decay_rate(&build_m()).unwrap() - 0.356675).abs() < 1e-6);
    }

    #[test]
    fn rate_of_scaled_matrix() {
        // 0.5·I + 0.5·(uniform) has eigenvalues 1 and 0.5.
        let data: Vec<f64> = (0..LABELS * LABELS)
            .map(|k| 0.5 / 64.0 + if k / LABELS == k % LABELS { 0.5 } else { 0.0 })
            .collect();
        let m = MixingMatrix::new(data).unwrap();
        assert!((decay_rate(&m).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lumped_chain_block_and_spectrum() {
        let l = lump_by_support();
        for from in 0..SUPPORTS {
            let s: f64 = (0..SUPPORTS).map(|to| l[to * SUPPORTS + from]).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert_eq!(l[0], 1.0);
        // Antisymmetric sector in the basis ({1}−{2}, {0,1}−{0,2}).
        let at = |to: usize, from: usize| l[to * SUPPORTS + from];
        let (s1, s2, s01, s02) = (0b010, 0b100, 0b011, 0b101);
        let block = [
            [at(s1, s1) - at(s2, s1), at(s1, s01) - at(s2, s01)],
            [at(s01, s1) - at(s02, s1), at(s01, s01) - at(s02, s01)],
        ];
        let expected = [[0.6, 0.1], [0.3, 0.4]];
        for r in 0..2 {
            for k in 0..2 {
                assert!((block[r][k] - expected[r][k]).abs() < 1e-15, "{block:?}");
            }
        }
        let full = spectrum(&build_m()).unwrap();
        let lumped = lumped_spectrum().unwrap();
        for target in [1.0, 0.7, 0.3] {
            assert!(lumped.iter().any(|e| (e - target).abs() < 1e-12), "{lumped:?}");
        }
        for e in &lumped {
            assert!(full.iter().any(|f| (f - e).abs() < 1e-10), "{e} not in full spectrum");
        }
    }

    #[test]
    fn lumping_agrees_with_full_matrix() {
        let m = build_m();
        let l = lump_by_support();
        for from in 0..LABELS {
            let mut mass = [0.0; SUPPORTS];
            for to in 0..LABELS {
                mass[support_of(to)] += m.get(to, from);
            }
            for (s, &v) in mass.iter().enumerate() {
                assert!((v - l[s * SUPPORTS + support_of(from)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn m_commutes_with_environment_relabeling() {
        let m = build_m();
        let perm = |i: usize| {
            let a = label_of(i);
            label_index([a[0], a[2], a[1]])
        };
        for i in 0..LABELS {
            for j in 0..LABELS {
                assert_eq!(m.get(perm(i), perm(j)), m.get(i, j));
            }
        }
    }

    #[test]
    fn product_state_weights() {
        let w = weights_from_state(&StateVector::basis(0));
        for i in 0..LABELS {
            let on_z = label_of(i).iter().all(|&a| a == 0 || a == 3);
            assert_eq!(w.as_slice()[i], if on_z { 0.125 } else { 0.0 });
        }
    }

    #[test]
    fn parseval_and_purity_identity_on_random_states() {
        let mut rng = Seed(21).stream(0);
        for _ in 0..200 {
            let s = StateVector::random(&mut rng);
            let w = weights_from_state(&s);
            assert!((w.total() - 1.0).abs() < 1e-12);
            assert!((w.system_purity() - observables::purity(&s)).abs() < 1e-12);
        }
    }

    #[test]
    fn predicted_purity_curves() {
        let m = build_m();
        let prod = predict_purity(&m, &weights_from_state(&named_initial("product").unwrap()), 40).unwrap();
        assert!((prod[0] - 1.0).abs() < 1e-12);
        assert!((prod[1] - 0.8).abs() < 1e-12 && (prod[2] - 0.76).abs() < 1e-12);
        assert!(prod.windows(2).all(|p| p[1] < p[0]));
        assert!(prod.iter().all(|&p| p > 2.0 / 3.0));
        assert!((prod[40] - 2.0 / 3.0).abs() < 1e-6);

        let ent = predict_purity(&m, &weights_from_state(&named_initial("entangled").unwrap()), 40).unwrap();
        assert!((ent[0] - 1.0).abs() < 1e-12 && (ent[1] - 0.6).abs() < 1e-12);
        assert!(ent[1..].iter().all(|&p| p < 2.0 / 3.0));
        assert!(ent[1..].windows(2).all(|p| p[1] > p[0]));
    }

    /// Averages the weights after one random collision over 10⁵ unitaries.
    #[test]
    fn one_step_is_exact_in_expectation() {
        let m = build_m();
        let mut rng = Seed(33).stream(0);
        let s0 = StateVector::random(&mut rng);
        let predicted = m.apply(&weights_from_state(&s0));
        let n = 100_000;
        let mut samples: Vec<Vec<f64>> = (0..LABELS).map(|_| Vec::with_capacity(n)).collect();
        for _ in 0..n {
            let pair = if rng.random::<bool>() { Pair::P01 } else { Pair::P02 };
            let s1 = engine::step(&s0, &sample_hurwitz(&mut rng), pair);
            for (col, w) in samples.iter_mut().zip(weights_from_state(&s1).as_slice()) {
                col.push(*w);
            }
        }
        for (i, col) in samples.iter().enumerate() {
            let mo = moments(col).unwrap();
            let dev = (mo.mean - predicted.as_slice()[i]).abs();
            assert!(dev <= 4.0 * mo.std_error + 1e-12, "label {:?}: dev {dev}, se {}", label_of(i), mo.std_error);
        }
    }

    #[test]
    fn cluster_groups_close_values() {
        assert_eq!(cluster(&[1.0, 1.0 - 1e-12, 0.5], 1e-8), vec![(1.0, 2), (0.5, 1)]);
    }
}
