//! Pure-state evolution of the system qubit and its two-qubit environment.
//!
//! Each collision applies a 4×4 unitary to the system (qubit 0) and one
//! environment qubit. Basis index bits are `q0 q1 q2` with q0 most
//! significant.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::haar::{Sampler, Seed, Stream, Unitary4};
use crate::observables::{self, ObservableRecord};
use crate::qlinalg::{c, kron, CMatrix, Complex};
use crate::{Error, Result};

/// Norm tolerance for a valid state.
pub const NORM_TOL: f64 = 1e-10;
/// Drift beyond which a state is renormalised after a collision.
pub const RENORM_TOL: f64 = 1e-12;
/// Literal states within this distance of unit norm are normalised on load.
pub const LITERAL_NORM_TOL: f64 = 1e-6;

/// Pure three-qubit state.
#[derive(Clone, Copy, PartialEq)]
pub struct StateVector {
    amps: [Complex; 8],
}

impl StateVector {
    /// Wraps amplitudes that are already normalised to within [`NORM_TOL`].
    pub fn new(amps: [Complex; 8]) -> Result<Self> {
        check_finite(&amps)?;
        let n = norm_sqr(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm² is {n}, expected 1"
            )));
        }
        Ok(Self { amps })
    }

    /// Normalises amplitudes that are within [`LITERAL_NORM_TOL`] of unit norm.
    pub fn normalized(mut amps: [Complex; 8]) -> Result<Self> {
        check_finite(&amps)?;
        let n = norm_sqr(&amps);
        if (n.sqrt() - 1.0).abs() > LITERAL_NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm is {}, more than {LITERAL_NORM_TOL:e} from 1",
                n.sqrt()
            )));
        }
        let k = 1.0 / n.sqrt();
        amps.iter_mut().for_each(|z| *z *= k);
        Ok(Self { amps })
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(index: usize) -> Self {
        let mut amps = [Complex::default(); 8];
        amps[index] = c(1.0, 0.0);
        Self { amps }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = crate::haar::sample_pure_state(rng, 8).expect("8 is a valid dimension");
        let mut amps = [Complex::default(); 8];
        amps.copy_from_slice(&v);
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex; 8] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Reduced density matrix on the `keep` qubits (ascending order), formed
    /// directly from the amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<CMatrix> {
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&q| q > 2) {
            return Err(Error::InvalidArgument(format!(
                "keep-set {keep:?} is not a non-empty set of qubits in 0..3"
            )));
        }
        let traced: Vec<usize> = (0..3).filter(|q| !kept.contains(q)).collect();
        let k = kept.len();
        let dim = 1 << k;
        let compose = |sub: usize, env: usize| -> usize {
            let mut idx = 0;
            for (pos, &q) in kept.iter().enumerate() {
                if sub & (1 << (k - 1 - pos)) != 0 {
                    idx |= 1 << (2 - q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if env & (1 << (traced.len() - 1 - pos)) != 0 {
                    idx |= 1 << (2 - q);
                }
            }
            idx
        };
        let mut out = CMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = Complex::default();
                for e in 0..(1 << traced.len()) {
                    acc += self.amps[compose(a, e)] * self.amps[compose(b, e)].conj();
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Full density matrix `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> CMatrix {
        CMatrix::outer(&self.amps).expect("8x8")
    }

    /// Literal form: eight `(re,im)` pairs, shortest round-trip formatting.
    pub fn to_literal(&self) -> String {
        self.amps
            .iter()
            .map(|z| format!("({:?},{:?})", z.re, z.im))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses eight `(re,im)` pairs separated by whitespace and/or commas.
    /// The result is normalised if within [`LITERAL_NORM_TOL`] of unit norm.
    pub fn parse_literal(text: &str) -> Result<Self> {
        let mut amps = Vec::with_capacity(8);
        let mut rest = text.trim();
        while !rest.is_empty() {
            rest = rest.trim_start_matches(|ch: char| ch.is_whitespace() || ch == ',');
            if rest.is_empty() {
                break;
            }
            let inner = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' at {rest:?}")))?;
            let close = inner
                .find(')')
                .ok_or_else(|| Error::Parse("unterminated complex pair".into()))?;
            let (re, im) = inner[..close]
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected re,im in ({})", &inner[..close])))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number {x:?}: {e}")))
            };
            amps.push(c(parse(re)?, parse(im)?));
            rest = &inner[close + 1..];
        }
        let amps: [Complex; 8] = amps.try_into().map_err(|v: Vec<Complex>| {
            Error::Parse(format!("expected 8 complex amplitudes, got {}", v.len()))
        })?;
        Self::normalized(amps)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector[{}]", self.to_literal())
    }
}

fn norm_sqr(amps: &[Complex]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum()
}

fn check_finite(amps: &[Complex]) -> Result<()> {
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("amplitudes must be finite".into()));
    }
    Ok(())
}

/// Labels accepted by [`named_initial`].
pub const INITIAL_LABELS: [&str; 2] = ["product", "entangled"];

/// `product` is `|0⟩|00⟩`; `entangled` is `|0⟩(|00⟩+|11⟩)/√2`.
/// Anything starting with `(` is parsed as an amplitude literal.
pub fn named_initial(label: &str) -> Result<StateVector> {
    match label.trim() {
        "product" => Ok(StateVector::basis(0)),
        "entangled" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = [Complex::default(); 8];
            amps[0b000] = c(s, 0.0);
            amps[0b011] = c(s, 0.0);
            Ok(StateVector { amps })
        }
        lit if lit.starts_with('(') => StateVector::parse_literal(lit),
        other => Err(Error::InvalidArgument(format!(
            "unknown initial state {other:?}; valid labels are {} or an 8-amplitude literal",
            INITIAL_LABELS.join(", ")
        ))),
    }
}

/// Which environment qubit takes part in a collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    P01,
    P02,
}

impl Pair {
    pub fn label(self) -> &'static str {
        match self {
            Pair::P01 => "01",
            Pair::P02 => "02",
        }
    }

    pub fn env_qubit(self) -> usize {
        match self {
            Pair::P01 => 1,
            Pair::P02 => 2,
        }
    }
}

impl FromStr for Pair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "01" => Ok(Pair::P01),
            "02" => Ok(Pair::P02),
            other => Err(Error::Parse(format!("unknown pair {other:?} (expected 01 or 02)"))),
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Order in which environment qubits collide with the system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CollisionPolicy {
    /// Each pair drawn independently and uniformly.
    #[default]
    Random,
    /// 01, 02, 01, 02, …
    Alternating,
    /// The given sequence, repeated cyclically.
    Fixed(Vec<Pair>),
}

impl CollisionPolicy {
    pub fn fixed(seq: Vec<Pair>) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::InvalidArgument("fixed collision sequence must not be empty".into()));
        }
        Ok(CollisionPolicy::Fixed(seq))
    }

    /// Pair for the collision taking the state from step `t` to `t + 1`.
    pub fn pair_at<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Pair {
        match self {
            CollisionPolicy::Random => {
                if rng.random::<bool>() {
                    Pair::P01
                } else {
                    Pair::P02
                }
            }
            CollisionPolicy::Alternating => {
                if t.is_multiple_of(2) {
                    Pair::P01
                } else {
                    Pair::P02
                }
            }
            CollisionPolicy::Fixed(seq) => seq[t % seq.len()],
        }
    }

    /// Parses a list of pair labels separated by whitespace or commas.
    pub fn parse_sequence(text: &str) -> Result<Self> {
        let seq = text
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|tok| !tok.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Pair>>>()?;
        Self::fixed(seq)
    }
}

impl FromStr for CollisionPolicy {
    type Err = Error;

    /// `random`, `alternating`, or `fixed:01,02,…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "random" => Ok(CollisionPolicy::Random),
            "alternating" => Ok(CollisionPolicy::Alternating),
            _ => match s.strip_prefix("fixed:") {
                Some(seq) => Self::parse_sequence(seq),
                None => Err(Error::Parse(format!(
                    "unknown policy {s:?} (expected random, alternating or fixed:01,02,...)"
                ))),
            },
        }
    }
}

impl fmt::Display for CollisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollisionPolicy::Random => f.write_str("random"),
            CollisionPolicy::Alternating => f.write_str("alternating"),
            CollisionPolicy::Fixed(seq) => {
                let labels: Vec<&str> = seq.iter().map(|p| p.label()).collect();
                write!(f, "fixed:{}", labels.join(","))
            }
        }
    }
}

/// Permutation matrix exchanging qubits 1 and 2.
fn swap12() -> CMatrix {
    let mut p = CMatrix::zeros(8, 8);
    for i in 0..8 {
        let j = (i & 0b100) | ((i & 0b010) >> 1) | ((i & 0b001) << 1);
        p[(j, i)] = c(1.0, 0.0);
    }
    p
}

/// The 8×8 operator applying `u` to qubit 0 and the pair's environment qubit.
pub fn embed_pair(u: &Unitary4, pair: Pair) -> CMatrix {
    let local = kron(u.matrix(), &CMatrix::identity(2)).expect("8x8");
    match pair {
        Pair::P01 => local,
        Pair::P02 => {
            let p = swap12();
            &(&p * &local) * &p
        }
    }
}

/// One collision: `embed_pair(u, pair) · s`.
pub fn step(s: &StateVector, u: &Unitary4, pair: Pair) -> StateVector {
    // Bit of the environment qubit in the pair and of the spectator.
    let (env_bit, spectator_bit) = match pair {
        Pair::P01 => (0b010, 0b001),
        Pair::P02 => (0b001, 0b010),
    };
    let index = |local: usize, spectator: usize| {
        let sys = if local & 0b10 != 0 { 0b100 } else { 0 };
        let env = if local & 0b01 != 0 { env_bit } else { 0 };
        sys | env | if spectator != 0 { spectator_bit } else { 0 }
    };
    let mut out = [Complex::default(); 8];
    for spectator in 0..2 {
        let idx: [usize; 4] = std::array::from_fn(|l| index(l, spectator));
        let v: [Complex; 4] = std::array::from_fn(|l| s.amps[idx[l]]);
        for (row, &target) in idx.iter().enumerate() {
            out[target] = (0..4).map(|col| u.at(row, col) * v[col]).sum();
        }
    }
    let n = norm_sqr(&out);
    if (n - 1.0).abs() > RENORM_TOL {
        let k = 1.0 / n.sqrt();
        out.iter_mut().for_each(|z| *z *= k);
    }
    StateVector { amps: out }
}

/// Observables at every step of one collision history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<ObservableRecord>,
    pub seed: Seed,
    /// Child-stream index within `seed`.
    pub stream: u64,
    pub policy: CollisionPolicy,
    pub initial_state_label: String,
}

/// Applies `steps` collisions, calling `visit(t, state)` for t = 0..=steps.
pub fn evolve<F>(
    initial: &StateVector,
    policy: &CollisionPolicy,
    steps: usize,
    sampler: Sampler,
    rng: &mut Stream,
    mut visit: F,
) -> Result<StateVector>
where
    F: FnMut(usize, &StateVector) -> Result<()>,
{
    let mut state = *initial;
    visit(0, &state)?;
    for t in 0..steps {
        let pair = policy.pair_at(t, rng);
        let u = sampler.sample(rng);
        state = step(&state, &u, pair);
        visit(t + 1, &state)?;
    }
    Ok(state)
}

/// Runs one trajectory on child stream `stream` of `seed`, recording all
/// observables at t = 0..=steps.
pub fn run_trajectory(
    initial: &StateVector,
    label: &str,
    policy: &CollisionPolicy,
    steps: usize,
    sampler: Sampler,
    seed: Seed,
    stream: u64,
) -> Result<Trajectory> {
    let mut rng = seed.stream(stream);
    let mut records = Vec::with_capacity(steps + 1);
    evolve(initial, policy, steps, sampler, &mut rng, |t, s| {
        records.push(observables::record(s, t)?);
        Ok(())
    })?;
    Ok(Trajectory {
        records,
        seed,
        stream,
        policy: policy.clone(),
        initial_state_label: label.to_string(),
    })
}

/// Like [`run_trajectory`] but only evaluates observables at the final step.
pub fn run_to_end(
    initial: &StateVector,
    policy: &CollisionPolicy,
    steps: usize,
    sampler: Sampler,
    seed: Seed,
    stream: u64,
) -> Result<ObservableRecord> {
    let mut rng = seed.stream(stream);
    let last = evolve(initial, policy, steps, sampler, &mut rng, |_, _| Ok(()))?;
    observables::record(&last, steps)
}
