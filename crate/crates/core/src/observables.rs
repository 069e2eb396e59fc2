//! Scalar observables of a pure three-qubit state.

use std::fmt;
use std::str::FromStr;

use crate::engine::StateVector;
use crate::qlinalg::{concurrence, det2};
use crate::{Error, Result};

/// Rounding slack allowed on range checks of observables.
pub const RANGE_SLACK: f64 = 1e-9;

/// All observables of one state at step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub t: usize,
    pub purity: f64,
    pub tangle01: f64,
    pub tangle02: f64,
    pub tangle12: f64,
    pub tau0_rest: f64,
    pub tau1_rest: f64,
    pub tau2_rest: f64,
    pub three_tangle: f64,
}

/// Names of the scalar columns of an [`ObservableRecord`], in CSV order.
pub const RECORD_COLUMNS: [&str; 8] = [
    "purity",
    "tangle01",
    "tangle02",
    "tangle12",
    "tau0_rest",
    "tau1_rest",
    "tau2_rest",
    "three_tangle",
];

impl ObservableRecord {
    /// Scalar columns in [`RECORD_COLUMNS`] order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.purity,
            self.tangle01,
            self.tangle02,
            self.tangle12,
            self.tau0_rest,
            self.tau1_rest,
            self.tau2_rest,
            self.three_tangle,
        ]
    }
}

/// Selects one scalar out of an [`ObservableRecord`].
///
/// Concurrences are derived as `√tangle`; they are not stored separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    Purity,
    Tangle01,
    Tangle02,
    Tangle12,
    Tau0Rest,
    Tau1Rest,
    Tau2Rest,
    ThreeTangle,
    Concurrence01,
    Concurrence02,
    Concurrence12,
}

impl Observable {
    pub const ALL: [Observable; 11] = [
        Observable::Purity,
        Observable::Tangle01,
        Observable::Tangle02,
        Observable::Tangle12,
        Observable::Tau0Rest,
        Observable::Tau1Rest,
        Observable::Tau2Rest,
        Observable::ThreeTangle,
        Observable::Concurrence01,
        Observable::Concurrence02,
        Observable::Concurrence12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Purity => "purity",
            Observable::Tangle01 => "tangle01",
            Observable::Tangle02 => "tangle02",
            Observable::Tangle12 => "tangle12",
            Observable::Tau0Rest => "tau0_rest",
            Observable::Tau1Rest => "tau1_rest",
            Observable::Tau2Rest => "tau2_rest",
            Observable::ThreeTangle => "three_tangle",
            Observable::Concurrence01 => "concurrence01",
            Observable::Concurrence02 => "concurrence02",
            Observable::Concurrence12 => "concurrence12",
        }
    }

    pub fn of(self, r: &ObservableRecord) -> f64 {
        match self {
            Observable::Purity => r.purity,
            Observable::Tangle01 => r.tangle01,
            Observable::Tangle02 => r.tangle02,
            Observable::Tangle12 => r.tangle12,
            Observable::Tau0Rest => r.tau0_rest,
            Observable::Tau1Rest => r.tau1_rest,
            Observable::Tau2Rest => r.tau2_rest,
            Observable::ThreeTangle => r.three_tangle,
            Observable::Concurrence01 => r.tangle01.sqrt(),
            Observable::Concurrence02 => r.tangle02.sqrt(),
            Observable::Concurrence12 => r.tangle12.sqrt(),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown observable {s:?}")))
    }
}

/// `Tr ρ_q²` for a single qubit.
pub fn qubit_purity(s: &StateVector, q: usize) -> f64 {
    let rho = s.reduced(&[q]).expect("single qubit is a valid keep-set");
    let a = rho[(0, 0)].re;
    let d = rho[(1, 1)].re;
    a * a + d * d + 2.0 * rho[(0, 1)].norm_sqr()
}

/// Purity `Tr ρ_S²` of the system qubit, in `[1/2, 1]`.
pub fn purity(s: &StateVector) -> f64 {
    qubit_purity(s, 0)
}

fn check_pair(i: usize, j: usize) -> Result<()> {
    if i == j || i > 2 || j > 2 {
        return Err(Error::InvalidArgument(format!(
            "tangle needs two distinct qubits in 0..3, got ({i}, {j})"
        )));
    }
    Ok(())
}

/// Wootters concurrence of the reduced state of qubits `i` and `j`.
pub fn pair_concurrence(s: &StateVector, i: usize, j: usize) -> Result<f64> {
    check_pair(i, j)?;
    concurrence(&s.reduced(&[i.min(j), i.max(j)])?)
}

/// Pairwise tangle `τ_{i|j}`, the squared concurrence.
pub fn pair_tangle(s: &StateVector, i: usize, j: usize) -> Result<f64> {
    pair_concurrence(s, i, j).map(|c| c * c)
}

/// `τ_{i|rest} = 4 det ρ_i`, valid because the total state is pure.
pub fn one_rest_tangle(s: &StateVector, i: usize) -> f64 {
    let rho = s.reduced(&[i]).expect("single qubit is a valid keep-set");
    (4.0 * det2(&rho).re).clamp(0.0, 1.0)
}

/// Unclamped `τ_{i|rest} − τ_{i|j} − τ_{i|k}` for the focus qubit `i`.
pub fn residual_tangle(s: &StateVector, i: usize) -> Result<f64> {
    if i > 2 {
        return Err(Error::InvalidArgument(format!("qubit {i} out of range")));
    }
    let others: Vec<usize> = (0..3).filter(|&q| q != i).collect();
    Ok(one_rest_tangle(s, i) - pair_tangle(s, i, others[0])? - pair_tangle(s, i, others[1])?)
}

fn clamp_three_tangle(raw: f64) -> Result<f64> {
    if raw < -RANGE_SLACK {
        return Err(Error::Numerical(format!(
            "three-tangle evaluated to {raw:e}; monogamy violated beyond rounding"
        )));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// Three-tangle `τ_{0|1|2}`, computed with qubit 0 as the focus.
pub fn three_tangle(s: &StateVector) -> Result<f64> {
    clamp_three_tangle(residual_tangle(s, 0)?)
}

/// Every observable at step `t`.
pub fn record(s: &StateVector, t: usize) -> Result<ObservableRecord> {
    let tangle01 = pair_tangle(s, 0, 1)?;
    let tangle02 = pair_tangle(s, 0, 2)?;
    let tangle12 = pair_tangle(s, 1, 2)?;
    let tau0_rest = one_rest_tangle(s, 0);
    Ok(ObservableRecord {
        t,
        purity: purity(s),
        tangle01,
        tangle02,
        tangle12,
        tau0_rest,
        tau1_rest: one_rest_tangle(s, 1),
        tau2_rest: one_rest_tangle(s, 2),
        three_tangle: clamp_three_tangle(tau0_rest - tangle01 - tangle02)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::named_initial;
    use crate::haar::Seed;
    use crate::qlinalg::{c, CMatrix, Complex};

    fn ghz() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = [Complex::default(); 8];
        a[0] = c(s, 0.0);
        a[7] = c(s, 0.0);
        StateVector::new(a).unwrap()
    }

    fn w_state() -> StateVector {
        let s = 1.0 / 3f64.sqrt();
        let mut a = [Complex::default(); 8];
        a[0b100] = c(s, 0.0);
        a[0b010] = c(s, 0.0);
        a[0b001] = c(s, 0.0);
        StateVector::new(a).unwrap()
    }

    #[test]
    fn purity_extremes() {
        assert_eq!(purity(&StateVector::basis(0)), 1.0);
        assert!((purity(&ghz()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bell_pair_in_environment() {
        let s = named_initial("entangled").unwrap();
        assert!((pair_tangle(&s, 1, 2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pair_tangle(&s, 0, 1).unwrap(), 0.0);
        assert_eq!(pair_tangle(&s, 0, 2).unwrap(), 0.0);
        assert!(pair_tangle(&s, 1, 1).is_err());
    }

    #[test]
    fn ghz_values() {
        let g = ghz();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(pair_tangle(&g, i, j).unwrap().abs() < 1e-12);
        }
        for i in 0..3 {
            assert!((one_rest_tangle(&g, i) - 1.0).abs() < 1e-12);
        }
        assert!((three_tangle(&g).unwrap() - 1.0).abs() < 1e-12);
        let r = record(&g, 0).unwrap();
        assert!((r.purity - 0.5).abs() < 1e-12 && (r.three_tangle - 1.0).abs() < 1e-12);
    }

    /// The two-qubit reduction of |W⟩ is (2/3)|Ψ⁺⟩⟨Ψ⁺| + (1/3)|00⟩⟨00|.
    /// Evaluating the Wootters construction on it by hand gives α = (2/3, 0, 0, 0).
    #[test]
    fn w_state_values() {
        let w = w_state();
        let rho01 = w.reduced(&[0, 1]).unwrap();
        let third = 1.0 / 3.0;
        let expected = CMatrix::from_real(
            4,
            4,
            &[third, 0.0, 0.0, 0.0, 0.0, third, third, 0.0, 0.0, third, third, 0.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(rho01.max_abs_diff(&expected) < 1e-15);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((pair_tangle(&w, i, j).unwrap() - 4.0 / 9.0).abs() < 1e-12);
        }
        assert!((one_rest_tangle(&w, 0) - 8.0 / 9.0).abs() < 1e-12);
        assert!(three_tangle(&w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn product_state_zero() {
        let r = record(&StateVector::basis(0), 0).unwrap();
        assert_eq!(r.purity, 1.0);
        for v in &r.values()[1..] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn random_state_identities() {
        let mut rng = Seed(21).stream(0);
        for _ in 0..500 {
            let s = StateVector::random(&mut rng);
            let r = record(&s, 0).unwrap();
            assert!((r.tau0_rest - (2.0 - 2.0 * r.purity)).abs() < 1e-12);
            assert!(r.tangle01 + r.tangle02 <= r.tau0_rest + 1e-9);
            assert!((r.three_tangle - (r.tau0_rest - r.tangle01 - r.tangle02)).abs() < 1e-9);
            let t1 = residual_tangle(&s, 1).unwrap();
            let t2 = residual_tangle(&s, 2).unwrap();
            assert!((t1 - r.three_tangle).abs() < 1e-8 && (t2 - r.three_tangle).abs() < 1e-8);
            assert!((0.5 - 1e-9..=1.0 + 1e-9).contains(&r.purity));
        }
    }

    #[test]
    fn observable_names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
        let r = record(&named_initial("entangled").unwrap(), 0).unwrap();
        assert!((Observable::Concurrence12.of(&r) - 1.0).abs() < 1e-12);
        assert_eq!(&RECORD_COLUMNS[..], &Observable::ALL[..8].iter().map(|o| o.name()).collect::<Vec<_>>()[..]);
    }
}
