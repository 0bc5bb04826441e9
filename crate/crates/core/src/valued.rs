//! Bridge from iterated Laurent series symbol algebras to their associated
//! graded algebras.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{classify, AlgebraError, AlgebraPresentation, Generator, ResidueDatum, RootsOfUnityDatum};
use crate::fgab::Int;
use crate::grading::{fundamental_equality_check, Degree, GradeLattice};
use crate::involution::{validate_involution, CenterAction, InvolutionDescriptor, InvolutionError, InvolutionKind};
use crate::sk1::{sk1_totally_ramified, sk1u_totally_ramified, SKResult, SkError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuedError {
    #[error("residue characteristic {p} divides n = {n}: not strongly tame")]
    NotStronglyTame { p: i64, n: i64 },
    #[error("root choice {omega} for generator pair {index} does not have exact order {r} mod {m}")]
    BadRootOrder { index: usize, omega: i64, r: i64, m: i64 },
    #[error("invalid symbol input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
    #[error(transparent)]
    Sk(#[from] SkError),
}

pub type Result<T> = std::result::Result<T, ValuedError>;

/// `C((x_1))...((x_2k))` with symbols `(x_(2i-1), x_(2i))_(omega_i)`, where `C`
/// carries an involution `theta` described by its action on roots of unity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuedSymbolInput {
    pub residue: RootsOfUnityDatum,
    /// 0 or a prime.
    pub residue_char: i64,
    pub exponents: Vec<i64>,
    /// `omega_i` as exponents of `zeta_m`; `None` picks `m / r_i`.
    pub root_choices: Option<Vec<i64>>,
}

impl ValuedSymbolInput {
    pub fn new(m: i64, theta: Option<i64>, exponents: &[i64]) -> Result<Self> {
        Ok(ValuedSymbolInput {
            residue: RootsOfUnityDatum::new(m, theta)?,
            residue_char: 0,
            exponents: exponents.to_vec(),
            root_choices: None,
        })
    }

    pub fn degree(&self) -> i64 {
        self.exponents.iter().product()
    }

    pub fn exponent(&self) -> i64 {
        self.exponents.iter().fold(1, |a, r| a.lcm(r))
    }

    fn omegas(&self) -> Result<Vec<i64>> {
        let m = self.residue.m;
        if self.exponents.is_empty() {
            return Err(ValuedError::InvalidInput(
                "at least one symbol exponent is required".into(),
            ));
        }
        for (i, &r) in self.exponents.iter().enumerate() {
            if r < 2 {
                return Err(ValuedError::InvalidInput(format!(
                    "exponents[{i}] = {r} must be at least 2"
                )));
            }
        }
        let omegas = match &self.root_choices {
            Some(w) if w.len() != self.exponents.len() => {
                return Err(ValuedError::InvalidInput(format!(
                    "{} root choices for {} exponents",
                    w.len(),
                    self.exponents.len()
                )))
            }
            Some(w) => w.iter().map(|x| x.rem_euclid(m)).collect(),
            None => self
                .exponents
                .iter()
                .map(|&r| if m % r == 0 { m / r } else { -1 })
                .collect::<Vec<_>>(),
        };
        for (i, (&w, &r)) in omegas.iter().zip(&self.exponents).enumerate() {
            // exact order of zeta^w is m / gcd(w, m)
            if w < 0 || m / w.gcd(&m) != r {
                return Err(ValuedError::BadRootOrder {
                    index: i,
                    omega: w,
                    r,
                    m,
                });
            }
        }
        Ok(omegas)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tameness {
    StronglyTame,
    Tame,
    /// Not strongly tame; full tameness is not decidable from the input.
    NotTame,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeCertificate {
    pub tameness: Tameness,
    pub defectless: bool,
    pub applied_theorem: String,
    pub notes: Vec<String>,
}

/// Strong tameness and the defect count for the symbol algebra.
pub fn tameness_check(inp: &ValuedSymbolInput) -> BridgeCertificate {
    let n = inp.degree();
    let p = inp.residue_char;
    let mut notes = Vec::new();
    let tameness = if p == 0 || n % p != 0 {
        notes.push(format!("residue characteristic {p} does not divide n = {n}"));
        Tameness::StronglyTame
    } else {
        notes.push(format!(
            "residue characteristic {p} divides n = {n}; full tameness undecidable from datum"
        ));
        Tameness::NotTame
    };
    // [D:K] = n^2, the residue algebra is C, and |Gamma_D : Gamma_K| = prod r_i^2
    let k = inp.exponents.len();
    let mut scales = Vec::with_capacity(2 * k);
    for &r in &inp.exponents {
        scales.push(r);
        scales.push(r);
    }
    let defectless = fundamental_equality_check(
        &(Int::from(n) * Int::from(n)),
        &Int::from(1),
        &GradeLattice::standard(2 * k),
        &GradeLattice::diagonal(&scales),
    )
    .unwrap_or(false);
    BridgeCertificate {
        tameness,
        defectless,
        applied_theorem: "ThInvolthm2".into(),
        notes,
    }
}

/// `gr(D)` with the involution induced by `theta` and `tau(i_k) = i_k`, `tau(j_k) = j_k`.
/// Degrees are scaled by the exponents so the center lattice is `r_1 Z x r_1 Z x ...`.
pub fn associated_graded(
    inp: &ValuedSymbolInput,
) -> Result<(AlgebraPresentation, InvolutionDescriptor, BridgeCertificate)> {
    let omegas = inp.omegas()?;
    let m = inp.residue.m;
    let cert = tameness_check(inp);
    if cert.tameness != Tameness::StronglyTame {
        return Err(ValuedError::NotStronglyTame {
            p: inp.residue_char,
            n: inp.degree(),
        });
    }
    let k = inp.exponents.len();
    let rank = 2 * k;
    let mut scales = Vec::with_capacity(rank);
    let mut generators = Vec::with_capacity(rank);
    let mut commutation = vec![vec![0; rank]; rank];
    for (t, (&r, &w)) in inp.exponents.iter().zip(&omegas).enumerate() {
        scales.push(r);
        scales.push(r);
        generators.push(Generator {
            name: format!("i{}", t + 1),
            degree: Degree::unit(rank, 2 * t),
            power: r,
        });
        generators.push(Generator {
            name: format!("j{}", t + 1),
            degree: Degree::unit(rank, 2 * t + 1),
            power: r,
        });
        commutation[2 * t][2 * t + 1] = w;
        commutation[2 * t + 1][2 * t] = (m - w) % m;
    }
    let center = GradeLattice::diagonal(&scales);
    let p = AlgebraPresentation {
        center: center.clone(),
        generators,
        commutation,
        residue: ResidueDatum::RootsOfUnity(inp.residue.clone()),
        residue_extension: None,
    };
    let tau = InvolutionDescriptor {
        kind: InvolutionKind::Unitary,
        center_action: CenterAction {
            fixed_lattice: center,
            residue_nontrivial: true,
        },
        signs: vec![0; rank],
    };
    let mut cert = cert;
    let c = classify(&p)?;
    if c.n != inp.degree() || c.e != inp.exponent() {
        return Err(ValuedError::InvalidInput(format!(
            "graded invariants n = {}, e = {} disagree with the symbols",
            c.n, c.e
        )));
    }
    cert.notes
        .push(format!("n = {}, e = {}, case {}", c.n, c.e, c.tag.name()));
    if inp.residue.tau_multiplier.is_some() {
        validate_involution(&p, &tau)?;
        cert.notes.push("induced graded involution is unitary".into());
    }
    Ok((p, tau, cert))
}

#[derive(Clone, Debug)]
pub struct ValuedResult {
    pub result: SKResult,
    pub certificate: BridgeCertificate,
}

pub fn sk1u_valued(inp: &ValuedSymbolInput) -> Result<ValuedResult> {
    let (p, tau, mut cert) = associated_graded(inp)?;
    let result = sk1u_totally_ramified(&p, &tau)?;
    cert.applied_theorem = format!("{} via ThInvolthm2", result.theorem_tag.name());
    Ok(ValuedResult {
        result,
        certificate: cert,
    })
}

pub fn sk1_valued(inp: &ValuedSymbolInput) -> Result<ValuedResult> {
    let (p, _, mut cert) = associated_graded(inp)?;
    let result = sk1_totally_ramified(&p)?;
    cert.applied_theorem = format!("{} via graded reduction", result.theorem_tag.name());
    Ok(ValuedResult {
        result,
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgab::elem;

    #[test]
    fn degree_four_pair() {
        let inp = ValuedSymbolInput::new(16, Some(7), &[4, 4]).unwrap();
        let (p, _, cert) = associated_graded(&inp).unwrap();
        let c = classify(&p).unwrap();
        assert_eq!((c.n, c.e), (16, 4));
        assert!(cert.defectless);
        let r = sk1u_valued(&inp).unwrap();
        assert_eq!(r.result.invariant_factors(), elem(&[2]));
        assert_eq!(r.certificate.applied_theorem, "ThSktotal via ThInvolthm2");
        assert_eq!(sk1_valued(&inp).unwrap().result.invariant_factors(), elem(&[4]));
    }

    #[test]
    fn inverting_theta_families() {
        let inp = ValuedSymbolInput::new(8, Some(-1), &[2, 4]).unwrap();
        assert_eq!(sk1u_valued(&inp).unwrap().result.invariant_factors(), elem(&[2]));
        let inp = ValuedSymbolInput::new(8, Some(3), &[2, 2, 2]).unwrap();
        assert_eq!(sk1u_valued(&inp).unwrap().result.invariant_factors(), elem(&[2]));
    }

    #[test]
    fn quaternion() {
        let inp = ValuedSymbolInput::new(2, Some(1), &[2]).unwrap();
        let (p, _, _) = associated_graded(&inp).unwrap();
        let c = classify(&p).unwrap();
        assert_eq!((c.n, c.e), (2, 2));
    }

    #[test]
    fn tameness() {
        let mut inp = ValuedSymbolInput::new(16, Some(7), &[4, 4]).unwrap();
        inp.residue_char = 3;
        assert_eq!(tameness_check(&inp).tameness, Tameness::StronglyTame);
        inp.residue_char = 2;
        assert_eq!(tameness_check(&inp).tameness, Tameness::NotTame);
        let mut q = ValuedSymbolInput::new(2, Some(1), &[2]).unwrap();
        q.residue_char = 2;
        assert_eq!(
            associated_graded(&q).unwrap_err(),
            ValuedError::NotStronglyTame { p: 2, n: 2 }
        );
    }

    #[test]
    fn bad_roots() {
        let mut inp = ValuedSymbolInput::new(16, Some(7), &[4, 4]).unwrap();
        inp.root_choices = Some(vec![4, 2]);
        assert!(matches!(
            associated_graded(&inp),
            Err(ValuedError::BadRootOrder { index: 1, .. })
        ));
        let inp = ValuedSymbolInput::new(6, None, &[4]).unwrap();
        assert!(matches!(associated_graded(&inp), Err(ValuedError::BadRootOrder { .. })));
        let inp = ValuedSymbolInput::new(6, None, &[1]).unwrap();
        assert!(matches!(associated_graded(&inp), Err(ValuedError::InvalidInput(_))));
    }
}
