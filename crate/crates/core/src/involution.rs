//! Graded involutions acting diagonally on symbol generators.
//!
//! An involution is described by its fixed center lattice `Gamma_R`, whether
//! it moves `T_0`, and signs `eps_i` with `tau(x_i) = zeta^(eps_i) x_i`. On
//! roots of unity it acts through the residue multiplier `u`.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::algebra::{
    armature_lift, classify, modp, solve_congruence, symplectic_basis, symplectic_pairing, validate_presentation,
    AlgebraError, AlgebraPresentation, ArmatureFactor, CaseTag, Monomial, MonomialContext, ResidueDatum,
};
use crate::fgab::{solve_left, FGAbGroup, FgabError, GroupHom, Int, IntMatrix};
use crate::grading::{index, Degree, GradeLattice, GradingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvolutionError {
    #[error("not an involution: {0}")]
    NotAnInvolution(String),
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("commutation incompatible with the involution: beta[{0}][{1}]")]
    CommutationIncompatible(usize, usize),
    #[error("invalid involution descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("tau(t)/t is not central")]
    NotCentralRatio,
    #[error("no symmetric element of degree {0:?}")]
    NoSymmetricElement(Vec<i64>),
    #[error("degree {0:?} is not a product of generator degrees")]
    NotRepresentable(Vec<i64>),
    #[error("case mismatch: {0}")]
    CaseMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] FgabError),
    #[error(transparent)]
    Grading(#[from] GradingError),
}

pub type Result<T> = std::result::Result<T, InvolutionError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvolutionKind {
    FirstKind,
    Unitary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterAction {
    /// `Gamma_R`, the degrees of the fixed subfield of the center.
    pub fixed_lattice: GradeLattice,
    /// Whether `tau_bar` acts nontrivially on `T_0`.
    pub residue_nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutionDescriptor {
    pub kind: InvolutionKind,
    pub center_action: CenterAction,
    pub signs: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrCase {
    TrUnramified,
    TrTotallyRamified,
}

impl TrCase {
    pub fn name(&self) -> &'static str {
        match self {
            TrCase::TrUnramified => "TRUnramified",
            TrCase::TrTotallyRamified => "TRTotallyRamified",
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvolutionReport {
    pub tr_case: Option<TrCase>,
    pub checks: Vec<String>,
}

/// Modulus and multiplier of `tau_bar` on tracked roots of unity, if any.
pub fn root_action(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<Option<(i64, i64)>> {
    let m = match p.residue.root_modulus() {
        Ok(m) => m,
        Err(AlgebraError::InsufficientResidueData(_)) if matches!(p.residue, ResidueDatum::Abstract(_)) => {
            return Ok(None)
        }
        Err(e) => return Err(e.into()),
    };
    let u = match (p.residue.tau_multiplier(), tau.kind) {
        (Ok(u), _) => u,
        (Err(_), InvolutionKind::FirstKind) => 1,
        (Err(e), InvolutionKind::Unitary) => return Err(e.into()),
    };
    Ok(Some((m, u.rem_euclid(m))))
}

/// `tau(m)` for a monomial `m`.
pub fn apply_tau(ctx: &MonomialContext, u: i64, signs: &[i64], m: &Monomial) -> Monomial {
    let k = m.exps.len();
    let mut out = Monomial::one(k);
    for i in (0..k).rev() {
        let c = m.exps[i];
        if c == 0 {
            continue;
        }
        let mut exps = vec![0; k];
        exps[i] = c;
        let factor = Monomial {
            scalar: modp(c as i128 * signs[i] as i128, ctx.modulus),
            exps,
        };
        out = ctx.mul(&out, &factor);
    }
    out.scalar = modp(out.scalar as i128 + u as i128 * m.scalar as i128, ctx.modulus);
    out
}

pub fn validate_involution(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<InvolutionReport> {
    validate_presentation(p)?;
    let k = p.ngens();
    let mut checks = Vec::new();
    if tau.signs.len() != k {
        return Err(InvolutionError::InvalidDescriptor(format!(
            "{} signs for {k} generators",
            tau.signs.len()
        )));
    }
    let fixed = &tau.center_action.fixed_lattice;
    if fixed.ambient_rank() != p.rank() || !fixed.is_sublattice_of(&p.center) {
        return Err(InvolutionError::InvalidDescriptor(
            "Gamma_R is not contained in Gamma_T".into(),
        ));
    }
    let idx = index(&p.center, fixed)
        .map_err(|_| InvolutionError::InvalidDescriptor("Gamma_R has infinite index in Gamma_T".into()))?;
    let idx = idx.to_i64().unwrap_or(i64::MAX);
    if idx != 1 && idx != 2 {
        return Err(InvolutionError::InvalidDescriptor(format!(
            "|Gamma_T : Gamma_R| = {idx}"
        )));
    }
    checks.push(format!("|Gamma_T : Gamma_R| = {idx}"));

    let action = root_action(p, tau)?;
    if let Some((m, u)) = action {
        for (i, &eps) in tau.signs.iter().enumerate() {
            if modp((1 + u as i128) * eps as i128, m) != 0 {
                return Err(InvolutionError::NotAnInvolution(format!(
                    "tau^2 moves generator {}",
                    p.generators[i].name
                )));
            }
        }
        checks.push("tau^2 = id on generators".to_string());
        for i in 0..k {
            for j in 0..k {
                let b = p.commutation[i][j] as i128;
                if modp(u as i128 * b + b, m) != 0 {
                    return Err(InvolutionError::CommutationIncompatible(i, j));
                }
            }
        }
        checks.push("tau_bar(beta) = beta^-1".to_string());
        if u != 1 % m && !tau.center_action.residue_nontrivial {
            return Err(InvolutionError::KindMismatch(
                "tau_bar moves roots of unity but is declared trivial on T_0".into(),
            ));
        }
    } else if tau.signs.iter().any(|&s| s != 0) || p.commutation.iter().flatten().any(|&b| b != 0) {
        return Err(AlgebraError::InsufficientResidueData("residue.torsion".into()).into());
    }
    let nontrivial = tau.center_action.residue_nontrivial || idx == 2;
    let tr_case = match tau.kind {
        InvolutionKind::Unitary => {
            if !nontrivial {
                return Err(InvolutionError::KindMismatch(
                    "unitary involution with trivial action on the center".into(),
                ));
            }
            if tau.center_action.residue_nontrivial && idx == 2 {
                return Err(InvolutionError::KindMismatch(
                    "center moved both on T_0 and on Gamma_T: [T:R] would exceed 2".into(),
                ));
            }
            Some(if idx == 1 {
                TrCase::TrUnramified
            } else {
                TrCase::TrTotallyRamified
            })
        }
        InvolutionKind::FirstKind => {
            if nontrivial {
                return Err(InvolutionError::KindMismatch(
                    "first-kind involution must fix the center".into(),
                ));
            }
            None
        }
    };
    checks.push(format!("kind {:?} consistent with center action", tau.kind));
    Ok(InvolutionReport { tr_case, checks })
}

pub fn detect_tr_case(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<TrCase> {
    if tau.kind != InvolutionKind::Unitary {
        return Err(InvolutionError::KindMismatch(
            "case detection needs a unitary involution".into(),
        ));
    }
    let fixed = &tau.center_action.fixed_lattice;
    if !fixed.is_sublattice_of(&p.center) {
        return Err(InvolutionError::InvalidDescriptor(
            "Gamma_R is not contained in Gamma_T".into(),
        ));
    }
    match index(&p.center, fixed).ok().and_then(|i| i.to_i64()) {
        Some(1) => Ok(TrCase::TrUnramified),
        Some(2) => Ok(TrCase::TrTotallyRamified),
        other => Err(InvolutionError::InvalidDescriptor(format!(
            "|Gamma_T : Gamma_R| = {}",
            other.map(|i| i.to_string()).unwrap_or_else(|| "infinite".into())
        ))),
    }
}

/// Descriptor of `tau o phi_t`, where `phi_t(x) = t x t^-1`.
pub fn twist(p: &AlgebraPresentation, tau: &InvolutionDescriptor, t: &Monomial) -> Result<InvolutionDescriptor> {
    let k = p.ngens();
    if t.exps.len() != k {
        return Err(InvolutionError::InvalidDescriptor(
            "monomial length differs from generator count".into(),
        ));
    }
    let Some((m, u)) = root_action(p, tau)? else {
        if t.exps.iter().all(|&c| c == 0) {
            return Ok(tau.clone());
        }
        return Err(AlgebraError::InsufficientResidueData("residue.torsion".into()).into());
    };
    let ctx = p.monomials()?;
    let ratio = ctx.mul(&apply_tau(&ctx, u, &tau.signs, t), &ctx.inverse(t));
    if ratio.exps.iter().any(|&c| c != 0) {
        return Err(InvolutionError::NotCentralRatio);
    }
    // tau(t^-1 x_i t) = tau(zeta^(-b_i) x_i) with b_i = sum_j c_j beta_ji
    let signs = (0..k)
        .map(|i| {
            let b: i128 = (0..k).map(|j| t.exps[j] as i128 * p.commutation[j][i] as i128).sum();
            modp(tau.signs[i] as i128 - b, m)
        })
        .collect();
    Ok(InvolutionDescriptor {
        kind: tau.kind,
        center_action: tau.center_action.clone(),
        signs,
    })
}

/// Exponent vector `c` with `sum c_i deg(x_i) = d`, if one exists.
pub fn monomial_of_degree(p: &AlgebraPresentation, d: &Degree) -> Result<Vec<i64>> {
    let sol =
        solve_left(&p.degree_matrix(), &d.to_ints()).ok_or_else(|| InvolutionError::NotRepresentable(d.0.clone()))?;
    sol.iter()
        .map(|x| x.to_i64().ok_or_else(|| InvolutionError::NotRepresentable(d.0.clone())))
        .collect()
}

/// `zeta^lambda x^c` with `tau` fixing it, solving `(1 - u) lambda = s(c)`.
pub fn symmetric_monomial(ctx: &MonomialContext, u: i64, signs: &[i64], exps: &[i64]) -> Option<Monomial> {
    let base = Monomial {
        scalar: 0,
        exps: exps.to_vec(),
    };
    let s = apply_tau(ctx, u, signs, &base).scalar;
    let lambda = solve_congruence(1 - u, s, ctx.modulus)?;
    Some(Monomial {
        scalar: lambda,
        exps: exps.to_vec(),
    })
}

pub fn symmetric_transversal(
    p: &AlgebraPresentation,
    tau: &InvolutionDescriptor,
    degrees: &[Degree],
) -> Result<Vec<Monomial>> {
    let report = validate_involution(p, tau)?;
    if report.tr_case != Some(TrCase::TrUnramified) {
        return Err(InvolutionError::CaseMismatch(
            "symmetric transversal needs T/R unramified".into(),
        ));
    }
    let k = p.ngens();
    let action = root_action(p, tau)?;
    let mut out = Vec::with_capacity(degrees.len());
    for d in degrees {
        let c = monomial_of_degree(p, d)?;
        match action {
            Some((_, u)) => {
                let ctx = p.monomials()?;
                out.push(
                    symmetric_monomial(&ctx, u, &tau.signs, &c)
                        .ok_or_else(|| InvolutionError::NoSymmetricElement(d.0.clone()))?,
                );
            }
            None => out.push(Monomial { scalar: 0, exps: c }),
        }
        debug_assert_eq!(out.last().map(|m| m.exps.len()), Some(k));
    }
    Ok(out)
}

/// Quaternion factors of `E` when `E` is totally ramified over `R`: pairs
/// `(i, j)` with `i j = -j i`, commuting with every other pair.
pub fn armature_decomposition(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<Vec<ArmatureFactor>> {
    let report = validate_involution(p, tau)?;
    if report.tr_case != Some(TrCase::TrTotallyRamified) {
        return Err(InvolutionError::CaseMismatch(
            "armature decomposition needs T/R totally ramified".into(),
        ));
    }
    let c = classify(p)?;
    if c.tag != CaseTag::TotallyRamified {
        return Err(InvolutionError::CaseMismatch(format!(
            "E is {}, not totally ramified over T",
            c.tag.name()
        )));
    }
    let sp = symplectic_pairing(p)?;
    if sp.e > 2 {
        return Err(InvolutionError::CaseMismatch(format!(
            "Gamma_E/Gamma_T has exponent {}",
            sp.e
        )));
    }
    let factors = armature_lift(p, &symplectic_basis(&sp)?)?;
    let ctx = p.monomials()?;
    let half = ctx.modulus / 2;
    for (a, f) in factors.iter().enumerate() {
        if ctx.modulus % 2 != 0 || f.commutation != half {
            return Err(InvolutionError::CaseMismatch(format!(
                "factor {a}: i and j do not anticommute"
            )));
        }
        if !p.center.contains_degree(&f.i_degree.scale(2)) || !p.center.contains_degree(&f.j_degree.scale(2)) {
            return Err(InvolutionError::CaseMismatch(format!(
                "factor {a}: squares are not central"
            )));
        }
        for g in &factors[a + 1..] {
            for x in [&f.i, &f.j] {
                for y in [&g.i, &g.j] {
                    if ctx.commutator(&x.exps, &y.exps) != 0 {
                        return Err(InvolutionError::CaseMismatch("factors do not commute".into()));
                    }
                }
            }
        }
    }
    let degs: Vec<Degree> = factors
        .iter()
        .flat_map(|f| [f.i_degree.clone(), f.j_degree.clone()])
        .collect();
    let span = GradeLattice::from_degrees(p.rank(), &degs)?.join(&p.center)?;
    if !p.grade_group()?.is_sublattice_of(&span) {
        return Err(InvolutionError::CaseMismatch(
            "factor degrees do not generate Gamma_E".into(),
        ));
    }
    Ok(factors)
}

// ---------------------------------------------------------------------------
// generalized dihedral

/// Extension of `<tau_bar>` of order 2 by an abelian `H`.
#[derive(Clone, Debug)]
pub struct GaloisDatum {
    pub h_orders: Vec<i64>,
    /// Conjugation by the `tau_bar` coset, as a matrix on the generators of `H`.
    pub tau_action: IntMatrix,
    /// The element `tau_bar^2` of `H`.
    pub tau_square: Vec<i64>,
}

impl GaloisDatum {
    pub fn split(h_orders: &[i64], tau_action: IntMatrix) -> Self {
        GaloisDatum {
            h_orders: h_orders.to_vec(),
            tau_action,
            tau_square: vec![0; h_orders.len()],
        }
    }

    pub fn inversion(h_orders: &[i64]) -> Self {
        let k = h_orders.len();
        let mut a = IntMatrix::zeros(k, k);
        for i in 0..k {
            a.set(i, i, Int::from(-1));
        }
        Self::split(h_orders, a)
    }

    pub fn identity(h_orders: &[i64]) -> Self {
        Self::split(h_orders, IntMatrix::identity(h_orders.len()))
    }

    pub fn group(&self) -> FGAbGroup {
        FGAbGroup::from_orders(&self.h_orders)
    }

    pub fn action(&self) -> Result<GroupHom> {
        let h = self.group();
        Ok(GroupHom::new(h.clone(), h, self.tau_action.clone())?)
    }

    /// The data define a group: the action is an involutive automorphism fixing `tau_bar^2`.
    pub fn validate(&self) -> Result<()> {
        let h = self.group();
        let act = self.action()?;
        if !act.then(&act)?.equals(&GroupHom::identity(&h)) {
            return Err(InvolutionError::InvalidDescriptor(
                "tau action is not an involution".into(),
            ));
        }
        let sq: Vec<Int> = self.tau_square.iter().map(|&x| Int::from(x)).collect();
        if sq.len() != h.ngens() || !h.elem_eq(&act.apply(&sq), &sq) {
            return Err(InvolutionError::InvalidDescriptor(
                "tau action must fix tau_bar^2".into(),
            ));
        }
        Ok(())
    }
}

/// True when every element outside `H` has order 2: `tau_bar^2 = 1` and the
/// action is inversion.
pub fn gendihedral_check(g: &GaloisDatum) -> Result<bool> {
    g.validate()?;
    let h = g.group();
    let sq: Vec<Int> = g.tau_square.iter().map(|&x| Int::from(x)).collect();
    if !h.is_zero(&sq) {
        return Ok(false);
    }
    let act = g.action()?;
    Ok(act.equals(&GroupHom::scalar(&h, -1)))
}

pub fn zero_signs(k: usize) -> Vec<i64> {
    vec![0; k]
}
