//! Reduced Whitehead groups `SK1(E)` and reduced unitary Whitehead groups
//! `SK1(E, tau)`, one calculator per ramification case.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    classify, mu_n_of, AbstractResidueDatum, AlgebraError, AlgebraPresentation, CaseTag, Classification, CocycleSource,
    ResidueDatum, ResidueExtension, RootsEmbedding, TorsionDatum,
};
use crate::fgab::{
    full_product, lembe_product, render_invariants, subquotient, FGAbGroup, FgabError, GroupHom, Int, Subgroup,
};
use crate::grading::{quotient_lattice, GradingError};
use crate::involution::{detect_tr_case, validate_involution, InvolutionDescriptor, InvolutionError, TrCase};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkError {
    #[error("case mismatch: {0}")]
    CaseMismatch(String),
    #[error("roots of unity in T_0 are not described by the residue datum")]
    ResidueTorsionUnknown,
    #[error("tau_bar does not invert mu_{0}")]
    MuEViolation(i64),
    #[error("E = T: there is no noncentral generator")]
    EEqualsT,
    #[error("missing subgroup data: {0}")]
    MissingSubgroupData(String),
    #[error("Gamma_E/Gamma_T is not cyclic: {0}")]
    NotCyclicRamification(String),
    #[error("inconsistent residue model: {0}")]
    InconsistentModel(String),
    #[error("exponent law violated: exponent {exponent} does not divide n = {n}")]
    ExponentLawViolated { exponent: String, n: i64 },
    #[error("internal invariant violated: {0}")]
    InvariantBreach(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
    #[error(transparent)]
    Group(#[from] FgabError),
    #[error(transparent)]
    Grading(#[from] GradingError),
}

pub type Result<T> = std::result::Result<T, SkError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    PropTotal,
    PropCompletely,
    CorUnramified,
    CorSeses,
    PropCyclic,
    /// Residue algebra is a field.
    PropCyclicField,
    ThMsem,
    ThSktotal,
    NonUnitaryTotallyRamified,
    /// Non-unitary cyclic formula, evaluated in an abelian model.
    NonUnitaryCyclic,
}

impl TheoremTag {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremTag::PropTotal => "PropTotal",
            TheoremTag::PropCompletely => "PropCompletely",
            TheoremTag::CorUnramified => "CorUnramified",
            TheoremTag::CorSeses => "CorSeses",
            TheoremTag::PropCyclic => "PropCyclic",
            TheoremTag::PropCyclicField => "PropCyclicField",
            TheoremTag::ThMsem => "ThMsem",
            TheoremTag::ThSktotal => "ThSktotal",
            TheoremTag::NonUnitaryTotallyRamified => "NonUnitaryTotallyRamified",
            TheoremTag::NonUnitaryCyclic => "NonUnitaryCyclic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputsDigest {
    pub n: i64,
    pub e: i64,
    pub partial: i64,
    pub case: String,
    pub tr_case: Option<String>,
    pub residue_model: String,
}

#[derive(Clone, Debug)]
pub struct SKResult {
    pub group: FGAbGroup,
    pub theorem_tag: TheoremTag,
    pub digest: InputsDigest,
    pub checks: Vec<String>,
}

impl SKResult {
    pub fn invariant_factors(&self) -> Vec<Int> {
        self.group.invariant_factors()
    }

    pub fn rendered(&self) -> String {
        render_invariants(&self.invariant_factors())
    }

    pub fn order(&self) -> Int {
        self.group.order().expect("SK groups are finite")
    }
}

fn residue_model_name(res: &ResidueDatum) -> &'static str {
    match res {
        ResidueDatum::RootsOfUnity(_) => "roots-of-unity",
        ResidueDatum::FiniteField(_) => "finite-field",
        ResidueDatum::Abstract(_) => "abstract",
    }
}

fn digest(p: &AlgebraPresentation, c: &Classification, tr: Option<TrCase>) -> InputsDigest {
    InputsDigest {
        n: c.n,
        e: c.e,
        partial: c.partial,
        case: c.tag.name().to_string(),
        tr_case: tr.map(|t| t.name().to_string()),
        residue_model: residue_model_name(&p.residue).to_string(),
    }
}

/// Checks that the exponent of `g` divides `n` and packages the result.
fn finish(group: FGAbGroup, tag: TheoremTag, digest: InputsDigest, mut checks: Vec<String>) -> Result<SKResult> {
    if !group.is_finite() {
        return Err(SkError::InvariantBreach(format!("result {group} is infinite")));
    }
    let exp = group.exponent();
    if !(Int::from(digest.n) % &exp).is_zero() {
        return Err(SkError::ExponentLawViolated {
            exponent: exp.to_string(),
            n: digest.n,
        });
    }
    checks.push(format!("exponent {exp} divides n = {}", digest.n));
    Ok(SKResult {
        group,
        theorem_tag: tag,
        digest,
        checks,
    })
}

fn abstract_datum(p: &AlgebraPresentation) -> Result<&AbstractResidueDatum> {
    p.residue
        .as_abstract()
        .ok_or_else(|| SkError::MissingSubgroupData("an abstract residue model is required".into()))
}

fn unitary_case(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<TrCase> {
    let rep = validate_involution(p, tau)?;
    rep.tr_case
        .ok_or_else(|| SkError::CaseMismatch("involution is not unitary".into()))
}

fn require_tr_unramified(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<()> {
    match unitary_case(p, tau)? {
        TrCase::TrUnramified => Ok(()),
        TrCase::TrTotallyRamified => Err(SkError::CaseMismatch(
            "T is totally ramified over R; expected T/R unramified".into(),
        )),
    }
}

fn galois_group(ext: Option<&ResidueExtension>) -> (FGAbGroup, Vec<i64>) {
    let orders = ext.map(|e| e.galois_orders.clone()).unwrap_or_default();
    (FGAbGroup::from_orders(&orders), orders)
}

/// `Sigma_(h tau_bar)` for `h` given by exponents on the Galois generators.
fn sigma_for<'a>(d: &'a AbstractResidueDatum, orders: &[i64], h: &[Int]) -> Result<&'a Subgroup> {
    let key: Vec<i64> = h
        .iter()
        .zip(orders)
        .map(|(x, &o)| x.mod_floor(&Int::from(o)).to_i64().expect("bounded"))
        .collect();
    d.sigma_subgroups
        .get(&key)
        .ok_or_else(|| SkError::MissingSubgroupData(format!("residue.sigma_subgroups[{key:?}]")))
}

/// Product of the `Sigma_(h tau_bar)`, through generator tuples when `check_lembe` is set.
fn sigma_product(
    d: &AbstractResidueDatum,
    ext: Option<&ResidueExtension>,
    check_lembe: bool,
    checks: &mut Vec<String>,
) -> Result<Subgroup> {
    let (h, orders) = galois_group(ext);
    // diagonal coordinates on H, independent of the SNF basis
    let mut all = Vec::new();
    let total: i64 = orders.iter().product();
    for idx in 0..total {
        let mut rest = idx;
        let mut v = Vec::with_capacity(orders.len());
        for &o in &orders {
            v.push(Int::from(rest % o));
            rest /= o;
        }
        all.push(v);
    }
    let mut family: BTreeMap<Vec<i64>, Subgroup> = BTreeMap::new();
    for v in &all {
        let key: Vec<i64> = v.iter().map(|x| x.to_i64().expect("small")).collect();
        family.insert(key, sigma_for(d, &orders, v)?.clone());
    }
    let w = |x: &[Int]| -> Subgroup {
        let key: Vec<i64> = x
            .iter()
            .zip(&orders)
            .map(|(a, &o)| a.mod_floor(&Int::from(o)).to_i64().expect("bounded"))
            .collect();
        family[&key].clone()
    };
    if check_lembe {
        let gens: Vec<Vec<Int>> = (0..orders.len()).map(|i| h.generator(i)).collect();
        let p = lembe_product(&d.u, &h, &w, &gens, true)?;
        checks.push(format!(
            "containment hypothesis holds; product over {} generator tuples",
            1 << gens.len()
        ));
        Ok(p)
    } else {
        let p = full_product(&d.u, &FGAbGroup::from_orders(&orders), &w)?;
        checks.push(format!("product over all {total} elements of H"));
        Ok(p)
    }
}

fn quotient_checked(num: &Subgroup, den: &Subgroup, what: &str) -> Result<FGAbGroup> {
    if !den.is_subgroup_of(num) {
        return Err(SkError::InconsistentModel(format!(
            "{what}: denominator is not inside numerator"
        )));
    }
    Ok(subquotient(num, den)?)
}

// ---------------------------------------------------------------------------
// totally ramified

fn totally_ramified_classification(p: &AlgebraPresentation) -> Result<Classification> {
    let c = classify(p)?;
    if c.tag != CaseTag::TotallyRamified {
        return Err(SkError::CaseMismatch(format!(
            "expected TotallyRamified, found {}",
            c.tag.name()
        )));
    }
    Ok(c)
}

fn torsion_modulus(p: &AlgebraPresentation) -> Result<i64> {
    p.residue.root_modulus().map_err(|_| SkError::ResidueTorsionUnknown)
}

/// `mu_n(T_0) / mu_e`.
pub fn sk1_totally_ramified(p: &AlgebraPresentation) -> Result<SKResult> {
    let c = totally_ramified_classification(p)?;
    let m = torsion_modulus(p)?;
    let mu = mu_n_of(&p.residue, c.n)?;
    let g = mu.order;
    if g % c.e != 0 {
        return Err(SkError::InvariantBreach(format!(
            "e = {} does not divide |mu_n(T_0)| = {g}",
            c.e
        )));
    }
    let mu_e = mu.group.subgroup_generated(&[vec![Int::from(g / c.e)]])?;
    let group = mu.group.quotient(&mu_e)?;
    let checks = vec![format!("|mu_n(T_0)| = gcd({}, {m}) = {g}", c.n)];
    finish(
        group,
        TheoremTag::NonUnitaryTotallyRamified,
        digest(p, &c, None),
        checks,
    )
}

/// `{w in mu_n(T_0) : tau(w) = w^-1} / mu_e`.
pub fn sk1u_totally_ramified(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<SKResult> {
    let c = totally_ramified_classification(p)?;
    require_tr_unramified(p, tau)?;
    let m = torsion_modulus(p)?;
    let u = p.residue.tau_multiplier()?;
    let mu = mu_n_of(&p.residue, c.n)?;
    let g = mu.order;
    let skew = GroupHom::scalar(&mu.group, u + 1).kernel();
    let mu_e = mu.group.subgroup_generated(&[vec![Int::from(g / c.e)]])?;
    if !mu_e.is_subgroup_of(&skew) {
        return Err(SkError::MuEViolation(c.e));
    }
    let group = subquotient(&skew, &mu_e)?;
    let mut checks = vec![
        format!("|mu_n(T_0)| = gcd({}, {m}) = {g}", c.n),
        format!("tau_bar inverts mu_{}", c.e),
    ];
    let plain = sk1_totally_ramified(p)?;
    let (ou, op) = (group.order()?, plain.order());
    if !(&op % &ou).is_zero() {
        return Err(SkError::InvariantBreach(format!(
            "|SK1(E,tau)| = {ou} does not divide |SK1(E)| = {op}"
        )));
    }
    checks.push(format!("|SK1(E,tau)| = {ou} divides |SK1(E)| = {op}"));
    if c.e % 2 == 1 {
        if ou != op {
            return Err(SkError::InvariantBreach(format!(
                "e odd but |SK1(E,tau)| = {ou} != {op}"
            )));
        }
        checks.push("e odd: SK1(E,tau) = SK1(E)".to_string());
    }
    finish(
        group,
        TheoremTag::ThSktotal,
        digest(p, &c, Some(TrCase::TrUnramified)),
        checks,
    )
}

/// T totally ramified over R: the group is trivial.
pub fn sk1u_t_totally_ramified(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<SKResult> {
    let tr = unitary_case(p, tau)?;
    if tr != TrCase::TrTotallyRamified {
        return Err(SkError::CaseMismatch(
            "T is unramified over R; expected T/R totally ramified".into(),
        ));
    }
    let _ = detect_tr_case(p, tau)?;
    let ge = p.grade_group()?;
    let index = quotient_lattice(&ge, &p.center)?.order()?;
    let (ind, zdeg) = match (&p.residue_extension, &p.residue) {
        (Some(ext), _) => (ext.ind_e0, ext.center_degree),
        (None, ResidueDatum::Abstract(_)) => {
            return Err(AlgebraError::InsufficientResidueData("residue_extension".into()).into())
        }
        (None, _) => (1, 1),
    };
    if index.is_one() && ind == 1 && zdeg == 1 {
        return Err(SkError::EEqualsT);
    }
    let c = classify(p)?;
    let tag = if ind == 1 && zdeg == 1 {
        TheoremTag::PropTotal
    } else {
        TheoremTag::PropCompletely
    };
    let checks = vec!["Sigma_tau = E^*".to_string()];
    finish(FGAbGroup::trivial(), tag, digest(p, &c, Some(tr)), checks)
}

// ---------------------------------------------------------------------------
// unramified, semiramified, cyclic

/// `Sigma'_0 / Sigma_0` with `Sigma'_0` the norm preimage of `R_0`.
pub fn sk1u_unramified(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<SKResult> {
    let c = classify(p)?;
    if c.tag != CaseTag::Unramified {
        return Err(SkError::CaseMismatch(format!(
            "expected Unramified, found {}",
            c.tag.name()
        )));
    }
    require_tr_unramified(p, tau)?;
    let d = abstract_datum(p)?;
    let num = d.norm.preimage(&d.r0_part)?;
    let (_, orders) = galois_group(p.residue_extension.as_ref());
    let den = sigma_for(d, &orders, &vec![Int::zero(); orders.len()])?;
    let group = quotient_checked(&num, den, "Sigma'_0 / Sigma_0")?;
    let checks = vec!["Sigma'_0 = preimage of R_0 under the norm".to_string()];
    finish(
        group,
        TheoremTag::CorUnramified,
        digest(p, &c, Some(TrCase::TrUnramified)),
        checks,
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProductOptions {
    /// Verify the lemma hypothesis and multiply only over generator tuples.
    pub check_lembe: bool,
    pub representative_doubling: bool,
}

/// `{a : N(a) in R_0} / prod_h Sigma_(h tau_bar)`.
pub fn sk1u_semiramified(
    p: &AlgebraPresentation,
    tau: &InvolutionDescriptor,
    opts: ProductOptions,
) -> Result<SKResult> {
    let c = classify(p)?;
    if c.tag != CaseTag::Semiramified {
        return Err(SkError::CaseMismatch(format!(
            "expected Semiramified, found {}",
            c.tag.name()
        )));
    }
    require_tr_unramified(p, tau)?;
    let d = abstract_datum(p)?;
    let mut checks = Vec::new();
    let num = d.norm.preimage(&d.r0_part)?;
    let den = sigma_product(d, p.residue_extension.as_ref(), opts.check_lembe, &mut checks)?;
    let group = quotient_checked(&num, &den, "semiramified quotient")?;
    finish(
        group,
        TheoremTag::CorSeses,
        digest(p, &c, Some(TrCase::TrUnramified)),
        checks,
    )
}

fn cyclic_setup(p: &AlgebraPresentation) -> Result<Classification> {
    let c = classify(p)?;
    if c.partial != 1 {
        return Err(SkError::CaseMismatch(format!(
            "cyclic formula needs partial = 1, found {}",
            c.partial
        )));
    }
    let q = p.degree_quotient()?;
    if !q.is_cyclic() {
        return Err(SkError::NotCyclicRamification(q.to_string()));
    }
    Ok(c)
}

/// Key of the chosen generator `sigma` of the cyclic Galois group.
fn sigma_key(ext: Option<&ResidueExtension>) -> Result<Vec<Int>> {
    let orders = ext.map(|e| e.galois_orders.clone()).unwrap_or_default();
    let nontrivial: Vec<usize> = (0..orders.len()).filter(|&i| orders[i] != 1).collect();
    if nontrivial.len() > 1 {
        return Err(SkError::NotCyclicRamification(
            "Galois group has several factors".into(),
        ));
    }
    Ok((0..orders.len())
        .map(|i| {
            if nontrivial.contains(&i) {
                Int::one()
            } else {
                Int::zero()
            }
        })
        .collect())
}

/// `{a : N(Nrd(a)) in R_0} / (Sigma_tau Sigma_(sigma tau))`; trivial when `E_0` is a field.
pub fn sk1u_cyclic(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<SKResult> {
    let c = cyclic_setup(p)?;
    require_tr_unramified(p, tau)?;
    let dg = digest(p, &c, Some(TrCase::TrUnramified));
    if let ResidueDatum::Abstract(d) = &p.residue {
        if d.e0_is_field {
            return finish(
                FGAbGroup::trivial(),
                TheoremTag::PropCyclicField,
                dg,
                vec!["E_0 is a field".into()],
            );
        }
    }
    let d = abstract_datum(p)?;
    let (_, orders) = galois_group(p.residue_extension.as_ref());
    let sigma = sigma_key(p.residue_extension.as_ref())?;
    let zero = vec![Int::zero(); orders.len()];
    let num = d.norm.preimage(&d.r0_part)?;
    let den = sigma_for(d, &orders, &zero)?.join(sigma_for(d, &orders, &sigma)?)?;
    let group = quotient_checked(&num, &den, "cyclic quotient")?;
    finish(
        group,
        TheoremTag::PropCyclic,
        dg,
        vec!["denominator Sigma_tau Sigma_(sigma tau)".into()],
    )
}

/// `{a : N(Nrd(a)) = 1} / {c^(sigma - 1)}` in an abelian model, where the
/// commutator subgroup of `E_0^*` is trivial.
pub fn sk1_cyclic(p: &AlgebraPresentation) -> Result<SKResult> {
    let c = cyclic_setup(p)?;
    let d = abstract_datum(p)?;
    let num = d.norm.kernel();
    let den = match d.galois_gens.first() {
        Some(s) => s.sub(&GroupHom::identity(&d.u))?.image(),
        None => d.u.trivial_subgroup(),
    };
    let group = quotient_checked(&num, &den, "non-unitary cyclic quotient")?;
    let checks = vec!["abelian model: [E_0^*, E_0^*] = 1".to_string()];
    finish(group, TheoremTag::NonUnitaryCyclic, digest(p, &c, None), checks)
}

// ---------------------------------------------------------------------------
// conorms

#[derive(Clone, Debug)]
pub struct ConormGroups {
    pub n: Subgroup,
    pub w: Subgroup,
    pub p: FGAbGroup,
    pub n_tau: Subgroup,
    pub w_tau: Subgroup,
    pub pu_tau: FGAbGroup,
}

/// Projective conorm groups for `sigma` acting on the center of the model.
pub fn conorm_groups(d: &AbstractResidueDatum, sigma: &GroupHom) -> Result<ConormGroups> {
    let cd = d
        .conorm
        .as_ref()
        .ok_or_else(|| SkError::MissingSubgroupData("residue.conorm".into()))?;
    let z = &cd.center;
    if sigma.source() != z || sigma.target() != z {
        return Err(SkError::InconsistentModel(
            "sigma must be an endomorphism of the center".into(),
        ));
    }
    let sig_minus_one = sigma.sub(&GroupHom::identity(z))?;
    let nrd_image = cd.nrd.image();
    let n = sig_minus_one.preimage(&nrd_image)?;
    let w = cd.t0_part.join(&nrd_image)?;
    let p = quotient_checked(&n, &w, "conorm group P")?;
    let sigma_tau = cd.tau_center.then(sigma)?;
    let one_minus = GroupHom::identity(z).sub(&sigma_tau)?;
    let n_tau = sig_minus_one.preimage(&one_minus.image_of(&nrd_image)?)?;
    let sigma_tau_u = d
        .sigma_subgroups
        .get(&vec![0; d.galois_gens.len()])
        .ok_or_else(|| SkError::MissingSubgroupData("residue.sigma_subgroups[identity]".into()))?;
    let w_tau = cd.t0_part.join(&cd.nrd.image_of(sigma_tau_u)?)?;
    let pu_tau = quotient_checked(&n_tau, &w_tau, "unitary conorm group PU_tau")?;
    Ok(ConormGroups {
        n,
        w,
        p,
        n_tau,
        w_tau,
        pu_tau,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSequenceReport {
    pub sk_order: String,
    pub image_order: String,
    pub pu_tau_order: String,
    pub order_bound: bool,
    pub well_defined: bool,
    pub exact_middle: bool,
    pub surjective: bool,
    pub sigma_tau_identity: bool,
    pub columns_square: bool,
}

impl ExactSequenceReport {
    pub fn passed(&self) -> bool {
        self.order_bound
            && self.well_defined
            && self.exact_middle
            && self.surjective
            && self.sigma_tau_identity
            && self.columns_square
    }
}

/// Checks `SK1(E_0, sigma tau) -> SK1(E, tau) -> PU_tau -> 1` in the model.
/// `sigma_u` is the generator `sigma` on `U`; `sigma` its restriction to the center.
pub fn cyclic_exact_sequence_check(
    d: &AbstractResidueDatum,
    sigma_u: &GroupHom,
    sigma: &GroupHom,
) -> Result<ExactSequenceReport> {
    let cg = conorm_groups(d, sigma)?;
    let cd = d.conorm.as_ref().expect("checked by conorm_groups");
    let z = &cd.center;
    let key0 = vec![0; d.galois_gens.len()];
    let mut key1 = key0.clone();
    if let Some(k) = key1.first_mut() {
        *k = 1;
    }
    let missing = |k: &Vec<i64>| SkError::MissingSubgroupData(format!("residue.sigma_subgroups[{k:?}]"));
    let s_tau = d.sigma_subgroups.get(&key0).ok_or_else(|| missing(&key0))?;
    let s_sigma_tau = d.sigma_subgroups.get(&key1).ok_or_else(|| missing(&key1))?;

    let num = d.norm.preimage(&d.r0_part)?;
    let den = s_tau.join(s_sigma_tau)?;
    let sk = quotient_checked(&num, &den, "SK1(E,tau)")?;

    let sig_minus_one = sigma.sub(&GroupHom::identity(z))?;
    let sigma_tau_z = cd.tau_center.then(sigma)?;
    let one_minus_z = GroupHom::identity(z).sub(&sigma_tau_z)?;
    // Sigma'_(sigma tau)(E_0): reduced norm fixed by sigma tau
    let sigma_tau_fixed = sigma_tau_z.sub(&GroupHom::identity(z))?.kernel();
    let s_prime = cd.nrd.preimage(&sigma_tau_fixed)?;
    let image = s_prime.intersection(&num)?.join(&den)?;
    let image_group = quotient_checked(&image, &den, "image of SK1(E_0, sigma tau)")?;

    // kernel of f: a with (1 - sigma tau) Nrd(a) in (sigma - 1) W_tau
    let f_lift = cd.nrd.then(&one_minus_z)?;
    let target = sig_minus_one.image_of(&cg.w_tau)?;
    let ker_f = f_lift.preimage(&target)?.intersection(&num)?.join(&den)?;
    let well_defined = den.is_subgroup_of(&f_lift.preimage(&target)?);
    let exact_middle = ker_f.same_as(&image);
    // image of f: alpha with (sigma - 1) alpha in (1 - sigma tau) Nrd(num)
    let reached = sig_minus_one.preimage(&f_lift.image_of(&num)?)?.join(&cg.w_tau)?;
    let surjective = reached.same_as(&cg.n_tau.join(&cg.w_tau)?);

    let sk_order = sk.order()?;
    let image_order = image_group.order()?;
    let pu_order = cg.pu_tau.order()?;
    let order_bound = sk_order <= &image_order * &pu_order;

    // (1 - sigma tau)(sigma - 1) = (sigma - 1)(1 + tau)
    let one_plus_tau = GroupHom::identity(z).add(&cd.tau_center)?;
    let sigma_tau_identity = sig_minus_one
        .then(&one_minus_z)?
        .equals(&one_plus_tau.then(&sig_minus_one)?);

    // each column composite acts as squaring
    let sigma_tau_u = d.tau_bar.then(sigma_u)?;
    let one_minus_u = GroupHom::identity(&d.u).sub(&sigma_tau_u)?;
    let twice_u = GroupHom::scalar(&d.u, 2);
    let diff_u = one_minus_u.sub(&twice_u)?;
    let col_left = s_prime
        .generators()
        .iter()
        .all(|g| s_sigma_tau.contains(&diff_u.apply(g)));
    let col_mid = num.generators().iter().all(|g| den.contains(&diff_u.apply(g)));
    let diff_z = one_plus_tau.sub(&GroupHom::scalar(z, 2))?;
    let col_right = cg
        .n_tau
        .generators()
        .iter()
        .all(|g| cg.w_tau.contains(&diff_z.apply(g)));

    Ok(ExactSequenceReport {
        sk_order: sk_order.to_string(),
        image_order: image_order.to_string(),
        pu_tau_order: pu_order.to_string(),
        order_bound,
        well_defined,
        exact_middle,
        surjective,
        sigma_tau_identity,
        columns_square: col_left && col_mid && col_right,
    })
}

// ---------------------------------------------------------------------------
// general formula

fn double(q: &FGAbGroup, s: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let mut seen: BTreeSet<Vec<Int>> = s.iter().cloned().collect();
    let mut out = s.to_vec();
    for a in s {
        for b in s {
            let c = q.add(a, b);
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
    }
    out
}

/// Representative sets of `Gamma_E / Gamma_T`: `{0}` plus generator classes,
/// then repeatedly `S + S` until the set stops growing.
fn doubled_sets(q: &FGAbGroup) -> Result<Vec<Vec<Vec<Int>>>> {
    let mut s: Vec<Vec<Int>> = vec![q.zero()];
    for i in 0..q.ngens() {
        let g = q.reduce(&q.generator(i));
        if !s.contains(&g) {
            s.push(g);
        }
    }
    let mut rounds = vec![s];
    loop {
        let last = rounds.last().expect("nonempty");
        let next = double(q, last);
        if next.len() == last.len() {
            break;
        }
        rounds.push(next);
    }
    if Int::from(rounds.last().expect("nonempty").len()) != q.order()? {
        return Err(SkError::InvariantBreach(
            "representatives do not cover Gamma_E/Gamma_T".into(),
        ));
    }
    Ok(rounds)
}

fn cocycle_subgroup(
    p: &AlgebraPresentation,
    d: &AbstractResidueDatum,
    q: &FGAbGroup,
    reps: &[Vec<Int>],
) -> Result<Subgroup> {
    let mut gens = BTreeSet::new();
    match &d.cocycle {
        None => {
            if !q.is_trivial() {
                return Err(SkError::MissingSubgroupData("residue.cocycle".into()));
            }
        }
        Some(CocycleSource::Table(t)) => {
            for a in reps {
                for b in reps {
                    let key = (q.canonical(a), q.canonical(b));
                    let v = t
                        .get(&key)
                        .ok_or_else(|| SkError::MissingSubgroupData(format!("residue.cocycle value at {:?}", key)))?;
                    gens.insert(d.u.reduce(v));
                }
            }
        }
        Some(CocycleSource::Commutators) => {
            let emb = d
                .roots_embedding
                .as_ref()
                .ok_or_else(|| SkError::MissingSubgroupData("residue.roots_embedding".into()))?;
            let ctx = p.monomials()?;
            let lift = |v: &Vec<Int>| -> Vec<i64> { v.iter().map(|x| x.to_i64().expect("small")).collect() };
            for a in reps {
                for b in reps {
                    let k = ctx.commutator(&lift(a), &lift(b));
                    let img = emb.image(ctx.modulus, k).ok_or_else(|| {
                        SkError::InconsistentModel(format!("commutator zeta^{k} is not inside the embedded roots"))
                    })?;
                    gens.insert(d.u.reduce(&img));
                }
            }
        }
    }
    let gens: Vec<Vec<Int>> = gens.into_iter().collect();
    Ok(d.u.subgroup_generated(&gens)?)
}

/// `{a : (N Nrd a)^partial in R_0} / (P X)`.
pub fn sk1u_msem(p: &AlgebraPresentation, tau: &InvolutionDescriptor, opts: ProductOptions) -> Result<SKResult> {
    require_tr_unramified(p, tau)?;
    let c = classify(p)?;
    let d = abstract_datum(p)?;
    let mut checks = Vec::new();
    let num = d.norm.scaled(c.partial).preimage(&d.r0_part)?;
    checks.push(format!("numerator uses the norm raised to partial = {}", c.partial));
    let pp = sigma_product(d, p.residue_extension.as_ref(), opts.check_lembe, &mut checks)?;
    let q = p.degree_quotient()?;
    let rounds = doubled_sets(&q)?;
    // commutators are bilinear, so generators and their pairwise sums suffice
    let reps = match d.cocycle {
        Some(CocycleSource::Commutators) => &rounds[1.min(rounds.len() - 1)],
        _ => rounds.last().expect("nonempty"),
    };
    let x = cocycle_subgroup(p, d, &q, reps)?;
    let den = pp.join(&x)?;
    if opts.representative_doubling {
        let doubled = double(&q, reps);
        let stable = cocycle_subgroup(p, d, &q, &doubled)?.join(&pp)?.same_as(&den);
        if !stable {
            return Err(SkError::InvariantBreach(
                "X changed under representative doubling".into(),
            ));
        }
        checks.push(format!(
            "X stable under representative doubling ({} representatives)",
            reps.len()
        ));
    }
    let group = quotient_checked(&num, &den, "P X inside the norm preimage")?;
    finish(
        group,
        TheoremTag::ThMsem,
        digest(p, &c, Some(TrCase::TrUnramified)),
        checks,
    )
}

/// Abstract datum reproducing the totally ramified unitary formula through the
/// general one: `U` is the group of roots inverted by `tau_bar`, the norm is
/// the identity raised to `n`, `P` is trivial, and `X` is generated by
/// commutators.
pub fn roots_defect_model(p: &AlgebraPresentation, tau: &InvolutionDescriptor) -> Result<AlgebraPresentation> {
    totally_ramified_classification(p)?;
    require_tr_unramified(p, tau)?;
    let m = torsion_modulus(p)?;
    let u = p.residue.tau_multiplier()?;
    let s = m.gcd(&(u + 1).rem_euclid(m));
    let ug = FGAbGroup::cyclic(s);
    let datum = AbstractResidueDatum {
        u: ug.clone(),
        ut: ug.clone(),
        galois_gens: vec![],
        tau_bar: GroupHom::scalar(&ug, -1),
        norm: GroupHom::identity(&ug),
        r0_part: ug.trivial_subgroup(),
        sigma_subgroups: BTreeMap::from([(vec![], ug.trivial_subgroup())]),
        torsion: Some(TorsionDatum { m, tau_multiplier: u }),
        roots_embedding: Some(RootsEmbedding {
            order: s,
            map: GroupHom::identity(&ug),
        }),
        conorm: None,
        cocycle: Some(CocycleSource::Commutators),
        e0_is_field: true,
    };
    let mut q = p.clone();
    q.residue = ResidueDatum::Abstract(Box::new(datum));
    q.residue_extension = Some(ResidueExtension {
        ind_e0: 1,
        center_degree: 1,
        galois_orders: vec![],
        theta_images: vec![vec![]; p.ngens()],
    });
    Ok(q)
}

// ---------------------------------------------------------------------------
// dispatch

/// Unitary group by the most specific applicable formula.
pub fn sk1u(p: &AlgebraPresentation, tau: &InvolutionDescriptor, opts: ProductOptions) -> Result<SKResult> {
    if unitary_case(p, tau)? == TrCase::TrTotallyRamified {
        return sk1u_t_totally_ramified(p, tau);
    }
    let c = classify(p)?;
    match c.tag {
        CaseTag::TotallyRamified => sk1u_totally_ramified(p, tau),
        CaseTag::Unramified => sk1u_unramified(p, tau),
        CaseTag::Semiramified => sk1u_semiramified(p, tau, opts),
        _ if p.degree_quotient()?.is_cyclic() => sk1u_cyclic(p, tau),
        _ => sk1u_msem(p, tau, opts),
    }
}

/// Non-unitary group where a formula is implemented.
pub fn sk1(p: &AlgebraPresentation) -> Result<SKResult> {
    let c = classify(p)?;
    match c.tag {
        CaseTag::TotallyRamified => sk1_totally_ramified(p),
        _ if p.residue.as_abstract().is_some() && p.degree_quotient()?.is_cyclic() => sk1_cyclic(p),
        other => Err(SkError::CaseMismatch(format!(
            "no SK1 formula for case {}",
            other.name()
        ))),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::tests::symbols;
    use crate::algebra::Generator;
    use crate::fgab::elem;
    use crate::grading::{Degree, GradeLattice};
    use crate::involution::{CenterAction, InvolutionKind};

    pub(crate) fn unitary(p: &AlgebraPresentation, residue_nontrivial: bool) -> InvolutionDescriptor {
        InvolutionDescriptor {
            kind: InvolutionKind::Unitary,
            center_action: CenterAction {
                fixed_lattice: p.center.clone(),
                residue_nontrivial,
            },
            signs: vec![0; p.ngens()],
        }
    }

    /// Rank-one presentation: generators of degree 1 over the center `index * Z`.
    pub(crate) fn rank_one(index: i64, ext: ResidueExtension, d: AbstractResidueDatum) -> AlgebraPresentation {
        let generators = if index == 1 {
            vec![]
        } else {
            vec![Generator {
                name: "x".into(),
                degree: Degree(vec![1]),
                power: index,
            }]
        };
        let k = generators.len();
        AlgebraPresentation {
            center: GradeLattice::diagonal(&[index]),
            generators,
            commutation: vec![vec![0; k]; k],
            residue: ResidueDatum::Abstract(Box::new(d)),
            residue_extension: Some(ext),
        }
    }

    pub(crate) fn datum(u: &FGAbGroup, ut: &FGAbGroup, norm: GroupHom, r0: &[Vec<Int>]) -> AbstractResidueDatum {
        AbstractResidueDatum {
            u: u.clone(),
            ut: ut.clone(),
            galois_gens: vec![],
            tau_bar: GroupHom::identity(u),
            norm,
            r0_part: ut.subgroup_generated(r0).unwrap(),
            sigma_subgroups: BTreeMap::new(),
            torsion: None,
            roots_embedding: None,
            conorm: None,
            cocycle: None,
            e0_is_field: false,
        }
    }

    fn factors(r: &SKResult) -> Vec<Int> {
        r.invariant_factors()
    }

    #[test]
    fn degree_four_pair() {
        let p = symbols(&[4, 4], 16, Some(7));
        let tau = InvolutionDescriptor {
            kind: InvolutionKind::Unitary,
            center_action: CenterAction {
                fixed_lattice: p.center.clone(),
                residue_nontrivial: true,
            },
            signs: vec![0; 4],
        };
        let plain = sk1(&p).unwrap();
        assert_eq!(factors(&plain), elem(&[4]));
        assert_eq!(plain.theorem_tag, TheoremTag::NonUnitaryTotallyRamified);
        let u = sk1u(&p, &tau, ProductOptions::default()).unwrap();
        assert_eq!(u.rendered(), "Z/2");
        assert_eq!(u.theorem_tag, TheoremTag::ThSktotal);
    }

    #[test]
    fn totally_ramified_small() {
        // m = 8, n = 16, e = 4
        let p = symbols(&[4, 4], 8, None);
        assert_eq!(factors(&sk1_totally_ramified(&p).unwrap()), elem(&[2]));
        // e = n, m >= n
        let p = symbols(&[4], 8, None);
        assert!(sk1_totally_ramified(&p).unwrap().group.is_trivial());
    }

    #[test]
    fn inverting_theta_model() {
        for rs in [vec![2, 4], vec![2, 2], vec![3, 3], vec![2, 6]] {
            let n: i64 = rs.iter().map(|r| r * r).product::<i64>();
            let n = (n as f64).sqrt() as i64;
            let e = rs.iter().fold(1i64, |a, &r| a.lcm(&r));
            let p = symbols(&rs, n, Some(-1));
            let r = sk1u_totally_ramified(&p, &unitary(&p, true)).unwrap();
            assert_eq!(r.order(), Int::from(n / e), "r = {rs:?}");
        }
    }

    #[test]
    fn trivial_when_t_totally_ramified() {
        let mut p = symbols(&[2], 2, Some(1));
        let fixed = GradeLattice::diagonal(&[4, 2]);
        let tau = InvolutionDescriptor {
            kind: InvolutionKind::Unitary,
            center_action: CenterAction {
                fixed_lattice: fixed,
                residue_nontrivial: false,
            },
            signs: vec![0, 0],
        };
        let r = sk1u(&p, &tau, ProductOptions::default()).unwrap();
        assert!(r.group.is_trivial());
        assert_eq!(r.theorem_tag, TheoremTag::PropTotal);
        p.generators.clear();
        p.commutation.clear();
        p.center = GradeLattice::standard(2);
        let tau = InvolutionDescriptor { signs: vec![], ..tau };
        let tau = InvolutionDescriptor {
            center_action: CenterAction {
                fixed_lattice: GradeLattice::diagonal(&[2, 1]),
                residue_nontrivial: false,
            },
            ..tau
        };
        assert_eq!(sk1u_t_totally_ramified(&p, &tau).unwrap_err(), SkError::EEqualsT);
    }

    #[test]
    fn unramified_example() {
        let u = FGAbGroup::cyclic(12);
        let mut d = datum(&u, &u, GroupHom::identity(&u), &[elem(&[2])]);
        d.sigma_subgroups
            .insert(vec![], u.subgroup_generated(&[elem(&[4])]).unwrap());
        let ext = ResidueExtension {
            ind_e0: 2,
            center_degree: 1,
            galois_orders: vec![],
            theta_images: vec![],
        };
        let p = rank_one(1, ext, d);
        let r = sk1u(&p, &unitary(&p, true), ProductOptions::default()).unwrap();
        assert_eq!(r.theorem_tag, TheoremTag::CorUnramified);
        assert_eq!(factors(&r), elem(&[2]));
    }

    pub(crate) fn semiramified_example() -> AlgebraPresentation {
        let u = FGAbGroup::cyclic(8);
        let mut d = datum(&u, &u, GroupHom::scalar(&u, 2), &[elem(&[4])]);
        d.galois_gens = vec![GroupHom::scalar(&u, 5)];
        let four = u.subgroup_generated(&[elem(&[4])]).unwrap();
        d.sigma_subgroups.insert(vec![0], four.clone());
        d.sigma_subgroups.insert(vec![1], four);
        let ext = ResidueExtension {
            ind_e0: 1,
            center_degree: 2,
            galois_orders: vec![2],
            theta_images: vec![vec![1]],
        };
        rank_one(2, ext, d)
    }

    #[test]
    fn semiramified_example_both_paths() {
        let p = semiramified_example();
        let tau = unitary(&p, true);
        for check_lembe in [false, true] {
            let opts = ProductOptions {
                check_lembe,
                representative_doubling: false,
            };
            let r = sk1u(&p, &tau, opts).unwrap();
            assert_eq!(r.theorem_tag, TheoremTag::CorSeses);
            assert_eq!(factors(&r), elem(&[2]));
        }
    }

    #[test]
    fn cyclic_examples() {
        let u = FGAbGroup::from_orders(&[4, 2]);
        let z = FGAbGroup::trivial();
        let mut d = datum(&u, &z, GroupHom::zero(&u, &z), &[]);
        d.galois_gens = vec![GroupHom::identity(&u)];
        d.sigma_subgroups
            .insert(vec![0], u.subgroup_generated(&[elem(&[2, 0])]).unwrap());
        d.sigma_subgroups
            .insert(vec![1], u.subgroup_generated(&[elem(&[0, 1])]).unwrap());
        let ext = ResidueExtension {
            ind_e0: 2,
            center_degree: 2,
            galois_orders: vec![2],
            theta_images: vec![vec![1]],
        };
        let p = rank_one(2, ext, d.clone());
        let tau = unitary(&p, true);
        let r = sk1u(&p, &tau, ProductOptions::default()).unwrap();
        assert_eq!(r.theorem_tag, TheoremTag::PropCyclic);
        assert_eq!(factors(&r), elem(&[2]));

        d.e0_is_field = true;
        d.sigma_subgroups.clear();
        let ext = ResidueExtension {
            ind_e0: 2,
            center_degree: 2,
            galois_orders: vec![2],
            theta_images: vec![vec![1]],
        };
        let p = rank_one(2, ext, d);
        let r = sk1u_cyclic(&p, &tau).unwrap();
        assert_eq!(r.theorem_tag, TheoremTag::PropCyclicField);
        assert!(r.group.is_trivial());
    }

    #[test]
    fn conorm_example() {
        let u = FGAbGroup::cyclic(8);
        let mut d = datum(&u, &u, GroupHom::identity(&u), &[]);
        d.galois_gens = vec![GroupHom::scalar(&u, 3)];
        d.sigma_subgroups.insert(vec![0], u.trivial_subgroup());
        d.conorm = Some(crate::algebra::ConormData {
            center: u.clone(),
            nrd: GroupHom::scalar(&u, 2),
            tau_center: GroupHom::identity(&u),
            t0_part: u.trivial_subgroup(),
        });
        let cg = conorm_groups(&d, &GroupHom::scalar(&u, 3)).unwrap();
        assert!(cg.n.same_as(&u.whole()));
        assert_eq!(cg.p.invariant_factors(), elem(&[2]));
    }

    #[test]
    fn msem_reproduces_totally_ramified() {
        for (rs, m, u) in [
            (vec![4, 4], 16, 7),
            (vec![2, 2], 8, 3),
            (vec![2, 4], 8, -1),
            (vec![3], 9, -1),
        ] {
            let p = symbols(&rs, m, Some(u));
            let tau = unitary(&p, true);
            let direct = sk1u_totally_ramified(&p, &tau).unwrap();
            let q = roots_defect_model(&p, &tau).unwrap();
            let opts = ProductOptions {
                check_lembe: false,
                representative_doubling: true,
            };
            let general = sk1u_msem(&q, &tau, opts).unwrap();
            assert_eq!(general.theorem_tag, TheoremTag::ThMsem);
            assert_eq!(factors(&general), factors(&direct), "r = {rs:?}, m = {m}, u = {u}");
        }
    }

    #[test]
    fn case_mismatch() {
        let p = semiramified_example();
        assert!(matches!(sk1_totally_ramified(&p), Err(SkError::CaseMismatch(_))));
        let t = symbols(&[2], 4, Some(3));
        assert!(matches!(
            sk1u_unramified(&t, &unitary(&t, true)),
            Err(SkError::CaseMismatch(_))
        ));
    }
}
