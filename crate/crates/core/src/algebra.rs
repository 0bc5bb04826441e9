//! Symbol-style presentations of graded division algebras and their residue data.
//!
//! Roots of unity are handled as exponents: a residue datum fixes a modulus
//! `M` with `mu_M` inside `T_0`, and `k` stands for `zeta^k` where `zeta` is a
//! fixed primitive `M`-th root.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::fgab::{elem, left_kernel, FGAbGroup, FgabError, GroupHom, Int, IntMatrix, Subgroup};
use crate::grading::{quotient_lattice, Degree, GradeLattice, GradingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("inconsistent commutation: {0}")]
    InconsistentCommutation(String),
    #[error("power of generator {0} is not central")]
    NonCentralPower(String),
    #[error("grade group has infinite index over the center grade group")]
    InfiniteRamification,
    #[error("insufficient residue data: {0}")]
    InsufficientResidueData(String),
    #[error("presentation is not totally ramified")]
    NotTotallyRamified,
    #[error("pairing is degenerate: radical has order {0}")]
    DegeneratePairing(String),
    #[error("case mismatch: {0}")]
    CaseMismatch(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("invalid residue datum: {0}")]
    InvalidResidue(String),
    #[error(transparent)]
    Group(#[from] FgabError),
    #[error(transparent)]
    Grading(#[from] GradingError),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

// ---------------------------------------------------------------------------
// modular helpers

pub fn modp(a: i128, m: i64) -> i64 {
    a.rem_euclid(m as i128) as i64
}

/// Some `x` with `a x == b (mod m)`.
pub fn solve_congruence(a: i64, b: i64, m: i64) -> Option<i64> {
    let a = a.rem_euclid(m);
    let b = b.rem_euclid(m);
    let g = a.gcd(&m);
    if b % g != 0 {
        return None;
    }
    let (a1, b1, m1) = (a / g, b / g, m / g);
    if m1 == 1 {
        return Some(0);
    }
    let inv = Int::from(a1).extended_gcd(&Int::from(m1)).x.mod_floor(&Int::from(m1));
    let inv = inv.to_i64().expect("fits");
    Some(modp(inv as i128 * b1 as i128, m1))
}

pub fn is_prime_power(q: i64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    let mut n = q;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            return n == 1;
        }
        p += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// residue data

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootsOfUnityDatum {
    pub m: i64,
    /// `tau_bar(zeta^k) = zeta^(u k)`; required for unitary computations.
    pub tau_multiplier: Option<i64>,
}

impl RootsOfUnityDatum {
    pub fn new(m: i64, tau_multiplier: Option<i64>) -> Result<Self> {
        if m < 1 {
            return Err(AlgebraError::InvalidResidue(format!("m = {m} must be positive")));
        }
        if let Some(u) = tau_multiplier {
            if modp(u as i128 * u as i128, m) != 1 % m {
                return Err(AlgebraError::InvalidResidue(format!(
                    "tau_multiplier {u} does not square to 1 mod {m}"
                )));
            }
        }
        Ok(RootsOfUnityDatum {
            m,
            tau_multiplier: tau_multiplier.map(|u| u.rem_euclid(m)),
        })
    }
}

/// `R_0 = F_q0`, `T_0 = F_(q0^2)`, `tau_bar` the Frobenius `x -> x^q0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteFieldDatum {
    pub q0: i64,
}

impl FiniteFieldDatum {
    pub fn new(q0: i64) -> Result<Self> {
        if !is_prime_power(q0) {
            return Err(AlgebraError::InvalidResidue(format!("q0 = {q0} is not a prime power")));
        }
        Ok(FiniteFieldDatum { q0 })
    }

    pub fn characteristic(&self) -> i64 {
        (2..=self.q0).find(|p| self.q0 % p == 0).expect("q0 >= 2")
    }
}

/// Roots of unity inside `T_0` for an abstract datum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionDatum {
    pub m: i64,
    pub tau_multiplier: i64,
}

/// `mu_s` inside `U`: `zeta_M^k` with `(M/s) | k` maps to `map(k / (M/s))`.
#[derive(Clone, Debug)]
pub struct RootsEmbedding {
    pub order: i64,
    /// `Z/order -> U`.
    pub map: GroupHom,
}

impl RootsEmbedding {
    /// Image of the root exponent `k` modulo `modulus`, if `zeta^k` lies in `mu_order`.
    pub fn image(&self, modulus: i64, k: i64) -> Option<Vec<Int>> {
        let step = modulus / self.order;
        let k = k.rem_euclid(modulus);
        if k % step != 0 {
            return None;
        }
        Some(self.map.apply(&[Int::from(k / step)]))
    }
}

/// Data used by the conorm groups of a cyclic ramification.
#[derive(Clone, Debug)]
pub struct ConormData {
    /// Stand-in for `Z(E_0)^*`.
    pub center: FGAbGroup,
    /// Reduced norm `U -> center`.
    pub nrd: GroupHom,
    /// `tau_bar` restricted to the center.
    pub tau_center: GroupHom,
    /// Image of `T_0^*` in the center.
    pub t0_part: Subgroup,
}

/// Values `x_g x_h x_(g+h)^-1` of a symmetric transversal, seen in `U`.
#[derive(Clone, Debug)]
pub enum CocycleSource {
    /// Values on pairs of classes of `Gamma_E / Gamma_T`, keyed by canonical coordinates.
    Table(BTreeMap<(Vec<Int>, Vec<Int>), Vec<Int>>),
    /// Values are commutators of generators, embedded through `roots_embedding`.
    Commutators,
}

/// Finitely generated abelian stand-in for `E_0^*` and its distinguished subgroups.
#[derive(Clone, Debug)]
pub struct AbstractResidueDatum {
    pub u: FGAbGroup,
    pub ut: FGAbGroup,
    /// Action of the generators of `H = Gal(Z(E_0)/T_0)` on `U`.
    pub galois_gens: Vec<GroupHom>,
    pub tau_bar: GroupHom,
    /// `N_(Z(E_0)/T_0) o Nrd_(E_0)` as a map `U -> UT`.
    pub norm: GroupHom,
    pub r0_part: Subgroup,
    /// `h -> Sigma_(h tau_bar)(E_0)`, keyed by exponent vectors on `galois_gens`.
    pub sigma_subgroups: BTreeMap<Vec<i64>, Subgroup>,
    pub torsion: Option<TorsionDatum>,
    pub roots_embedding: Option<RootsEmbedding>,
    pub conorm: Option<ConormData>,
    pub cocycle: Option<CocycleSource>,
    pub e0_is_field: bool,
}

impl AbstractResidueDatum {
    /// Structural checks: `tau_bar^2 = id`, Galois generators commute, norm is Galois-invariant.
    pub fn validate(&self) -> Result<()> {
        let check_endo = |f: &GroupHom, what: &str| -> Result<()> {
            if *f.source() != self.u || *f.target() != self.u {
                return Err(AlgebraError::InvalidResidue(format!(
                    "{what} must be an endomorphism of U"
                )));
            }
            Ok(())
        };
        check_endo(&self.tau_bar, "tau_bar")?;
        if !self.tau_bar.then(&self.tau_bar)?.equals(&GroupHom::identity(&self.u)) {
            return Err(AlgebraError::InvalidResidue(
                "tau_bar does not square to the identity".into(),
            ));
        }
        if *self.norm.source() != self.u || *self.norm.target() != self.ut {
            return Err(AlgebraError::InvalidResidue("norm must map U to UT".into()));
        }
        if *self.r0_part.ambient() != self.ut {
            return Err(AlgebraError::InvalidResidue("R0_part must be a subgroup of UT".into()));
        }
        for (i, g) in self.galois_gens.iter().enumerate() {
            check_endo(g, &format!("galois_gens[{i}]"))?;
            for h in &self.galois_gens[i + 1..] {
                if !g.then(h)?.equals(&h.then(g)?) {
                    return Err(AlgebraError::InvalidResidue("Galois generators do not commute".into()));
                }
            }
            if !g.then(&self.norm)?.equals(&self.norm) {
                return Err(AlgebraError::InvalidResidue(format!(
                    "norm is not invariant under galois_gens[{i}]"
                )));
            }
        }
        for (k, s) in &self.sigma_subgroups {
            if k.len() != self.galois_gens.len() {
                return Err(AlgebraError::InvalidResidue(format!(
                    "sigma_subgroups key {k:?} has wrong length"
                )));
            }
            if *s.ambient() != self.u {
                return Err(AlgebraError::InvalidResidue("sigma subgroup outside U".into()));
            }
        }
        if let Some(t) = &self.torsion {
            if t.m < 1 || modp(t.tau_multiplier as i128 * t.tau_multiplier as i128, t.m) != 1 % t.m {
                return Err(AlgebraError::InvalidResidue(
                    "torsion multiplier must square to 1".into(),
                ));
            }
            if let Some(emb) = &self.roots_embedding {
                if emb.order < 1 || t.m % emb.order != 0 {
                    return Err(AlgebraError::InvalidResidue(
                        "roots_embedding order must divide m".into(),
                    ));
                }
                if *emb.map.source() != FGAbGroup::cyclic(emb.order) || *emb.map.target() != self.u {
                    return Err(AlgebraError::InvalidResidue(
                        "roots_embedding must map Z/order to U".into(),
                    ));
                }
            }
        }
        if let Some(c) = &self.conorm {
            if *c.nrd.source() != self.u || *c.nrd.target() != c.center {
                return Err(AlgebraError::InvalidResidue(
                    "conorm nrd must map U to the center".into(),
                ));
            }
            if *c.tau_center.source() != c.center || *c.tau_center.target() != c.center {
                return Err(AlgebraError::InvalidResidue(
                    "tau_center must be an endomorphism".into(),
                ));
            }
            if *c.t0_part.ambient() != c.center {
                return Err(AlgebraError::InvalidResidue("t0_part must lie in the center".into()));
            }
        }
        if let Some(CocycleSource::Table(t)) = &self.cocycle {
            if t.values().any(|v| v.len() != self.u.ngens()) {
                return Err(AlgebraError::InvalidResidue(
                    "cocycle values must be elements of U".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum ResidueDatum {
    RootsOfUnity(RootsOfUnityDatum),
    FiniteField(FiniteFieldDatum),
    Abstract(Box<AbstractResidueDatum>),
}

impl ResidueDatum {
    /// Order `M` of the roots of unity tracked by this datum.
    pub fn root_modulus(&self) -> Result<i64> {
        match self {
            ResidueDatum::RootsOfUnity(r) => Ok(r.m),
            ResidueDatum::FiniteField(f) => Ok(f.q0 * f.q0 - 1),
            ResidueDatum::Abstract(a) => a
                .torsion
                .as_ref()
                .map(|t| t.m)
                .ok_or_else(|| AlgebraError::InsufficientResidueData("residue.torsion".into())),
        }
    }

    /// Exponent multiplier of `tau_bar` on the tracked roots of unity.
    pub fn tau_multiplier(&self) -> Result<i64> {
        match self {
            ResidueDatum::RootsOfUnity(r) => r
                .tau_multiplier
                .ok_or_else(|| AlgebraError::InsufficientResidueData("residue.tau_multiplier".into())),
            ResidueDatum::FiniteField(f) => Ok(f.q0.rem_euclid(f.q0 * f.q0 - 1)),
            ResidueDatum::Abstract(a) => a
                .torsion
                .as_ref()
                .map(|t| t.tau_multiplier)
                .ok_or_else(|| AlgebraError::InsufficientResidueData("residue.torsion".into())),
        }
    }

    pub fn characteristic(&self) -> Option<i64> {
        match self {
            ResidueDatum::FiniteField(f) => Some(f.characteristic()),
            _ => None,
        }
    }

    pub fn as_abstract(&self) -> Option<&AbstractResidueDatum> {
        match self {
            ResidueDatum::Abstract(a) => Some(a),
            _ => None,
        }
    }
}

/// `mu_n(T_0)` as `Z/g` with `g = gcd(n, M)`; `tau_bar` acts by `x -> multiplier * x`.
#[derive(Clone, Debug)]
pub struct RootsGroup {
    pub order: i64,
    pub group: FGAbGroup,
    pub multiplier: Option<i64>,
    /// `M / g`: the element `k` of `Z/g` is `zeta^(k M / g)`.
    pub step: i64,
}

pub fn mu_n_of(res: &ResidueDatum, n: i64) -> Result<RootsGroup> {
    if n < 1 {
        return Err(AlgebraError::InvalidPresentation(format!("n = {n} must be positive")));
    }
    let m = res.root_modulus()?;
    let g = n.gcd(&m);
    let multiplier = res.tau_multiplier().ok().map(|u| u.rem_euclid(g));
    Ok(RootsGroup {
        order: g,
        group: FGAbGroup::cyclic(g),
        multiplier,
        step: m / g,
    })
}

// ---------------------------------------------------------------------------
// presentation

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: Degree,
    /// `r_i`: `x_i^(r_i)` is declared central.
    pub power: i64,
}

/// Galois description of `E_0 / T_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueExtension {
    pub ind_e0: i64,
    pub center_degree: i64,
    /// Invariant factors of `H = Gal(Z(E_0)/T_0)`.
    pub galois_orders: Vec<i64>,
    /// Image of each generator degree in `H`, as exponents on the factors.
    pub theta_images: Vec<Vec<i64>>,
}

#[derive(Clone, Debug)]
pub struct AlgebraPresentation {
    pub center: GradeLattice,
    pub generators: Vec<Generator>,
    /// `x_i x_j = zeta^(beta_ij) x_j x_i`.
    pub commutation: Vec<Vec<i64>>,
    pub residue: ResidueDatum,
    pub residue_extension: Option<ResidueExtension>,
}

#[derive(Clone, Debug)]
pub struct PresentationReport {
    pub grade_group: GradeLattice,
    pub index: Int,
    pub root_modulus: Option<i64>,
    pub checks: Vec<String>,
}

impl AlgebraPresentation {
    pub fn rank(&self) -> usize {
        self.center.ambient_rank()
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn grade_group(&self) -> Result<GradeLattice> {
        let degs: Vec<Degree> = self.generators.iter().map(|g| g.degree.clone()).collect();
        Ok(GradeLattice::from_degrees(self.rank(), &degs)?.join(&self.center)?)
    }

    pub fn degree_matrix(&self) -> IntMatrix {
        let rows: Vec<Vec<Int>> = self.generators.iter().map(|g| g.degree.to_ints()).collect();
        IntMatrix::from_rows(self.rank(), &rows).expect("validated ranks")
    }

    /// `Gamma_E / Gamma_T` presented on the generator degrees.
    pub fn degree_quotient(&self) -> Result<FGAbGroup> {
        let k = self.ngens();
        let m = self.degree_matrix().vstack(&self.center.basis_matrix());
        let rels: Vec<Vec<Int>> = left_kernel(&m).into_iter().map(|v| v[..k].to_vec()).collect();
        Ok(FGAbGroup::new(k, IntMatrix::from_rows(k, &rels)?)?)
    }

    pub fn monomials(&self) -> Result<MonomialContext> {
        Ok(MonomialContext {
            modulus: self.residue.root_modulus()?,
            beta: self.commutation.clone(),
        })
    }
}

pub fn validate_presentation(p: &AlgebraPresentation) -> Result<PresentationReport> {
    let k = p.ngens();
    let r = p.rank();
    let mut checks = Vec::new();
    for g in &p.generators {
        if g.degree.rank() != r {
            return Err(AlgebraError::InvalidPresentation(format!(
                "generator {} has degree of rank {}, expected {r}",
                g.name,
                g.degree.rank()
            )));
        }
        if g.power < 1 {
            return Err(AlgebraError::InvalidPresentation(format!(
                "generator {} has power {} < 1",
                g.name, g.power
            )));
        }
    }
    if p.commutation.len() != k || p.commutation.iter().any(|row| row.len() != k) {
        return Err(AlgebraError::InconsistentCommutation(format!(
            "commutation must be {k}x{k}"
        )));
    }
    let modulus = match &p.residue {
        ResidueDatum::Abstract(a) => {
            a.validate()?;
            a.torsion.as_ref().map(|t| t.m)
        }
        other => Some(other.root_modulus()?),
    };
    match modulus {
        Some(m) => {
            for i in 0..k {
                if p.commutation[i][i].rem_euclid(m) != 0 {
                    return Err(AlgebraError::InconsistentCommutation(format!(
                        "beta[{i}][{i}] must be trivial"
                    )));
                }
                for j in 0..k {
                    if (p.commutation[i][j] + p.commutation[j][i]).rem_euclid(m) != 0 {
                        return Err(AlgebraError::InconsistentCommutation(format!(
                            "beta[{i}][{j}] * beta[{j}][{i}] != 1"
                        )));
                    }
                }
            }
            checks.push("commutation antisymmetric".to_string());
            for (i, g) in p.generators.iter().enumerate() {
                if !p.center.contains_degree(&g.degree.scale(g.power)) {
                    return Err(AlgebraError::NonCentralPower(g.name.clone()));
                }
                for j in 0..k {
                    if modp(g.power as i128 * p.commutation[i][j] as i128, m) != 0 {
                        return Err(AlgebraError::NonCentralPower(g.name.clone()));
                    }
                }
            }
            checks.push("declared powers central".to_string());
        }
        None => {
            if p.commutation.iter().flatten().any(|&b| b != 0) {
                return Err(AlgebraError::InsufficientResidueData(
                    "residue.torsion is needed for nontrivial commutation".into(),
                ));
            }
            for g in &p.generators {
                if !p.center.contains_degree(&g.degree.scale(g.power)) {
                    return Err(AlgebraError::NonCentralPower(g.name.clone()));
                }
            }
        }
    }
    let ge = p.grade_group()?;
    if ge.rank() != p.center.rank() {
        return Err(AlgebraError::InfiniteRamification);
    }
    let q = quotient_lattice(&ge, &p.center)?;
    let index = q.order().map_err(|_| AlgebraError::InfiniteRamification)?;
    checks.push(format!("|Gamma_E : Gamma_T| = {index}"));

    // commutation must only depend on degrees modulo the center
    if let Some(m) = modulus {
        let quot = p.degree_quotient()?;
        for rel in quot.relations().row_vecs() {
            for j in 0..k {
                let mut s = Int::zero();
                for (i, c) in rel.iter().enumerate() {
                    s += c * p.commutation[i][j];
                }
                if !s.mod_floor(&Int::from(m)).is_zero() {
                    return Err(AlgebraError::InconsistentCommutation(format!(
                        "a central combination of generators fails to commute with generator {j}"
                    )));
                }
            }
        }
        checks.push("commutation well defined on Gamma_E/Gamma_T".to_string());
    }
    if let Some(ext) = &p.residue_extension {
        validate_extension(p, ext, &p.degree_quotient()?)?;
        checks.push("residue extension consistent".to_string());
    }
    Ok(PresentationReport {
        grade_group: ge,
        index,
        root_modulus: modulus,
        checks,
    })
}

fn validate_extension(p: &AlgebraPresentation, ext: &ResidueExtension, q: &FGAbGroup) -> Result<()> {
    if ext.ind_e0 < 1 || ext.center_degree < 1 {
        return Err(AlgebraError::InvalidPresentation(
            "residue_extension degrees must be positive".into(),
        ));
    }
    let h_order: i64 = ext.galois_orders.iter().product();
    if h_order != ext.center_degree {
        return Err(AlgebraError::InvalidPresentation(format!(
            "center_degree {} differs from |H| = {h_order}",
            ext.center_degree
        )));
    }
    if ext.theta_images.len() != p.ngens() {
        return Err(AlgebraError::InvalidPresentation(
            "one theta image per generator is required".into(),
        ));
    }
    let h = FGAbGroup::from_orders(&ext.galois_orders);
    let rows: Vec<Vec<Int>> = ext
        .theta_images
        .iter()
        .map(|t| {
            if t.len() != ext.galois_orders.len() {
                Err(AlgebraError::InvalidPresentation("theta image has wrong length".into()))
            } else {
                Ok(elem(t))
            }
        })
        .collect::<Result<_>>()?;
    let theta = GroupHom::new(
        q.clone(),
        h.clone(),
        IntMatrix::from_rows(ext.galois_orders.len(), &rows)?,
    )
    .map_err(|_| AlgebraError::InvalidPresentation("theta is not defined on Gamma_E/Gamma_T".into()))?;
    if !theta.image().same_as(&h.whole()) {
        return Err(AlgebraError::InvalidPresentation("theta is not surjective".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classification

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseTag {
    Unramified,
    TotallyRamified,
    Semiramified,
    InertiallySplit,
    General,
}

impl CaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::Unramified => "Unramified",
            CaseTag::TotallyRamified => "TotallyRamified",
            CaseTag::Semiramified => "Semiramified",
            CaseTag::InertiallySplit => "InertiallySplit",
            CaseTag::General => "General",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub tag: CaseTag,
    pub n: i64,
    pub e: i64,
    pub partial: i64,
    pub index: i64,
    pub ind_e0: i64,
    pub center_degree: i64,
}

fn isqrt(x: i64) -> Option<i64> {
    if x < 0 {
        return None;
    }
    let r = (x as f64).sqrt() as i64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s * s == x)
}

pub fn classify(p: &AlgebraPresentation) -> Result<Classification> {
    let report = validate_presentation(p)?;
    let q = quotient_lattice(&report.grade_group, &p.center)?;
    let index = report.index.to_i64().ok_or(AlgebraError::InfiniteRamification)?;
    let e = q.exponent().to_i64().expect("divides index");
    let (ind_e0, zdeg) = match (&p.residue_extension, &p.residue) {
        (Some(ext), _) => (ext.ind_e0, ext.center_degree),
        (None, ResidueDatum::Abstract(_)) => {
            return Err(AlgebraError::InsufficientResidueData("residue_extension".into()))
        }
        (None, _) => (1, 1),
    };
    let n2 = ind_e0
        .checked_mul(ind_e0)
        .and_then(|x| x.checked_mul(zdeg))
        .and_then(|x| x.checked_mul(index))
        .ok_or_else(|| AlgebraError::InvalidPresentation("index overflow".into()))?;
    let n = isqrt(n2)
        .ok_or_else(|| AlgebraError::InvalidPresentation(format!("ind(E)^2 = {n2} is not a perfect square")))?;
    if n % (ind_e0 * zdeg) != 0 {
        return Err(AlgebraError::InvalidPresentation(format!(
            "ind(E_0) [Z(E_0):T_0] = {} does not divide n = {n}",
            ind_e0 * zdeg
        )));
    }
    let partial = n / (ind_e0 * zdeg);
    let tag = if index == 1 {
        CaseTag::Unramified
    } else if ind_e0 == 1 && zdeg == 1 {
        CaseTag::TotallyRamified
    } else if ind_e0 == 1 && zdeg == index && index == n {
        CaseTag::Semiramified
    } else if partial == 1 {
        CaseTag::InertiallySplit
    } else {
        CaseTag::General
    };
    if tag == CaseTag::TotallyRamified {
        // E_0 = T_0 forces a nondegenerate commutator pairing
        symplectic_pairing(p)?;
    }
    Ok(Classification {
        tag,
        n,
        e,
        partial,
        index,
        ind_e0,
        center_degree: zdeg,
    })
}

// ---------------------------------------------------------------------------
// monomials

/// `zeta^scalar * x_1^(c_1) ... x_k^(c_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub scalar: i64,
    pub exps: Vec<i64>,
}

impl Monomial {
    pub fn one(k: usize) -> Self {
        Monomial {
            scalar: 0,
            exps: vec![0; k],
        }
    }

    pub fn generator(k: usize, i: usize) -> Self {
        let mut exps = vec![0; k];
        exps[i] = 1;
        Monomial { scalar: 0, exps }
    }

    pub fn degree(&self, p: &AlgebraPresentation) -> Degree {
        let mut d = Degree::zero(p.rank());
        for (c, g) in self.exps.iter().zip(&p.generators) {
            d = d.add(&g.degree.scale(*c));
        }
        d
    }
}

/// Multiplication rules for monomials over a fixed commutation matrix.
#[derive(Clone, Debug)]
pub struct MonomialContext {
    pub modulus: i64,
    pub beta: Vec<Vec<i64>>,
}

impl MonomialContext {
    /// Root exponent of `x^c x^d (x^(c+d))^-1`.
    pub fn kappa(&self, c: &[i64], d: &[i64]) -> i64 {
        let mut s: i128 = 0;
        for i in 0..c.len() {
            for j in 0..i {
                s += c[i] as i128 * d[j] as i128 * self.beta[i][j] as i128;
            }
        }
        modp(s, self.modulus)
    }

    /// Root exponent of the commutator `x^c x^d x^-c x^-d`.
    pub fn commutator(&self, c: &[i64], d: &[i64]) -> i64 {
        let mut s: i128 = 0;
        for (i, ci) in c.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                s += *ci as i128 * *dj as i128 * self.beta[i][j] as i128;
            }
        }
        modp(s, self.modulus)
    }

    pub fn mul(&self, a: &Monomial, b: &Monomial) -> Monomial {
        let k = self.kappa(&a.exps, &b.exps);
        Monomial {
            scalar: modp(a.scalar as i128 + b.scalar as i128 + k as i128, self.modulus),
            exps: a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn inverse(&self, a: &Monomial) -> Monomial {
        let neg: Vec<i64> = a.exps.iter().map(|x| -x).collect();
        // x^-c x^c = zeta^kappa(-c, c)
        let k = self.kappa(&neg, &a.exps);
        Monomial {
            scalar: modp(-(a.scalar as i128) - k as i128, self.modulus),
            exps: neg,
        }
    }

    pub fn scalar(&self, k: usize, s: i64) -> Monomial {
        Monomial {
            scalar: s.rem_euclid(self.modulus),
            exps: vec![0; k],
        }
    }
}

// ---------------------------------------------------------------------------
// symplectic pairing

/// Commutator pairing on `Gamma_E / Gamma_T` with values in `Z/e`.
#[derive(Clone, Debug)]
pub struct SymplecticPairing {
    pub group: FGAbGroup,
    pub e: i64,
    /// `values[i][j]` is the pairing of generator classes `i` and `j` in `Z/e`.
    pub values: Vec<Vec<i64>>,
}

impl SymplecticPairing {
    pub fn eval(&self, x: &[Int], y: &[Int]) -> i64 {
        let mut s = Int::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() {
                    s += xi * yj * self.values[i][j];
                }
            }
        }
        s.mod_floor(&Int::from(self.e)).to_i64().expect("reduced")
    }

    /// `x -> pairing(x, -)` into `(Z/e)^k`.
    pub fn adjoint(&self) -> Result<GroupHom> {
        let k = self.group.ngens();
        let target = FGAbGroup::from_orders(&vec![self.e; k]);
        let rows: Vec<Vec<Int>> = self.values.iter().map(|r| elem(r)).collect();
        GroupHom::new(self.group.clone(), target, IntMatrix::from_rows(k, &rows)?)
            .map_err(|_| AlgebraError::InconsistentCommutation("pairing is not defined on Gamma_E/Gamma_T".into()))
    }

    pub fn radical(&self) -> Result<Subgroup> {
        Ok(self.adjoint()?.kernel())
    }

    pub fn is_nondegenerate(&self) -> Result<bool> {
        Ok(self.radical()?.order()?.is_one())
    }
}

fn build_pairing(p: &AlgebraPresentation) -> Result<SymplecticPairing> {
    let group = p.degree_quotient()?;
    let e = group.exponent().to_i64().ok_or(AlgebraError::InfiniteRamification)?;
    if e == 0 {
        return Err(AlgebraError::InfiniteRamification);
    }
    let k = p.ngens();
    let m = p.residue.root_modulus()?;
    if m % e != 0 {
        return Err(AlgebraError::InvalidPresentation(format!(
            "mu_e is not contained in T_0: e = {e} does not divide {m}"
        )));
    }
    let step = m / e;
    let mut values = vec![vec![0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let b = p.commutation[i][j].rem_euclid(m);
            if b % step != 0 {
                return Err(AlgebraError::InconsistentCommutation(format!(
                    "beta[{i}][{j}] is not an e-th root of unity"
                )));
            }
            values[i][j] = b / step;
        }
    }
    let sp = SymplecticPairing { group, e, values };
    sp.adjoint()?;
    Ok(sp)
}

pub fn symplectic_pairing(p: &AlgebraPresentation) -> Result<SymplecticPairing> {
    validate_presentation(p)?;
    let totally = match &p.residue_extension {
        Some(ext) => ext.ind_e0 == 1 && ext.center_degree == 1,
        None => !matches!(p.residue, ResidueDatum::Abstract(_)),
    };
    if !totally {
        return Err(AlgebraError::NotTotallyRamified);
    }
    let sp = build_pairing(p)?;
    let rad = sp.radical()?;
    let rad_order = rad.order()?;
    if !rad_order.is_one() {
        return Err(AlgebraError::DegeneratePairing(rad_order.to_string()));
    }
    Ok(sp)
}

/// One hyperbolic pair; `value` is the pairing of `x` with `y`, of order `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolicPair {
    pub x: Vec<Int>,
    pub y: Vec<Int>,
    pub order: i64,
    pub value: i64,
}

/// Splits the pairing into orthogonal hyperbolic planes. At each step `x` is an
/// element of maximal order in the remaining subgroup, and `y` pairs with it
/// to the same order; current generators are tried before a full search.
pub fn symplectic_basis(sp: &SymplecticPairing) -> Result<Vec<HyperbolicPair>> {
    let g = &sp.group;
    if !g.is_finite() {
        return Err(AlgebraError::InfiniteRamification);
    }
    if !sp.is_nondegenerate()? {
        return Err(AlgebraError::DegeneratePairing(sp.radical()?.order()?.to_string()));
    }
    let value_order = |v: i64| -> i64 { (sp.e / v.gcd(&sp.e)).max(1) };
    let mut current: Vec<Vec<Int>> = (0..g.ngens())
        .map(|i| g.reduce(&g.generator(i)))
        .filter(|x| !g.is_zero(x))
        .collect();
    let mut pairs = Vec::new();
    while !current.is_empty() {
        let sub = g.subgroup_generated(&current)?;
        let d = current.iter().fold(Int::one(), |acc, x| acc.lcm(&g.element_order(x)));
        let d = d.to_i64().expect("divides e");
        let elems = sub.elements()?;
        let candidates = || current.iter().chain(elems.iter());
        let mut found = None;
        'search: for x in candidates().filter(|x| g.element_order(x) == Int::from(d)) {
            for y in candidates() {
                let v = sp.eval(x, y);
                if value_order(v) == d {
                    found = Some((x.clone(), y.clone(), v));
                    break 'search;
                }
            }
        }
        let Some((x, y, c)) = found else {
            return Err(AlgebraError::DegeneratePairing("no hyperbolic partner".into()));
        };
        // project every generator onto the orthogonal complement of <x, y>
        let mut next = Vec::new();
        for z in &current {
            let b = solve_congruence(c, sp.eval(&x, z), sp.e).expect("order argument");
            let a = solve_congruence(c, -sp.eval(&y, z), sp.e).expect("order argument");
            let w: Vec<Int> = z
                .iter()
                .zip(&x)
                .zip(&y)
                .map(|((zi, xi), yi)| zi - xi * a - yi * b)
                .collect();
            let w = g.reduce(&w);
            if !g.is_zero(&w) {
                next.push(w);
            }
        }
        debug_assert!(next.iter().all(|w| sp.eval(&x, w) == 0 && sp.eval(&y, w) == 0));
        pairs.push(HyperbolicPair {
            x,
            y,
            order: d,
            value: c,
        });
        current = next;
    }
    Ok(pairs)
}

/// A quaternion factor generated by two monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArmatureFactor {
    pub i: Monomial,
    pub j: Monomial,
    pub i_degree: Degree,
    pub j_degree: Degree,
    /// Root exponent of `i j i^-1 j^-1`.
    pub commutation: i64,
}

/// Lifts each hyperbolic pair to a pair of generator monomials (scalar part
/// left at zero; the involution module makes them symmetric).
pub fn armature_lift(p: &AlgebraPresentation, pairs: &[HyperbolicPair]) -> Result<Vec<ArmatureFactor>> {
    let ctx = p.monomials()?;
    let lift = |v: &[Int]| -> Monomial {
        Monomial {
            scalar: 0,
            exps: v.iter().map(|x| x.to_i64().expect("small exponent")).collect(),
        }
    };
    let mut out = Vec::new();
    for pr in pairs {
        let i = lift(&pr.x);
        let j = lift(&pr.y);
        let commutation = ctx.commutator(&i.exps, &j.exps);
        out.push(ArmatureFactor {
            i_degree: i.degree(p),
            j_degree: j.degree(p),
            i,
            j,
            commutation,
        });
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn symbols(rs: &[i64], m: i64, u: Option<i64>) -> AlgebraPresentation {
        let k = rs.len();
        let rank = 2 * k;
        let mut scales = Vec::new();
        for &r in rs {
            scales.push(r);
            scales.push(r);
        }
        let center = GradeLattice::diagonal(&scales);
        let mut generators = Vec::new();
        for (t, _) in rs.iter().enumerate() {
            generators.push(Generator {
                name: format!("i{}", t + 1),
                degree: Degree::unit(rank, 2 * t),
                power: rs[t],
            });
            generators.push(Generator {
                name: format!("j{}", t + 1),
                degree: Degree::unit(rank, 2 * t + 1),
                power: rs[t],
            });
        }
        let mut commutation = vec![vec![0; rank]; rank];
        for (t, &r) in rs.iter().enumerate() {
            commutation[2 * t][2 * t + 1] = m / r;
            commutation[2 * t + 1][2 * t] = (m - m / r) % m;
        }
        AlgebraPresentation {
            center,
            generators,
            commutation,
            residue: ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(m, u).unwrap()),
            residue_extension: None,
        }
    }

    #[test]
    fn congruences() {
        assert_eq!(solve_congruence(6, 4, 8), Some(2));
        assert_eq!(solve_congruence(2, 1, 4), None);
        assert_eq!(solve_congruence(0, 0, 5), Some(0));
        assert!(is_prime_power(9) && is_prime_power(2) && !is_prime_power(6) && !is_prime_power(1));
    }

    #[test]
    fn symbol_classification() {
        let p = symbols(&[4, 4], 16, Some(7));
        let c = classify(&p).unwrap();
        assert_eq!(c.tag, CaseTag::TotallyRamified);
        assert_eq!((c.n, c.e, c.partial, c.index), (16, 4, 16, 256));
    }

    #[test]
    fn unramified_classification() {
        let p = AlgebraPresentation {
            center: GradeLattice::standard(1),
            generators: vec![],
            commutation: vec![],
            residue: ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(4, Some(3)).unwrap()),
            residue_extension: None,
        };
        let c = classify(&p).unwrap();
        assert_eq!(c.tag, CaseTag::Unramified);
        assert_eq!((c.n, c.partial), (1, 1));
    }

    #[test]
    fn single_generator_trivial() {
        let p = AlgebraPresentation {
            center: GradeLattice::standard(1),
            generators: vec![Generator {
                name: "x".into(),
                degree: Degree(vec![1]),
                power: 1,
            }],
            commutation: vec![vec![0]],
            residue: ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(2, None).unwrap()),
            residue_extension: None,
        };
        let rep = validate_presentation(&p).unwrap();
        assert_eq!(rep.grade_group, p.center);
    }

    #[test]
    fn bad_commutation_rejected() {
        let mut q = symbols(&[4], 4, Some(3));
        q.commutation[1][0] = 1;
        assert!(matches!(
            validate_presentation(&q),
            Err(AlgebraError::InconsistentCommutation(_))
        ));
        let mut r = symbols(&[4], 4, Some(3));
        r.generators[0].power = 3;
        assert!(matches!(
            validate_presentation(&r),
            Err(AlgebraError::NonCentralPower(_))
        ));
    }

    #[test]
    fn semiramified_classification() {
        // E_0 a cyclic degree-3 field, Gamma_E/Gamma_T = Z/3, n = 3
        let mut p = AlgebraPresentation {
            center: GradeLattice::diagonal(&[3]),
            generators: vec![Generator {
                name: "x".into(),
                degree: Degree(vec![1]),
                power: 3,
            }],
            commutation: vec![vec![0]],
            residue: ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(2, Some(1)).unwrap()),
            residue_extension: Some(ResidueExtension {
                ind_e0: 1,
                center_degree: 3,
                galois_orders: vec![3],
                theta_images: vec![vec![1]],
            }),
        };
        let c = classify(&p).unwrap();
        assert_eq!(c.tag, CaseTag::Semiramified);
        assert_eq!((c.n, c.partial), (3, 1));
        p.residue_extension.as_mut().unwrap().theta_images = vec![vec![0]];
        assert!(classify(&p).is_err());
    }

    #[test]
    fn quaternion_pairing() {
        let p = symbols(&[2], 2, Some(1));
        let sp = symplectic_pairing(&p).unwrap();
        assert_eq!(sp.e, 2);
        assert_eq!(sp.values[0][1], 1);
        assert!(sp.is_nondegenerate().unwrap());
        let basis = symplectic_basis(&sp).unwrap();
        assert_eq!(basis.len(), 1);
    }

    #[test]
    fn degenerate_pairing() {
        let mut p = symbols(&[2], 2, Some(1));
        p.commutation = vec![vec![0, 0], vec![0, 0]];
        assert!(matches!(
            symplectic_pairing(&p),
            Err(AlgebraError::DegeneratePairing(_))
        ));
        assert!(matches!(classify(&p), Err(AlgebraError::DegeneratePairing(_))));
    }

    #[test]
    fn mixed_exponent_basis() {
        let p = symbols(&[2, 4], 8, Some(7));
        let sp = symplectic_pairing(&p).unwrap();
        let basis = symplectic_basis(&sp).unwrap();
        let orders: Vec<i64> = basis.iter().map(|b| b.order).collect();
        assert_eq!(orders, vec![4, 2]);
        for (a, pa) in basis.iter().enumerate() {
            for pb in &basis[a + 1..] {
                for u in [&pa.x, &pa.y] {
                    for v in [&pb.x, &pb.y] {
                        assert_eq!(sp.eval(u, v), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn mu_n_examples() {
        let r16 = ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(16, Some(7)).unwrap());
        assert_eq!(mu_n_of(&r16, 16).unwrap().order, 16);
        assert!(mu_n_of(&r16, 3).unwrap().group.is_trivial());
        let f9 = ResidueDatum::FiniteField(FiniteFieldDatum::new(3).unwrap());
        assert_eq!(mu_n_of(&f9, 8).unwrap().order, 8);
    }

    #[test]
    fn monomial_arithmetic() {
        let p = symbols(&[4], 4, Some(3));
        let ctx = p.monomials().unwrap();
        let i = Monomial::generator(2, 0);
        let j = Monomial::generator(2, 1);
        let ij = ctx.mul(&i, &j);
        let ji = ctx.mul(&j, &i);
        assert_eq!(ij.scalar, 0);
        assert_eq!(ji.scalar, 3); // j i = zeta^-1 i j
        let inv = ctx.inverse(&ji);
        assert_eq!(ctx.mul(&ji, &inv), Monomial::one(2));
    }
}
