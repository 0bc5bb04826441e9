//! Command-line front end: input documents, job dispatch and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    classify, AbstractResidueDatum, AlgebraError, AlgebraPresentation, CocycleSource, ConormData, FiniteFieldDatum,
    Generator, ResidueDatum, ResidueExtension, RootsEmbedding, RootsOfUnityDatum, TorsionDatum,
};
use crate::fgab::{FGAbGroup, GroupHom, Int, IntMatrix};
use crate::grading::{Degree, GradeLattice};
use crate::involution::{detect_tr_case, CenterAction, InvolutionDescriptor, InvolutionError, InvolutionKind};
use crate::sk1::{sk1, sk1u, InputsDigest, ProductOptions, SKResult, SkError};
use crate::valued::{associated_graded, sk1_valued, sk1u_valued, BridgeCertificate, ValuedError, ValuedSymbolInput};
use crate::verify::{run_suite, SuiteReport};

// ---------------------------------------------------------------------------
// arguments

#[derive(Parser, Debug)]
#[command(name = "gradsk", version, about = "SK1 and unitary SK1 of graded division algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Ramification case and invariants of a presentation.
    Classify(JobArgs),
    /// Reduced Whitehead group SK1(E).
    Sk1(JobArgs),
    /// Reduced unitary Whitehead group SK1(E, tau).
    Sk1u(JobArgs),
    /// Associated graded algebra of a symbol algebra over iterated Laurent series.
    Bridge(JobArgs),
    /// Seeded randomized self-checks.
    Verify(JobArgs),
    /// Print the input document of a built-in example.
    Example(JobArgs),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
pub struct JobArgs {
    /// Input document (.json or .toml).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    /// Built-in example instead of an input document.
    #[arg(long)]
    pub example: Option<String>,
    /// Symbol exponents for `--example toex`.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<i64>,
    /// Roots of unity `mu_M` in the coefficient field.
    #[arg(long)]
    pub mu: Option<i64>,
    /// Action of theta on roots of unity, `zeta -> zeta^U`.
    #[arg(long)]
    pub theta: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub residue_char: i64,
    #[arg(long)]
    pub check_lembe: bool,
    #[arg(long)]
    pub representative_doubling: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Suite name for `verify`.
    #[arg(long, default_value = "all")]
    pub suite: String,
}

// ---------------------------------------------------------------------------
// errors

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Unreadable or schema-invalid input; exit code 1.
    Schema(String),
    /// A case precondition does not hold; exit code 2.
    Precondition(String),
    /// An internal consistency check failed; exit code 3.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 1,
            CliError::Precondition(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Precondition(m) | CliError::Internal(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self {
            CliError::Schema(_) => "schema error",
            CliError::Precondition(_) => "precondition failed",
            CliError::Internal(_) => "internal invariant violated",
        };
        write!(f, "{kind}: {}", self.message())
    }
}

fn schema(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{path}: {msg}"))
}

impl From<SkError> for CliError {
    fn from(e: SkError) -> Self {
        match e {
            SkError::InvariantBreach(_) | SkError::ExponentLawViolated { .. } => CliError::Internal(e.to_string()),
            SkError::Algebra(a) => a.into(),
            SkError::Involution(i) => i.into(),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::InsufficientResidueData(field) => schema(&field, "required for this computation"),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<InvolutionError> for CliError {
    fn from(e: InvolutionError) -> Self {
        match e {
            InvolutionError::Algebra(a) => a.into(),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<ValuedError> for CliError {
    fn from(e: ValuedError) -> Self {
        match e {
            ValuedError::InvalidInput(m) => schema("symbol", m),
            ValuedError::Algebra(a) => a.into(),
            ValuedError::Involution(i) => i.into(),
            ValuedError::Sk(s) => s.into(),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// input documents

/// Integer that may be given as a decimal string when it does not fit in 64 bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Small(i64),
    Big(String),
}

impl Num {
    fn int(&self, path: &str) -> Result<Int, CliError> {
        match self {
            Num::Small(v) => Ok(Int::from(*v)),
            Num::Big(s) => s
                .trim()
                .parse::<Int>()
                .map_err(|_| schema(path, format!("`{s}` is not an integer"))),
        }
    }

    fn small(&self, path: &str) -> Result<i64, CliError> {
        self.int(path)?
            .to_i64()
            .ok_or_else(|| schema(path, "value does not fit in 64 bits"))
    }
}

impl From<&Int> for Num {
    fn from(v: &Int) -> Self {
        match v.to_i64() {
            Some(x) => Num::Small(x),
            None => Num::Big(v.to_string()),
        }
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::Small(v)
    }
}

type Matrix = Vec<Vec<Num>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    /// Generators of the center lattice `Gamma_T`, one row per generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<GeneratorDoc>,
    /// `beta[i][j]`: `x_i x_j = zeta^beta[i][j] x_j x_i`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub commutation: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<ResidueDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<InvolutionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_model: Option<ResidueModelDoc>,
    /// Symbol algebra over iterated Laurent series, for `bridge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub degree: Vec<Num>,
    pub power: Num,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResidueDoc {
    RootsOfUnity(RootsDoc),
    FiniteField(FiniteFieldDoc),
    Abstract(Box<AbstractDoc>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsDoc {
    pub m: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_multiplier: Option<Num>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteFieldDoc {
    pub q0: Num,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractDoc {
    /// Cyclic orders of the model of `E_0^*` (0 for an infinite cyclic factor).
    pub u: Vec<Num>,
    pub ut: Vec<Num>,
    #[serde(default)]
    pub galois_gens: Vec<Matrix>,
    #[serde(default)]
    pub tau_bar: Option<Matrix>,
    pub norm: Matrix,
    #[serde(default)]
    pub r0_part: Matrix,
    #[serde(default)]
    pub sigma_subgroups: Vec<SigmaDoc>,
    #[serde(default)]
    pub torsion: Option<TorsionDoc>,
    #[serde(default)]
    pub roots_embedding: Option<EmbeddingDoc>,
    #[serde(default)]
    pub conorm: Option<ConormDoc>,
    #[serde(default)]
    pub cocycle: Option<CocycleDoc>,
    #[serde(default)]
    pub e0_is_field: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaDoc {
    pub h: Vec<Num>,
    pub generators: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionDoc {
    pub m: Num,
    pub tau_multiplier: Num,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDoc {
    pub order: Num,
    /// Image in `U` of a generator of `mu_order`.
    pub image: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConormDoc {
    pub center: Vec<Num>,
    pub nrd: Matrix,
    #[serde(default)]
    pub tau_center: Option<Matrix>,
    #[serde(default)]
    pub t0_part: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CocycleDoc {
    Commutators,
    Table(Vec<CocycleEntry>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub a: Vec<Num>,
    pub b: Vec<Num>,
    pub value: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolutionDoc {
    pub kind: KindDoc,
    /// Generators of `Gamma_R`; defaults to the center lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_lattice: Option<Matrix>,
    /// Whether `tau_bar` moves `T_0`; defaults to true for unitary involutions with `Gamma_R = Gamma_T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_nontrivial: Option<bool>,
    /// `tau(x_i) = zeta^signs[i] x_i`; defaults to zeros.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<Num>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDoc {
    Unitary,
    FirstKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueModelDoc {
    #[serde(default = "one")]
    pub ind_e0: Num,
    #[serde(default = "one")]
    pub center_degree: Num,
    #[serde(default)]
    pub galois_orders: Vec<Num>,
    #[serde(default)]
    pub theta_images: Matrix,
}

fn one() -> Num {
    Num::Small(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDoc {
    pub m: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Num>,
    pub exponents: Vec<Num>,
    #[serde(default)]
    pub residue_char: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_choices: Option<Vec<Num>>,
}

/// Parses a JSON or TOML document; errors name the offending path.
pub fn parse_document(text: &str, toml_syntax: bool) -> Result<Document, CliError> {
    let named = |path: String, inner: String| {
        let path = if path.is_empty() || path == "." {
            "document".to_string()
        } else {
            path
        };
        CliError::Schema(format!("{path}: {inner}"))
    };
    if toml_syntax {
        let de = toml::de::Deserializer::parse(text).map_err(|e| named(String::new(), e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| named(e.path().to_string(), e.inner().to_string()))
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| named(e.path().to_string(), e.inner().to_string()))
    }
}

fn ints(v: &[Num], path: &str) -> Result<Vec<Int>, CliError> {
    v.iter()
        .enumerate()
        .map(|(i, x)| x.int(&format!("{path}[{i}]")))
        .collect()
}

fn smalls(v: &[Num], path: &str) -> Result<Vec<i64>, CliError> {
    v.iter()
        .enumerate()
        .map(|(i, x)| x.small(&format!("{path}[{i}]")))
        .collect()
}

fn rows(m: &Matrix, width: usize, path: &str) -> Result<Vec<Vec<Int>>, CliError> {
    m.iter()
        .enumerate()
        .map(|(i, r)| {
            let p = format!("{path}[{i}]");
            if r.len() != width {
                return Err(schema(&p, format!("expected {width} entries, found {}", r.len())));
            }
            ints(r, &p)
        })
        .collect()
}

fn group_of(orders: &[Num], path: &str) -> Result<FGAbGroup, CliError> {
    let o = smalls(orders, path)?;
    if o.iter().any(|&x| x < 0) {
        return Err(schema(path, "orders must be nonnegative"));
    }
    Ok(FGAbGroup::from_orders(&o))
}

fn hom(src: &FGAbGroup, dst: &FGAbGroup, m: &Matrix, path: &str) -> Result<GroupHom, CliError> {
    if m.len() != src.ngens() {
        return Err(schema(
            path,
            format!("expected {} rows, found {}", src.ngens(), m.len()),
        ));
    }
    let r = rows(m, dst.ngens(), path)?;
    let mat = IntMatrix::from_rows(dst.ngens(), &r).map_err(|e| schema(path, e))?;
    GroupHom::new(src.clone(), dst.clone(), mat).map_err(|e| schema(path, e))
}

fn subgroup(g: &FGAbGroup, m: &Matrix, path: &str) -> Result<crate::fgab::Subgroup, CliError> {
    let r = rows(m, g.ngens(), path)?;
    g.subgroup_generated(&r).map_err(|e| schema(path, e))
}

fn abstract_datum(d: &AbstractDoc) -> Result<AbstractResidueDatum, CliError> {
    let p = "residue";
    let u = group_of(&d.u, &format!("{p}.u"))?;
    let ut = group_of(&d.ut, &format!("{p}.ut"))?;
    let galois_gens = d
        .galois_gens
        .iter()
        .enumerate()
        .map(|(i, m)| hom(&u, &u, m, &format!("{p}.galois_gens[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let tau_bar = match &d.tau_bar {
        Some(m) => hom(&u, &u, m, &format!("{p}.tau_bar"))?,
        None => GroupHom::identity(&u),
    };
    let norm = hom(&u, &ut, &d.norm, &format!("{p}.norm"))?;
    let r0_part = subgroup(&ut, &d.r0_part, &format!("{p}.r0_part"))?;
    let mut sigma_subgroups = BTreeMap::new();
    for (i, s) in d.sigma_subgroups.iter().enumerate() {
        let path = format!("{p}.sigma_subgroups[{i}]");
        let key = smalls(&s.h, &format!("{path}.h"))?;
        let sub = subgroup(&u, &s.generators, &format!("{path}.generators"))?;
        if sigma_subgroups.insert(key, sub).is_some() {
            return Err(schema(&format!("{path}.h"), "duplicate key"));
        }
    }
    let torsion = match &d.torsion {
        Some(t) => Some(TorsionDatum {
            m: t.m.small(&format!("{p}.torsion.m"))?,
            tau_multiplier: t.tau_multiplier.small(&format!("{p}.torsion.tau_multiplier"))?,
        }),
        None => None,
    };
    let roots_embedding = match &d.roots_embedding {
        Some(e) => {
            let path = format!("{p}.roots_embedding");
            let order = e.order.small(&format!("{path}.order"))?;
            if order < 1 {
                return Err(schema(&format!("{path}.order"), "must be positive"));
            }
            let src = FGAbGroup::cyclic(order);
            let map = hom(&src, &u, &vec![e.image.clone()], &format!("{path}.image"))?;
            Some(RootsEmbedding { order, map })
        }
        None => None,
    };
    let conorm = match &d.conorm {
        Some(c) => {
            let path = format!("{p}.conorm");
            let center = group_of(&c.center, &format!("{path}.center"))?;
            let nrd = hom(&u, &center, &c.nrd, &format!("{path}.nrd"))?;
            let tau_center = match &c.tau_center {
                Some(m) => hom(&center, &center, m, &format!("{path}.tau_center"))?,
                None => GroupHom::identity(&center),
            };
            let t0_part = subgroup(&center, &c.t0_part, &format!("{path}.t0_part"))?;
            Some(ConormData {
                center,
                nrd,
                tau_center,
                t0_part,
            })
        }
        None => None,
    };
    let cocycle = match &d.cocycle {
        Some(CocycleDoc::Commutators) => Some(CocycleSource::Commutators),
        Some(CocycleDoc::Table(entries)) => {
            let mut t = BTreeMap::new();
            for (i, e) in entries.iter().enumerate() {
                let path = format!("{p}.cocycle.table[{i}]");
                let value = ints(&e.value, &format!("{path}.value"))?;
                if value.len() != u.ngens() {
                    return Err(schema(
                        &format!("{path}.value"),
                        format!("expected {} entries", u.ngens()),
                    ));
                }
                t.insert(
                    (ints(&e.a, &format!("{path}.a"))?, ints(&e.b, &format!("{path}.b"))?),
                    value,
                );
            }
            Some(CocycleSource::Table(t))
        }
        None => None,
    };
    Ok(AbstractResidueDatum {
        u,
        ut,
        galois_gens,
        tau_bar,
        norm,
        r0_part,
        sigma_subgroups,
        torsion,
        roots_embedding,
        conorm,
        cocycle,
        e0_is_field: d.e0_is_field,
    })
}

/// Cocycle keys are given on generator exponents; they are canonicalized in `Gamma_E / Gamma_T`.
fn canonical_cocycle(p: &mut AlgebraPresentation) -> Result<(), CliError> {
    let q = p.degree_quotient().map_err(CliError::from)?;
    if let ResidueDatum::Abstract(d) = &mut p.residue {
        if let Some(CocycleSource::Table(t)) = &mut d.cocycle {
            let mut out = BTreeMap::new();
            for ((a, b), v) in std::mem::take(t) {
                if a.len() != q.ngens() || b.len() != q.ngens() {
                    return Err(schema(
                        "residue.cocycle.table",
                        format!("keys must have {} entries", q.ngens()),
                    ));
                }
                out.insert((q.canonical(&a), q.canonical(&b)), v);
            }
            *t = out;
        }
    }
    Ok(())
}

pub fn presentation(doc: &Document) -> Result<AlgebraPresentation, CliError> {
    let center_rows = doc.center.as_ref().ok_or_else(|| schema("center", "missing field"))?;
    let rank = center_rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| schema("center", "at least one row is required"))?;
    let center = GradeLattice::new(rank, &rows(center_rows, rank, "center")?).map_err(|e| schema("center", e))?;
    let mut generators = Vec::new();
    for (i, g) in doc.generators.iter().enumerate() {
        let path = format!("generators[{i}]");
        let degree = smalls(&g.degree, &format!("{path}.degree"))?;
        if degree.len() != rank {
            return Err(schema(&format!("{path}.degree"), format!("expected {rank} entries")));
        }
        generators.push(Generator {
            name: g.name.clone().unwrap_or_else(|| format!("x{}", i + 1)),
            degree: Degree(degree),
            power: g.power.small(&format!("{path}.power"))?,
        });
    }
    let k = generators.len();
    let commutation = if doc.commutation.is_empty() {
        vec![vec![0; k]; k]
    } else {
        if doc.commutation.len() != k {
            return Err(schema("commutation", format!("expected {k} rows")));
        }
        doc.commutation
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let p = format!("commutation[{i}]");
                if r.len() != k {
                    return Err(schema(&p, format!("expected {k} entries")));
                }
                smalls(r, &p)
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let residue = match doc.residue.as_ref().ok_or_else(|| schema("residue", "missing field"))? {
        ResidueDoc::RootsOfUnity(r) => {
            let m = r.m.small("residue.m")?;
            let u = r
                .tau_multiplier
                .as_ref()
                .map(|u| u.small("residue.tau_multiplier"))
                .transpose()?;
            ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(m, u).map_err(|e| schema("residue", e))?)
        }
        ResidueDoc::FiniteField(f) => ResidueDatum::FiniteField(
            FiniteFieldDatum::new(f.q0.small("residue.q0")?).map_err(|e| schema("residue.q0", e))?,
        ),
        ResidueDoc::Abstract(a) => ResidueDatum::Abstract(Box::new(abstract_datum(a)?)),
    };
    let residue_extension = match &doc.residue_model {
        Some(r) => Some(ResidueExtension {
            ind_e0: r.ind_e0.small("residue_model.ind_e0")?,
            center_degree: r.center_degree.small("residue_model.center_degree")?,
            galois_orders: smalls(&r.galois_orders, "residue_model.galois_orders")?,
            theta_images: r
                .theta_images
                .iter()
                .enumerate()
                .map(|(i, row)| smalls(row, &format!("residue_model.theta_images[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
        }),
        None => None,
    };
    let mut p = AlgebraPresentation {
        center,
        generators,
        commutation,
        residue,
        residue_extension,
    };
    canonical_cocycle(&mut p)?;
    Ok(p)
}

pub fn involution(doc: &Document, p: &AlgebraPresentation) -> Result<InvolutionDescriptor, CliError> {
    let inv = doc
        .involution
        .as_ref()
        .ok_or_else(|| schema("involution", "missing field"))?;
    let rank = p.rank();
    let fixed_lattice = match &inv.fixed_lattice {
        Some(m) => GradeLattice::new(rank, &rows(m, rank, "involution.fixed_lattice")?)
            .map_err(|e| schema("involution.fixed_lattice", e))?,
        None => p.center.clone(),
    };
    let kind = match inv.kind {
        KindDoc::Unitary => InvolutionKind::Unitary,
        KindDoc::FirstKind => InvolutionKind::FirstKind,
    };
    let residue_nontrivial = inv
        .residue_nontrivial
        .unwrap_or(kind == InvolutionKind::Unitary && fixed_lattice == p.center);
    let signs = match &inv.signs {
        Some(s) => smalls(s, "involution.signs")?,
        None => vec![0; p.ngens()],
    };
    if kind == InvolutionKind::Unitary {
        if let ResidueDatum::RootsOfUnity(r) = &p.residue {
            if r.tau_multiplier.is_none() {
                return Err(schema("residue.tau_multiplier", "required for a unitary involution"));
            }
        }
    }
    Ok(InvolutionDescriptor {
        kind,
        center_action: CenterAction {
            fixed_lattice,
            residue_nontrivial,
        },
        signs,
    })
}

pub fn symbol_input(s: &SymbolDoc) -> Result<ValuedSymbolInput, CliError> {
    let m = s.m.small("symbol.m")?;
    let theta = s.theta.as_ref().map(|t| t.small("symbol.theta")).transpose()?;
    let exponents = smalls(&s.exponents, "symbol.exponents")?;
    for (i, &r) in exponents.iter().enumerate() {
        if r < 2 {
            return Err(schema(
                &format!("symbol.exponents[{i}]"),
                format!("{r} must be at least 2"),
            ));
        }
    }
    let mut inp = ValuedSymbolInput::new(m, theta, &exponents).map_err(|e| schema("symbol", e))?;
    if s.residue_char < 0 {
        return Err(schema("symbol.residue_char", "must be 0 or a prime"));
    }
    inp.residue_char = s.residue_char;
    inp.root_choices = s
        .root_choices
        .as_ref()
        .map(|r| smalls(r, "symbol.root_choices"))
        .transpose()?;
    Ok(inp)
}

/// Document form of a presentation with a roots-of-unity or finite-field residue.
pub fn document_of(p: &AlgebraPresentation, tau: Option<&InvolutionDescriptor>) -> Result<Document, CliError> {
    let mat = |rows: &[Vec<Int>]| -> Matrix { rows.iter().map(|r| r.iter().map(Num::from).collect()).collect() };
    let residue = match &p.residue {
        ResidueDatum::RootsOfUnity(r) => ResidueDoc::RootsOfUnity(RootsDoc {
            m: r.m.into(),
            tau_multiplier: r.tau_multiplier.map(Num::from),
        }),
        ResidueDatum::FiniteField(f) => ResidueDoc::FiniteField(FiniteFieldDoc { q0: f.q0.into() }),
        ResidueDatum::Abstract(_) => {
            return Err(CliError::Precondition(
                "abstract residue data cannot be exported".into(),
            ))
        }
    };
    let involution = tau.map(|t| InvolutionDoc {
        kind: match t.kind {
            InvolutionKind::Unitary => KindDoc::Unitary,
            InvolutionKind::FirstKind => KindDoc::FirstKind,
        },
        fixed_lattice: Some(mat(t.center_action.fixed_lattice.basis())),
        residue_nontrivial: Some(t.center_action.residue_nontrivial),
        signs: Some(t.signs.iter().map(|&s| s.into()).collect()),
    });
    Ok(Document {
        center: Some(mat(p.center.basis())),
        generators: p
            .generators
            .iter()
            .map(|g| GeneratorDoc {
                name: Some(g.name.clone()),
                degree: g.degree.0.iter().map(|&d| d.into()).collect(),
                power: g.power.into(),
            })
            .collect(),
        commutation: p
            .commutation
            .iter()
            .map(|r| r.iter().map(|&b| b.into()).collect())
            .collect(),
        residue: Some(residue),
        involution,
        residue_model: p.residue_extension.as_ref().map(|e| ResidueModelDoc {
            ind_e0: e.ind_e0.into(),
            center_degree: e.center_degree.into(),
            galois_orders: e.galois_orders.iter().map(|&x| x.into()).collect(),
            theta_images: e
                .theta_images
                .iter()
                .map(|r| r.iter().map(|&x| x.into()).collect())
                .collect(),
        }),
        symbol: None,
    })
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub case: String,
    pub n: i64,
    pub e: i64,
    pub partial: i64,
    pub index: i64,
    pub ind_e0: i64,
    pub center_degree: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr_case: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupReport {
    /// `SK1` or `SK1U`.
    pub name: String,
    pub invariant_factors: Vec<String>,
    pub rendered: String,
    pub order: String,
    pub theorem: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
    pub digest: InputsDigest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<GroupReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BridgeCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document: Option<Document>,
    #[serde(default)]
    pub checks: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            classification: None,
            result: None,
            certificate: None,
            suites: vec![],
            document: None,
            checks: vec![],
        }
    }
}

fn group_report(name: &str, r: &SKResult, via: Option<&str>) -> GroupReport {
    GroupReport {
        name: name.into(),
        invariant_factors: r.invariant_factors().iter().map(Int::to_string).collect(),
        rendered: r.rendered(),
        order: r.order().to_string(),
        theorem: r.theorem_tag.name().into(),
        via: via.map(str::to_string),
        digest: r.digest.clone(),
    }
}

pub fn render_json(r: &Report) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize")
}

pub fn parse_report(s: &str) -> Result<Report, CliError> {
    serde_json::from_str(s).map_err(|e| CliError::Schema(format!("report: {e}")))
}

struct Palette {
    on: bool,
}

impl Palette {
    fn paint(&self, code: &str, s: &str) -> String {
        if self.on {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

pub fn render_text(r: &Report, color: bool) -> String {
    let pal = Palette { on: color };
    let mut out = String::new();
    if let Some(c) = &r.classification {
        let _ = writeln!(out, "{}, ∂={}", c.case, c.partial);
        let _ = writeln!(
            out,
            "  n = {}, e = {}, |Gamma_E : Gamma_T| = {}, ind(E_0) = {}, [Z(E_0):T_0] = {}",
            c.n, c.e, c.index, c.ind_e0, c.center_degree
        );
        if let Some(t) = &c.tr_case {
            let _ = writeln!(out, "  involution: {t}");
        }
    }
    if let Some(cert) = &r.certificate {
        let _ = writeln!(out, "tameness: {:?}, defectless: {}", cert.tameness, cert.defectless);
        for n in &cert.notes {
            let _ = writeln!(out, "  {n}");
        }
    }
    if let Some(g) = &r.result {
        let tag = match &g.via {
            Some(v) => format!("{} via {v}", g.theorem),
            None => g.theorem.clone(),
        };
        let _ = writeln!(out, "{} = {} ({tag})", pal.paint("1", &g.name), g.rendered);
    }
    for s in &r.suites {
        let status = if s.ok() {
            pal.paint("32", "pass")
        } else {
            pal.paint("31", "FAIL")
        };
        let _ = writeln!(
            out,
            "{}: {status} {} passed, {} failed (seed {})",
            s.suite, s.passed, s.failed, s.seed
        );
        for f in &s.failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    if let Some(d) = &r.document {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(d).expect("documents serialize"));
    }
    for c in &r.checks {
        let _ = writeln!(out, "  check: {c}");
    }
    out
}

// ---------------------------------------------------------------------------
// jobs

enum Input {
    Graded(Box<Document>),
    Symbol(ValuedSymbolInput),
}

fn toex_input(args: &JobArgs) -> Result<ValuedSymbolInput, CliError> {
    if args.r.is_empty() {
        return Err(schema("--r", "symbol exponents are required"));
    }
    for (i, &r) in args.r.iter().enumerate() {
        if r < 2 {
            return Err(schema(&format!("--r[{i}]"), format!("{r} must be at least 2")));
        }
    }
    let e = args.r.iter().fold(1i64, |a, &b| num_integer::lcm(a, b));
    let m = args.mu.unwrap_or(e);
    let mut inp = ValuedSymbolInput::new(m, args.theta, &args.r).map_err(|e| schema("--theta", e))?;
    inp.residue_char = args.residue_char;
    Ok(inp)
}

fn load_input(args: &JobArgs) -> Result<Input, CliError> {
    match (&args.example, &args.input) {
        (Some(_), Some(_)) => Err(CliError::Schema("--example and --input are mutually exclusive".into())),
        (Some(name), None) => match name.as_str() {
            "toex" => Ok(Input::Symbol(toex_input(args)?)),
            other => Err(schema(
                "--example",
                format!("unknown example `{other}` (available: toex)"),
            )),
        },
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
            let toml_syntax = path.extension().is_some_and(|x| x == "toml");
            let doc = parse_document(&text, toml_syntax)?;
            match &doc.symbol {
                Some(s) => {
                    if doc.center.is_some() || doc.residue.is_some() || !doc.generators.is_empty() {
                        return Err(schema("symbol", "cannot be combined with an explicit presentation"));
                    }
                    Ok(Input::Symbol(symbol_input(s)?))
                }
                None => Ok(Input::Graded(Box::new(doc))),
            }
        }
        (None, None) => Err(CliError::Schema("one of --input or --example is required".into())),
    }
}

fn classification_report(
    p: &AlgebraPresentation,
    tau: Option<&InvolutionDescriptor>,
) -> Result<ClassificationReport, CliError> {
    let c = classify(p)?;
    let tr_case = match tau {
        Some(t) if t.kind == InvolutionKind::Unitary => Some(detect_tr_case(p, t)?.name().to_string()),
        Some(_) => None,
        None => None,
    };
    Ok(ClassificationReport {
        case: c.tag.name().into(),
        n: c.n,
        e: c.e,
        partial: c.partial,
        index: c.index,
        ind_e0: c.ind_e0,
        center_degree: c.center_degree,
        tr_case,
    })
}

fn graded(
    input: Input,
) -> Result<
    (
        AlgebraPresentation,
        Option<InvolutionDescriptor>,
        Option<BridgeCertificate>,
    ),
    CliError,
> {
    match input {
        Input::Graded(doc) => {
            let p = presentation(&doc)?;
            let tau = if doc.involution.is_some() {
                Some(involution(&doc, &p)?)
            } else {
                None
            };
            Ok((p, tau, None))
        }
        Input::Symbol(s) => {
            let (p, tau, cert) = associated_graded(&s)?;
            let tau = s.residue.tau_multiplier.map(|_| tau);
            Ok((p, tau, Some(cert)))
        }
    }
}

/// Runs one job and returns its report.
pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Classify(a) => {
            let (p, tau, cert) = graded(load_input(a)?)?;
            let mut r = Report::new("classify");
            r.classification = Some(classification_report(&p, tau.as_ref())?);
            r.certificate = cert;
            Ok(r)
        }
        Command::Sk1(a) => {
            let mut r = Report::new("sk1");
            match load_input(a)? {
                Input::Symbol(s) => {
                    let v = sk1_valued(&s)?;
                    r.result = Some(group_report("SK1", &v.result, None));
                    r.checks = v.result.checks.clone();
                    r.certificate = Some(v.certificate);
                }
                g => {
                    let (p, _, _) = graded(g)?;
                    let res = sk1(&p)?;
                    r.result = Some(group_report("SK1", &res, None));
                    r.checks = res.checks;
                }
            }
            Ok(r)
        }
        Command::Sk1u(a) => {
            let mut r = Report::new("sk1u");
            match load_input(a)? {
                Input::Symbol(s) => {
                    if s.residue.tau_multiplier.is_none() {
                        return Err(schema("--theta", "required for a unitary involution"));
                    }
                    let v = sk1u_valued(&s)?;
                    r.result = Some(group_report("SK1U", &v.result, Some("ThInvolthm2")));
                    r.checks = v.result.checks.clone();
                    r.certificate = Some(v.certificate);
                }
                g => {
                    let (p, tau, _) = graded(g)?;
                    let tau = tau.ok_or_else(|| schema("involution", "missing field"))?;
                    let opts = ProductOptions {
                        check_lembe: a.check_lembe,
                        representative_doubling: a.representative_doubling,
                    };
                    let res = sk1u(&p, &tau, opts)?;
                    r.result = Some(group_report("SK1U", &res, None));
                    r.checks = res.checks;
                }
            }
            Ok(r)
        }
        Command::Bridge(a) => {
            let s = match load_input(a)? {
                Input::Symbol(s) => s,
                Input::Graded(_) => return Err(schema("symbol", "bridge needs a symbol document or --example toex")),
            };
            let mut r = Report::new("bridge");
            let (p, tau, cert) = associated_graded(&s)?;
            let has_theta = s.residue.tau_multiplier.is_some();
            r.classification = Some(classification_report(&p, has_theta.then_some(&tau))?);
            if has_theta {
                let v = sk1u_valued(&s)?;
                r.result = Some(group_report("SK1U", &v.result, Some("ThInvolthm2")));
                r.checks = v.result.checks.clone();
                r.certificate = Some(v.certificate);
            } else {
                r.certificate = Some(cert);
            }
            Ok(r)
        }
        Command::Verify(a) => {
            let suites =
                run_suite(&a.suite, a.seed).ok_or_else(|| schema("--suite", format!("unknown suite `{}`", a.suite)))?;
            let mut r = Report::new("verify");
            r.suites = suites;
            Ok(r)
        }
        Command::Example(a) => {
            let (p, tau, _) = graded(load_input(a)?)?;
            let mut r = Report::new("example");
            r.document = Some(document_of(&p, tau.as_ref())?);
            Ok(r)
        }
    }
}

fn output_of(command: &Command) -> OutputFormat {
    match command {
        Command::Classify(a)
        | Command::Sk1(a)
        | Command::Sk1u(a)
        | Command::Bridge(a)
        | Command::Verify(a)
        | Command::Example(a) => a.output,
    }
}

pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs a parsed command and renders its report.
pub fn run(command: &Command, color: bool) -> RunOutput {
    let format = output_of(command);
    match execute(command) {
        Ok(report) => {
            let failed = report.suites.iter().any(|s| !s.ok());
            let stdout = match format {
                OutputFormat::Json => render_json(&report) + "\n",
                OutputFormat::Text => render_text(&report, color),
            };
            RunOutput {
                code: if failed { 3 } else { 0 },
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => RunOutput {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("gradsk: {e}\n"),
        },
    }
}

/// Entry point for the binary.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use std::io::IsTerminal;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
    let out = run(&cli.command, !no_color && std::io::stdout().is_terminal());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}
