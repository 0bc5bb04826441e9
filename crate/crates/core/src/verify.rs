//! Seeded randomized self-checks. Every suite is a pure function of its seed.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    AbstractResidueDatum, AlgebraPresentation, CocycleSource, Generator, ResidueDatum, ResidueExtension,
};
use crate::fgab::{full_product, lembe_product, smith_normal_form, FGAbGroup, GroupHom, Int, IntMatrix, Subgroup};
use crate::grading::{Degree, GradeLattice};
use crate::involution::{gendihedral_check, CenterAction, GaloisDatum, InvolutionDescriptor, InvolutionKind};
use crate::sk1::{
    sk1_totally_ramified, sk1u_cyclic, sk1u_msem, sk1u_semiramified, sk1u_totally_ramified, sk1u_unramified,
    ProductOptions, SKResult,
};
use crate::valued::{associated_graded, ValuedSymbolInput};

pub const SUITES: &[&str] = &[
    "snf",
    "quotient",
    "kernel",
    "lembe",
    "gendihedral",
    "sktotal",
    "exponent",
    "cross",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    /// First few failure descriptions.
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        SuiteReport {
            suite: suite.into(),
            seed,
            cases: 0,
            passed: 0,
            failed: 0,
            failures: vec![],
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Runs one suite by name, or every suite for `"all"`.
pub fn run_suite(name: &str, seed: u64) -> Option<Vec<SuiteReport>> {
    let one = |s: &str| -> Option<SuiteReport> {
        Some(match s {
            "snf" => snf_suite(seed, 1000),
            "quotient" => quotient_suite(seed, 200),
            "kernel" => kernel_suite(seed, 200),
            "lembe" => lembe_suite(seed, 500),
            "gendihedral" => gendihedral_suite(),
            "sktotal" => sktotal_suite(seed, 200),
            "exponent" => exponent_suite(seed, 500),
            "cross" => cross_suite(seed, 60),
            _ => return None,
        })
    };
    if name == "all" {
        SUITES.iter().map(|s| one(s)).collect()
    } else {
        one(name).map(|r| vec![r])
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// random objects

pub fn random_matrix(r: &mut ChaCha8Rng, max_dim: usize, bound: i64) -> IntMatrix {
    let rows = r.random_range(1..=max_dim);
    let cols = r.random_range(1..=max_dim);
    let vals: Vec<i64> = (0..rows * cols).map(|_| r.random_range(-bound..=bound)).collect();
    IntMatrix::from_i64(rows, cols, &vals)
}

/// Finite group given by a random square-ish relation matrix.
pub fn random_finite_group(r: &mut ChaCha8Rng, max_gens: usize, max_order: i64) -> FGAbGroup {
    loop {
        let n = r.random_range(1..=max_gens);
        let mut vals = Vec::with_capacity(n * (n + 1));
        for i in 0..n + 1 {
            for j in 0..n {
                let v = if i == j {
                    r.random_range(1..=6)
                } else if i < n {
                    r.random_range(-3..=3)
                } else {
                    r.random_range(0..=4)
                };
                vals.push(v);
            }
        }
        let g = FGAbGroup::new(n, IntMatrix::from_i64(n + 1, n, &vals)).expect("valid");
        if g.is_finite() && g.order().map(|o| o <= Int::from(max_order)).unwrap_or(false) {
            return g;
        }
    }
}

pub fn random_element(r: &mut ChaCha8Rng, g: &FGAbGroup) -> Vec<Int> {
    let x: Vec<Int> = (0..g.ngens()).map(|_| Int::from(r.random_range(-8..=8))).collect();
    g.reduce(&x)
}

pub fn random_subgroup(r: &mut ChaCha8Rng, g: &FGAbGroup, max_gens: usize) -> Subgroup {
    let k = r.random_range(0..=max_gens);
    let gens: Vec<Vec<Int>> = (0..k).map(|_| random_element(r, g)).collect();
    g.subgroup_generated(&gens).expect("same ambient")
}

/// Random homomorphism between finite groups given by orders.
pub fn random_hom(r: &mut ChaCha8Rng, src: &FGAbGroup, dst: &FGAbGroup, src_orders: &[i64]) -> GroupHom {
    let e = dst.exponent();
    let mut rows = Vec::new();
    for &a in src_orders {
        let y = random_element(r, dst);
        let s = &e / e.gcd(&Int::from(a));
        rows.push(dst.reduce(&y.iter().map(|v| v * &s).collect::<Vec<_>>()));
    }
    let m = IntMatrix::from_rows(dst.ngens(), &rows).expect("widths");
    GroupHom::new(src.clone(), dst.clone(), m).expect("orders respected")
}

/// `W_a` for `a` in `A`, closed so that `W_a <= W_b W_(2b-a)` for all `a, b`.
pub fn random_lembe_family(
    r: &mut ChaCha8Rng,
    u: &FGAbGroup,
    a: &FGAbGroup,
    within: &Subgroup,
    base: &Subgroup,
) -> BTreeMap<Vec<Int>, Subgroup> {
    let elems: Vec<Vec<Int>> = a.enumerate().expect("finite").collect();
    let pool = within.elements().expect("finite");
    let mut fam: BTreeMap<Vec<Int>, Subgroup> = BTreeMap::new();
    for x in &elems {
        let k = r.random_range(0..=2);
        let gens: Vec<Vec<Int>> = (0..k).map(|_| pool.choose(r).expect("nonempty").clone()).collect();
        fam.insert(x.clone(), u.subgroup_generated(&gens).expect("ambient"));
    }
    let zero = a.zero();
    let z = fam[&zero].join(base).expect("ambient");
    fam.insert(zero, z);
    loop {
        let mut changed = false;
        for x in &elems {
            for y in &elems {
                let c: Vec<Int> = y.iter().zip(x).map(|(b, a)| b * 2 - a).collect();
                let c = a.reduce(&c);
                let rhs = fam[y].join(&fam[&c]).expect("ambient");
                if !fam[x].is_subgroup_of(&rhs) {
                    let grown = fam[y].join(&fam[x]).expect("ambient");
                    fam.insert(y.clone(), grown);
                    changed = true;
                }
            }
        }
        if !changed {
            return fam;
        }
    }
}

/// Tensor product of symbol algebras with random exponents, roots and theta.
pub fn random_symbol_input(r: &mut ChaCha8Rng) -> ValuedSymbolInput {
    loop {
        let k = r.random_range(1..=2);
        let rs: Vec<i64> = (0..k).map(|_| r.random_range(2..=6)).collect();
        let n: i64 = rs.iter().product();
        if n > 36 {
            continue;
        }
        let e = rs.iter().fold(1i64, |a, b| a.lcm(b));
        let m = e * r.random_range(1..=4);
        // theta must invert every omega_i: r_i | u + 1
        let us: Vec<i64> = (0..m)
            .filter(|&u| (u * u) % m == 1 % m && rs.iter().all(|&ri| (u + 1) % ri == 0))
            .collect();
        let u = *us.choose(r).expect("u = -1 always qualifies");
        let omegas: Vec<i64> = rs
            .iter()
            .map(|&ri| {
                let units: Vec<i64> = (1..ri).filter(|c| c.gcd(&ri) == 1).collect();
                (m / ri) * units.choose(r).expect("r >= 2")
            })
            .collect();
        let mut inp = ValuedSymbolInput::new(m, Some(u), &rs).expect("u^2 = 1");
        inp.root_choices = Some(omegas);
        return inp;
    }
}

pub fn random_totally_ramified(r: &mut ChaCha8Rng) -> (AlgebraPresentation, InvolutionDescriptor) {
    let inp = random_symbol_input(r);
    let (p, tau, _) = associated_graded(&inp).expect("valid symbol input");
    (p, tau)
}

/// Tensor product of `k` quaternion symbols over a center that is ramified of
/// degree 2 over its fixed field, with generators mixed by a random unimodular
/// change of basis.
pub fn random_tr_totally_ramified(r: &mut ChaCha8Rng) -> (AlgebraPresentation, InvolutionDescriptor) {
    let k = r.random_range(1..=3);
    let rank = 2 * k;
    let m = 2 * r.random_range(1..=4);
    let mut basis = IntMatrix::identity(rank);
    for _ in 0..3 * rank {
        let (i, j) = (r.random_range(0..rank), r.random_range(0..rank));
        if i != j {
            for c in 0..rank {
                let v = basis.get(i, c) + basis.get(j, c);
                basis.set(i, c, v);
            }
        }
    }
    let row = |i: usize| -> Vec<i64> { (0..rank).map(|c| basis.get(i, c).to_i64().expect("small")).collect() };
    // standard pairing: x_(2t) x_(2t+1) = -x_(2t+1) x_(2t)
    let std = |a: usize, b: usize| -> i64 {
        if a / 2 != b / 2 || a == b {
            0
        } else {
            m / 2
        }
    };
    let mut commutation = vec![vec![0; rank]; rank];
    for a in 0..rank {
        for c in 0..rank {
            let (x, y) = (row(a), row(c));
            let mut s = 0i64;
            for b in 0..rank {
                for d in 0..rank {
                    s += x[b] * y[d] * std(b, d);
                }
            }
            commutation[a][c] = s.rem_euclid(m);
        }
    }
    let generators = (0..rank)
        .map(|a| Generator {
            name: format!("x{}", a + 1),
            degree: Degree(row(a)),
            power: 2,
        })
        .collect();
    let p = AlgebraPresentation {
        center: GradeLattice::diagonal(&vec![2; rank]),
        generators,
        commutation,
        residue: ResidueDatum::RootsOfUnity(crate::algebra::RootsOfUnityDatum::new(m, Some(1)).expect("m >= 1")),
        residue_extension: None,
    };
    // Gamma_R is the kernel of a nonzero functional Gamma_T -> Z/2
    let f: Vec<i64> = loop {
        let f: Vec<i64> = (0..rank).map(|_| r.random_range(0..2)).collect();
        if f.contains(&1) {
            break f;
        }
    };
    let pivot = f.iter().position(|&x| x == 1).expect("nonzero");
    let fixed: Vec<Vec<Int>> = (0..rank)
        .map(|i| {
            let mut v = vec![Int::zero(); rank];
            if i == pivot {
                v[i] = Int::from(4);
            } else {
                v[i] = Int::from(2);
                v[pivot] = Int::from(2 * f[i]);
            }
            v
        })
        .collect();
    let signs = (0..rank).map(|_| if r.random_bool(0.5) { 0 } else { m / 2 }).collect();
    let tau = InvolutionDescriptor {
        kind: InvolutionKind::Unitary,
        center_action: CenterAction {
            fixed_lattice: GradeLattice::new(rank, &fixed).expect("full rank"),
            residue_nontrivial: false,
        },
        signs,
    };
    (p, tau)
}

fn unitary(p: &AlgebraPresentation) -> InvolutionDescriptor {
    InvolutionDescriptor {
        kind: InvolutionKind::Unitary,
        center_action: CenterAction {
            fixed_lattice: p.center.clone(),
            residue_nontrivial: true,
        },
        signs: vec![0; p.ngens()],
    }
}

/// Presentation over `Z^k` with center `diag(orders)` and one generator per coordinate.
fn diagonal_presentation(orders: &[i64], ext: ResidueExtension, d: AbstractResidueDatum) -> AlgebraPresentation {
    let k = orders.len();
    let generators = orders
        .iter()
        .enumerate()
        .map(|(i, &o)| Generator {
            name: format!("x{}", i + 1),
            degree: Degree::unit(k, i),
            power: o,
        })
        .collect();
    AlgebraPresentation {
        center: GradeLattice::diagonal(orders),
        generators,
        commutation: vec![vec![0; k]; k],
        residue: ResidueDatum::Abstract(Box::new(d)),
        residue_extension: Some(ext),
    }
}

fn small_orders(r: &mut ChaCha8Rng, max_gens: usize, max_order: i64) -> Vec<i64> {
    loop {
        let k = r.random_range(1..=max_gens);
        let o: Vec<i64> = (0..k)
            .map(|_| *[2i64, 3, 4, 6, 8].choose(r).expect("nonempty"))
            .collect();
        if o.iter().product::<i64>() <= max_order {
            return o;
        }
    }
}

/// Abstract datum whose sigma family satisfies the containment hypothesis,
/// with cocycle values inside the sigma product.
fn random_abstract(r: &mut ChaCha8Rng, h_orders: &[i64], n: i64) -> AbstractResidueDatum {
    let uo = small_orders(r, 2, 32);
    let to = small_orders(r, 2, 32);
    let u = FGAbGroup::from_orders(&uo);
    let ut = FGAbGroup::from_orders(&to);
    let norm = random_hom(r, &u, &ut, &uo);
    let r0 = random_subgroup(r, &ut, 2);
    let num = norm.preimage(&r0).expect("ambient");
    let h = FGAbGroup::from_orders(h_orders);
    let base = GroupHom::scalar(&u, n).image_of(&num).expect("ambient");
    let fam = random_lembe_family(r, &u, &h, &num, &base);
    let mut galois_gens = Vec::new();
    for _ in h_orders {
        let c = *[1i64, 3, 5, 7].choose(r).expect("nonempty");
        let s = GroupHom::scalar(&u, c);
        let ok = s.then(&norm).map(|x| x.equals(&norm)).unwrap_or(false);
        galois_gens.push(if ok { s } else { GroupHom::identity(&u) });
    }
    let mut sigma_subgroups = BTreeMap::new();
    for (k, w) in &fam {
        let key: Vec<i64> = k
            .iter()
            .zip(h_orders)
            .map(|(x, &o)| x.mod_floor(&Int::from(o)).to_i64().expect("small"))
            .collect();
        sigma_subgroups.insert(key, w.clone());
    }
    let tau_bar = if r.random_bool(0.5) {
        GroupHom::identity(&u)
    } else {
        GroupHom::scalar(&u, -1)
    };
    AbstractResidueDatum {
        u: u.clone(),
        ut,
        galois_gens,
        tau_bar,
        norm,
        r0_part: r0,
        sigma_subgroups,
        torsion: None,
        roots_embedding: None,
        conorm: None,
        cocycle: None,
        e0_is_field: false,
    }
}

/// Cocycle table on `q` with values drawn from `inside`.
fn random_table(r: &mut ChaCha8Rng, q: &FGAbGroup, inside: &Subgroup) -> CocycleSource {
    let elems: Vec<Vec<Int>> = q.enumerate().expect("finite").collect();
    let pool = inside.elements().expect("finite");
    let mut t = BTreeMap::new();
    for a in &elems {
        for b in &elems {
            let v = pool.choose(r).expect("nonempty").clone();
            t.insert((q.canonical(a), q.canonical(b)), v);
        }
    }
    CocycleSource::Table(t)
}

fn sigma_product_of(d: &AbstractResidueDatum) -> Subgroup {
    Subgroup::join_all(&d.u, d.sigma_subgroups.values()).expect("ambient")
}

/// Semiramified instance, `Gamma_E / Gamma_T = H` given by `h_orders`.
pub fn random_semiramified(r: &mut ChaCha8Rng) -> (AlgebraPresentation, InvolutionDescriptor) {
    let h_orders = small_orders(r, 2, 16);
    let n: i64 = h_orders.iter().product();
    let mut d = random_abstract(r, &h_orders, n);
    let k = h_orders.len();
    let ext = ResidueExtension {
        ind_e0: 1,
        center_degree: n,
        galois_orders: h_orders.clone(),
        theta_images: (0..k).map(|i| (0..k).map(|j| (i == j) as i64).collect()).collect(),
    };
    let p0 = diagonal_presentation(&h_orders, ext.clone(), d.clone());
    let q = p0.degree_quotient().expect("finite");
    d.cocycle = Some(random_table(r, &q, &sigma_product_of(&d)));
    let p = diagonal_presentation(&h_orders, ext, d);
    let tau = unitary(&p);
    (p, tau)
}

/// Inertially split instance with cyclic `Gamma_E / Gamma_T` and `E_0` not a field.
pub fn random_cyclic(r: &mut ChaCha8Rng) -> (AlgebraPresentation, InvolutionDescriptor) {
    let d_ = *[2i64, 3, 4].choose(r).expect("nonempty");
    let ind = *[2i64, 3].choose(r).expect("nonempty");
    let n = ind * d_;
    let mut d = random_abstract(r, &[d_], n);
    let ext = ResidueExtension {
        ind_e0: ind,
        center_degree: d_,
        galois_orders: vec![d_],
        theta_images: vec![vec![1]],
    };
    let p0 = diagonal_presentation(&[d_], ext.clone(), d.clone());
    let q = p0.degree_quotient().expect("finite");
    d.cocycle = Some(random_table(r, &q, &sigma_product_of(&d)));
    let p = diagonal_presentation(&[d_], ext, d);
    let tau = unitary(&p);
    (p, tau)
}

/// Unramified instance with `Sigma_0` inside the norm preimage.
pub fn random_unramified(r: &mut ChaCha8Rng) -> (AlgebraPresentation, InvolutionDescriptor) {
    let ind = *[2i64, 3, 4].choose(r).expect("nonempty");
    let uo = small_orders(r, 2, 32);
    let to = small_orders(r, 2, 32);
    let u = FGAbGroup::from_orders(&uo);
    let ut = FGAbGroup::from_orders(&to);
    let norm = random_hom(r, &u, &ut, &uo);
    let r0 = random_subgroup(r, &ut, 2);
    let num = norm.preimage(&r0).expect("ambient");
    let extra = random_subgroup(r, &u, 1).intersection(&num).expect("ambient");
    let s0 = GroupHom::scalar(&u, ind)
        .image_of(&num)
        .expect("ambient")
        .join(&extra)
        .expect("ambient");
    let d = AbstractResidueDatum {
        u: u.clone(),
        ut,
        galois_gens: vec![],
        tau_bar: GroupHom::identity(&u),
        norm,
        r0_part: r0,
        sigma_subgroups: BTreeMap::from([(vec![], s0)]),
        torsion: None,
        roots_embedding: None,
        conorm: None,
        cocycle: None,
        e0_is_field: false,
    };
    let p = AlgebraPresentation {
        center: GradeLattice::standard(1),
        generators: vec![],
        commutation: vec![],
        residue: ResidueDatum::Abstract(Box::new(d)),
        residue_extension: Some(ResidueExtension {
            ind_e0: ind,
            center_degree: 1,
            galois_orders: vec![],
            theta_images: vec![],
        }),
    };
    let tau = unitary(&p);
    (p, tau)
}

// ---------------------------------------------------------------------------
// suites

fn minors_gcd(a: &IntMatrix, k: usize) -> Int {
    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                out.push((0..n).filter(|&i| mask >> i & 1 == 1).collect());
            }
        }
        out
    }
    let mut g = Int::zero();
    for rs in subsets(a.rows(), k) {
        for cs in subsets(a.cols(), k) {
            let mut m = IntMatrix::zeros(k, k);
            for (i, &ri) in rs.iter().enumerate() {
                for (j, &cj) in cs.iter().enumerate() {
                    m.set(i, j, a.get(ri, cj).clone());
                }
            }
            g = g.gcd(&m.det());
        }
    }
    g
}

pub fn snf_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("snf", seed);
    for _ in 0..cases {
        let a = random_matrix(&mut r, 4, 5);
        let f = smith_normal_form(&a);
        let prod_ok = f.u.mul(&a).mul(&f.v) == f.s;
        let unimod = f.u.det().abs().is_one() && f.v.det().abs().is_one();
        let d = f.diagonal();
        let mut minors_ok = true;
        let mut acc = Int::one();
        for k in 1..=d.len() {
            acc *= &d[k - 1];
            if minors_gcd(&a, k) != acc.abs() {
                minors_ok = false;
            }
        }
        rep.record(prod_ok && unimod && minors_ok, || format!("{a:?}"));
    }
    rep
}

pub fn quotient_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("quotient", seed);
    for _ in 0..cases {
        let g = random_finite_group(&mut r, 3, 64);
        let h = random_subgroup(&mut r, &g, 2);
        let all: Vec<Vec<Int>> = g.enumerate().expect("finite").collect();
        let in_h = all.iter().filter(|x| h.contains(x)).count();
        let q = g.quotient(&h).expect("ambient");
        let ok = Int::from(all.len()) == g.order().expect("finite")
            && q.order().expect("finite") * Int::from(in_h) == Int::from(all.len());
        rep.record(ok, || format!("{g} / {in_h} elements"));
    }
    rep
}

pub fn kernel_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("kernel", seed);
    for _ in 0..cases {
        let so = small_orders(&mut r, 3, 64);
        let to = small_orders(&mut r, 2, 32);
        let s = FGAbGroup::from_orders(&so);
        let t = FGAbGroup::from_orders(&to);
        let f = random_hom(&mut r, &s, &t, &so);
        let all: Vec<Vec<Int>> = s.enumerate().expect("finite").collect();
        let zero_count = all.iter().filter(|x| t.is_zero(&f.apply(x))).count();
        let mut images: Vec<Vec<Int>> = all.iter().map(|x| t.canonical(&f.apply(x))).collect();
        images.sort();
        images.dedup();
        let ker = f.kernel();
        let ok = ker.order().expect("finite") == Int::from(zero_count)
            && f.image().order().expect("finite") == Int::from(images.len())
            && all.iter().all(|x| ker.contains(x) == t.is_zero(&f.apply(x)));
        rep.record(ok, || format!("{s} -> {t}"));
    }
    rep
}

pub fn lembe_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("lembe", seed);
    let us = [vec![8i64], vec![2, 4], vec![2, 2, 2]];
    let as_ = [vec![4i64], vec![2, 2]];
    for i in 0..cases {
        let u = FGAbGroup::from_orders(&us[i % 3]);
        let a = FGAbGroup::from_orders(&as_[(i / 3) % 2]);
        let fam = random_lembe_family(&mut r, &u, &a, &u.whole(), &u.trivial_subgroup());
        let w = |x: &[Int]| fam[&a.reduce(x)].clone();
        let gens: Vec<Vec<Int>> = (0..a.ngens()).map(|j| a.generator(j)).collect();
        let ok = match (lembe_product(&u, &a, &w, &gens, true), full_product(&u, &a, &w)) {
            (Ok(p), Ok(f)) => p.same_as(&f),
            _ => false,
        };
        rep.record(ok, || format!("U = {u}, A = {a}"));
    }
    rep
}

/// Order of `(h, s)` in `H x| <t>` with `t h t^-1 = act(h)`, `t^2 = sq`.
fn semidirect_order(h: &FGAbGroup, act: &GroupHom, sq: &[Int], x: &(Vec<Int>, bool)) -> usize {
    let mul = |a: &(Vec<Int>, bool), b: &(Vec<Int>, bool)| -> (Vec<Int>, bool) {
        let moved = if a.1 { act.apply(&b.0) } else { b.0.clone() };
        let mut s = h.add(&a.0, &moved);
        if a.1 && b.1 {
            s = h.add(&s, sq);
        }
        (h.canonical(&s), a.1 ^ b.1)
    };
    let one = (h.canonical(&h.zero()), false);
    let x = (h.canonical(&x.0), x.1);
    let mut y = x.clone();
    let mut k = 1;
    while y != one {
        y = mul(&y, &x);
        k += 1;
    }
    k
}

/// Every abelian group of order at most `bound`, by invariant factors.
pub fn abelian_groups_up_to(bound: i64) -> Vec<Vec<i64>> {
    fn rec(rest: i64, last: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        out.push(cur.clone());
        // next factor is a multiple of the previous one
        let mut f = last.max(2);
        while f <= rest {
            if f % last == 0 {
                cur.push(f);
                rec(rest / f, f, cur, out);
                cur.pop();
            }
            f += 1;
        }
    }
    let mut out = Vec::new();
    rec(bound, 1, &mut vec![], &mut out);
    out
}

pub fn gendihedral_suite() -> SuiteReport {
    let mut rep = SuiteReport::new("gendihedral", 0);
    for orders in abelian_groups_up_to(64) {
        for g in [GaloisDatum::identity(&orders), GaloisDatum::inversion(&orders)] {
            let h = g.group();
            let act = g.action().expect("valid");
            let sq: Vec<Int> = g.tau_square.iter().map(|&x| Int::from(x)).collect();
            let brute = h
                .enumerate()
                .expect("finite")
                .all(|x| semidirect_order(&h, &act, &sq, &(x, true)) == 2);
            let ok = gendihedral_check(&g).map(|b| b == brute).unwrap_or(false);
            rep.record(ok, || format!("H = {orders:?}"));
        }
    }
    rep
}

pub fn sktotal_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("sktotal", seed);
    for _ in 0..cases {
        let (p, tau) = random_totally_ramified(&mut r);
        let ok = match (sk1u_totally_ramified(&p, &tau), sk1_totally_ramified(&p)) {
            (Ok(a), Ok(b)) => {
                let (oa, ob) = (a.order(), b.order());
                (&ob % &oa).is_zero() && (a.digest.e % 2 == 0 || oa == ob)
            }
            _ => false,
        };
        rep.record(ok, || format!("{:?}", p.commutation));
    }
    rep
}

/// Results of every calculator on one random instance.
pub fn random_results(r: &mut ChaCha8Rng) -> Vec<SKResult> {
    let opts = ProductOptions::default();
    let mut out = Vec::new();
    match r.random_range(0..4) {
        0 => {
            let (p, tau) = random_totally_ramified(r);
            out.extend(sk1u_totally_ramified(&p, &tau));
            out.extend(sk1_totally_ramified(&p));
        }
        1 => {
            let (p, tau) = random_semiramified(r);
            out.extend(sk1u_semiramified(&p, &tau, opts));
            out.extend(sk1u_msem(&p, &tau, opts));
        }
        2 => {
            let (p, tau) = random_cyclic(r);
            out.extend(sk1u_cyclic(&p, &tau));
            out.extend(sk1u_msem(&p, &tau, opts));
        }
        _ => {
            let (p, tau) = random_unramified(r);
            out.extend(sk1u_unramified(&p, &tau));
        }
    }
    out
}

pub fn exponent_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("exponent", seed);
    for _ in 0..cases {
        let results = random_results(&mut r);
        let ok = !results.is_empty()
            && results.iter().all(|res| {
                let elems: Vec<Vec<Int>> = res.group.enumerate().expect("finite").collect();
                elems
                    .iter()
                    .all(|x| res.group.is_zero(&res.group.scale(&Int::from(res.digest.n), x)))
            });
        rep.record(ok, || "calculator failed or exponent law broken".into());
    }
    rep
}

pub fn cross_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut r = rng(seed);
    let mut rep = SuiteReport::new("cross", seed);
    for i in 0..cases {
        let lembe = ProductOptions {
            check_lembe: true,
            representative_doubling: true,
        };
        let full = ProductOptions::default();
        let ok = if i % 2 == 0 {
            let (p, tau) = random_semiramified(&mut r);
            match (sk1u_semiramified(&p, &tau, full), sk1u_msem(&p, &tau, lembe)) {
                (Ok(a), Ok(b)) => a.invariant_factors() == b.invariant_factors(),
                _ => false,
            }
        } else {
            let (p, tau) = random_cyclic(&mut r);
            match (sk1u_cyclic(&p, &tau), sk1u_msem(&p, &tau, lembe)) {
                (Ok(a), Ok(b)) => a.invariant_factors() == b.invariant_factors(),
                _ => false,
            }
        };
        rep.record(ok, || format!("case {i}"));
    }
    rep
}
