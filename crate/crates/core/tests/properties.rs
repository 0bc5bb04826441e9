use std::cmp::Ordering;

use clap::Parser;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gradsk_core::algebra::{
    classify, symplectic_basis, symplectic_pairing, validate_presentation, AlgebraPresentation, Monomial, ResidueDatum,
    RootsOfUnityDatum,
};
use gradsk_core::cli::{execute, parse_report, render_json, Cli};
use gradsk_core::fgab::{FGAbGroup, Int, IntMatrix};
use gradsk_core::grading::{index, lex_compare, quotient_lattice, Degree, GradeLattice};
use gradsk_core::involution::{
    apply_tau, detect_tr_case, symmetric_transversal, twist, validate_involution, CenterAction, InvolutionDescriptor,
    InvolutionError, InvolutionKind,
};
use gradsk_core::valued::{associated_graded, ValuedSymbolInput};
use gradsk_core::verify;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

fn orders() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(1i64..=8, 1..=3)
}

/// Full-rank square integer matrix with small entries.
fn nonsingular(rank: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, rank), rank).prop_filter("full rank", move |rows| {
        let m = IntMatrix::from_i64(rank, rank, &rows.concat());
        !m.det().is_zero()
    })
}

fn lattice_from(rows: &[Vec<i64>]) -> GradeLattice {
    let r = rows.len();
    GradeLattice::new(r, &rows.iter().map(|v| ints(v)).collect::<Vec<_>>()).unwrap()
}

fn times(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum())
                .collect()
        })
        .collect()
}

/// Unimodular matrix as a product of elementary row operations.
fn unimodular(rank: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..rank, 0..rank, -2i64..=2), 0..8).prop_map(move |ops| {
        let mut m: Vec<Vec<i64>> = (0..rank)
            .map(|i| (0..rank).map(|j| (i == j) as i64).collect())
            .collect();
        for (i, j, k) in ops {
            if i != j {
                for c in 0..rank {
                    m[i][c] += k * m[j][c];
                }
            }
        }
        m
    })
}

fn symbol_presentation(seed: u64) -> (AlgebraPresentation, InvolutionDescriptor, ValuedSymbolInput) {
    let inp = verify::random_symbol_input(&mut rng(seed));
    let (p, tau, _) = associated_graded(&inp).unwrap();
    (p, tau, inp)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lex_order_is_translation_invariant(
        a in prop::collection::vec(-5i64..=5, 3),
        b in prop::collection::vec(-5i64..=5, 3),
        c in prop::collection::vec(-5i64..=5, 3),
    ) {
        let (a, b, c) = (Degree(a), Degree(b), Degree(c));
        let ab = lex_compare(&a, &b).unwrap();
        prop_assert_eq!(lex_compare(&b, &a).unwrap(), ab.reverse());
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        prop_assert_eq!(lex_compare(&a.add(&c), &b.add(&c)).unwrap(), ab);
    }

    #[test]
    fn lattice_quotient_by_itself_is_trivial(rows in nonsingular(3)) {
        let l = lattice_from(&rows);
        let q = quotient_lattice(&l, &l).unwrap();
        prop_assert!(q.order().unwrap().is_one());
    }

    #[test]
    fn index_is_multiplicative(e in nonsingular(2), t in nonsingular(2), r in nonsingular(2)) {
        let ge = lattice_from(&e);
        let gt_rows = times(&t, &e);
        let gt = lattice_from(&gt_rows);
        let gr = lattice_from(&times(&r, &gt_rows));
        let whole = index(&ge, &gr).unwrap();
        prop_assert_eq!(whole, index(&ge, &gt).unwrap() * index(&gt, &gr).unwrap());
    }

    #[test]
    fn enumerate_visits_each_element_once(o in orders()) {
        let g = FGAbGroup::from_orders(&o);
        let mut seen: Vec<Vec<Int>> = g.enumerate().unwrap().map(|x| g.canonical(&x)).collect();
        let n = seen.len();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), n);
        prop_assert_eq!(Int::from(n), g.order().unwrap());
    }

    #[test]
    fn kernel_image_law(so in orders(), to in orders(), seed in any::<u64>()) {
        let (s, t) = (FGAbGroup::from_orders(&so), FGAbGroup::from_orders(&to));
        let f = verify::random_hom(&mut rng(seed), &s, &t, &so);
        prop_assert_eq!(f.kernel().order().unwrap() * f.image().order().unwrap(), s.order().unwrap());
    }

    #[test]
    fn quotient_order_law(o in orders(), seed in any::<u64>()) {
        let g = FGAbGroup::from_orders(&o);
        let h = verify::random_subgroup(&mut rng(seed), &g, 2);
        prop_assert_eq!(g.quotient(&h).unwrap().order().unwrap() * h.order().unwrap(), g.order().unwrap());
    }

    #[test]
    fn classify_ignores_generator_order_and_coordinates(seed in any::<u64>(), u in unimodular(4)) {
        let (p, _, _) = symbol_presentation(seed);
        let base = classify(&p).unwrap();
        // reverse the generators
        let k = p.generators.len();
        let mut q = p.clone();
        q.generators.reverse();
        q.commutation = (0..k).map(|i| (0..k).map(|j| p.commutation[k - 1 - i][k - 1 - j]).collect()).collect();
        prop_assert_eq!(classify(&q).unwrap(), base.clone());
        // re-coordinatize the ambient lattice: d -> d U
        let rank = p.rank();
        if rank <= 4 {
            let u: Vec<Vec<i64>> = (0..rank).map(|i| u[i][..rank].to_vec()).collect();
            let unimod = IntMatrix::from_i64(rank, rank, &u.concat()).det().abs().is_one();
            prop_assume!(unimod);
            let move_row = |d: &[i64]| -> Vec<i64> { (0..rank).map(|j| (0..rank).map(|i| d[i] * u[i][j]).sum()).collect() };
            let mut r = p.clone();
            for g in &mut r.generators {
                g.degree = Degree(move_row(&g.degree.0));
            }
            let basis: Vec<Vec<i64>> = p.center.basis().iter().map(|b| move_row(&b.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>())).collect();
            r.center = lattice_from(&basis);
            prop_assert_eq!(classify(&r).unwrap(), base);
        }
    }

    #[test]
    fn totally_ramified_index_is_square(seed in any::<u64>()) {
        let (p, _, _) = symbol_presentation(seed);
        let c = classify(&p).unwrap();
        prop_assert_eq!(c.n * c.n, c.index);
        prop_assert_eq!(c.n % c.e, 0);
    }

    #[test]
    fn symplectic_basis_reproduces_pairing(seed in any::<u64>()) {
        let (p, _, _) = symbol_presentation(seed);
        let sp = symplectic_pairing(&p).unwrap();
        let pairs = symplectic_basis(&sp).unwrap();
        let e = sp.e;
        let mut covered = Int::one();
        for (a, pa) in pairs.iter().enumerate() {
            prop_assert_eq!(sp.eval(&pa.x, &pa.y).rem_euclid(e), pa.value.rem_euclid(e));
            prop_assert_eq!(e / num_integer::gcd(pa.value, e), pa.order);
            covered *= Int::from(pa.order * pa.order);
            for pb in &pairs[a + 1..] {
                for x in [&pa.x, &pa.y] {
                    for y in [&pb.x, &pb.y] {
                        prop_assert_eq!(sp.eval(x, y).rem_euclid(e), 0);
                    }
                }
            }
        }
        prop_assert_eq!(covered, sp.group.order().unwrap());
    }

    #[test]
    fn twist_keeps_center_action(seed in any::<u64>(), c in prop::collection::vec(-3i64..=3, 4)) {
        let (p, tau, _) = symbol_presentation(seed);
        let k = p.ngens();
        let t = Monomial { scalar: 0, exps: c[..k].to_vec() };
        let tw = twist(&p, &tau, &t).unwrap();
        prop_assert_eq!(&tw.center_action, &tau.center_action);
        prop_assert_eq!(detect_tr_case(&p, &tw).unwrap(), detect_tr_case(&p, &tau).unwrap());
        prop_assert!(validate_involution(&p, &tw).is_ok());
    }

    #[test]
    fn symmetric_transversal_is_fixed(seed in any::<u64>(), degs in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 1..6)) {
        let (p, tau, inp) = symbol_presentation(seed);
        let rank = p.rank();
        let degs: Vec<Degree> = degs.into_iter().map(|d| Degree(d[..rank].to_vec())).collect();
        let u = inp.residue.tau_multiplier.unwrap();
        let ctx = p.monomials().unwrap();
        for d in &degs {
            match symmetric_transversal(&p, &tau, std::slice::from_ref(d)) {
                Ok(out) => {
                    prop_assert_eq!(&out[0].degree(&p), d);
                    prop_assert_eq!(&apply_tau(&ctx, u.rem_euclid(ctx.modulus), &tau.signs, &out[0]), &out[0]);
                }
                Err(InvolutionError::NoSymmetricElement(_)) => {
                    // no root-of-unity multiple of the monomial of this degree is fixed
                    let exps = gradsk_core::involution::monomial_of_degree(&p, d).unwrap();
                    for scalar in 0..ctx.modulus {
                        let x = Monomial { scalar, exps: exps.clone() };
                        prop_assert_ne!(apply_tau(&ctx, u.rem_euclid(ctx.modulus), &tau.signs, &x), x);
                    }
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn associated_graded_is_valid(seed in any::<u64>()) {
        let (p, tau, inp) = symbol_presentation(seed);
        prop_assert!(validate_presentation(&p).is_ok());
        prop_assert!(validate_involution(&p, &tau).is_ok());
        let c = classify(&p).unwrap();
        prop_assert_eq!(c.n, inp.degree());
        prop_assert_eq!(c.e, inp.exponent());
        prop_assert!(symplectic_pairing(&p).unwrap().is_nondegenerate().unwrap());
    }

    #[test]
    fn involution_validation_matches_expansion(
        m in prop::sample::select(vec![2i64, 4, 6, 8, 12]),
        u_pick in any::<prop::sample::Index>(),
        signs in prop::collection::vec(0i64..12, 2),
        b in 0i64..12,
    ) {
        let us: Vec<i64> = (0..m).filter(|u| (u * u) % m == 1 % m).collect();
        let u = *u_pick.get(&us);
        let signs: Vec<i64> = signs.iter().map(|s| s % m).collect();
        let b = b % m;
        // x y = zeta^b y x with x^m, y^m central
        let p = AlgebraPresentation {
            center: GradeLattice::diagonal(&[m, m]),
            generators: vec![
                gradsk_core::algebra::Generator { name: "x".into(), degree: Degree::unit(2, 0), power: m },
                gradsk_core::algebra::Generator { name: "y".into(), degree: Degree::unit(2, 1), power: m },
            ],
            commutation: vec![vec![0, b], vec![(m - b) % m, 0]],
            residue: ResidueDatum::RootsOfUnity(RootsOfUnityDatum::new(m, Some(u)).unwrap()),
            residue_extension: None,
        };
        prop_assume!(validate_presentation(&p).is_ok());
        let tau = InvolutionDescriptor {
            kind: InvolutionKind::Unitary,
            center_action: CenterAction { fixed_lattice: p.center.clone(), residue_nontrivial: true },
            signs: signs.clone(),
        };
        // tau(x) = zeta^s x: tau^2(x) = zeta^(u s + s) x, and applying tau to
        // x y = zeta^b y x gives zeta^(s_x + s_y) y x = zeta^(u b + s_x + s_y) x y
        let squares = signs.iter().all(|&s| (u * s + s).rem_euclid(m) == 0);
        let relation = (u * b + b).rem_euclid(m) == 0;
        prop_assert_eq!(validate_involution(&p, &tau).is_ok(), squares && relation);
    }

    #[test]
    fn json_report_round_trips(seed in any::<u64>()) {
        let inp = verify::random_symbol_input(&mut rng(seed));
        let rs = inp.exponents.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        let mu = inp.residue.m.to_string();
        let theta = inp.residue.tau_multiplier.unwrap().to_string();
        let cli = Cli::try_parse_from(["gradsk", "bridge", "--example", "toex", "--r", &rs, "--mu", &mu, "--theta", &theta]).unwrap();
        let report = execute(&cli.command).unwrap();
        prop_assert_eq!(parse_report(&render_json(&report)).unwrap(), report);
    }
}
