//! Grade groups as sublattices of `Z^r`, ordered right-to-left lexicographically.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fgab::{solve_left, FGAbGroup, FgabError, Int, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradingError {
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("lattice is not contained in the larger lattice")]
    NotASublattice,
    #[error("index is infinite")]
    InfiniteIndex,
    #[error(transparent)]
    Group(#[from] FgabError),
}

pub type Result<T> = std::result::Result<T, GradingError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Degree(pub Vec<i64>);

impl Degree {
    pub fn zero(rank: usize) -> Self {
        Degree(vec![0; rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut d = vec![0; rank];
        d[i] = 1;
        Degree(d)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &Degree) -> Degree {
        Degree(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: i64) -> Degree {
        Degree(self.0.iter().map(|a| a * k).collect())
    }

    pub fn to_ints(&self) -> Vec<Int> {
        self.0.iter().map(|&x| Int::from(x)).collect()
    }
}

/// Right-to-left lexicographic comparison: the last coordinate is most significant.
pub fn lex_compare(a: &Degree, b: &Degree) -> Result<Ordering> {
    if a.rank() != b.rank() {
        return Err(GradingError::RankMismatch {
            expected: a.rank(),
            found: b.rank(),
        });
    }
    Ok(a.0.iter().rev().cmp(b.0.iter().rev()))
}

/// Row-style Hermite normal form with zero rows removed: pivots move right as
/// rows go down, pivots are positive, entries above a pivot lie in `[0, pivot)`.
pub fn hermite_rows(cols: usize, rows: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let mut a: Vec<Vec<Int>> = rows.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        loop {
            // row with smallest nonzero entry in column c moves up to r
            let best = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(p) = best else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..a.len() {
                if !a[i][c].is_zero() {
                    let q = a[i][c].div_floor(&a[r][c]);
                    for k in c..cols {
                        let v = &a[r][k] * &q;
                        a[i][k] -= v;
                    }
                    if !a[i][c].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for k in c..cols {
                a[r][k] = -&a[r][k];
            }
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            if !q.is_zero() {
                for k in c..cols {
                    let v = &a[r][k] * &q;
                    a[i][k] -= v;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Sublattice of `Z^r`, stored by its Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradeLattice {
    rank: usize,
    basis: Vec<Vec<Int>>,
}

impl GradeLattice {
    pub fn new(rank: usize, gens: &[Vec<Int>]) -> Result<Self> {
        for g in gens {
            if g.len() != rank {
                return Err(GradingError::RankMismatch {
                    expected: rank,
                    found: g.len(),
                });
            }
        }
        Ok(GradeLattice {
            rank,
            basis: hermite_rows(rank, gens),
        })
    }

    pub fn from_degrees(rank: usize, gens: &[Degree]) -> Result<Self> {
        let rows: Vec<Vec<Int>> = gens.iter().map(Degree::to_ints).collect();
        Self::new(rank, &rows)
    }

    pub fn standard(rank: usize) -> Self {
        let gens: Vec<Degree> = (0..rank).map(|i| Degree::unit(rank, i)).collect();
        Self::from_degrees(rank, &gens).expect("unit vectors")
    }

    /// `d_1 Z x ... x d_r Z`.
    pub fn diagonal(scales: &[i64]) -> Self {
        let r = scales.len();
        let gens: Vec<Degree> = (0..r).map(|i| Degree::unit(r, i).scale(scales[i])).collect();
        Self::from_degrees(r, &gens).expect("diagonal")
    }

    pub fn ambient_rank(&self) -> usize {
        self.rank
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Int>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.rank, &self.basis).expect("uniform width")
    }

    /// Coordinates of `v` in the stored basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[Int]) -> Option<Vec<Int>> {
        if v.len() != self.rank {
            return None;
        }
        solve_left(&self.basis_matrix(), v)
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_degree(&self, d: &Degree) -> bool {
        self.contains(&d.to_ints())
    }

    pub fn is_sublattice_of(&self, big: &GradeLattice) -> bool {
        self.rank == big.rank && self.basis.iter().all(|b| big.contains(b))
    }

    pub fn join(&self, other: &GradeLattice) -> Result<GradeLattice> {
        if self.rank != other.rank {
            return Err(GradingError::RankMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        let mut gens = self.basis.clone();
        gens.extend(other.basis.iter().cloned());
        GradeLattice::new(self.rank, &gens)
    }

    pub fn scaled(&self, k: i64) -> GradeLattice {
        let k = Int::from(k);
        let gens: Vec<Vec<Int>> = self.basis.iter().map(|b| b.iter().map(|x| x * &k).collect()).collect();
        GradeLattice::new(self.rank, &gens).expect("same rank")
    }
}

/// `big / small`, presented on the basis of `big`.
pub fn quotient_lattice(big: &GradeLattice, small: &GradeLattice) -> Result<FGAbGroup> {
    if big.rank != small.rank {
        return Err(GradingError::RankMismatch {
            expected: big.rank,
            found: small.rank,
        });
    }
    let mut rels = Vec::with_capacity(small.basis.len());
    for b in &small.basis {
        rels.push(big.coordinates(b).ok_or(GradingError::NotASublattice)?);
    }
    let k = big.basis.len();
    Ok(FGAbGroup::new(k, IntMatrix::from_rows(k, &rels)?)?)
}

/// Class of a vector of `big` in `big / small`, in the generators of [`quotient_lattice`].
pub fn quotient_class(big: &GradeLattice, v: &[Int]) -> Result<Vec<Int>> {
    big.coordinates(v).ok_or(GradingError::NotASublattice)
}

pub fn index(big: &GradeLattice, small: &GradeLattice) -> Result<Int> {
    let q = quotient_lattice(big, small)?;
    q.order().map_err(|_| GradingError::InfiniteIndex)
}

/// `dim_ES == dim_E0S0 * |big : small|`.
pub fn fundamental_equality_check(
    dim_es: &Int,
    dim_e0s0: &Int,
    big: &GradeLattice,
    small: &GradeLattice,
) -> Result<bool> {
    let idx = index(big, small)?;
    Ok(*dim_es == dim_e0s0 * idx)
}
