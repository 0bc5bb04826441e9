//! Finite presentations of graded division algebras with graded involution,
//! and exact computation of their reduced Whitehead group `SK1(E)` and
//! reduced unitary Whitehead group `SK1(E, tau)` as finitely generated
//! abelian groups.

pub mod algebra;
pub mod cli;
pub mod fgab;
pub mod grading;
pub mod involution;
pub mod sk1;
pub mod valued;
pub mod verify;
