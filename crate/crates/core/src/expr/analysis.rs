//! Degree analysis and extraction of linear coefficients.

use crate::error::{Error, Result};

use super::ast::{Expr, ExprMatrix};

/// Degree of `e` in the term `t`: 1 for `t` itself, 0 for anything else,
/// max over `+`/`-`, sum over `*`, and 0 under `sg`.
pub fn degree(e: &Expr, t: &str) -> u32 {
    joint_degree(e, &[t])
}

/// Degree counting every occurrence of any of `pivots` as degree 1, so a
/// product of two distinct pivots has joint degree 2.
pub fn joint_degree<S: AsRef<str>>(e: &Expr, pivots: &[S]) -> u32 {
    match e {
        Expr::Const(_) | Expr::Sg(_) => 0,
        Expr::Term(n) => u32::from(pivots.iter().any(|p| p.as_ref() == n)),
        Expr::Add(a, b) | Expr::Sub(a, b) => joint_degree(a, pivots).max(joint_degree(b, pivots)),
        Expr::Mul(a, b) => joint_degree(a, pivots) + joint_degree(b, pivots),
    }
}

/// Anything made of expression entries: verdicts over it are conjunctions
/// over the entries.
pub trait Entries {
    fn entry_list(&self) -> Vec<&Expr>;
}

impl Entries for Expr {
    fn entry_list(&self) -> Vec<&Expr> {
        vec![self]
    }
}

impl Entries for [Expr] {
    fn entry_list(&self) -> Vec<&Expr> {
        self.iter().collect()
    }
}

impl Entries for Vec<Expr> {
    fn entry_list(&self) -> Vec<&Expr> {
        self.iter().collect()
    }
}

impl Entries for ExprMatrix {
    fn entry_list(&self) -> Vec<&Expr> {
        self.entries().collect()
    }
}

pub fn is_essentially_constant<E: Entries + ?Sized>(e: &E, t: &str) -> bool {
    e.entry_list().into_iter().all(|x| degree(x, t) == 0)
}

pub fn is_essentially_linear<E: Entries + ?Sized>(e: &E, t: &str) -> bool {
    e.entry_list().into_iter().all(|x| degree(x, t) <= 1)
}

/// `Q1 * pivots + Q2`: row `i` of `q1` holds the coefficients of entry `i`,
/// one column per pivot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearDecomposition {
    pivots: Vec<String>,
    q1: ExprMatrix,
    q2: Vec<Expr>,
}

impl LinearDecomposition {
    /// Builds a decomposition without checking that the coefficients are
    /// free of the pivots. The growth guard exists to catch such mistakes.
    pub fn unchecked(pivots: Vec<String>, q1: ExprMatrix, q2: Vec<Expr>) -> Result<Self> {
        if q1.rows() != q2.len() || q1.cols() != pivots.len() {
            return Err(Error::InvalidInput(format!(
                "decomposition shape {}x{} does not match {} entries and {} pivots",
                q1.rows(),
                q1.cols(),
                q2.len(),
                pivots.len()
            )));
        }
        Ok(LinearDecomposition { pivots, q1, q2 })
    }

    pub fn pivots(&self) -> &[String] {
        &self.pivots
    }

    pub fn q1(&self) -> &ExprMatrix {
        &self.q1
    }

    pub fn q2(&self) -> &[Expr] {
        &self.q2
    }

    /// `sum_k Q1[i][k] * pivot_k + Q2[i]` for each entry.
    pub fn reconstruct(&self) -> Vec<Expr> {
        (0..self.q2.len())
            .map(|i| {
                self.pivots
                    .iter()
                    .enumerate()
                    .fold(self.q2[i].clone(), |acc, (k, p)| {
                        acc + self.q1.get(i, k).clone() * Expr::term(p.clone())
                    })
            })
            .collect()
    }
}

/// Coefficients of one expression; `None` stands for zero.
struct Parts {
    coeffs: Vec<Option<Expr>>,
    rest: Option<Expr>,
}

impl Parts {
    fn constant(e: Expr, n: usize) -> Parts {
        Parts {
            coeffs: vec![None; n],
            rest: Some(e),
        }
    }

    fn combine(self, other: Parts, sub: bool) -> Parts {
        let join = |a: Option<Expr>, b: Option<Expr>| match (a, b) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) if sub => Some(Expr::constant(-1) * b),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) if sub => Some(a - b),
            (Some(a), Some(b)) => Some(a + b),
        };
        Parts {
            coeffs: self
                .coeffs
                .into_iter()
                .zip(other.coeffs)
                .map(|(a, b)| join(a, b))
                .collect(),
            rest: join(self.rest, other.rest),
        }
    }

    fn scale(self, by: &Expr, left: bool) -> Parts {
        let mul = |e: Option<Expr>| {
            e.map(|e| {
                if e == Expr::constant(1) {
                    by.clone()
                } else if left {
                    by.clone() * e
                } else {
                    e * by.clone()
                }
            })
        };
        Parts {
            coeffs: self.coeffs.into_iter().map(mul).collect(),
            rest: mul(self.rest),
        }
    }
}

fn split(e: &Expr, pivots: &[String], entry: usize) -> Result<Parts> {
    let n = pivots.len();
    match e {
        Expr::Term(name) => match pivots.iter().position(|p| p == name) {
            Some(k) => {
                let mut coeffs = vec![None; n];
                coeffs[k] = Some(Expr::constant(1));
                Ok(Parts { coeffs, rest: None })
            }
            None => Ok(Parts::constant(e.clone(), n)),
        },
        Expr::Const(_) | Expr::Sg(_) => Ok(Parts::constant(e.clone(), n)),
        Expr::Add(a, b) => Ok(split(a, pivots, entry)?.combine(split(b, pivots, entry)?, false)),
        Expr::Sub(a, b) => Ok(split(a, pivots, entry)?.combine(split(b, pivots, entry)?, true)),
        Expr::Mul(a, b) => {
            let (da, db) = (joint_degree(a, pivots), joint_degree(b, pivots));
            match (da, db) {
                (0, 0) => Ok(Parts::constant(e.clone(), n)),
                (1, 0) => Ok(split(a, pivots, entry)?.scale(b, false)),
                (0, 1) => Ok(split(b, pivots, entry)?.scale(a, true)),
                _ => {
                    let term = pivots
                        .iter()
                        .max_by_key(|p| degree(e, p))
                        .cloned()
                        .unwrap_or_default();
                    Err(Error::NotEssentiallyLinear {
                        entry,
                        term,
                        degree: da + db,
                        witness: e.to_string(),
                    })
                }
            }
        }
    }
}

/// Splits each entry into coefficients of the pivots plus a pivot-free
/// remainder. Products are distributed only where a pivot factor has to be
/// isolated; nothing under `sg` is touched.
pub fn linear_decompose<S: AsRef<str>>(
    entries: &[Expr],
    pivots: &[S],
) -> Result<LinearDecomposition> {
    let pivots: Vec<String> = pivots.iter().map(|p| p.as_ref().to_string()).collect();
    let zero = || Expr::constant(0);
    let mut rows = Vec::with_capacity(entries.len());
    let mut q2 = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let parts = split(e, &pivots, i)?;
        rows.push(parts.coeffs.into_iter().map(|c| c.unwrap_or_else(zero)).collect());
        q2.push(parts.rest.unwrap_or_else(zero));
    }
    let q1 = if rows.is_empty() {
        ExprMatrix::filled(0, pivots.len(), zero())
    } else {
        ExprMatrix::from_rows(rows)?
    };
    Ok(LinearDecomposition { pivots, q1, q2 })
}

/// Replaces every pivot occurring outside `sg` by 1. On a pivot-free
/// coefficient this is the identity; on a mis-analyzed one it yields the
/// coefficient the analysis would have claimed.
pub fn blind<S: AsRef<str>>(e: &Expr, pivots: &[S]) -> Expr {
    match e {
        Expr::Term(n) if pivots.iter().any(|p| p.as_ref() == n) => Expr::constant(1),
        Expr::Const(_) | Expr::Term(_) | Expr::Sg(_) => e.clone(),
        Expr::Add(a, b) => blind(a, pivots) + blind(b, pivots),
        Expr::Sub(a, b) => blind(a, pivots) - blind(b, pivots),
        Expr::Mul(a, b) => blind(a, pivots) * blind(b, pivots),
    }
}
