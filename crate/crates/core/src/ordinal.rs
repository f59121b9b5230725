//! Countable ordinals in Cantor normal form, the arrow-rank extension, and
//! suprema of affine index families.
//!
//! Everything here is exact: an ordinal is a finite descending list of
//! `w^e * c` terms, addition is the natural (coefficient-wise) sum, and
//! comparisons are lexicographic on the term lists. Exponents are naturals
//! plus one symbolic `w` slot, which covers every length that arises in
//! graphs of rank up to `w`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A CNF exponent: a natural number or the symbolic first limit ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exp {
    Nat(u32),
    Omega,
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exp::Omega, Exp::Omega) => Ordering::Equal,
            (Exp::Omega, Exp::Nat(_)) => Ordering::Greater,
            (Exp::Nat(_), Exp::Omega) => Ordering::Less,
            (Exp::Nat(a), Exp::Nat(b)) => a.cmp(b),
        }
    }
}

/// An ordinal `sum of w^e * c` with strictly descending exponents and
/// positive coefficients. The empty sum is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Exp, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn natural(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(Exp::Nat(0), n)] }
        }
    }

    pub fn omega() -> Self {
        Self::w_pow(Exp::Nat(1))
    }

    /// `w^e`
    pub fn w_pow(e: Exp) -> Self {
        Ordinal { terms: vec![(e, 1)] }
    }

    /// `w^e * c`
    pub fn w_pow_mul(e: Exp, c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(e, c)] }
        }
    }

    /// Builds an ordinal from arbitrary (exponent, coefficient) pairs,
    /// merging equal exponents and dropping zero coefficients.
    pub fn from_terms(pairs: impl IntoIterator<Item = (Exp, u64)>) -> Self {
        let mut terms: Vec<(Exp, u64)> = Vec::new();
        for (e, c) in pairs {
            if c == 0 {
                continue;
            }
            match terms.iter_mut().find(|(te, _)| *te == e) {
                Some((_, tc)) => *tc += c,
                None => terms.push((e, c)),
            }
        }
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        Ordinal { terms }
    }

    pub fn terms(&self) -> &[(Exp, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for nonzero ordinals with no finite part (all exponents >= 1).
    pub fn is_limit(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|(e, _)| *e != Exp::Nat(0))
    }

    /// Coefficient of `w^e` (0 when the term is absent).
    pub fn coeff(&self, e: Exp) -> u64 {
        self.terms.iter().find(|(te, _)| *te == e).map(|(_, c)| *c).unwrap_or(0)
    }

    /// Natural (Hessenberg) sum: coefficient-wise addition per exponent.
    pub fn nat_sum(&self, other: &Ordinal) -> Ordinal {
        Ordinal::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    /// Natural difference: coefficient-wise subtraction. Fails when some
    /// coefficient of `other` exceeds the corresponding one here, which
    /// signals that `other` is not a sub-length of `self`.
    pub fn nat_diff(&self, other: &Ordinal) -> Result<Ordinal> {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.iter_mut().find(|(te, _)| te == e) {
                Some((_, tc)) if *tc >= *c => *tc -= *c,
                _ => {
                    return Err(Error::CoefficientUnderflow(format!(
                        "cannot subtract {} from {}",
                        other, self
                    )))
                }
            }
        }
        terms.retain(|(_, c)| *c > 0);
        Ok(Ordinal { terms })
    }

    /// Coefficient-wise multiplication by a natural number, i.e. the n-fold
    /// natural sum of `self` with itself.
    pub fn nat_mul(&self, n: u64) -> Ordinal {
        if n == 0 {
            return Ordinal::zero();
        }
        Ordinal { terms: self.terms.iter().map(|(e, c)| (*e, c * n)).collect() }
    }

    /// Keeps only the terms with exponent >= f.
    pub fn high(&self, f: Exp) -> Ordinal {
        Ordinal { terms: self.terms.iter().filter(|(e, _)| *e >= f).copied().collect() }
    }

    /// Least limit ordinal strictly greater than `self`.
    pub fn next_limit(&self) -> Ordinal {
        self.high(Exp::Nat(1)).nat_sum(&Ordinal::omega())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        // Descending term lists compare lexicographically: the first
        // differing term (by exponent, then coefficient) decides.
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            match a.0.cmp(&b.0) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match a.1.cmp(&b.1) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

fn render_exp(e: Exp, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Exp::Nat(n) => write!(f, "{}", n),
        Exp::Omega => write!(f, "w"),
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match e {
                Exp::Nat(0) => write!(f, "{}", c)?,
                Exp::Nat(1) => {
                    write!(f, "w")?;
                    if *c != 1 {
                        write!(f, "*{}", c)?;
                    }
                }
                _ => {
                    write!(f, "w^")?;
                    render_exp(*e, f)?;
                    if *c != 1 {
                        write!(f, "*{}", c)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_term(s: &str) -> Result<(Exp, u64)> {
    let bad = || Error::Parse(format!("bad ordinal term `{}`", s));
    if let Ok(n) = s.parse::<u64>() {
        return Ok((Exp::Nat(0), n));
    }
    let rest = s.strip_prefix('w').ok_or_else(bad)?;
    let (exp_str, coeff_str) = match rest.split_once('*') {
        Some((e, c)) => (e, Some(c)),
        None => (rest, None),
    };
    let exp = if exp_str.is_empty() {
        Exp::Nat(1)
    } else {
        let e = exp_str.strip_prefix('^').ok_or_else(bad)?;
        if e == "w" {
            Exp::Omega
        } else {
            Exp::Nat(e.parse::<u32>().map_err(|_| bad())?)
        }
    };
    let coeff = match coeff_str {
        Some(c) => c.parse::<u64>().map_err(|_| bad())?,
        None => 1,
    };
    if coeff == 0 {
        return Err(bad());
    }
    Ok((exp, coeff))
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ordinal> {
        let s = s.trim();
        if s == "0" {
            return Ok(Ordinal::zero());
        }
        let mut terms = Vec::new();
        let mut last: Option<Exp> = None;
        for part in s.split(" + ") {
            let (e, c) = parse_term(part.trim())?;
            if let Some(prev) = last {
                if prev <= e {
                    return Err(Error::Parse(format!("exponents not descending in `{}`", s)));
                }
            }
            last = Some(e);
            terms.push((e, c));
        }
        Ok(Ordinal { terms })
    }
}

/// A rank: an ordinal, or the arrow rank sitting immediately before a
/// nonzero limit ordinal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rank {
    Ord(Ordinal),
    Arrow(Ordinal),
}

impl Rank {
    pub fn ord(o: Ordinal) -> Self {
        Rank::Ord(o)
    }

    /// Arrow ranks exist only before nonzero limit ordinals.
    pub fn arrow(limit: Ordinal) -> Result<Self> {
        if !limit.is_limit() {
            return Err(Error::BadRank(format!("arrow({}) is not below a limit ordinal", limit)));
        }
        Ok(Rank::Arrow(limit))
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, Rank::Arrow(_))
    }

    /// The ordinal content: the value itself, or the limit an arrow approaches.
    pub fn limit_or_value(&self) -> &Ordinal {
        match self {
            Rank::Ord(o) | Rank::Arrow(o) => o,
        }
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rank::Ord(a), Rank::Ord(b)) => a.cmp(b),
            (Rank::Arrow(a), Rank::Arrow(b)) => a.cmp(b),
            // arrow(l) sits immediately before l: Ord(b) < Arrow(l) iff b < l.
            (Rank::Ord(b), Rank::Arrow(l)) => {
                if b < l {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Rank::Arrow(l), Rank::Ord(b)) => {
                if l <= b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Ord(o) => write!(f, "{}", o),
            Rank::Arrow(o) => write!(f, "arrow({})", o),
        }
    }
}

impl FromStr for Rank {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rank> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("arrow(").and_then(|r| r.strip_suffix(')')) {
            Rank::arrow(inner.parse()?)
        } else {
            Ok(Rank::Ord(s.parse()?))
        }
    }
}

/// One branch of a symbolic distance to an infinite interior family:
/// either a constant, or `base + step*k` over the index k = 1, 2, 3, ...
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AffineFamilyBranch {
    Constant(Ordinal),
    Increasing { base: Ordinal, step: Ordinal },
}

impl AffineFamilyBranch {
    pub fn increasing(base: Ordinal, step: Ordinal) -> Result<Self> {
        if step.terms().len() != 1 {
            return Err(Error::BadRank(format!("step {} must have exactly one term", step)));
        }
        Ok(AffineFamilyBranch::Increasing { base, step })
    }

    /// Value at index k >= 1.
    pub fn value_at(&self, k: u64) -> Ordinal {
        match self {
            AffineFamilyBranch::Constant(v) => v.clone(),
            AffineFamilyBranch::Increasing { base, step } => base.nat_sum(&step.nat_mul(k)),
        }
    }

    /// Supremum over all indices. An increasing branch with step exponent e
    /// climbs to the next multiple of w^(e+1) above its base.
    pub fn sup(&self) -> Rank {
        match self {
            AffineFamilyBranch::Constant(v) => Rank::Ord(v.clone()),
            AffineFamilyBranch::Increasing { base, step } => {
                let e = match step.terms()[0].0 {
                    Exp::Nat(n) => Exp::Nat(n + 1),
                    Exp::Omega => Exp::Omega,
                };
                let limit = base.high(e).nat_sum(&Ordinal::w_pow(e));
                Rank::Arrow(limit)
            }
        }
    }

    /// True when `self` is pointwise <= `other` at every index.
    pub fn dominates(&self, other: &AffineFamilyBranch) -> bool {
        match (self, other) {
            (AffineFamilyBranch::Constant(a), AffineFamilyBranch::Constant(b)) => a <= b,
            (AffineFamilyBranch::Constant(a), inc @ AffineFamilyBranch::Increasing { .. }) => {
                // a constant below the first increasing value stays below.
                *a <= inc.value_at(1)
            }
            (
                AffineFamilyBranch::Increasing { base: a, step: s },
                AffineFamilyBranch::Increasing { base: b, step: t },
            ) => s == t && a <= b,
            (AffineFamilyBranch::Increasing { .. }, AffineFamilyBranch::Constant(_)) => false,
        }
    }
}

impl fmt::Display for AffineFamilyBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffineFamilyBranch::Constant(v) => write!(f, "{}", v),
            AffineFamilyBranch::Increasing { base, step } => {
                if base.is_zero() {
                    write!(f, "({})*k", step)
                } else {
                    write!(f, "{} + ({})*k", base, step)
                }
            }
        }
    }
}

/// Supremum of a family whose value at index k is the pointwise minimum of
/// the branches. All branches are monotone in k, so this is the minimum of
/// the branch suprema under the rank order.
pub fn family_sup(branches: &[AffineFamilyBranch]) -> Rank {
    assert!(!branches.is_empty(), "family_sup needs at least one branch");
    branches.iter().map(|b| b.sup()).min().unwrap()
}

/// Maximum of a finite, nonempty set of ranks (finite sets attain their sup).
pub fn rank_sup(items: &[Rank]) -> Rank {
    assert!(!items.is_empty(), "rank_sup needs at least one rank");
    items.iter().cloned().max().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn nat_sum_merges_coefficients() {
        // w^3 + (w^2*2 + 4) + w^3*2 = w^3*3 + w^2*2 + 4
        let a = o("w^3");
        let b = o("w^2*2 + 4");
        let c = o("w^3*2");
        assert_eq!(a.nat_sum(&b).nat_sum(&c), o("w^3*3 + w^2*2 + 4"));
        // identity and coefficient-wise addition
        assert_eq!(o("w + 1").nat_sum(&Ordinal::zero()), o("w + 1"));
        assert_eq!(o("w + 1").nat_sum(&o("w + 1")), o("w*2 + 2"));
    }

    #[test]
    fn nat_diff_subtracts_or_underflows() {
        assert_eq!(o("w*2 + 2").nat_diff(&o("w + 1")).unwrap(), o("w + 1"));
        assert_eq!(o("w^2 + 3").nat_diff(&o("w^2 + 3")).unwrap(), Ordinal::zero());
        assert!(matches!(
            o("w^2 + 3").nat_diff(&o("w")),
            Err(Error::CoefficientUnderflow(_))
        ));
    }

    #[test]
    fn ord_cmp_lexicographic() {
        assert!(o("w") > o("5"));
        assert_eq!(o("w*2"), o("w*2"));
        assert!(o("w^2 + w*3") > o("w^2 + 4"));
        assert!(o("w^w") > o("w^9*100 + 5"));
    }

    #[test]
    fn rank_order_places_arrow_just_below_limit() {
        let arrow_w2 = Rank::arrow(o("w*2")).unwrap();
        assert!(arrow_w2 < Rank::Ord(o("w*2")));
        assert!(Rank::Ord(o("w + 7")) < arrow_w2);
        assert!(Rank::arrow(o("w")).unwrap() < Rank::arrow(o("w^2")).unwrap());
        // nothing sits strictly between arrow(l) and l for term-bounded probes
        assert!(Rank::Ord(o("w*2")) > arrow_w2);
        assert!(Rank::arrow(o("w*2")).unwrap() <= arrow_w2);
    }

    #[test]
    fn arrow_of_non_limit_rejected() {
        assert!(Rank::arrow(o("w + 1")).is_err());
        assert!(Rank::arrow(Ordinal::zero()).is_err());
        assert!(Rank::arrow(o("w*2")).is_ok());
    }

    #[test]
    fn next_limit_examples() {
        assert_eq!(o("w + 3").next_limit(), o("w*2"));
        assert_eq!(Ordinal::zero().next_limit(), o("w"));
        assert_eq!(o("w^2").next_limit(), o("w^2 + w"));
    }

    #[test]
    fn family_sup_of_increasing_branches() {
        let inc = AffineFamilyBranch::increasing(Ordinal::zero(), o("1")).unwrap();
        assert_eq!(family_sup(std::slice::from_ref(&inc)), Rank::arrow(o("w")).unwrap());
        let inc_w = AffineFamilyBranch::increasing(o("w"), o("1")).unwrap();
        assert_eq!(family_sup(&[inc_w]), Rank::arrow(o("w*2")).unwrap());
    }

    #[test]
    fn family_sup_min_of_branch_sups() {
        // min(k, w) = k at every index: the sup is the arrow below w, never
        // the (unattained) constant.
        let inc = AffineFamilyBranch::increasing(Ordinal::zero(), o("1")).unwrap();
        let cap = AffineFamilyBranch::Constant(o("w"));
        assert_eq!(family_sup(&[inc.clone(), cap]), Rank::arrow(o("w")).unwrap());
        // min(k, 5) = 5 from index 5 on: attained, so the sup is Ord(5).
        let small = AffineFamilyBranch::Constant(o("5"));
        assert_eq!(family_sup(&[inc, small]), Rank::Ord(o("5")));
    }

    #[test]
    fn family_sup_finite_shift_invariance() {
        // base terms at or below the step exponent never move the limit
        let a = AffineFamilyBranch::increasing(o("w^2 + w*3 + 9"), o("w*2")).unwrap();
        let b = AffineFamilyBranch::increasing(o("w^2 + 4"), o("w*2")).unwrap();
        assert_eq!(a.sup(), b.sup());
        assert_eq!(a.sup(), Rank::arrow(o("w^2*2")).unwrap());
    }

    #[test]
    fn rank_sup_examples() {
        let items = [Rank::Ord(o("1")), Rank::Ord(o("2")), Rank::Ord(o("w"))];
        assert_eq!(rank_sup(&items), Rank::Ord(o("w")));
        let items = [Rank::arrow(o("w*2")).unwrap(), Rank::Ord(o("w*2"))];
        assert_eq!(rank_sup(&items), Rank::Ord(o("w*2")));
        let items = [Rank::arrow(o("w*2")).unwrap(), Rank::arrow(o("w*3")).unwrap()];
        assert_eq!(rank_sup(&items), Rank::arrow(o("w*3")).unwrap());
    }

    #[test]
    fn rendering_round_trips() {
        for s in [
            "0",
            "4",
            "w",
            "w*2",
            "w + 1",
            "w*2 + 2",
            "w^3*3 + w^2*2 + 4",
            "w^w*2 + w^3 + w + 17",
        ] {
            let parsed: Ordinal = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        for s in ["arrow(w)", "arrow(w*2)", "w + 1"] {
            let parsed: Rank = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("w*0".parse::<Ordinal>().is_err());
        assert!("1 + w".parse::<Ordinal>().is_err()); // ascending exponents
        assert!("arrow(3)".parse::<Rank>().is_err());
    }
}
