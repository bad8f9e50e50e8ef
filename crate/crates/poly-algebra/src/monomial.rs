use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Exponent vector, one entry per ambient variable.
///
/// Ordered graded-lexicographically: lower total degree first, then a larger
/// exponent on an earlier variable first, giving `1 < b1 < b2 < b1^2 < b1*b2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[u8; 8]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        Monomial(exps.iter().map(|&e| u8::try_from(e).expect("exponent above 255")).collect())
    }

    /// The degree-one monomial of variable `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&e| e as u32)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Monomial(out))
    }

    pub fn with_exponent(&self, i: usize, e: u32) -> Monomial {
        let mut m = self.clone();
        m.0[i] = u8::try_from(e).expect("exponent above 255");
        m
    }

    /// Copies exponents into a monomial over `nvars` variables using `map[i]`
    /// as the new position of variable `i`.
    pub fn remap(&self, map: &[usize], nvars: usize) -> Monomial {
        let mut m = Self::one(nvars);
        for (i, &e) in self.0.iter().enumerate() {
            m.0[map[i]] = e;
        }
        m
    }

    pub fn eval<C: crate::Coeff>(&self, point: &[C]) -> C {
        let mut acc = C::one();
        for (x, &e) in point.iter().zip(&self.0) {
            for _ in 0..e {
                acc = acc * x.clone();
            }
        }
        acc
    }

    /// Renders the monomial with the given variable names, `1` if constant.
    pub fn format_with(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// All monomials in `nvars` variables of total degree at most `max_degree`,
/// in graded-lexicographic order.
pub fn monomial_basis(nvars: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut exps = vec![0u32; nvars];
        push_degree(&mut out, &mut exps, 0, d);
    }
    out
}

fn push_degree(out: &mut Vec<Monomial>, exps: &mut [u32], pos: usize, remaining: u32) {
    if exps.is_empty() {
        if remaining == 0 {
            out.push(Monomial::one(0));
        }
        return;
    }
    if pos == exps.len() - 1 {
        exps[pos] = remaining;
        out.push(Monomial::from_exponents(exps));
        exps[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        exps[pos] = e;
        push_degree(out, exps, pos + 1, remaining - e);
    }
    exps[pos] = 0;
}
