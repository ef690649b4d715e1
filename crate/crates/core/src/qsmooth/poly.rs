//! Sparse multivariate polynomials with rational coefficients and a small
//! ASCII grammar.
//!
//! Grammar (whitespace ignored, multiplication may be implicit):
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*'? factor)*
//! factor := '-' factor | atom ('^' integer)?
//! atom   := integer ('/' integer)? | 'x' integer | '(' expr ')'
//! ```

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::linalg::{format_rational, Q};
use crate::{Error, Result};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, Q>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first, which reads naturally.
        let mut terms: Vec<(&Exponents, &Q)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let neg = c < &Q::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| if p == 1 { format!("x{i}") } else { format!("x{i}^{p}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else {
                if !abs.is_one() {
                    if abs.is_integer() {
                        write!(f, "{}*", format_rational(&abs))?;
                    } else {
                        write!(f, "({})*", format_rational(&abs))?;
                    }
                }
                write!(f, "{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable x{i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Q::one());
        p
    }

    pub fn monomial(exps: Exponents, c: Q) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Same polynomial viewed in `nvars` variables, the old ones first.
    pub fn widen(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars);
        Poly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e.resize(nvars, 0);
                    (e, c.clone())
                })
                .collect(),
        }
    }

    fn add_term(&mut self, e: Exponents, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn check_same(&self, other: &Poly) {
        assert_eq!(self.nvars, other.nvars, "polynomials in different variable counts");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_same(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_same(other);
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// Product keeping only terms of total degree at most `max_degree`.
    pub fn mul_truncated(&self, other: &Poly, max_degree: u32) -> Poly {
        self.check_same(other);
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            for (e2, c2) in &other.terms {
                let d2: u32 = e2.iter().sum();
                if d1 + d2 > max_degree {
                    continue;
                }
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn truncate(&self, max_degree: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= max_degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, point: &[Q]) -> Result<Q> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                what: "polynomial evaluation point",
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &p) in point.iter().zip(e) {
                for _ in 0..p {
                    t *= x;
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// `self(images[0], images[1], ...)`; every image lives in the same
    /// variable count, which becomes the result's.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        self.substitute_inner(images, None)
    }

    /// Substitution followed by truncation to total degree `max_degree`,
    /// truncating at every intermediate product.
    pub fn substitute_truncated(&self, images: &[Poly], max_degree: u32) -> Result<Poly> {
        self.substitute_inner(images, Some(max_degree))
    }

    fn substitute_inner(&self, images: &[Poly], max_degree: Option<u32>) -> Result<Poly> {
        if images.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                what: "substitution images",
                expected: self.nvars,
                got: images.len(),
            });
        }
        let m = images.first().map_or(0, Poly::nvars);
        if images.iter().any(|p| p.nvars != m) {
            return Err(Error::Precondition("substitution images disagree on variable count".into()));
        }
        let mul = |a: &Poly, b: &Poly| match max_degree {
            Some(d) => a.mul_truncated(b, d),
            None => a.mul(b),
        };
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(m), p.clone()]).collect();
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(m, c.clone());
            for (i, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                while powers[i].len() <= p as usize {
                    let next = mul(powers[i].last().unwrap(), &images[i]);
                    powers[i].push(next);
                }
                t = mul(&t, &powers[i][p as usize]);
            }
            out = out.add(&t);
        }
        Ok(match max_degree {
            Some(d) => out.truncate(d),
            None => out,
        })
    }

    pub fn derivative(&self, i: usize) -> Poly {
        assert!(i < self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * Q::from_integer(BigInt::from(e[i])));
        }
        out
    }

    pub fn parse(src: &str, nvars: usize) -> Result<Poly> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            nvars,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("bad integer"))
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(c) if c.is_ascii_digit() || c == b'x' || c == b'(' => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            let k: u32 = k.try_into().map_err(|_| self.err("exponent too large"))?;
            if k > 64 {
                return Err(self.err("exponent too large"));
            }
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let value = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    Q::new(n, d)
                } else {
                    Q::from_integer(n)
                };
                Ok(Poly::constant(self.nvars, value))
            }
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                let i = self.integer()?;
                let i: usize = i.try_into().map_err(|_| self.err("variable index too large"))?;
                if i >= self.nvars {
                    self.pos = start;
                    return Err(self.err(&format!("variable x{i} out of range for {} variables", self.nvars)));
                }
                Ok(Poly::var(self.nvars, i))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsmooth::linalg::{q, q_frac};

    #[test]
    fn parse_and_print() {
        let p = Poly::parse("x0^2 - 3x0x1 + 1/2", 2).unwrap();
        assert_eq!(p.coefficient(&[2, 0]), q(1));
        assert_eq!(p.coefficient(&[1, 1]), q(-3));
        assert_eq!(p.coefficient(&[0, 0]), q_frac(1, 2));
        assert_eq!(Poly::parse(&p.to_string(), 2).unwrap(), p);
        assert_eq!(Poly::parse("-(x0+1)^2", 1).unwrap().to_string(), "-x0^2 - 2*x0 - 1");
        assert_eq!(Poly::parse("2(x0 - x0)", 1).unwrap(), Poly::zero(1));
    }

    #[test]
    fn parse_errors() {
        assert!(Poly::parse("x2", 2).is_err());
        assert!(Poly::parse("x0 +", 1).is_err());
        assert!(Poly::parse("1/0", 0).is_err());
        assert!(Poly::parse("(x0", 1).is_err());
        assert!(Poly::parse("y", 1).is_err());
    }

    #[test]
    fn substitution_and_derivative() {
        let p = Poly::parse("x0*x1^2", 2).unwrap();
        let t = Poly::var(1, 0);
        let img = [t.clone(), t.add(&Poly::one(1))];
        let s = p.substitute(&img).unwrap();
        assert_eq!(s, Poly::parse("x0^3 + 2x0^2 + x0", 1).unwrap());
        assert_eq!(s.substitute_truncated(&[t.clone()], 2).unwrap(), Poly::parse("2x0^2 + x0", 1).unwrap());
        assert_eq!(p.derivative(1), Poly::parse("2x0x1", 2).unwrap());
        assert_eq!(p.eval(&[q(2), q(3)]).unwrap(), q(18));
        assert!(p.eval(&[q(1)]).is_err());
    }
}
