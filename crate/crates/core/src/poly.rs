//! Sparse multivariate polynomials with complex coefficients, and a parser
//! for expressions such as `-3*z1 + i*z2` or `(z1+2z3)^2`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponent vector stored sparsely: sorted (variable, power) pairs, powers > 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: usize) -> Self {
        Monomial(vec![(v as u32, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, p)| p).sum()
    }

    pub fn power_of(&self, v: usize) -> u32 {
        self.0.iter().find(|&&(w, _)| w as usize == v).map_or(0, |&(_, p)| p)
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            if j == other.0.len() || (i < self.0.len() && self.0[i].0 < other.0[j].0) {
                out.push(self.0[i]);
                i += 1;
            } else if i == self.0.len() || other.0[j].0 < self.0[i].0 {
                out.push(other.0[j]);
                j += 1;
            } else {
                out.push((self.0[i].0, self.0[i].1 + other.0[j].1));
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    /// Divide by one power of `v`; None if `v` is absent.
    pub fn div_var(&self, v: usize) -> Option<Monomial> {
        let pos = self.0.iter().position(|&(w, _)| w as usize == v)?;
        let mut out = self.0.clone();
        if out[pos].1 == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Some(Monomial(out))
    }

    fn eval<T>(&self, x: &[T], one: T) -> T
    where
        T: Copy + std::ops::Mul<Output = T>,
    {
        let mut acc = one;
        for &(v, p) in &self.0 {
            for _ in 0..p {
                acc = acc * x[v as usize];
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Complex64>,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn var(v: usize) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(v), ONE);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        if c == ZERO {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient modulus (0 for the zero polynomial).
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// One past the largest variable index used.
    pub fn num_vars(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v as usize + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(-ONE)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        if s == ZERO {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, &c)| (m.clone(), c * s)).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Poly {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::real(1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn deriv(&self, v: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, &c) in &self.terms {
            let p = m.power_of(v);
            if p > 0 {
                out.add_term(m.div_var(v).unwrap(), c * p as f64);
            }
        }
        out
    }

    pub fn gradient(&self, nvars: usize) -> Vec<Poly> {
        (0..nvars).map(|v| self.deriv(v)).collect()
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms.iter().fold(ZERO, |acc, (m, &c)| acc + c * m.eval(x, ONE))
    }

    /// Evaluates at a real point; returns the real part (imaginary
    /// coefficients are assumed absent for real fields).
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (m, c)| acc + c.re * m.eval(x, 1.0))
    }

    /// Replace every monomial coefficient by its conjugate.
    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect() }
    }

    /// Drop terms with |coefficient| ≤ tol.
    pub fn prune(&self, tol: f64) -> Poly {
        Poly { terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(m, &c)| (m.clone(), c)).collect() }
    }

    /// Relabel variables through `map` (old index → new index).
    pub fn relabel(&self, map: &dyn Fn(usize) -> usize) -> Poly {
        let mut out = Poly::zero();
        for (m, &c) in &self.terms {
            let mut mono = Monomial::one();
            for &(v, p) in &m.0 {
                for _ in 0..p {
                    mono = mono.mul(&Monomial::var(map(v as usize)));
                }
            }
            out.add_term(mono, c);
        }
        out
    }

    /// Parse an expression in variables z1, z2, ... (1-based in the text,
    /// 0-based in the result).
    pub fn parse(src: &str) -> Result<Poly> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, depth: 0 };
        p.skip_ws();
        if p.pos == p.src.len() {
            return Err(p.err("empty expression"));
        }
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for &(v, p) in &m.0 {
                if p == 1 {
                    write!(f, "*z{}", v + 1)?;
                } else {
                    write!(f, "*z{}^{}", v + 1, p)?;
                }
            }
        }
        Ok(())
    }
}

const MAX_DEPTH: usize = 64;
const MAX_POWER: u64 = 32;
const MAX_TERMS: usize = 4096;
const MAX_VAR: u64 = 4096;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn check_size(&self, p: &Poly) -> Result<()> {
        if p.num_terms() > MAX_TERMS {
            return Err(self.err("expression too large"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Poly> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
            self.check_size(&acc)?;
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                // juxtaposition: 2z1, iz2, 3(z1+z2)
                Some(c) if c.is_ascii_digit() || c == b'.' || c == b'i' || c == b'z' || c == b'(' => {
                    acc = acc.mul(&self.power()?);
                }
                _ => break,
            }
            self.check_size(&acc)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(self.err("nesting too deep"));
                }
                let r = self.unary()?.neg();
                self.depth -= 1;
                Ok(r)
            }
            Some(b'+') => {
                self.pos += 1;
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(self.err("nesting too deep"));
                }
                let r = self.unary();
                self.depth -= 1;
                r
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.uint()?;
            if k > MAX_POWER {
                return Err(self.err("exponent too large"));
            }
            let mut out = Poly::real(1.0);
            for _ in 0..k {
                out = out.mul(&base);
                self.check_size(&out)?;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(&c) = self.src.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            v = v.saturating_mul(10).saturating_add((c - b'0') as u64);
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Poly::constant(Complex64::new(0.0, 1.0)))
            }
            Some(b'z') => {
                self.pos += 1;
                let k = self.uint()?;
                if k == 0 || k > MAX_VAR {
                    return Err(self.err("variable index out of range (z1..z4096)"));
                }
                Ok(Poly::var(k as usize - 1))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Poly> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).map_err(|_| self.err("invalid utf-8"))?;
        let v: f64 = text.parse().map_err(|_| Error::Parse { pos: start, msg: format!("bad number `{text}`") })?;
        if !v.is_finite() {
            return Err(Error::Parse { pos: start, msg: "number out of range".into() });
        }
        Ok(Poly::real(v))
    }
}

/// Polynomial matrix helpers (dense n×n, row-major).
pub fn poly_matmul(n: usize, a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut out = vec![Poly::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k * n + j].is_zero() {
                    continue;
                }
                out[i * n + j] = out[i * n + j].add(&a[i * n + k].mul(&b[k * n + j]));
            }
        }
    }
    out
}

pub fn poly_trace(n: usize, a: &[Poly]) -> Poly {
    (0..n).fold(Poly::zero(), |acc, i| acc.add(&a[i * n + i]))
}
