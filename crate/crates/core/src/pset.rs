//! Parameter sets `⟨a, b, p, q⟩`; the running point `t` is an evaluation argument.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    a: f64,
    b: f64,
    p: f64,
    q: f64,
}

impl ParameterSet {
    pub fn new(a: f64, b: f64, p: f64, q: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && p.is_finite() && q.is_finite()) {
            return Err(Error::domain(format!("p-set entries must be finite: ⟨{a}, {b}, {p}, {q}⟩")));
        }
        if !(a < b) {
            return Err(Error::domain(format!("p-set interval needs a < b, got a={a}, b={b}")));
        }
        Ok(ParameterSet { a, b, p, q })
    }

    /// `⟨a, b, 1, 0⟩`: left Riemann–Liouville integrals and derivatives.
    pub fn standard_left(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 1.0, 0.0)
    }

    /// `⟨a, b, 0, 1⟩`: right-sided counterparts.
    pub fn standard_right(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 0.0, 1.0)
    }

    /// Swap the weights; the interval is untouched.
    pub fn dual(&self) -> Self {
        ParameterSet { p: self.q, q: self.p, ..*self }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }

    /// Same weights on a different interval.
    pub fn with_interval(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, self.p, self.q)
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.p, self.q)
    }
}

impl FromStr for ParameterSet {
    type Err = Error;

    /// Parses the textual form `a,b,p,q`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::domain(format!("expected `a,b,p,q`, got `{s}`")));
        }
        let mut v = [0.0; 4];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot =
                part.parse::<f64>().map_err(|_| Error::domain(format!("`{part}` is not a number in p-set `{s}`")))?;
        }
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// Weight pattern of a p-set with the interval left open; the CLI's
/// `left`, `right` and `mixed:p,q` sugar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsetShape {
    Left,
    Right,
    Mixed { p: f64, q: f64 },
}

impl PsetShape {
    pub fn on(&self, a: f64, b: f64) -> Result<ParameterSet> {
        match *self {
            PsetShape::Left => ParameterSet::standard_left(a, b),
            PsetShape::Right => ParameterSet::standard_right(a, b),
            PsetShape::Mixed { p, q } => ParameterSet::new(a, b, p, q),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PsetShape::Left => String::from("left"),
            PsetShape::Right => String::from("right"),
            PsetShape::Mixed { p, q } => format!("mixed:{p},{q}"),
        }
    }

    /// Parse a comma-separated list such as `left,mixed:0.5,0.5`.
    pub fn parse_list(s: &str) -> Result<Vec<PsetShape>> {
        let mut out = Vec::new();
        let mut tokens = s.split(',').map(str::trim);
        while let Some(tok) = tokens.next() {
            let shape = match tok {
                "left" => PsetShape::Left,
                "right" => PsetShape::Right,
                _ if tok.starts_with("mixed:") => {
                    let p = parse_weight(&tok["mixed:".len()..], s)?;
                    let q = tokens
                        .next()
                        .ok_or_else(|| Error::domain(format!("`mixed:p,q` is missing q in `{s}`")))
                        .and_then(|t| parse_weight(t, s))?;
                    PsetShape::Mixed { p, q }
                }
                _ => return Err(Error::domain(format!("unknown p-set `{tok}` (use left, right or mixed:p,q)"))),
            };
            out.push(shape);
        }
        Ok(out)
    }
}

fn parse_weight(tok: &str, whole: &str) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::domain(format!("`{tok}` is not a finite weight in `{whole}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fields(p: &ParameterSet) -> [u64; 4] {
        [p.a.to_bits(), p.b.to_bits(), p.p.to_bits(), p.q.to_bits()]
    }

    #[test]
    fn dual_swaps_weights() {
        let p = ParameterSet::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.dual(), ParameterSet::new(0.0, 1.0, 0.0, 1.0).unwrap());
        let sym = ParameterSet::new(0.0, 1.0, 0.3, 0.3).unwrap();
        assert_eq!(sym.dual(), sym);
        let odd = ParameterSet::new(-1.0, 2.0, 0.7, -0.2).unwrap();
        assert_eq!(fields(&odd.dual().dual()), fields(&odd));
    }

    #[test]
    fn standard_sets() {
        let l = ParameterSet::standard_left(0.0, 1.0).unwrap();
        let r = ParameterSet::standard_right(0.0, 1.0).unwrap();
        assert_eq!((l.p(), l.q()), (1.0, 0.0));
        assert_eq!((r.p(), r.q()), (0.0, 1.0));
        assert_eq!(l.dual(), r);
        assert!(ParameterSet::standard_left(1.0, 1.0).is_err());
        assert!(ParameterSet::standard_right(2.0, 1.0).is_err());
    }

    #[test]
    fn parse_textual_form() {
        let p: ParameterSet = "0, 1, 0.5,-2".parse().unwrap();
        assert_eq!(p, ParameterSet::new(0.0, 1.0, 0.5, -2.0).unwrap());
        assert!("0,1,1".parse::<ParameterSet>().is_err());
        assert!("1,0,1,0".parse::<ParameterSet>().is_err());
        assert!("0,1,x,0".parse::<ParameterSet>().is_err());
    }

    #[test]
    fn shape_lists() {
        let v = PsetShape::parse_list("left,mixed:0.5,0.25,right").unwrap();
        assert_eq!(v, [PsetShape::Left, PsetShape::Mixed { p: 0.5, q: 0.25 }, PsetShape::Right]);
        assert!(PsetShape::parse_list("left,mixed:0.5").is_err());
        assert!(PsetShape::parse_list("up").is_err());
    }

    proptest! {
        #[test]
        fn dual_is_a_bitwise_involution(a in -10.0f64..10.0, len in 1e-6f64..10.0, p in -5.0f64..5.0, q in -5.0f64..5.0) {
            let ps = ParameterSet::new(a, a + len, p, q).unwrap();
            prop_assert_eq!(fields(&ps.dual().dual()), fields(&ps));
            prop_assert_eq!(ps.dual().a().to_bits(), ps.a().to_bits());
            prop_assert_eq!(ps.dual().b().to_bits(), ps.b().to_bits());
        }
    }
}
