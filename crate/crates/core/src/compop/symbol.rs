//! Holomorphic self-maps with relatively compact range.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::domains::Domain;
use crate::error::{invalid, Error, Result};
use crate::lattice::MultiIndex;

/// One monomial `coeff · z^gamma` of a coordinate polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub gamma: MultiIndex,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolKind {
    /// `φ(z) = (r_1 z_1, …, r_N z_N)`.
    Diagonal(Vec<f64>),
    /// One sparse polynomial per output coordinate.
    Polynomial(Vec<Vec<Term>>),
}

/// A symbol `φ : Ω → Ω` together with a certified bound
/// `sup_z j_Ω(φ(z)) ≤ r_0 < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    domain: Domain,
    kind: SymbolKind,
    range_radius: f64,
}

impl Symbol {
    pub fn diagonal(domain: Domain, radii: Vec<f64>) -> Result<Self> {
        if radii.len() != domain.dim() {
            return Err(invalid(format!(
                "diagonal symbol has {} radii, domain {domain} has dimension {}",
                radii.len(),
                domain.dim()
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(invalid(format!("diagonal radii must lie in (0,1), got {r}")));
        }
        let range_radius = radii.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            domain,
            kind: SymbolKind::Diagonal(radii),
            range_radius,
        })
    }

    pub fn polynomial(domain: Domain, coords: Vec<Vec<Term>>) -> Result<Self> {
        let n = domain.dim();
        if coords.len() != n {
            return Err(invalid(format!(
                "polynomial symbol has {} coordinates, domain {domain} has dimension {n}",
                coords.len()
            )));
        }
        let mut coords = coords;
        for terms in &mut coords {
            for t in terms.iter() {
                if t.gamma.dim() != n {
                    return Err(invalid(format!("exponent {} does not match dimension {n}", t.gamma)));
                }
                if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                    return Err(invalid("coefficients must be finite"));
                }
            }
            merge_terms(terms);
        }
        let range_radius = certified_range_radius(&domain, &coords);
        if !(range_radius < 1.0) {
            return Err(invalid(format!(
                "symbol range is not certified inside {domain}: bound r_0 = {range_radius} ≥ 1"
            )));
        }
        Ok(Self {
            domain,
            kind: SymbolKind::Polynomial(coords),
            range_radius,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Certified `r_0 ≥ sup j_Ω(φ(z))`.
    pub fn range_radius(&self) -> f64 {
        self.range_radius
    }

    /// Total degree of the symbol (1 for diagonal symbols).
    pub fn degree(&self) -> u32 {
        match &self.kind {
            SymbolKind::Diagonal(_) => 1,
            SymbolKind::Polynomial(coords) => coords
                .iter()
                .flatten()
                .map(|t| t.gamma.degree())
                .max()
                .unwrap_or(0)
                .max(1),
        }
    }

    /// Expresses the symbol as coordinate polynomials.
    pub fn coordinate_terms(&self) -> Vec<Vec<Term>> {
        match &self.kind {
            SymbolKind::Diagonal(radii) => radii
                .iter()
                .enumerate()
                .map(|(k, &r)| {
                    vec![Term {
                        gamma: MultiIndex::unit(radii.len(), k),
                        coeff: Complex64::new(r, 0.0),
                    }]
                })
                .collect(),
            SymbolKind::Polynomial(coords) => coords.clone(),
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.dim() {
            return Err(invalid("point dimension does not match the symbol"));
        }
        Ok(match &self.kind {
            SymbolKind::Diagonal(radii) => z.iter().zip(radii).map(|(w, r)| w * r).collect(),
            SymbolKind::Polynomial(coords) => coords
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|t| {
                            t.gamma
                                .entries()
                                .iter()
                                .zip(z)
                                .fold(t.coeff, |acc, (&g, w)| acc * w.powu(g))
                        })
                        .sum()
                })
                .collect(),
        })
    }

    /// Parses `diag:r_1,…,r_N` or `poly:` followed by one `;`-separated term
    /// list per coordinate, coordinates separated by `|`, each term written
    /// `(g_1,…,g_N)->(re)` or `(g_1,…,g_N)->(re,im)`.
    pub fn parse(tag: &str, domain: &Domain) -> Result<Self> {
        let tag = tag.trim();
        if let Some(rest) = tag.strip_prefix("diag:") {
            let radii = rest
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad radius `{t}` in `{tag}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::diagonal(domain.clone(), radii);
        }
        if let Some(rest) = tag.strip_prefix("poly:") {
            let coords = rest
                .split('|')
                .map(|coord| parse_terms(coord, domain.dim()))
                .collect::<Result<Vec<_>>>()?;
            return Self::polynomial(domain.clone(), coords);
        }
        Err(Error::Parse(format!(
            "symbol tag `{tag}` must start with `diag:` or `poly:`"
        )))
    }
}

fn parse_terms(text: &str, dim: usize) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    for raw in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (lhs, rhs) = raw
            .split_once("->")
            .ok_or_else(|| Error::Parse(format!("term `{raw}` lacks `->`")))?;
        let gamma: Vec<u32> = parenthesized(lhs)?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent `{t}` in `{raw}`")))
            })
            .collect::<Result<_>>()?;
        if gamma.len() != dim {
            return Err(Error::Parse(format!(
                "exponent in `{raw}` has {} entries, expected {dim}",
                gamma.len()
            )));
        }
        let parts: Vec<f64> = parenthesized(rhs)?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coefficient `{t}` in `{raw}`")))
            })
            .collect::<Result<_>>()?;
        let coeff = match parts[..] {
            [re] => Complex64::new(re, 0.0),
            [re, im] => Complex64::new(re, im),
            _ => return Err(Error::Parse(format!("coefficient in `{raw}` must be (re) or (re,im)"))),
        };
        terms.push(Term {
            gamma: MultiIndex::new(gamma)?,
            coeff,
        });
    }
    Ok(terms)
}

fn parenthesized(s: &str) -> Result<&str> {
    s.trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected a parenthesized list, found `{}`", s.trim())))
}

/// Sums repeated exponents, drops zeros, sorts by graded-lex order.
fn merge_terms(terms: &mut Vec<Term>) {
    terms.sort_by(|a, b| {
        a.gamma
            .degree()
            .cmp(&b.gamma.degree())
            .then_with(|| a.gamma.entries().cmp(b.gamma.entries()))
    });
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms.drain(..) {
        match merged.last_mut() {
            Some(last) if last.gamma == t.gamma => last.coeff += t.coeff,
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
    *terms = merged;
}

/// `sup_{z ∈ Ω} |z^γ|`: per block, the maximum of `Π |w_i|^{γ_i}` on the unit
/// sphere, `sqrt(Π γ_i^{γ_i} / |γ|^{|γ|})`.
fn sup_monomial(domain: &Domain, gamma: &MultiIndex) -> f64 {
    let e = gamma.entries();
    let mut start = 0;
    let mut ln = 0.0;
    for l in domain.blocks() {
        let block = &e[start..start + l];
        start += l;
        let total: u32 = block.iter().sum();
        if l == 1 || total == 0 {
            continue;
        }
        let xlogx = |g: u32| if g == 0 { 0.0 } else { f64::from(g) * f64::from(g).ln() };
        ln += 0.5 * (block.iter().map(|&g| xlogx(g)).sum::<f64>() - xlogx(total));
    }
    ln.exp()
}

/// Triangle-inequality bound on the gauge of `φ(z)`; for linear maps of
/// a ball-shaped block the block's operator norm is used instead.
fn certified_range_radius(domain: &Domain, coords: &[Vec<Term>]) -> f64 {
    let per_coord: Vec<f64> = coords
        .iter()
        .map(|terms| {
            terms
                .iter()
                .map(|t| t.coeff.norm() * sup_monomial(domain, &t.gamma))
                .sum()
        })
        .collect();
    let linear = coords.iter().flatten().all(|t| t.gamma.degree() == 1);
    let n = domain.dim();
    let mut start = 0;
    let mut radius = 0.0f64;
    for l in domain.blocks() {
        let outputs = start..start + l;
        start += l;
        let bound = if l == 1 {
            per_coord[outputs.start]
        } else {
            let crude = per_coord[outputs.clone()].iter().map(|b| b * b).sum::<f64>().sqrt();
            if linear && domain.blocks().len() == 1 {
                // rows of the block, as a linear map C^n → C^l
                let mut a = DMatrix::<Complex64>::zeros(l, n);
                for (row, k) in outputs.enumerate() {
                    for t in &coords[k] {
                        let col = t.gamma.entries().iter().position(|&g| g == 1).expect("degree one");
                        a[(row, col)] += t.coeff;
                    }
                }
                a.singular_values().max().min(crude)
            } else {
                crude
            }
        };
        radius = radius.max(bound);
    }
    radius
}

/// `φ_t(w) = φ(e^t w)` for `t < 0`.
pub fn dilate_symbol(symbol: &Symbol, t: f64) -> Result<Symbol> {
    if !(t < 0.0 && t.is_finite()) {
        return Err(invalid(format!("dilation parameter must be negative, got {t}")));
    }
    let s = t.exp();
    match &symbol.kind {
        SymbolKind::Diagonal(radii) => Symbol::diagonal(symbol.domain.clone(), radii.iter().map(|r| r * s).collect()),
        SymbolKind::Polynomial(coords) => {
            let scaled = coords
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|term| Term {
                            gamma: term.gamma.clone(),
                            coeff: term.coeff * (t * f64::from(term.gamma.degree())).exp(),
                        })
                        .collect()
                })
                .collect();
            Symbol::polynomial(symbol.domain.clone(), scaled)
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SymbolKind::Diagonal(radii) => {
                let parts: Vec<String> = radii.iter().map(|r| r.to_string()).collect();
                write!(f, "diag:{}", parts.join(","))
            }
            SymbolKind::Polynomial(coords) => {
                let coords: Vec<String> = coords
                    .iter()
                    .map(|terms| {
                        let parts: Vec<String> = terms
                            .iter()
                            .map(|t| {
                                let g: Vec<String> = t.gamma.entries().iter().map(|g| g.to_string()).collect();
                                if t.coeff.im == 0.0 {
                                    format!("({})->({})", g.join(","), t.coeff.re)
                                } else {
                                    format!("({})->({},{})", g.join(","), t.coeff.re, t.coeff.im)
                                }
                            })
                            .collect();
                        parts.join(";")
                    })
                    .collect();
                write!(f, "poly:{}", coords.join("|"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bidisk() -> Domain {
        Domain::polydisk(2).unwrap()
    }

    #[test]
    fn diagonal_construction() {
        let s = Symbol::diagonal(bidisk(), vec![0.5, 0.3]).unwrap();
        assert_eq!(s.range_radius(), 0.5);
        assert!(Symbol::diagonal(bidisk(), vec![0.5, 1.0]).is_err());
        assert!(Symbol::diagonal(bidisk(), vec![0.5]).is_err());
        assert!(Symbol::diagonal(bidisk(), vec![0.0, 0.3]).is_err());
    }

    #[test]
    fn tags_round_trip() {
        let d = bidisk();
        for tag in [
            "diag:0.5,0.3",
            "poly:(0,1)->(0.5)|(1,0)->(0.5)",
            "poly:(0,0)->(0.1);(2,0)->(0.2,-0.1)|(1,1)->(0.3)",
        ] {
            let s = Symbol::parse(tag, &d).unwrap();
            assert_eq!(s.to_string(), tag);
            assert_eq!(Symbol::parse(&s.to_string(), &d).unwrap(), s);
        }
        assert!(Symbol::parse("diag:0.5", &d).is_err());
        assert!(Symbol::parse("poly:(0,1)->(0.5)", &d).is_err());
        assert!(Symbol::parse("poly:(0,1)-(0.5)|(1,0)->(0.5)", &d).is_err());
        assert!(Symbol::parse("poly:(0,1,0)->(0.5)|(1,0)->(0.5)", &d).is_err());
        assert!(Symbol::parse("lens:0.5", &d).is_err());
    }

    #[test]
    fn range_radius_is_certified() {
        let d = bidisk();
        let swap = Symbol::parse("poly:(0,1)->(0.5)|(1,0)->(0.5)", &d).unwrap();
        assert_eq!(swap.range_radius(), 0.5);
        assert!(Symbol::parse("poly:(0,1)->(0.6);(1,0)->(0.4)|(1,0)->(0.5)", &d).is_err());
        let ball = Domain::ball(2).unwrap();
        let swap = Symbol::parse("poly:(0,1)->(0.5)|(1,0)->(0.5)", &ball).unwrap();
        assert!((swap.range_radius() - 0.5).abs() < 1e-12);
        // z_1 z_2 on the ball is at most 1/2
        let prod = Symbol::parse("poly:(1,1)->(1)|(0,0)->(0)", &ball).unwrap();
        assert!((prod.range_radius() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dilation_scales_by_degree() {
        let d = bidisk();
        let s = Symbol::diagonal(d.clone(), vec![0.5, 0.3]).unwrap();
        let t = dilate_symbol(&s, 0.9f64.ln()).unwrap();
        match t.kind() {
            SymbolKind::Diagonal(r) => {
                assert!((r[0] - 0.45).abs() < 1e-15 && (r[1] - 0.27).abs() < 1e-15);
            }
            _ => panic!(),
        }
        let p = Symbol::parse("poly:(0,0)->(0.1);(2,0)->(0.4)|(0,1)->(0.5)", &d).unwrap();
        let q = dilate_symbol(&p, 0.5f64.ln()).unwrap();
        assert_eq!(q.to_string(), "poly:(0,0)->(0.1);(2,0)->(0.1)|(0,1)->(0.25)");
        assert!(dilate_symbol(&s, 0.0).is_err());
    }

    #[test]
    fn evaluation() {
        let d = bidisk();
        let p = Symbol::parse("poly:(1,1)->(0.5)|(0,0)->(0,0.25)", &d).unwrap();
        let z = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5)];
        let w = p.eval(&z).unwrap();
        assert!((w[0] - Complex64::new(0.0, 0.125)).norm() < 1e-15);
        assert!((w[1] - Complex64::new(0.0, 0.25)).norm() < 1e-15);
    }
}
