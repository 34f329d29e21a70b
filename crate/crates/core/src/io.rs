//! Text formats.
//!
//! Sample file (1-based indices):
//!
//! ```text
//! #dims l1 l2 n
//! x<TAB>y<TAB>z
//! ```
//!
//! Distribution file: the same header, then `i<TAB>j<TAB>z<TAB>prob` for each
//! nonzero cell. Polynomials are written one term per line as
//! `coef : i^e i^e ...` with 1-based variables; fingerprints as `i:count`
//! pairs separated by whitespace.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_rational::BigRational;

use crate::dist::{Dims, JointDistribution, SampleSet, SampleTriple};
use crate::error::{Error, Result};
use crate::poly::{Fingerprint, HomogeneousPolynomial, Monomial};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what}: {tok:?}")))
}

fn parse_header(text: &str, line: usize) -> Result<Dims> {
    let mut it = text.split_whitespace();
    if it.next() != Some("#dims") {
        return Err(parse_err(line, "expected header \"#dims l1 l2 n\""));
    }
    let l1 = parse_field(it.next(), line, "l1")?;
    let l2 = parse_field(it.next(), line, "l2")?;
    let n = parse_field(it.next(), line, "n")?;
    if it.next().is_some() {
        return Err(parse_err(line, "trailing fields in header"));
    }
    Dims::new(l1, l2, n).map_err(|e| parse_err(line, e.to_string()))
}

fn one_based(v: usize, bound: usize, line: usize, what: &str) -> Result<usize> {
    if v == 0 || v > bound {
        return Err(parse_err(line, format!("{what} = {v} outside 1..={bound}")));
    }
    Ok(v - 1)
}

/// Yields `(line_number, text)` for non-blank lines, skipping `#` comments
/// other than the header.
fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Err(e) => Some(Err(e.into())),
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || (t.starts_with('#') && !t.starts_with("#dims")) {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

pub fn read_samples<R: BufRead>(r: R) -> Result<SampleSet> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty sample file"))??;
    let dims = parse_header(&header, hl)?;
    let mut triples = Vec::new();
    for item in lines {
        let (ln, text) = item?;
        let mut it = text.split('\t').flat_map(str::split_whitespace);
        let x = one_based(parse_field(it.next(), ln, "x")?, dims.l1, ln, "x")?;
        let y = one_based(parse_field(it.next(), ln, "y")?, dims.l2, ln, "y")?;
        let z = one_based(parse_field(it.next(), ln, "z")?, dims.n, ln, "z")?;
        if it.next().is_some() {
            return Err(parse_err(ln, "expected three fields"));
        }
        triples.push(SampleTriple { x, y, z });
    }
    SampleSet::new(dims, triples)
}

pub fn write_samples<W: Write>(mut w: W, s: &SampleSet) -> Result<()> {
    let d = s.dims();
    writeln!(w, "#dims {} {} {}", d.l1, d.l2, d.n)?;
    for t in s.triples() {
        writeln!(w, "{}\t{}\t{}", t.x + 1, t.y + 1, t.z + 1)?;
    }
    Ok(())
}

/// Reads a distribution file. Repeated cells are summed; the result may be
/// a pseudo-distribution.
pub fn read_distribution<R: BufRead>(r: R) -> Result<JointDistribution> {
    let mut lines = content_lines(r);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty distribution file"))??;
    let dims = parse_header(&header, hl)?;
    let mut mass = vec![0.0; dims.len()];
    for item in lines {
        let (ln, text) = item?;
        let mut it = text.split('\t').flat_map(str::split_whitespace);
        let i = one_based(parse_field(it.next(), ln, "i")?, dims.l1, ln, "i")?;
        let j = one_based(parse_field(it.next(), ln, "j")?, dims.l2, ln, "j")?;
        let z = one_based(parse_field(it.next(), ln, "z")?, dims.n, ln, "z")?;
        let p: f64 = parse_field(it.next(), ln, "prob")?;
        if !(p.is_finite() && p >= 0.0) {
            return Err(parse_err(ln, format!("probability {p} is not a finite non-negative number")));
        }
        if it.next().is_some() {
            return Err(parse_err(ln, "expected four fields"));
        }
        mass[dims.index(i, j, z)] += p;
    }
    JointDistribution::new(dims, mass)
}

/// Writes nonzero cells in `(z, i, j)` order with round-trip float
/// formatting.
pub fn write_distribution<W: Write>(mut w: W, p: &JointDistribution) -> Result<()> {
    let d = p.dims();
    writeln!(w, "#dims {} {} {}", d.l1, d.l2, d.n)?;
    for (idx, &v) in p.mass().iter().enumerate() {
        if v > 0.0 {
            let (i, j, z) = d.coords(idx);
            writeln!(w, "{}\t{}\t{}\t{}", i + 1, j + 1, z + 1, v)?;
        }
    }
    Ok(())
}

fn parse_rational(tok: &str, line: usize) -> Result<BigRational> {
    if let Ok(r) = tok.parse::<BigRational>() {
        return Ok(r);
    }
    // decimal literal such as -0.25
    let (neg, body) = match tok.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, tok),
    };
    let (int, frac) = body.split_once('.').ok_or_else(|| parse_err(line, format!("bad coefficient {tok:?}")))?;
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(line, format!("bad coefficient {tok:?}")));
    }
    let num: num_bigint::BigInt = digits.parse().map_err(|_| parse_err(line, "bad coefficient"))?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Parses the polynomial text format into an exact homogeneous polynomial.
/// The degree is taken from the first term; an empty input is rejected.
pub fn parse_polynomial(text: &str, num_vars: usize) -> Result<HomogeneousPolynomial<BigRational>> {
    let mut terms: Vec<(Monomial, BigRational)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (coef, mono) = t.split_once(':').ok_or_else(|| parse_err(ln, "expected \"coef : vars\""))?;
        let c = parse_rational(coef.trim(), ln)?;
        let mut m = Vec::new();
        for tok in mono.split_whitespace() {
            let (v, e) = match tok.split_once('^') {
                Some((v, e)) => (v, e),
                None => (tok, "1"),
            };
            let v: usize = parse_field(Some(v), ln, "variable")?;
            let e: u32 = parse_field(Some(e), ln, "exponent")?;
            m.push((one_based(v, num_vars, ln, "variable")?, e));
        }
        terms.push((m, c));
    }
    let degree = terms
        .first()
        .map(|(m, _)| m.iter().map(|&(_, e)| e as usize).sum())
        .ok_or_else(|| parse_err(1, "no terms"))?;
    HomogeneousPolynomial::from_terms(num_vars, degree, terms).map_err(|e| parse_err(0, e.to_string()))
}

pub fn format_polynomial(q: &HomogeneousPolynomial<BigRational>) -> String {
    let mut out = String::new();
    for (m, c) in q.terms() {
        let vars: Vec<String> = m.iter().map(|&(v, e)| format!("{}^{}", v + 1, e)).collect();
        let _ = writeln!(out, "{c} : {}", vars.join(" "));
    }
    out
}

/// Parses `i:count` pairs over `[num_vars]`; unlisted symbols count zero.
pub fn parse_fingerprint(text: &str, num_vars: usize) -> Result<Fingerprint> {
    let mut counts = vec![0u64; num_vars];
    for tok in text.split_whitespace() {
        let (i, c) = tok.split_once(':').ok_or_else(|| parse_err(1, format!("bad pair {tok:?}")))?;
        let i: usize = parse_field(Some(i), 1, "symbol")?;
        let c: u64 = parse_field(Some(c), 1, "count")?;
        counts[one_based(i, num_vars, 1, "symbol")?] += c;
    }
    Ok(Fingerprint::new(counts))
}

pub fn format_fingerprint(f: &Fingerprint) -> String {
    f.counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| format!("{}:{c}", i + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn samples_round_trip() {
        let dims = Dims::new(2, 3, 4).unwrap();
        let s = SampleSet::new(dims, vec![SampleTriple { x: 1, y: 2, z: 3 }, SampleTriple { x: 0, y: 0, z: 0 }])
            .unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "#dims 2 3 4\n2\t3\t4\n1\t1\t1\n");
        assert_eq!(read_samples(&buf[..]).unwrap(), s);
    }

    #[test]
    fn sample_errors_carry_lines() {
        let bad = "#dims 2 2 2\n1\t1\t1\n3\t1\t1\n";
        assert!(matches!(read_samples(bad.as_bytes()), Err(Error::Parse { line: 3, .. })));
        assert!(read_samples("1\t1\t1\n".as_bytes()).is_err());
    }

    #[test]
    fn distribution_round_trip() {
        let dims = Dims::new(2, 2, 2).unwrap();
        let p = JointDistribution::new(dims, vec![0.1, 0.0, 0.2, 0.3, 0.05, 0.05, 0.0, 0.3]).unwrap();
        let mut buf = Vec::new();
        write_distribution(&mut buf, &p).unwrap();
        let q = read_distribution(&buf[..]).unwrap();
        assert_eq!(q.mass(), p.mass());
    }

    #[test]
    fn polynomial_round_trip() {
        let q = parse_polynomial("1/3 : 1^2 2\n-0.5 : 3^3\n", 3).unwrap();
        assert_eq!(q.degree(), 3);
        assert_eq!(q.coefficient(&[(2, 3)]), rational(-1, 2));
        assert_eq!(parse_polynomial(&format_polynomial(&q), 3).unwrap(), q);
        assert!(parse_polynomial("1 : 1^2\n1 : 2\n", 2).is_err());
    }

    #[test]
    fn fingerprint_round_trip() {
        let f = parse_fingerprint("1:2 3:1", 3).unwrap();
        assert_eq!(f.counts(), &[2, 0, 1]);
        assert_eq!(format_fingerprint(&f), "1:2 3:1");
        assert!(parse_fingerprint("4:1", 3).is_err());
    }
}
