//! Plain-text formats for fields, matrices, ideal descriptors, automorphism
//! files, decomposition words and random words.
//!
//! A matrix block is a `d=<d>` line followed by rows `2..=d`, row `i` holding
//! the `i−1` entries left of the diagonal as element indices. Lines starting
//! with `#` and blank lines between items are ignored by the readers.

use std::fmt::Write as _;

use thiserror::Error;

use crate::aut::{AutError, AutMap, Verified};
use crate::decomp::{DecompWord, FamilyElem};
use crate::gf::{AdditiveMap, Fe, Field, GfError};
use crate::ideals::{IdealDesc, IdealError, IdealTag};
use crate::nt::{Nt, NtError, NtMat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEof(&'static str),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Nt(#[from] NtError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

/// Cursor over the meaningful lines of a text.
struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Reader<'a> {
        let lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Reader { lines, pos: 0 }
    }

    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), FormatError> {
        let item = self.lines.get(self.pos).copied().ok_or(FormatError::UnexpectedEof(what))?;
        self.pos += 1;
        Ok(item)
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|(_, l)| *l)
    }

    fn done(&self) -> bool {
        self.pos >= self.lines.len()
    }

    /// Value of `key=<value>` on the next line.
    fn keyed(&mut self, key: &'static str) -> Result<(usize, &'a str), FormatError> {
        let (n, line) = self.next(key)?;
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| err(n, format!("expected `{key}=`, found `{line}`")))?;
        Ok((n, value))
    }
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, FormatError> {
    s.trim().parse().map_err(|_| err(line, format!("bad number `{s}`")))
}

fn parse_list(line: usize, s: &str) -> Result<Vec<u32>, FormatError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_num(line, x)).collect()
}

fn parse_elems(field: &Field, line: usize, s: &str) -> Result<Vec<Fe>, FormatError> {
    parse_list(line, s)?.into_iter().map(|x| Ok(field.elem(x)?)).collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// `p=<p> k=<k> [poly=c0,..,ck]`; the same text `Field` displays as.
pub fn parse_field_header(line: &str) -> Result<Field, FormatError> {
    parse_field_line(0, line)
}

fn parse_field_line(n: usize, line: &str) -> Result<Field, FormatError> {
    let (mut p, mut k, mut poly) = (None, None, None);
    for tok in line.split_whitespace() {
        match tok.split_once('=') {
            Some(("p", v)) => p = Some(parse_num::<u32>(n, v)?),
            Some(("k", v)) => k = Some(parse_num::<u32>(n, v)?),
            Some(("poly", v)) => poly = Some(parse_list(n, v)?),
            _ => return Err(err(n, format!("unexpected token `{tok}` in field header"))),
        }
    }
    let p = p.ok_or_else(|| err(n, "field header lacks p="))?;
    let k = k.ok_or_else(|| err(n, "field header lacks k="))?;
    Ok(match poly {
        Some(m) => Field::with_modulus(p, k, &m)?,
        None => Field::new(p, k)?,
    })
}

pub fn write_matrix(out: &mut String, m: &NtMat) {
    let d = m.d();
    let _ = writeln!(out, "d={d}");
    for i in 2..=d {
        let row: Vec<String> = (1..i).map(|j| m.get(i, j).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn matrix_to_string(m: &NtMat) -> String {
    let mut s = String::new();
    write_matrix(&mut s, m);
    s
}

fn read_matrix(r: &mut Reader<'_>, nt: &Nt) -> Result<NtMat, FormatError> {
    let (n, v) = r.keyed("d")?;
    let d: usize = parse_num(n, v)?;
    if d != nt.d() {
        return Err(err(n, format!("matrix has d={d}, expected {}", nt.d())));
    }
    let f = nt.field();
    let mut terms = Vec::new();
    for i in 2..=d {
        let (n, line) = r.next("matrix row")?;
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != i - 1 {
            return Err(err(n, format!("row {i} needs {} entries, found {}", i - 1, row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            terms.push((i, j + 1, f.elem(parse_num(n, x)?)?));
        }
    }
    Ok(nt.from_terms(&terms)?)
}

pub fn parse_matrix(nt: &Nt, text: &str) -> Result<NtMat, FormatError> {
    let mut r = Reader::new(text);
    read_matrix(&mut r, nt)
}

fn read_header(r: &mut Reader<'_>) -> Result<Nt, FormatError> {
    let (n, line) = r.next("field header")?;
    let field = parse_field_line(n, line)?;
    let (n, v) = r.keyed("d")?;
    Ok(Nt::new(parse_num(n, v)?, field)?)
}

pub fn ideal_to_string(s: &IdealDesc) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tag={} d={}", s.tag(), s.nt().d());
    let _ = writeln!(out, "{}", s.nt().field());
    for (n, m) in s.basis().iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        write_matrix(&mut out, m);
    }
    out
}

fn parse_tag(n: usize, s: &str, field: &Field) -> Result<IdealTag, FormatError> {
    if s == "custom" {
        return Ok(IdealTag::Custom);
    }
    let (name, args) = s
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(|| err(n, format!("bad tag `{s}`")))?;
    let args = parse_list(n, args)?;
    let [a, b] = args[..] else {
        return Err(err(n, format!("tag `{s}` needs two arguments")));
    };
    match name {
        "partition" => Ok(IdealTag::Partition { i: a as usize, j: b as usize }),
        "mab2" => Ok(IdealTag::Mab2 { m: a as usize, c: field.elem(b)? }),
        "mab3" => Ok(IdealTag::Mab3 { i: a as usize, c: field.elem(b)? }),
        _ => Err(err(n, format!("unknown tag `{name}`"))),
    }
}

/// Reads a descriptor; a non-custom tag is checked against the basis.
pub fn parse_ideal(text: &str) -> Result<IdealDesc, FormatError> {
    let mut r = Reader::new(text);
    let (n, line) = r.next("ideal header")?;
    let mut tag = None;
    let mut d = None;
    for tok in line.split_whitespace() {
        match tok.split_once('=') {
            Some(("tag", v)) => tag = Some(v),
            Some(("d", v)) => d = Some(parse_num::<usize>(n, v)?),
            _ => return Err(err(n, format!("unexpected token `{tok}`"))),
        }
    }
    let tag = tag.ok_or_else(|| err(n, "missing tag="))?;
    let d = d.ok_or_else(|| err(n, "missing d="))?;
    let (fl, fline) = r.next("field header")?;
    let nt = Nt::new(d, parse_field_line(fl, fline)?)?;
    let tag = parse_tag(n, tag, nt.field())?;
    let mut mats = Vec::new();
    while !r.done() {
        mats.push(read_matrix(&mut r, &nt)?);
    }
    Ok(IdealDesc::custom(&nt, mats)?.with_tag(tag)?)
}

pub fn aut_to_string(phi: &AutMap) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", phi.nt().field());
    let _ = writeln!(out, "d={}", phi.nt().d());
    for m in phi.images() {
        out.push('\n');
        write_matrix(&mut out, m);
    }
    let _ = writeln!(out, "\nverified={}", phi.verified());
    out
}

pub fn parse_aut(text: &str) -> Result<AutMap, FormatError> {
    let mut r = Reader::new(text);
    let nt = read_header(&mut r)?;
    let count = (nt.d() - 1) * nt.field().k() as usize;
    let images = (0..count).map(|_| read_matrix(&mut r, &nt)).collect::<Result<Vec<_>, _>>()?;
    let mut phi = AutMap::from_images(&nt, images)?;
    if r.peek().is_some() {
        let (n, v) = r.keyed("verified")?;
        let state = match v {
            "unchecked" => Verified::Unchecked,
            "failed" => Verified::Failed(None),
            _ => {
                let policy = v.strip_prefix("passed:").ok_or_else(|| err(n, format!("bad verified state `{v}`")))?;
                Verified::Passed(policy.parse().map_err(|e: String| err(n, e))?)
            }
        };
        phi.set_verified(state);
    }
    if !r.done() {
        let (n, extra) = r.next("")?;
        return Err(err(n, format!("trailing content `{extra}`")));
    }
    Ok(phi)
}

fn central_values(l: &[AdditiveMap]) -> Vec<Fe> {
    l.iter().flat_map(|m| m.basis_images.iter().copied()).collect()
}

fn central_from_values(nt: &Nt, n: usize, values: Vec<Fe>) -> Result<Vec<AdditiveMap>, FormatError> {
    let k = nt.field().k() as usize;
    if values.len() != (nt.d() - 1) * k {
        return Err(err(n, format!("central needs {} values, found {}", (nt.d() - 1) * k, values.len())));
    }
    Ok(values.chunks(k).map(|c| AdditiveMap { basis_images: c.to_vec() }).collect())
}

pub fn decomp_to_string(w: &DecompWord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", w.nt.field());
    let _ = writeln!(out, "d={}", w.nt.d());
    let _ = writeln!(out, "flip={}", u8::from(w.flip));
    let _ = writeln!(out, "ext={},{}", w.ext.0, w.ext.1);
    let _ = writeln!(out, "fld={}", w.fld);
    let _ = writeln!(out, "diag={}", join(&w.diag));
    let _ = writeln!(out, "inner=");
    write_matrix(&mut out, &w.inner);
    let _ = writeln!(out, "central={}", join(&central_values(&w.central)));
    out
}

pub fn parse_decomp(text: &str) -> Result<DecompWord, FormatError> {
    let mut r = Reader::new(text);
    let nt = read_header(&mut r)?;
    let f = nt.field().clone();
    let (n, v) = r.keyed("flip")?;
    let flip = match v {
        "0" => false,
        "1" => true,
        _ => return Err(err(n, format!("flip must be 0 or 1, found `{v}`"))),
    };
    let (n, v) = r.keyed("ext")?;
    let ext = parse_elems(&f, n, v)?;
    let [a1, a2] = ext[..] else {
        return Err(err(n, "ext needs two values"));
    };
    let (n, v) = r.keyed("fld")?;
    let fld = parse_num(n, v)?;
    let (n, v) = r.keyed("diag")?;
    let diag = parse_elems(&f, n, v)?;
    if diag.len() != nt.d() {
        return Err(err(n, format!("diag needs {} values", nt.d())));
    }
    r.keyed("inner")?;
    let inner = read_matrix(&mut r, &nt)?;
    let (n, v) = r.keyed("central")?;
    let central = central_from_values(&nt, n, parse_elems(&f, n, v)?)?;
    Ok(DecompWord { nt, flip, ext: (a1, a2), fld, diag, inner, central })
}

pub fn word_to_string(nt: &Nt, word: &[FamilyElem]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", nt.field());
    let _ = writeln!(out, "d={}", nt.d());
    let _ = writeln!(out, "len={}", word.len());
    for e in word {
        match e {
            FamilyElem::Flip => out.push_str("flip\n"),
            FamilyElem::Ext(a1, a2) => {
                let _ = writeln!(out, "ext={a1},{a2}");
            }
            FamilyElem::Fld(j) => {
                let _ = writeln!(out, "fld={j}");
            }
            FamilyElem::Diag(ds) => {
                let _ = writeln!(out, "diag={}", join(ds));
            }
            FamilyElem::Inner(g) => {
                out.push_str("inner=\n");
                write_matrix(&mut out, g);
            }
            FamilyElem::Central(l) => {
                let _ = writeln!(out, "central={}", join(&central_values(l)));
            }
        }
    }
    out
}

pub fn parse_word(text: &str) -> Result<(Nt, Vec<FamilyElem>), FormatError> {
    let mut r = Reader::new(text);
    let nt = read_header(&mut r)?;
    let f = nt.field().clone();
    let (n, v) = r.keyed("len")?;
    let len: usize = parse_num(n, v)?;
    let mut word = Vec::with_capacity(len);
    for _ in 0..len {
        let (n, line) = r.next("word factor")?;
        let (key, value) = line.split_once('=').unwrap_or((line, ""));
        word.push(match key {
            "flip" => FamilyElem::Flip,
            "ext" => {
                let v = parse_elems(&f, n, value)?;
                let [a1, a2] = v[..] else {
                    return Err(err(n, "ext needs two values"));
                };
                FamilyElem::Ext(a1, a2)
            }
            "fld" => FamilyElem::Fld(parse_num(n, value)?),
            "diag" => FamilyElem::Diag(parse_elems(&f, n, value)?),
            "inner" => FamilyElem::Inner(read_matrix(&mut r, &nt)?),
            "central" => FamilyElem::Central(central_from_values(&nt, n, parse_elems(&f, n, value)?)?),
            _ => return Err(err(n, format!("unknown factor `{key}`"))),
        });
    }
    Ok((nt, word))
}
