//! Strategy literals used in scenario files:
//!
//! ```text
//! gaussian(center, width[, slope])   hermite(n)        delta(loc)
//! discrete(loc:weight, ...)          sampled(@file.csv)
//! superpose(literal, literal, ...)   supply:<literal>  demand:<literal>
//! ```
//!
//! `sampled` files are CSV with columns `x,re,im` on a uniform grid.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

use super::{Representation, RiskParams, Strategy};
use crate::numerics::Grid;
use crate::{Error, Result};

/// What a literal needs from its surroundings: risk parameters for
/// `hermite(n)` and the directory `@file` paths are relative to.
#[derive(Debug, Clone, Default)]
pub struct LiteralContext {
    pub risk: RiskParams,
    pub base_dir: PathBuf,
}

pub fn parse_strategy(literal: &str, ctx: &LiteralContext) -> Result<Strategy> {
    let mut p = Parser { src: literal, pos: 0, ctx };
    let s = p.literal()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(s)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    ctx: &'a LiteralContext,
}

impl Parser<'_> {
    fn error(&self, reason: &str) -> Error {
        Error::Literal { literal: self.src.to_string(), reason: format!("{reason} at column {}", self.pos + 1) }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<&str> {
        self.skip_ws();
        let len = self.rest().find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a name"));
        }
        let start = self.pos;
        self.pos += len;
        Ok(&self.src[start..self.pos])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        let v: f64 = text.parse().map_err(|_| self.error("expected a number"))?;
        self.pos += len;
        Ok(v)
    }

    fn literal(&mut self) -> Result<Strategy> {
        let name = self.ident()?.to_ascii_lowercase();
        if self.eat(':') {
            let rep = match name.as_str() {
                "supply" => Representation::Supply,
                "demand" => Representation::Demand,
                _ => return Err(self.error("unknown representation prefix")),
            };
            return Ok(self.literal()?.in_representation(rep));
        }
        self.expect('(')?;
        let s = match name.as_str() {
            "gaussian" => {
                let center = self.number()?;
                self.expect(',')?;
                let width = self.number()?;
                let slope = if self.eat(',') { self.number()? } else { 0.0 };
                Strategy::gaussian(center, width, slope)?
            }
            "hermite" => {
                let n = self.number()?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(self.error("hermite order must be a non-negative integer"));
                }
                Strategy::hermite(n as usize, self.ctx.risk)?
            }
            "delta" => Strategy::delta(self.number()?)?,
            "discrete" => {
                let mut atoms = Vec::new();
                loop {
                    let loc = self.number()?;
                    let w = if self.eat(':') { self.number()? } else { 1.0 };
                    atoms.push((loc, w));
                    if !self.eat(',') {
                        break;
                    }
                }
                Strategy::discrete(atoms)?
            }
            "sampled" => {
                self.expect('@')?;
                self.skip_ws();
                let len = self.rest().find(')').ok_or_else(|| self.error("unterminated path"))?;
                let path = self.rest()[..len].trim().to_string();
                self.pos += len;
                load_sampled(&self.ctx.base_dir.join(path))?
            }
            "superpose" => {
                let mut terms = Vec::new();
                loop {
                    terms.push((C64::new(1.0, 0.0), self.literal()?));
                    if !self.eat(',') {
                        break;
                    }
                }
                Strategy::superposition(terms)?
            }
            _ => return Err(self.error(&format!("unknown strategy `{name}`"))),
        };
        self.expect(')')?;
        Ok(s)
    }
}

/// Reads a sampled strategy from a CSV with columns `x,re,im`.
pub fn load_sampled(path: &Path) -> Result<Strategy> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Literal {
            literal: path.display().to_string(),
            reason: format!("missing column `{name}`"),
        })
    };
    let (cx, cre, cim) = (col("x")?, col("re")?, col("im")?);
    let mut xs = Vec::new();
    let mut amps = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|v| v.trim().parse().ok()).ok_or_else(|| Error::Literal {
                literal: path.display().to_string(),
                reason: format!("bad number in record {:?}", rec.position().map(|p| p.line())),
            })
        };
        xs.push(num(cx)?);
        amps.push(C64::new(num(cre)?, num(cim)?));
    }
    if xs.len() < Grid::MIN_POINTS {
        return Err(Error::Literal {
            literal: path.display().to_string(),
            reason: format!("need at least {} rows", Grid::MIN_POINTS),
        });
    }
    let grid = Grid::new(xs[0], *xs.last().unwrap(), xs.len())?;
    let tol = 1e-9 * grid.spacing().max(1.0);
    if xs.iter().enumerate().any(|(i, &x)| (x - grid.point(i)).abs() > tol) {
        return Err(Error::Literal {
            literal: path.display().to_string(),
            reason: "x column is not uniformly spaced".into(),
        });
    }
    Strategy::sampled(amps, grid)
}
