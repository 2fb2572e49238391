//! Plain-text tessellation format.
//!
//! ```text
//! stit-tessellation 1
//! dim <l>
//! time <t>
//! seed <seed> <stream>
//! measure isotropic <mass>
//! measure discrete <k> <u_1..u_l> <w> ...          (alternative)
//! window <n> <x_1..x_l> ...                        (window vertices)
//! cells <N>
//! cell <id> <parent|-> <birth_time> <n> <x_1..x_l> ...
//! events <M>
//! event <time> <cell_id> <u_1..u_l> <offset> <censored 0|1> <n> <x_1..x_l> ...
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips `f64`
//! exactly. Event rows end with the points of the dividing facet (segment
//! endpoints, or the polygon loop in space).

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use super::Tessellation;
use crate::geometry::{Dim, Vector};
use crate::measure::DirectionalDistribution;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellRecord {
    pub id: u64,
    pub parent: Option<u64>,
    pub birth_time: f64,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub cell_id: u64,
    pub normal: Vec<f64>,
    pub offset: f64,
    pub censored: bool,
    pub facet: Vec<Vec<f64>>,
}

/// Parsed contents of a tessellation file.
#[derive(Clone, Debug, PartialEq)]
pub struct TessellationRecord {
    pub dim: usize,
    pub time: f64,
    pub seed: u64,
    pub stream: u64,
    pub measure: String,
    pub window: Vec<Vec<f64>>,
    pub cells: Vec<CellRecord>,
    pub events: Vec<EventRecord>,
}

impl From<&Tessellation> for TessellationRecord {
    fn from(y: &Tessellation) -> Self {
        let d = y.dim();
        let pts = |vs: &[Vector]| vs.iter().map(|v| v.coords(d).to_vec()).collect::<Vec<_>>();
        TessellationRecord {
            dim: d.get(),
            time: y.time(),
            seed: y.seed(),
            stream: y.stream(),
            measure: measure_line(y),
            window: pts(y.window().vertices()),
            cells: y
                .cells()
                .iter()
                .map(|c| CellRecord {
                    id: c.id,
                    parent: c.parent_id,
                    birth_time: c.birth_time,
                    vertices: pts(c.polytope.vertices()),
                })
                .collect(),
            events: y
                .events()
                .iter()
                .map(|e| EventRecord {
                    time: e.time,
                    cell_id: e.cell_id,
                    normal: e.hyperplane.normal().coords(d).to_vec(),
                    offset: e.hyperplane.offset(),
                    censored: e.censored,
                    facet: pts(e.facet.points()),
                })
                .collect(),
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn measure_line(y: &Tessellation) -> String {
    let d = y.dim();
    match y.measure().directional() {
        DirectionalDistribution::Isotropic { mass } => format!("isotropic {}", real(*mass)),
        DirectionalDistribution::Discrete(atoms) => {
            let mut s = format!("discrete {}", atoms.len());
            for a in atoms {
                for c in a.direction.coords(d) {
                    let _ = write!(s, " {}", real(*c));
                }
                let _ = write!(s, " {}", real(a.weight));
            }
            s
        }
    }
}

fn push_points(s: &mut String, pts: &[Vec<f64>]) {
    let _ = write!(s, " {}", pts.len());
    for p in pts {
        for c in p {
            let _ = write!(s, " {}", real(*c));
        }
    }
}

impl TessellationRecord {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "stit-tessellation 1");
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "time {}", real(self.time));
        let _ = writeln!(s, "seed {} {}", self.seed, self.stream);
        let _ = writeln!(s, "measure {}", self.measure);
        s.push_str("window");
        push_points(&mut s, &self.window);
        s.push('\n');
        let _ = writeln!(s, "cells {}", self.cells.len());
        for c in &self.cells {
            let parent = c.parent.map_or("-".to_string(), |p| p.to_string());
            let _ = write!(s, "cell {} {} {}", c.id, parent, real(c.birth_time));
            push_points(&mut s, &c.vertices);
            s.push('\n');
        }
        let _ = writeln!(s, "events {}", self.events.len());
        for e in &self.events {
            let _ = write!(s, "event {} {}", real(e.time), e.cell_id);
            for c in &e.normal {
                let _ = write!(s, " {}", real(*c));
            }
            let _ = write!(s, " {} {}", real(e.offset), e.censored as u8);
            push_points(&mut s, &e.facet);
            s.push('\n');
        }
        s
    }
}

pub fn write_tessellation<W: Write>(y: &Tessellation, out: &mut W) -> Result<(), FormatError> {
    out.write_all(TessellationRecord::from(y).to_text().as_bytes())?;
    Ok(())
}

struct Tokens<'a> {
    line: usize,
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormatError> {
        Err(FormatError::Parse {
            line: self.line,
            msg: msg.into(),
        })
    }

    fn word(&mut self) -> Result<&'a str, FormatError> {
        match self.it.next() {
            Some(w) => Ok(w),
            None => self.err("unexpected end of line"),
        }
    }

    fn expect(&mut self, kw: &str) -> Result<(), FormatError> {
        let w = self.word()?;
        if w != kw {
            return self.err(format!("expected `{kw}`, found `{w}`"));
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T, FormatError> {
        let w = self.word()?;
        match w.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.err(format!("cannot parse `{w}`")),
        }
    }

    fn points(&mut self, dim: usize) -> Result<Vec<Vec<f64>>, FormatError> {
        let n: usize = self.parse()?;
        (0..n)
            .map(|_| (0..dim).map(|_| self.parse()).collect())
            .collect()
    }

    fn done(&mut self) -> Result<(), FormatError> {
        match self.it.next() {
            None => Ok(()),
            Some(w) => self.err(format!("trailing token `{w}`")),
        }
    }
}

pub fn parse_tessellation(text: &str) -> Result<TessellationRecord, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| -> Result<Tokens<'_>, FormatError> {
        match lines.next() {
            Some((i, l)) => Ok(Tokens {
                line: i + 1,
                it: l.split_whitespace(),
            }),
            None => Err(FormatError::Parse {
                line: 0,
                msg: format!("missing {what}"),
            }),
        }
    };
    let mut t = next("header")?;
    t.expect("stit-tessellation")?;
    t.expect("1")?;
    let mut t = next("dim")?;
    t.expect("dim")?;
    let dim: usize = t.parse()?;
    if Dim::from_usize(dim).is_err() {
        return t.err(format!("unsupported dimension {dim}"));
    }
    let mut t = next("time")?;
    t.expect("time")?;
    let time = t.parse()?;
    let mut t = next("seed")?;
    t.expect("seed")?;
    let (seed, stream) = (t.parse()?, t.parse()?);
    let mut t = next("measure")?;
    t.expect("measure")?;
    let measure = t.it.clone().collect::<Vec<_>>().join(" ");
    let mut t = next("window")?;
    t.expect("window")?;
    let window = t.points(dim)?;
    t.done()?;
    let mut t = next("cells")?;
    t.expect("cells")?;
    let n_cells: usize = t.parse()?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let mut t = next("cell row")?;
        t.expect("cell")?;
        let id = t.parse()?;
        let parent = match t.word()? {
            "-" => None,
            w => match w.parse() {
                Ok(p) => Some(p),
                Err(_) => return t.err(format!("bad parent `{w}`")),
            },
        };
        let birth_time = t.parse()?;
        let vertices = t.points(dim)?;
        t.done()?;
        cells.push(CellRecord {
            id,
            parent,
            birth_time,
            vertices,
        });
    }
    let mut t = next("events")?;
    t.expect("events")?;
    let n_events: usize = t.parse()?;
    let mut events = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        let mut t = next("event row")?;
        t.expect("event")?;
        let time = t.parse()?;
        let cell_id = t.parse()?;
        let normal = (0..dim).map(|_| t.parse()).collect::<Result<_, _>>()?;
        let offset = t.parse()?;
        let censored = match t.word()? {
            "0" => false,
            "1" => true,
            w => return t.err(format!("bad censored flag `{w}`")),
        };
        let facet = t.points(dim)?;
        t.done()?;
        events.push(EventRecord {
            time,
            cell_id,
            normal,
            offset,
            censored,
            facet,
        });
    }
    if let Ok(t) = next("end") {
        return t.err("unexpected content after events");
    }
    Ok(TessellationRecord {
        dim,
        time,
        seed,
        stream,
        measure,
        window,
        cells,
        events,
    })
}
