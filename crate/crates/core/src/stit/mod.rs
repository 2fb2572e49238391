//! The STIT cell-division process in a bounded window.
//!
//! Every cell lives for an exponential time with rate `Lambda([C])` and is
//! then divided by a hyperplane drawn from `Lambda` restricted to `[C]`.
//! Instead of one clock per cell, pending deaths sit in a priority queue;
//! by memorylessness this is the same process.
//!
//! Random draws follow a fixed schedule: one exponential when a cell is
//! enqueued (lower child before upper child), then the hyperplane draws
//! when it dies. Runs with the same seed and stream are therefore
//! reproducible, and runs that differ only in `t` are nested.

mod format;

pub use format::{parse_tessellation, write_tessellation, CellRecord, EventRecord, FormatError, TessellationRecord};

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::geometry::{ConvexPolytope, CuboidRegion, Facet, GeometryError, Hyperplane, Vector};
use crate::measure::{HyperplaneMeasure, MeasureError};
use crate::rng::{stream, StreamRng};

/// Default cap on split events per run.
pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;

/// Hyperplane redraws allowed for one split before giving up.
const MAX_SPLIT_RETRIES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StitError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("more than {0} split events; the measure or window is misconfigured")]
    NonfiniteExplosionGuard(usize),
    #[error("restriction window is not contained in the simulation window")]
    WindowNotContained,
    #[error("no non-degenerate split found for cell {0}")]
    SplitFailed(u64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    /// Birth order; the window is cell 1.
    pub id: u64,
    pub polytope: ConvexPolytope,
    pub birth_time: f64,
    pub parent_id: Option<u64>,
    /// `Lambda([C])`.
    pub lifetime_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitEvent {
    pub time: f64,
    pub cell_id: u64,
    pub hyperplane: Hyperplane,
    /// Dividing facet `C ∩ H`; never changes after creation.
    pub facet: Facet,
    /// The facet touches the window boundary.
    pub censored: bool,
}

impl SplitEvent {
    /// Ids of the two children of the `k`-th event (0-based): `2k+2` for the
    /// side `<x,u> <= s`, `2k+3` for the other.
    pub fn child_ids(k: usize) -> (u64, u64) {
        (2 * k as u64 + 2, 2 * k as u64 + 3)
    }
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub window: ConvexPolytope,
    pub t: f64,
    pub measure: HyperplaneMeasure,
    pub seed: u64,
    /// Random stream under `seed`; replicate `i` uses stream `i`.
    pub stream: u64,
    pub max_events: usize,
}

impl SimulationConfig {
    pub fn new(window: ConvexPolytope, t: f64, measure: HyperplaneMeasure, seed: u64) -> Self {
        SimulationConfig {
            window,
            t,
            measure,
            seed,
            stream: 0,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn in_cuboid(window: &CuboidRegion, t: f64, measure: HyperplaneMeasure, seed: u64) -> Self {
        SimulationConfig::new(ConvexPolytope::cuboid(window), t, measure, seed)
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<(), StitError> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(StitError::InvalidConfig(format!("t must be positive, got {}", self.t)));
        }
        if self.window.dim() != self.measure.dim() {
            return Err(StitError::InvalidConfig(
                "window and measure dimensions differ".into(),
            ));
        }
        if !(self.window.volume() > 0.0) {
            return Err(StitError::InvalidConfig("window has empty interior".into()));
        }
        if self.measure.direction_rank() != self.measure.dim().get() {
            return Err(StitError::InvalidConfig(
                "hyperplane normals do not span the space (cells would be unbounded)".into(),
            ));
        }
        Ok(())
    }
}

/// The state `Y_t ∧ W` together with its split genealogy.
#[derive(Clone, Debug, PartialEq)]
pub struct Tessellation {
    window: ConvexPolytope,
    measure: HyperplaneMeasure,
    time: f64,
    seed: u64,
    stream: u64,
    cells: Vec<Cell>,
    events: Vec<SplitEvent>,
}

#[derive(Clone, Copy, PartialEq)]
struct Death(f64, u64);

impl Eq for Death {}

impl PartialOrd for Death {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Death {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Runs the process with the config's own stream.
pub fn simulate(cfg: &SimulationConfig) -> Result<Tessellation, StitError> {
    let mut rng = stream(cfg.seed, cfg.stream);
    simulate_with_rng(cfg, &mut rng)
}

/// Runs the process drawing from `rng`.
pub fn simulate_with_rng(cfg: &SimulationConfig, rng: &mut StreamRng) -> Result<Tessellation, StitError> {
    cfg.validate()?;
    let mut builder = Builder::new(cfg.window.clone(), cfg.measure.clone());
    let mut queue: BinaryHeap<Reverse<Death>> = BinaryHeap::new();
    let first = builder.lifetime(rng, 0.0, builder.slots[0].as_ref().unwrap().lifetime_rate);
    queue.push(Reverse(Death(first, 1)));

    while let Some(Reverse(Death(when, id))) = queue.pop() {
        if when > cfg.t {
            break;
        }
        if builder.events.len() >= cfg.max_events {
            return Err(StitError::NonfiniteExplosionGuard(cfg.max_events));
        }
        let (lower, upper) = builder.split_random(id, when, rng)?;
        for child in [lower, upper] {
            let rate = builder.cell(child).lifetime_rate;
            let death = builder.lifetime(rng, when, rate);
            queue.push(Reverse(Death(death, child)));
        }
    }
    Ok(builder.finish(cfg.t, cfg.seed, cfg.stream))
}

/// A hand-specified split for [`Tessellation::replay`].
#[derive(Clone, Copy, Debug)]
pub struct ReplaySplit {
    pub time: f64,
    pub cell_id: u64,
    pub hyperplane: Hyperplane,
}

struct Builder {
    window: ConvexPolytope,
    measure: HyperplaneMeasure,
    /// Indexed by `id - 1`; `None` once the cell has died.
    slots: Vec<Option<Cell>>,
    events: Vec<SplitEvent>,
}

impl Builder {
    fn new(window: ConvexPolytope, measure: HyperplaneMeasure) -> Self {
        let rate = measure.hitting_mass(&window);
        let root = Cell {
            id: 1,
            polytope: window.clone(),
            birth_time: 0.0,
            parent_id: None,
            lifetime_rate: rate,
        };
        Builder {
            window,
            measure,
            slots: vec![Some(root)],
            events: Vec::new(),
        }
    }

    fn cell(&self, id: u64) -> &Cell {
        self.slots[(id - 1) as usize].as_ref().expect("live cell")
    }

    fn lifetime(&self, rng: &mut StreamRng, now: f64, rate: f64) -> f64 {
        let e: f64 = Exp1.sample(rng);
        if rate > 0.0 {
            now + e / rate
        } else {
            f64::INFINITY
        }
    }

    fn split_random(&mut self, id: u64, time: f64, rng: &mut StreamRng) -> Result<(u64, u64), StitError> {
        for _ in 0..MAX_SPLIT_RETRIES {
            let h = self.measure.sample_hitting(&self.cell(id).polytope, rng)?;
            match self.split_with(id, time, h) {
                Err(StitError::Geometry(GeometryError::DegenerateSplit { .. })) => continue,
                other => return other,
            }
        }
        Err(StitError::SplitFailed(id))
    }

    fn split_with(&mut self, id: u64, time: f64, h: Hyperplane) -> Result<(u64, u64), StitError> {
        let parent = self.cell(id);
        let out = parent.polytope.split(&h)?;
        let censored = out.facet.points().iter().any(|p| self.window.on_boundary(p));
        let (lo_id, hi_id) = SplitEvent::child_ids(self.events.len());
        let mk = |cid: u64, polytope: ConvexPolytope| Cell {
            id: cid,
            lifetime_rate: self.measure.hitting_mass(&polytope),
            polytope,
            birth_time: time,
            parent_id: Some(id),
        };
        let lower = mk(lo_id, out.lower);
        let upper = mk(hi_id, out.upper);
        self.events.push(SplitEvent {
            time,
            cell_id: id,
            hyperplane: h,
            facet: out.facet,
            censored,
        });
        self.slots[(id - 1) as usize] = None;
        self.slots.push(Some(lower));
        self.slots.push(Some(upper));
        Ok((lo_id, hi_id))
    }

    fn finish(self, time: f64, seed: u64, stream: u64) -> Tessellation {
        Tessellation {
            window: self.window,
            measure: self.measure,
            time,
            seed,
            stream,
            cells: self.slots.into_iter().flatten().collect(),
            events: self.events,
        }
    }
}

impl Tessellation {
    /// Builds a tessellation from explicitly given splits, applied in order.
    pub fn replay(
        window: ConvexPolytope,
        measure: HyperplaneMeasure,
        t: f64,
        splits: &[ReplaySplit],
    ) -> Result<Tessellation, StitError> {
        let mut b = Builder::new(window, measure);
        for s in splits {
            let alive = b
                .slots
                .get((s.cell_id.max(1) - 1) as usize)
                .is_some_and(|c| c.is_some());
            if !alive {
                return Err(StitError::InvalidConfig(format!("cell {} is not alive", s.cell_id)));
            }
            b.split_with(s.cell_id, s.time, s.hyperplane)?;
        }
        Ok(b.finish(t, 0, 0))
    }

    pub fn window(&self) -> &ConvexPolytope {
        &self.window
    }

    pub fn measure(&self) -> &HyperplaneMeasure {
        &self.measure
    }

    pub fn dim(&self) -> crate::geometry::Dim {
        self.window.dim()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Surviving cells in id order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Split events in time order.
    pub fn events(&self) -> &[SplitEvent] {
        &self.events
    }

    /// Number of surviving cells.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// `zeta(y) = sum_C Lambda([C])`, the rate of the next jump.
    pub fn holding_rate(&self) -> f64 {
        self.cells.iter().map(|c| c.lifetime_rate).sum()
    }

    /// Internal dividing facets (the window boundary is not included).
    pub fn facets(&self) -> impl Iterator<Item = &Facet> {
        self.events.iter().map(|e| &e.facet)
    }

    /// Induced tessellation of a sub-window `W' ⊆ W`.
    pub fn restrict(&self, sub: &ConvexPolytope) -> Result<Tessellation, StitError> {
        if sub.dim() != self.dim() || !self.window.contains_polytope(sub) {
            return Err(StitError::WindowNotContained);
        }
        let clip_cell = |p: &ConvexPolytope| {
            sub.halfspaces()
                .iter()
                .try_fold(p.clone(), |acc, h| {
                    let (lo, hi) = acc.extent(&h.normal);
                    if hi <= h.offset {
                        Some(acc)
                    } else if lo >= h.offset {
                        None
                    } else {
                        acc.clip(h)
                    }
                })
        };
        let cells = self
            .cells
            .iter()
            .filter_map(|c| {
                clip_cell(&c.polytope).map(|polytope| Cell {
                    lifetime_rate: self.measure.hitting_mass(&polytope),
                    polytope,
                    ..c.clone()
                })
            })
            .collect();
        let events = self
            .events
            .iter()
            .filter_map(|e| {
                let facet = sub
                    .halfspaces()
                    .iter()
                    .fold(e.facet.clone(), |f, h| f.clip(h));
                (facet.measure() > 0.0).then(|| SplitEvent {
                    censored: facet.points().iter().any(|p| sub.on_boundary(p)),
                    facet,
                    ..e.clone()
                })
            })
            .collect();
        Ok(Tessellation {
            window: sub.clone(),
            measure: self.measure.clone(),
            time: self.time,
            seed: self.seed,
            stream: self.stream,
            cells,
            events,
        })
    }

    /// The tessellation shifted by `a`.
    pub fn translate(&self, a: Vector) -> Tessellation {
        Tessellation {
            window: self.window.translate(a),
            measure: self.measure.clone(),
            time: self.time,
            seed: self.seed,
            stream: self.stream,
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    polytope: c.polytope.translate(a),
                    ..c.clone()
                })
                .collect(),
            events: self
                .events
                .iter()
                .map(|e| SplitEvent {
                    hyperplane: e.hyperplane.translate(a),
                    facet: e.facet.translate(a),
                    ..e.clone()
                })
                .collect(),
        }
    }
}
