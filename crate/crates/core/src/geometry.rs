//! Planar point processes: PPPs on a disk and the sector-hole PHP carved
//! from them.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::model::{LinkState, NetworkConfig, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, phi: f64) -> Self {
        Self::new(r * phi.cos(), r * phi.sin())
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Polar angle in [0, 2π).
    pub fn angle(&self) -> f64 {
        wrap_angle(self.y.atan2(self.x))
    }

    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Sub for Point2D {
    type Output = Point2D;
    fn sub(self, o: Point2D) -> Point2D {
        Point2D::new(self.x - o.x, self.y - o.y)
    }
}

/// Reduces an angle to [0, 2π).
fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A circular sector of radius `radius` covering polar angles
/// [orientation, orientation + central_angle) around `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorHole {
    pub center: Point2D,
    pub radius: f64,
    pub central_angle: f64,
    pub orientation: f64,
}

impl SectorHole {
    pub fn contains(&self, p: &Point2D) -> bool {
        point_in_sector(p, self)
    }

    fn is_empty(&self) -> bool {
        self.radius <= 0.0 || self.central_angle <= 0.0
    }
}

pub fn point_in_sector(p: &Point2D, hole: &SectorHole) -> bool {
    let d = *p - hole.center;
    if d.x * d.x + d.y * d.y > hole.radius * hole.radius || hole.is_empty() {
        return false;
    }
    if hole.central_angle >= TAU {
        return true;
    }
    wrap_angle(d.angle() - hole.orientation) < hole.central_angle
}

/// Homogeneous PPP of `density` (per m²) on the disk of radius `window_radius` at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window_radius: f64, rng: &mut R) -> Vec<Point2D> {
    let mean = density * std::f64::consts::PI * window_radius * window_radius;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..count)
        .map(|_| {
            let r = window_radius * rng.random::<f64>().sqrt();
            Point2D::from_polar(r, TAU * rng.random::<f64>())
        })
        .collect()
}

/// Spatial index of holes on a square grid with cell side equal to the hole radius.
struct HoleIndex<'a> {
    holes: &'a [SectorHole],
    origin: Point2D,
    cell: f64,
    dims: (usize, usize),
    /// Hole ids of cell `(i, j)` are `ids[starts[k]..starts[k + 1]]` with `k = j·nx + i`.
    starts: Vec<usize>,
    ids: Vec<usize>,
}

impl<'a> HoleIndex<'a> {
    /// Cells per side are capped so tiny holes on a wide window stay cheap.
    const MAX_CELLS_PER_SIDE: f64 = 1024.0;

    fn new(holes: &'a [SectorHole]) -> Self {
        let live: Vec<usize> = (0..holes.len()).filter(|&i| !holes[i].is_empty()).collect();
        let mut index = Self {
            holes,
            origin: Point2D::ORIGIN,
            cell: 0.0,
            dims: (0, 0),
            starts: vec![0],
            ids: Vec::new(),
        };
        if live.is_empty() {
            return index;
        }
        let (mut lo, mut hi) = (holes[live[0]].center, holes[live[0]].center);
        let mut reach = 0.0f64;
        for &i in &live {
            let c = holes[i].center;
            lo = Point2D::new(lo.x.min(c.x), lo.y.min(c.y));
            hi = Point2D::new(hi.x.max(c.x), hi.y.max(c.y));
            reach = reach.max(holes[i].radius);
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y) + 2.0 * reach;
        let cell = reach.max(span / Self::MAX_CELLS_PER_SIDE);
        index.origin = Point2D::new(lo.x - reach, lo.y - reach);
        index.cell = cell;
        let nx = ((hi.x - lo.x + 2.0 * reach) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y + 2.0 * reach) / cell).floor() as usize + 1;
        index.dims = (nx, ny);

        let cell_of = |c: &Point2D| {
            let (i, j) = index.cell_coords(c);
            j as usize * nx + i as usize
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for &i in &live {
            counts[cell_of(&holes[i].center) + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut ids = vec![0; live.len()];
        for &i in &live {
            let k = cell_of(&holes[i].center);
            ids[fill[k]] = i;
            fill[k] += 1;
        }
        index.starts = counts;
        index.ids = ids;
        index
    }

    fn cell_coords(&self, p: &Point2D) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
        )
    }

    fn covers(&self, p: &Point2D) -> bool {
        if self.ids.is_empty() {
            return false;
        }
        let (nx, ny) = (self.dims.0 as i64, self.dims.1 as i64);
        let (i, j) = self.cell_coords(p);
        // Hole centres within one cell size (≥ the largest radius) of p.
        for b in (j - 1).max(0)..=(j + 1).min(ny - 1) {
            for a in (i - 1).max(0)..=(i + 1).min(nx - 1) {
                let k = (b * nx + a) as usize;
                if self.ids[self.starts[k]..self.starts[k + 1]]
                    .iter()
                    .any(|&h| self.holes[h].contains(p))
                {
                    return true;
                }
            }
        }
        false
    }
}

/// Splits `baseline` into points outside every hole and points inside at least one.
pub fn carve_with_holes(baseline: &[Point2D], holes: &[SectorHole]) -> (Vec<Point2D>, Vec<Point2D>) {
    let index = HoleIndex::new(holes);
    baseline.iter().partition(|p| !index.covers(p))
}

/// Places a hole with uniform orientation at each centre and removes the
/// covered baseline points. Returns the retained points and the holes.
pub fn carve_php<R: Rng + ?Sized>(
    baseline: &[Point2D],
    hole_centers: &[Point2D],
    radius: f64,
    central_angle: f64,
    rng: &mut R,
) -> (Vec<Point2D>, Vec<SectorHole>) {
    let holes = place_holes(hole_centers, radius, central_angle, rng);
    let (retained, _) = carve_with_holes(baseline, &holes);
    (retained, holes)
}

fn place_holes<R: Rng + ?Sized>(centers: &[Point2D], radius: f64, central_angle: f64, rng: &mut R) -> Vec<SectorHole> {
    centers
        .iter()
        .map(|&center| SectorHole {
            center,
            radius,
            central_angle,
            orientation: TAU * rng.random::<f64>(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseStation {
    pub position: Point2D,
    pub tier: Tier,
    pub state: LinkState,
}

impl BaseStation {
    pub fn distance(&self) -> f64 {
        self.position.norm()
    }
}

/// One network realization around a UE at the origin.
#[derive(Debug, Clone)]
pub struct PointPattern {
    pub window_radius: f64,
    /// Every MBS and retained SBS inside the window, labelled by link state.
    pub stations: Vec<BaseStation>,
    /// Baseline SBSs inside the window that fell into a hole.
    pub removed: Vec<Point2D>,
    /// All holes, including those centred outside the window.
    pub holes: Vec<SectorHole>,
}

impl PointPattern {
    pub fn count(&self, tier: Tier) -> usize {
        self.stations.iter().filter(|b| b.tier == tier).count()
    }

    /// Writes `x y tier state in_hole`, one line per base station; removed SBSs have state `NA`.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x y tier state in_hole")?;
        for b in &self.stations {
            writeln!(
                out,
                "{} {} {} {} 0",
                b.position.x,
                b.position.y,
                b.tier.number(),
                b.state.as_str()
            )?;
        }
        for p in &self.removed {
            writeln!(out, "{} {} {} NA 1", p.x, p.y, Tier::Small.number())?;
        }
        Ok(())
    }
}

/// Samples MBSs on the window enlarged by D, baseline SBSs on the window,
/// carves the PHP and labels each in-window BS LOS with probability P^LOS(|x|).
///
/// Draws happen in a fixed order (MBS positions, SBS positions, hole
/// orientations, MBS labels, SBS labels) so that a stream is reproducible.
pub fn sample_network<R: Rng + ?Sized>(cfg: &NetworkConfig, window_radius: f64, rng: &mut R) -> PointPattern {
    let d = cfg.hole_radius;
    let mbs = sample_ppp(cfg.tier(Tier::Macro).density, window_radius + d, rng);
    let sbs = sample_ppp(cfg.tier(Tier::Small).density, window_radius, rng);
    let holes = place_holes(&mbs, d, cfg.hole_angle, rng);
    let (retained, removed) = carve_with_holes(&sbs, &holes);

    let mut stations = Vec::with_capacity(retained.len() + mbs.len());
    let mut label = |points: &[Point2D], tier: Tier, rng: &mut R| {
        for &p in points {
            let r = p.norm();
            if r > window_radius {
                continue;
            }
            let state = if rng.random::<f64>() < cfg.blockage.los(r) {
                LinkState::Los
            } else {
                LinkState::Nlos
            };
            stations.push(BaseStation {
                position: p,
                tier,
                state,
            });
        }
    };
    label(&mbs, Tier::Macro, rng);
    label(&retained, Tier::Small, rng);

    PointPattern {
        window_radius,
        stations,
        removed,
        holes,
    }
}

pub const MIN_WINDOW_RADIUS: f64 = 2000.0;
pub const MAX_WINDOW_RADIUS: f64 = 10_000.0;

/// max(10 mean MBS spacings, 20 blockage decay lengths, 2 km), capped at 10 km.
pub fn default_window_radius(cfg: &NetworkConfig) -> f64 {
    let mut r = MIN_WINDOW_RADIUS;
    let lambda1 = cfg.tier(Tier::Macro).density;
    if lambda1 > 0.0 {
        r = r.max(10.0 / (std::f64::consts::PI * lambda1).sqrt());
    }
    if let Some(len) = cfg.blockage.decay_length() {
        r = r.max(20.0 * len);
    }
    r.min(MAX_WINDOW_RADIUS)
}
