//! Parametric 2D unit-cell classes and their rasterization onto binary pixel grids.
//!
//! A unit cell lives on the unit square with periodic boundary conditions and is
//! described by a set of rods (thickened line segments). Rasterizing a cell at a
//! given rod thickness produces a [`PixelGrid`]; sweeping thickness trades volume
//! fraction against topology while the connectivity pattern of the class is kept.
//!
//! Six standard classes are provided by [`standard_classes`]:
//!
//! | id | layout                                         | tagged symmetry |
//! |----|------------------------------------------------|-----------------|
//! | 1  | orthogonal cross (horizontal + vertical rod)   | cubic           |
//! | 2  | diagonal cross (both cell diagonals)           | cubic           |
//! | 3  | square frame along the cell edges              | cubic           |
//! | 4  | orthogonal + diagonal cross combined           | cubic           |
//! | 5  | as 4 with the horizontal rod at double weight  | stiff in x      |
//! | 6  | as 4 with the vertical rod at double weight    | stiff in y      |

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Side length, in pixels, of every rasterized unit cell.
pub const GRID_RESOLUTION: usize = 100;

/// Thinnest admissible rod, in pixels, for a weight-1 rod. Thinner rods
/// rasterize into disconnected pixel chains.
pub const MIN_ROD_WIDTH_PX: f64 = 2.0;

/// Termination tolerance on `|achieved - target|` for [`MicroClass::solve_thickness`].
pub const VF_TOLERANCE: f64 = 0.005;

/// Symmetry tag of a cell class, used downstream for consistency checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Invariant under 90-degree rotation; `C11 = C22`.
    Cubic,
    /// Reinforced along x; `C11 > C22`.
    XStiff,
    /// Reinforced along y; `C22 > C11`.
    YStiff,
}

/// A thickened line segment in the periodic unit square.
///
/// `weight` scales the rod thickness relative to the nominal cell thickness:
/// a rod of weight `w` rasterized at thickness `t` is `w * t` wide.
#[derive(Clone, Copy, Debug)]
pub struct Rod {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub weight: f64,
}

impl Rod {
    /// A rod of nominal weight 1 between two points of the unit square.
    pub fn new(start: [f64; 2], end: [f64; 2]) -> Self {
        Self {
            start,
            end,
            weight: 1.0,
        }
    }

    /// A rod with an explicit thickness weight.
    pub fn weighted(start: [f64; 2], end: [f64; 2], weight: f64) -> Self {
        Self { start, end, weight }
    }
}

/// Distance from `p` to the segment `a..b` (all in the unit square, no wrap).
fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let len2 = dx * dx + dy * dy;
    let (cx, cy) = if len2 == 0.0 {
        (a[0], a[1])
    } else {
        let s = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
        let s = s.clamp(0.0, 1.0);
        (a[0] + s * dx, a[1] + s * dy)
    };
    let ex = p[0] - cx;
    let ey = p[1] - cy;
    (ex * ex + ey * ey).sqrt()
}

/// Distance from `p` to the segment under periodic wrap: the minimum over the
/// nine copies of the segment translated by `{-1, 0, 1}` in each direction.
fn periodic_segment_distance(p: [f64; 2], rod: &Rod) -> f64 {
    let mut best = f64::INFINITY;
    for ox in -1..=1 {
        for oy in -1..=1 {
            let t = [ox as f64, oy as f64];
            let a = [rod.start[0] + t[0], rod.start[1] + t[1]];
            let b = [rod.end[0] + t[0], rod.end[1] + t[1]];
            let d = point_segment_distance(p, a, b);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Per-pixel critical thicknesses of a class: pixel `k` is solid at thickness
/// `t` iff `per_pixel[k] <= t`. `sorted` is the same data in ascending order,
/// so the volume fraction at `t` is a rank query.
#[derive(Clone, Debug)]
struct CritTable {
    per_pixel: Vec<f64>,
    sorted: Vec<f64>,
}

/// Rounds a critical thickness onto a coarse binary grid (`2^-40`, about
/// 1e-12). Symmetric pixel pairs compute mathematically equal distances along
/// different floating-point routes; snapping makes them compare identically,
/// so rasterized grids keep the exact symmetries of the rod layout.
fn snap(v: f64) -> f64 {
    const SCALE: f64 = (1u64 << 40) as f64;
    (v * SCALE).round() / SCALE
}

impl CritTable {
    /// Moves `t` to the middle of its plateau: the rasterization is unchanged
    /// but no pixel sits within floating-point noise of the threshold.
    fn centered(&self, t: f64) -> f64 {
        let k = self.sorted.partition_point(|&c| c <= t);
        if k == 0 {
            return t;
        }
        let lo = self.sorted[k - 1];
        let hi = if k < self.sorted.len() {
            self.sorted[k].min(1.0)
        } else {
            1.0
        };
        if hi > lo {
            0.5 * (lo + hi)
        } else {
            t
        }
    }
}

/// A parametric cell class: a rod layout plus a symmetry tag.
#[derive(Clone, Debug)]
pub struct MicroClass {
    id: usize,
    rods: Vec<Rod>,
    symmetry: Symmetry,
    crit: OnceLock<CritTable>,
}

/// Result of inverting the thickness-to-volume-fraction map.
#[derive(Clone, Copy, Debug)]
pub struct ThicknessSolve {
    pub thickness: f64,
    pub achieved_vf: f64,
}

impl MicroClass {
    /// Builds a class from an arbitrary rod layout.
    ///
    /// `id` is a 1-based label carried through manifests and datasets.
    pub fn new(id: usize, rods: Vec<Rod>, symmetry: Symmetry) -> Result<Self> {
        if rods.is_empty() {
            return Err(Error::InvalidInput("class needs at least one rod".into()));
        }
        for r in &rods {
            if !(r.weight > 0.0) || !r.weight.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "rod weight {} must be positive and finite",
                    r.weight
                )));
            }
        }
        Ok(Self {
            id,
            rods,
            symmetry,
            crit: OnceLock::new(),
        })
    }

    /// 1-based class label.
    pub fn id(&self) -> usize {
        self.id
    }

    /// Symmetry tag of the layout.
    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Rod layout.
    pub fn rods(&self) -> &[Rod] {
        &self.rods
    }

    fn crit(&self) -> &CritTable {
        self.crit.get_or_init(|| {
            let res = GRID_RESOLUTION;
            let mut per_pixel = vec![f64::INFINITY; res * res];
            for ix in 0..res {
                let x = (ix as f64 + 0.5) / res as f64;
                for iy in 0..res {
                    let y = (iy as f64 + 0.5) / res as f64;
                    let mut tcrit = f64::INFINITY;
                    for rod in &self.rods {
                        // Solid iff dist <= t * weight / 2, i.e. t >= 2 dist / weight.
                        let t = 2.0 * periodic_segment_distance([x, y], rod) / rod.weight;
                        if t < tcrit {
                            tcrit = t;
                        }
                    }
                    per_pixel[ix * res + iy] = snap(tcrit);
                }
            }
            let mut sorted = per_pixel.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("critical thicknesses are finite"));
            CritTable { per_pixel, sorted }
        })
    }

    /// Rasterizes the class at nominal thickness `t` in `(0, 1]`.
    ///
    /// A pixel is solid iff its center lies within half the (weighted) rod
    /// thickness of some rod, measured with periodic wrap. Monotone in `t`:
    /// larger thickness can only add pixels.
    pub fn rasterize(&self, thickness: f64) -> Result<PixelGrid> {
        if !(thickness > 0.0 && thickness <= 1.0) {
            return Err(Error::ThicknessOutOfRange(thickness));
        }
        let crit = self.crit();
        let cells = crit.per_pixel.iter().map(|&c| c <= thickness).collect();
        Ok(PixelGrid {
            resolution: GRID_RESOLUTION,
            cells,
        })
    }

    /// Volume fraction of the rasterization at thickness `t` (no grid built).
    pub fn volume_fraction_at(&self, thickness: f64) -> f64 {
        let crit = self.crit();
        let count = crit.sorted.partition_point(|&c| c <= thickness);
        count as f64 / crit.sorted.len() as f64
    }

    /// Attainable volume-fraction range `[vf at minimum rod width, 1.0]`.
    pub fn vf_bounds(&self) -> (f64, f64) {
        let tmin = MIN_ROD_WIDTH_PX / GRID_RESOLUTION as f64;
        (self.volume_fraction_at(tmin), 1.0)
    }

    /// Finds a thickness whose rasterized volume fraction approximates `target_vf`.
    ///
    /// Bisection on thickness, terminating as soon as the achieved fraction is
    /// within [`VF_TOLERANCE`] of the target. The map from thickness to volume
    /// fraction is a step function (pixel counts are multiples of `1/res^2`),
    /// so for coarse layouts the tolerance may be unattainable; the bracket
    /// then collapses and the endpoint closest to the target is returned.
    /// Targets outside the attainable range produce [`Error::InfeasibleTarget`].
    pub fn solve_thickness(&self, target_vf: f64) -> Result<ThicknessSolve> {
        let (vf_min, vf_max) = self.vf_bounds();
        if !target_vf.is_finite() || target_vf < vf_min - 1e-12 || target_vf > vf_max + 1e-12 {
            return Err(Error::InfeasibleTarget {
                class_id: self.id,
                target: target_vf,
                lo: vf_min,
                hi: vf_max,
            });
        }
        let tmin = MIN_ROD_WIDTH_PX / GRID_RESOLUTION as f64;
        let mut lo = tmin;
        let mut hi = 1.0;
        let mut v_lo = vf_min;
        let mut v_hi = vf_max;
        if (v_hi - target_vf).abs() <= VF_TOLERANCE {
            // Full thickness is reported as-is so a density-1 request maps to 1.
            return Ok(ThicknessSolve {
                thickness: hi,
                achieved_vf: v_hi,
            });
        }
        let mut candidate = None;
        if (v_lo - target_vf).abs() <= VF_TOLERANCE {
            candidate = Some(lo);
        }
        if candidate.is_none() {
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let v = self.volume_fraction_at(mid);
                if (v - target_vf).abs() <= VF_TOLERANCE {
                    candidate = Some(mid);
                    break;
                }
                if v < target_vf {
                    lo = mid;
                    v_lo = v;
                } else {
                    hi = mid;
                    v_hi = v;
                }
            }
        }
        // On bracket collapse the tolerance is unattainable (the vf map is a
        // step function); take the endpoint closer to the target.
        let candidate = candidate.unwrap_or({
            if (v_lo - target_vf).abs() <= (v_hi - target_vf).abs() {
                lo
            } else {
                hi
            }
        });
        // Re-center inside the plateau so the rasterization threshold is not
        // within floating-point noise of any pixel's critical thickness.
        let thickness = self.crit().centered(candidate);
        Ok(ThicknessSolve {
            thickness,
            achieved_vf: self.volume_fraction_at(thickness),
        })
    }
}

/// The six standard classes, ids 1 through 6.
pub fn standard_classes() -> Vec<MicroClass> {
    let h = Rod::new([0.0, 0.5], [1.0, 0.5]);
    let v = Rod::new([0.5, 0.0], [0.5, 1.0]);
    let d1 = Rod::new([0.0, 0.0], [1.0, 1.0]);
    let d2 = Rod::new([0.0, 1.0], [1.0, 0.0]);
    let frame = vec![
        Rod::new([0.0, 0.0], [1.0, 0.0]),
        Rod::new([1.0, 0.0], [1.0, 1.0]),
        Rod::new([1.0, 1.0], [0.0, 1.0]),
        Rod::new([0.0, 1.0], [0.0, 0.0]),
    ];
    let h2 = Rod::weighted([0.0, 0.5], [1.0, 0.5], 2.0);
    let v2 = Rod::weighted([0.5, 0.0], [0.5, 1.0], 2.0);

    vec![
        MicroClass::new(1, vec![h, v], Symmetry::Cubic).expect("valid layout"),
        MicroClass::new(2, vec![d1, d2], Symmetry::Cubic).expect("valid layout"),
        MicroClass::new(3, frame, Symmetry::Cubic).expect("valid layout"),
        MicroClass::new(4, vec![h, v, d1, d2], Symmetry::Cubic).expect("valid layout"),
        MicroClass::new(5, vec![h2, v, d1, d2], Symmetry::XStiff).expect("valid layout"),
        MicroClass::new(6, vec![h, v2, d1, d2], Symmetry::YStiff).expect("valid layout"),
    ]
}

/// A square binary pixel image of a unit cell. `true` marks solid material.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelGrid {
    resolution: usize,
    cells: Vec<bool>,
}

impl PixelGrid {
    /// Builds a grid from row-major-by-column data: `cells[ix * res + iy]`.
    pub fn from_cells(resolution: usize, cells: Vec<bool>) -> Result<Self> {
        if resolution == 0 || cells.len() != resolution * resolution {
            return Err(Error::InvalidInput(format!(
                "cell buffer length {} does not match resolution {}",
                cells.len(),
                resolution
            )));
        }
        Ok(Self { resolution, cells })
    }

    /// A grid of the given resolution filled entirely with one phase.
    pub fn filled(resolution: usize, solid: bool) -> Self {
        Self {
            resolution,
            cells: vec![solid; resolution * resolution],
        }
    }

    /// Pixels per side.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Solid flag at column `ix`, row `iy` (origin at the lower-left corner).
    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.cells[ix * self.resolution + iy]
    }

    /// Sets the solid flag at column `ix`, row `iy`.
    pub fn set(&mut self, ix: usize, iy: usize, solid: bool) {
        self.cells[ix * self.resolution + iy] = solid;
    }

    /// Raw cell buffer, `ix`-major.
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Number of solid pixels.
    pub fn solid_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Solid pixel count over total pixel count.
    pub fn volume_fraction(&self) -> f64 {
        self.solid_count() as f64 / (self.cells.len() as f64)
    }

    /// The grid with x and y axes swapped.
    pub fn transposed(&self) -> Self {
        let res = self.resolution;
        let mut cells = vec![false; res * res];
        for ix in 0..res {
            for iy in 0..res {
                cells[iy * res + ix] = self.cells[ix * res + iy];
            }
        }
        Self {
            resolution: res,
            cells,
        }
    }

    /// The grid rotated by 90 degrees counterclockwise.
    pub fn rotated90(&self) -> Self {
        let res = self.resolution;
        let mut out = Self::filled(res, false);
        for ix in 0..res {
            for iy in 0..res {
                out.set(res - 1 - iy, ix, self.get(ix, iy));
            }
        }
        out
    }

    /// Whether the solid phase forms a single 4-connected component.
    /// An all-void grid counts as disconnected.
    pub fn is_connected(&self) -> bool {
        let res = self.resolution;
        let total = self.solid_count();
        if total == 0 {
            return false;
        }
        let start = self.cells.iter().position(|&c| c).expect("has solid");
        let mut seen = vec![false; res * res];
        let mut stack = vec![start];
        seen[start] = true;
        let mut reached = 0usize;
        while let Some(k) = stack.pop() {
            reached += 1;
            let ix = k / res;
            let iy = k % res;
            let push = |jx: usize, jy: usize, seen: &mut Vec<bool>, stack: &mut Vec<usize>| {
                let j = jx * res + jy;
                if self.cells[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                push(ix - 1, iy, &mut seen, &mut stack);
            }
            if ix + 1 < res {
                push(ix + 1, iy, &mut seen, &mut stack);
            }
            if iy > 0 {
                push(ix, iy - 1, &mut seen, &mut stack);
            }
            if iy + 1 < res {
                push(ix, iy + 1, &mut seen, &mut stack);
            }
        }
        reached == total
    }

    /// Whether some solid pixel touches each of the four cell edges.
    pub fn touches_all_edges(&self) -> bool {
        let res = self.resolution;
        let mut left = false;
        let mut right = false;
        let mut bottom = false;
        let mut top = false;
        for k in 0..res {
            left |= self.get(0, k);
            right |= self.get(res - 1, k);
            bottom |= self.get(k, 0);
            top |= self.get(k, res - 1);
        }
        left && right && bottom && top
    }
}

/// One generated sample of the cell library.
#[derive(Clone, Debug)]
pub struct LibraryEntry {
    /// 1-based class label.
    pub class_id: usize,
    /// Volume fraction that was requested.
    pub target_vf: f64,
    /// Thickness the solver settled on.
    pub thickness: f64,
    /// Volume fraction of the rasterized grid.
    pub achieved_vf: f64,
    /// The rasterized cell.
    pub grid: PixelGrid,
}

/// Generates the cell library: `samples_per_class` volume-fraction targets,
/// uniformly spaced over `vf_range`, rasterized for every standard class.
///
/// Entries are ordered class-major (all samples of class 1, then class 2, ...),
/// with volume fractions ascending within a class.
pub fn build_library(samples_per_class: usize, vf_range: (f64, f64)) -> Result<Vec<LibraryEntry>> {
    let (lo, hi) = vf_range;
    if samples_per_class == 0 {
        return Err(Error::InvalidInput("samples_per_class must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo <= 0.0 || hi > 1.0 {
        return Err(Error::InvalidInput(format!(
            "volume-fraction range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1"
        )));
    }
    let targets: Vec<f64> = if samples_per_class == 1 {
        vec![lo]
    } else {
        (0..samples_per_class)
            .map(|k| lo + (hi - lo) * k as f64 / (samples_per_class - 1) as f64)
            .collect()
    };
    let mut entries = Vec::with_capacity(6 * targets.len());
    for class in standard_classes() {
        for &target in &targets {
            let sol = class.solve_thickness(target).map_err(|e| Error::Sample {
                class_id: class.id(),
                vf: target,
                source: Box::new(e),
            })?;
            let grid = class.rasterize(sol.thickness).map_err(|e| Error::Sample {
                class_id: class.id(),
                vf: target,
                source: Box::new(e),
            })?;
            entries.push(LibraryEntry {
                class_id: class.id(),
                target_vf: target,
                thickness: sol.thickness,
                achieved_vf: sol.achieved_vf,
                grid,
            });
        }
    }
    Ok(entries)
}
