//! Antenna positions, movement regions and plane-wave array responses.
//!
//! Coordinates: the base-station aperture lies in the yz-plane (x = 0) and is
//! centred at the origin. `y` is horizontal, `z` vertical, `x` points towards
//! the served area.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Absolute slack (metres) used by [`check_feasible`] for every comparison.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Position3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// A point on the aperture plane.
    pub fn yz(y: T, z: T) -> Self {
        Self { x: T::zero(), y, z }
    }

    pub fn dot(&self, k: &[T; 3]) -> T {
        self.x * k[0] + self.y * k[1] + self.z * k[2]
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn translated(&self, t: &Self) -> Self {
        Self { x: self.x + t.x, y: self.y + t.y, z: self.z + t.z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// The M antenna positions of the array together with the carrier wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout<T> {
    positions: Vec<Position3<T>>,
    wavelength: T,
}

impl<T: Real> ArrayLayout<T> {
    pub fn new(positions: Vec<Position3<T>>, wavelength: T) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("layout needs at least one antenna"));
        }
        if !(wavelength > T::zero() && wavelength.is_finite()) {
            return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        if let Some(m) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("antenna {m} has a non-finite coordinate")));
        }
        Ok(Self { positions, wavelength })
    }

    pub fn positions(&self) -> &[Position3<T>] {
        &self.positions
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn translated(&self, t: &Position3<T>) -> Self {
        Self { positions: self.positions.iter().map(|p| p.translated(t)).collect(), wavelength: self.wavelength }
    }

    pub fn centroid(&self) -> Position3<T> {
        let n = T::from_usize_lossy(self.len());
        let sum = self.positions.iter().fold(Position3::default(), |acc: Position3<T>, p| acc.translated(p));
        Position3::new(sum.x / n, sum.y / n, sum.z / n)
    }

    /// Smallest pairwise distance, `+inf` for a single antenna.
    pub fn min_pairwise_distance(&self) -> T {
        let mut best = T::infinity();
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                best = best.min(a.distance(b));
            }
        }
        best
    }
}

/// Square of side `side` in the yz-plane, centred at `(0, center_y, center_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovementRegion<T> {
    pub center_y: T,
    pub center_z: T,
    pub side: T,
}

impl<T: Real> MovementRegion<T> {
    pub fn new(center_y: T, center_z: T, side: T) -> Result<Self> {
        if !(side > T::zero()) {
            return Err(Error::invalid(format!("region side must be positive, got {side}")));
        }
        Ok(Self { center_y, center_z, side })
    }

    pub fn half_side(&self) -> T {
        self.side / T::lit(2.0)
    }

    pub fn center(&self) -> Position3<T> {
        Position3::yz(self.center_y, self.center_z)
    }

    /// How far `p` lies outside the region (0 when inside), using the max-norm.
    pub fn excess(&self, p: &Position3<T>) -> T {
        let h = self.half_side();
        let dy = (p.y - self.center_y).abs() - h;
        let dz = (p.z - self.center_z).abs() - h;
        p.x.abs().max(dy).max(dz).max(T::zero())
    }

    pub fn contains(&self, p: &Position3<T>) -> bool {
        self.excess(p) <= T::lit(FEASIBILITY_TOL)
    }

    /// Nearest point of the region.
    pub fn clamp(&self, p: &Position3<T>) -> Position3<T> {
        let h = self.half_side();
        Position3::yz(
            p.y.max(self.center_y - h).min(self.center_y + h),
            p.z.max(self.center_z - h).min(self.center_z + h),
        )
    }

    fn overlaps(&self, other: &Self) -> bool {
        let reach = self.half_side() + other.half_side();
        let tol = T::lit(FEASIBILITY_TOL);
        (self.center_y - other.center_y).abs() < reach - tol && (self.center_z - other.center_z).abs() < reach - tol
    }
}

/// One movement region per antenna; antenna m is bound to region m.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid<T> {
    regions: Vec<MovementRegion<T>>,
}

impl<T: Real> RegionGrid<T> {
    pub fn new(regions: Vec<MovementRegion<T>>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid("region grid needs at least one region"));
        }
        for a in 0..regions.len() {
            for b in (a + 1)..regions.len() {
                if regions[a].overlaps(&regions[b]) {
                    return Err(Error::Overlap { a, b });
                }
            }
        }
        Ok(Self { regions })
    }

    pub fn regions(&self) -> &[MovementRegion<T>] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Region centres as a layout (always inside the grid).
    pub fn centers(&self, wavelength: T) -> Result<ArrayLayout<T>> {
        ArrayLayout::new(self.regions.iter().map(MovementRegion::center).collect(), wavelength)
    }

    /// Bounding box `(y_min, y_max, z_min, z_max)` of the union of regions.
    pub fn extent(&self) -> (T, T, T, T) {
        let mut e = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
        for r in &self.regions {
            let h = r.half_side();
            e.0 = e.0.min(r.center_y - h);
            e.1 = e.1.max(r.center_y + h);
            e.2 = e.2.min(r.center_z - h);
            e.3 = e.3.max(r.center_z + h);
        }
        e
    }
}

/// Wave vector `(2π/λ)(cosφ cosθ, sinφ cosθ, sinθ)` for azimuth φ and elevation θ.
pub fn wave_vector<T: Real>(azimuth: T, elevation: T, wavelength: T) -> Result<[T; 3]> {
    if !(wavelength > T::zero()) {
        return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    let k = T::TAU() / wavelength;
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    Ok([k * ca * ce, k * sa * ce, k * se])
}

/// Array response `exp(j pₘᵀk)` for a given wave vector.
pub fn response_for_wave_vector<T: Real>(layout: &ArrayLayout<T>, k: &[T; 3]) -> Vec<Complex<T>> {
    layout.positions().iter().map(|p| Complex::from_polar(T::one(), p.dot(k))).collect()
}

/// Unit-modulus response of the array to a plane wave arriving from (φ, θ).
pub fn array_response<T: Real>(layout: &ArrayLayout<T>, azimuth: T, elevation: T) -> Vec<Complex<T>> {
    let k = wave_vector(azimuth, elevation, layout.wavelength()).expect("layout wavelength is positive");
    response_for_wave_vector(layout, &k)
}

fn square_side(m: usize) -> Result<usize> {
    let n = (m as f64).sqrt().round() as usize;
    if m == 0 || n * n != m {
        return Err(Error::invalid(format!("{m} antennas do not form a square grid")));
    }
    Ok(n)
}

/// Row-major planar grid: row 0 at the top (largest z), column 0 at the left (smallest y).
fn planar_grid<T: Real>(n: usize, dy: T, dz: T) -> Vec<Position3<T>> {
    let mid = T::from_usize_lossy(n - 1) / T::lit(2.0);
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let y = (T::from_usize_lossy(col) - mid) * dy;
            let z = (mid - T::from_usize_lossy(row)) * dz;
            out.push(Position3::yz(y, z));
        }
    }
    out
}

/// √M × √M uniform planar array with λ/2 spacing, centred at the origin.
pub fn make_compact_upa<T: Real>(m: usize, wavelength: T) -> Result<ArrayLayout<T>> {
    let n = square_side(m)?;
    let d = wavelength / T::lit(2.0);
    ArrayLayout::new(planar_grid(n, d, d), wavelength)
}

/// √M × √M uniform planar array spanning the whole aperture edge-to-edge.
pub fn make_sparse_upa<T: Real>(m: usize, width: T, height: T, wavelength: T) -> Result<ArrayLayout<T>> {
    let n = square_side(m)?;
    if !(width > T::zero() && height > T::zero()) {
        return Err(Error::invalid("aperture dimensions must be positive"));
    }
    let gaps = T::from_usize_lossy(n.saturating_sub(1).max(1));
    ArrayLayout::new(planar_grid(n, width / gaps, height / gaps), wavelength)
}

/// Horizontal uniform linear array at z = 0 spanning the aperture width.
pub fn make_sparse_ula<T: Real>(m: usize, width: T, wavelength: T) -> Result<ArrayLayout<T>> {
    if m < 2 {
        return Err(Error::invalid(format!("a linear array needs at least 2 antennas, got {m}")));
    }
    if !(width > T::zero()) {
        return Err(Error::invalid("aperture width must be positive"));
    }
    let step = width / T::from_usize_lossy(m - 1);
    let left = -width / T::lit(2.0);
    let positions = (0..m).map(|i| Position3::yz(left + T::from_usize_lossy(i) * step, T::zero())).collect();
    ArrayLayout::new(positions, wavelength)
}

/// `rows x cols` square regions of side `side`, centres spaced by `pitch`, grid centred at the origin.
///
/// Region order matches [`make_sparse_upa`]: row-major, top row first.
pub fn make_region_grid<T: Real>(rows: usize, cols: usize, side: T, pitch: T) -> Result<RegionGrid<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("region grid needs at least one row and column"));
    }
    if !(side > T::zero()) {
        return Err(Error::invalid("region side must be positive"));
    }
    if pitch < side - T::lit(FEASIBILITY_TOL) && rows * cols > 1 {
        return Err(Error::Overlap { a: 0, b: if cols > 1 { 1 } else { cols } });
    }
    let mid_r = T::from_usize_lossy(rows - 1) / T::lit(2.0);
    let mid_c = T::from_usize_lossy(cols - 1) / T::lit(2.0);
    let mut regions = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let y = (T::from_usize_lossy(c) - mid_c) * pitch;
            let z = (mid_r - T::from_usize_lossy(r)) * pitch;
            regions.push(MovementRegion::new(y, z, side)?);
        }
    }
    RegionGrid::new(regions)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation<T> {
    /// Antenna lies outside its region by `excess` metres (max-norm).
    OutsideRegion { antenna: usize, excess: T },
    /// Two antennas are closer than λ/2.
    TooClose { a: usize, b: usize, distance: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> FeasibilityReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn spacing_violations<T: Real>(layout: &ArrayLayout<T>, out: &mut Vec<Violation<T>>) {
    let min_gap = layout.wavelength() / T::lit(2.0) - T::lit(FEASIBILITY_TOL);
    let p = layout.positions();
    for a in 0..p.len() {
        for b in (a + 1)..p.len() {
            let distance = p[a].distance(&p[b]);
            if distance < min_gap {
                out.push(Violation::TooClose { a, b, distance });
            }
        }
    }
}

/// Region containment plus λ/2 spacing, each with [`FEASIBILITY_TOL`] slack.
pub fn check_feasible<T: Real>(layout: &ArrayLayout<T>, grid: &RegionGrid<T>) -> Result<FeasibilityReport<T>> {
    if layout.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!("{} antennas but {} regions", layout.len(), grid.len())));
    }
    let mut violations = Vec::new();
    for (antenna, (p, region)) in layout.positions().iter().zip(grid.regions()).enumerate() {
        let excess = region.excess(p);
        if excess > T::lit(FEASIBILITY_TOL) {
            violations.push(Violation::OutsideRegion { antenna, excess });
        }
    }
    spacing_violations(layout, &mut violations);
    Ok(FeasibilityReport { violations })
}

/// Only the λ/2 spacing constraint (for fixed arrays with no region grid).
pub fn check_spacing<T: Real>(layout: &ArrayLayout<T>) -> FeasibilityReport<T> {
    let mut violations = Vec::new();
    spacing_violations(layout, &mut violations);
    FeasibilityReport { violations }
}

/// Writes the layout as comma-separated text: a `# wavelength_m=` line, a header,
/// then one `index,x,y,z` row per antenna.
pub fn write_layout<T: Real, W: Write>(layout: &ArrayLayout<T>, mut w: W) -> Result<()> {
    w.write_all(format_layout(layout).as_bytes())?;
    Ok(())
}

pub fn format_layout<T: Real>(layout: &ArrayLayout<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# wavelength_m={}", layout.wavelength());
    s.push_str("index,x_m,y_m,z_m\n");
    for (i, p) in layout.positions().iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{}", p.x, p.y, p.z);
    }
    s
}

pub fn read_layout<T: Real, R: BufRead>(r: R) -> Result<ArrayLayout<T>> {
    let mut wavelength = None;
    let mut positions = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("wavelength_m=") {
                wavelength = Some(parse_field::<T>(v, lineno)?);
            }
            continue;
        }
        if t.starts_with("index") {
            continue;
        }
        let fields: Vec<&str> = t.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 4 fields, got {}", fields.len()) });
        }
        let idx: usize =
            fields[0].parse().map_err(|_| Error::Parse { line: lineno, msg: format!("bad index {:?}", fields[0]) })?;
        if idx != positions.len() {
            return Err(Error::Parse { line: lineno, msg: format!("index {idx} out of order") });
        }
        positions.push(Position3::new(
            parse_field(fields[1], lineno)?,
            parse_field(fields[2], lineno)?,
            parse_field(fields[3], lineno)?,
        ));
    }
    let wavelength = wavelength.ok_or(Error::Parse { line: 0, msg: "missing `# wavelength_m=` line".into() })?;
    ArrayLayout::new(positions, wavelength)
}

pub(crate) fn parse_field<T: Real>(s: &str, line: usize) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| Error::Parse { line, msg: format!("bad number {s:?}") })
}
