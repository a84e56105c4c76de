//! Point processes on a square window, with either torus or hard-wall boundary.
//!
//! A unit-intensity Poisson point process on `[0, L)^2` with `L = sqrt(n)` has
//! `n` points in expectation, which is the model the rest of the crate builds on.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{param, Error, Result};
use crate::rng::rng_from_seed;

/// Boundary condition of the square window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Opposite sides identified; distances wrap per axis.
    Torus,
    /// Plain Euclidean square.
    Square,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Torus => "torus",
            Boundary::Square => "square",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "torus" => Ok(Boundary::Torus),
            "square" => Ok(Boundary::Square),
            other => param(format!("unknown boundary '{other}' (expected torus|square)")),
        }
    }
}

/// A square window `[0, side)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    side: f64,
    boundary: Boundary,
}

impl Domain {
    /// A window of the given side length. A zero side is accepted and yields a
    /// window that can hold no points.
    pub fn new(side: f64, boundary: Boundary) -> Result<Self> {
        if !side.is_finite() || side < 0.0 {
            return param(format!("domain side must be finite and >= 0, got {side}"));
        }
        Ok(Self { side, boundary })
    }

    /// The window of side `sqrt(n)`, whose unit-intensity process has mean `n` points.
    pub fn for_nodes(n: usize, boundary: Boundary) -> Result<Self> {
        Self::new((n as f64).sqrt(), boundary)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.side).contains(&p.x) && (0.0..self.side).contains(&p.y)
    }

    /// Distance between two points of this window, validating both.
    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        for pt in [p, q] {
            if !self.contains(pt) {
                return param(format!(
                    "point ({}, {}) lies outside [0, {})^2",
                    pt.x, pt.y, self.side
                ));
            }
        }
        Ok(self.distance_unchecked(p, q))
    }

    /// Distance without the containment check. On the torus each axis uses
    /// `min(|d|, side - |d|)`.
    #[inline]
    pub fn distance_unchecked(&self, p: Point, q: Point) -> f64 {
        let (dx, dy) = self.axis_deltas(p, q);
        dx.hypot(dy)
    }

    #[inline]
    pub(crate) fn distance_sq_unchecked(&self, p: Point, q: Point) -> f64 {
        let (dx, dy) = self.axis_deltas(p, q);
        dx * dx + dy * dy
    }

    #[inline]
    fn axis_deltas(&self, p: Point, q: Point) -> (f64, f64) {
        let mut dx = (p.x - q.x).abs();
        let mut dy = (p.y - q.y).abs();
        if self.boundary == Boundary::Torus {
            dx = dx.min(self.side - dx);
            dy = dy.min(self.side - dy);
        }
        (dx, dy)
    }

    /// Reduces a coordinate into `[0, side)`.
    pub fn wrap(&self, c: f64) -> f64 {
        let w = c.rem_euclid(self.side);
        if w >= self.side {
            0.0
        } else {
            w
        }
    }

    /// The four locations that maximize the minimum pairwise toroidal
    /// distance, scaled to this window.
    ///
    /// The minimum pairwise distance equals [`crate::bounds::x_n`] for
    /// `n = side^2`. Only defined on the torus.
    pub fn optimal_seed_locations(&self) -> Result<[Point; 4]> {
        if self.boundary != Boundary::Torus {
            return Err(Error::Unsupported(
                "optimal seed locations are only defined on the torus".into(),
            ));
        }
        let l = self.side;
        let s3 = 3f64.sqrt();
        // Unit-torus packing: (0,0), (1/2, 1 - sqrt3/2), ((sqrt3-2)/2, 1/2) and
        // the sum of the last two, ((sqrt3-1)/2, (3-sqrt3)/2).
        let raw = [
            (0.0, 0.0),
            (0.5 * l, 0.5 * l * (7.0 - 4.0 * s3).sqrt()),
            (0.5 * l * (s3 - 2.0), 0.5 * l),
            (0.5 * l * (s3 - 1.0), 0.5 * (3.0 * l * l).sqrt() * (s3 - 1.0)),
        ];
        Ok(raw.map(|(x, y)| Point::new(self.wrap(x), self.wrap(y))))
    }
}

/// A location in the window.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A realization of a point process together with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    domain: Domain,
    rng_seed: u64,
}

impl PointSet {
    /// Wraps explicit points, checking they lie in the window.
    pub fn from_points(points: Vec<Point>, domain: Domain, rng_seed: u64) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !domain.contains(**p)) {
            return param(format!(
                "point ({}, {}) lies outside [0, {})^2",
                p.x,
                p.y,
                domain.side()
            ));
        }
        Ok(Self {
            points,
            domain,
            rng_seed,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The same coordinates under another boundary condition.
    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self {
            points: self.points.clone(),
            domain: Domain {
                side: self.domain.side,
                boundary,
            },
            rng_seed: self.rng_seed,
        }
    }

    /// Writes the plain-text coordinate format: a `# side=.. boundary=.. seed=..`
    /// header followed by one `x y` pair per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# side={} boundary={} seed={}",
            self.domain.side, self.domain.boundary, self.rng_seed
        )?;
        for p in &self.points {
            writeln!(w, "{} {}", p.x, p.y)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "coordinate file",
            detail,
        };
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("missing header".into()))??;
        let fields = parse_header(&header, "coordinate file")?;
        let get = |key: &str| {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| bad(format!("header lacks '{key}'")))
        };
        let side: f64 = get("side")?
            .parse()
            .map_err(|e| bad(format!("side: {e}")))?;
        let boundary: Boundary = get("boundary")?.parse()?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|e| bad(format!("seed: {e}")))?;
        let domain = Domain::new(side, boundary)?;

        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut coord = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| bad(format!("line {}: expected 'x y'", i + 2)))?
                    .parse()
                    .map_err(|e| bad(format!("line {}: {e}", i + 2)))
            };
            let (x, y) = (coord()?, coord()?);
            points.push(Point::new(x, y));
        }
        Self::from_points(points, domain, seed)
    }
}

/// Parses a `# key=value key=value` header line.
pub(crate) fn parse_header(line: &str, what: &'static str) -> Result<Vec<(String, String)>> {
    let body = line.trim().strip_prefix('#').ok_or_else(|| Error::Parse {
        what,
        detail: format!("header must start with '#', got '{line}'"),
    })?;
    body.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse {
                    what,
                    detail: format!("malformed header field '{kv}'"),
                })
        })
        .collect()
}

/// Samples a homogeneous Poisson point process on the window.
///
/// The point count is drawn from `Poisson(intensity * side^2)` and the points
/// are then placed independently and uniformly.
pub fn sample_ppp(domain: Domain, intensity: f64, rng_seed: u64) -> Result<PointSet> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return param(format!("intensity must be positive, got {intensity}"));
    }
    let mean = intensity * domain.area();
    if mean == 0.0 {
        return PointSet::from_points(Vec::new(), domain, rng_seed);
    }
    let mut rng = rng_from_seed(rng_seed);
    let count = Poisson::new(mean)
        .map_err(|e| Error::Parameter(format!("poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    let side = domain.side();
    let coord = |rng: &mut crate::rng::SimRng| {
        let c = rng.random::<f64>() * side;
        if c < side {
            c
        } else {
            side.next_down()
        }
    };
    let points = (0..count)
        .map(|_| {
            let x = coord(&mut rng);
            let y = coord(&mut rng);
            Point::new(x, y)
        })
        .collect();
    Ok(PointSet {
        points,
        domain,
        rng_seed,
    })
}

/// Independent thinning: keeps each index with probability `keep_probability`.
pub fn thin(ps: &PointSet, keep_probability: f64, rng_seed: u64) -> Result<Vec<usize>> {
    bernoulli_subset(ps.len(), keep_probability, rng_seed)
}

pub(crate) fn bernoulli_subset(n: usize, keep_probability: f64, rng_seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&keep_probability) {
        return param(format!(
            "keep probability must lie in [0, 1], got {keep_probability}"
        ));
    }
    let mut rng = rng_from_seed(rng_seed);
    Ok((0..n)
        .filter(|_| rng.random::<f64>() < keep_probability)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(side: f64) -> Domain {
        Domain::new(side, Boundary::Torus).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = Point::new(0.5, 5.0);
        let q = Point::new(9.5, 5.0);
        assert_eq!(torus(10.0).distance(p, p).unwrap(), 0.0);
        assert!((torus(10.0).distance(p, q).unwrap() - 1.0).abs() < 1e-12);
        let sq = Domain::new(10.0, Boundary::Square).unwrap();
        assert!((sq.distance(p, q).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn distance_rejects_outside_points() {
        let d = torus(10.0);
        assert!(matches!(
            d.distance(Point::new(10.0, 1.0), Point::new(1.0, 1.0)),
            Err(Error::Parameter(_))
        ));
        assert!(d.distance(Point::new(-0.1, 1.0), Point::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn zero_side_gives_empty_set() {
        let d = torus(0.0);
        assert!(sample_ppp(d, 1.0, 3).unwrap().is_empty());
        assert!(sample_ppp(d, 25.0, 3).unwrap().is_empty());
    }

    #[test]
    fn invalid_parameters() {
        assert!(Domain::new(-1.0, Boundary::Torus).is_err());
        assert!(Domain::new(f64::NAN, Boundary::Torus).is_err());
        assert!(sample_ppp(torus(5.0), 0.0, 1).is_err());
        assert!(sample_ppp(torus(5.0), -2.0, 1).is_err());
        let ps = sample_ppp(torus(5.0), 1.0, 1).unwrap();
        assert!(thin(&ps, 1.5, 0).is_err());
        assert!(thin(&ps, -0.1, 0).is_err());
    }

    #[test]
    fn thinning_extremes() {
        let ps = sample_ppp(torus(20.0), 1.0, 11).unwrap();
        assert!(thin(&ps, 0.0, 5).unwrap().is_empty());
        assert_eq!(thin(&ps, 1.0, 5).unwrap(), (0..ps.len()).collect::<Vec<_>>());
    }

    #[test]
    fn ppp_points_inside_and_deterministic() {
        let d = torus(30.0);
        let a = sample_ppp(d, 1.0, 42).unwrap();
        let b = sample_ppp(d, 1.0, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| d.contains(*p)));
        assert_ne!(a, sample_ppp(d, 1.0, 43).unwrap());
    }

    #[test]
    fn ppp_mean_count_matches_area() {
        // Poisson(10_000) has sigma = 100; the mean of 10_000 draws has sigma 1,
        // far inside the +-300 band.
        let d = torus(100.0);
        let trials = 10_000u64;
        let total: usize = (0..trials)
            .map(|s| {
                let mut rng = rng_from_seed(crate::rng::derive_seed(99, &[s]));
                Poisson::new(d.area()).unwrap().sample(&mut rng) as usize
            })
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 10_000.0).abs() < 300.0, "mean {mean}");
        // Full sampling path on fewer repetitions.
        let full: usize = (0..200).map(|s| sample_ppp(d, 1.0, s).unwrap().len()).sum();
        let mean = full as f64 / 200.0;
        assert!((mean - 10_000.0).abs() < 300.0, "mean {mean}");
    }

    #[test]
    fn thinning_mean_is_binomial() {
        let n = 10_000;
        let reps = 1_000u64;
        let kept: usize = (0..reps)
            .map(|s| bernoulli_subset(n, 0.1, s).unwrap().len())
            .sum();
        let mean = kept as f64 / reps as f64;
        // sd of a single draw is 30; of the mean ~0.95.
        assert!((mean - 1_000.0).abs() < 30.0, "mean {mean}");
    }

    #[test]
    fn optimal_locations_origin_and_in_window() {
        for n in [1usize, 4, 7, 100, 2000, 12345] {
            let d = Domain::for_nodes(n, Boundary::Torus).unwrap();
            let s = d.optimal_seed_locations().unwrap();
            assert_eq!(s[0], Point::new(0.0, 0.0));
            assert!(s.iter().all(|p| d.contains(*p)), "n={n}: {s:?}");
        }
    }

    #[test]
    fn optimal_locations_need_torus() {
        let d = Domain::new(3.0, Boundary::Square).unwrap();
        assert!(matches!(d.optimal_seed_locations(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn optimal_locations_n4_pairwise() {
        // (sqrt6 - sqrt2)/2 * 2
        let expected = (6f64.sqrt() - 2f64.sqrt()) / 2.0 * 2.0;
        assert!((expected - 1.035_276_180_410_083).abs() < 1e-12);
        let d = Domain::for_nodes(4, Boundary::Torus).unwrap();
        let s = d.optimal_seed_locations().unwrap();
        let mut min = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                let dist = d.distance(s[i], s[j]).unwrap();
                assert!(dist >= expected - 1e-9, "pair {i},{j}: {dist}");
                min = min.min(dist);
            }
        }
        assert!((min - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn coordinate_file_round_trip() {
        let ps = sample_ppp(Domain::new(7.5, Boundary::Square).unwrap(), 1.0, 8).unwrap();
        let mut buf = Vec::new();
        ps.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# side=7.5 boundary=square seed=8\n"));
        let back = PointSet::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ps);
    }

    #[test]
    fn coordinate_file_errors() {
        assert!(PointSet::read_from("side=1".as_bytes()).is_err());
        assert!(PointSet::read_from("# side=1 boundary=torus\n".as_bytes()).is_err());
        assert!(PointSet::read_from("# side=1 boundary=torus seed=1\n0.5\n".as_bytes()).is_err());
        assert!(PointSet::read_from("# side=1 boundary=torus seed=1\n1.5 0.5\n".as_bytes()).is_err());
    }
}
