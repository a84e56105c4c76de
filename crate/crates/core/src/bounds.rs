//! Closed-form reference quantities: the Euclidean/graph distance sandwich,
//! query-complexity curves, seed-set exponents and the four-seed packing
//! constants. All logarithms are natural.

use std::io::Write;

use rand::Rng;

use crate::error::{param, Result};
use crate::graph::{GeometricGraph, Topology};
use crate::rng::rng_from_seed;

/// Exponent `k` where the two complexity regimes meet.
pub const REGIME_BOUNDARY_K: f64 = 3.0 / 20.0;

/// Default constant of the distance sandwich.
pub const DEFAULT_C: f64 = 1.0;

/// Default dense-regime multiplier: `r >= C1 * sqrt(ln n)`.
pub const DEFAULT_C1: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub r: f64,
    pub c: f64,
}

impl BoundParams {
    pub fn new(n: usize, r: f64, c: f64) -> Result<Self> {
        if n == 0 {
            return param("n must be at least 1");
        }
        if !(r.is_finite() && r > 0.0) {
            return param(format!("radius must be positive, got {r}"));
        }
        if !(c.is_finite() && c > 0.0) {
            return param(format!("c must be positive, got {c}"));
        }
        Ok(Self { n, r, c })
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// `c (dE / r^{4/3} + ln n / r^{1/3})`.
    pub fn kappa(&self, de: f64) -> f64 {
        kappa_with(self.c, self.r, self.ln_n(), de)
    }

    /// Smallest Euclidean distance compatible with graph distance `t`,
    /// clamped at zero; `ell_n(0) = 0`.
    pub fn ell_n(&self, t: u32) -> f64 {
        if t == 0 {
            return 0.0;
        }
        let r43 = self.r.powf(4.0 / 3.0);
        let v = self.r * (t as f64 * r43 - self.c * self.ln_n()) / (self.c + r43);
        v.max(0.0)
    }

    /// Largest Euclidean distance compatible with graph distance `t`.
    pub fn u_n(&self, t: u32) -> f64 {
        self.r * (t as f64 + 1.0)
    }

    /// `w_n(t_max) = c d / r^{4/3} + r + c ln n / r^{1/3}`.
    pub fn w_n_tmax(&self, d: f64) -> f64 {
        self.c * d / self.r.powf(4.0 / 3.0) + self.r + self.c * self.ln_n() / self.r.powf(1.0 / 3.0)
    }

    /// Largest graph distance for a node within Euclidean distance `d`.
    pub fn t_max(&self, d: f64) -> f64 {
        d * (self.c + self.r.powf(4.0 / 3.0)) / self.r.powf(7.0 / 3.0)
            + self.c * self.ln_n() / self.r.powf(4.0 / 3.0)
    }

    /// Euclidean range beyond which every pair is distinguished:
    /// `2 w_n(t_max) ln n + r`.
    pub fn second_phase_radius(&self, d: f64) -> f64 {
        2.0 * self.w_n_tmax(d) * self.ln_n() + self.r
    }
}

fn kappa_with(c: f64, r: f64, ln_n: f64, de: f64) -> f64 {
    c * (de / r.powf(4.0 / 3.0) + ln_n / r.powf(1.0 / 3.0))
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k < 0.5) {
        return param(format!("k must lie in (0, 1/2), got {k}"));
    }
    Ok(())
}

/// Exponent of the query-complexity bound for `r ~ n^k`.
pub fn complexity_exponent(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(if k <= REGIME_BOUNDARY_K {
        1.5 - 4.0 * k / 3.0
    } else {
        2.0 * k + 1.0
    })
}

/// Theoretical query count up to constants and polylog factors.
pub fn complexity_curve(n: usize, k: f64) -> Result<f64> {
    Ok((n as f64).powf(complexity_exponent(k)?))
}

/// Seed-distance exponent `a` and seed-count exponent `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedExponents {
    pub a: f64,
    pub eps: f64,
}

/// Exponents for `r ~ n^k`, or the sparse-regime values `(1/4, 1/2)` when `k`
/// is `None`.
pub fn seed_exponents(k: Option<f64>) -> Result<SeedExponents> {
    let Some(k) = k else {
        return Ok(SeedExponents { a: 0.25, eps: 0.5 });
    };
    check_k(k)?;
    Ok(if k < REGIME_BOUNDARY_K {
        SeedExponents {
            a: 0.25 + 2.0 * k / 3.0,
            eps: 0.5 - 4.0 * k / 3.0,
        }
    } else {
        SeedExponents {
            a: 5.0 / 12.0 - 4.0 * k / 9.0,
            eps: 1.0 / 12.0 + 13.0 * k / 9.0,
        }
    })
}

/// Expected seed-set size `ln(n) n^eps`.
pub fn expected_seed_count(n: usize, eps: f64) -> f64 {
    let n = n as f64;
    n.ln() * n.powf(eps)
}

/// `max(4, round(ln(n) n^eps))`, capped at `n`.
pub fn seed_count(n: usize, eps: f64) -> usize {
    (expected_seed_count(n, eps).round() as usize).max(4).min(n)
}

/// Minimum pairwise distance of the four-seed torus packing for `n` nodes.
pub fn x_n(n: usize) -> f64 {
    (6f64.sqrt() - 2f64.sqrt()) / 2.0 * (n as f64).sqrt()
}

/// Asymptotic fraction of node pairs distinguished by four optimally placed
/// seeds: `pi (16 - 8 sqrt3 - 7 pi + 4 sqrt3 pi) / 8`.
pub fn nonedge_constant() -> f64 {
    use std::f64::consts::PI;
    let s3 = 3f64.sqrt();
    PI * (16.0 - 8.0 * s3 - 7.0 * PI + 4.0 * s3 * PI) / 8.0
}

/// Nodes that must be closer (in hops) than `t` to `seed`, and nodes that
/// must be farther than `t + 1`, judged from Euclidean distance alone.
pub fn lower_bound_sets(
    g: &GeometricGraph,
    p: &BoundParams,
    seed: usize,
    t: u32,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let pts = g.point_set().points();
    if seed >= pts.len() {
        return param(format!("seed {seed} out of range"));
    }
    let domain = g.domain();
    let lower = p.ell_n(t);
    let upper = p.u_n(t + 1);
    let mut l_set = Vec::new();
    let mut u_set = Vec::new();
    for (v, &pt) in pts.iter().enumerate() {
        let de = domain.distance_unchecked(pt, pts[seed]);
        if de < lower {
            l_set.push(v);
        }
        if de > upper {
            u_set.push(v);
        }
    }
    Ok((l_set, u_set))
}

/// Outcome of checking the distance sandwich on sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub pairs_checked: usize,
    /// Pairs with `floor(dE / r) > dG`.
    pub lower_violations: usize,
    /// Pairs with `dG > ceil((dE + kappa) / r)` at the given `c`.
    pub upper_violations: usize,
    /// Supremum of the `c` values for which some sampled pair still violates
    /// the upper bound; any larger `c` satisfies all sampled pairs.
    pub min_sufficient_c: f64,
}

/// Checks the graph/Euclidean distance sandwich on `sources * per_source`
/// random pairs of a connected geometric graph.
pub fn check_distance_sandwich(
    g: &GeometricGraph,
    c: f64,
    sources: usize,
    per_source: usize,
    rng_seed: u64,
) -> Result<SandwichReport> {
    let n = g.node_count();
    if n == 0 {
        return param("empty graph");
    }
    let p = BoundParams::new(n, g.radius(), c)?;
    let r = p.r;
    let ln_n = p.ln_n();
    let pts = g.point_set().points();
    let domain = g.domain();
    let mut rng = rng_from_seed(rng_seed);
    let mut report = SandwichReport {
        pairs_checked: 0,
        lower_violations: 0,
        upper_violations: 0,
        min_sufficient_c: 0.0,
    };
    for _ in 0..sources {
        let s = rng.random_range(0..n);
        let row = g.adjacency().bfs(s)?;
        for _ in 0..per_source {
            let v = rng.random_range(0..n);
            let Some(dg) = row.get(v) else {
                return Err(crate::error::Error::Disconnected(
                    "sandwich check needs a connected graph".into(),
                ));
            };
            let de = domain.distance_unchecked(pts[s], pts[v]);
            report.pairs_checked += 1;
            if (de / r).floor() > dg as f64 {
                report.lower_violations += 1;
            }
            let upper = ((de + kappa_with(c, r, ln_n, de)) / r).ceil();
            if dg as f64 > upper {
                report.upper_violations += 1;
            }
            // ceil(x) >= dG  <=>  x > dG - 1.
            let unit = kappa_with(1.0, r, ln_n, de);
            if unit > 0.0 {
                let needed = (r * (dg as f64 - 1.0) - de) / unit;
                report.min_sufficient_c = report.min_sufficient_c.max(needed);
            }
        }
    }
    Ok(report)
}

/// Writes `(n, k, curve_value)` rows as CSV.
pub fn write_reference_curve<W: Write>(w: W, n_values: &[usize], ks: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "k", "curve_value"])?;
    for &k in ks {
        for &n in n_values {
            let v = complexity_curve(n, k)?;
            out.write_record([n.to_string(), k.to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(BoundParams::new(1, 3.0, 1.0).unwrap().kappa(0.0), 0.0);
        // n = e, c = 1, r = 1, dE = 1 -> 2. n must be an integer, so check the
        // formula through the helper.
        assert!(close(kappa_with(1.0, 1.0, E.ln(), 1.0), 2.0, 1e-12));
        assert!(close(kappa_with(1.0, 8.0, 4.0, 16.0), 3.0, 1e-12));
    }

    #[test]
    fn sandwich_bounds() {
        let p = BoundParams::new(1000, 3.0, 1.0).unwrap();
        assert_eq!(p.u_n(1), 6.0);
        assert_eq!(p.ell_n(0), 0.0);
        // t r^{4/3} < c ln n for t = 1: 4.33 < 6.91.
        assert_eq!(p.ell_n(1), 0.0);
        for n in [10usize, 1000, 100_000] {
            for r in [0.5, 1.0, 3.0, 12.0, 40.0] {
                for c in [0.1, 1.0, 5.0] {
                    let p = BoundParams::new(n, r, c).unwrap();
                    for t in 1..=10_000 {
                        assert!(p.ell_n(t) < p.u_n(t));
                    }
                }
            }
        }
    }

    #[test]
    fn w_and_tmax() {
        let p = BoundParams::new(3, 1.0, 1.0).unwrap();
        // ln 3 replaces ln e here.
        assert!(close(p.w_n_tmax(1.0), 2.0 + 3f64.ln(), 1e-12));
        let tiny = BoundParams::new(500, 4.0, 1e-12).unwrap();
        assert!(close(tiny.w_n_tmax(10.0), 4.0, 1e-9));
        assert!(close(tiny.t_max(10.0), 2.5, 1e-9));
        for n in [2usize, 100, 10_000] {
            for r in [0.3, 2.0, 20.0] {
                for d in [0.1, 5.0, 500.0] {
                    let p = BoundParams::new(n, r, 1.0).unwrap();
                    assert!(p.second_phase_radius(d) >= r);
                }
            }
        }
    }

    #[test]
    fn complexity_curve_regimes() {
        let n = 12_345;
        let b = complexity_curve(n, REGIME_BOUNDARY_K).unwrap();
        assert!(close(b, (n as f64).powf(1.3), 1e-12));
        assert!(close(complexity_exponent(0.3).unwrap(), 1.6, 1e-12));
        assert!(close(complexity_exponent(0.1).unwrap(), 1.5 - 2.0 / 15.0, 1e-12));
        let lo = complexity_exponent(REGIME_BOUNDARY_K).unwrap();
        let hi = complexity_exponent(REGIME_BOUNDARY_K + 1e-12).unwrap();
        assert!((lo - hi).abs() < 1e-9);
        for k in [0.0, 0.5, -0.1, 0.7] {
            assert!(complexity_curve(100, k).is_err());
        }
    }

    #[test]
    fn seed_exponent_regimes() {
        let e = seed_exponents(Some(0.3)).unwrap();
        assert!(close(e.eps, 1.0 / 12.0 + 13.0 * 0.3 / 9.0, 1e-12));
        assert!((e.eps - 0.5167).abs() < 1e-4);
        let below = SeedExponents {
            a: 0.25 + 2.0 * REGIME_BOUNDARY_K / 3.0,
            eps: 0.5 - 4.0 * REGIME_BOUNDARY_K / 3.0,
        };
        let at = seed_exponents(Some(REGIME_BOUNDARY_K)).unwrap();
        assert!(close(at.eps, 0.3, 1e-12) && close(below.eps, 0.3, 1e-12));
        assert!(close(at.a, below.a, 1e-12));
        assert!(close(2.0 * at.a + at.eps, 1.0, 1e-12));
        let small = seed_exponents(Some(1e-9)).unwrap();
        assert!(close(small.a, 0.25, 1e-6) && close(small.eps, 0.5, 1e-6));
        assert_eq!(seed_exponents(None).unwrap(), SeedExponents { a: 0.25, eps: 0.5 });
        assert!(seed_exponents(Some(0.5)).is_err());
    }

    #[test]
    fn fig6_seed_count() {
        let e = seed_exponents(Some(0.3)).unwrap();
        assert_eq!(seed_count(2000, e.eps), 386);
        assert_eq!(seed_count(10, 0.0), 4);
    }

    #[test]
    fn packing_constants() {
        assert!(close(x_n(1), 0.517_638_090_205_041_5, 1e-12));
        assert!((nonedge_constant() - 0.753).abs() < 0.001);
    }

    #[test]
    fn reference_curve_csv() {
        let mut buf = Vec::new();
        write_reference_curve(&mut buf, &[100, 1000], &[0.3]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,k,curve_value");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1000,0.3,"));
    }
}
