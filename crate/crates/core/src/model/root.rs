//! Bracketing scan and bisection for `mellin(s) = 1`.

/// Right end of the scan when the moment function has no finite domain edge.
pub(crate) const UNBOUNDED_SCAN_LIMIT: f64 = 64.0;

const INTERIOR_POINTS: usize = 8;

/// A point at which `g = mellin - 1` changes sign (or vanishes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Crossing {
    Exact(f64),
    Bracket { lo: f64, hi: f64, upward: bool },
}

/// Scan grid: `2^-6, 2^-5, ...` up to the domain edge (minus `1e-9`), with
/// evenly spaced interior points between consecutive powers of two.
pub(crate) fn scan_grid(domain_hi: Option<f64>) -> Vec<f64> {
    let edge = domain_hi.map_or(UNBOUNDED_SCAN_LIMIT, |h| h - 1e-9);
    let mut grid = Vec::new();
    let mut k = -6;
    let mut prev: Option<f64> = None;
    loop {
        let s = 2f64.powi(k).min(edge);
        if let Some(p) = prev {
            for j in 1..INTERIOR_POINTS {
                grid.push(p + (s - p) * j as f64 / INTERIOR_POINTS as f64);
            }
        }
        grid.push(s);
        if s >= edge {
            break;
        }
        prev = Some(s);
        k += 1;
    }
    grid
}

/// Sign changes of `g` along `grid`, in increasing order of `s`. Stops at the
/// first point where `g` cannot be evaluated.
pub(crate) fn find_crossings<F>(g: F, grid: &[f64]) -> Vec<Crossing>
where
    F: Fn(f64) -> Option<f64>,
{
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &s in grid {
        let Some(v) = g(s).filter(|v| !v.is_nan()) else {
            break;
        };
        if v == 0.0 {
            out.push(Crossing::Exact(s));
        } else if let Some((ps, pv)) = prev {
            if pv != 0.0 && (pv < 0.0) != (v < 0.0) {
                out.push(Crossing::Bracket {
                    lo: ps,
                    hi: s,
                    upward: pv < 0.0,
                });
            }
        }
        prev = Some((s, v));
    }
    out
}

/// Bisection on a bracket with `g(lo)` and `g(hi)` of opposite sign. Uses a
/// secant step while both ends are finite and the step stays inside the
/// bracket; falls back to halving otherwise.
pub(crate) fn bisect<F>(g: F, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut glo = g(lo);
    let mut ghi = g(hi);
    for iter in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        // alternate secant and bisection so the bracket always shrinks
        let x = if iter % 2 == 0 && glo.is_finite() && ghi.is_finite() {
            let sec = lo - glo * (hi - lo) / (ghi - glo);
            if sec > lo && sec < hi {
                sec
            } else {
                mid
            }
        } else {
            mid
        };
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx < 0.0) == (glo < 0.0) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
            ghi = gx;
        }
    }
    if glo.abs() <= ghi.abs() {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_respects_edge() {
        let g = scan_grid(Some(5.0));
        assert!((g[0] - 1.0 / 64.0).abs() < 1e-15);
        assert!(*g.last().unwrap() < 5.0);
        assert!(*g.last().unwrap() > 5.0 - 1e-8);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let u = scan_grid(None);
        assert_eq!(*u.last().unwrap(), UNBOUNDED_SCAN_LIMIT);
    }

    #[test]
    fn finds_both_crossings_of_a_u_shape() {
        let g = |s: f64| Some((s - 1.0) * (s - 3.2));
        let c = find_crossings(g, &scan_grid(Some(10.0)));
        assert_eq!(c.len(), 2);
        assert!(matches!(c[0], Crossing::Exact(s) if s == 1.0));
        match c[1] {
            Crossing::Bracket { lo, hi, upward } => {
                assert!(upward && lo < 3.2 && hi > 3.2);
                let r = bisect(|s| (s - 1.0) * (s - 3.2), lo, hi);
                assert!((r - 3.2).abs() < 1e-13);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bisect_handles_infinite_end() {
        let g = |s: f64| if s >= 2.0 { f64::INFINITY } else { s - 1.5 };
        let r = bisect(g, 1.0, 2.0);
        assert!((r - 1.5).abs() < 1e-13);
    }
}
