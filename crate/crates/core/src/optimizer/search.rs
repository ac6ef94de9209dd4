//! Integer searches over unimodal functions of the lease duration.

use crate::error::Result;

/// Maximizer of a unimodal `f` on `[lo, hi]` by Fibonacci search.
///
/// Points past `hi` act as `-inf` and are never evaluated. Equal probe
/// values move the bracket toward lower `T`, so on a plateau some maximizer
/// is returned, not necessarily the first.
pub fn fibonacci_argmax<F>(lo: u64, hi: u64, mut f: F) -> Result<(u64, f64)>
where
    F: FnMut(u64) -> Result<f64>,
{
    assert!(1 <= lo && lo <= hi, "bad search range [{lo}, {hi}]");
    let n_points = hi - lo + 1;
    // fib[k] - 1 >= n_points: open bracket (left, left + fib[k]).
    let mut fib: Vec<u64> = vec![1, 1];
    while fib[fib.len() - 1] < n_points + 1 {
        let k = fib.len();
        fib.push(fib[k - 1] + fib[k - 2]);
    }
    let mut k = fib.len() - 1;
    let left0 = lo - 1;
    let mut left = left0;
    let mut eval = |t: u64| -> Result<f64> {
        if t > hi {
            Ok(f64::NEG_INFINITY)
        } else {
            f(t)
        }
    };
    if k >= 4 {
        let mut x1 = left + fib[k - 2];
        let mut x2 = left + fib[k - 1];
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        while k >= 4 {
            if f1 >= f2 {
                k -= 1;
                x2 = x1;
                f2 = f1;
                x1 = left + fib[k - 2];
                if k >= 4 {
                    f1 = eval(x1)?;
                }
            } else {
                left = x1;
                k -= 1;
                x1 = x2;
                f1 = f2;
                x2 = left + fib[k - 1];
                if k >= 4 {
                    f2 = eval(x2)?;
                }
            }
        }
    }
    // At most two points remain: (left, left + fib[k]) with fib[k] <= 3.
    let mut best: Option<(u64, f64)> = None;
    for t in (left + 1)..(left + fib[k]) {
        if t < lo || t > hi {
            continue;
        }
        let v = eval(t)?;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((t, v));
        }
    }
    Ok(best.expect("bracket always keeps a point inside the range"))
}

/// Level-set of a unimodal function: `[gamma, big_gamma]` is every `T` in
/// the searched range with `f(T) >= level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelWindow {
    pub gamma: u64,
    pub big_gamma: u64,
    pub t_max: u64,
    pub f_max: f64,
}

/// Locates the maximum of `f` on `[lo, hi]` and bisects both flanks for the
/// `f >= level` boundaries. `Ok(None)` when even the maximum misses the level.
pub fn level_window<F>(lo: u64, hi: u64, level: f64, mut f: F) -> Result<Option<LevelWindow>>
where
    F: FnMut(u64) -> Result<f64>,
{
    let (t_max, f_max) = fibonacci_argmax(lo, hi, &mut f)?;
    if f_max < level {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, t_max);
    while a < b {
        let mid = a + (b - a) / 2;
        if f(mid)? >= level {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    let gamma = a;
    let (mut a, mut b) = (t_max, hi);
    while a < b {
        let mid = a + (b - a).div_ceil(2);
        if f(mid)? >= level {
            a = mid;
        } else {
            b = mid - 1;
        }
    }
    Ok(Some(LevelWindow {
        gamma,
        big_gamma: a,
        t_max,
        f_max,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_max(lo: u64, hi: u64, f: impl Fn(u64) -> f64) -> f64 {
        (lo..=hi).map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn finds_peak_of_every_tent() {
        for lo in [1u64, 5] {
            for len in 1..60u64 {
                let hi = lo + len - 1;
                for peak in lo..=hi {
                    let f = |t: u64| -((t as f64) - peak as f64).abs();
                    let (t, v) = fibonacci_argmax(lo, hi, |t| Ok(f(t))).unwrap();
                    assert_eq!(t, peak, "lo={lo} hi={hi}");
                    assert_eq!(v, scan_max(lo, hi, f));
                }
            }
        }
    }

    #[test]
    fn monotone_functions_hit_the_ends() {
        let (t, _) = fibonacci_argmax(3, 1000, |t| Ok(t as f64)).unwrap();
        assert_eq!(t, 1000);
        let (t, _) = fibonacci_argmax(3, 1000, |t| Ok(-(t as f64))).unwrap();
        assert_eq!(t, 3);
    }

    #[test]
    fn plateau_maximum_is_a_maximizer() {
        let f = |t: u64| (t.min(40) as f64).min(80.0 - t as f64);
        let (t, v) = fibonacci_argmax(1, 100, |t| Ok(f(t))).unwrap();
        assert_eq!(v, 40.0);
        assert_eq!(f(t), 40.0);
    }

    #[test]
    fn evaluation_count_is_logarithmic() {
        let mut calls = 0;
        fibonacci_argmax(1, 1_000_000, |t| {
            calls += 1;
            Ok(-((t as f64) - 123_456.0).powi(2))
        })
        .unwrap();
        assert!(calls <= 32, "{calls}");
    }

    #[test]
    fn level_window_cases() {
        let f = |t: u64| 100.0 - ((t as f64) - 50.0).abs();
        let w = level_window(1, 200, 90.0, |t| Ok(f(t))).unwrap().unwrap();
        assert_eq!((w.gamma, w.big_gamma, w.t_max), (40, 60, 50));
        let w = level_window(1, 55, 90.0, |t| Ok(f(t))).unwrap().unwrap();
        assert_eq!((w.gamma, w.big_gamma), (40, 55));
        assert!(level_window(1, 200, 101.0, |t| Ok(f(t))).unwrap().is_none());
        let w = level_window(7, 7, 0.0, |t| Ok(f(t))).unwrap().unwrap();
        assert_eq!((w.gamma, w.big_gamma), (7, 7));
    }
}
