//! Zero finding for scalar functions on an interval.

/// Bisects `[a, b]` for a zero of `f`, given `f(a)` and `f(b)` of opposite
/// sign, until the bracket is narrower than `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All zeros of `f` on `[a, b]` found by scanning `intervals` equal
/// sub-intervals for sign changes and bisecting each to `tol`.
///
/// Exact zeros at scan nodes are reported once. Zeros where `f` touches
/// zero without changing sign between nodes are missed.
pub fn scan_zeros(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize, tol: f64) -> Vec<f64> {
    let intervals = intervals.max(1);
    let node = |i: usize| {
        if i == intervals {
            b
        } else {
            a + (b - a) * i as f64 / intervals as f64
        }
    };
    let mut zeros = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    if f0 == 0.0 {
        zeros.push(a);
    }
    for i in 1..=intervals {
        let x1 = node(i);
        let f1 = f(x1);
        if f1 == 0.0 {
            zeros.push(x1);
        } else if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            zeros.push(bisect(&f, x0, x1, tol));
        }
        x0 = x1;
        f0 = f1;
    }
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_and_node_zeros() {
        let z = scan_zeros(|x| (x - 0.3) * (x - 0.5), 0.0, 1.0, 10, 1e-14);
        assert_eq!(z.len(), 2);
        assert!((z[0] - 0.3).abs() < 1e-12);
        assert_eq!(z[1], 0.5);

        let z = scan_zeros(|x| x, 0.0, 1.0, 4, 1e-12);
        assert_eq!(z, vec![0.0]);

        assert!(scan_zeros(|x| 1.0 + x, 0.0, 1.0, 16, 1e-12).is_empty());
    }

    #[test]
    fn bisect_tolerance() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0, 1e-13);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }
}
