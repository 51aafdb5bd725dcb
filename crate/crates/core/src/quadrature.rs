/// Composite Simpson rule with `points` nodes (rounded up to odd, min 3).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
    let intervals = {
        let n = points.max(3) - 1;
        n + n % 2
    };
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}
