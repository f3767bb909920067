//! Parameter grids, long-format result tables and curve landmarks.

use std::fmt::Write as _;
use std::io::{self, Write};

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Maps `f` over `items` keeping input order, in parallel when enabled.
pub fn ordered_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Shortest representation with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').unwrap();
        let mantissa =
            if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{mantissa}e{e}")
    }
}

/// One value of a sweep: a quantity for a site tuple at one coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub j: f64,
    pub quantity: String,
    pub q: usize,
    pub distances: [Option<usize>; 3],
    pub value: f64,
}

impl SweepRow {
    pub fn new(j: f64, quantity: impl Into<String>, q: usize, distances: &[usize], value: f64) -> Self {
        let mut d = [None; 3];
        for (slot, &x) in d.iter_mut().zip(distances) {
            *slot = Some(x);
        }
        Self { j, quantity: quantity.into(), q, distances: d, value }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub const HEADER: &'static str = "J,quantity,q,d1,d2,d3,value";

    /// Values of one curve in row order. `distances` of `None` matches any.
    pub fn series(&self, quantity: &str, q: usize, distances: Option<&[usize]>) -> (Vec<f64>, Vec<f64>) {
        let want = distances.map(|d| SweepRow::new(0.0, "", q, d, 0.0).distances);
        self.rows
            .iter()
            .filter(|r| r.quantity == quantity && r.q == q && want.is_none_or(|w| w == r.distances))
            .map(|r| (r.j, r.value))
            .unzip()
    }

    pub fn write_csv(&self, out: impl Write) -> io::Result<()> {
        self.write_csv_with(out, &[])
    }

    /// Like `write_csv`, with constant trailing columns such as system size.
    pub fn write_csv_with(&self, mut out: impl Write, extra: &[(&str, String)]) -> io::Result<()> {
        let mut header = Self::HEADER.to_string();
        let mut tail = String::new();
        for (name, value) in extra {
            header.push(',');
            header.push_str(name);
            tail.push(',');
            tail.push_str(value);
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for r in &self.rows {
            line.clear();
            let d = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
            let _ = write!(
                line,
                "{},{},{},{},{},{},{}",
                fmt_sig(r.j),
                r.quantity,
                r.q,
                d(r.distances[0]),
                d(r.distances[1]),
                d(r.distances[2]),
                fmt_sig(r.value)
            );
            writeln!(out, "{line}{tail}")?;
        }
        Ok(())
    }
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let c = y[0] - a * x[0] * x[0] - b * x[0];
    let xv = -b / (2.0 * a);
    Some((xv, c - b * b / (4.0 * a)))
}

/// Global maximum located by a parabola through the best grid point and its
/// neighbours; falls back to the grid point at the ends.
pub fn locate_max(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let (i, _) = ys.iter().enumerate().filter(|(_, y)| y.is_finite()).max_by(|a, b| a.1.total_cmp(b.1))?;
    if i == 0 || i + 1 == xs.len() {
        return Some((xs[i], ys[i]));
    }
    match parabola_vertex([xs[i - 1], xs[i], xs[i + 1]], [ys[i - 1], ys[i], ys[i + 1]]) {
        Some((xv, yv)) if xv >= xs[i - 1] && xv <= xs[i + 1] => Some((xv, yv)),
        _ => Some((xs[i], ys[i])),
    }
}

/// Points where `a - b` changes sign, each refined by the root of the
/// parabola through three bracketing grid points.
pub fn locate_crossings(xs: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut out = Vec::new();
    for i in 0..d.len().saturating_sub(1) {
        if d[i] == 0.0 {
            // touching zero without changing sign is not a crossing
            if i > 0 && i + 1 < d.len() && d[i - 1] * d[i + 1] < 0.0 {
                out.push(xs[i]);
            }
            continue;
        }
        if d[i] * d[i + 1] >= 0.0 {
            continue;
        }
        let linear = xs[i] - d[i] * (xs[i + 1] - xs[i]) / (d[i + 1] - d[i]);
        let k = if i + 2 < d.len() {
            i
        } else if i > 0 {
            i - 1
        } else {
            out.push(linear);
            continue;
        };
        out.push(
            parabola_root([xs[k], xs[k + 1], xs[k + 2]], [d[k], d[k + 1], d[k + 2]], xs[i], xs[i + 1])
                .unwrap_or(linear),
        );
    }
    out
}

fn parabola_root(x: [f64; 3], y: [f64; 3], lo: f64, hi: f64) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    let b = d1 - a * (x[0] + x[1]);
    let c = y[0] - a * x[0] * x[0] - b * x[0];
    if a.abs() < 1e-300 {
        return (b != 0.0).then(|| -c / b).filter(|r| *r >= lo && *r <= hi);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    [(-b + s) / (2.0 * a), (-b - s) / (2.0 * a)].into_iter().find(|r| *r >= lo && *r <= hi)
}

/// First grid point from which `ys` stays above `threshold`, interpolated
/// linearly back to the threshold.
pub fn locate_onset(xs: &[f64], ys: &[f64], threshold: f64) -> Option<f64> {
    let last_below = ys.iter().rposition(|&y| y <= threshold)?;
    if last_below + 1 >= ys.len() {
        return None;
    }
    let (x0, x1, y0, y1) = (xs[last_below], xs[last_below + 1], ys[last_below], ys[last_below + 1]);
    Some(x0 + (threshold - y0) * (x1 - x0) / (y1 - y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.789012345), "123456.789012");
        assert_eq!(fmt_sig(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig(6.02214076e23), "6.02214076e23");
    }

    #[test]
    fn parabola_landmarks() {
        let xs = grid(0.0, 2.0, 21);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - (x - 0.737).powi(2)).collect();
        let (xm, ym) = locate_max(&xs, &ys).unwrap();
        assert_relative_eq!(xm, 0.737, epsilon = 1e-12);
        assert_relative_eq!(ym, 1.0, epsilon = 1e-12);
        let a: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let b = vec![0.5; xs.len()];
        let cr = locate_crossings(&xs, &a, &b);
        assert_eq!(cr.len(), 1);
        assert_relative_eq!(cr[0], 0.5f64.sqrt(), epsilon = 1e-12);
        let zero = vec![0.0; xs.len()];
        assert!(locate_crossings(&xs, &zero, &zero).is_empty());
    }

    #[test]
    fn onset_interpolation() {
        let xs = grid(0.0, 1.0, 11);
        let ys: Vec<f64> = xs.iter().map(|&x| if x < 0.5 { 0.0 } else { x - 0.45 }).collect();
        assert_relative_eq!(locate_onset(&xs, &ys, 1e-3).unwrap(), 0.4 + 0.1 * 1e-3 / 0.05, epsilon = 1e-12);
    }

    #[test]
    fn csv_layout() {
        let t = SweepTable { rows: vec![SweepRow::new(0.5, "corr_norm1", 3, &[1, 2], 0.25)] };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "J,quantity,q,d1,d2,d3,value\n0.5,corr_norm1,3,1,2,,0.25\n");
        let mut buf = Vec::new();
        t.write_csv_with(&mut buf, &[("N", "9".into()), ("L", "9".into())]).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("value,N,L\n0.5,corr_norm1,3,1,2,,0.25,9,9\n"));
        let (x, y) = t.series("corr_norm1", 3, Some(&[1, 2]));
        assert_eq!((x, y), (vec![0.5], vec![0.25]));
    }
}
