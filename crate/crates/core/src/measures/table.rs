//! Tail functions given by samples, interpolated linearly in log–log
//! coordinates and extrapolated with the end slopes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TailTable {
    r: Vec<f64>,
    tail: Vec<f64>,
    /// `-d log T / d log r` on each of the `n + 1` pieces (outer two are the
    /// extrapolations).
    slopes: Vec<f64>,
}

impl TailTable {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("levy.points", "a tail table needs at least two rows"));
        }
        let mut r = Vec::with_capacity(points.len());
        let mut tail = Vec::with_capacity(points.len());
        for (i, &[ri, ti]) in points.iter().enumerate() {
            if !(ri.is_finite() && ri > 0.0) {
                return Err(Error::invalid("levy.points", format!("row {i}: r must be positive and finite")));
            }
            if !(ti.is_finite() && ti > 0.0) {
                return Err(Error::invalid("levy.points", format!("row {i}: tail value must be positive and finite")));
            }
            if let (Some(&rp), Some(&tp)) = (r.last(), tail.last()) {
                if ri <= rp {
                    return Err(Error::invalid("levy.points", format!("row {i}: r must be strictly increasing")));
                }
                if ti > tp {
                    return Err(Error::invalid("levy.points", format!("row {i}: tail must be non-increasing")));
                }
            }
            r.push(ri);
            tail.push(ti);
        }
        let mut t = TailTable { r, tail, slopes: Vec::new() };
        t.slopes = t.compute_slopes();
        let last = *t.slopes.last().unwrap();
        if last <= 0.0 {
            return Err(Error::invalid("levy.points", "tail must strictly decrease on the last segment so it vanishes at infinity"));
        }
        if t.slopes[0] >= 2.0 {
            return Err(Error::invalid("levy.points", "log-log slope near 0 must be below 2 for a Lévy measure"));
        }
        Ok(t)
    }

    fn compute_slopes(&self) -> Vec<f64> {
        let n = self.r.len();
        let mut inner = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let s = -(self.tail[i + 1].ln() - self.tail[i].ln()) / (self.r[i + 1].ln() - self.r[i].ln());
            inner.push(s.max(0.0));
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(inner[0]);
        out.extend_from_slice(&inner);
        out.push(inner[n - 2]);
        out
    }

    pub fn knots(&self) -> &[f64] {
        &self.r
    }

    /// Piece index for `r`: 0 below the first knot, `n` above the last.
    fn piece(&self, r: f64) -> usize {
        self.r.partition_point(|&k| k <= r)
    }

    fn anchor(&self, piece: usize) -> (f64, f64) {
        if piece == 0 { (self.r[0], self.tail[0]) } else { (self.r[piece - 1], self.tail[piece - 1]) }
    }

    pub fn tail(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return if self.slopes[0] > 0.0 { f64::INFINITY } else { self.tail[0] };
        }
        if r.is_infinite() {
            return 0.0;
        }
        let k = self.piece(r);
        let (r0, t0) = self.anchor(k);
        t0 * (r / r0).powf(-self.slopes[k])
    }

    pub fn density(&self, r: f64) -> f64 {
        if r <= 0.0 || r.is_infinite() {
            return 0.0;
        }
        let k = self.piece(r);
        self.slopes[k] * self.tail(r) / r
    }

    /// Slope of `log T` against `-log r` near 0 and near infinity.
    pub fn end_slopes(&self) -> (f64, f64) {
        (self.slopes[0], *self.slopes.last().unwrap())
    }

    /// Smallest `r ≥ r_min` with `T(r) ≤ tau`, exact within each piece.
    pub fn inverse(&self, tau: f64, r_min: f64) -> f64 {
        let n = self.r.len();
        // locate the first piece whose right end drops to tau
        let mut k = self.piece(r_min);
        while k < n && self.tail[k] > tau {
            k += 1;
        }
        let (r0, t0) = self.anchor(k);
        let s = self.slopes[k];
        if s == 0.0 {
            return r0.max(r_min);
        }
        (r0 * (t0 / tau).powf(1.0 / s)).max(r_min)
    }
}

/// Parse a two-column CSV of `(r, value)` rows. A non-numeric first row is
/// treated as a header.
pub fn parse_two_column_csv(text: &str, key: &str) -> Result<Vec<[f64; 2]>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{key}: {e}")))?;
        if rec.len() != 2 {
            return Err(Error::invalid(key, format!("row {}: expected 2 columns, found {}", i + 1, rec.len())));
        }
        let a = super::ext::parse_ext(&rec[0]);
        let b = super::ext::parse_ext(&rec[1]);
        match (a, b) {
            (Some(a), Some(b)) => rows.push([a, b]),
            _ if i == 0 => continue,
            _ => return Err(Error::invalid(key, format!("row {}: non-numeric value", i + 1))),
        }
    }
    Ok(rows)
}

/// Parse a tail table from CSV text.
pub fn parse_tail_table(text: &str) -> Result<TailTable> {
    TailTable::new(&parse_two_column_csv(text, "levy.path")?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_power_table_is_exact() {
        let pts: Vec<[f64; 2]> = [0.1, 1.0, 10.0].iter().map(|&r: &f64| [r, r.powf(-1.5)]).collect();
        let t = TailTable::new(&pts).unwrap();
        for &r in &[1e-3, 0.5, 3.0, 1e4] {
            assert!((t.tail(r) / r.powf(-1.5) - 1.0).abs() < 1e-12);
            assert!((t.density(r) / (1.5 * r.powf(-2.5)) - 1.0).abs() < 1e-12);
            let back = t.inverse(t.tail(r), 1e-9);
            assert!((back / r - 1.0).abs() < 1e-12, "{r} {back}");
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TailTable::new(&[[1.0, 1.0]]).is_err());
        assert!(TailTable::new(&[[1.0, 1.0], [0.5, 0.5]]).is_err());
        assert!(TailTable::new(&[[1.0, 1.0], [2.0, 2.0]]).is_err());
        assert!(TailTable::new(&[[1.0, 1.0], [2.0, 1.0]]).is_err());
        assert!(TailTable::new(&[[1.0, 1.0], [2.0, 0.1]]).is_err()); // slope > 2 near 0
    }

    #[test]
    fn csv_with_header() {
        let rows = parse_two_column_csv("r,tail\n0.5, 2\n1,1\n", "k").unwrap();
        assert_eq!(rows, vec![[0.5, 2.0], [1.0, 1.0]]);
        assert!(parse_two_column_csv("1,2\nx,3\n", "k").is_err());
    }
}
