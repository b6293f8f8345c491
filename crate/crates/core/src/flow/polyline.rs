use std::io::Write;

use crate::error::{Error, Result};

/// How two consecutive band pieces of a trace are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunctionKind {
    Fold,
    Cap,
}

impl JunctionKind {
    pub fn tag(self) -> &'static str {
        match self {
            JunctionKind::Fold => "fold",
            JunctionKind::Cap => "cap",
        }
    }
}

/// One sample on a band piece. `x` is unwrapped along the piece and the
/// velocity is the chart derivative with respect to arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolySample {
    pub t: f64,
    pub x: f64,
    pub arclen: f64,
    pub v_t: f64,
    pub v_x: f64,
}

impl PolySample {
    fn point(&self) -> [f64; 2] {
        [self.t, self.x]
    }
}

/// Chart trace of one geodesic, split into band pieces at fold crossings
/// and cap traversals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeodesicPolyline {
    pub pieces: Vec<Vec<PolySample>>,
    /// `junctions[k]` sits between `pieces[k]` and `pieces[k + 1]`.
    pub junctions: Vec<JunctionKind>,
}

fn turn_angle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1]];
    let v = [c[0] - b[0], c[1] - b[1]];
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.atan2(dot).abs()
}

fn hermite_mid(p: &PolySample, q: &PolySample) -> PolySample {
    let h = q.arclen - p.arclen;
    let mid = |a0: f64, a1: f64, d0: f64, d1: f64| 0.5 * (a0 + a1) + h * (d0 - d1) / 8.0;
    let dmid = |a0: f64, a1: f64, d0: f64, d1: f64| 1.5 * (a1 - a0) / h - 0.25 * (d0 + d1);
    PolySample {
        t: mid(p.t, q.t, p.v_t, q.v_t),
        x: mid(p.x, q.x, p.v_x, q.v_x),
        arclen: 0.5 * (p.arclen + q.arclen),
        v_t: dmid(p.t, q.t, p.v_t, q.v_t),
        v_x: dmid(p.x, q.x, p.v_x, q.v_x),
    }
}

impl GeodesicPolyline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample_count(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_count() == 0
    }

    pub fn first(&self) -> Option<&PolySample> {
        self.pieces.iter().find_map(|p| p.first())
    }

    pub fn last(&self) -> Option<&PolySample> {
        self.pieces.iter().rev().find_map(|p| p.last())
    }

    pub(crate) fn push(&mut self, piece: usize, s: PolySample) {
        while self.pieces.len() <= piece {
            self.pieces.push(Vec::new());
        }
        let seq = &mut self.pieces[piece];
        if let Some(prev) = seq.last() {
            if s.arclen - prev.arclen <= 1e-14 {
                seq.pop();
            }
        }
        seq.push(s);
    }

    /// Largest chord turning angle over all pieces.
    pub fn max_turn(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.windows(3).map(|w| turn_angle(w[0].point(), w[1].point(), w[2].point())))
            .fold(0.0, f64::max)
    }

    /// Sum of chord turning angles (total chart curvature of the polyline).
    pub fn total_turn(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.windows(3).map(|w| turn_angle(w[0].point(), w[1].point(), w[2].point())))
            .sum()
    }

    /// Reversed traversal: pieces and samples in reverse order, velocities
    /// negated, arclength measured from the other end.
    pub fn reversed(&self) -> Self {
        let total = self.last().map_or(0.0, |s| s.arclen);
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| {
                p.iter()
                    .rev()
                    .map(|s| PolySample {
                        t: s.t,
                        x: s.x,
                        arclen: total - s.arclen,
                        v_t: -s.v_t,
                        v_x: -s.v_x,
                    })
                    .collect()
            })
            .collect();
        let junctions = self.junctions.iter().rev().copied().collect();
        Self { pieces, junctions }
    }

    /// Checks the structural contract: every piece has at least two samples
    /// with increasing arclength, and the junction count matches.
    pub fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::Polyline("no pieces".into()));
        }
        if self.junctions.len() + 1 != self.pieces.len() {
            return Err(Error::Polyline(format!(
                "{} pieces but {} junctions",
                self.pieces.len(),
                self.junctions.len()
            )));
        }
        for (k, p) in self.pieces.iter().enumerate() {
            if p.len() < 2 {
                return Err(Error::Polyline(format!("piece {k} has {} samples", p.len())));
            }
            if p.windows(2).any(|w| !(w[1].arclen > w[0].arclen)) {
                return Err(Error::Polyline(format!("piece {k} is not ordered by arclength")));
            }
        }
        Ok(())
    }

    /// Writes `t,theta,arclen,segment_tag`; one marker row per junction at
    /// the entry sample.
    pub fn write_csv<W: Write>(&self, circumference: f64, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta", "arclen", "segment_tag"])?;
        for (k, piece) in self.pieces.iter().enumerate() {
            for s in piece {
                w.write_record([
                    s.t.to_string(),
                    s.x.rem_euclid(circumference).to_string(),
                    s.arclen.to_string(),
                    "band".to_string(),
                ])?;
            }
            if let (Some(j), Some(s)) = (self.junctions.get(k), piece.last()) {
                w.write_record([
                    s.t.to_string(),
                    s.x.rem_euclid(circumference).to_string(),
                    s.arclen.to_string(),
                    j.tag().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Subdivides segments by cubic Hermite interpolation until every chord
/// turning angle is below `max_turn`. Endpoints and junctions are kept.
pub fn resample_polyline(poly: &GeodesicPolyline, max_turn: f64) -> GeodesicPolyline {
    let mut out = poly.clone();
    for piece in &mut out.pieces {
        for _ in 0..40 {
            let n = piece.len();
            if n < 3 {
                break;
            }
            let mut split = vec![false; n - 1];
            let mut any = false;
            for i in 1..n - 1 {
                if turn_angle(piece[i - 1].point(), piece[i].point(), piece[i + 1].point()) >= max_turn {
                    split[i - 1] = true;
                    split[i] = true;
                    any = true;
                }
            }
            if !any {
                break;
            }
            let mut next = Vec::with_capacity(2 * n);
            for i in 0..n - 1 {
                next.push(piece[i]);
                if split[i] {
                    next.push(hermite_mid(&piece[i], &piece[i + 1]));
                }
            }
            next.push(piece[n - 1]);
            *piece = next;
        }
    }
    out
}
