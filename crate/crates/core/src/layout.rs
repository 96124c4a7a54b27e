//! Register coordinates and the initial layouts fed to the embedding model.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::physics::check_dims;

/// Radius of the register disk (or ball) in µm.
pub const REGISTER_RADIUS: f64 = 50.0;

/// Qubit positions in µm, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dims: usize,
    coords: Vec<f64>,
}

impl Embedding {
    /// `coords` holds `dims` values per point.
    pub fn new(dims: usize, coords: Vec<f64>) -> Result<Self> {
        check_dims(dims)?;
        if !coords.len().is_multiple_of(dims) {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates do not split into {dims}-d points",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinate {bad}")));
        }
        Ok(Embedding { dims, coords })
    }

    pub fn from_points<const D: usize>(points: &[[f64; D]]) -> Result<Self> {
        Self::new(D, points.iter().flatten().copied().collect())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.coords.len() / self.dims
    }

    /// Coordinates of the 0-based point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dims..(i + 1) * self.dims]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dims)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance between 0-based points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// All pair distances in lexicographic pair order.
    pub fn pair_distances(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.distance(i, j));
            }
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.points()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn translated(&self, offset: &[f64]) -> Embedding {
        let coords = self
            .coords
            .chunks_exact(self.dims)
            .flat_map(|p| p.iter().zip(offset).map(|(c, o)| c + o))
            .collect();
        Embedding {
            dims: self.dims,
            coords,
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dims];
        for p in self.points() {
            for (acc, v) in c.iter_mut().zip(p) {
                *acc += v;
            }
        }
        let n = self.n().max(1) as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    /// Writes `id,x,y[,z]` rows with 1-based ids.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_csv_with_ids(writer, 1..=self.n())
    }

    /// Like [`Embedding::write_csv`] with caller-supplied ids per row.
    pub fn write_csv_with_ids<W, I>(&self, writer: W, ids: I) -> Result<()>
    where
        W: Write,
        I: IntoIterator<Item = usize>,
    {
        let mut w = csv::Writer::from_writer(writer);
        let header: &[&str] = if self.dims == 2 {
            &["id", "x", "y"]
        } else {
            &["id", "x", "y", "z"]
        };
        w.write_record(header)?;
        for (id, p) in ids.into_iter().zip(self.points()) {
            let mut row = vec![id.to_string()];
            row.extend(p.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `id,x,y[,z]`; rows are reordered by id, which must cover `1..=n`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let dims = r.headers()?.len().saturating_sub(1);
        check_dims(dims)?;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for record in r.records() {
            let record = record?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
            };
            let id = record[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad id {:?}: {e}", &record[0])))?;
            let p = (1..=dims).map(|k| parse(&record[k])).collect::<Result<Vec<_>>>()?;
            rows.push((id, p));
        }
        rows.sort_by_key(|(id, _)| *id);
        for (k, (id, _)) in rows.iter().enumerate() {
            if *id != k + 1 {
                return Err(Error::Parse(format!("ids must be 1..=n, found {id} at row {}", k + 1)));
            }
        }
        Embedding::new(dims, rows.into_iter().flat_map(|(_, p)| p).collect())
    }
}

/// Similarity transform placing the centroid at the origin and the farthest
/// point at `target_radius`. Coincident point sets are only translated.
pub fn scale_to_register(points: &[[f64; 2]], target_radius: f64) -> Result<Embedding> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if !(target_radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target radius must be positive, got {target_radius}"
        )));
    }
    let native = Embedding::from_points(points)?;
    let centroid: Vec<f64> = native.centroid().iter().map(|c| -c).collect();
    let centered = native.translated(&centroid);
    let reach = centered.max_norm();
    if reach == 0.0 {
        return Ok(centered);
    }
    let scale = target_radius / reach;
    Embedding::new(2, centered.coords.iter().map(|c| c * scale).collect())
}

/// Force-directed planar layout confined to a disk.
///
/// Every pair repels with displacement `k²/d`; adjacent pairs attract with
/// displacement `d²/k`, so an isolated edge settles at `d = k`. Per iteration
/// the step is capped by a temperature cooling linearly from
/// `domain_radius / 10` to zero, and positions are clipped radially onto the
/// disk of `domain_radius`.
pub fn fruchterman_reingold(g: &Graph, k: f64, iterations: usize, seed: u64, domain_radius: f64) -> Result<Embedding> {
    if !(k > 0.0) || !(domain_radius > 0.0) || iterations == 0 {
        return Err(Error::InvalidParameter(
            "layout needs k > 0, domain_radius > 0 and at least one iteration".into(),
        ));
    }
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let r = domain_radius * rng.gen::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.gen::<f64>();
            [r * theta.cos(), r * theta.sin()]
        })
        .collect();
    let edges: Vec<(usize, usize)> = g.edges().map(|(i, j)| (i - 1, j - 1)).collect();
    let t0 = domain_radius / 10.0;
    let mut disp = vec![[0.0f64; 2]; n];

    for step in 0..iterations {
        let temperature = t0 * (1.0 - step as f64 / iterations as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);

        for i in 0..n {
            for j in i + 1..n {
                let (dir, d) = separation(&pos[i], &pos[j], &mut rng);
                let push = k * k / d;
                for a in 0..2 {
                    disp[i][a] += dir[a] * push;
                    disp[j][a] -= dir[a] * push;
                }
            }
        }
        for &(i, j) in &edges {
            let (dir, d) = separation(&pos[i], &pos[j], &mut rng);
            let pull = d * d / k;
            for a in 0..2 {
                disp[i][a] -= dir[a] * pull;
                disp[j][a] += dir[a] * pull;
            }
        }

        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step_len = len.min(temperature);
                p[0] += d[0] / len * step_len;
                p[1] += d[1] / len * step_len;
            }
            let norm = p[0].hypot(p[1]);
            if norm > domain_radius {
                p[0] *= domain_radius / norm;
                p[1] *= domain_radius / norm;
            }
        }
    }
    Embedding::from_points(&pos)
}

/// Unit vector from `b` to `a` and the distance; coincident points get a
/// random direction and a tiny distance.
fn separation(a: &[f64; 2], b: &[f64; 2], rng: &mut ChaCha8Rng) -> ([f64; 2], f64) {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let d = dx.hypot(dy);
    if d > 1e-9 {
        ([dx / d, dy / d], d)
    } else {
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        ([theta.cos(), theta.sin()], 1e-9)
    }
}

/// Adds a zero z-coordinate to every point.
pub fn lift_to_3d(e: &Embedding) -> Result<Embedding> {
    if e.dims == 3 {
        return Err(Error::AlreadyThreeD);
    }
    let coords = e.points().flat_map(|p| [p[0], p[1], 0.0]).collect();
    Embedding::new(3, coords)
}
