//! Recorded (or synthetic) range-pulse data and the sliding-window
//! snapshot protocol used to run detectors on it.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::{Complex, Complex32, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{Boundary, Decision};
use crate::error::{Error, Result};
use crate::linalg::{accumulate_outer, cholesky, ComplexVec, HermitianMatrix};
use crate::montecarlo::{steering, ClutterModel, Estimate};
use crate::stats::{db_to_linear, ProblemDims, QuadForms};

/// Samples of `cells` range cells by `pulses` returns, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    cells: usize,
    pulses: usize,
    samples: Vec<Complex32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeFormat {
    /// One row per cell, alternating `re,im` columns.
    Csv,
    /// `u32` cells and `u32` pulses, then `f32` `re, im` pairs, all
    /// little-endian, cell-major.
    Binary,
}

impl CubeFormat {
    /// Guess from the file extension: `.csv` or anything else as binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Binary,
        }
    }
}

impl DataCube {
    pub fn new(cells: usize, pulses: usize, samples: Vec<Complex32>) -> Result<Self> {
        if cells == 0 || pulses == 0 {
            return Err(Error::InvalidParameter("cube must have at least one cell and one pulse".into()));
        }
        if samples.len() != cells * pulses {
            return Err(Error::DimensionMismatch { expected: cells * pulses, found: samples.len() });
        }
        Ok(Self { cells, pulses, samples })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn pulses(&self) -> usize {
        self.pulses
    }

    pub fn get(&self, cell: usize, pulse: usize) -> Complex32 {
        self.samples[cell * self.pulses + pulse]
    }

    pub fn cell(&self, cell: usize) -> &[Complex32] {
        &self.samples[cell * self.pulses..(cell + 1) * self.pulses]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in 0..self.cells {
            let row: Vec<String> = self.cell(c).iter().map(|x| format!("{},{}", x.re, x.im)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut samples = Vec::new();
        let mut pulses = None;
        let mut cells = 0;
        for (ln, line) in s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let vals = line
                .split(',')
                .map(|t| t.trim().parse::<f32>().map_err(|e| Error::Parse(format!("line {}: '{t}': {e}", ln + 1))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() % 2 != 0 {
                return Err(Error::Parse(format!("line {}: odd number of columns", ln + 1)));
            }
            let p = vals.len() / 2;
            match pulses {
                None => pulses = Some(p),
                Some(q) if q != p => {
                    return Err(Error::Parse(format!("line {}: {p} pulses, expected {q}", ln + 1)));
                }
                _ => {}
            }
            samples.extend(vals.chunks(2).map(|c| Complex::new(c[0], c[1])));
            cells += 1;
        }
        Self::new(cells, pulses.unwrap_or(0), samples)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.samples.len());
        out.extend_from_slice(&(self.cells as u32).to_le_bytes());
        out.extend_from_slice(&(self.pulses as u32).to_le_bytes());
        for x in &self.samples {
            out.extend_from_slice(&x.re.to_le_bytes());
            out.extend_from_slice(&x.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < 8 {
            return Err(Error::Parse("binary cube shorter than its header".into()));
        }
        let word = |i: usize| [b[i], b[i + 1], b[i + 2], b[i + 3]];
        let cells = u32::from_le_bytes(word(0)) as usize;
        let pulses = u32::from_le_bytes(word(4)) as usize;
        let body = &b[8..];
        if body.len() != cells * pulses * 8 {
            return Err(Error::Parse(format!(
                "header declares {cells} x {pulses} samples but the body holds {} bytes",
                body.len()
            )));
        }
        let samples = body
            .chunks_exact(8)
            .map(|c| Complex::new(f32::from_le_bytes([c[0], c[1], c[2], c[3]]), f32::from_le_bytes([c[4], c[5], c[6], c[7]])))
            .collect();
        Self::new(cells, pulses, samples)
    }

    pub fn load(path: &Path, format: CubeFormat) -> Result<Self> {
        match format {
            CubeFormat::Csv => Self::from_csv(&std::fs::read_to_string(path)?),
            CubeFormat::Binary => Self::from_bytes(&std::fs::read(path)?),
        }
    }

    pub fn save(&self, path: &Path, format: CubeFormat) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        match format {
            CubeFormat::Csv => f.write_all(self.to_csv().as_bytes())?,
            CubeFormat::Binary => f.write_all(&self.to_bytes())?,
        }
        f.flush()?;
        Ok(())
    }
}

/// Number of `n`-pulse windows sharing one pulse with their neighbours:
/// `⌊(pulses − n)/(n − 1)⌋ + 1`.
pub fn snapshot_count(pulses: usize, n: usize) -> usize {
    if n < 2 || pulses < n {
        return 0;
    }
    (pulses - n) / (n - 1) + 1
}

/// Primary and secondary data of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub start: usize,
    pub z: ComplexVec,
    pub secondaries: Vec<ComplexVec>,
}

/// Range cells flanking `cut_cell`, `k/2` on each side.
pub fn secondary_cells(cut_cell: usize, k: usize) -> Vec<usize> {
    let h = k / 2;
    (cut_cell.saturating_sub(h)..cut_cell).chain(cut_cell + 1..=cut_cell + h).collect()
}

fn check_layout(cube: &DataCube, cut_cell: usize, n: usize, k: usize) -> Result<()> {
    if k % 2 != 0 || k == 0 {
        return Err(Error::InvalidParameter(format!("K = {k} must be even and positive")));
    }
    if cut_cell < k / 2 || cut_cell + k / 2 >= cube.cells {
        return Err(Error::InvalidParameter(format!(
            "CUT {cut_cell} needs {} cells on each side within {} cells",
            k / 2,
            cube.cells
        )));
    }
    if n < 2 || cube.pulses < n {
        return Err(Error::InvalidParameter(format!("{} pulses cannot hold a window of N = {n}", cube.pulses)));
    }
    Ok(())
}

fn window(cube: &DataCube, cell: usize, start: usize, n: usize) -> ComplexVec {
    let v = cube.cell(cell)[start..start + n].iter().map(|x| Complex64::new(x.re as f64, x.im as f64)).collect();
    ComplexVec::from_vec_unchecked(v)
}

/// The `w`-th window, starting at pulse `w (n − 1)`.
pub fn snapshot(cube: &DataCube, cut_cell: usize, n: usize, k: usize, w: usize) -> Result<Snapshot> {
    check_layout(cube, cut_cell, n, k)?;
    if w >= snapshot_count(cube.pulses, n) {
        return Err(Error::InvalidParameter(format!("window {w} beyond the last pulse")));
    }
    let start = w * (n - 1);
    Ok(Snapshot {
        start,
        z: window(cube, cut_cell, start, n),
        secondaries: secondary_cells(cut_cell, k).into_iter().map(|c| window(cube, c, start, n)).collect(),
    })
}

/// All windows of the protocol, in order.
pub fn sliding_snapshots(cube: &DataCube, cut_cell: usize, n: usize, k: usize) -> Result<impl Iterator<Item = Snapshot> + '_> {
    check_layout(cube, cut_cell, n, k)?;
    Ok((0..snapshot_count(cube.pulses, n)).map(move |w| snapshot(cube, cut_cell, n, k, w).expect("layout checked")))
}

fn forms(snap: &Snapshot, v: &ComplexVec, target: Option<Complex64>) -> Result<QuadForms> {
    let n = v.len();
    let mut s = HermitianMatrix::zeros(n);
    for x in &snap.secondaries {
        accumulate_outer(&mut s, x.as_slice());
    }
    let l = cholesky(&s)?;
    let wv = l.whiten(v.as_slice());
    let mut z = snap.z.as_slice().to_vec();
    if let Some(alpha) = target {
        for (zi, vi) in z.iter_mut().zip(v.as_slice()) {
            *zi += alpha * vi;
        }
    }
    Ok(QuadForms::from_whitened(&l.whiten(&z), &wv))
}

/// Fraction of windows declared H1 with nothing injected.
pub fn empirical_pfa_on_cube(cube: &DataCube, b: &Boundary, cut_cell: usize, dims: ProblemDims, f_d: f64) -> Result<Estimate> {
    check_layout(cube, cut_cell, dims.n, dims.k)?;
    let v = steering(dims.n, f_d);
    let count = snapshot_count(cube.pulses, dims.n);
    let hits = (0..count)
        .into_par_iter()
        .map(|w| -> Result<u64> {
            let snap = snapshot(cube, cut_cell, dims.n, dims.k, w)?;
            Ok(u64::from(b.decide(forms(&snap, &v, None)?.feature()) == Decision::H1))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::from_counts(hits, count as u64))
}

/// Fraction of windows declared H1 after adding `α v` to the CUT. The
/// amplitude is set from the secondaries' sample covariance `S/K`, so that
/// `|α|² v† (S/K)⁻¹ v = γ`; the phase is drawn per window.
pub fn empirical_pd_on_cube(
    cube: &DataCube,
    b: &Boundary,
    cut_cell: usize,
    dims: ProblemDims,
    f_d: f64,
    gamma_db: f64,
    seed: u64,
) -> Result<Estimate> {
    check_layout(cube, cut_cell, dims.n, dims.k)?;
    let v = steering(dims.n, f_d);
    let gamma = db_to_linear(gamma_db);
    let count = snapshot_count(cube.pulses, dims.n);
    let hits = (0..count)
        .into_par_iter()
        .map(|w| -> Result<u64> {
            let snap = snapshot(cube, cut_cell, dims.n, dims.k, w)?;
            let mut s = HermitianMatrix::zeros(dims.n);
            for x in &snap.secondaries {
                accumulate_outer(&mut s, x.as_slice());
            }
            let vsv = cholesky(&s)?.quad_form(&v, &v)?.re;
            let amp = (gamma / (dims.k as f64 * vsv)).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let alpha = Complex64::from_polar(amp, rng.random::<f64>() * 2.0 * std::f64::consts::PI);
            Ok(u64::from(b.decide(forms(&snap, &v, Some(alpha))?.feature()) == Decision::H1))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::from_counts(hits, count as u64))
}

/// A cube whose cells are independent, each a stationary sequence with
/// covariance `R_c + σ_n² I`: Gaussian-tap filtered noise plus white noise.
pub fn synthetic_cube(cells: usize, pulses: usize, cm: &ClutterModel, seed: u64) -> Result<DataCube> {
    // taps exp(−a m²) have autocorrelation ∝ exp(−a d²/2); match exp(−2π²σ_f² d²)
    let a = 4.0 * std::f64::consts::PI.powi(2) * cm.sigma_f * cm.sigma_f;
    let half = ((30.0 / a).sqrt().ceil() as usize).max(1);
    let raw: Vec<f64> = (0..=2 * half).map(|j| (-(a * (j as f64 - half as f64).powi(2))).exp()).collect();
    let norm = raw.iter().map(|h| h * h).sum::<f64>().sqrt();
    let taps: Vec<f64> = raw.iter().map(|h| h / norm).collect();
    let sn = cm.noise_power.sqrt();
    let rows: Vec<Vec<Complex32>> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut cn = || {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            };
            let drive: Vec<Complex64> = (0..pulses + taps.len()).map(|_| cn()).collect();
            (0..pulses)
                .map(|t| {
                    let clutter: Complex64 = taps.iter().enumerate().map(|(j, h)| drive[t + j] * h).sum();
                    let x = clutter + cn() * sn;
                    Complex32::new(x.re as f32, x.im as f32)
                })
                .collect()
        })
        .collect();
    DataCube::new(cells, pulses, rows.into_iter().flatten().collect())
}
