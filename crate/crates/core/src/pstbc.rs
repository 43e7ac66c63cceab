//! Perfect space-time block codes of dimension S and their decoupled decoding
//! under multiple beamforming (PCMB).
//!
//! A codeword is `X = Σ_j diag(G x_j) E^{j-1}`. The entries of `ΛX` that
//! depend on `x_j` lie on the `j`-th wrapped diagonal of `Y`, so the
//! observation splits into `S` independent equations
//! `y_j = Φ_j Λ G x_j + n_j`. Dimension 2 with the Golden generator is the
//! Golden Code. Generators for the other dimensions are read from a file.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::golden::{self, decode_groups, effective_channel_for, DecodeResult, GoldenConstants};
use crate::lattice::{exhaustive_ml, MlChoice};
use crate::numerics::{vec_norm_sqr, ComplexMatrix, Constellation};

/// Unitarity tolerance for supplied generators.
pub const UNITARY_TOL: f64 = 1e-10;

/// Realness gate on `R` for generators read from a file.
pub const REALNESS_TOL_EXTERNAL: f64 = 1e-8;

const SUPPORTED_DIMS: [usize; 4] = [2, 3, 4, 6];

/// The corner entry of `E` for each supported dimension.
pub fn standard_phase(s: usize) -> Result<Complex64> {
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    match s {
        2 | 4 => Ok(Complex64::new(0.0, 1.0)),
        3 => Ok(w),
        6 => Ok(-w),
        _ => Err(Error::Config(format!("unsupported code dimension {s}; expected 2, 3, 4 or 6"))),
    }
}

/// Shift matrix: ones on the superdiagonal and `g` in the bottom-left corner.
pub fn build_e(s: usize, g: Complex64) -> Result<ComplexMatrix> {
    if !SUPPORTED_DIMS.contains(&s) {
        return Err(Error::Config(format!("unsupported code dimension {s}; expected 2, 3, 4 or 6")));
    }
    let mut e = ComplexMatrix::zeros(s, s);
    for k in 0..s - 1 {
        e[(k, k + 1)] = Complex64::new(1.0, 0.0);
    }
    e[(s - 1, 0)] = g;
    Ok(e)
}

/// Generator, corner phase and shift matrix of one perfect code.
#[derive(Debug, Clone)]
pub struct PerfectCodeSpec {
    s: usize,
    g: ComplexMatrix,
    phase: Complex64,
    e: ComplexMatrix,
}

impl PerfectCodeSpec {
    /// Validates `G` (square, S×S, unitary) and `phase` (the tabulated value for S).
    pub fn new(s: usize, g: ComplexMatrix, phase: Complex64) -> Result<Self> {
        let expected = standard_phase(s)?;
        if g.rows() != s || g.cols() != s {
            return Err(Error::Dimension(format!("generator is {}x{}, expected {s}x{s}", g.rows(), g.cols())));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite("generator"));
        }
        let err = g.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::Generator(format!("generator is not unitary: ‖GG^H − I‖ = {err:e}")));
        }
        if (phase.norm() - 1.0).abs() > 1e-12 || (phase - expected).norm() > 1e-9 {
            return Err(Error::Generator(format!(
                "corner phase {phase} does not match {expected} for S = {s}"
            )));
        }
        Ok(Self {
            s,
            e: build_e(s, phase)?,
            g,
            phase,
        })
    }

    /// The Golden Code as the S = 2 perfect code.
    pub fn golden() -> Self {
        let k = GoldenConstants::get();
        Self {
            s: 2,
            g: k.g.clone(),
            phase: k.e[(1, 0)],
            e: k.e.clone(),
        }
    }

    /// Parses the generator text format:
    ///
    /// ```text
    /// S g_re g_im
    /// re im re im ...   (S lines, 2S numbers each)
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Generator("empty file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(Error::Generator(format!("header must be `S g_re g_im`, got `{header}`")));
        }
        let s: usize = h[0]
            .parse()
            .map_err(|_| Error::Generator(format!("bad dimension `{}`", h[0])))?;
        let phase = Complex64::new(parse_real(h[1])?, parse_real(h[2])?);
        standard_phase(s)?;
        let mut rows = Vec::with_capacity(s);
        for r in 0..s {
            let line = lines
                .next()
                .ok_or_else(|| Error::Generator(format!("expected {s} matrix rows, found {r}")))?;
            let nums = line.split_whitespace().map(parse_real).collect::<Result<Vec<f64>>>()?;
            if nums.len() != 2 * s {
                return Err(Error::Generator(format!("row {} has {} numbers, expected {}", r + 1, nums.len(), 2 * s)));
            }
            rows.push(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
        }
        if lines.next().is_some() {
            return Err(Error::Generator("trailing data after the matrix rows".into()));
        }
        Self::new(s, ComplexMatrix::from_rows(&rows)?, phase)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Generator(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn g(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn e(&self) -> &ComplexMatrix {
        &self.e
    }

    /// Diagonal of `Φ_j` (`j` is 1-based): ones for `k ≤ S+1−j`, the corner phase after.
    pub fn phi(&self, j: usize) -> Vec<Complex64> {
        assert!((1..=self.s).contains(&j), "group index out of range");
        (1..=self.s)
            .map(|k| if k <= self.s + 1 - j { Complex64::new(1.0, 0.0) } else { self.phase })
            .collect()
    }
}

fn parse_real(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Generator(format!("cannot parse `{tok}` as a number")))?;
    if !v.is_finite() {
        return Err(Error::Generator(format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

/// `X = Σ_j diag(G x_j) E^{j−1}`; `x` holds the S symbol vectors in order.
pub fn pstbc_encode(spec: &PerfectCodeSpec, x: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let s = spec.s;
    if x.len() != s || x.iter().any(|v| v.len() != s) {
        return Err(Error::Dimension(format!("expected {s} symbol vectors of length {s}")));
    }
    let mut out = ComplexMatrix::zeros(s, s);
    let mut power = ComplexMatrix::identity(s);
    for xj in x {
        let layer = &ComplexMatrix::from_diag(&spec.g.mul_vec(xj)) * &power;
        out = out.add(&layer)?;
        power = &power * &spec.e;
    }
    Ok(out)
}

/// Observation groups: group `j` (0-based) collects `Y[k][(k + j) mod S]`.
pub fn pcmb_group(y: &ComplexMatrix, s: usize) -> Result<Vec<Vec<Complex64>>> {
    if y.rows() != s || y.cols() != s {
        return Err(Error::Dimension(format!("expected a {s}x{s} observation, got {}x{}", y.rows(), y.cols())));
    }
    Ok((0..s).map(|j| (0..s).map(|k| y[(k, (k + j) % s)]).collect()).collect())
}

/// `Φ_j Λ G`, the effective matrix of group `j` (1-based).
pub fn group_matrix(spec: &PerfectCodeSpec, lambda: &[f64], j: usize) -> ComplexMatrix {
    let phi = spec.phi(j);
    let lg = spec.g.scale_rows(lambda);
    ComplexMatrix::from_fn(spec.s, spec.s, |r, c| phi[r] * lg[(r, c)])
}

fn realness_tol(spec: &PerfectCodeSpec) -> f64 {
    if spec.s == 2 {
        golden::REALNESS_TOL
    } else {
        REALNESS_TOL_EXTERNAL
    }
}

/// Per-group ML decoding of `Y = ΛX + N`.
///
/// Requires a real `R` for `ΛG = QR`; dimensions 3 and 6 (complex `R`, HEX
/// signalling) are rejected.
pub fn pcmb_decode(
    y: &ComplexMatrix,
    lambda: &[f64],
    spec: &PerfectCodeSpec,
    c: &Constellation,
) -> Result<DecodeResult> {
    let s = spec.s;
    if matches!(s, 3 | 6) {
        return Err(Error::UnsupportedDimension(format!(
            "decoding for S = {s} needs a complex-valued search over HEX constellations"
        )));
    }
    if lambda.len() != s {
        return Err(Error::Dimension(format!("{} singular values for S = {s}", lambda.len())));
    }
    let ch = effective_channel_for(lambda, &spec.g)?;
    let tol = realness_tol(spec);
    if ch.max_imag > tol {
        return Err(Error::UnsupportedDimension(format!(
            "R is complex for this generator (max |Im R| = {:e} > {tol:e})",
            ch.max_imag
        )));
    }
    let groups = pcmb_group(y, s)?;
    let rotated: Vec<Vec<Complex64>> = groups
        .iter()
        .enumerate()
        .map(|(j, yj)| golden::rotate(&ch.q, &spec.phi(j + 1), yj))
        .collect();
    let (symbols, subsystem_stats) = decode_groups(&rotated, &ch, c)?;

    let x: Vec<Vec<Complex64>> = symbols.chunks(s).map(|g| g.iter().map(|&k| c.point(k)).collect()).collect();
    let lx = pstbc_encode(spec, &x)?.scale_rows(lambda);
    let metric = y.sub(&lx)?.frobenius_norm_sqr();
    Ok(DecodeResult {
        symbols,
        metric,
        subsystem_stats,
    })
}

/// Brute force over all `M^S` symbol vectors of group `j` (1-based), in
/// lexicographic order of symbol indices.
pub fn group_exhaustive_ml(
    yj: &[Complex64],
    lambda: &[f64],
    spec: &PerfectCodeSpec,
    j: usize,
    c: &Constellation,
) -> Result<MlChoice<Vec<usize>>> {
    let s = spec.s;
    let m = c.order();
    let a = group_matrix(spec, lambda, j);
    let total = m.checked_pow(s as u32).filter(|&t| t <= 1 << 24).ok_or_else(|| {
        Error::Config(format!("exhaustive group search over {m}^{s} candidates is too large"))
    })?;
    let candidates = (0..total).map(|mut n| {
        let mut idx = vec![0; s];
        for k in (0..s).rev() {
            idx[k] = n % m;
            n /= m;
        }
        idx
    });
    exhaustive_ml(candidates, |idx| {
        let x: Vec<Complex64> = idx.iter().map(|&k| c.point(k)).collect();
        let ax = a.mul_vec(&x);
        vec_norm_sqr(&yj.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>())
    })
}
