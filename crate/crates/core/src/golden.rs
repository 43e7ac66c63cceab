//! Golden Code encoding and the beamformed receive chain.
//!
//! Under beamforming the receiver sees `Y = ΛX + N` with `Λ = diag(λ₁, λ₂)`.
//! Every entry of `ΛX` depends on exactly one of `x₁ = (s₁, s₂)` or
//! `x₂ = (s₃, s₄)`, so `Y` splits into two 2-vectors
//!
//! ```text
//! y₁ = (Y₁₁, Y₂₂) = ΛG x₁ + n₁
//! y₂ = (Y₁₂, Y₂₁) = ΦΛG x₂ + n₂,   Φ = diag(1, i)
//! ```
//!
//! With `ΛG = QR`, `R` is real for every `Λ`, so after rotating by `Q^H`
//! (and `Φ^H`) each group separates into independent real and imaginary
//! 2-layer lattice problems. The decoder solves all four with a sphere search
//! whose last layer is rounded, which costs at most √M nodes per problem.

use std::sync::LazyLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{self, LatticeProblem, SearchStats};
use crate::numerics::{qr, vec_norm_sqr, ComplexMatrix, Constellation, I};

/// Threshold on `max |Im R|` for the 2×2 effective channel.
pub const REALNESS_TOL: f64 = 1e-10;

/// Channels whose second singular value is at or below this are rejected.
pub const DEGENERATE_LAMBDA: f64 = 1e-12;

/// Golden ratio constants and the generator/shift matrices built from them.
#[derive(Debug, Clone)]
pub struct GoldenConstants {
    pub alpha: f64,
    pub beta: f64,
    /// Unitary generator, `1/√5` factor included.
    pub g: ComplexMatrix,
    /// Shift matrix `[[0, 1], [i, 0]]`.
    pub e: ComplexMatrix,
    inv_sqrt5: f64,
}

static CONSTANTS: LazyLock<GoldenConstants> = LazyLock::new(|| {
    let sqrt5 = 5f64.sqrt();
    let alpha = (1.0 + sqrt5) / 2.0;
    let beta = (1.0 - sqrt5) / 2.0;
    let raw = [
        [Complex64::new(1.0, beta), Complex64::new(alpha, -1.0)],
        [Complex64::new(1.0, alpha), Complex64::new(beta, -1.0)],
    ];
    let inv_sqrt5 = 1.0 / sqrt5;
    let g = ComplexMatrix::from_fn(2, 2, |r, c| raw[r][c] * inv_sqrt5);
    let e = ComplexMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![I, Complex64::new(0.0, 0.0)],
    ])
    .expect("2x2");
    GoldenConstants {
        alpha,
        beta,
        g,
        e,
        inv_sqrt5,
    }
});

impl GoldenConstants {
    pub fn get() -> &'static GoldenConstants {
        &CONSTANTS
    }

    /// `Φ = diag(1, i)`.
    pub fn phi() -> ComplexMatrix {
        ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), I])
    }
}

/// The four information symbols of one codeword, `x₁ = (s₁, s₂)`, `x₂ = (s₃, s₄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPair {
    pub x1: [Complex64; 2],
    pub x2: [Complex64; 2],
}

impl SymbolPair {
    pub fn new(s: [Complex64; 4]) -> Self {
        Self {
            x1: [s[0], s[1]],
            x2: [s[2], s[3]],
        }
    }

    /// Symbols from constellation indices in `(s₁, s₂, s₃, s₄)` order.
    pub fn from_indices(c: &Constellation, idx: &[usize; 4]) -> Self {
        Self::new(idx.map(|k| c.point(k)))
    }
}

/// Golden codeword from the entrywise closed form:
///
/// ```text
/// X = 1/√5 · [ (1+iβ)s₁ + (α−i)s₂     (1+iβ)s₃ + (α−i)s₄ ]
///            [ (i−α)s₃ + (1+iβ)s₄     (1+iα)s₁ + (β−i)s₂ ]
/// ```
pub fn golden_encode(pair: &SymbolPair) -> ComplexMatrix {
    let k = GoldenConstants::get();
    let (a, b) = (k.alpha, k.beta);
    let [s1, s2] = pair.x1;
    let [s3, s4] = pair.x2;
    let one_ib = Complex64::new(1.0, b);
    let a_mi = Complex64::new(a, -1.0);
    let i_ma = Complex64::new(-a, 1.0);
    let one_ia = Complex64::new(1.0, a);
    let b_mi = Complex64::new(b, -1.0);
    let x = [
        [one_ib * s1 + a_mi * s2, one_ib * s3 + a_mi * s4],
        [i_ma * s3 + one_ib * s4, one_ia * s1 + b_mi * s2],
    ];
    ComplexMatrix::from_fn(2, 2, |r, c| x[r][c] * k.inv_sqrt5)
}

/// Golden codeword from the layered form `X = diag(G x₁) + diag(G x₂) E`.
pub fn golden_encode_lattice(pair: &SymbolPair) -> ComplexMatrix {
    let k = GoldenConstants::get();
    let d1 = k.g.mul_vec(&pair.x1);
    let d2 = k.g.mul_vec(&pair.x2);
    let first = ComplexMatrix::from_diag(&d1);
    let second = &ComplexMatrix::from_diag(&d2) * &k.e;
    first.add(&second).expect("2x2")
}

/// `(y₁, y₂)` picked out of a 2×2 observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledReceive {
    /// `(Y₁₁, Y₂₂)`, depends on `x₁` only.
    pub y1: [Complex64; 2],
    /// `(Y₁₂, Y₂₁)`, depends on `x₂` only.
    pub y2: [Complex64; 2],
    pub phi: ComplexMatrix,
}

pub fn receive_decompose(y: &ComplexMatrix) -> Result<DecoupledReceive> {
    if y.rows() != 2 || y.cols() != 2 {
        return Err(Error::Dimension(format!("expected a 2x2 observation, got {}x{}", y.rows(), y.cols())));
    }
    Ok(DecoupledReceive {
        y1: [y[(0, 0)], y[(1, 1)]],
        y2: [y[(0, 1)], y[(1, 0)]],
        phi: GoldenConstants::phi(),
    })
}

/// QR factors of `ΛG` together with the realness check on `R`.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub q: ComplexMatrix,
    /// Complex `R` exactly as returned by the factorisation.
    pub r_complex: ComplexMatrix,
    /// Real part of `R`, row major.
    pub r: Vec<Vec<f64>>,
    /// `max |Im R_{jk}|`.
    pub max_imag: f64,
}

fn check_lambda(lambda: &[f64]) -> Result<()> {
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("singular values"));
    }
    if lambda.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Config("singular values must be in decreasing order".into()));
    }
    match lambda.last() {
        Some(&smallest) if smallest > DEGENERATE_LAMBDA => Ok(()),
        Some(&smallest) => Err(Error::DegenerateChannel(smallest)),
        None => Err(Error::Dimension("no singular values".into())),
    }
}

/// QR of `Λ G` for an arbitrary generator. Callers apply their own realness gate.
pub(crate) fn effective_channel_for(lambda: &[f64], g: &ComplexMatrix) -> Result<EffectiveChannel> {
    if lambda.len() != g.rows() {
        return Err(Error::Dimension(format!("{} singular values for a {}x{} generator", lambda.len(), g.rows(), g.cols())));
    }
    check_lambda(lambda)?;
    let f = qr(&g.scale_rows(lambda))?;
    Ok(EffectiveChannel {
        max_imag: f.r.max_abs_imag(),
        r: f.r.real_part(),
        q: f.q,
        r_complex: f.r,
    })
}

/// `ΛG = QR` for the Golden generator, with `R` checked to be real.
pub fn effective_channel(lambda: &[f64; 2]) -> Result<EffectiveChannel> {
    let ch = effective_channel_for(lambda, &GoldenConstants::get().g)?;
    if ch.max_imag > REALNESS_TOL {
        return Err(Error::ComplexR { max_imag: ch.max_imag, tol: REALNESS_TOL });
    }
    Ok(ch)
}

/// Real lattice problem for one half (real or imaginary) of a rotated group.
pub type RealSubsystem = LatticeProblem;

/// Splits `ỹ = R x + ñ` into the real-part and imaginary-part problems,
/// both sharing `R` and the PAM level list.
pub fn split_real(ytilde: &[Complex64], r: &[Vec<f64>], levels: &[f64]) -> Result<[RealSubsystem; 2]> {
    let n = ytilde.len();
    let lv = vec![levels.to_vec(); n];
    let re = LatticeProblem::new(r.to_vec(), ytilde.iter().map(|z| z.re).collect(), lv.clone())?;
    let im = LatticeProblem::new(r.to_vec(), ytilde.iter().map(|z| z.im).collect(), lv)?;
    Ok([re, im])
}

/// `Q^H Φ^H y` for a group observation (`phi` diagonal).
pub(crate) fn rotate(q: &ComplexMatrix, phi_diag: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let derotated: Vec<Complex64> = y.iter().zip(phi_diag).map(|(v, p)| v * p.conj()).collect();
    q.adjoint().mul_vec(&derotated)
}

/// Decisions and instrumentation of one codeword decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Constellation index of each symbol, in `x₁, x₂, …` order.
    pub symbols: Vec<usize>,
    /// `‖Y − ΛX̂‖²`.
    pub metric: f64,
    /// One entry per real subsystem: `(group 1 re, group 1 im, group 2 re, …)`.
    pub subsystem_stats: Vec<SearchStats>,
}

impl DecodeResult {
    pub fn max_nodes(&self) -> u64 {
        self.subsystem_stats.iter().map(|s| s.nodes_visited).max().unwrap_or(0)
    }
}

/// Solves the real/imaginary problems of every group and reassembles symbols.
pub(crate) fn decode_groups(
    groups: &[Vec<Complex64>],
    ch: &EffectiveChannel,
    c: &Constellation,
) -> Result<(Vec<usize>, Vec<SearchStats>)> {
    let mut symbols = Vec::new();
    let mut stats = Vec::new();
    for ytilde in groups {
        let [re, im] = split_real(ytilde, &ch.r, c.pam_levels())?;
        let sre = lattice::real_sd(&re, true);
        let sim = lattice::real_sd(&im, true);
        symbols.extend(sre.indices.iter().zip(&sim.indices).map(|(&a, &b)| c.index_of(a, b)));
        stats.push(sre.stats);
        stats.push(sim.stats);
    }
    Ok((symbols, stats))
}

/// ML decoding of a beamformed Golden codeword from `Y = ΛX + N`.
pub fn gcmb_decode(y: &ComplexMatrix, lambda: &[f64; 2], c: &Constellation) -> Result<DecodeResult> {
    let parts = receive_decompose(y)?;
    let ch = effective_channel(lambda)?;
    let phi = parts.phi.diagonal();
    let ones = [Complex64::new(1.0, 0.0); 2];
    let groups = vec![rotate(&ch.q, &ones, &parts.y1), rotate(&ch.q, &phi, &parts.y2)];
    let (symbols, subsystem_stats) = decode_groups(&groups, &ch, c)?;
    let idx = [symbols[0], symbols[1], symbols[2], symbols[3]];
    let x = golden_encode(&SymbolPair::from_indices(c, &idx));
    let metric = y.sub(&ComplexMatrix::from_real_diag(lambda).matmul(&x)?)?.frobenius_norm_sqr();
    Ok(DecodeResult {
        symbols,
        metric,
        subsystem_stats,
    })
}

/// All `M⁴` Golden codewords, indexed lexicographically by `(s₁, s₂, s₃, s₄)`.
#[derive(Debug, Clone)]
pub struct Codebook {
    order: usize,
    words: Vec<ComplexMatrix>,
}

/// Largest order accepted by [`Codebook::new`]; 16⁴ = 65 536 codewords.
pub const CODEBOOK_MAX_ORDER: usize = 16;

impl Codebook {
    pub fn new(c: &Constellation) -> Result<Self> {
        let m = c.order();
        if m > CODEBOOK_MAX_ORDER {
            return Err(Error::Config(format!(
                "exhaustive search limited to M <= {CODEBOOK_MAX_ORDER}; M = {m} needs {} codewords",
                (m as u128).pow(4)
            )));
        }
        let words = (0..m.pow(4))
            .map(|n| golden_encode(&SymbolPair::from_indices(c, &Self::split(m, n))))
            .collect();
        Ok(Self { order: m, words })
    }

    fn split(m: usize, n: usize) -> [usize; 4] {
        [n / (m * m * m), (n / (m * m)) % m, (n / m) % m, n % m]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, n: usize) -> &ComplexMatrix {
        &self.words[n]
    }

    pub fn indices(&self, n: usize) -> [usize; 4] {
        Self::split(self.order, n)
    }

    /// Joint ML over the whole codebook for `Y = H X + N` with any 2×2 `H`.
    pub fn ml_decode(&self, y: &ComplexMatrix, h: &ComplexMatrix) -> Result<(usize, f64)> {
        let choice = lattice::exhaustive_ml(self.words.iter(), |x| residual(y, h, x))?;
        Ok((choice.index, choice.metric))
    }
}

/// `‖Y − H X‖²` without allocating.
fn residual(y: &ComplexMatrix, h: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let hx = h[(r, 0)] * x[(0, c)] + h[(r, 1)] * x[(1, c)];
            acc += (y[(r, c)] - hx).norm_sqr();
        }
    }
    acc
}

/// Smallest `|det(X − X̂)|` over all distinct pairs of 4-QAM Golden codewords.
pub fn min_det_4qam() -> f64 {
    let c = Constellation::qam(4).expect("4-QAM");
    let book = Codebook::new(&c).expect("small codebook");
    let mut min = f64::INFINITY;
    for a in 0..book.len() {
        for b in 0..book.len() {
            if a == b {
                continue;
            }
            let d = book.word(a).sub(book.word(b)).expect("2x2");
            let det = (d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)]).norm();
            min = min.min(det);
        }
    }
    min
}

/// `‖y − M x‖²` for a 2-vector equation.
pub fn group_residual(y: &[Complex64], m: &ComplexMatrix, x: &[Complex64]) -> f64 {
    let mx = m.mul_vec(x);
    let diff: Vec<Complex64> = y.iter().zip(&mx).map(|(a, b)| a - b).collect();
    vec_norm_sqr(&diff)
}
