//! Real scalar fields on the unit torus 𝕋² in spectral and grid form.
//!
//! A [`SpectralField`] stores the Fourier coefficients `û(n)` of a real
//! field for every `n` in the disc `ℤ²_N = {|n| ≤ N}`; a [`GridField`]
//! stores samples on the uniform `M × M` collocation grid
//! `{(j₁/M, j₂/M)}`. The two are related by
//!
//! ```text
//!     u(x) = Σ_{|n| ≤ N} û(n) e^{2πi n·x},      û(n) = ∫_𝕋² u(x) e^{−2πi n·x} dx.
//! ```
//!
//! Lattice metadata (index lists, multipliers and FFT plans) is built once
//! per `(N, M)` and shared behind an `Arc`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use num::complex::Complex64;
use num::Zero;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const FIELD_MAGIC: &[u8; 8] = b"SNLWFLD\x01";

/// Smallest even integer `≥ min` whose only prime factors are 2, 3 and 5.
pub fn fft_friendly_size(min: usize) -> usize {
    let mut m = min.max(2);
    if m % 2 == 1 {
        m += 1;
    }
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 2;
    }
}

struct Fft2 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let m = self.size;
        debug_assert_eq!(buf.len(), m * m);
        let mut scratch = vec![Complex64::zero(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, m);
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, m);
    }
}

fn transpose_square(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

struct LatticeData {
    radius: usize,
    grid: usize,
    indices: Vec<[i32; 2]>,
    abs: Vec<f64>,
    bracket: Vec<f64>,
    slots: Vec<usize>,
    half: Vec<usize>,
    mirror: Vec<usize>,
    lookup: Vec<u32>,
    fft: Fft2,
}

impl LatticeData {
    fn build(radius: usize, grid: usize) -> Self {
        let n = radius as i32;
        let side = 2 * radius + 1;
        let mut indices = Vec::new();
        let mut lookup = vec![u32::MAX; side * side];
        for n1 in -n..=n {
            for n2 in -n..=n {
                if (n1 * n1 + n2 * n2) as i64 <= (n as i64) * (n as i64) {
                    lookup[((n1 + n) as usize) * side + (n2 + n) as usize] = indices.len() as u32;
                    indices.push([n1, n2]);
                }
            }
        }
        let abs: Vec<f64> = indices.iter().map(|k| norm_sq(*k).sqrt()).collect();
        let bracket: Vec<f64> = indices.iter().map(|k| (1.0 + norm_sq(*k)).sqrt()).collect();
        let wrap = |k: i32| -> usize { k.rem_euclid(grid as i32) as usize };
        let slots = indices.iter().map(|k| wrap(k[0]) * grid + wrap(k[1])).collect();
        let find = |k: [i32; 2]| -> usize {
            lookup[((k[0] + n) as usize) * side + (k[1] + n) as usize] as usize
        };
        let mirror = indices.iter().map(|k| find([-k[0], -k[1]])).collect();
        let half = indices
            .iter()
            .enumerate()
            .filter(|(_, k)| in_half_lattice(**k))
            .map(|(i, _)| i)
            .collect();
        LatticeData {
            radius,
            grid,
            indices,
            abs,
            bracket,
            slots,
            half,
            mirror,
            lookup,
            fft: Fft2::new(grid),
        }
    }
}

fn norm_sq(k: [i32; 2]) -> f64 {
    let (a, b) = (k[0] as f64, k[1] as f64);
    a * a + b * b
}

/// `true` for `n ∈ 𝓘 ∪ {0}` where `𝓘 = (ℤ₊ × {0}) ∪ (ℤ × ℤ₊)`.
pub fn in_half_lattice(k: [i32; 2]) -> bool {
    k[1] > 0 || (k[1] == 0 && k[0] >= 0)
}

fn lattice_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<LatticeData>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<LatticeData>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The truncated frequency set `ℤ²_N` together with an `M × M` collocation grid.
///
/// Invariants: `(0,0)` is an index, indices are closed under `n ↦ −n`, and
/// `M ≥ 2N + 2` with `M` even.
#[derive(Clone)]
pub struct FrequencyLattice {
    inner: Arc<LatticeData>,
}

impl std::fmt::Debug for FrequencyLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrequencyLattice")
            .field("radius", &self.radius())
            .field("grid", &self.grid())
            .finish()
    }
}

impl PartialEq for FrequencyLattice {
    fn eq(&self, other: &Self) -> bool {
        self.radius() == other.radius() && self.grid() == other.grid()
    }
}

impl Eq for FrequencyLattice {}

impl FrequencyLattice {
    /// Lattice of radius `N` with the default grid `2·(2N+1)` rounded up to an
    /// FFT-friendly size; cubic products of band-limited fields are alias free.
    pub fn new(radius: usize) -> Self {
        Self::with_grid(radius, fft_friendly_size(2 * (2 * radius + 1))).expect("default grid is valid")
    }

    /// Lattice whose grid resolves `P_N(u^degree)` exactly, i.e. `M > (degree+1)·N`.
    pub fn for_degree(radius: usize, degree: usize) -> Self {
        let min = (2 * (2 * radius + 1)).max((degree + 1) * radius + 1);
        Self::with_grid(radius, fft_friendly_size(min)).expect("derived grid is valid")
    }

    pub fn with_grid(radius: usize, grid: usize) -> Result<Self> {
        if grid % 2 != 0 || grid < 2 * radius + 2 {
            return Err(Error::invalid(format!(
                "grid size {grid} must be even and at least 2N+2 = {}",
                2 * radius + 2
            )));
        }
        let mut cache = lattice_cache().lock().expect("lattice cache poisoned");
        let inner = cache
            .entry((radius, grid))
            .or_insert_with(|| Arc::new(LatticeData::build(radius, grid)))
            .clone();
        Ok(FrequencyLattice { inner })
    }

    pub fn radius(&self) -> usize {
        self.inner.radius
    }

    pub fn grid(&self) -> usize {
        self.inner.grid
    }

    pub fn len(&self) -> usize {
        self.inner.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.indices.is_empty()
    }

    pub fn indices(&self) -> &[[i32; 2]] {
        &self.inner.indices
    }

    /// `|n|` for each index.
    pub fn abs(&self) -> &[f64] {
        &self.inner.abs
    }

    /// `⟨n⟩ = (1 + |n|²)^{1/2}` for each index.
    pub fn bracket(&self) -> &[f64] {
        &self.inner.bracket
    }

    /// Positions (into [`indices`](Self::indices)) of the half lattice `𝓘 ∪ {0}`.
    pub fn half(&self) -> &[usize] {
        &self.inner.half
    }

    /// Position of `−n` for each index.
    pub fn mirror(&self) -> &[usize] {
        &self.inner.mirror
    }

    pub fn position(&self, k: [i32; 2]) -> Option<usize> {
        let n = self.radius() as i32;
        if k[0].abs() > n || k[1].abs() > n {
            return None;
        }
        let side = 2 * self.radius() + 1;
        let p = self.inner.lookup[((k[0] + n) as usize) * side + (k[1] + n) as usize];
        (p != u32::MAX).then_some(p as usize)
    }

    /// Writes the coefficients into a zeroed `M × M` Fourier buffer.
    pub fn scatter(&self, coeffs: &[Complex64], buf: &mut [Complex64]) {
        buf.iter_mut().for_each(|c| *c = Complex64::zero());
        for (&slot, &c) in self.inner.slots.iter().zip(coeffs) {
            buf[slot] = c;
        }
    }

    /// Reads the normalised coefficients of `ℤ²_N` from a forward-transformed buffer.
    pub fn gather(&self, buf: &[Complex64], out: &mut [Complex64]) {
        let scale = 1.0 / (self.grid() * self.grid()) as f64;
        for (o, &slot) in out.iter_mut().zip(&self.inner.slots) {
            *o = buf[slot] * scale;
        }
    }

    /// Unnormalised synthesis `Σ c(k) e^{+2πi k·j/M}` in place.
    pub fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inner.fft.run(&self.inner.fft.inverse, buf);
    }

    /// Unnormalised analysis `Σ u(j) e^{−2πi k·j/M}` in place.
    pub fn fft_forward(&self, buf: &mut [Complex64]) {
        self.inner.fft.run(&self.inner.fft.forward, buf);
    }

    /// Same index set on a different grid.
    pub fn regrid(&self, grid: usize) -> Result<Self> {
        Self::with_grid(self.radius(), grid)
    }
}

/// Hermitian-symmetric Fourier coefficients of a real field, indexed like
/// [`FrequencyLattice::indices`].
#[derive(Clone, Debug)]
pub struct SpectralField {
    lattice: FrequencyLattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: &FrequencyLattice) -> Self {
        SpectralField { lattice: lattice.clone(), coeffs: vec![Complex64::zero(); lattice.len()] }
    }

    pub fn from_coeffs(lattice: &FrequencyLattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::LatticeMismatch(format!(
                "{} coefficients for a lattice with {} modes",
                coeffs.len(),
                lattice.len()
            )));
        }
        Ok(SpectralField { lattice: lattice.clone(), coeffs })
    }

    /// Builds a field from `n ↦ û(n)` evaluated on the half lattice; the
    /// other half is filled by conjugation and `û(0)` is made real.
    pub fn from_half_fn(lattice: &FrequencyLattice, mut f: impl FnMut([i32; 2]) -> Complex64) -> Self {
        let mut field = Self::zeros(lattice);
        for &p in lattice.half() {
            let k = lattice.indices()[p];
            field.set_mode(k, f(k));
        }
        field
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `û(n)`, zero outside the lattice.
    pub fn coeff(&self, k: [i32; 2]) -> Complex64 {
        self.lattice.position(k).map_or(Complex64::zero(), |p| self.coeffs[p])
    }

    /// Sets `û(n) = c` and `û(−n) = c̄`; the zero mode keeps only `Re c`.
    pub fn set_mode(&mut self, k: [i32; 2], c: Complex64) {
        let Some(p) = self.lattice.position(k) else { return };
        if k == [0, 0] {
            self.coeffs[p] = Complex64::new(c.re, 0.0);
        } else {
            self.coeffs[p] = c;
            let q = self.lattice.mirror()[p];
            self.coeffs[q] = c.conj();
        }
    }

    /// Largest `|û(−n) − conj(û(n))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mirror = self.lattice.mirror();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| (self.coeffs[mirror[p]] - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_grid(&self) -> GridField {
        let m = self.lattice.grid();
        let mut buf = vec![Complex64::zero(); m * m];
        self.lattice.scatter(&self.coeffs, &mut buf);
        self.lattice.fft_inverse(&mut buf);
        GridField { lattice: self.lattice.clone(), values: buf.iter().map(|c| c.re).collect() }
    }

    /// Copies the coefficients into `target`, dropping modes it does not contain.
    pub fn embed(&self, target: &FrequencyLattice) -> SpectralField {
        let mut out = SpectralField::zeros(target);
        for (k, c) in self.lattice.indices().iter().zip(&self.coeffs) {
            if let Some(p) = target.position(*k) {
                out.coeffs[p] = *c;
            }
        }
        out
    }

    /// Coefficient-wise `self − other` on the larger of the two lattices.
    pub fn difference(&self, other: &SpectralField) -> SpectralField {
        let target = if self.lattice.radius() >= other.lattice.radius() {
            &self.lattice
        } else {
            &other.lattice
        };
        let mut out = self.embed(target);
        for (k, c) in other.lattice.indices().iter().zip(&other.coeffs) {
            if let Some(p) = target.position(*k) {
                out.coeffs[p] -= *c;
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Applies a real multiplier `m(n)` given per lattice position.
    pub fn multiplied(&self, mut multiplier: impl FnMut(usize) -> f64) -> SpectralField {
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(p, c)| c * multiplier(p)).collect(),
        }
    }

    /// Binary container: magic, `N` and `M` as little-endian `u64`, then the
    /// `(2N+1)²` square of coefficients in row-major order (`n₁` outer,
    /// both running from `−N` to `N`) as little-endian `f64` pairs `(re, im)`.
    /// Modes outside the disc are written as zeros.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.lattice.radius() as i32;
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&(self.lattice.radius() as u64).to_le_bytes())?;
        w.write_all(&(self.lattice.grid() as u64).to_le_bytes())?;
        for n1 in -n..=n {
            for n2 in -n..=n {
                let c = self.coeff([n1, n2]);
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<SpectralField> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Format("bad field magic".into()));
        }
        let radius = read_u64(&mut r)? as usize;
        let grid = read_u64(&mut r)? as usize;
        let lattice = FrequencyLattice::with_grid(radius, grid)?;
        let mut field = SpectralField::zeros(&lattice);
        let n = radius as i32;
        for n1 in -n..=n {
            for n2 in -n..=n {
                let c = Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?);
                match lattice.position([n1, n2]) {
                    Some(p) => field.coeffs[p] = c,
                    None if c != Complex64::zero() => {
                        return Err(Error::Format(format!("nonzero coefficient outside the disc at ({n1},{n2})")))
                    }
                    None => {}
                }
            }
        }
        Ok(field)
    }

    /// CSV with header `n1,n2,re,im`, one row per lattice index.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n1,n2,re,im")?;
        for (k, c) in self.lattice.indices().iter().zip(&self.coeffs) {
            writeln!(w, "{},{},{:e},{:e}", k[0], k[1], c.re, c.im)?;
        }
        Ok(())
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Real samples on the uniform `M × M` grid, row-major with `values[j₁·M + j₂]`
/// the value at `(j₁/M, j₂/M)`.
#[derive(Clone, Debug)]
pub struct GridField {
    lattice: FrequencyLattice,
    values: Vec<f64>,
}

impl GridField {
    pub fn from_values(lattice: &FrequencyLattice, values: Vec<f64>) -> Result<Self> {
        let m = lattice.grid();
        if values.len() != m * m {
            return Err(Error::LatticeMismatch(format!("{} samples for a {m}×{m} grid", values.len())));
        }
        Ok(GridField { lattice: lattice.clone(), values })
    }

    pub fn from_fn(lattice: &FrequencyLattice, f: impl Fn(f64, f64) -> f64) -> Self {
        let m = lattice.grid();
        let h = 1.0 / m as f64;
        let values = (0..m * m).map(|i| f((i / m) as f64 * h, (i % m) as f64 * h)).collect();
        GridField { lattice: lattice.clone(), values }
    }

    pub fn constant(lattice: &FrequencyLattice, c: f64) -> Self {
        let m = lattice.grid();
        GridField { lattice: lattice.clone(), values: vec![c; m * m] }
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { lattice: self.lattice.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        crate::stats::kahan_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// Discrete Fourier coefficients on `ℤ²_N` (exact for band-limited data).
    pub fn to_spectral(&self) -> SpectralField {
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.lattice.fft_forward(&mut buf);
        let mut coeffs = vec![Complex64::zero(); self.lattice.len()];
        self.lattice.gather(&buf, &mut coeffs);
        SpectralField { lattice: self.lattice.clone(), coeffs }
    }
}

/// Dirichlet projection `P_{N'}`: keeps `|n| ≤ N'`. The output radius is
/// `min(N, N')` on the same grid.
pub fn project_dirichlet(f: &SpectralField, radius: usize) -> SpectralField {
    if radius >= f.lattice.radius() {
        return f.clone();
    }
    let target = FrequencyLattice::with_grid(radius, f.lattice.grid()).expect("smaller radius fits the grid");
    f.embed(&target)
}

/// Mollification `P^ρ_N f = ρ_N * f`: multiplies `û(n)` by `kernel_hat(n/N)`,
/// where `kernel_hat` is the Fourier transform of a mean-one kernel on ℝ².
pub fn mollify(f: &SpectralField, kernel_hat: impl Fn([f64; 2]) -> f64, scale: f64) -> Result<SpectralField> {
    let at_zero = kernel_hat([0.0, 0.0]);
    if at_zero != 1.0 {
        return Err(Error::invalid(format!("kernel must have unit mass, kernel_hat(0) = {at_zero}")));
    }
    if !(scale > 0.0) {
        return Err(Error::invalid("mollifier scale must be positive"));
    }
    let idx = f.lattice.indices();
    Ok(f.multiplied(|p| kernel_hat([idx[p][0] as f64 / scale, idx[p][1] as f64 / scale])))
}

/// `𝟙_{|ξ| ≤ 1}`, the kernel of the Dirichlet projection.
pub fn sharp_cutoff(xi: [f64; 2]) -> f64 {
    if xi[0] * xi[0] + xi[1] * xi[1] <= 1.0 {
        1.0
    } else {
        0.0
    }
}

/// `exp(−|ξ|²)`.
pub fn gaussian_kernel(xi: [f64; 2]) -> f64 {
    (-(xi[0] * xi[0] + xi[1] * xi[1])).exp()
}

/// Bessel potential `⟨∇⟩^s`: multiplies `û(n)` by `⟨n⟩^s`.
pub fn bessel_potential(f: &SpectralField, s: f64) -> SpectralField {
    if s == 0.0 {
        return f.clone();
    }
    let bracket = f.lattice.bracket();
    f.multiplied(|p| bracket[p].powf(s))
}

/// `‖f‖_{H^s} = (Σ ⟨n⟩^{2s} |û(n)|²)^{1/2}`.
pub fn h_norm(f: &SpectralField, s: f64) -> f64 {
    let bracket = f.lattice.bracket();
    let terms = f.coeffs.iter().zip(bracket).map(|(c, b)| b.powf(2.0 * s) * c.norm_sqr());
    crate::stats::kahan_sum(terms).sqrt()
}

/// Grid-average estimate of `‖g‖_{L^r(𝕋²)}`; `r = ∞` gives the grid maximum.
pub fn lr_norm(g: &GridField, r: f64) -> f64 {
    assert!(r >= 1.0, "L^r norm needs r ≥ 1, got {r}");
    if r.is_infinite() {
        return g.max_abs();
    }
    let n = g.values.len() as f64;
    let mean = crate::stats::kahan_sum(g.values.iter().map(|v| v.abs().powf(r))) / n;
    mean.powf(1.0 / r)
}

/// `(∫₀ᵀ ‖g(t)‖_{L^r}^q dt)^{1/q}` by the composite trapezoidal rule on a
/// uniform time grid with spacing `dt`; `q = ∞` takes the sup over samples.
pub fn strichartz_norm(series: &[GridField], q: f64, r: f64, dt: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::invalid("empty time series"));
    }
    if !(q >= 1.0) || !(r >= 1.0) {
        return Err(Error::invalid(format!("exponents must be ≥ 1, got q = {q}, r = {r}")));
    }
    let norms: Vec<f64> = series.iter().map(|g| lr_norm(g, r)).collect();
    if q.is_infinite() {
        return Ok(norms.iter().fold(0.0, |m, &v| m.max(v)));
    }
    Ok(trapezoid(norms.iter().map(|v| v.powf(q)), dt).powf(1.0 / q))
}

/// `‖g‖²_{H^s}` from every Fourier bin of the grid, not just `ℤ²_N`.
///
/// Exact for a grid field whose spectrum is resolved without aliasing, e.g. a
/// product of band-limited fields on a sufficiently fine grid.
pub fn h_norm_sq_grid(g: &GridField, s: f64) -> f64 {
    let m = g.lattice.grid();
    let mut buf: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    g.lattice.fft_forward(&mut buf);
    let norm = 1.0 / (m * m) as f64;
    let weights = bin_multipliers(m, 2.0 * s);
    crate::stats::kahan_sum(buf.iter().zip(&weights).map(|(c, w)| w * (c * norm).norm_sqr()))
}

/// Grid maximum of `|⟨∇⟩^s g|` using every Fourier bin; an estimator of the
/// `W^{s,∞}` norm.
pub fn winf_estimate(g: &GridField, s: f64) -> f64 {
    let m = g.lattice.grid();
    let mut buf: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    g.lattice.fft_forward(&mut buf);
    let norm = 1.0 / (m * m) as f64;
    for (c, w) in buf.iter_mut().zip(bin_multipliers(m, s)) {
        *c *= w * norm;
    }
    g.lattice.fft_inverse(&mut buf);
    buf.iter().fold(0.0, |acc, c| acc.max(c.re.abs()))
}

/// `⟨k⟩^power` for every bin of an `m × m` transform, frequencies wrapped to `(−m/2, m/2]`.
fn bin_multipliers(m: usize, power: f64) -> Vec<f64> {
    let wrap = |j: usize| -> f64 {
        let j = j as i64;
        let m = m as i64;
        (if j > m / 2 { j - m } else { j }) as f64
    };
    (0..m * m)
        .map(|i| {
            let (a, b) = (wrap(i / m), wrap(i % m));
            (1.0 + a * a + b * b).powf(power / 2.0)
        })
        .collect()
}

pub(crate) fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let terms = values.enumerate().map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v } else { v });
    dt * crate::stats::kahan_sum(terms)
}
