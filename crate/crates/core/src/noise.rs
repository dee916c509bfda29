//! Keyed Brownian drivers for the Fourier modes of space-time white noise.
//!
//! Every mode `n` of the half lattice `𝓘 ∪ {0}` owns an independent ChaCha8
//! stream selected by `n`, under a key derived from `(seed, replica)`. The
//! randomness of step `j` sits at a fixed word offset of that stream, so a
//! path is a pure function of `(seed, replica, n, j)`: restricting the radius,
//! reordering work across threads, or reading steps out of order never changes
//! a draw. Modes with `n ∉ 𝓘` are realised as conjugates.
//!
//! Each mode-step carries six standard normals: three for the real part and
//! three for the imaginary part. The first of each triple is the Brownian
//! increment; the other two complete the exact joint law used by
//! [`crate::convolution`].

use std::io::Write;

use num::complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::lattice::{FrequencyLattice, SpectralField};

/// Standard normals drawn per mode and step.
pub const NORMALS_PER_STEP: usize = 6;
const WORDS_PER_STEP: u128 = 2 * NORMALS_PER_STEP as u128;
const PATH_MAGIC: &[u8; 8] = b"SNLWPTH\x01";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    pub seed: u64,
    pub radius: usize,
    pub dt: f64,
    pub horizon: f64,
    pub replica: u64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("noise step must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt * (1.0 - 1e-12)) {
            return Err(Error::invalid(format!(
                "horizon {} shorter than one step {}",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }

    /// Number of steps covering `[0, T]`.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Same configuration for another replica.
    pub fn with_replica(&self, replica: u64) -> NoiseConfig {
        NoiseConfig { replica, ..*self }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, replica: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(replica.wrapping_add(0x5EED));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

fn stream_id(k: [i32; 2]) -> u64 {
    ((k[0] as u32 as u64) << 32) | k[1] as u32 as u64
}

fn box_muller(a: u64, b: u64) -> (f64, f64) {
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

fn read_normals(rng: &mut ChaCha8Rng) -> [f64; NORMALS_PER_STEP] {
    let mut out = [0.0; NORMALS_PER_STEP];
    for pair in out.chunks_exact_mut(2) {
        let (x, y) = box_muller(rng.next_u64(), rng.next_u64());
        pair[0] = x;
        pair[1] = y;
    }
    out
}

/// A lazily evaluated realisation of the mode drivers on `ℤ²_N × {0..steps}`.
///
/// Cloning is cheap and the path never changes after construction.
#[derive(Clone, Debug)]
pub struct ModePath {
    config: NoiseConfig,
    lattice: FrequencyLattice,
    key: [u8; 32],
}

impl PartialEq for ModePath {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
    }
}

impl ModePath {
    pub fn config(&self) -> &NoiseConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn steps(&self) -> usize {
        self.config.steps()
    }

    pub fn radius(&self) -> usize {
        self.config.radius
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    fn rng_for(&self, k: [i32; 2], step: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream_id(k));
        rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        rng
    }

    /// The six standard normals of mode `n ∈ 𝓘 ∪ {0}` at `step`.
    pub fn normals(&self, k: [i32; 2], step: usize) -> [f64; NORMALS_PER_STEP] {
        read_normals(&mut self.rng_for(k, step))
    }

    /// `Δβ̃_n(j)`: real with variance `dt` at `n = 0`, otherwise complex with
    /// real and imaginary parts of variance `dt/2` each; `Δβ̃_{−n} = conj Δβ̃_n`.
    pub fn increment(&self, k: [i32; 2], step: usize) -> Complex64 {
        let rdt = self.config.dt.sqrt();
        let flip = !crate::lattice::in_half_lattice(k);
        let base = if flip { [-k[0], -k[1]] } else { k };
        let z = self.normals(base, step);
        let c = if base == [0, 0] {
            Complex64::new(rdt * z[0], 0.0)
        } else {
            Complex64::new(z[0], z[3]) * (rdt * std::f64::consts::FRAC_1_SQRT_2)
        };
        if flip {
            c.conj()
        } else {
            c
        }
    }

    /// Increments of every lattice mode at `step`, as a Hermitian field.
    pub fn increment_field(&self, step: usize) -> SpectralField {
        SpectralField::from_half_fn(&self.lattice, |k| self.increment(k, step))
    }

    /// `β̃_n(t_j) = Σ_{i<j} Δβ̃_n(i)`.
    pub fn brownian(&self, k: [i32; 2], steps: usize) -> Complex64 {
        (0..steps).map(|j| self.increment(k, j)).sum()
    }

    /// Sequential reader over the half lattice, positioned at step 0.
    pub fn cursor(&self) -> PathCursor {
        let streams = self
            .lattice
            .half()
            .iter()
            .map(|&p| self.rng_for(self.lattice.indices()[p], 0))
            .collect();
        PathCursor { path: self.clone(), streams, next_step: 0 }
    }

    /// Restriction to `|n| ≤ N′`; draws on the retained modes are unchanged.
    pub fn restrict(&self, radius: usize) -> Result<ModePath> {
        if radius > self.config.radius {
            return Err(Error::invalid(format!(
                "cannot restrict a radius {} path to radius {radius}",
                self.config.radius
            )));
        }
        Ok(ModePath {
            config: NoiseConfig { radius, ..self.config },
            lattice: FrequencyLattice::new(radius),
            key: self.key,
        })
    }

    /// Audit dump: magic, seed, replica, radius and step count as `u64`, `dt`
    /// as `f64`, then per step and per half-lattice mode the increment
    /// `(re, im)`; all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(PATH_MAGIC)?;
        for v in [self.config.seed, self.config.replica, self.config.radius as u64, self.steps() as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.config.dt.to_le_bytes())?;
        for j in 0..self.steps() {
            for &p in self.lattice.half() {
                let c = self.increment(self.lattice.indices()[p], j);
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Builds the path for `config`. Sampling is deferred: draws are generated on
/// demand from the keyed streams.
pub fn sample_path(config: NoiseConfig) -> Result<ModePath> {
    config.validate()?;
    Ok(ModePath {
        config,
        lattice: FrequencyLattice::new(config.radius),
        key: derive_key(config.seed, config.replica),
    })
}

/// Streaming access to the per-step normals of every half-lattice mode, in
/// the order of [`FrequencyLattice::half`].
#[derive(Clone)]
pub struct PathCursor {
    path: ModePath,
    streams: Vec<ChaCha8Rng>,
    next_step: usize,
}

impl PathCursor {
    /// Normals for `step`; sequential calls avoid reseeking the streams.
    pub fn read(&mut self, step: usize, out: &mut Vec<[f64; NORMALS_PER_STEP]>) {
        if step != self.next_step {
            for rng in &mut self.streams {
                rng.set_word_pos(step as u128 * WORDS_PER_STEP);
            }
        }
        out.clear();
        out.extend(self.streams.iter_mut().map(read_normals));
        self.next_step = step + 1;
    }

    pub fn path(&self) -> &ModePath {
        &self.path
    }
}
