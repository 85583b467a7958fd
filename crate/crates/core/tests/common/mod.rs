#![allow(dead_code)]

use fracpow::{Complex64, InfiniteMatrixSpec, SpectralEnvelope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters of a random band matrix whose spectrum lies in `[c, w]`.
///
/// Off-diagonal entries have modulus at most `rho / (2l)` and diagonal entries
/// lie in `[c + rho, w - rho]`, so Gershgorin confines the spectrum of the
/// infinite matrix and of every compression of it to `[c, w]`.
#[derive(Debug, Clone, Copy)]
pub struct RandomBand {
    pub seed: u64,
    pub l: i64,
    pub c: f64,
    pub w: f64,
    pub rho: f64,
    pub complex: bool,
}

/// Keyed generator: entries depend only on `(seed, index, offset)`.
fn keyed(seed: u64, i: i64, o: i64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&i.to_le_bytes());
    key[16..24].copy_from_slice(&o.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

impl RandomBand {
    pub fn sample(rng: &mut impl Rng, l: i64) -> Self {
        let w = rng.random_range(0.5..3.0);
        let c = w * rng.random_range(0.1..0.9);
        let rho = rng.random_range(0.2..0.95) * (w - c) / 2.0;
        RandomBand {
            seed: rng.random(),
            l,
            c,
            w,
            rho,
            complex: rng.random_bool(0.5),
        }
    }

    fn diagonal(&self, i: i64) -> f64 {
        let lo = self.c + self.rho;
        let hi = self.w - self.rho;
        lo + (hi - lo) * keyed(self.seed, i, 0).random::<f64>()
    }

    /// `W[i][i + o]` for `o > 0`; never zero.
    fn upper(&self, i: i64, o: i64) -> Complex64 {
        let mut rng = keyed(self.seed, i, o);
        let modulus = self.rho / (2 * self.l) as f64 * rng.random_range(0.1..1.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        if self.complex {
            Complex64::from_polar(modulus, rng.random_range(0.0..std::f64::consts::TAU))
        } else {
            Complex64::new(sign * modulus, 0.0)
        }
    }

    pub fn entry(&self, m: i64, n: i64) -> Complex64 {
        let o = n - m;
        match o {
            0 => Complex64::new(self.diagonal(m), 0.0),
            o if o > 0 && o <= self.l => self.upper(m, o),
            o if o < 0 && -o <= self.l => self.upper(n, -o).conj(),
            _ => Complex64::default(),
        }
    }

    pub fn spec(&self) -> InfiniteMatrixSpec {
        let band = *self;
        let envelope = SpectralEnvelope::new(self.c, self.w, 0.0).unwrap();
        InfiniteMatrixSpec::new(
            move |m: i64| (-band.l..=band.l).map(|o| (m + o, band.entry(m, m + o))).collect(),
            (2 * self.l + 1) as usize,
            envelope,
        )
        .unwrap()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}
