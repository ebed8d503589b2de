//! Random states and settings shared by the integration tests.

#![allow(dead_code)]

use nonlocal_core::{Amplitude, BasisRotation, Setting, TwoQubitState};
use rand::Rng;

pub fn complex<R: Rng>(rng: &mut R) -> Amplitude {
    Amplitude::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_state<R: Rng>(rng: &mut R) -> TwoQubitState {
    let amps = [complex(rng), complex(rng), complex(rng), complex(rng)];
    TwoQubitState::normalize(amps, Setting::reference("a"), Setting::reference("a")).unwrap()
}

/// A random orthonormal complex basis via Gram-Schmidt.
pub fn random_basis<R: Rng>(rng: &mut R, label: &str) -> Setting {
    let p = [complex(rng), complex(rng)];
    let n = (p[0].norm_sqr() + p[1].norm_sqr()).sqrt();
    let p = [p[0] / n, p[1] / n];
    let m = [-p[1].conj(), p[0].conj()];
    Setting::with_basis(label, BasisRotation::from_basis_vectors(p, m).unwrap())
}

pub fn random_direction<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [0; 3].map(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}
