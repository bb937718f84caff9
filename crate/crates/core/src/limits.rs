//! Samplers for the limit objects: stable subordinators and their inverses,
//! the stable random measure `rho`, and the Fontes-Isopi-Newman diffusion
//! (with drift) realized as a Stone chain on the atoms of a truncated `rho`.
//!
//! Subordinators use the normalization `E exp(-lambda Sub_t) = exp(-t Gamma(1-alpha) lambda^alpha)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{domain, Error, Result};

pub use statrs::function::gamma::gamma;

/// Maximum number of automatic window extensions in [`sample_fin`].
pub const MAX_WINDOW_EXTENSIONS: usize = 24;

/// Default truncation window for the stable measure.
pub const DEFAULT_WINDOW: (f64, f64) = (-20.0, 20.0);

/// Default weight cutoff for the stable measure.
pub const DEFAULT_CUTOFF: f64 = 1e-3;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    Ok(())
}

/// Positive stable variable with `E exp(-lambda S) = exp(-lambda^alpha)`.
///
/// Kanter's representation of the totally skewed Chambers-Mallows-Stuck draw.
pub fn sample_one_sided_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * crate::env::open_unit(rng.next_u64());
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
    a * b
}

/// `Sub_t = (t Gamma(1-alpha))^{1/alpha} S`.
pub fn subordinator_marginal<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let scale = (t * gamma(1.0 - alpha)).powf(1.0 / alpha);
    Ok(scale * sample_one_sided_stable(alpha, rng))
}

/// `Sub^{-1}_s`, realized as `(s / Sub_1)^alpha`.
pub fn inverse_subordinator_marginal<R: Rng + ?Sized>(
    alpha: f64,
    s: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(s > 0.0) {
        return domain(format!("s must be positive, got {s}"));
    }
    let sub1 = subordinator_marginal(alpha, 1.0, rng)?;
    Ok((s / sub1).powf(alpha))
}

/// A subordinator sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SubordinatorPath {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest grid time whose value exceeds `s`.
    pub fn invert(&self, s: f64) -> Result<f64> {
        let k = self.values.partition_point(|&v| v <= s);
        self.grid.get(k).copied().ok_or_else(|| {
            Error::Range(format!(
                "level {s} is above the final path value {}",
                self.values.last().copied().unwrap_or(0.0)
            ))
        })
    }
}

/// Independent increments on `grid`, which must start at 0 and increase.
pub fn subordinator_path<R: Rng + ?Sized>(
    alpha: f64,
    grid: &[f64],
    rng: &mut R,
) -> Result<SubordinatorPath> {
    check_alpha(alpha)?;
    if grid.first() != Some(&0.0) {
        return domain("grid must start at 0");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("grid must be strictly increasing");
    }
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut level = 0.0;
    for w in grid.windows(2) {
        level += subordinator_marginal(alpha, w[1] - w[0], rng)?;
        values.push(level);
    }
    Ok(SubordinatorPath {
        grid: grid.to_vec(),
        values,
    })
}

/// `Sub^{-1}_s` by building a path on the uniform grid of step `dt` in chunks
/// until it passes `s`, then inverting it.
pub fn path_inverse_marginal<R: Rng + ?Sized>(
    alpha: f64,
    s: f64,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    const CHUNK: usize = 256;
    if !(dt > 0.0) {
        return domain(format!("grid step must be positive, got {dt}"));
    }
    let grid: Vec<f64> = (0..=CHUNK).map(|k| k as f64 * dt).collect();
    let mut offset_time = 0.0;
    let mut offset_level = 0.0;
    loop {
        let path = subordinator_path(alpha, &grid, rng)?;
        match path.invert(s - offset_level) {
            Ok(t) => return Ok(offset_time + t),
            Err(_) => {
                offset_time += CHUNK as f64 * dt;
                offset_level += path.values[CHUNK];
            }
        }
    }
}

/// Atoms `(position, weight)` sorted by position.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
    window: (f64, f64),
    cutoff: f64,
}

impl AtomicMeasure {
    /// Validates ordering, window membership and the weight cutoff.
    pub fn new(mut atoms: Vec<(f64, f64)>, window: (f64, f64), cutoff: f64) -> Result<Self> {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return domain("atom positions must be distinct");
        }
        if atoms
            .iter()
            .any(|&(x, w)| !(w > cutoff) || x < window.0 || x > window.1)
        {
            return domain("atoms must lie in the window with weight above the cutoff");
        }
        Ok(Self {
            atoms,
            window,
            cutoff,
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total weight of atoms in `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(x, _)| a <= x && x <= b)
            .map(|&(_, w)| w)
            .sum()
    }

    /// Index of the atom closest to `x`.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = self.atoms.partition_point(|a| a.0 < x);
        match (k.checked_sub(1), self.atoms.get(k)) {
            (None, None) => None,
            (None, Some(_)) => Some(k),
            (Some(j), None) => Some(j),
            (Some(j), Some(r)) => Some(if x - self.atoms[j].0 <= r.0 - x { j } else { k }),
        }
    }

    /// Restriction to atoms heavier than `cutoff`.
    pub fn restrict(&self, cutoff: f64) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|&(_, w)| w > cutoff)
                .collect(),
            window: self.window,
            cutoff: cutoff.max(self.cutoff),
        }
    }

    /// Samples the stable Poisson process on `[new_lo, lo)` and prepends it.
    /// Returns the number of atoms added.
    pub fn extend_left<R: Rng + ?Sized>(&mut self, alpha: f64, new_lo: f64, rng: &mut R) -> Result<usize> {
        if !(new_lo < self.window.0) {
            return Ok(0);
        }
        let fresh = sample_atoms(alpha, (new_lo, self.window.0), self.cutoff, rng)?;
        let added = fresh.len();
        let mut atoms = fresh;
        atoms.append(&mut self.atoms);
        self.atoms = atoms;
        self.window.0 = new_lo;
        Ok(added)
    }

    /// Samples the stable Poisson process on `(hi, new_hi]` and appends it.
    pub fn extend_right<R: Rng + ?Sized>(&mut self, alpha: f64, new_hi: f64, rng: &mut R) -> Result<usize> {
        if !(new_hi > self.window.1) {
            return Ok(0);
        }
        let fresh = sample_atoms(alpha, (self.window.1, new_hi), self.cutoff, rng)?;
        let added = fresh.len();
        self.atoms.extend(fresh);
        self.window.1 = new_hi;
        Ok(added)
    }
}

fn sample_atoms<R: Rng + ?Sized>(
    alpha: f64,
    (lo, hi): (f64, f64),
    eps: f64,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    let mean = (hi - lo) * eps.powf(-alpha);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .sample(rng) as usize
    } else {
        0
    };
    let mut atoms: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let x = lo + (hi - lo) * rng.random::<f64>();
            let w = eps * crate::env::open_unit(rng.next_u64()).powf(-1.0 / alpha);
            (x, w)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(atoms)
}

/// Poisson point process on `window x (eps, inf)` with intensity `alpha w^{-1-alpha} dw dx`.
pub fn sample_stable_measure<R: Rng + ?Sized>(
    alpha: f64,
    window: (f64, f64),
    eps: f64,
    rng: &mut R,
) -> Result<AtomicMeasure> {
    check_alpha(alpha)?;
    if !(window.0 < window.1) {
        return domain(format!("window {:?} is empty", window));
    }
    if !(eps > 0.0) {
        return domain(format!("cutoff must be positive, got {eps}"));
    }
    Ok(AtomicMeasure {
        atoms: sample_atoms(alpha, window, eps, rng)?,
        window,
        cutoff: eps,
    })
}

/// Mean weight per unit length discarded by the cutoff: `alpha eps^{1-alpha} / (1-alpha)`.
pub fn truncated_mass_per_length(alpha: f64, eps: f64) -> f64 {
    alpha * eps.powf(1.0 - alpha) / (1.0 - alpha)
}

/// Scale function of Brownian motion with drift `mu`.
pub fn stone_scale_u(mu: f64, x: f64) -> f64 {
    if mu == 0.0 {
        x
    } else {
        -(-2.0 * mu * x).exp_m1() / (2.0 * mu)
    }
}

/// Scale function used by a Stone chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleMode {
    Identity,
    /// `u(x) = (1 - e^{-2 mu x}) / (2 mu)`.
    ExponentialU(f64),
}

/// Speed measure plus drift; determines a nearest-neighbour chain on the atoms.
#[derive(Debug, Clone)]
pub struct StoneChainSpec {
    pub measure: AtomicMeasure,
    mu: f64,
}

impl StoneChainSpec {
    pub fn new(measure: AtomicMeasure, mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return domain(format!("drift must be >= 0, got {mu}"));
        }
        Ok(Self { measure, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn scale_mode(&self) -> ScaleMode {
        if self.mu > 0.0 {
            ScaleMode::ExponentialU(self.mu)
        } else {
            ScaleMode::Identity
        }
    }

    /// Scale increments across the gaps to the left and right of atom `i`,
    /// both measured relative to the scale derivative at `y_i`.
    fn local_increments(&self, i: usize) -> (f64, f64) {
        let a = &self.measure.atoms;
        let left = a[i].0 - a[i - 1].0;
        let right = a[i + 1].0 - a[i].0;
        if self.mu == 0.0 {
            (left, right)
        } else {
            let m2 = 2.0 * self.mu;
            ((m2 * left).exp_m1() / m2, -(-m2 * right).exp_m1() / m2)
        }
    }

    /// Mean holding time at atom `i` and probability of jumping right.
    ///
    /// With `du_-`, `du_+` the scale increments to the neighbours, the mean is
    /// `2 w_i du_- du_+ / ((du_- + du_+) u'(y_i))` and the right-jump
    /// probability is `du_- / (du_- + du_+)`.
    pub fn transition(&self, i: usize) -> Result<(f64, f64)> {
        let n = self.measure.atoms.len();
        if i == 0 {
            return Err(Error::WindowExhausted { side: "left" });
        }
        if i + 1 >= n {
            return Err(Error::WindowExhausted { side: "right" });
        }
        let (dl, dr) = self.local_increments(i);
        let w = self.measure.atoms[i].1;
        Ok((2.0 * w * dl * dr / (dl + dr), dl / (dl + dr)))
    }
}

/// One move of the Stone chain from atom `i`: `(next index, holding time)`.
pub fn stone_chain_step<R: Rng + ?Sized>(
    spec: &StoneChainSpec,
    i: usize,
    rng: &mut R,
) -> Result<(usize, f64)> {
    let (mean, p_right) = spec.transition(i)?;
    let eta: f64 = rng.sample(Exp1);
    let next = if rng.random::<f64>() < p_right { i + 1 } else { i - 1 };
    Ok((next, mean * eta))
}

/// State of the FIN diffusion at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinSample {
    /// Position of the occupied atom.
    pub value: f64,
    /// Weight of the occupied atom, i.e. `rho({Fin_t})`.
    pub weight: f64,
    /// Distance from 0 to the starting atom.
    pub start_offset: f64,
}

/// `Fin^mu_t` via a Stone chain on a truncated stable measure.
///
/// The chain starts at the atom nearest 0. When it reaches a boundary atom
/// the window is doubled on that side; only the new region is sampled.
pub fn sample_fin<R: Rng + ?Sized>(
    alpha: f64,
    mu: f64,
    t: f64,
    window: (f64, f64),
    cutoff: f64,
    rng: &mut R,
) -> Result<FinSample> {
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let measure = sample_stable_measure(alpha, window, cutoff, rng)?;
    let mut spec = StoneChainSpec::new(measure, mu)?;
    let mut extensions = 0usize;
    let mut extend = |spec: &mut StoneChainSpec, left: bool, rng: &mut R| -> Result<usize> {
        if extensions >= MAX_WINDOW_EXTENSIONS {
            return Err(Error::WindowExhausted {
                side: if left { "left" } else { "right" },
            });
        }
        extensions += 1;
        let (lo, hi) = spec.measure.window;
        let width = (hi - lo).max(1.0);
        if left {
            spec.measure.extend_left(alpha, lo - width, rng)
        } else {
            spec.measure.extend_right(alpha, hi + width, rng)
        }
    };
    while spec.measure.len() < 3 {
        extend(&mut spec, true, rng)?;
        extend(&mut spec, false, rng)?;
    }
    let mut i = spec.measure.nearest(0.0).expect("non-empty measure");
    let start_offset = spec.measure.atoms[i].0;
    let mut clock = 0.0;
    loop {
        if i == 0 {
            i += extend(&mut spec, true, rng)?;
            continue;
        }
        if i + 1 >= spec.measure.len() {
            extend(&mut spec, false, rng)?;
            continue;
        }
        let (next, hold) = stone_chain_step(&spec, i, rng)?;
        if clock + hold > t {
            let (value, weight) = spec.measure.atoms[i];
            return Ok(FinSample {
                value,
                weight,
                start_offset,
            });
        }
        clock += hold;
        i = next;
    }
}

/// `mu^alpha / Gamma(1 + alpha)`, the constant in the slow-drift scaling limit.
pub fn scaling_constant_a(alpha: f64, mu: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(mu > 0.0) {
        return domain(format!("mu must be positive, got {mu}"));
    }
    Ok(mu.powf(alpha) / gamma(1.0 + alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    #[test]
    fn gamma_accuracy() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1.5) - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((gamma(2.5) - 0.75 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaling_constant_examples() {
        let c = scaling_constant_a(0.5, 1.0).unwrap();
        assert!((c - 2.0 / PI.sqrt()).abs() < 1e-12);
        assert!((c - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-6);
        let c4 = scaling_constant_a(0.5, 4.0).unwrap();
        assert!((c4 - 2.256_758).abs() < 1e-6);
        for alpha in [0.2, 0.7] {
            let c = scaling_constant_a(alpha, 1.0).unwrap();
            assert!((c - 1.0 / gamma(1.0 + alpha)).abs() < 1e-14);
        }
        assert!(scaling_constant_a(0.5, 0.0).is_err());
    }

    #[test]
    fn scale_u_examples() {
        assert_eq!(stone_scale_u(0.0, 3.7), 3.7);
        let near = stone_scale_u(1e-8, 3.7);
        assert!(((near - 3.7) / 3.7).abs() < 1e-6);
        assert_eq!(stone_scale_u(1.0, 0.0), 0.0);
        assert!((stone_scale_u(1.0, 50.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_is_monotone_under_shared_draw() {
        let mut a = substream(3, Purpose::Limit, 0);
        let mut b = a.clone();
        let lo = inverse_subordinator_marginal(0.5, 1.0, &mut a).unwrap();
        let hi = inverse_subordinator_marginal(0.5, 2.0, &mut b).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn path_inversion_is_grid_exact_and_monotone() {
        let mut rng = substream(4, Purpose::Limit, 0);
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let path = subordinator_path(0.5, &grid, &mut rng).unwrap();
        assert_eq!(path.values()[0], 0.0);
        assert!(path.values().windows(2).all(|w| w[1] >= w[0]));
        let k = 37;
        // value at t_k is first exceeded at t_{k+1}; right-continuous inverse
        assert_eq!(path.invert(path.values()[k]).unwrap(), grid[k + 1]);
        assert_eq!(path.invert(path.values()[k] - 1e-12 * path.values()[k]).unwrap(), grid[k]);
        let mut last = 0.0;
        for s in (1..50).map(|i| i as f64 * path.values()[100] / 50.0) {
            let t = path.invert(s).unwrap();
            assert!(t >= last);
            last = t;
        }
        assert!(path.invert(path.values()[100] * 2.0).is_err());
        assert!(subordinator_path(0.5, &[0.0, 0.5, 0.5], &mut rng).is_err());
    }

    #[test]
    fn measure_atoms_respect_window_and_cutoff() {
        let mut rng = substream(5, Purpose::Limit, 0);
        let m = sample_stable_measure(0.5, (-3.0, 4.0), 0.01, &mut rng).unwrap();
        assert!(m.atoms().windows(2).all(|w| w[1].0 > w[0].0));
        assert!(m.atoms().iter().all(|&(x, w)| (-3.0..=4.0).contains(&x) && w > 0.01));
        let mut ext = m.clone();
        let before = ext.len();
        let added = ext.extend_right(0.5, 6.0, &mut rng).unwrap();
        assert_eq!(ext.len(), before + added);
        assert_eq!(&ext.atoms()[..before], m.atoms());
        assert!(ext.atoms().windows(2).all(|w| w[1].0 > w[0].0));
        assert!(AtomicMeasure::new(vec![(0.0, 1.0), (0.0, 2.0)], (-1.0, 1.0), 0.1).is_err());
    }

    #[test]
    fn symmetric_spacing_chain() {
        let atoms: Vec<(f64, f64)> = (-5..=5).map(|k| (0.3 * k as f64, 2.0 + k as f64 * 0.1)).collect();
        let spec = StoneChainSpec::new(AtomicMeasure::new(atoms, (-2.0, 2.0), 0.0).unwrap(), 0.0).unwrap();
        assert_eq!(spec.scale_mode(), ScaleMode::Identity);
        for i in 1..10 {
            let (mean, pr) = spec.transition(i).unwrap();
            let w = spec.measure.atoms()[i].1;
            assert!((mean - w * 0.3).abs() < 1e-14);
            assert!((pr - 0.5).abs() < 1e-15);
        }
        assert!(matches!(spec.transition(0), Err(Error::WindowExhausted { side: "left" })));
        assert!(matches!(spec.transition(10), Err(Error::WindowExhausted { side: "right" })));
    }
}
