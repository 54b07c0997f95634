//! Multi-quasiparticle excitation spectra: bounded enumeration, subadditive
//! hulls, the energy gap, the critical velocity and fermionic-parity
//! (two-sector) spectrum bottoms.
//!
//! Enumeration and the min-plus dynamic program share one canonical
//! summation order (modes sorted by ascending dispersion, energies folded
//! left to right), so the two routes agree bit-for-bit on identical caps.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{Lattice, MomentumVector};

/// Map from lattice momentum to quasiparticle energy.
///
/// `step` is the mode spacing 2*pi/L used to recover physical norms.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    pub step: f64,
    pub values: BTreeMap<MomentumVector, f64>,
}

impl DispersionTable {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            values: BTreeMap::new(),
        }
    }

    /// Builds a table over the nonzero points of `lat`.
    pub fn from_fn<F: FnMut(&Lattice, &MomentumVector) -> Result<f64>>(
        lat: &Lattice,
        mut f: F,
    ) -> Result<Self> {
        let mut values = BTreeMap::new();
        for p in lat.nonzero_points() {
            values.insert(p.clone(), f(lat, p)?);
        }
        Ok(Self {
            step: lat.spacing(),
            values,
        })
    }

    pub fn norm(&self, p: &MomentumVector) -> f64 {
        self.step * (p.norm2_int() as f64).sqrt()
    }

    /// Nonzero-momentum entries in deterministic (lexicographic) order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&MomentumVector, f64)> {
        self.values
            .iter()
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, &v)| (p, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// One excitation: total momentum, energy, quasiparticle count and the
/// canonical (lexicographically sorted) constituent multiset.
#[derive(Debug, Clone)]
pub struct ExcitationPoint {
    pub momentum: MomentumVector,
    pub energy: f64,
    pub n_quasiparticles: usize,
    pub parity: Parity,
    pub constituents: Vec<MomentumVector>,
}

/// Per-momentum sorted excitation lists K^1(p) <= K^2(p) <= ... under an
/// energy cap `kappa` and a count cap `max_n`.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub step: f64,
    pub kappa: f64,
    pub max_n: usize,
    pub buckets: BTreeMap<MomentumVector, Vec<ExcitationPoint>>,
}

impl SpectrumTable {
    /// K^j(p), 1-indexed.
    pub fn level(&self, p: &MomentumVector, j: usize) -> Option<f64> {
        self.buckets.get(p).and_then(|v| v.get(j - 1)).map(|e| e.energy)
    }

    /// Bottom of the enumerated spectrum: epsilon(p) = K^1(p).
    pub fn bottom(&self) -> DispersionTable {
        let values = self
            .buckets
            .iter()
            .filter_map(|(p, v)| v.first().map(|e| (p.clone(), e.energy)))
            .collect();
        DispersionTable {
            step: self.step,
            values,
        }
    }

    /// Bottom over entries with at least two quasiparticles.
    pub fn bottom_essential(&self) -> DispersionTable {
        let mut values = BTreeMap::new();
        for (p, v) in &self.buckets {
            if let Some(e) = v
                .iter()
                .filter(|e| e.n_quasiparticles >= 2)
                .map(|e| e.energy)
                .fold(None, |acc: Option<f64>, x| {
                    Some(acc.map_or(x, |a| a.min(x)))
                })
            {
                values.insert(p.clone(), e);
            }
        }
        DispersionTable {
            step: self.step,
            values,
        }
    }
}

/// Modes in the canonical order shared by the enumeration and the dynamic
/// program: ascending dispersion, ties by lexicographic momentum.
fn canonical_modes(disp: &DispersionTable) -> Result<Vec<(MomentumVector, f64)>> {
    let mut modes: Vec<(MomentumVector, f64)> = Vec::new();
    for (p, value) in disp.nonzero() {
        if !(value > 0.0) {
            return Err(Error::EnumerationNotWellFounded {
                mode: p.n.clone(),
                value,
            });
        }
        modes.push((p.clone(), value));
    }
    modes.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.n.cmp(&b.0.n)));
    Ok(modes)
}

/// Enumerates every multiset of nonzero modes with total energy <= `kappa`
/// and at most `max_n` constituents, grouped by total momentum and sorted by
/// (energy, count, lexicographic multiset).
pub fn enumerate_excitations(
    disp: &DispersionTable,
    kappa: f64,
    max_n: usize,
) -> Result<SpectrumTable> {
    if !kappa.is_finite() || max_n == 0 {
        return Err(Error::Config(
            "enumeration needs a finite energy cap and a positive count cap".into(),
        ));
    }
    let modes = canonical_modes(disp)?;
    let mut buckets: BTreeMap<MomentumVector, Vec<ExcitationPoint>> = BTreeMap::new();
    let mut stack: Vec<usize> = Vec::new();

    fn dfs(
        modes: &[(MomentumVector, f64)],
        kappa: f64,
        max_n: usize,
        start: usize,
        energy: f64,
        momentum: &MomentumVector,
        stack: &mut Vec<usize>,
        buckets: &mut BTreeMap<MomentumVector, Vec<ExcitationPoint>>,
    ) {
        for j in start..modes.len() {
            let (mode, omega) = &modes[j];
            let e = energy + omega;
            if e > kappa {
                break; // modes sorted by ascending dispersion
            }
            let p = momentum.add(mode);
            stack.push(j);
            let mut constituents: Vec<MomentumVector> =
                stack.iter().map(|&i| modes[i].0.clone()).collect();
            constituents.sort();
            buckets.entry(p.clone()).or_default().push(ExcitationPoint {
                momentum: p.clone(),
                energy: e,
                n_quasiparticles: stack.len(),
                parity: Parity::None,
                constituents,
            });
            if stack.len() < max_n {
                dfs(modes, kappa, max_n, j, e, &p, stack, buckets);
            }
            stack.pop();
        }
    }

    let zero = MomentumVector::zero(modes.first().map_or(1, |(m, _)| m.n.len()));
    dfs(&modes, kappa, max_n, 0, 0.0, &zero, &mut stack, &mut buckets);

    for points in buckets.values_mut() {
        points.sort_by(|a, b| {
            a.energy
                .partial_cmp(&b.energy)
                .unwrap()
                .then_with(|| a.n_quasiparticles.cmp(&b.n_quasiparticles))
                .then_with(|| a.constituents.cmp(&b.constituents))
        });
    }
    Ok(SpectrumTable {
        step: disp.step,
        kappa,
        max_n,
        buckets,
    })
}

/// Per-count minima of the capped subadditive hull: layer c holds, for every
/// reachable momentum, the minimal energy over multisets of exactly c modes.
///
/// Computed by a coin-change dynamic program over (momentum, parts-used).
/// Paths append modes in the canonical order, so every value is the same
/// left-folded sum the enumeration produces.
pub fn hull_layers(
    omega: &DispersionTable,
    max_n: usize,
) -> Result<Vec<HashMap<MomentumVector, f64>>> {
    let modes = canonical_modes(omega)?;
    let d = modes.first().map_or(1, |(m, _)| m.n.len());
    let mut layers: Vec<HashMap<MomentumVector, f64>> = vec![HashMap::new(); max_n + 1];
    layers[0].insert(MomentumVector::zero(d), 0.0);
    for (mode, w) in &modes {
        for c in 1..=max_n {
            let (lower, upper) = layers.split_at_mut(c);
            let prev = &lower[c - 1];
            let cur = &mut upper[0];
            let mut updates: Vec<(MomentumVector, f64)> = Vec::new();
            for (p, &e) in prev.iter() {
                updates.push((p.add(mode), e + w));
            }
            for (p, e) in updates {
                cur.entry(p)
                    .and_modify(|old| {
                        if e < *old {
                            *old = e;
                        }
                    })
                    .or_insert(e);
            }
        }
    }
    Ok(layers)
}

/// The capped subadditive hull: min over decompositions of `p` into 1..=max_n
/// nonzero modes of the summed dispersion.
pub fn subadditive_hull(
    omega: &DispersionTable,
    p: &MomentumVector,
    max_n: usize,
) -> Result<f64> {
    let layers = hull_layers(omega, max_n)?;
    let best = layers[1..]
        .iter()
        .filter_map(|layer| layer.get(p))
        .fold(None, |acc: Option<f64>, &x| Some(acc.map_or(x, |a| a.min(x))));
    best.ok_or_else(|| Error::UnreachableMomentum {
        momentum: p.n.clone(),
        max_n,
    })
}

/// Capped essential hull: same as [`subadditive_hull`] restricted to
/// decompositions with at least two parts.
pub fn subadditive_hull_essential(
    omega: &DispersionTable,
    p: &MomentumVector,
    max_n: usize,
) -> Result<f64> {
    if max_n < 2 {
        return Err(Error::UnreachableMomentum {
            momentum: p.n.clone(),
            max_n,
        });
    }
    let layers = hull_layers(omega, max_n)?;
    let best = layers[2..]
        .iter()
        .filter_map(|layer| layer.get(p))
        .fold(None, |acc: Option<f64>, &x| Some(acc.map_or(x, |a| a.min(x))));
    best.ok_or_else(|| Error::UnreachableMomentum {
        momentum: p.n.clone(),
        max_n,
    })
}

/// epsilon_ess(p) = min over two-splits p = k1 + k2 of eps(k1) + eps(k2),
/// over all ordered pairs of table keys.
pub fn essential_bottom(eps: &DispersionTable) -> DispersionTable {
    let keys: Vec<(&MomentumVector, f64)> = eps.values.iter().map(|(p, &v)| (p, v)).collect();
    let mut values: BTreeMap<MomentumVector, f64> = BTreeMap::new();
    for (k1, e1) in &keys {
        for (k2, e2) in &keys {
            let p = k1.add(k2);
            let e = e1 + e2;
            values
                .entry(p)
                .and_modify(|old| {
                    if e < *old {
                        *old = e;
                    }
                })
                .or_insert(e);
        }
    }
    DispersionTable {
        step: eps.step,
        values,
    }
}

/// Energy gap: infimum of the stored dispersion. Empty tables give +inf.
pub fn energy_gap(omega_min: &DispersionTable) -> f64 {
    omega_min
        .values
        .values()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Critical velocity: inf over k != 0 of omega(k) / |k|.
pub fn critical_velocity(omega_min: &DispersionTable) -> f64 {
    omega_min
        .nonzero()
        .map(|(p, v)| v / omega_min.norm(p))
        .fold(f64::INFINITY, f64::min)
}

/// Critical velocity with the dual-route consistency assertion: the direct
/// infimum must coincide with the infimum of the two-split essential bottom
/// over its extended momentum domain.
pub fn critical_velocity_certified(omega_min: &DispersionTable) -> Result<f64> {
    let direct = critical_velocity(omega_min);
    let ess = essential_bottom(omega_min);
    let via_ess = critical_velocity(&ess);
    let scale = direct.abs().max(via_ess.abs()).max(1e-300);
    if ((direct - via_ess) / scale).abs() > 1e-12 {
        return Err(Error::InternalConsistency {
            what: "critical velocity routes",
            rel: ((direct - via_ess) / scale).abs(),
        });
    }
    Ok(direct)
}

/// Free Fermi dispersion omega(k) = | |k|^2 - mu |.
pub fn free_fermi_dispersion(mu: f64, k_abs: f64) -> f64 {
    (k_abs * k_abs - mu).abs()
}

/// Free Fermi dispersion tabulated over the nonzero modes of a lattice.
pub fn free_fermi_table(lat: &Lattice, mu: f64) -> Result<DispersionTable> {
    DispersionTable::from_fn(lat, |l, p| {
        let k = l.norm(p);
        Ok(free_fermi_dispersion(mu, k))
    })
}

/// Even/odd sector bottoms of a two-sector quasiparticle system.
///
/// Unreachable (momentum, parity) combinations carry the +inf sentinel.
#[derive(Debug, Clone)]
pub struct SectorBottoms {
    pub eps_minus: DispersionTable,
    pub eps_plus: DispersionTable,
    pub eps_ess_minus: DispersionTable,
    pub eps_ess_plus: DispersionTable,
}

/// Parity-tagged capped enumeration: the odd bottom comes from multisets
/// with an odd number of fermionic quasiparticles (plus any bosonic ones),
/// the even bottom from even fermionic counts with at least one
/// quasiparticle in total. The essential bottoms are the two-split
/// reconstructions eps_ess^- = min(eps^- + eps^+) and
/// eps_ess^+ = min(eps^+ + eps^+, eps^- + eps^-).
pub fn two_sector_bottoms(
    omega_fermionic: &DispersionTable,
    omega_bosonic: &DispersionTable,
    kappa: f64,
    max_n: usize,
) -> Result<SectorBottoms> {
    let fermionic = canonical_modes(omega_fermionic)?;
    let bosonic = canonical_modes(omega_bosonic)?;
    if fermionic.is_empty() && bosonic.is_empty() {
        return Err(Error::Config("two-sector enumeration needs a nonempty table".into()));
    }
    let step = if omega_fermionic.values.is_empty() {
        omega_bosonic.step
    } else {
        omega_fermionic.step
    };
    let d = fermionic
        .first()
        .or(bosonic.first())
        .map(|(m, _)| m.n.len())
        .unwrap();

    // combined canonical mode list: fermionic flag tags parity flips
    let mut modes: Vec<(MomentumVector, f64, bool)> = fermionic
        .into_iter()
        .map(|(p, w)| (p, w, true))
        .chain(bosonic.into_iter().map(|(p, w)| (p, w, false)))
        .collect();
    modes.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.n.cmp(&b.0.n)).then_with(|| a.2.cmp(&b.2)));

    // layers[c][parity 0=even,1=odd] : momentum -> min energy over exactly c parts
    let mut layers: Vec<[HashMap<MomentumVector, f64>; 2]> =
        (0..=max_n).map(|_| [HashMap::new(), HashMap::new()]).collect();
    layers[0][0].insert(MomentumVector::zero(d), 0.0);
    for (mode, w, is_fermionic) in &modes {
        for c in 1..=max_n {
            let mut updates: Vec<(usize, MomentumVector, f64)> = Vec::new();
            for prev_parity in 0..2 {
                let parity = if *is_fermionic { 1 - prev_parity } else { prev_parity };
                for (p, &e) in layers[c - 1][prev_parity].iter() {
                    let en = e + w;
                    if en <= kappa {
                        updates.push((parity, p.add(mode), en));
                    }
                }
            }
            for (parity, p, e) in updates {
                layers[c][parity]
                    .entry(p)
                    .and_modify(|old| {
                        if e < *old {
                            *old = e;
                        }
                    })
                    .or_insert(e);
            }
        }
    }

    let collect = |parity: usize, min_count: usize| -> BTreeMap<MomentumVector, f64> {
        let mut out: BTreeMap<MomentumVector, f64> = BTreeMap::new();
        for layer in layers.iter().skip(min_count) {
            for (p, &e) in layer[parity].iter() {
                out.entry(p.clone())
                    .and_modify(|old| {
                        if e < *old {
                            *old = e;
                        }
                    })
                    .or_insert(e);
            }
        }
        out
    };
    let plus = collect(0, 1);
    let minus = collect(1, 1);

    // domain: all momenta seen in either sector, padded with sentinels
    let mut domain: Vec<MomentumVector> = plus.keys().chain(minus.keys()).cloned().collect();
    domain.sort();
    domain.dedup();
    let pad = |map: &BTreeMap<MomentumVector, f64>| -> BTreeMap<MomentumVector, f64> {
        domain
            .iter()
            .map(|p| (p.clone(), map.get(p).copied().unwrap_or(f64::INFINITY)))
            .collect()
    };
    let eps_plus = DispersionTable {
        step,
        values: pad(&plus),
    };
    let eps_minus = DispersionTable {
        step,
        values: pad(&minus),
    };

    let split_min = |a: &BTreeMap<MomentumVector, f64>,
                     b: &BTreeMap<MomentumVector, f64>|
     -> BTreeMap<MomentumVector, f64> {
        let mut out: BTreeMap<MomentumVector, f64> = BTreeMap::new();
        for (k1, &e1) in a.iter() {
            if !e1.is_finite() {
                continue;
            }
            for (k2, &e2) in b.iter() {
                if !e2.is_finite() {
                    continue;
                }
                let p = k1.add(k2);
                let e = e1 + e2;
                out.entry(p)
                    .and_modify(|old| {
                        if e < *old {
                            *old = e;
                        }
                    })
                    .or_insert(e);
            }
        }
        out
    };
    let ess_minus = split_min(&minus, &plus);
    let mut ess_plus = split_min(&plus, &plus);
    for (p, e) in split_min(&minus, &minus) {
        ess_plus
            .entry(p)
            .and_modify(|old| {
                if e < *old {
                    *old = e;
                }
            })
            .or_insert(e);
    }
    let mut ess_domain: Vec<MomentumVector> =
        ess_minus.keys().chain(ess_plus.keys()).cloned().collect();
    ess_domain.sort();
    ess_domain.dedup();
    let pad_ess = |map: &BTreeMap<MomentumVector, f64>| -> BTreeMap<MomentumVector, f64> {
        ess_domain
            .iter()
            .map(|p| (p.clone(), map.get(p).copied().unwrap_or(f64::INFINITY)))
            .collect()
    };
    Ok(SectorBottoms {
        eps_minus,
        eps_plus,
        eps_ess_minus: DispersionTable {
            step,
            values: pad_ess(&ess_minus),
        },
        eps_ess_plus: DispersionTable {
            step,
            values: pad_ess(&ess_plus),
        },
    })
}
