//! Hamiltonian builders for the five lattice models plus external matrices.
//!
//! Basis ordering is fixed so file outputs are unambiguous: site index
//! `2(n-1) + s` for two-band chains (`s = 0` for A, `1` for B) and
//! `3(n-1) + s` for the three-band chain (A, B, C). Unit cells are 1-based
//! in the formulas, 0-based in the matrix.

use crate::error::{Error, Result};
use crate::C64;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Per-index (cell, sublattice) tag; sublattice 0 = A, 1 = B, 2 = C.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteLabel {
    pub cell: usize,
    pub sublattice: u8,
}

/// Description of one model instance: which model, its parameters, its size
/// and boundary condition where applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Non-reciprocal SSH chain: intracell hop `t1` both ways, intercell
    /// hops `t2 + g` (B_n -> A_{n+1}) and `t2 - g` in reverse.
    NonReciprocalSsh {
        t1: f64,
        t2: f64,
        g: f64,
        cells: usize,
        boundary: Boundary,
    },
    /// 2x2 matrix [[0, gamma], [1, 0]].
    TwoLevel { gamma: f64 },
    /// Tridiagonal chain with non-reciprocal hops `jr`/`jl` and complex
    /// on-site potential `v * exp(-2*pi*i*(alpha_num/alpha_den)*n)`.
    Quasicrystal {
        jr: f64,
        jl: f64,
        v: f64,
        alpha_num: u64,
        alpha_den: u64,
        sites: usize,
        boundary: Boundary,
    },
    /// Momentum-space 2x2 PT-symmetric SSH block at wave vector `k`.
    PtSshBloch { u: f64, v: f64, w: f64, k: f64 },
    /// Three-band chain with reciprocal-asymmetric intracell hops
    /// (`g` vs `1/g`) and symmetric intercell hop `g`, all scaled by `t0`.
    SturmLiouvilleChain {
        t0: f64,
        g: f64,
        cells: usize,
        boundary: Boundary,
    },
    /// Matrix ingested from a file; no parameters of its own.
    External { path: String },
}

impl ModelSpec {
    /// Build the dense Hamiltonian this spec describes.
    pub fn build(&self) -> Result<Hamiltonian> {
        match *self {
            ModelSpec::NonReciprocalSsh {
                t1,
                t2,
                g,
                cells,
                boundary,
            } => build_nonreciprocal_ssh(t1, t2, g, cells, boundary),
            ModelSpec::TwoLevel { gamma } => build_two_level(gamma),
            ModelSpec::Quasicrystal {
                jr,
                jl,
                v,
                alpha_num,
                alpha_den,
                sites,
                boundary,
            } => build_quasicrystal(jr, jl, v, alpha_num, alpha_den, sites, boundary),
            ModelSpec::PtSshBloch { u, v, w, k } => build_pt_ssh_bloch(u, v, w, k),
            ModelSpec::SturmLiouvilleChain {
                t0,
                g,
                cells,
                boundary,
            } => build_sturm_liouville_chain(t0, g, cells, boundary),
            ModelSpec::External { ref path } => load_hamiltonian(path),
        }
    }

    /// Clone of this spec with the named real parameter replaced; used by
    /// parameter sweeps.
    pub fn with_param(&self, axis: &str, value: f64) -> Result<ModelSpec> {
        let mut spec = self.clone();
        let slot: &mut f64 = match (&mut spec, axis) {
            (ModelSpec::NonReciprocalSsh { t1, .. }, "t1") => t1,
            (ModelSpec::NonReciprocalSsh { t2, .. }, "t2") => t2,
            (ModelSpec::NonReciprocalSsh { g, .. }, "g") => g,
            (ModelSpec::TwoLevel { gamma }, "gamma") => gamma,
            (ModelSpec::Quasicrystal { jr, .. }, "jr") => jr,
            (ModelSpec::Quasicrystal { jl, .. }, "jl") => jl,
            (ModelSpec::Quasicrystal { v, .. }, "v") => v,
            (ModelSpec::PtSshBloch { u, .. }, "u") => u,
            (ModelSpec::PtSshBloch { v, .. }, "v") => v,
            (ModelSpec::PtSshBloch { w, .. }, "w") => w,
            (ModelSpec::PtSshBloch { k, .. }, "k") => k,
            (ModelSpec::SturmLiouvilleChain { t0, .. }, "t0") => t0,
            (ModelSpec::SturmLiouvilleChain { g, .. }, "g") => g,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "model has no sweep parameter named `{axis}`"
                )))
            }
        };
        *slot = value;
        Ok(spec)
    }
}

/// Dense square complex Hamiltonian with site labeling metadata.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub dim: usize,
    pub entries: Array2<C64>,
    pub labels: Vec<SiteLabel>,
    pub spec: Option<ModelSpec>,
}

impl Hamiltonian {
    /// Wrap an arbitrary square matrix (one site per index, no spec).
    pub fn from_matrix(entries: Array2<C64>) -> Result<Hamiltonian> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::InvalidInput(format!(
                "matrix is {rows}x{cols}, expected square"
            )));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let labels = (0..rows)
            .map(|i| SiteLabel {
                cell: i + 1,
                sublattice: 0,
            })
            .collect();
        Ok(Hamiltonian {
            dim: rows,
            entries,
            labels,
            spec: None,
        })
    }

    /// Max deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn require_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("parameter {name} is not finite")))
    }
}

fn two_band_labels(cells: usize) -> Vec<SiteLabel> {
    (0..cells)
        .flat_map(|n| {
            [
                SiteLabel {
                    cell: n + 1,
                    sublattice: 0,
                },
                SiteLabel {
                    cell: n + 1,
                    sublattice: 1,
                },
            ]
        })
        .collect()
}

/// Non-reciprocal SSH chain on `cells` unit cells (dimension `2 * cells`).
pub fn build_nonreciprocal_ssh(
    t1: f64,
    t2: f64,
    g: f64,
    cells: usize,
    boundary: Boundary,
) -> Result<Hamiltonian> {
    require_finite("t1", t1)?;
    require_finite("t2", t2)?;
    require_finite("g", g)?;
    if cells < 2 {
        return Err(Error::InvalidSpec(format!("cells = {cells}, need >= 2")));
    }
    let dim = 2 * cells;
    let mut h = Array2::<C64>::zeros((dim, dim));
    let re = |x: f64| C64::new(x, 0.0);
    for n in 0..cells {
        let a = 2 * n;
        let b = 2 * n + 1;
        h[[a, b]] = re(t1);
        h[[b, a]] = re(t1);
        if n + 1 < cells {
            // B_n -> A_{n+1} carries t2 + g, the reverse t2 - g.
            h[[b, 2 * n + 2]] = re(t2 + g);
            h[[2 * n + 2, b]] = re(t2 - g);
        }
    }
    if boundary == Boundary::Periodic {
        let b_last = 2 * cells - 1;
        h[[b_last, 0]] = re(t2 + g);
        h[[0, b_last]] = re(t2 - g);
    }
    Ok(Hamiltonian {
        dim,
        entries: h,
        labels: two_band_labels(cells),
        spec: Some(ModelSpec::NonReciprocalSsh {
            t1,
            t2,
            g,
            cells,
            boundary,
        }),
    })
}

/// Two-level matrix [[0, gamma], [1, 0]].
pub fn build_two_level(gamma: f64) -> Result<Hamiltonian> {
    require_finite("gamma", gamma)?;
    let mut h = Array2::<C64>::zeros((2, 2));
    h[[0, 1]] = C64::new(gamma, 0.0);
    h[[1, 0]] = C64::new(1.0, 0.0);
    Ok(Hamiltonian {
        dim: 2,
        entries: h,
        labels: two_band_labels(1),
        spec: Some(ModelSpec::TwoLevel { gamma }),
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Quasicrystal chain with incommensurate complex potential (1-based site
/// index in the exponent).
pub fn build_quasicrystal(
    jr: f64,
    jl: f64,
    v: f64,
    alpha_num: u64,
    alpha_den: u64,
    sites: usize,
    boundary: Boundary,
) -> Result<Hamiltonian> {
    require_finite("jr", jr)?;
    require_finite("jl", jl)?;
    require_finite("v", v)?;
    if v < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "potential strength v = {v} must be non-negative"
        )));
    }
    if sites < 2 {
        return Err(Error::InvalidSpec(format!("sites = {sites}, need >= 2")));
    }
    if alpha_num == 0 || alpha_den == 0 || gcd(alpha_num, alpha_den) != 1 {
        return Err(Error::InvalidSpec(format!(
            "alpha = {alpha_num}/{alpha_den} must be a ratio of coprime positive integers"
        )));
    }
    let mut h = Array2::<C64>::zeros((sites, sites));
    for n in 0..sites {
        // Reduce alpha * n mod 1 exactly on integers so that sites where
        // the exponent is a whole number of turns land on phase 0.
        let site = (n + 1) as u64;
        let turns = (alpha_num * site) % alpha_den;
        let phase = -2.0 * PI * (turns as f64 / alpha_den as f64);
        h[[n, n]] = C64::from_polar(v, phase);
        if n + 1 < sites {
            h[[n + 1, n]] = C64::new(jr, 0.0);
            h[[n, n + 1]] = C64::new(jl, 0.0);
        }
    }
    if boundary == Boundary::Periodic {
        h[[0, sites - 1]] = C64::new(jr, 0.0);
        h[[sites - 1, 0]] = C64::new(jl, 0.0);
    }
    let labels = (0..sites)
        .map(|n| SiteLabel {
            cell: n + 1,
            sublattice: 0,
        })
        .collect();
    Ok(Hamiltonian {
        dim: sites,
        entries: h,
        labels,
        spec: Some(ModelSpec::Quasicrystal {
            jr,
            jl,
            v,
            alpha_num,
            alpha_den,
            sites,
            boundary,
        }),
    })
}

/// Momentum-space PT-symmetric SSH block
/// [[i*u, w*e^{-ik} + v], [w*e^{ik} + v, -i*u]].
pub fn build_pt_ssh_bloch(u: f64, v: f64, w: f64, k: f64) -> Result<Hamiltonian> {
    require_finite("u", u)?;
    require_finite("v", v)?;
    require_finite("w", w)?;
    require_finite("k", k)?;
    if k.abs() > PI + 1e-12 {
        return Err(Error::InvalidSpec(format!(
            "wave vector k = {k} outside [-pi, pi]"
        )));
    }
    let mut h = Array2::<C64>::zeros((2, 2));
    h[[0, 0]] = C64::new(0.0, u);
    h[[1, 1]] = C64::new(0.0, -u);
    h[[0, 1]] = C64::from_polar(w, -k) + v;
    h[[1, 0]] = C64::from_polar(w, k) + v;
    Ok(Hamiltonian {
        dim: 2,
        entries: h,
        labels: two_band_labels(1),
        spec: Some(ModelSpec::PtSshBloch { u, v, w, k }),
    })
}

fn three_band_labels(cells: usize) -> Vec<SiteLabel> {
    (0..cells)
        .flat_map(|n| {
            (0..3u8).map(move |s| SiteLabel {
                cell: n + 1,
                sublattice: s,
            })
        })
        .collect()
}

/// Three-band chain (dimension `3 * cells`): per cell A->B and C->B carry
/// amplitude `g`, B->A and B->C carry `1/g`; the C_n <-> A_{n+1} link is
/// symmetric with amplitude `g`. Everything is scaled by `t0`.
pub fn build_sturm_liouville_chain(
    t0: f64,
    g: f64,
    cells: usize,
    boundary: Boundary,
) -> Result<Hamiltonian> {
    require_finite("t0", t0)?;
    require_finite("g", g)?;
    if g == 0.0 {
        return Err(Error::InvalidSpec("g must be nonzero".into()));
    }
    if cells < 2 {
        return Err(Error::InvalidSpec(format!("cells = {cells}, need >= 2")));
    }
    let dim = 3 * cells;
    let mut h = Array2::<C64>::zeros((dim, dim));
    let re = |x: f64| C64::new(x, 0.0);
    for n in 0..cells {
        let a = 3 * n;
        let b = 3 * n + 1;
        let c = 3 * n + 2;
        h[[b, a]] = re(t0 * g); // A -> B
        h[[a, b]] = re(t0 / g); // B -> A
        h[[b, c]] = re(t0 * g); // C -> B
        h[[c, b]] = re(t0 / g); // B -> C
        if n + 1 < cells {
            h[[3 * n + 3, c]] = re(t0 * g); // C_n -> A_{n+1}
            h[[c, 3 * n + 3]] = re(t0 * g); // A_{n+1} -> C_n
        }
    }
    if boundary == Boundary::Periodic {
        let c_last = dim - 1;
        h[[0, c_last]] = re(t0 * g);
        h[[c_last, 0]] = re(t0 * g);
    }
    Ok(Hamiltonian {
        dim,
        entries: h,
        labels: three_band_labels(cells),
        spec: Some(ModelSpec::SturmLiouvilleChain {
            t0,
            g,
            cells,
            boundary,
        }),
    })
}

/// Ingest a matrix file (see [`crate::io`] for the format).
pub fn load_hamiltonian<P: AsRef<Path>>(path: P) -> Result<Hamiltonian> {
    let path = path.as_ref();
    let entries = crate::io::read_matrix_file(path)?;
    let mut h = Hamiltonian::from_matrix(entries)?;
    h.spec = Some(ModelSpec::External {
        path: path.display().to_string(),
    });
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(h: &Hamiltonian, i: usize, j: usize) -> f64 {
        assert!(h.entries[[i, j]].im == 0.0);
        h.entries[[i, j]].re
    }

    #[test]
    fn ssh_hermitian_at_g_zero() {
        let h = build_nonreciprocal_ssh(1.0, 1.0, 0.0, 2, Boundary::Open).unwrap();
        assert_eq!(h.dim, 4);
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn ssh_intercell_asymmetry() {
        let h = build_nonreciprocal_ssh(0.5, 1.0, 0.1, 3, Boundary::Open).unwrap();
        assert_eq!(h.dim, 6);
        // B_1 -> A_2 carries t2 + g, the reverse t2 - g.
        assert_eq!(re(&h, 1, 2), 1.1);
        assert_eq!(re(&h, 2, 1), 0.9);
    }

    #[test]
    fn ssh_defect_norm_on_intercell_block() {
        // 4x4 by hand: the only non-Hermitian entries are the single
        // intercell pair, each off by 2g from the conjugate transpose.
        let g = 0.1;
        let h = build_nonreciprocal_ssh(0.5, 1.0, g, 2, Boundary::Open).unwrap();
        let mut defect_sq = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                defect_sq += (h.entries[[i, j]] - h.entries[[j, i]].conj()).norm_sqr();
            }
        }
        let expected = 2.0 * g.abs() * 2.0f64.sqrt();
        assert!((defect_sq.sqrt() - expected).abs() < 1e-14);
    }

    #[test]
    fn ssh_rejects_bad_input() {
        assert!(build_nonreciprocal_ssh(f64::NAN, 1.0, 0.0, 4, Boundary::Open).is_err());
        assert!(build_nonreciprocal_ssh(1.0, 1.0, 0.0, 1, Boundary::Open).is_err());
    }

    #[test]
    fn two_level_entries() {
        let h = build_two_level(0.0).unwrap();
        assert_eq!(re(&h, 0, 1), 0.0);
        assert_eq!(re(&h, 1, 0), 1.0);
        let h = build_two_level(1.0).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn quasicrystal_zero_potential_is_circulant() {
        let h = build_quasicrystal(1.0, 0.5, 0.0, 239, 169, 169, Boundary::Periodic).unwrap();
        for n in 0..169 {
            assert_eq!(h.entries[[n, n]], C64::new(0.0, 0.0));
        }
        // Every row is the cyclic shift of the previous one.
        for i in 0..169 {
            for j in 0..169 {
                let ii = (i + 1) % 169;
                let jj = (j + 1) % 169;
                assert_eq!(h.entries[[i, j]], h.entries[[ii, jj]]);
            }
        }
    }

    #[test]
    fn quasicrystal_integer_phase_site() {
        // n = 169: exponent is an integer multiple of 2*pi*i.
        let h = build_quasicrystal(1.0, 0.5, 1.0, 239, 169, 169, Boundary::Periodic).unwrap();
        let d = h.entries[[168, 168]];
        assert!((d - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn quasicrystal_rejects_negative_v_and_non_coprime_alpha() {
        assert!(build_quasicrystal(1.0, 0.5, -0.1, 239, 169, 169, Boundary::Periodic).is_err());
        assert!(build_quasicrystal(1.0, 0.5, 0.5, 4, 2, 10, Boundary::Open).is_err());
    }

    #[test]
    fn pt_ssh_bloch_at_k_zero_and_pi() {
        let h = build_pt_ssh_bloch(0.5, 0.8, 0.7, 0.0).unwrap();
        assert_eq!(h.entries[[0, 0]], C64::new(0.0, 0.5));
        assert!((h.entries[[0, 1]] - C64::new(1.5, 0.0)).norm() < 1e-15);
        let h = build_pt_ssh_bloch(0.5, 0.8, 0.7, PI).unwrap();
        assert!((h.entries[[0, 1]] - C64::new(0.1, 0.0)).norm() < 1e-15);
        assert!((h.entries[[1, 0]] - C64::new(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pt_ssh_symmetry_exact() {
        // sigma_x H sigma_x == conj(H), entrywise.
        let params = [
            (0.5, 0.8, 0.7, 1.3),
            (-0.2, 0.4, 1.1, -2.0),
            (0.0, 1.0, 0.0, 0.5),
        ];
        for (u, v, w, k) in params {
            let h = build_pt_ssh_bloch(u, v, w, k).unwrap().entries;
            assert_eq!(h[[1, 1]], h[[0, 0]].conj());
            assert_eq!(h[[1, 0]], h[[0, 1]].conj());
        }
    }

    #[test]
    fn sturm_liouville_term_placement() {
        let h = build_sturm_liouville_chain(1.0, 2.0, 2, Boundary::Open).unwrap();
        assert_eq!(h.dim, 6);
        assert_eq!(re(&h, 1, 0), 2.0); // B1 row, A1 column
        assert_eq!(re(&h, 0, 1), 0.5); // A1 row, B1 column
        assert_eq!(re(&h, 3, 2), 2.0); // A2 row, C1 column (symmetric link)
        assert_eq!(re(&h, 2, 3), 2.0);
        // Chain terminates on C of the last cell with no dangling bonds.
        assert_eq!(re(&h, 5, 0), 0.0);
    }

    #[test]
    fn sturm_liouville_hermitian_at_g_one() {
        let h = build_sturm_liouville_chain(1.0, 1.0, 2, Boundary::Open).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert!(build_sturm_liouville_chain(1.0, 0.0, 2, Boundary::Open).is_err());
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let spec = ModelSpec::NonReciprocalSsh {
            t1: 0.37,
            t2: 1.0,
            g: 0.1,
            cells: 11,
            boundary: Boundary::Open,
        };
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn with_param_rejects_unknown_axis() {
        let spec = ModelSpec::TwoLevel { gamma: 1.0 };
        assert!(spec.with_param("gamma", 2.0).is_ok());
        assert!(spec.with_param("t1", 2.0).is_err());
    }
}
