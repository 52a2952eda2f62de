//! Sampled-domain membership oracles for the four passivity families and
//! their lossless, hyper-bounded and anti-bounded variants, plus the
//! realization-level transforms that connect the families.
//!
//! A failing report carries a concrete counterexample point. A passing
//! report is evidence only: the margin is a minimum over finitely many
//! samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, checked_inverse, eye, CMat, Complex64};
use crate::qmi::{Family, FamilyTag};
use crate::realization::{Realization, COND_MAX};

/// Absolute tolerance on oracle margins.
pub const TOL_ORACLE: f64 = 1e-8;
pub const DEFAULT_BOUNDARY_POINTS: usize = 64;
pub const DEFAULT_INTERIOR_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Open right half-plane, boundary `iℝ`.
    RightHalfPlane,
    /// `|z| > 1`, boundary the unit circle.
    ExteriorDisk,
    /// `|z| < 1`, boundary the unit circle. Only used for the discrete
    /// families under the `z ↦ 1/z` convention that the bilinear map
    /// `z ↦ (1+z)/(1−z)` is written for.
    UnitDisk,
}

impl Domain {
    pub fn contains_interior(self, z: Complex64) -> bool {
        match self {
            Domain::RightHalfPlane => z.re > 0.0,
            Domain::ExteriorDisk => z.norm() > 1.0,
            Domain::UnitDisk => z.norm() < 1.0,
        }
    }

    pub fn boundary_distance(self, z: Complex64) -> f64 {
        match self {
            Domain::RightHalfPlane => z.re.abs(),
            Domain::ExteriorDisk | Domain::UnitDisk => (z.norm() - 1.0).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGrid {
    pub domain: Domain,
    pub boundary: Vec<Complex64>,
    pub interior: Vec<Complex64>,
    pub seed: u64,
}

impl DomainGrid {
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.boundary.iter().chain(self.interior.iter()).copied()
    }
}

/// Boundary sweep plus seeded interior samples.
///
/// On `iℝ` the sweep is `i·tan(θ/2)` over a symmetric set of angles that
/// contains `θ = 0` and stays away from the compactification point `θ = π`.
pub fn make_grid(domain: Domain, n_boundary: usize, n_interior: usize, seed: u64) -> DomainGrid {
    let boundary = match domain {
        Domain::RightHalfPlane => {
            let half = (n_boundary / 2) as f64;
            (0..n_boundary)
                .map(|k| {
                    let theta = PI * (k as f64 - half) / (half + 1.0);
                    c(0.0, (theta / 2.0).tan())
                })
                .collect()
        }
        Domain::ExteriorDisk | Domain::UnitDisk => (0..n_boundary)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n_boundary as f64))
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let open_unit = |rng: &mut ChaCha8Rng| loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    };
    let interior = (0..n_interior)
        .map(|_| {
            let u = open_unit(&mut rng);
            let v = open_unit(&mut rng);
            match domain {
                Domain::RightHalfPlane => c(u / (1.0 - u), (PI * (v - 0.5)).tan()),
                Domain::ExteriorDisk => Complex64::from_polar(1.0 / (1.0 - u), 2.0 * PI * v),
                Domain::UnitDisk => Complex64::from_polar(u.sqrt() * (1.0 - 1e-12), 2.0 * PI * v),
            }
        })
        .collect();
    DomainGrid { domain, boundary, interior, seed }
}

/// The natural sampling domain of each family.
pub fn domain_for(family: Family) -> Domain {
    if family.is_discrete() {
        Domain::ExteriorDisk
    } else {
        Domain::RightHalfPlane
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum OracleKind {
    Family { family: Family },
    LosslessPositive,
    LosslessBounded,
    HyperBounded { eta: f64 },
    HyperDiscreteBounded { eta: f64 },
    AntiDiscreteBounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// What a verdict is backed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    /// A concrete sample violates the defining inequality.
    Counterexample,
    /// All samples satisfy it; not a proof of membership.
    SampledOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub kind: OracleKind,
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub worst_point: Option<Complex64>,
    #[serde(with = "crate::io::ext_f64")]
    pub worst_margin: f64,
    /// `‖F(z)‖₂` at the worst point.
    pub worst_norm: f64,
    pub samples_used: usize,
    pub skipped_poles: usize,
    pub tol_oracle: f64,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

struct Sweep {
    worst_point: Option<Complex64>,
    worst_margin: f64,
    worst_norm: f64,
    used: usize,
    skipped: usize,
}

fn sweep(
    r: &Realization,
    points: impl Iterator<Item = Complex64>,
    margin: impl Fn(&CMat) -> f64,
) -> Sweep {
    let mut s = Sweep {
        worst_point: None,
        worst_margin: f64::INFINITY,
        worst_norm: 0.0,
        used: 0,
        skipped: 0,
    };
    for z in points {
        match r.evaluate(z) {
            Ok(sample) => {
                s.used += 1;
                let mg = margin(&sample.value);
                if mg < s.worst_margin || s.worst_point.is_none() {
                    s.worst_margin = mg;
                    s.worst_point = Some(z);
                    s.worst_norm = linalg::spectral_norm(&sample.value);
                }
            }
            Err(_) => s.skipped += 1,
        }
    }
    s
}

fn report(kind: OracleKind, s: Sweep, tol: f64, strict: bool) -> MembershipReport {
    let pass = if strict { s.worst_margin > tol } else { s.worst_margin >= -tol };
    MembershipReport {
        kind,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        evidence: if pass { Evidence::SampledOnly } else { Evidence::Counterexample },
        worst_point: s.worst_point,
        worst_margin: s.worst_margin,
        worst_norm: s.worst_norm,
        samples_used: s.used,
        skipped_poles: s.skipped,
        tol_oracle: tol,
    }
}

fn positive_margin(f: &CMat) -> f64 {
    linalg::min_eig(&(f + f.adjoint()))
}

fn bounded_margin(bound: f64) -> impl Fn(&CMat) -> f64 {
    move |f: &CMat| bound - linalg::spectral_norm(f)
}

fn hyper_bound(eta: f64) -> Result<f64> {
    if eta.is_nan() || eta <= 1.0 {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok(if eta.is_infinite() { 1.0 } else { ((eta - 1.0) / (eta + 1.0)).sqrt() })
}

/// Margin `min eig(F + F*)` (positive type) or `1 − ‖F‖₂` (bounded type)
/// over the grid. A finite η on a β tag selects the hyper-bounded oracle.
pub fn membership_oracle(
    r: &Realization,
    tag: FamilyTag,
    grid: &DomainGrid,
    tol: f64,
) -> Result<MembershipReport> {
    tag.validate()?;
    let family = tag.family;
    let domain_ok = match family {
        Family::Alpha | Family::Beta => grid.domain == Domain::RightHalfPlane,
        Family::Gamma | Family::Delta => grid.domain != Domain::RightHalfPlane,
    };
    if !domain_ok {
        return Err(Error::DomainMismatch);
    }
    if let (Family::Beta, Some(eta)) = (family, tag.eta) {
        if eta.is_finite() {
            return hyper_bounded_oracle(r, eta, grid, tol);
        }
    }
    let kind = OracleKind::Family { family };
    let s = if family.is_positive_type() {
        sweep(r, grid.points(), positive_margin)
    } else {
        sweep(r, grid.points(), bounded_margin(1.0))
    };
    Ok(report(kind, s, tol, false))
}

/// `σ_min(F(z)) − 1` on the exterior disk; passes only with a strictly positive margin.
pub fn anti_db_oracle(r: &Realization, grid: &DomainGrid, tol: f64) -> Result<MembershipReport> {
    if grid.domain != Domain::ExteriorDisk {
        return Err(Error::DomainMismatch);
    }
    let s = sweep(r, grid.points(), |f| linalg::sigma_min(f) - 1.0);
    Ok(report(OracleKind::AntiDiscreteBounded, s, tol, true))
}

/// `√((η−1)/(η+1)) − ‖F(z)‖₂` over the right half-plane.
pub fn hyper_bounded_oracle(
    r: &Realization,
    eta: f64,
    grid: &DomainGrid,
    tol: f64,
) -> Result<MembershipReport> {
    let bound = hyper_bound(eta)?;
    if grid.domain != Domain::RightHalfPlane {
        return Err(Error::DomainMismatch);
    }
    let s = sweep(r, grid.points(), bounded_margin(bound));
    Ok(report(OracleKind::HyperBounded { eta }, s, tol, false))
}

/// Discrete-time analogue of [`hyper_bounded_oracle`] on the exterior disk.
pub fn hyper_discrete_bounded_oracle(
    r: &Realization,
    eta: f64,
    grid: &DomainGrid,
    tol: f64,
) -> Result<MembershipReport> {
    let bound = hyper_bound(eta)?;
    if grid.domain != Domain::ExteriorDisk {
        return Err(Error::DomainMismatch);
    }
    let s = sweep(r, grid.points(), bounded_margin(bound));
    Ok(report(OracleKind::HyperDiscreteBounded { eta }, s, tol, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LosslessKind {
    /// `F(z) + F(z)* = 0` on `iℝ`.
    Positive,
    /// `F(z)*F(z) = I` on `iℝ`.
    Bounded,
}

/// Boundary degeneracy on `iℝ` combined with the parent-family oracle.
pub fn lossless_boundary_oracle(
    r: &Realization,
    kind: LosslessKind,
    grid: &DomainGrid,
    tol: f64,
) -> Result<MembershipReport> {
    if grid.domain != Domain::RightHalfPlane {
        return Err(Error::DomainMismatch);
    }
    let m = r.m();
    let boundary = match kind {
        LosslessKind::Positive => sweep(r, grid.boundary.iter().copied(), |f| {
            -linalg::spectral_norm(&(f + f.adjoint()))
        }),
        LosslessKind::Bounded => sweep(r, grid.boundary.iter().copied(), |f| {
            -linalg::spectral_norm(&(f.adjoint() * f - eye(m)))
        }),
    };
    let (parent, oracle_kind) = match kind {
        LosslessKind::Positive => (Family::Alpha, OracleKind::LosslessPositive),
        LosslessKind::Bounded => (Family::Beta, OracleKind::LosslessBounded),
    };
    let parent_report = membership_oracle(r, parent.into(), grid, tol)?;
    let boundary_pass = boundary.worst_margin >= -tol;
    let pass = boundary_pass && parent_report.passed();
    let (worst_point, worst_margin, worst_norm) =
        if !boundary_pass || boundary.worst_margin <= parent_report.worst_margin {
            (boundary.worst_point, boundary.worst_margin, boundary.worst_norm)
        } else {
            (parent_report.worst_point, parent_report.worst_margin, parent_report.worst_norm)
        };
    Ok(MembershipReport {
        kind: oracle_kind,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        evidence: if pass { Evidence::SampledOnly } else { Evidence::Counterexample },
        worst_point,
        worst_margin,
        worst_norm,
        samples_used: boundary.used + parent_report.samples_used,
        skipped_poles: boundary.skipped + parent_report.skipped_poles,
        tol_oracle: tol,
    })
}

/// Realization of `𝒞(F) = (I − F)(I + F)⁻¹`.
pub fn cayley_function(r: &Realization) -> Result<Realization> {
    let m = r.m();
    let id = eye(m);
    let k = checked_inverse(&(&id + r.d()), COND_MAX).map_err(Error::SingularIPlusD)?;
    let bk = r.b() * &k;
    Realization::new(
        r.a() - &bk * r.c(),
        bk,
        -(&k * r.c()).scale(2.0),
        (&id - r.d()) * &k,
    )
}

/// Realization of `G(z) = F((1+z)/(1−z))`.
pub fn bilinear_substitute(r: &Realization) -> Result<Realization> {
    let n = r.n();
    let id = eye(n);
    let k = checked_inverse(&(&id + r.a()), COND_MAX).map_err(Error::SingularIPlusA)?;
    let a2 = -(&k * (&id - r.a()));
    let b2 = &k * r.b();
    let c2 = r.c() * (&id - &a2);
    let d2 = r.d() - r.c() * &b2;
    Realization::new(a2, b2, c2, d2)
}
