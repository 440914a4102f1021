//! Reaction terms, scaling transforms and closed-form traveling waves.
//!
//! The governing equation is `∂t u = D ∇²u + R(u)` with the reaction family
//! `R(u) = ρ u^p (1 - u^q) (u - a)^r`. Under `τ = ρ t`, `ξ = √(ρ/D) x` every
//! member reduces to the unit-coefficient equation
//! `∂τ v = ∇²v + v^p (1 - v^q)(v - a)^r`, which is the only equation the
//! network is ever trained on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Arguments beyond this magnitude saturate the closed forms to an equilibrium.
const SATURATION: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    Fisher,
    Nws,
    Zeldovich,
    Bistable,
}

impl EquationKind {
    pub fn name(self) -> &'static str {
        match self {
            EquationKind::Fisher => "fisher",
            EquationKind::Nws => "nws",
            EquationKind::Zeldovich => "zeldovich",
            EquationKind::Bistable => "bistable",
        }
    }
}

/// One member of the reaction family together with the equilibria its
/// traveling wave connects (`v_minus` as ζ → -∞, `v_plus` as ζ → +∞).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReactionRepr", into = "ReactionRepr")]
pub struct ReactionSpec {
    pub kind: EquationKind,
    pub p: f64,
    pub q: f64,
    pub r: u8,
    pub a: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

#[derive(Serialize, Deserialize)]
struct ReactionRepr {
    kind: EquationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
}

impl TryFrom<ReactionRepr> for ReactionSpec {
    type Error = Error;

    fn try_from(repr: ReactionRepr) -> Result<Self> {
        make_reaction(repr.kind, repr.q, repr.a)
    }
}

impl From<ReactionSpec> for ReactionRepr {
    fn from(spec: ReactionSpec) -> Self {
        ReactionRepr {
            kind: spec.kind,
            q: (spec.kind == EquationKind::Nws).then_some(spec.q),
            a: (spec.kind == EquationKind::Bistable).then_some(spec.a),
        }
    }
}

/// Builds the reaction term for one of the four supported equations.
///
/// `q_param` is required for NWS, `a_param` for the bistable equation; both
/// are ignored otherwise.
pub fn make_reaction(
    kind: EquationKind,
    q_param: Option<f64>,
    a_param: Option<f64>,
) -> Result<ReactionSpec> {
    let spec = match kind {
        EquationKind::Fisher => ReactionSpec {
            kind,
            p: 1.0,
            q: 1.0,
            r: 0,
            a: 0.0,
            v_minus: 1.0,
            v_plus: 0.0,
        },
        EquationKind::Nws => {
            let q = q_param.ok_or_else(|| Error::param("q", "required for the NWS equation"))?;
            if !(q.is_finite() && q > 0.0) {
                return Err(Error::param("q", format!("must be a positive real, got {q}")));
            }
            ReactionSpec {
                kind,
                p: 1.0,
                q,
                r: 0,
                a: 0.0,
                v_minus: 1.0,
                v_plus: 0.0,
            }
        }
        EquationKind::Zeldovich => ReactionSpec {
            kind,
            p: 2.0,
            q: 1.0,
            r: 0,
            a: 0.0,
            v_minus: 1.0,
            v_plus: 0.0,
        },
        EquationKind::Bistable => {
            let a = a_param
                .ok_or_else(|| Error::param("a", "required for the bistable equation"))?;
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::param("a", format!("must lie in (0, 1), got {a}")));
            }
            ReactionSpec {
                kind,
                p: 1.0,
                q: 1.0,
                r: 1,
                a,
                v_minus: a,
                v_plus: 1.0,
            }
        }
    };
    Ok(spec)
}

impl ReactionSpec {
    pub fn fisher() -> Self {
        make_reaction(EquationKind::Fisher, None, None).expect("preset is valid")
    }

    pub fn nws(q: f64) -> Result<Self> {
        make_reaction(EquationKind::Nws, Some(q), None)
    }

    pub fn zeldovich() -> Self {
        make_reaction(EquationKind::Zeldovich, None, None).expect("preset is valid")
    }

    pub fn bistable(a: f64) -> Result<Self> {
        make_reaction(EquationKind::Bistable, None, Some(a))
    }

    /// Parses the short names used by the CLI and harness: `fisher`,
    /// `zeldovich`, `nws<q>` (e.g. `nws2`), `bistable` (a = 0.2) or
    /// `bistable<a>` (e.g. `bistable0.3`).
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "fisher" => return Ok(Self::fisher()),
            "zeldovich" => return Ok(Self::zeldovich()),
            "bistable" => return Self::bistable(0.2),
            "nws" => return Self::nws(2.0),
            _ => {}
        }
        let parse = |rest: &str| {
            rest.parse::<f64>()
                .map_err(|_| Error::Config(format!("unknown equation name `{name}`")))
        };
        if let Some(rest) = lower.strip_prefix("nws") {
            Self::nws(parse(rest)?)
        } else if let Some(rest) = lower.strip_prefix("bistable") {
            Self::bistable(parse(rest)?)
        } else {
            Err(Error::Config(format!("unknown equation name `{name}`")))
        }
    }

    /// Inverse of [`ReactionSpec::from_name`].
    pub fn name(&self) -> String {
        match self.kind {
            EquationKind::Nws => format!("nws{}", self.q),
            EquationKind::Bistable if self.a == 0.2 => "bistable".to_string(),
            EquationKind::Bistable => format!("bistable{}", self.a),
            kind => kind.name().to_string(),
        }
    }

    /// Unit-coefficient reaction `u^p (1 - u^q) (u - a)^r`.
    #[inline]
    pub fn unit_reaction(&self, u: f64) -> f64 {
        let base = u.powf(self.p) * (1.0 - u.powf(self.q));
        if self.r == 1 {
            base * (u - self.a)
        } else {
            base
        }
    }

    /// Derivative of [`ReactionSpec::unit_reaction`] with respect to `u`.
    #[inline]
    pub fn unit_reaction_deriv(&self, u: f64) -> f64 {
        let up = u.powf(self.p);
        let uq = u.powf(self.q);
        // d/du [u^p (1 - u^q)] = p u^(p-1) (1 - u^q) - q u^(p+q-1)
        let g = self.p * u.powf(self.p - 1.0) * (1.0 - uq) - self.q * u.powf(self.p + self.q - 1.0);
        if self.r == 1 {
            g * (u - self.a) + up * (1.0 - uq)
        } else {
            g
        }
    }
}

/// `ρ u^p (1 - u^q)(u - a)^r`.
pub fn reaction_eval(spec: &ReactionSpec, u: f64, rho: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite("reaction argument"));
    }
    Ok(rho * spec.unit_reaction(u))
}

/// Reaction coefficient ρ and diffusion coefficient D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCoeffs {
    pub rho: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl PhysicalCoeffs {
    pub fn new(rho: f64, d: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::param("rho", format!("must be positive, got {rho}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::param("D", format!("must be positive, got {d}")));
        }
        Ok(Self { rho, d })
    }

    pub fn unit() -> Self {
        Self { rho: 1.0, d: 1.0 }
    }

    /// √(ρ/D), the factor mapping physical lengths to scaled lengths.
    #[inline]
    pub fn length_scale(&self) -> f64 {
        (self.rho / self.d).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalPoint {
    pub x: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaledPoint {
    pub xi: Vec<f64>,
    pub tau: f64,
}

impl PhysicalPoint {
    pub fn new(x: impl Into<Vec<f64>>, t: f64) -> Self {
        Self { x: x.into(), t }
    }
}

impl ScaledPoint {
    pub fn new(xi: impl Into<Vec<f64>>, tau: f64) -> Self {
        Self { xi: xi.into(), tau }
    }
}

/// `τ = ρ t`, `ξ = √(ρ/D) x`.
pub fn scale_forward(coeffs: &PhysicalCoeffs, point: &PhysicalPoint) -> ScaledPoint {
    let k = coeffs.length_scale();
    ScaledPoint {
        xi: point.x.iter().map(|&x| k * x).collect(),
        tau: coeffs.rho * point.t,
    }
}

/// Inverse of [`scale_forward`]. Field values pass through unchanged.
pub fn scale_inverse(coeffs: &PhysicalCoeffs, point: &ScaledPoint) -> PhysicalPoint {
    // Dividing by the same factor keeps the round trip within an ulp or two.
    let k = coeffs.length_scale();
    PhysicalPoint {
        x: point.xi.iter().map(|&xi| xi / k).collect(),
        t: point.tau / coeffs.rho,
    }
}

/// Wave speed of the closed-form traveling wave.
pub fn exact_speed(spec: &ReactionSpec, coeffs: &PhysicalCoeffs) -> f64 {
    let rd = coeffs.rho * coeffs.d;
    match spec.kind {
        EquationKind::Fisher => 5.0 * (rd / 6.0).sqrt(),
        EquationKind::Nws => (spec.q + 4.0) / (2.0 * spec.q + 4.0).sqrt() * rd.sqrt(),
        EquationKind::Zeldovich => (rd / 2.0).sqrt(),
        EquationKind::Bistable => -(1.0 + spec.a) * (rd / 2.0).sqrt(),
    }
}

/// Factor `k` such that the closed form depends on `k (n·x - c t)`.
pub fn front_steepness(spec: &ReactionSpec, coeffs: &PhysicalCoeffs) -> f64 {
    let (rho, d) = (coeffs.rho, coeffs.d);
    match spec.kind {
        EquationKind::Fisher => (rho / (6.0 * d)).sqrt(),
        EquationKind::Nws => spec.q / (2.0 * spec.q + 4.0).sqrt() * (rho / d).sqrt(),
        EquationKind::Zeldovich => (rho / (2.0 * d)).sqrt(),
        EquationKind::Bistable => (1.0 - spec.a) / 4.0 * (2.0 * rho / d).sqrt(),
    }
}

/// Closed-form profile as a function of the physical wave coordinate
/// `ζ = n·x - c t`.
pub fn exact_profile(spec: &ReactionSpec, coeffs: &PhysicalCoeffs, zeta: f64) -> f64 {
    let (rho, d) = (coeffs.rho, coeffs.d);
    match spec.kind {
        EquationKind::Fisher => {
            let arg = (rho / (6.0 * d)).sqrt() * zeta;
            if arg > SATURATION {
                return spec.v_plus;
            }
            let s = 1.0 / (1.0 + arg.exp());
            s * s
        }
        EquationKind::Nws => {
            let q = spec.q;
            let y = -q / (2.0 * (2.0 * q + 4.0).sqrt()) * (rho / d).sqrt() * zeta;
            // 1/2 + tanh(y)/2 == σ(2y), which keeps full precision in the tail.
            if 2.0 * y < -SATURATION {
                return spec.v_plus;
            }
            math::logistic(2.0 * y).powf(2.0 / q)
        }
        EquationKind::Zeldovich => {
            let arg = (rho / (2.0 * d)).sqrt() * zeta;
            if arg > SATURATION {
                return spec.v_plus;
            }
            1.0 / (1.0 + arg.exp())
        }
        EquationKind::Bistable => {
            let a = spec.a;
            let y = (1.0 - a) / 4.0 * (2.0 * rho / d).sqrt() * zeta;
            if y > SATURATION {
                return spec.v_plus;
            }
            if y < -SATURATION {
                return spec.v_minus;
            }
            0.5 * (1.0 + a) + 0.5 * (1.0 - a) * y.tanh()
        }
    }
}

/// Evaluates the closed-form traveling wave at a physical point.
///
/// `n_dir` must already be a unit vector with the same dimension as the point.
pub fn exact_solution(
    spec: &ReactionSpec,
    coeffs: &PhysicalCoeffs,
    n_dir: &[f64],
    point: &PhysicalPoint,
) -> Result<f64> {
    if n_dir.len() != point.x.len() {
        return Err(Error::Shape(format!(
            "direction has dimension {}, point has {}",
            n_dir.len(),
            point.x.len()
        )));
    }
    if (math::norm(n_dir) - 1.0).abs() > 1e-12 {
        return Err(Error::param("n_dir", "must be a unit vector"));
    }
    if !point.t.is_finite() || point.x.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("exact_solution input"));
    }
    let zeta = math::dot(n_dir, &point.x) - exact_speed(spec, coeffs) * point.t;
    Ok(exact_profile(spec, coeffs, zeta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reaction_table() {
        let f = ReactionSpec::fisher();
        assert_eq!((f.p, f.q, f.r, f.v_minus, f.v_plus), (1.0, 1.0, 0, 1.0, 0.0));
        let b = ReactionSpec::bistable(0.2).unwrap();
        assert_eq!((b.p, b.q, b.r, b.a, b.v_minus, b.v_plus), (1.0, 1.0, 1, 0.2, 0.2, 1.0));
        let n = ReactionSpec::nws(2.0).unwrap();
        assert_eq!((n.p, n.q, n.r), (1.0, 2.0, 0));
        let z = ReactionSpec::zeldovich();
        assert_eq!((z.p, z.q, z.r), (2.0, 1.0, 0));
    }

    #[test]
    fn missing_or_bad_parameters_name_the_field() {
        let err = make_reaction(EquationKind::Nws, None, None).unwrap_err();
        assert!(matches!(err, Error::Parameter { field: "q", .. }));
        let err = make_reaction(EquationKind::Nws, Some(-1.0), None).unwrap_err();
        assert!(matches!(err, Error::Parameter { field: "q", .. }));
        let err = make_reaction(EquationKind::Bistable, None, Some(1.0)).unwrap_err();
        assert!(matches!(err, Error::Parameter { field: "a", .. }));
        assert!(PhysicalCoeffs::new(0.0, 1.0).is_err());
        assert!(PhysicalCoeffs::new(1.0, -2.0).is_err());
    }

    #[test]
    fn reaction_values() {
        let f = ReactionSpec::fisher();
        assert_eq!(reaction_eval(&f, 0.5, 1.0).unwrap(), 0.25);
        let b = ReactionSpec::bistable(0.2).unwrap();
        assert!((reaction_eval(&b, 0.5, 2.0).unwrap() - 0.15).abs() < 1e-15);
        assert!(reaction_eval(&f, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn equilibria_are_roots() {
        let specs = [
            ReactionSpec::fisher(),
            ReactionSpec::zeldovich(),
            ReactionSpec::nws(0.5).unwrap(),
            ReactionSpec::nws(2.0).unwrap(),
            ReactionSpec::nws(3.7).unwrap(),
            ReactionSpec::bistable(0.2).unwrap(),
            ReactionSpec::bistable(0.73).unwrap(),
        ];
        for s in specs {
            assert_eq!(reaction_eval(&s, s.v_minus, 3.0).unwrap(), 0.0, "{s:?}");
            assert_eq!(reaction_eval(&s, s.v_plus, 3.0).unwrap(), 0.0, "{s:?}");
        }
    }

    #[test]
    fn reaction_derivative_matches_central_difference() {
        let specs = [
            ReactionSpec::fisher(),
            ReactionSpec::zeldovich(),
            ReactionSpec::nws(3.0).unwrap(),
            ReactionSpec::bistable(0.2).unwrap(),
        ];
        for s in specs {
            for &u in &[0.1, 0.35, 0.5, 0.9] {
                let h = 1e-6;
                let fd = (s.unit_reaction(u + h) - s.unit_reaction(u - h)) / (2.0 * h);
                assert!((fd - s.unit_reaction_deriv(u)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let c = PhysicalCoeffs::new(4.0, 1.0).unwrap();
        let s = scale_forward(&c, &PhysicalPoint::new(vec![2.0], 3.0));
        assert_eq!(s, ScaledPoint::new(vec![4.0], 12.0));
        assert_eq!(scale_inverse(&c, &s), PhysicalPoint::new(vec![2.0], 3.0));

        let c = PhysicalCoeffs::new(1e6, 1.0).unwrap();
        let s = scale_forward(&c, &PhysicalPoint::new(vec![1e-3, 0.0], 0.0));
        assert_eq!(s, ScaledPoint::new(vec![1.0, 0.0], 0.0));

        let c = PhysicalCoeffs::new(1e2, 4.0).unwrap();
        let p = scale_inverse(&c, &ScaledPoint::new(vec![5.0], 10.0));
        assert_eq!(p, PhysicalPoint::new(vec![1.0], 0.1));

        let id = PhysicalCoeffs::unit();
        let p = PhysicalPoint::new(vec![0.3, -7.0], 2.5);
        let s = scale_forward(&id, &p);
        assert_eq!((s.xi.as_slice(), s.tau), (p.x.as_slice(), p.t));
    }

    #[test]
    fn special_speeds() {
        let unit = PhysicalCoeffs::unit();
        let f = exact_speed(&ReactionSpec::fisher(), &unit);
        assert!((f - 2.041_241_452_3).abs() < 1e-9);
        let n = exact_speed(&ReactionSpec::nws(2.0).unwrap(), &unit);
        assert!((n - 2.121_320_343_6).abs() < 1e-9);
        let b = exact_speed(&ReactionSpec::bistable(0.2).unwrap(), &unit);
        assert!((b + 0.848_528_137_4).abs() < 1e-9);
        let z = exact_speed(&ReactionSpec::zeldovich(), &unit);
        assert!((z - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_at_origin() {
        let unit = PhysicalCoeffs::unit();
        let at0 = |s: ReactionSpec| exact_profile(&s, &unit, 0.0);
        assert_eq!(at0(ReactionSpec::fisher()), 0.25);
        assert_eq!(at0(ReactionSpec::zeldovich()), 0.5);
        assert!((at0(ReactionSpec::bistable(0.2).unwrap()) - 0.6).abs() < 1e-15);
        assert_eq!(at0(ReactionSpec::nws(2.0).unwrap()), 0.5);
    }

    #[test]
    fn closed_forms_saturate() {
        let c = PhysicalCoeffs::new(1e12, 1.0).unwrap();
        for s in [
            ReactionSpec::fisher(),
            ReactionSpec::zeldovich(),
            ReactionSpec::nws(2.0).unwrap(),
            ReactionSpec::bistable(0.2).unwrap(),
        ] {
            let lo = exact_profile(&s, &c, -1.0);
            let hi = exact_profile(&s, &c, 1.0);
            assert_eq!(lo, s.v_minus, "{s:?}");
            assert_eq!(hi, s.v_plus, "{s:?}");
        }
    }

    #[test]
    fn exact_solution_rejects_unnormalized_direction() {
        let s = ReactionSpec::fisher();
        let p = PhysicalPoint::new(vec![0.0, 0.0], 0.0);
        let err = exact_solution(&s, &PhysicalCoeffs::unit(), &[1.0, 1.0], &p).unwrap_err();
        assert!(matches!(err, Error::Parameter { field: "n_dir", .. }));
    }

    #[test]
    fn names_round_trip() {
        for name in ["fisher", "zeldovich", "nws2", "nws3", "bistable", "bistable0.3"] {
            assert_eq!(ReactionSpec::from_name(name).unwrap().name(), name);
        }
        assert!(ReactionSpec::from_name("kpp").is_err());
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let b = ReactionSpec::bistable(0.2).unwrap();
        let text = toml::to_string(&b).unwrap();
        let back: ReactionSpec = toml::from_str(&text).unwrap();
        assert_eq!(b, back);
        assert!(toml::from_str::<ReactionSpec>("kind = \"bistable\"\na = 1.5\n").is_err());
    }
}
