//! Material kernels g(t) = Σ kᵢ t^{αᵢ−1} e^{cᵢ t}, their primitives and
//! Laplace transforms, and the sector hypothesis checker.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{jacobi01, legendre01};
use crate::specfun::{gamma, ln_gamma};

/// One summand k t^{α−1} e^{c t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: f64,
    pub alpha: f64,
    pub c: f64,
}

impl Term {
    pub fn new(k: f64, alpha: f64, c: f64) -> Self {
        Self { k, alpha, c }
    }
}

/// An immutable, validated material kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialKernel {
    terms: Vec<Term>,
}

/// Width of the exponential-dominated panels used for cᵢ ≠ 0 primitives.
const EXP_PANEL: f64 = 20.0;

impl MaterialKernel {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidKernel("kernel needs at least one term".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if !(t.k.is_finite() && t.k > 0.0) {
                return Err(Error::InvalidKernel(format!("term {i}: k must be positive, got {}", t.k)));
            }
            if !(t.alpha.is_finite() && t.alpha > 0.0) {
                return Err(Error::InvalidKernel(format!(
                    "term {i}: alpha must be positive, got {}",
                    t.alpha
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidKernel(format!("term {i}: c must be finite")));
            }
        }
        Ok(Self { terms })
    }

    /// Power-type kernel t^{α−1}/Γ(α), so that a(t) = t^α/Γ(α+1).
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidKernel(format!("alpha must be positive, got {alpha}")));
        }
        Self::new(vec![Term::new(1.0 / gamma(alpha), alpha, 0.0)])
    }

    /// Hookean solid, g ≡ 1.
    pub fn hookean() -> Self {
        Self { terms: vec![Term::new(1.0, 1.0, 0.0)] }
    }

    /// Maxwell-type kernel g(t) = e^{ct}.
    pub fn maxwell(c: f64) -> Result<Self> {
        Self::new(vec![Term::new(1.0, 1.0, c)])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn alpha_min(&self) -> f64 {
        self.terms.iter().map(|t| t.alpha).fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.terms.iter().map(|t| t.alpha).fold(f64::NEG_INFINITY, f64::max)
    }

    /// ζ_g = 1 + min αᵢ.
    pub fn zeta_g(&self) -> f64 {
        1.0 + self.alpha_min()
    }

    /// ω₀ = max{0, c₁, …, c_n}.
    pub fn omega0(&self) -> f64 {
        self.terms.iter().map(|t| t.c).fold(0.0, f64::max)
    }

    /// A CSV-safe identifier (the literal form with `;` separators).
    pub fn id(&self) -> String {
        self.to_string().replace(',', ";")
    }

    pub fn eval_g(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|tm| tm.k * t.powf(tm.alpha - 1.0) * (tm.c * t).exp())
            .sum()
    }

    /// a(t) = ∫₀ᵗ g(s) ds.
    pub fn eval_a(&self, t: f64) -> f64 {
        self.primitive(0, t)
    }

    /// Iterated primitive ∫₀ᵗ (t−s)^m / m! g(s) ds; m = 0 gives a(t).
    pub fn primitive(&self, m: u32, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|tm| term_primitive(tm, m, t)).sum()
    }

    /// ĝ(λ) = Σ kᵢ Γ(αᵢ) (λ − cᵢ)^{−αᵢ}, principal branch.
    pub fn laplace_g(&self, lambda: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for tm in &self.terms {
            let z = lambda - tm.c;
            if z.im == 0.0 && z.re <= 0.0 {
                return Err(Error::Domain(format!(
                    "lambda = {lambda} lies on the pole or branch cut of the term with c = {}",
                    tm.c
                )));
            }
            acc += tm.k * gamma(tm.alpha) * z.powf(-tm.alpha);
        }
        Ok(acc)
    }

    /// Multiply every kᵢ by `rho`.
    pub fn scaled(&self, rho: f64) -> Result<Self> {
        Self::new(self.terms.iter().map(|t| Term::new(t.k * rho, t.alpha, t.c)).collect())
    }

    /// Evaluate the sector hypotheses for an operator of angle `psi0`.
    pub fn check_hypotheses(&self, psi0: f64) -> Result<SectorReport> {
        check_hypotheses(self, psi0)
    }
}

fn term_primitive(tm: &Term, m: u32, t: f64) -> f64 {
    let mf = m as f64;
    if tm.c == 0.0 {
        // k Γ(α) t^{α+m} / Γ(α+m+1)
        let ln = tm.k.ln() + ln_gamma(tm.alpha) + (tm.alpha + mf) * t.ln() - ln_gamma(tm.alpha + mf + 1.0);
        return ln.exp();
    }
    // Gauss–Jacobi on [0, t0] absorbs s^{α−1}; beyond, e^{cs} dominates and
    // fixed-width Gauss–Legendre panels suffice.
    let t0 = t.min(EXP_PANEL / tm.c.abs());
    let head = stable_rule(|n| {
        let rule = jacobi01(n, 0.0, tm.alpha - 1.0);
        let f = |x: f64| {
            let s = t0 * x;
            ((t - s).powi(m as i32)) * (tm.c * s).exp()
        };
        t0.powf(tm.alpha) * rule.integrate(f)
    });
    let mut tail = 0.0;
    if t > t0 {
        let panels = ((t - t0) / t0).ceil() as usize;
        let width = (t - t0) / panels as f64;
        tail = stable_rule(|n| {
            let rule = legendre01(n);
            (0..panels)
                .map(|p| {
                    let x0 = t0 + p as f64 * width;
                    width
                        * rule.integrate(|x| {
                            let s = x0 + width * x;
                            s.powf(tm.alpha - 1.0) * (t - s).powi(m as i32) * (tm.c * s).exp()
                        })
                })
                .sum()
        });
    }
    tm.k * (head + tail) / gamma(mf + 1.0)
}

/// Doubles the node count from 16 until two successive values agree to 1e−12.
fn stable_rule<F: FnMut(usize) -> f64>(mut f: F) -> f64 {
    let mut n = 16;
    let mut prev = f(n);
    while n < 256 {
        n *= 2;
        let cur = f(n);
        if (cur - prev).abs() <= 1e-12 * cur.abs().max(f64::MIN_POSITIVE) {
            return cur;
        }
        prev = cur;
    }
    prev
}

impl fmt::Display for MaterialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sum:[")?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{{},{},{}}}", t.k, t.alpha, t.c)?;
        }
        write!(f, "]")
    }
}

/// Kernel literals:
///
/// ```text
/// hookean
/// power:alpha=0.5            (k defaults to 1/Γ(α))
/// power:alpha=0.5,k=2
/// maxwell:c=-1               (k = 1, α = 1)
/// maxwell:c=-1,k=3
/// sum:[{k,alpha,c},...]      e.g. sum:[{2,0.5,0},{1,1,-3}]
/// ```
///
/// Inside `sum:` either `,` or `;` separates the three numbers, and each
/// number may be written as `name=value`.
impl FromStr for MaterialKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h.trim(), r.trim()),
            None => (s, ""),
        };
        let bad = |msg: &str| Error::Config(format!("kernel literal `{s}`: {msg}"));
        match head {
            "hookean" => {
                if !rest.is_empty() {
                    return Err(bad("hookean takes no parameters"));
                }
                Ok(Self::hookean())
            }
            "power" => {
                let kv = parse_kv(rest).map_err(|e| bad(&e))?;
                let alpha = lookup(&kv, "alpha").ok_or_else(|| bad("missing alpha"))?;
                reject_unknown(&kv, &["alpha", "k"]).map_err(|e| bad(&e))?;
                match lookup(&kv, "k") {
                    Some(k) => Self::new(vec![Term::new(k, alpha, 0.0)]),
                    None => Self::power(alpha),
                }
            }
            "maxwell" => {
                let kv = parse_kv(rest).map_err(|e| bad(&e))?;
                let c = lookup(&kv, "c").ok_or_else(|| bad("missing c"))?;
                reject_unknown(&kv, &["c", "k"]).map_err(|e| bad(&e))?;
                Self::new(vec![Term::new(lookup(&kv, "k").unwrap_or(1.0), 1.0, c)])
            }
            "sum" => {
                let inner = rest
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| bad("sum expects [ ... ]"))?;
                let mut terms = Vec::new();
                let mut cursor = inner.trim();
                while !cursor.is_empty() {
                    let open = cursor.strip_prefix('{').ok_or_else(|| bad("expected `{`"))?;
                    let close = open.find('}').ok_or_else(|| bad("unterminated `{`"))?;
                    let fields: Vec<&str> = open[..close].split([',', ';']).map(str::trim).collect();
                    if fields.len() != 3 {
                        return Err(bad("each term needs exactly k, alpha, c"));
                    }
                    let mut vals = [0.0; 3];
                    for (slot, (field, name)) in fields.iter().zip(["k", "alpha", "c"]).enumerate() {
                        let raw = match field.split_once('=') {
                            Some((n, v)) if n.trim() == name => v.trim(),
                            Some(_) => return Err(bad(&format!("expected `{name}=` in position {slot}"))),
                            None => field,
                        };
                        vals[slot] = raw.parse().map_err(|_| bad(&format!("bad number `{raw}`")))?;
                    }
                    terms.push(Term::new(vals[0], vals[1], vals[2]));
                    cursor = open[close + 1..].trim_start_matches([',', ';', ' ']);
                }
                Self::new(terms)
            }
            other => Err(bad(&format!("unknown kernel family `{other}`"))),
        }
    }
}

fn parse_kv(s: &str) -> std::result::Result<Vec<(String, f64)>, String> {
    s.split([',', ';'])
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("expected name=value, got `{p}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("bad number `{}`", v.trim()))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn lookup(kv: &[(String, f64)], name: &str) -> Option<f64> {
    kv.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
}

fn reject_unknown(kv: &[(String, f64)], allowed: &[&str]) -> std::result::Result<(), String> {
    match kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(format!("unknown parameter `{k}`")),
        None => Ok(()),
    }
}

/// Outcome of a hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Degenerate,
    Fail,
}

impl Verdict {
    fn worst(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Degenerate, _) | (_, Degenerate) => Degenerate,
            _ => Pass,
        }
    }
}

/// One hypothesis verdict with the numbers that support it.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub verdict: Verdict,
    pub samples: usize,
    /// Worst sampled value of the checked quantity.
    pub worst: f64,
    /// The bound it was compared against.
    pub bound: f64,
    pub evidence: String,
}

/// Parameters of the sampled sector probe.
#[derive(Debug, Clone, Serialize)]
pub struct SectorProbe {
    pub omega1: f64,
    pub eta1: f64,
    /// π − (α_max + 1)(η₁ + π/2).
    pub psi1: f64,
    pub arg_margin: f64,
    pub ray_angles: Vec<f64>,
    pub radii: Vec<f64>,
}

/// Sector data of a kernel together with hypothesis verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub zeta_g: f64,
    pub omega0: f64,
    pub eta0: f64,
    pub psi0: f64,
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub verdict: Verdict,
    pub hypotheses: Vec<HypothesisCheck>,
    pub probe: SectorProbe,
}

impl SectorReport {
    /// True for DEGENERATE kernels, which are accepted downstream with a warning.
    pub fn warn_degenerate(&self) -> bool {
        self.verdict == Verdict::Degenerate
    }
}

pub const ARG_MARGIN: f64 = 0.05;
const RAYS: usize = 4;

/// Build the sector report for `kernel` and operator angle `psi0`.
pub fn check_hypotheses(kernel: &MaterialKernel, psi0: f64) -> Result<SectorReport> {
    if !(0.0..FRAC_PI_2).contains(&psi0) {
        return Err(Error::Domain(format!("psi0 must lie in [0, pi/2), got {psi0}")));
    }
    let alpha_max = kernel.alpha_max();
    let alpha_min = kernel.alpha_min();
    let zeta_g = 1.0 + alpha_min;
    let omega0 = kernel.omega0();
    let threshold = 1.0 - psi0 / FRAC_PI_2;
    let gap = threshold - alpha_max;
    let analytic = if gap.abs() <= 1e-12 {
        Verdict::Degenerate
    } else if gap > 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let eta0_raw = ((1.0 - alpha_max) * FRAC_PI_2 - psi0) / (1.0 + alpha_max);
    let eta0 = if analytic == Verdict::Pass { eta0_raw } else { 0.0 };

    let omega1 = omega0 + 1.0;
    let eta1 = eta0 / 2.0;
    let psi1 = PI - (alpha_max + 1.0) * (eta1 + FRAC_PI_2);
    let opening = eta1 + FRAC_PI_2;
    let ray_angles: Vec<f64> = (0..RAYS).map(|k| k as f64 / RAYS as f64 * opening).collect();
    let radii: Vec<f64> = (0..=27).map(|j| 10f64.powf(-3.0 + j as f64 / 3.0)).collect();

    let mut nonzero_min = f64::INFINITY;
    let mut arg_max: f64 = 0.0;
    let mut b4_min = f64::INFINITY;
    let mut n_arg = 0;
    let mut n_b4 = 0;
    for &theta in &ray_angles {
        let dir = Complex64::from_polar(1.0, theta);
        for &r in &radii {
            let lambda = omega1 + r * dir;
            let g = kernel.laplace_g(lambda)?;
            nonzero_min = nonzero_min.min(g.norm());
            arg_max = arg_max.max((lambda / g).arg().abs());
            n_arg += 1;
            if (1e2..=1e6).contains(&r) {
                b4_min = b4_min.min(g.norm() * lambda.norm().powf(zeta_g - 1.0));
                n_b4 += 1;
            }
        }
    }
    let limit: f64 = kernel
        .terms()
        .iter()
        .filter(|t| t.alpha == alpha_min)
        .map(|t| t.k * gamma(t.alpha))
        .sum();
    let b4_bound = 0.5 * limit;
    let arg_bound = PI - psi0 - ARG_MARGIN;

    let numeric = |ok: bool| if ok { Verdict::Pass } else { Verdict::Fail };
    let b2 = analytic.worst(numeric(nonzero_min > 0.0 && nonzero_min.is_finite()));
    let b3 = analytic.worst(numeric(arg_max < arg_bound));
    let b4 = numeric(b4_min >= b4_bound);
    let hypotheses = vec![
        HypothesisCheck {
            name: "B1",
            verdict: Verdict::Pass,
            samples: 0,
            worst: alpha_min,
            bound: 0.0,
            evidence: "all k > 0 and alpha > 0: g is locally integrable and of exponential order".into(),
        },
        HypothesisCheck {
            name: "B2",
            verdict: b2,
            samples: n_arg,
            worst: nonzero_min,
            bound: 0.0,
            evidence: format!(
                "alpha_max = {alpha_max} against 1 - psi0/(pi/2) = {threshold}; min |g^| on the probe = {nonzero_min:.3e}"
            ),
        },
        HypothesisCheck {
            name: "B3",
            verdict: b3,
            samples: n_arg,
            worst: arg_max,
            bound: arg_bound,
            evidence: format!("max |arg(lambda/g^(lambda))| = {arg_max:.6} with psi1 = {psi1:.6}"),
        },
        HypothesisCheck {
            name: "B4",
            verdict: b4,
            samples: n_b4,
            worst: b4_min,
            bound: b4_bound,
            evidence: format!(
                "min |g^||lambda|^(zeta-1) over |lambda| in [1e2, 1e6] = {b4_min:.6}, limit {limit:.6}"
            ),
        },
    ];
    let verdict = hypotheses.iter().fold(analytic, |v, h| v.worst(h.verdict));
    Ok(SectorReport {
        zeta_g,
        omega0,
        eta0,
        psi0,
        alpha_max,
        alpha_min,
        verdict,
        hypotheses,
        probe: SectorProbe { omega1, eta1, psi1, arg_margin: ARG_MARGIN, ray_angles, radii },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_a_examples() {
        assert!((MaterialKernel::hookean().eval_a(2.0) - 2.0).abs() < 1e-14);
        let p = MaterialKernel::power(0.5).unwrap();
        assert!((p.eval_a(1.0) - 2.0 / PI.sqrt()).abs() < 1e-13);
        let m = MaterialKernel::maxwell(-1.0).unwrap();
        assert!((m.eval_a(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-13);
        assert_eq!(m.eval_a(0.0), 0.0);
    }

    #[test]
    fn primitive_with_exponential_factor() {
        // ∫₀ᵗ (t−s) e^{−s} ds = t − 1 + e^{−t}
        let m = MaterialKernel::maxwell(-1.0).unwrap();
        for &t in &[0.1f64, 1.0, 7.5, 60.0] {
            let exact = t - 1.0 + (-t).exp();
            assert!((m.primitive(1, t) - exact).abs() < 1e-11 * exact.max(1.0), "t={t}");
        }
        let m = MaterialKernel::new(vec![Term::new(1.0, 0.5, -3.0)]).unwrap();
        // a(t) = √π erf(√(3t))/√3
        let t: f64 = 2.0;
        let a = m.eval_a(t);
        let exact = 1.022_782_292_504_304_93;
        assert!((a - exact).abs() < 1e-12, "{a} vs {exact}");
    }

    #[test]
    fn laplace_examples() {
        let one = |k: &MaterialKernel, l: f64| k.laplace_g(Complex64::new(l, 0.0)).unwrap().re;
        assert!((one(&MaterialKernel::hookean(), 2.0) - 0.5).abs() < 1e-15);
        assert!((one(&MaterialKernel::power(0.5).unwrap(), 4.0) - 0.5).abs() < 1e-14);
        let k = MaterialKernel::new(vec![Term::new(2.0, 0.5, 0.0), Term::new(1.0, 1.0, -3.0)]).unwrap();
        assert!((one(&k, 1.0) - (2.0 * PI.sqrt() + 0.25)).abs() < 1e-13);
        assert!(MaterialKernel::hookean().laplace_g(Complex64::new(0.0, 0.0)).is_err());
        assert!(MaterialKernel::hookean().laplace_g(Complex64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn sector_examples() {
        let r = MaterialKernel::new(vec![Term::new(1.0, 0.5, 0.0)]).unwrap().check_hypotheses(0.0).unwrap();
        assert_eq!(r.zeta_g, 1.5);
        assert_eq!(r.omega0, 0.0);
        assert!((r.eta0 - PI / 6.0).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Pass);

        let r = MaterialKernel::new(vec![Term::new(1.0, 1.2, 0.0)]).unwrap().check_hypotheses(0.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);

        let r = MaterialKernel::hookean().check_hypotheses(0.0).unwrap();
        assert_eq!(r.zeta_g, 2.0);
        assert_eq!(r.eta0, 0.0);
        assert_eq!(r.verdict, Verdict::Degenerate);
        assert!(r.warn_degenerate());
        assert!(MaterialKernel::hookean().check_hypotheses(FRAC_PI_2).is_err());
    }

    #[test]
    fn literals_round_trip() {
        let k: MaterialKernel = "power:alpha=0.5".parse().unwrap();
        assert_eq!(k, MaterialKernel::power(0.5).unwrap());
        let k: MaterialKernel = "hookean".parse().unwrap();
        assert_eq!(k, MaterialKernel::hookean());
        let k: MaterialKernel = "maxwell:c=-1".parse().unwrap();
        assert_eq!(k.terms()[0], Term::new(1.0, 1.0, -1.0));
        let k: MaterialKernel = "sum:[{2,0.5,0},{k=1;alpha=1;c=-3}]".parse().unwrap();
        assert_eq!(k.terms().len(), 2);
        let back: MaterialKernel = k.to_string().parse().unwrap();
        assert_eq!(back, k);
        let back: MaterialKernel = k.id().parse().unwrap();
        assert_eq!(back, k);
        assert!("power:beta=1".parse::<MaterialKernel>().is_err());
        assert!("sum:[{1,0,0}]".parse::<MaterialKernel>().is_err());
        assert!("spline".parse::<MaterialKernel>().is_err());
    }
}
