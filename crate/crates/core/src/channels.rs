//! Single-qubit CPTP maps in Kraus form.
//!
//! Channel specification strings have the form `identity`,
//! `dephasing:q=0.9` or `depolarizing:q=0.8`. A per-node override is written
//! `node3=depolarizing:q=0.75`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qcore::gates::{self, Mat2};
use crate::qcore::{DensityMatrix, Qubit, C64};

/// Which family a channel belongs to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Identity,
    Dephasing,
    Depolarizing,
    Custom,
}

/// A single-qubit channel `rho -> sum_k K_k rho K_k^dagger`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<Mat2>,
    name: String,
    params: BTreeMap<String, f64>,
    kind: ChannelKind,
}

const COMPLETENESS_TOL: f64 = 1e-12;

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("noise parameter q = {q} outside [0, 1]"));
    }
    Ok(())
}

impl QuantumChannel {
    pub fn identity() -> Self {
        Self {
            kraus: vec![gates::I],
            name: "identity".into(),
            params: BTreeMap::new(),
            kind: ChannelKind::Identity,
        }
    }

    /// `P_q(rho) = q rho + (1 - q) Z rho Z`.
    pub fn dephasing(q: f64) -> Result<Self> {
        check_q(q)?;
        Self::build(
            vec![
                gates::scale(&gates::I, q.sqrt()),
                gates::scale(&gates::Z, (1.0 - q).sqrt()),
            ],
            "dephasing",
            Some(q),
            ChannelKind::Dephasing,
        )
    }

    /// `D_q(rho) = q rho + (1 - q) I/2`, in Pauli form.
    pub fn depolarizing(q: f64) -> Result<Self> {
        check_q(q)?;
        let a = ((1.0 + 3.0 * q) / 4.0).sqrt();
        let b = ((1.0 - q) / 4.0).sqrt();
        Self::build(
            vec![
                gates::scale(&gates::I, a),
                gates::scale(&gates::X, b),
                gates::scale(&gates::Y, b),
                gates::scale(&gates::Z, b),
            ],
            "depolarizing",
            Some(q),
            ChannelKind::Depolarizing,
        )
    }

    /// Arbitrary Kraus set; rejected unless `sum K^dagger K = I`.
    pub fn from_kraus(kraus: Vec<Mat2>, name: impl Into<String>) -> Result<Self> {
        Self::build(kraus, &name.into(), None, ChannelKind::Custom)
    }

    fn build(kraus: Vec<Mat2>, name: &str, q: Option<f64>, kind: ChannelKind) -> Result<Self> {
        if kraus.is_empty() {
            return invalid("a channel needs at least one Kraus operator");
        }
        let sum = kraus.iter().fold([[C64::new(0.0, 0.0); 2]; 2], |acc, k| {
            gates::add(&acc, &gates::mul(&gates::dagger(k), k))
        });
        let err = gates::max_abs_diff(&sum, &gates::I);
        if err > COMPLETENESS_TOL {
            return invalid(format!("Kraus operators are not trace preserving (deviation {err:e})"));
        }
        let mut params = BTreeMap::new();
        if let Some(q) = q {
            params.insert("q".to_string(), q);
        }
        Ok(Self {
            kraus,
            name: name.to_string(),
            params,
            kind,
        })
    }

    pub fn kraus(&self) -> &[Mat2] {
        &self.kraus
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// The noise parameter of the named families (`1` for the identity).
    pub fn q(&self) -> Option<f64> {
        match self.kind {
            ChannelKind::Identity => Some(1.0),
            _ => self.params.get("q").copied(),
        }
    }

    /// Action on an arbitrary (not necessarily Hermitian) 2x2 operator.
    pub fn apply_matrix(&self, m: &Mat2) -> Mat2 {
        self.kraus.iter().fold([[C64::new(0.0, 0.0); 2]; 2], |acc, k| {
            gates::add(&acc, &gates::mul(&gates::mul(k, m), &gates::dagger(k)))
        })
    }

    /// Applies the channel to one qubit of a register.
    pub fn apply_to(&self, rho: &DensityMatrix, qubit: Qubit) -> Result<DensityMatrix> {
        if self.kind == ChannelKind::Identity {
            rho.position(qubit)?;
            return Ok(rho.clone());
        }
        rho.apply_kraus(qubit, &self.kraus)
    }

    /// Applies the channel independently to each listed qubit.
    pub fn apply_each(&self, rho: &DensityMatrix, qubits: &[Qubit]) -> Result<DensityMatrix> {
        qubits.iter().try_fold(rho.clone(), |acc, &q| self.apply_to(&acc, q))
    }

    /// Canonical specification string (parseable back by [`FromStr`]).
    pub fn spec(&self) -> String {
        match self.kind {
            ChannelKind::Identity => "identity".into(),
            ChannelKind::Dephasing | ChannelKind::Depolarizing => {
                format!("{}:q={}", self.name, self.params["q"])
            }
            ChannelKind::Custom => self.name.clone(),
        }
    }
}

impl fmt::Display for QuantumChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

impl FromStr for QuantumChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = match s.split_once(':') {
            Some((f, r)) => (f.trim(), Some(r.trim())),
            None => (s, None),
        };
        let parse_q = |rest: Option<&str>| -> Result<f64> {
            let rest = rest.ok_or_else(|| Error::Parse(format!("channel '{s}' needs a parameter q=<value>")))?;
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected q=<value> in '{s}'")))?;
            if key.trim() != "q" {
                return Err(Error::Parse(format!("unknown channel parameter '{}'", key.trim())));
            }
            value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value for q in '{s}': {e}")))
        };
        match family.to_ascii_lowercase().as_str() {
            "identity" | "id" | "none" => match rest {
                None => Ok(Self::identity()),
                Some(_) => Err(Error::Parse("identity takes no parameters".into())),
            },
            "dephasing" => Self::dephasing(parse_q(rest)?),
            "depolarizing" => Self::depolarizing(parse_q(rest)?),
            other => Err(Error::Parse(format!("unknown channel family '{other}'"))),
        }
    }
}

impl Serialize for QuantumChannel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spec())
    }
}

/// Parses `node<k>=<channel spec>` into the node id and its channel.
pub fn parse_node_override(s: &str) -> Result<(u32, QuantumChannel)> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected node<k>=<channel>, got '{s}'")))?;
    let id = lhs
        .trim()
        .strip_prefix("node")
        .and_then(|k| k.parse::<u32>().ok())
        .ok_or_else(|| Error::Parse(format!("bad node name '{}'", lhs.trim())))?;
    if id == 0 {
        return Err(Error::Parse("node ids start at 1".into()));
    }
    Ok((id, rhs.parse()?))
}

/// Trace norm of a 2x2 Hermitian matrix.
fn trace_norm_2x2(m: &Mat2) -> f64 {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = (m[0][1] + m[1][0].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    (mean + radius).abs() + (mean - radius).abs()
}

fn bloch_projector(theta: f64, phi: f64) -> Mat2 {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::from_polar((theta / 2.0).sin(), phi);
    [[c * c.conj(), c * s.conj()], [s * c.conj(), s * s.conj()]]
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Induced trace-norm distance `max_rho ||(a - b)(rho)||_1` (not halved).
///
/// The difference map is linear and the trace norm convex, so the maximum
/// over density operators is attained on a pure state. The Bloch sphere is
/// scanned on a 40 x 50 grid and the best point refined by alternating
/// golden-section searches in the two angles.
pub fn channel_distance(a: &QuantumChannel, b: &QuantumChannel) -> f64 {
    let objective = |theta: f64, phi: f64| {
        let rho = bloch_projector(theta, phi);
        let (ra, rb) = (a.apply_matrix(&rho), b.apply_matrix(&rho));
        let diff = [
            [ra[0][0] - rb[0][0], ra[0][1] - rb[0][1]],
            [ra[1][0] - rb[1][0], ra[1][1] - rb[1][1]],
        ];
        trace_norm_2x2(&diff)
    };
    const N_THETA: usize = 40;
    const N_PHI: usize = 50;
    let pi = std::f64::consts::PI;
    let (dt, dp) = (pi / N_THETA as f64, 2.0 * pi / N_PHI as f64);
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=N_THETA {
        for j in 0..N_PHI {
            let (t, p) = (i as f64 * dt, j as f64 * dp);
            let v = objective(t, p);
            if v > best.2 {
                best = (t, p, v);
            }
        }
    }
    let (mut t, mut p, mut v) = best;
    let (mut wt, mut wp) = (dt, dp);
    for _ in 0..6 {
        let (nt, _) = golden_max(|x| objective(x, p), (t - wt).max(0.0), (t + wt).min(pi), 1e-10);
        let (np, nv) = golden_max(|y| objective(nt, y), p - wp, p + wp, 1e-10);
        let improved = nv > v * (1.0 + 1e-12);
        if nv >= v {
            t = nt;
            p = np;
            v = nv;
        }
        if !improved {
            break;
        }
        wt *= 0.5;
        wp *= 0.5;
    }
    v.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{trace_distance, Ket};

    fn plus() -> DensityMatrix {
        Ket::plus(Qubit(0)).to_density()
    }

    #[test]
    fn dephasing_examples() {
        let q0 = Qubit(0);
        let id = QuantumChannel::dephasing(1.0).unwrap().apply_to(&plus(), q0).unwrap();
        assert!(id.max_abs_diff(&plus()).unwrap() < 1e-15);
        let half = QuantumChannel::dephasing(0.5).unwrap().apply_to(&plus(), q0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![q0]).unwrap();
        assert!(half.max_abs_diff(&mixed).unwrap() < 1e-15);
        let flip = QuantumChannel::dephasing(0.0).unwrap().apply_to(&plus(), q0).unwrap();
        assert!(flip.max_abs_diff(&Ket::minus(q0).to_density()).unwrap() < 1e-15);
    }

    #[test]
    fn depolarizing_examples() {
        let q0 = Qubit(0);
        let rho = Ket::from_bloch(q0, 0.7, 2.1).to_density();
        let mixed = DensityMatrix::maximally_mixed(vec![q0]).unwrap();
        for q in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let out = QuantumChannel::depolarizing(q).unwrap().apply_to(&rho, q0).unwrap();
            let expect = rho.scaled(q).add(&mixed.scaled(1.0 - q)).unwrap();
            assert!(out.max_abs_diff(&expect).unwrap() < 1e-12);
        }
        let zero = Ket::zero(q0).to_density();
        let out = QuantumChannel::depolarizing(0.5).unwrap().apply_to(&zero, q0).unwrap();
        assert!((out.entry(0, 0).re - 0.75).abs() < 1e-15);
        assert!((out.entry(1, 1).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(QuantumChannel::dephasing(1.1).is_err());
        assert!(QuantumChannel::depolarizing(-0.1).is_err());
        assert!(QuantumChannel::dephasing(f64::NAN).is_err());
        assert!(QuantumChannel::from_kraus(vec![gates::scale(&gates::I, 0.9)], "leaky").is_err());
        assert!(QuantumChannel::from_kraus(vec![], "empty").is_err());
    }

    #[test]
    fn depolarizing_one_half_of_bell_pair() {
        let bell = Ket::psi_plus(Qubit(0), Qubit(1)).unwrap();
        let out = QuantumChannel::depolarizing(0.0)
            .unwrap()
            .apply_to(&bell.to_density(), Qubit(1))
            .unwrap();
        assert!((out.fidelity_with_pure(&bell).unwrap() - 0.25).abs() < 1e-15);
        let red = out.partial_trace(&[Qubit(1)]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![Qubit(0)]).unwrap();
        assert!(trace_distance(&red, &mixed).unwrap() < 1e-12);
    }

    #[test]
    fn parses_specs() {
        let c: QuantumChannel = "dephasing:q=0.9".parse().unwrap();
        assert_eq!(c.kind(), ChannelKind::Dephasing);
        assert_eq!(c.q(), Some(0.9));
        assert_eq!(c.spec(), "dephasing:q=0.9");
        let c: QuantumChannel = "depolarizing:q=0.8".parse().unwrap();
        assert_eq!(c, QuantumChannel::depolarizing(0.8).unwrap());
        assert_eq!(
            "identity".parse::<QuantumChannel>().unwrap(),
            QuantumChannel::identity()
        );
        assert!("amplitude:q=0.5".parse::<QuantumChannel>().is_err());
        assert!("dephasing".parse::<QuantumChannel>().is_err());
        assert!("dephasing:p=0.5".parse::<QuantumChannel>().is_err());
        assert!("dephasing:q=1.5".parse::<QuantumChannel>().is_err());
        let (id, ch) = parse_node_override("node3=depolarizing:q=0.75").unwrap();
        assert_eq!(id, 3);
        assert_eq!(ch.q(), Some(0.75));
        assert!(parse_node_override("n3=identity").is_err());
        assert!(parse_node_override("node0=identity").is_err());
    }

    #[test]
    fn distance_examples() {
        let a = QuantumChannel::dephasing(0.9).unwrap();
        assert!(channel_distance(&a, &a) < 1e-15);
        for (q, r) in [(0.9, 0.92), (0.3, 0.8), (1.0, 0.0)] {
            let d = channel_distance(
                &QuantumChannel::dephasing(q).unwrap(),
                &QuantumChannel::dephasing(r).unwrap(),
            );
            assert!((d - 2.0 * (q - r).abs()).abs() < 1e-5, "{q} {r} {d}");
            let d = channel_distance(
                &QuantumChannel::depolarizing(q).unwrap(),
                &QuantumChannel::depolarizing(r).unwrap(),
            );
            assert!((d - (q - r).abs()).abs() < 1e-5, "{q} {r} {d}");
        }
    }

    #[test]
    fn distance_is_symmetric_and_triangular() {
        let chans = [
            QuantumChannel::identity(),
            QuantumChannel::dephasing(0.7).unwrap(),
            QuantumChannel::depolarizing(0.6).unwrap(),
            QuantumChannel::depolarizing(0.95).unwrap(),
        ];
        for a in &chans {
            for b in &chans {
                assert_eq!(channel_distance(a, b), channel_distance(b, a));
                for c in &chans {
                    assert!(channel_distance(a, c) <= channel_distance(a, b) + channel_distance(b, c) + 2e-5);
                }
            }
        }
    }
}
