//! Seeded generation of initial colours, edge opening times and the
//! per-vertex coupling field.
//!
//! Every random field is a pure function of `(graph, seed, replicate)`.
//! Replicates draw from independent ChaCha streams, so Monte Carlo results
//! do not depend on the order in which replicates are executed.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;
use std::sync::Arc;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Colour {
    White,
    Red,
    Green,
}

impl Colour {
    pub fn code(self) -> char {
        match self {
            Colour::White => 'W',
            Colour::Red => 'R',
            Colour::Green => 'G',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            'W' | 'w' => Some(Colour::White),
            'R' | 'r' => Some(Colour::Red),
            'G' | 'g' => Some(Colour::Green),
            _ => None,
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colour::White => "white",
            Colour::Red => "red",
            Colour::Green => "green",
        })
    }
}

/// Colour probabilities `(p_w, p_r, p_g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p_w: f64,
    pub p_r: f64,
    pub p_g: f64,
}

impl Params {
    pub fn new(p_w: f64, p_r: f64, p_g: f64) -> Result<Self> {
        let params = Params { p_w, p_r, p_g };
        for (name, p) in [("p_w", p_w), ("p_r", p_r), ("p_g", p_g)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        if (p_w + p_r + p_g - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "p_w + p_r + p_g = {} != 1",
                p_w + p_r + p_g
            )));
        }
        Ok(params)
    }

    /// `p_g` is whatever is left.
    pub fn white_red(p_w: f64, p_r: f64) -> Result<Self> {
        Self::new(p_w, p_r, 1.0 - p_w - p_r)
    }

    fn colour_of(&self, u: f64) -> Colour {
        if u < self.p_w {
            Colour::White
        } else if u < self.p_w + self.p_r {
            Colour::Red
        } else {
            Colour::Green
        }
    }
}

/// Initial colour `c(v)` of every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourField(Vec<Colour>);

impl ColourField {
    pub fn uniform(n: usize, colour: Colour) -> Self {
        ColourField(vec![colour; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn set(&mut self, v: VertexId, colour: Colour) {
        self.0[v] = colour;
    }

    pub fn iter(&self) -> impl Iterator<Item = Colour> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Colour] {
        &self.0
    }

    pub fn count(&self, colour: Colour) -> usize {
        self.0.iter().filter(|&&c| c == colour).count()
    }

    pub fn first_white(&self) -> Option<VertexId> {
        self.0.iter().position(|&c| c == Colour::White)
    }
}

impl From<Vec<Colour>> for ColourField {
    fn from(v: Vec<Colour>) -> Self {
        ColourField(v)
    }
}

impl Index<VertexId> for ColourField {
    type Output = Colour;

    fn index(&self, v: VertexId) -> &Colour {
        &self.0[v]
    }
}

/// How opening times are drawn. All variants are quantile transforms of
/// one uniform per edge, so fields drawn with the same seed under
/// different distributions have the same rank order.
#[derive(Clone, Default)]
pub enum WeightDistribution {
    #[default]
    Exponential,
    Uniform,
    /// A user-supplied strictly increasing quantile function on (0,1).
    Quantile(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl WeightDistribution {
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            WeightDistribution::Exponential => -(-u).ln_1p(),
            WeightDistribution::Uniform => u,
            WeightDistribution::Quantile(q) => q(u),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightDistribution::Exponential => "exponential",
            WeightDistribution::Uniform => "uniform",
            WeightDistribution::Quantile(_) => "quantile",
        }
    }
}

impl fmt::Debug for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(WeightDistribution::Exponential),
            "uniform" => Ok(WeightDistribution::Uniform),
            _ => Err(Error::InvalidParams(format!(
                "unsupported weight distribution {s:?}"
            ))),
        }
    }
}

/// Opening times `τ(e)`, indexed by edge id. All values are finite and
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights<T>(Vec<T>);

impl<T: Scalar> EdgeWeights<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        for (e, &t) in values.iter().enumerate() {
            if t.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) || !t.as_f64().is_finite() {
                return Err(Error::InvalidParams(format!(
                    "opening time of edge {e} is {t}, must be finite and positive"
                )));
            }
        }
        Ok(EdgeWeights(values))
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let converted = values
            .iter()
            .map(|&x| {
                T::from_f64(x)
                    .ok_or_else(|| Error::InvalidParams(format!("{x} is not representable")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(converted)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn set(&mut self, e: EdgeId, value: T) {
        self.0[e] = value;
    }

    /// Applies a map to every value (e.g. a strictly increasing time change).
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<EdgeWeights<U>> {
        EdgeWeights::new(self.0.iter().map(|&t| f(t)).collect())
    }
}

impl<T> Index<EdgeId> for EdgeWeights<T> {
    type Output = T;

    fn index(&self, e: EdgeId) -> &T {
        &self.0[e]
    }
}

/// Coupling variables `ρ(v)`, uniform on (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingField(Vec<f64>);

impl CouplingField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().position(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::InvalidParams(format!(
                "coupling value of vertex {v} is not in (0,1)"
            )));
        }
        Ok(CouplingField(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Colouring in which `v` is red iff `ρ(v) < p_r` and green otherwise.
    pub fn colouring(&self, p_r: f64) -> ColourField {
        ColourField(
            self.0
                .iter()
                .map(|&r| if r < p_r { Colour::Red } else { Colour::Green })
                .collect(),
        )
    }
}

impl Index<VertexId> for CouplingField {
    type Output = f64;

    fn index(&self, v: VertexId) -> &f64 {
        &self.0[v]
    }
}

/// Which random field a generator feeds. Each gets its own key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Colours = 1,
    Weights = 2,
    Coupling = 3,
    Extension = 4,
    Graph = 5,
    Aux = 6,
}

/// Master seed of an experiment. Generators are derived from
/// `(master, stream, replicate)`; no generator is shared between replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self, stream: Stream, replicate: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.0.to_le_bytes());
        key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(replicate);
        rng
    }
}

pub fn sample_colours<R: Rng + ?Sized>(g: &Graph, params: &Params, rng: &mut R) -> ColourField {
    ColourField(
        (0..g.num_vertices())
            .map(|_| params.colour_of(rng.gen::<f64>()))
            .collect(),
    )
}

/// Uniform (0,1) values, one per edge, in edge-id order.
pub fn sample_uniform_field<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(Open01)).collect()
}

pub fn sample_weights<T: Scalar, R: Rng + ?Sized>(
    g: &Graph,
    dist: &WeightDistribution,
    rng: &mut R,
) -> Result<EdgeWeights<T>> {
    let mut out = Vec::with_capacity(g.num_edges());
    for _ in 0..g.num_edges() {
        // redraw the rare value that rounds to zero in a narrow scalar type
        let t = loop {
            let x = dist.quantile(rng.sample(Open01));
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{} quantile produced {x}",
                    dist.name()
                )));
            }
            match T::from_f64(x) {
                Some(t) if t > T::zero() => break t,
                _ => continue,
            }
        };
        out.push(t);
    }
    EdgeWeights::new(out)
}

pub fn sample_coupling<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> CouplingField {
    CouplingField(sample_uniform_field(g.num_vertices(), rng))
}

/// Writes colours and weights as a text snapshot: `c <vertex> <W|R|G>` and
/// `t <edge> <τ>` lines, τ with 17 significant digits.
pub fn write_snapshot<T: Scalar>(colours: &ColourField, weights: &EdgeWeights<T>) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "# spatial-growth snapshot v1");
    let _ = writeln!(s, "vertices {}", colours.len());
    let _ = writeln!(s, "edges {}", weights.len());
    for (v, c) in colours.iter().enumerate() {
        let _ = writeln!(s, "c {v} {}", c.code());
    }
    for (e, t) in weights.as_slice().iter().enumerate() {
        let _ = writeln!(s, "t {e} {:.16e}", t.as_f64());
    }
    s
}

pub fn read_snapshot(text: &str) -> Result<(ColourField, EdgeWeights<f64>)> {
    let mut colours: Vec<Option<Colour>> = Vec::new();
    let mut weights: Vec<Option<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 && !(f.len() == 2 && (f[0] == "vertices" || f[0] == "edges")) {
            return Err(err("malformed line"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| err("bad integer"));
        match f[0] {
            "vertices" => colours.resize(num(f[1])?, None),
            "edges" => weights.resize(num(f[1])?, None),
            "c" => {
                let v = num(f[1])?;
                let c = f[2]
                    .chars()
                    .next()
                    .and_then(Colour::from_code)
                    .ok_or_else(|| err("bad colour"))?;
                *colours.get_mut(v).ok_or_else(|| err("vertex out of range"))? = Some(c);
            }
            "t" => {
                let e = num(f[1])?;
                let t: f64 = f[2].parse().map_err(|_| err("bad time"))?;
                *weights.get_mut(e).ok_or_else(|| err("edge out of range"))? = Some(t);
            }
            _ => return Err(err("unknown record")),
        }
    }
    let colours = colours
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::InvalidParams(format!("vertex {v} has no colour"))))
        .collect::<Result<Vec<_>>>()?;
    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(e, t)| t.ok_or_else(|| Error::InvalidParams(format!("edge {e} has no time"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((ColourField(colours), EdgeWeights::new(weights)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice, LatticeSpec};
    use proptest::prelude::*;
    use rand::Rng;

    fn grid() -> Graph {
        build_lattice(&LatticeSpec::square(20)).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(0.2, 0.3, 0.5).is_ok());
        assert!(Params::new(0.2, 0.3, 0.6).is_err());
        assert!(Params::new(-0.1, 0.6, 0.5).is_err());
        let p = Params::white_red(0.1, 0.2).unwrap();
        assert!((p.p_g - 0.7).abs() < 1e-15);
    }

    #[test]
    fn degenerate_params() {
        let g = grid();
        let mut rng = Seed(1).rng(Stream::Colours, 0);
        let c = sample_colours(&g, &Params::new(0.0, 1.0, 0.0).unwrap(), &mut rng);
        assert_eq!(c.count(Colour::Red), g.num_vertices());
        let c = sample_colours(&g, &Params::new(0.0, 0.0, 1.0).unwrap(), &mut rng);
        assert_eq!(c.count(Colour::Green), g.num_vertices());
    }

    #[test]
    fn colour_frequencies_within_four_se() {
        let g = build_lattice(&LatticeSpec::square(224)).unwrap();
        let n = g.num_vertices() as f64;
        assert!(n > 1e5);
        let third = 1.0 / 3.0;
        let c = sample_colours(
            &g,
            &Params::new(third, third, third).unwrap(),
            &mut Seed(5).rng(Stream::Colours, 0),
        );
        let se = (third * (1.0 - third) / n).sqrt();
        for col in [Colour::White, Colour::Red, Colour::Green] {
            let f = c.count(col) as f64 / n;
            assert!((f - third).abs() < 4.0 * se, "{col}: {f}");
        }
    }

    #[test]
    fn exponential_mean_within_four_se() {
        let mut rng = Seed(9).rng(Stream::Weights, 0);
        let n = 1_000_000;
        let d = WeightDistribution::Exponential;
        let mean: f64 = (0..n)
            .map(|_| d.quantile(rng.sample(Open01)))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn uniform_weights_in_unit_interval_and_deterministic() {
        let g = grid();
        let w1: EdgeWeights<f64> =
            sample_weights(&g, &WeightDistribution::Uniform, &mut Seed(3).rng(Stream::Weights, 7))
                .unwrap();
        let w2: EdgeWeights<f64> =
            sample_weights(&g, &WeightDistribution::Uniform, &mut Seed(3).rng(Stream::Weights, 7))
                .unwrap();
        assert!(w1.as_slice().iter().all(|&t| t > 0.0 && t < 1.0));
        assert_eq!(w1, w2);
        let w3: EdgeWeights<f64> =
            sample_weights(&g, &WeightDistribution::Uniform, &mut Seed(3).rng(Stream::Weights, 8))
                .unwrap();
        assert_ne!(w1, w3);
    }

    #[test]
    fn coupling_values_and_stop_red_fraction() {
        let g = build_lattice(&LatticeSpec::square(224)).unwrap();
        let rho = sample_coupling(&g, &mut Seed(4).rng(Stream::Coupling, 0));
        assert!(rho.as_slice().iter().all(|&r| r > 0.0 && r < 1.0));
        assert_eq!(rho, sample_coupling(&g, &mut Seed(4).rng(Stream::Coupling, 0)));
        let p_r = 0.2;
        let n = g.num_vertices() as f64;
        let f = rho.colouring(p_r).count(Colour::Red) as f64 / n;
        assert!((f - p_r).abs() < 4.0 * (p_r * (1.0 - p_r) / n).sqrt());
    }

    #[test]
    fn distributions_share_rank_order() {
        let g = grid();
        let exp: EdgeWeights<f64> = sample_weights(
            &g,
            &WeightDistribution::Exponential,
            &mut Seed(2).rng(Stream::Weights, 0),
        )
        .unwrap();
        let cube = WeightDistribution::Quantile(Arc::new(|u| u * u * u));
        let other: EdgeWeights<f64> =
            sample_weights(&g, &cube, &mut Seed(2).rng(Stream::Weights, 0)).unwrap();
        let rank = |w: &EdgeWeights<f64>| {
            let mut ids: Vec<usize> = (0..w.len()).collect();
            ids.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
            ids
        };
        assert_eq!(rank(&exp), rank(&other));
    }

    #[test]
    fn unsupported_distribution() {
        assert!("pareto".parse::<WeightDistribution>().is_err());
    }

    #[test]
    fn narrow_scalar_weights_are_positive() {
        let g = grid();
        let w: EdgeWeights<f32> =
            sample_weights(&g, &WeightDistribution::Exponential, &mut Seed(1).rng(Stream::Weights, 0))
                .unwrap();
        assert!(w.as_slice().iter().all(|&t| t > 0.0));
    }

    proptest! {
        #[test]
        fn snapshot_round_trips(seed in any::<u64>()) {
            let g = build_lattice(&LatticeSpec::square(3)).unwrap();
            let c = sample_colours(&g, &Params::new(0.3, 0.3, 0.4).unwrap(), &mut Seed(seed).rng(Stream::Colours, 0));
            let w: EdgeWeights<f64> = sample_weights(&g, &WeightDistribution::Exponential, &mut Seed(seed).rng(Stream::Weights, 0)).unwrap();
            let text = write_snapshot(&c, &w);
            let (c2, w2) = read_snapshot(&text).unwrap();
            prop_assert_eq!(c, c2);
            prop_assert_eq!(w, w2);
        }
    }
}
