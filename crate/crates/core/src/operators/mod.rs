//! Weighted shifts, diagonal operators and their finite direct sums.
//!
//! Convention: a backward shift sends `e_n ↦ α_n e_{n-1}`, a forward shift
//! `e_n ↦ α_n e_{n+1}`, a diagonal operator `e_n ↦ α_n e_n`. The weight is
//! always indexed by the source coordinate.
//!
//! Every operator is stored as a list of blocks. A block acts on a band of
//! indices and never moves mass out of it: a backward block annihilates the
//! basis vector at its lower edge, a forward block the one at its upper edge.
//! Indices covered by no block are sent to zero. The unilateral backward
//! shift is the single block `[0, ∞)`.

mod config;
mod spectral;
mod weights;

pub use config::{operator_from_json, preset, PRESET_NAMES};
pub use spectral::{RieszSplit, SpectralTrace, RIESZ_MARGIN};
pub use weights::{real_weight, WeightProduct, WeightRule};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{NumericMode, Scalar};
use crate::spaces::{Band, IndexSet, SeqVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    UnilateralBackward,
    BilateralBackward,
    BilateralForward,
    Diagonal,
    BlockDirectSum,
}

impl Shape {
    pub fn tag(self) -> &'static str {
        match self {
            Shape::UnilateralBackward => "unilateral-backward",
            Shape::BilateralBackward => "bilateral-backward",
            Shape::BilateralForward => "bilateral-forward",
            Shape::Diagonal => "diagonal",
            Shape::BlockDirectSum => "block-direct-sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Motion {
    Backward,
    Forward,
    Diagonal,
}

impl Motion {
    pub fn tag(self) -> &'static str {
        match self {
            Motion::Backward => "backward",
            Motion::Forward => "forward",
            Motion::Diagonal => "diagonal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block<S> {
    pub band: Band,
    pub motion: Motion,
    pub weights: WeightRule<S>,
}

impl<S: Scalar> Block<S> {
    /// Where `e_source` lands after `n` steps, if it stays in the band.
    fn target(&self, source: i64, n: u64) -> Option<i64> {
        let n = i64::try_from(n).ok()?;
        let j = match self.motion {
            Motion::Backward => source.checked_sub(n)?,
            Motion::Forward => source.checked_add(n)?,
            Motion::Diagonal => source,
        };
        self.band.contains(j).then_some(j)
    }

    /// Which basis vector lands on `target` after `n` steps.
    fn source(&self, target: i64, n: u64) -> Option<i64> {
        let n = i64::try_from(n).ok()?;
        let s = match self.motion {
            Motion::Backward => target.checked_add(n)?,
            Motion::Forward => target.checked_sub(n)?,
            Motion::Diagonal => target,
        };
        self.band.contains(s).then_some(s)
    }

    /// Inclusive index range of the weights met by `e_source` in `n` steps.
    fn weight_range(&self, source: i64, n: u64) -> (i64, i64) {
        let n = n as i64;
        match self.motion {
            Motion::Backward => (source - n + 1, source),
            Motion::Forward => (source, source + n - 1),
            Motion::Diagonal => (source, source),
        }
    }

    fn path_product(&self, source: i64, n: u64) -> Result<WeightProduct<S>> {
        if n == 0 {
            return Ok(WeightProduct::one());
        }
        match self.motion {
            Motion::Diagonal => {
                let w = self.weights.weight(source);
                let log2 = n as f64 * w.log2_abs();
                if S::MODE == NumericMode::Float && log2 > 900.0 {
                    return Err(Error::Overflow { log2 });
                }
                let phase = Complex64::from_polar(1.0, w.to_c64().arg() * n as f64);
                Ok(WeightProduct { value: w.powu(n), log2_magnitude: log2, phase })
            }
            _ => {
                let (lo, hi) = self.weight_range(source, n);
                self.weights.range_product(lo, hi)
            }
        }
    }

    fn path_log2(&self, source: i64, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self.motion {
            Motion::Diagonal => n as f64 * self.weights.weight(source).log2_abs(),
            _ => {
                let (lo, hi) = self.weight_range(source, n);
                self.weights.range_log2(lo, hi)
            }
        }
    }

    fn path_log2_phase(&self, source: i64, n: u64) -> (f64, Complex64) {
        if n == 0 {
            return (0.0, Complex64::new(1.0, 0.0));
        }
        match self.motion {
            Motion::Diagonal => {
                let w = self.weights.weight(source);
                (n as f64 * w.log2_abs(), Complex64::from_polar(1.0, w.to_c64().arg() * n as f64))
            }
            _ => {
                let (lo, hi) = self.weight_range(source, n);
                self.weights.range_log2_phase(lo, hi)
            }
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "band": [self.band.lo, self.band.hi],
            "shape": self.motion.tag(),
            "weights": self.weights.to_json(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator<S> {
    shape: Shape,
    index_set: IndexSet,
    blocks: Vec<Block<S>>,
}

impl<S: Scalar> ShiftOperator<S> {
    fn single(shape: Shape, index_set: IndexSet, motion: Motion, weights: WeightRule<S>) -> Result<Self> {
        weights.validate()?;
        Ok(ShiftOperator { shape, index_set, blocks: vec![Block { band: index_set.as_band(), motion, weights }] })
    }

    pub fn unilateral_backward(weights: WeightRule<S>) -> Result<Self> {
        Self::single(Shape::UnilateralBackward, IndexSet::Naturals, Motion::Backward, weights)
    }

    pub fn bilateral_backward(weights: WeightRule<S>) -> Result<Self> {
        Self::single(Shape::BilateralBackward, IndexSet::Integers, Motion::Backward, weights)
    }

    pub fn bilateral_forward(weights: WeightRule<S>) -> Result<Self> {
        Self::single(Shape::BilateralForward, IndexSet::Integers, Motion::Forward, weights)
    }

    pub fn diagonal(index_set: IndexSet, weights: WeightRule<S>) -> Result<Self> {
        Self::single(Shape::Diagonal, index_set, Motion::Diagonal, weights)
    }

    /// Direct sum of blocks acting on pairwise disjoint bands.
    pub fn block_sum(index_set: IndexSet, mut blocks: Vec<Block<S>>) -> Result<Self> {
        for b in &blocks {
            b.weights.validate()?;
            if b.band.is_empty() {
                return Err(Error::InvalidOperator(format!("empty band {}", b.band)));
            }
            if index_set == IndexSet::Naturals && b.band.lo.is_none_or(|lo| lo < 0) {
                return Err(Error::InvalidOperator(format!("band {} leaves the naturals", b.band)));
            }
        }
        blocks.sort_by_key(|b| b.band.lo.unwrap_or(i64::MIN));
        for pair in blocks.windows(2) {
            if pair[0].band.overlaps(&pair[1].band) {
                return Err(Error::InvalidOperator(format!("bands {} and {} overlap", pair[0].band, pair[1].band)));
            }
        }
        Ok(ShiftOperator { shape: Shape::BlockDirectSum, index_set, blocks })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn blocks(&self) -> &[Block<S>] {
        &self.blocks
    }

    /// True for shifts whose powers move mass towards lower indices.
    pub fn is_backward(&self) -> bool {
        !self.blocks.is_empty() && self.blocks.iter().all(|b| b.motion == Motion::Backward)
    }

    fn block_of(&self, i: i64) -> Option<&Block<S>> {
        self.blocks.iter().find(|b| b.band.contains(i))
    }

    fn check(&self, v: &SeqVector<S>) -> Result<()> {
        if v.index_set() != self.index_set {
            return Err(Error::IndexSetMismatch { left: self.index_set, right: v.index_set() });
        }
        Ok(())
    }

    /// One step, multiplying each coordinate by its own weight.
    pub fn apply(&self, v: &SeqVector<S>) -> Result<SeqVector<S>> {
        self.check(v)?;
        let mut out = SeqVector::zero(self.index_set);
        for (s, value) in v.iter() {
            let Some(block) = self.block_of(s) else { continue };
            if let Some(j) = block.target(s, 1) {
                out.add_at(j, value.clone() * block.weights.weight(s));
            }
        }
        Ok(out)
    }

    /// `T^n v` through closed-form weight products.
    pub fn apply_power(&self, n: u64, v: &SeqVector<S>) -> Result<SeqVector<S>> {
        self.check(v)?;
        if n == 0 {
            return Ok(v.clone());
        }
        let mut out = SeqVector::zero(self.index_set);
        for (s, value) in v.iter() {
            let Some(block) = self.block_of(s) else { continue };
            if let Some(j) = block.target(s, n) {
                let p = block.path_product(s, n)?;
                out.add_at(j, value.clone() * p.value);
            }
        }
        Ok(out)
    }

    /// Coefficient of `e_target` in `T^n e_source`, where `source` is the
    /// unique index that can reach `target`; zero when the path leaves the
    /// operator's bands.
    pub fn weight_product(&self, target: i64, n: u64) -> Result<WeightProduct<S>> {
        Ok(self.source_of(target, n)?.map(|(_, p)| p).unwrap_or_else(WeightProduct::zero))
    }

    /// The index whose basis vector lands on `target` after `n` steps, with
    /// the weight product picked up on the way.
    pub fn source_of(&self, target: i64, n: u64) -> Result<Option<(i64, WeightProduct<S>)>> {
        if n == 0 {
            return Ok(Some((target, WeightProduct::one())));
        }
        let Some(block) = self.block_of(target) else { return Ok(None) };
        match block.source(target, n) {
            Some(s) => Ok(Some((s, block.path_product(s, n)?))),
            None => Ok(None),
        }
    }

    /// Like [`Self::source_of`] but only the `log2` magnitude of the product.
    pub fn source_log2(&self, target: i64, n: u64) -> Option<(i64, f64)> {
        if n == 0 {
            return Some((target, 0.0));
        }
        let block = self.block_of(target)?;
        let s = block.source(target, n)?;
        Some((s, block.path_log2(s, n)))
    }

    /// Where `e_source` lands after `n` steps and `log2` of the coefficient.
    pub fn image_log2(&self, source: i64, n: u64) -> Option<(i64, f64)> {
        if n == 0 {
            return Some((source, 0.0));
        }
        let block = self.block_of(source)?;
        let j = block.target(source, n)?;
        Some((j, block.path_log2(source, n)))
    }

    /// Image index, `log2` magnitude and phase of the coefficient of `T^n e_source`.
    pub fn image_log2_phase(&self, source: i64, n: u64) -> Option<(i64, f64, Complex64)> {
        let block = self.block_of(source).filter(|_| n > 0);
        match block {
            None if n == 0 => Some((source, 0.0, Complex64::new(1.0, 0.0))),
            None => None,
            Some(b) => {
                let j = b.target(source, n)?;
                let (l, p) = b.path_log2_phase(source, n);
                Some((j, l, p))
            }
        }
    }

    /// `log2 ||T^n v||_inf` estimated coordinate-wise in double precision.
    pub fn power_log2_sup(&self, n: u64, v: &SeqVector<S>) -> f64 {
        v.iter()
            .filter_map(|(s, value)| self.image_log2(s, n).map(|(_, l)| l + value.log2_abs()))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `T^{-n} v` for operators that are invertible on finitely supported
    /// vectors: bilateral shifts and diagonal operators.
    pub fn apply_inverse_power(&self, n: u64, v: &SeqVector<S>) -> Result<SeqVector<S>> {
        self.check(v)?;
        let invertible = matches!(self.shape, Shape::BilateralBackward | Shape::BilateralForward | Shape::Diagonal);
        if !invertible {
            return Err(Error::NotInvertible(format!("{} operators have no inverse", self.shape.tag())));
        }
        if n == 0 {
            return Ok(v.clone());
        }
        let block = &self.blocks[0];
        let mut out = SeqVector::zero(self.index_set);
        for (j, value) in v.iter() {
            let s = block
                .source(j, n)
                .ok_or_else(|| Error::NotInvertible(format!("index {j} has no preimage")))?;
            let p = block.path_product(s, n)?;
            out.add_at(s, value.clone() / p.value);
        }
        Ok(out)
    }

    /// Restriction to the blocks satisfying `keep`, as a direct sum.
    pub fn sub_sum(&self, mut keep: impl FnMut(&Block<S>) -> bool) -> Self {
        ShiftOperator {
            shape: Shape::BlockDirectSum,
            index_set: self.index_set,
            blocks: self.blocks.iter().filter(|b| keep(b)).cloned().collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut obj = json!({ "shape": self.shape.tag(), "index_set": self.index_set.tag() });
        if self.shape == Shape::BlockDirectSum {
            obj["blocks"] = Value::Array(self.blocks.iter().map(Block::to_json).collect());
        } else {
            obj["weights"] = self.blocks[0].weights.to_json();
        }
        obj
    }

    /// The same operator with weights converted to double precision.
    pub fn to_float(&self) -> ShiftOperator<crate::scalar::Float> {
        ShiftOperator {
            shape: self.shape,
            index_set: self.index_set,
            blocks: self
                .blocks
                .iter()
                .map(|b| Block { band: b.band, motion: b.motion, weights: b.weights.map(|w| w.to_c64()) })
                .collect(),
        }
    }
}
