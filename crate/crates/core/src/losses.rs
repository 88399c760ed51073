//! Forward values of the Dice, cross-entropy, pixel and context losses.
//!
//! Masked variants restrict every sum and mean to the mask pixels. All
//! reductions run in f64 in raster order, so repeated evaluation is
//! bit-identical.

use serde::Serialize;

use crate::config::LossConfig;
use crate::critical_mask::{critical_mask, SkeletonMode};
use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, Grid, RealGrid};

/// Largest grid accepted by [`fd_gradient`].
pub const FD_MAX_PIXELS: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LossParts {
    pub dice: f64,
    pub ce: f64,
    /// Present for the context loss only.
    pub masked_dice: Option<f64>,
    pub masked_ce: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossValue {
    pub total: f64,
    pub parts: LossParts,
    /// Size of the critical mask, for the context loss.
    pub mask_pixels: Option<usize>,
}

impl LossValue {
    /// Total rebuilt from the parts under `cfg`'s weights.
    pub fn recompose(&self, cfg: &LossConfig) -> f64 {
        let pixel = |dice: f64, ce: f64| (1.0 - cfg.alpha) * dice + cfg.alpha * ce;
        let unmasked = pixel(self.parts.dice, self.parts.ce);
        match (self.parts.masked_dice, self.parts.masked_ce) {
            (Some(md), Some(mc)) => (1.0 - cfg.gamma) * unmasked + cfg.gamma * pixel(md, mc),
            _ => unmasked,
        }
    }
}

/// Which loss [`fd_gradient`] differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    Dice,
    Ce,
    Pixel,
    /// Context loss with the critical mask held fixed at the unperturbed input.
    Context,
}

fn dice_raw(p: &[f64], g: &[u8], mask: Option<&[u8]>, smooth: f64) -> f64 {
    let mut inter = 0.0;
    let mut sum_p = 0.0;
    let mut sum_g = 0.0;
    let mut any = false;
    for i in 0..p.len() {
        if mask.is_some_and(|m| m[i] == 0) {
            continue;
        }
        any = true;
        let gi = f64::from(g[i]);
        inter += p[i] * gi;
        sum_p += p[i];
        sum_g += gi;
    }
    if !any {
        return 0.0;
    }
    1.0 - (2.0 * inter + smooth) / (sum_p + sum_g + smooth)
}

fn ce_raw(p: &[f64], g: &[u8], mask: Option<&[u8]>, clamp: f64) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for i in 0..p.len() {
        if mask.is_some_and(|m| m[i] == 0) {
            continue;
        }
        n += 1;
        let q = p[i].clamp(clamp, 1.0 - clamp);
        total += if g[i] != 0 { q.ln() } else { (1.0 - q).ln() };
    }
    if n == 0 {
        return 0.0;
    }
    -total / n as f64
}

fn pixel_raw(p: &[f64], g: &[u8], mask: Option<&[u8]>, cfg: &LossConfig) -> (f64, f64, f64) {
    let dice = dice_raw(p, g, mask, cfg.smooth);
    let ce = ce_raw(p, g, mask, cfg.clamp);
    ((1.0 - cfg.alpha) * dice + cfg.alpha * ce, dice, ce)
}

fn context_raw(p: &[f64], g: &[u8], m: &[u8], cfg: &LossConfig) -> LossValue {
    let (unmasked, dice, ce) = pixel_raw(p, g, None, cfg);
    let (masked, masked_dice, masked_ce) = pixel_raw(p, g, Some(m), cfg);
    LossValue {
        total: (1.0 - cfg.gamma) * unmasked + cfg.gamma * masked,
        parts: LossParts {
            dice,
            ce,
            masked_dice: Some(masked_dice),
            masked_ce: Some(masked_ce),
        },
        mask_pixels: Some(m.iter().filter(|&&v| v != 0).count()),
    }
}

fn prepare<'a>(p: &RealGrid, g: &'a BinaryGrid, mask: Option<&'a BinaryGrid>) -> Result<(Vec<f64>, Option<&'a [u8]>)> {
    p.ensure_same_shape(g)?;
    if let Some(m) = mask {
        p.ensure_same_shape(m)?;
    }
    Ok((p.data().iter().map(|&v| f64::from(v)).collect(), mask.map(|m| m.data())))
}

/// Soft Dice loss over the mask pixels (all pixels without a mask). An empty
/// mask gives 0.
pub fn dice_loss(p: &RealGrid, g: &BinaryGrid, mask: Option<&BinaryGrid>, cfg: &LossConfig) -> Result<f64> {
    let (pf, m) = prepare(p, g, mask)?;
    Ok(dice_raw(&pf, g.data(), m, cfg.smooth))
}

/// Binary cross-entropy with probabilities clamped to `[clamp, 1 - clamp]`,
/// averaged over the mask pixels. An empty mask gives 0.
pub fn ce_loss(p: &RealGrid, g: &BinaryGrid, mask: Option<&BinaryGrid>, cfg: &LossConfig) -> Result<f64> {
    let (pf, m) = prepare(p, g, mask)?;
    Ok(ce_raw(&pf, g.data(), m, cfg.clamp))
}

/// `(1 - alpha) * dice + alpha * ce` with the same mask on both terms.
pub fn pixel_loss(p: &RealGrid, g: &BinaryGrid, mask: Option<&BinaryGrid>, cfg: &LossConfig) -> Result<LossValue> {
    let (pf, m) = prepare(p, g, mask)?;
    let (total, dice, ce) = pixel_raw(&pf, g.data(), m, cfg);
    Ok(LossValue {
        total,
        parts: LossParts {
            dice,
            ce,
            ..Default::default()
        },
        mask_pixels: None,
    })
}

/// `(1 - gamma) * pixel(p, g) + gamma * pixel(p, g | M)` with `M` the soft-mode
/// critical mask of `p` against `g`.
pub fn context_loss(p: &RealGrid, g: &BinaryGrid, cfg: &LossConfig) -> Result<LossValue> {
    let cm = critical_mask(p, g, cfg, SkeletonMode::Soft)?;
    context_loss_with_mask(p, g, &cm.m, cfg)
}

/// Context loss for a precomputed critical mask.
pub fn context_loss_with_mask(p: &RealGrid, g: &BinaryGrid, m: &BinaryGrid, cfg: &LossConfig) -> Result<LossValue> {
    cfg.validate()?;
    let (pf, m) = prepare(p, g, Some(m))?;
    Ok(context_raw(&pf, g.data(), m.expect("mask given"), cfg))
}

/// Central-difference gradient of the selected loss with respect to each
/// probability. `mask` restricts the Dice, CE and pixel losses; the context
/// loss uses its own critical mask computed once at `p`.
pub fn fd_gradient(
    kind: LossKind,
    p: &RealGrid,
    g: &BinaryGrid,
    mask: Option<&BinaryGrid>,
    cfg: &LossConfig,
    h: f64,
) -> Result<Grid<f64>> {
    if p.len() > FD_MAX_PIXELS {
        return Err(Error::GridTooLarge {
            max: FD_MAX_PIXELS,
            actual: p.len(),
        });
    }
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidConfig(format!("step {h} outside (0, 0.5)")));
    }
    if let Some(index) = p.data().iter().position(|&v| !(h..=1.0 - h).contains(&f64::from(v))) {
        return Err(Error::StepOutOfRange {
            h,
            index,
            value: p.data()[index],
        });
    }
    let (mut pf, m) = prepare(p, g, mask)?;
    let context_mask = match kind {
        LossKind::Context => Some(critical_mask(p, g, cfg, SkeletonMode::Soft)?.m),
        _ => None,
    };
    let eval = |q: &[f64]| match kind {
        LossKind::Dice => dice_raw(q, g.data(), m, cfg.smooth),
        LossKind::Ce => ce_raw(q, g.data(), m, cfg.clamp),
        LossKind::Pixel => pixel_raw(q, g.data(), m, cfg).0,
        LossKind::Context => {
            let cm = context_mask.as_ref().expect("computed above");
            context_raw(q, g.data(), cm.data(), cfg).total
        }
    };

    let mut grad = Vec::with_capacity(pf.len());
    for i in 0..pf.len() {
        let base = pf[i];
        pf[i] = base + h;
        let up = eval(&pf);
        pf[i] = base - h;
        let down = eval(&pf);
        pf[i] = base;
        grad.push((up - down) / (2.0 * h));
    }
    Grid::from_vec(p.shape(), grad)
}
