//! Conditional expectation, built two independent ways.
//!
//! [`CondexpInput::condexp`] is total: like the library definition it mirrors,
//! it returns a default value (the zero function) when the conditioning
//! σ-algebra is not contained in the ambient one, returns `f` untouched when
//! `f` is already measurable, and otherwise averages `f` over each block.
//!
//! [`CondexpInput::condexp_l2`] instead projects `f` orthogonally onto the
//! span of the block indicators by assembling and solving the normal
//! equations. The two routes share no code beyond the measure-space
//! primitives, so each is an oracle for the other.

use crate::error::{Error, Result};
use crate::measure::{AtomSet, FiniteMeasureSpace, Partition, RandomVariable};
use crate::scalar::Scalar;

/// Everything `μ[f | ℬ]` depends on.
#[derive(Debug, Clone, Copy)]
pub struct CondexpInput<'a, S> {
    pub space: &'a FiniteMeasureSpace<S>,
    /// The ambient σ-algebra 𝒜.
    pub ambient: &'a Partition,
    /// The conditioning σ-algebra ℬ.
    pub sub: &'a Partition,
    pub f: &'a RandomVariable<S>,
}

impl<'a, S: Scalar> CondexpInput<'a, S> {
    pub fn new(
        space: &'a FiniteMeasureSpace<S>,
        ambient: &'a Partition,
        sub: &'a Partition,
        f: &'a RandomVariable<S>,
    ) -> Result<Self> {
        space.check_len(ambient.atom_count())?;
        space.check_len(sub.atom_count())?;
        space.check_len(f.atom_count())?;
        Ok(CondexpInput {
            space,
            ambient,
            sub,
            f,
        })
    }

    fn is_sub_sigma_algebra(&self) -> bool {
        self.sub.le(self.ambient).unwrap_or(false)
    }

    /// `μ[f | ℬ]` with default values; never fails.
    pub fn condexp(&self) -> RandomVariable<S> {
        let n = self.space.atom_count();
        if !self.is_sub_sigma_algebra() {
            return RandomVariable::zeros(n);
        }
        if self.sub.is_measurable(self.f).unwrap_or(false) {
            return self.f.clone();
        }
        block_average(self.space, self.sub, self.f)
    }

    /// Orthogonal projection onto the ℬ-measurable functions under
    /// `⟨u, v⟩ = Σ u v μ`. Coefficients of zero-mass blocks are set to 0.
    pub fn condexp_l2(&self) -> Result<RandomVariable<S>> {
        if !self.is_sub_sigma_algebra() {
            return Err(Error::NotSubSigmaAlgebra);
        }
        let basis: Vec<RandomVariable<S>> = (0..self.sub.block_count())
            .map(|b| RandomVariable::indicator(&self.sub.block_set(b)))
            .collect();
        let inner = |u: &RandomVariable<S>, v: &RandomVariable<S>| {
            self.space.integral(&u.mul(v)).expect("dimensions checked")
        };
        let gram: Vec<Vec<S>> = basis
            .iter()
            .map(|u| basis.iter().map(|v| inner(u, v)).collect())
            .collect();
        let rhs: Vec<S> = basis.iter().map(|u| inner(u, self.f)).collect();
        let coeffs = solve_normal_equations(gram, rhs);
        let mut out = RandomVariable::zeros(self.space.atom_count());
        for (c, e) in coeffs.iter().zip(&basis) {
            out = out.add(&e.scale(c));
        }
        Ok(out)
    }

    /// Checks `∫_B μ[f|ℬ] = ∫_B f` on every block `B` of ℬ, which by
    /// additivity covers every ℬ-measurable set.
    pub fn check_set_integral_characterization(&self) -> Result<CharacterizationReport<S>> {
        if !self.is_sub_sigma_algebra() {
            return Err(Error::NotSubSigmaAlgebra);
        }
        let ce = self.condexp();
        let mut worst = S::zero();
        let mut worst_block = None;
        for b in 0..self.sub.block_count() {
            let s = self.sub.block_set(b);
            let lhs = self.space.set_integral(&ce, &s)?;
            let rhs = self.space.set_integral(self.f, &s)?;
            let gap = (lhs - rhs).abs();
            if gap > worst {
                worst = gap;
                worst_block = Some(b);
            }
        }
        Ok(CharacterizationReport {
            holds: worst.ae_eq(&S::zero()),
            worst_block_gap: worst,
            worst_block,
        })
    }
}

/// Blockwise weighted average; zero-mass blocks get 0.
pub(crate) fn block_average<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    sub: &Partition,
    f: &RandomVariable<S>,
) -> RandomVariable<S> {
    let k = sub.block_count();
    let mut mass = vec![S::zero(); k];
    let mut sum = vec![S::zero(); k];
    for atom in 0..space.atom_count() {
        let b = sub.block_of(atom);
        let w = space.weight(atom);
        if *w > S::zero() {
            mass[b] = mass[b].clone() + w.clone();
            sum[b] = sum[b].clone() + w.clone() * f.get(atom).clone();
        }
    }
    let avg: Vec<S> = mass
        .into_iter()
        .zip(sum)
        .map(|(m, s)| if m.is_zero() { S::zero() } else { s / m })
        .collect();
    RandomVariable::from_vec_unchecked(
        (0..space.atom_count())
            .map(|atom| avg[sub.block_of(atom)].clone())
            .collect(),
    )
}

/// Gauss-Jordan elimination; unknowns whose column has no usable pivot are
/// set to zero.
fn solve_normal_equations<S: Scalar>(mut a: Vec<Vec<S>>, mut rhs: Vec<S>) -> Vec<S> {
    let n = rhs.len();
    let mut pivot_row_of: Vec<Option<usize>> = vec![None; n];
    let mut row = 0;
    for col in 0..n {
        // Largest pivot in float mode, any nonzero pivot in exact mode.
        let candidate = (row..n)
            .filter(|&r| !a[r][col].ae_eq(&S::zero()))
            .max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(p) = candidate else { continue };
        a.swap(row, p);
        rhs.swap(row, p);
        let pivot = a[row][col].clone();
        for v in &mut a[row][col..] {
            *v = v.clone() / pivot.clone();
        }
        rhs[row] = rhs[row].clone() / pivot;
        let pivot_row = a[row].clone();
        for r in 0..n {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *v = v.clone() - factor.clone() * p.clone();
            }
            rhs[r] = rhs[r].clone() - factor * rhs[row].clone();
        }
        pivot_row_of[col] = Some(row);
        row += 1;
    }
    pivot_row_of
        .into_iter()
        .map(|r| r.map_or_else(S::zero, |r| rhs[r].clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport<S> {
    pub holds: bool,
    pub worst_block_gap: S,
    pub worst_block: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertiesReport {
    pub linearity: bool,
    pub tower: bool,
    /// `None` when `f ≤ g` fails a.e., so monotonicity says nothing.
    pub monotonicity: Option<bool>,
}

impl PropertiesReport {
    pub fn holds(&self) -> bool {
        self.linearity && self.tower && self.monotonicity.unwrap_or(true)
    }
}

/// Linearity, tower property and monotonicity of `μ[· | ·]` for
/// `coarse ≤ fine ≤ ambient`.
#[allow(clippy::too_many_arguments)]
pub fn condexp_properties<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    ambient: &Partition,
    f: &RandomVariable<S>,
    g: &RandomVariable<S>,
    alpha: &S,
    beta: &S,
    fine: &Partition,
    coarse: &Partition,
) -> Result<PropertiesReport> {
    if !coarse.le(fine)? || !fine.le(ambient)? {
        return Err(Error::NotSubSigmaAlgebra);
    }
    let ce = |h: &RandomVariable<S>, p: &Partition| {
        CondexpInput::new(space, ambient, p, h).map(|i| i.condexp())
    };

    let combo = f.scale(alpha).add(&g.scale(beta));
    let lhs = ce(&combo, fine)?;
    let rhs = ce(f, fine)?.scale(alpha).add(&ce(g, fine)?.scale(beta));
    let linearity = space.ae_eq(&lhs, &rhs)?;

    let tower = space.ae_eq(&ce(&ce(f, fine)?, coarse)?, &ce(f, coarse)?)?;

    let monotonicity = if space.ae_le(f, g)? {
        Some(space.ae_le(&ce(f, fine)?, &ce(g, fine)?)?)
    } else {
        None
    };

    Ok(PropertiesReport {
        linearity,
        tower,
        monotonicity,
    })
}

/// `μ[1_s | ℬ]`, the conditional probability of `s`.
pub fn conditional_measure<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    ambient: &Partition,
    sub: &Partition,
    s: &AtomSet,
) -> Result<RandomVariable<S>> {
    let ind = RandomVariable::indicator(s);
    Ok(CondexpInput::new(space, ambient, sub, &ind)?.condexp())
}
