//! Distance from a ball center to a face of the probability simplex.
//!
//! Moving the center onto a face `C` means removing the mass `c` that sits
//! outside `C` and spreading it over `C` without pushing any coordinate
//! above 1. For every `L_d` norm the cheapest spread is water-filling:
//! coordinates receive a common increment `λ`, clipped at their cap.

use num_traits::Zero;

use super::scalar::{Scalar, Tol};
use crate::model::{Norm, UncertaintyEntry};
use crate::rational::Rational;

/// Common increment that spreads `mass` over coordinates with the given
/// caps, or `None` if the caps cannot absorb it.
pub fn water_level<F: Scalar>(caps: &[F], mass: &F, tol: &Tol<F>) -> Option<F> {
    let mut sorted = caps.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut remaining = mass.clone();
    let mut open = sorted.len();
    for cap in &sorted {
        let share = remaining.clone() / F::from_usize(open);
        if *cap >= share {
            return Some(share);
        }
        remaining = remaining - cap.clone();
        open -= 1;
    }
    if tol.is_pos(&remaining) {
        None
    } else {
        Some(sorted.last().cloned().unwrap_or_else(F::zero))
    }
}

/// Combined cost of a displacement: the `d`-th power of its `L_d` norm, or
/// the largest component for `L∞`.
fn accumulate<F: Scalar>(norm: Norm, parts: impl Iterator<Item = F>) -> F {
    match norm {
        Norm::P(d) => parts.fold(F::zero(), |acc, x| acc + x.pow(d)),
        Norm::Inf => parts.fold(F::zero(), |acc, x| acc.max(x)),
    }
}

/// Threshold the cost of [`face_cost`] is compared against.
pub fn budget<F: Scalar>(norm: Norm, radius: &F) -> F {
    match norm {
        Norm::P(d) => radius.pow(d),
        Norm::Inf => radius.clone(),
    }
}

/// Minimal cost of moving `center` onto the face `inside` (mask over the
/// successor domain). `None` when the face is empty.
pub fn face_cost<F: Scalar>(center: &[F], inside: &[bool], norm: Norm, tol: &Tol<F>) -> Option<F> {
    if !inside.iter().any(|b| *b) {
        return None;
    }
    let removed: Vec<F> = center
        .iter()
        .zip(inside)
        .filter(|(_, k)| !**k)
        .map(|(c, _)| c.clone())
        .collect();
    let mass = removed.iter().fold(F::zero(), |a, b| a + b.clone());
    let caps: Vec<F> = center
        .iter()
        .zip(inside)
        .filter(|(_, k)| **k)
        .map(|(c, _)| F::one() - c.clone())
        .collect();
    let level = water_level(&caps, &mass, tol)?;
    let raised = caps.into_iter().map(|cap| if cap < level { cap } else { level.clone() });
    Some(accumulate(norm, removed.into_iter().chain(raised)))
}

/// Mask of the positions an entry may actually use on `face`.
pub fn effective_mask(entry: &UncertaintyEntry, face: &[u32]) -> Vec<bool> {
    let mut mask = vec![false; entry.template.len()];
    for &p in face {
        let p = p as usize;
        mask[p] = !entry.support_restricted || entry.template.in_support(p);
    }
    mask
}

/// Exact minimal distance (as cost) from an L-ball's center to `face`.
pub fn exact_face_cost(entry: &UncertaintyEntry, face: &[u32]) -> Option<Rational> {
    let norm = ball_norm(entry)?;
    face_cost(&entry.template.center, &effective_mask(entry, face), norm, &Tol::exact())
}

/// The closed-form estimate that spreads the removed mass uniformly over
/// the whole face regardless of caps or support restriction.
pub fn uniform_increment_cost(entry: &UncertaintyEntry, face: &[u32]) -> Option<Rational> {
    let norm = ball_norm(entry)?;
    if face.is_empty() {
        return None;
    }
    let mut inside = vec![false; entry.template.len()];
    for &p in face {
        inside[p as usize] = true;
    }
    let center = &entry.template.center;
    let removed = center.iter().zip(&inside).filter(|(_, k)| !**k).map(|(c, _)| c.clone());
    let mass: Rational = removed.clone().fold(<Rational as Zero>::zero(), |a, b| a + b);
    let share = mass / <Rational as Scalar>::from_usize(face.len());
    let k2 = accumulate(norm, removed);
    Some(match norm {
        Norm::P(d) => Scalar::pow(&share, d) * <Rational as Scalar>::from_usize(face.len()) + k2,
        Norm::Inf => Scalar::max(share, k2),
    })
}

/// Whether some coordinate's cap truncates the uniform increment on `face`.
pub fn caps_bind(entry: &UncertaintyEntry, face: &[u32]) -> bool {
    let Some(cost_exact) = exact_face_cost(entry, face) else { return false };
    let Some(cost_uniform) = uniform_increment_cost(entry, face) else { return false };
    cost_exact != cost_uniform
}

fn ball_norm(entry: &UncertaintyEntry) -> Option<Norm> {
    match &entry.family {
        crate::model::Family::Ball { norm, .. } => Some(*norm),
        _ => None,
    }
}

/// Face feasibility for a ball given converted data.
pub fn feasible<F: Scalar>(center: &[F], mask: &[bool], norm: Norm, radius: &F, tol: &Tol<F>) -> bool {
    match face_cost(center, mask, norm, tol) {
        Some(cost) => tol.le(&cost, &budget(norm, radius)),
        None => false,
    }
}

/// Whether some member on the face puts positive mass on a target position.
pub fn can_hit<F: Scalar>(
    center: &[F],
    mask: &[bool],
    targets: &[bool],
    norm: Norm,
    radius: &F,
    tol: &Tol<F>,
) -> bool {
    let hit: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] && targets[i]).collect();
    if hit.is_empty() || !feasible(center, mask, norm, radius, tol) {
        return false;
    }
    if hit.iter().any(|&i| tol.is_pos(&center[i])) {
        return true;
    }
    // Every target on the face has zero center mass. Spreading removed mass
    // reaches each of them (cap 1), and any slack in the radius lets a tiny
    // amount move onto one.
    let removed = (0..mask.len())
        .filter(|&i| !mask[i])
        .fold(F::zero(), |a, i| a + center[i].clone());
    tol.is_pos(&removed) || tol.is_pos(radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StateId, TransitionTemplate};
    use crate::rational::{from_ratio, parse};

    fn entry(center: &[&str], norm: Norm, radius: &str, restricted: bool) -> UncertaintyEntry {
        let t = TransitionTemplate::new(
            (0..center.len()).map(StateId).collect(),
            center.iter().map(|c| parse(c).unwrap()).collect(),
        );
        UncertaintyEntry::ball(t, norm, parse(radius).unwrap(), restricted)
    }

    #[test]
    fn l1_cost_is_twice_removed_mass() {
        let e = entry(&["2/5", "2/5", "1/5"], Norm::P(1), "3/10", false);
        assert_eq!(exact_face_cost(&e, &[0, 1]), Some(from_ratio(2, 5)));
    }

    #[test]
    fn l2_singleton_face_of_half_half() {
        let e = entry(&["1/2", "1/2"], Norm::P(2), "1/5", false);
        assert_eq!(exact_face_cost(&e, &[1]), Some(from_ratio(1, 2)));
        assert_eq!(uniform_increment_cost(&e, &[1]), Some(from_ratio(1, 2)));
        assert!(!caps_bind(&e, &[1]));
    }

    #[test]
    fn zero_cap_under_support_restriction() {
        let e = entry(&["1/2", "1/2", "0"], Norm::P(2), "1", true);
        assert_eq!(exact_face_cost(&e, &[0, 2]), Some(from_ratio(1, 2)));
        assert_eq!(uniform_increment_cost(&e, &[0, 2]), Some(from_ratio(3, 8)));
        assert!(caps_bind(&e, &[0, 2]));
    }

    #[test]
    fn water_level_clips_small_caps() {
        let caps = [from_ratio(1, 10), from_ratio(1, 1), from_ratio(1, 1)];
        let lvl = water_level(&caps, &from_ratio(1, 2), &Tol::exact()).unwrap();
        assert_eq!(lvl, from_ratio(1, 5));
        assert!(water_level(&caps, &from_ratio(3, 1), &Tol::exact()).is_none());
    }

    #[test]
    fn linf_cost() {
        let e = entry(&["3/5", "1/5", "1/5"], Norm::Inf, "1/2", false);
        // remove 3/5, spread 3/10 on each of the other two
        assert_eq!(exact_face_cost(&e, &[1, 2]), Some(from_ratio(3, 5)));
    }
}
