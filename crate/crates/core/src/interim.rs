//! Interim winning probabilities and expected utility against an opponent
//! bid distribution.
//!
//! `Q1`/`Q2` are the probabilities of winning object 1/2 (possibly together
//! with the other one), `Q3` of winning both; `P1`/`P2` are the exclusive
//! counterparts. Utility is available in the exclusive-outcome form and in
//! the `Q`/synergy form; the two agree algebraically.

use crate::distribution::{cumulative_masses, BidDistribution, Region};
use crate::error::InterimError;
use crate::model::{q_both, BidPair, TypePoint, UtilitySpec};
use crate::scalar::{self, Scalar};

/// Probability of winning object 1 with first bid `b1`: opponent mass
/// strictly below plus half the mass tied at `b1`.
pub fn q1<T: Scalar>(mu: &BidDistribution<T>, b1: u32) -> T {
    win_one(&mu.marginal1(), b1)
}

/// Mirror of [`q1`] on the second object.
pub fn q2<T: Scalar>(mu: &BidDistribution<T>, b2: u32) -> T {
    win_one(&mu.marginal2(), b2)
}

fn win_one<T: Scalar>(marginal: &[T], level: u32) -> T {
    let level = level as usize;
    let below = scalar::sum(marginal[..level].iter().cloned());
    below + T::half() * marginal[level].clone()
}

/// Probability of winning both objects, from the nine-cell split of the
/// opponent's bids: `(<,<) + (=,<)/2 + (<,=)/2 + (=,=)/4`.
pub fn q3<T: Scalar>(mu: &BidDistribution<T>, b: BidPair) -> T {
    let c = cumulative_masses(mu, b);
    use Region::*;
    c.get(Below, Below).clone()
        + T::half() * c.get(Equal, Below).clone()
        + T::half() * c.get(Below, Equal).clone()
        + T::quarter() * c.get(Equal, Equal).clone()
}

/// Probability of winning both objects as the expectation of the ex-post
/// both-win probability over the opponent's bids.
pub fn q3_pointwise<T: Scalar>(mu: &BidDistribution<T>, b: BidPair) -> T {
    scalar::sum(mu.support().map(|(opp, w)| w.clone() * q_both(b, opp).value::<T>()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WinProbs<T> {
    /// Object 1 only.
    pub p1: T,
    /// Object 2 only.
    pub p2: T,
    /// Both objects.
    pub p3: T,
    /// Object 1, with or without object 2.
    pub q1: T,
    /// Object 2, with or without object 1.
    pub q2: T,
}

impl<T: Scalar> WinProbs<T> {
    pub fn q3(&self) -> &T {
        &self.p3
    }
}

/// All five probabilities at bid `b`. `P1` and `P2` are computed from their
/// own regions and checked against `Q1 - Q3` and `Q2 - Q3`.
pub fn win_probs<T: Scalar>(mu: &BidDistribution<T>, b: BidPair) -> Result<WinProbs<T>, InterimError> {
    let c = cumulative_masses(mu, b);
    use Region::*;
    let half = T::half;
    let quarter = T::quarter;
    let cell = |r1, r2| c.get(r1, r2).clone();

    let p3 = cell(Below, Below) + half() * cell(Equal, Below) + half() * cell(Below, Equal) + quarter() * cell(Equal, Equal);
    let p1 = cell(Below, Above) + half() * cell(Below, Equal) + half() * cell(Equal, Above) + quarter() * cell(Equal, Equal);
    // upper end of the opponent range is closed: (b1, u_bar]
    let p2 = cell(Above, Below) + half() * cell(Equal, Below) + half() * cell(Above, Equal) + quarter() * cell(Equal, Equal);

    let q1 = scalar::sum([cell(Below, Below), cell(Below, Equal), cell(Below, Above)])
        + half() * scalar::sum([cell(Equal, Below), cell(Equal, Equal), cell(Equal, Above)]);
    let q2 = scalar::sum([cell(Below, Below), cell(Equal, Below), cell(Above, Below)])
        + half() * scalar::sum([cell(Below, Equal), cell(Equal, Equal), cell(Above, Equal)]);

    let tol = T::tolerance();
    for (which, direct, identity) in [
        ("P1", &p1, q1.clone() - p3.clone()),
        ("P2", &p2, q2.clone() - p3.clone()),
    ] {
        if direct.abs_diff(&identity) > tol {
            return Err(InterimError::Inconsistent {
                which,
                bid: b,
                direct: direct.to_real(),
                identity: identity.to_real(),
            });
        }
    }
    Ok(WinProbs { p1, p2, p3, q1, q2 })
}

/// Own-type quantities entering the interim utility.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeValues<T> {
    /// `u(x1, 0)`.
    pub alone1: T,
    /// `u(0, x2)`.
    pub alone2: T,
    /// `u(x1, x2)`.
    pub joint: T,
}

impl<T: Scalar> TypeValues<T> {
    pub fn new(spec: &UtilitySpec<T>, x: &TypePoint<T>) -> Self {
        Self {
            alone1: spec.standalone1(&x.x1),
            alone2: spec.standalone2(&x.x2),
            joint: spec.at(x),
        }
    }

    pub fn lambda(&self) -> T {
        self.joint.clone() - self.alone1.clone() - self.alone2.clone()
    }
}

/// `V = Q1 [u(x1,0) - b1] + Q2 [u(0,x2) - b2] + Q3 lambda(x)`.
pub fn interim_utility<T: Scalar>(b: BidPair, x: &TypePoint<T>, mu: &BidDistribution<T>, spec: &UtilitySpec<T>) -> T {
    let bids = mu.bids();
    let v = TypeValues::new(spec, x);
    let lambda = v.lambda();
    q1(mu, b.b1) * (v.alone1 - bids.value::<T>(b.b1))
        + q2(mu, b.b2) * (v.alone2 - bids.value::<T>(b.b2))
        + q3(mu, b) * lambda
}

/// `V = P3 [u(x1,x2) - b1 - b2] + P1 [u(x1,0) - b1] + P2 [u(0,x2) - b2]`.
pub fn interim_utility_by_outcome<T: Scalar>(
    b: BidPair,
    x: &TypePoint<T>,
    mu: &BidDistribution<T>,
    spec: &UtilitySpec<T>,
) -> Result<T, InterimError> {
    let bids = mu.bids();
    let w = win_probs(mu, b)?;
    let v = TypeValues::new(spec, x);
    let (pay1, pay2): (T, T) = (bids.value(b.b1), bids.value(b.b2));
    Ok(w.p3 * (v.joint - pay1.clone() - pay2.clone()) + w.p1 * (v.alone1 - pay1) + w.p2 * (v.alone2 - pay2))
}

/// `Q1`, `Q2` and `Q3` tabulated over the whole bid lattice for one
/// opponent distribution, so that `V(b, x)` costs a handful of operations.
#[derive(Clone, Debug)]
pub struct InterimTable<T> {
    bids: crate::model::BidGrid,
    q1: Vec<T>,
    q2: Vec<T>,
    q3: Vec<T>,
    prices: Vec<T>,
}

impl<T: Scalar> InterimTable<T> {
    pub fn new(mu: &BidDistribution<T>) -> Self {
        let bids = *mu.bids();
        let len = bids.len();
        let masses = mu.masses();
        let tabulate = |marginal: Vec<T>| -> Vec<T> {
            let mut below = T::zero();
            marginal
                .into_iter()
                .map(|m| {
                    let q = below.clone() + T::half() * m.clone();
                    below = below.clone() + m;
                    q
                })
                .collect()
        };
        let q1 = tabulate(mu.marginal1());
        let q2 = tabulate(mu.marginal2());

        // below[a][c] = mass of {< a} x {< c}
        let stride = len + 1;
        let mut below = vec![T::zero(); stride * stride];
        for a in 0..len {
            for c in 0..len {
                below[(a + 1) * stride + c + 1] = masses[a * len + c].clone() + below[a * stride + c + 1].clone()
                    + below[(a + 1) * stride + c].clone()
                    - below[a * stride + c].clone();
            }
        }
        let at = |a: usize, c: usize| below[a * stride + c].clone();
        let mut q3 = Vec::with_capacity(len * len);
        for a in 0..len {
            for c in 0..len {
                let strict = at(a, c);
                let tie1 = at(a + 1, c) - strict.clone();
                let tie2 = at(a, c + 1) - strict.clone();
                q3.push(strict + T::half() * tie1 + T::half() * tie2 + T::quarter() * masses[a * len + c].clone());
            }
        }
        let prices = bids.levels();
        Self { bids, q1, q2, q3, prices }
    }

    pub fn bids(&self) -> &crate::model::BidGrid {
        &self.bids
    }

    pub fn q1(&self, b1: u32) -> &T {
        &self.q1[b1 as usize]
    }

    pub fn q2(&self, b2: u32) -> &T {
        &self.q2[b2 as usize]
    }

    pub fn q3(&self, b: BidPair) -> &T {
        &self.q3[self.bids.pair_index(b)]
    }

    pub fn utility(&self, b: BidPair, v: &TypeValues<T>) -> T {
        self.utility_with_lambda(b, v, &v.lambda())
    }

    pub(crate) fn utility_with_lambda(&self, b: BidPair, v: &TypeValues<T>, lambda: &T) -> T {
        let (i1, i2) = (b.b1 as usize, b.b2 as usize);
        self.q1[i1].clone() * (v.alone1.clone() - self.prices[i1].clone())
            + self.q2[i2].clone() * (v.alone2.clone() - self.prices[i2].clone())
            + self.q3[self.bids.pair_index(b)].clone() * lambda.clone()
    }

    /// `V(b, x)` for every bid pair, in lexicographic pair order.
    pub fn utilities(&self, v: &TypeValues<T>) -> Vec<T> {
        let lambda = v.lambda();
        self.bids.pairs().map(|b| self.utility_with_lambda(b, v, &lambda)).collect()
    }
}
