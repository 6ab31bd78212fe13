//! Worldlines carrying finite-dimensional factors, and the region-to-subalgebra assignment.
//!
//! A region's algebra is `B(⊗_{i∈S} H_i) ⊗ 1_rest` where `S` lists the worldlines passing
//! through the region. Subalgebras are kept structural: a label set plus an optional frame unitary.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{causally_disjoint, domain_of_dependence, rat, sample, Diamond, Point, SpacelikeInterval, Worldline};
use crate::quantum::{embed, max_abs, partial_trace, random, CMatrix, QuantumError, TensorSpace, UnitaryOp};
use crate::Tally;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldlineSystem {
    pub label: String,
    pub worldline: Worldline,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HybridNet {
    systems: Vec<WorldlineSystem>,
    space: TensorSpace,
}

impl HybridNet {
    pub fn new(systems: Vec<WorldlineSystem>) -> Result<Self, QuantumError> {
        let space = TensorSpace::new(systems.iter().map(|s| (s.label.clone(), s.dim)))?;
        Ok(Self { systems, space })
    }

    pub fn systems(&self) -> &[WorldlineSystem] {
        &self.systems
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn system(&self, label: &str) -> Option<&WorldlineSystem> {
        self.systems.iter().find(|s| s.label == label)
    }

    pub fn labels(&self) -> Vec<String> {
        self.systems.iter().map(|s| s.label.clone()).collect()
    }

    fn labels_where(&self, f: impl Fn(&Worldline) -> bool) -> Vec<String> {
        self.systems.iter().filter(|s| f(&s.worldline)).map(|s| s.label.clone()).collect()
    }
}

/// `frame · (B(⊗_{i∈S} H_i) ⊗ 1_rest) · frame†`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubalgebraDescriptor {
    pub factor_labels: Vec<String>,
    pub frame: Option<UnitaryOp>,
}

impl SubalgebraDescriptor {
    pub fn plain(factor_labels: Vec<String>) -> Self {
        Self { factor_labels, frame: None }
    }

    fn labels(&self) -> Vec<&str> {
        self.factor_labels.iter().map(String::as_str).collect()
    }

    /// Orthogonal projection of `x` onto the subalgebra, in the Hilbert–Schmidt product.
    pub fn project(&self, x: &CMatrix, space: &TensorSpace) -> Result<CMatrix, QuantumError> {
        let y = match &self.frame {
            Some(f) => f.mat().adjoint() * x * f.mat(),
            None => x.clone(),
        };
        let labels = self.labels();
        let kept = space.restrict(&labels)?;
        let rest = (space.dim() / kept.dim()) as f64;
        let reduced = partial_trace(&y, space, &labels)?.unscale(rest);
        let p = embed(&reduced, &kept.labels(), space)?;
        Ok(match &self.frame {
            Some(f) => f.mat() * p * f.mat().adjoint(),
            None => p,
        })
    }

    /// Largest entry of `x − P(x)`.
    pub fn residual(&self, x: &CMatrix, space: &TensorSpace) -> Result<f64, QuantumError> {
        Ok(max_abs(&(x - self.project(x, space)?)))
    }

    /// A random element of the subalgebra.
    pub fn sample<R: Rng>(&self, rng: &mut R, space: &TensorSpace) -> Result<CMatrix, QuantumError> {
        let labels = self.labels();
        let kept = space.restrict(&labels)?;
        let local = random::ginibre(rng, kept.dim(), kept.dim());
        let x = embed(&local, &kept.labels(), space)?;
        Ok(match &self.frame {
            Some(f) => f.mat() * x * f.mat().adjoint(),
            None => x,
        })
    }
}

/// Assigns label sets to regions; swapped out in tests to check that the harness detects errors.
pub trait RegionLabeler {
    fn region(&self, net: &HybridNet, region: &Diamond) -> Vec<String>;
    fn interval(&self, net: &HybridNet, iv: &SpacelikeInterval) -> Vec<String>;
    fn complement(&self, net: &HybridNet, region: &Diamond) -> Vec<String>;
}

/// Exact rational intersection tests.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactLabeler;

impl RegionLabeler for ExactLabeler {
    fn region(&self, net: &HybridNet, region: &Diamond) -> Vec<String> {
        region_labels(net, region)
    }

    fn interval(&self, net: &HybridNet, iv: &SpacelikeInterval) -> Vec<String> {
        interval_labels(net, iv)
    }

    fn complement(&self, net: &HybridNet, region: &Diamond) -> Vec<String> {
        complement_labels(net, region)
    }
}

/// Labels of worldlines meeting the region (open or closed as declared).
pub fn region_labels(net: &HybridNet, region: &Diamond) -> Vec<String> {
    let cs = region.constraints();
    net.labels_where(|w| w.meets(&cs))
}

/// Labels of worldlines crossing the open interval.
pub fn interval_labels(net: &HybridNet, iv: &SpacelikeInterval) -> Vec<String> {
    net.labels_where(|w| iv.contains(&w.point_at(&iv.t)))
}

/// Labels of worldlines meeting the causal complement of the region.
pub fn complement_labels(net: &HybridNet, region: &Diamond) -> Vec<String> {
    let [left, right] = region.complement_wedges();
    net.labels_where(|w| w.meets(&left) || w.meets(&right))
}

pub fn local_algebra(net: &HybridNet, region: &Diamond) -> SubalgebraDescriptor {
    SubalgebraDescriptor::plain(region_labels(net, region))
}

/// `(B(H_S) ⊗ 1)' = 1 ⊗ B(H_rest)`, in the same frame.
pub fn commutant(net: &HybridNet, d: &SubalgebraDescriptor) -> SubalgebraDescriptor {
    let labels = net.labels().into_iter().filter(|l| !d.factor_labels.contains(l)).collect();
    SubalgebraDescriptor { factor_labels: labels, frame: d.frame.clone() }
}

/// Largest commutator norm between `samples` random elements of each descriptor.
pub fn sampled_commutators(
    net: &HybridNet,
    a: &SubalgebraDescriptor,
    b: &SubalgebraDescriptor,
    samples: usize,
    seed: u64,
) -> Result<f64, QuantumError> {
    let mut rng = random::rng(seed);
    let space = net.space();
    let xs = (0..samples).map(|_| a.sample(&mut rng, space)).collect::<Result<Vec<_>, _>>()?;
    let ys = (0..samples).map(|_| b.sample(&mut rng, space)).collect::<Result<Vec<_>, _>>()?;
    let mut worst: f64 = 0.0;
    for x in &xs {
        for y in &ys {
            worst = worst.max(max_abs(&(x * y - y * x)));
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub isotony: Tally,
    pub einstein_causality: Tally,
    pub diamond: Tally,
    pub haag_duality: Tally,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.isotony.passed() && self.einstein_causality.passed() && self.diamond.passed() && self.haag_duality.passed()
    }

    pub fn violations(&self) -> usize {
        self.isotony.violations + self.einstein_causality.violations + self.diamond.violations + self.haag_duality.violations
    }
}

pub fn net_axiom_check(net: &HybridNet, trials: usize, seed: u64) -> AxiomReport {
    net_axiom_check_with(net, trials, seed, &ExactLabeler)
}

fn subset(a: &[String], b: &[String]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// A diamond inside `outer`, with both tips drawn from its interior.
fn inner_diamond<R: Rng>(rng: &mut R, outer: &Diamond) -> Diamond {
    let bottom = sample::point_in(rng, &outer.interior());
    let u = sample::between(rng, &bottom.u(), &outer.top.u(), 32);
    let v = sample::between(rng, &bottom.v(), &outer.top.v(), 32);
    Diamond::open(bottom, Point::from_null(&u, &v)).expect("both null coordinates increase")
}

/// Isotony, Einstein causality, the diamond property and Haag duality on random regions.
///
/// Haag duality is checked as: the commutant's labels are the complement of the region's labels,
/// and every worldline meeting the causal complement lies among them. For small nets the Einstein
/// causality check also samples commutators.
pub fn net_axiom_check_with(net: &HybridNet, trials: usize, seed: u64, labeler: &dyn RegionLabeler) -> AxiomReport {
    let mut rng = random::rng(seed);
    let mut report = AxiomReport {
        isotony: Tally::new(trials),
        einstein_causality: Tally::new(trials),
        diamond: Tally::new(trials),
        haag_duality: Tally::new(trials),
    };
    let numeric = net.space().dim() <= 16;
    for trial in 0..trials {
        let closed = rng.gen_bool(0.5);
        let outer = sample::diamond(&mut rng, 4, closed);
        let inner = inner_diamond(&mut rng, &outer);
        report.isotony.check(subset(&labeler.region(net, &inner), &labeler.region(net, &outer)));

        let other = (0..64)
            .map(|_| {
                let closed = rng.gen_bool(0.5);
                sample::diamond(&mut rng, 4, closed)
            })
            .find(|d| causally_disjoint(&outer, d));
        if let Some(other) = other {
            let (la, lb) = (labeler.region(net, &outer), labeler.region(net, &other));
            let mut ok = la.iter().all(|l| !lb.contains(l));
            if ok && numeric && trial % 10 == 0 {
                let (da, db) = (SubalgebraDescriptor::plain(la), SubalgebraDescriptor::plain(lb));
                ok = sampled_commutators(net, &da, &db, 3, seed ^ trial as u64).is_ok_and(|n| n <= 1e-10);
            }
            report.einstein_causality.check(ok);
        }

        let t = sample::grid(&mut rng, -4, 4, 4);
        let lo = sample::grid(&mut rng, -4, 4, 4);
        let width = rat(rng.gen_range(1..=24), 4);
        let iv = SpacelikeInterval::new(t, lo.clone(), lo + width).expect("positive width");
        report.diamond.check(labeler.region(net, &domain_of_dependence(&iv)) == labeler.interval(net, &iv));

        let own = labeler.region(net, &outer);
        let comm = commutant(net, &SubalgebraDescriptor::plain(own.clone()));
        let disjoint = own.iter().all(|l| !comm.factor_labels.contains(l));
        let covering = own.len() + comm.factor_labels.len() == net.systems().len();
        let localisable = subset(&labeler.complement(net, &outer), &comm.factor_labels);
        report.haag_duality.check(disjoint && covering && localisable);
    }
    report
}
