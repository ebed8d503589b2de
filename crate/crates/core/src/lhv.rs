//! Raffle-ticket local hidden-variable models.
//!
//! A ticket fixes an outcome for every setting on both halves. In a
//! distinct-settings scenario Alice and Bob each hold their own list of
//! settings; in a shared-settings scenario both halves carry opposite
//! outcomes for the same settings and the halves are handed out at random.

use std::io;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{check_nonsignaling, Cell, ChiValue, CorrelationArray, Outcome, Side};
use crate::error::{Error, Result};
use crate::qstate::Setting;
use crate::simplex;

/// Name of the generator behind [`sample_raffle`], recorded in its output.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// Default threshold on the total slack of the feasibility LP.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const DRAWS_PER_CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub alice: Vec<String>,
    pub bob: Vec<String>,
    /// Both halves carry the same settings with opposite outcomes and are
    /// handed out at random.
    pub shared: bool,
}

impl Scenario {
    pub fn distinct(alice: &[&str], bob: &[&str]) -> Result<Self> {
        let s = Self {
            alice: alice.iter().map(|x| x.to_string()).collect(),
            bob: bob.iter().map(|x| x.to_string()).collect(),
            shared: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn shared(settings: &[&str]) -> Result<Self> {
        let labels: Vec<String> = settings.iter().map(|x| x.to_string()).collect();
        let s = Self {
            alice: labels.clone(),
            bob: labels,
            shared: true,
        };
        s.validate()?;
        Ok(s)
    }

    /// The distinct-settings scenario with the array's labels.
    pub fn of_array(array: &CorrelationArray) -> Self {
        let labels = |ss: &[Setting]| ss.iter().map(|s| s.label.clone()).collect();
        Self {
            alice: labels(array.settings_a()),
            bob: labels(array.settings_b()),
            shared: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alice.is_empty() || self.bob.is_empty() {
            return Err(Error::EmptyScenario);
        }
        if self.shared && self.alice != self.bob {
            return Err(Error::InvalidRaffle(
                "shared scenario needs the same settings on both sides".into(),
            ));
        }
        Ok(())
    }

    /// Number of raw outcome assignments: `2^(nA+nB)`, or `2^n` when shared.
    pub fn assignment_count(&self) -> usize {
        if self.shared {
            1 << self.alice.len()
        } else {
            1 << (self.alice.len() + self.bob.len())
        }
    }

    fn matches(&self, array: &CorrelationArray) -> bool {
        let same = |x: &[String], y: &[Setting]| {
            x.len() == y.len() && x.iter().zip(y).all(|(l, s)| *l == s.label)
        };
        same(&self.alice, array.settings_a()) && same(&self.bob, array.settings_b())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ticket {
    pub alice: Vec<Outcome>,
    pub bob: Vec<Outcome>,
}

impl Ticket {
    /// A shared-settings ticket: `assignment` on one half, its opposite on
    /// the other.
    pub fn anticorrelated(assignment: Vec<Outcome>) -> Self {
        let bob = assignment.iter().map(|o| o.flip()).collect();
        Self {
            alice: assignment,
            bob,
        }
    }

    pub fn outcome(&self, side: Side, index: usize) -> Outcome {
        match side {
            Side::Alice => self.alice[index],
            Side::Bob => self.bob[index],
        }
    }
}

/// Outcome patterns of length `n` in binary order, `+` before `-`.
fn patterns(n: usize) -> impl Iterator<Item = Vec<Outcome>> {
    (0..1usize << n).map(move |k| {
        (0..n)
            .map(|bit| {
                if k >> (n - 1 - bit) & 1 == 0 {
                    Outcome::Plus
                } else {
                    Outcome::Minus
                }
            })
            .collect()
    })
}

/// Every ticket for a distinct-settings scenario; for a shared-settings
/// scenario, one representative per global-flip class (first setting `+`),
/// since a flipped ticket with halves swapped is the same ticket.
pub fn enumerate_tickets(scenario: &Scenario) -> Result<Vec<Ticket>> {
    scenario.validate()?;
    let na = scenario.alice.len();
    if scenario.shared {
        Ok(patterns(na)
            .filter(|p| p[0] == Outcome::Plus)
            .map(Ticket::anticorrelated)
            .collect())
    } else {
        Ok(patterns(na + scenario.bob.len())
            .map(|mut p| {
                let bob = p.split_off(na);
                Ticket { alice: p, bob }
            })
            .collect())
    }
}

/// Every raw assignment, including both members of each flip class.
pub fn enumerate_assignments(scenario: &Scenario) -> Result<Vec<Ticket>> {
    scenario.validate()?;
    if scenario.shared {
        Ok(patterns(scenario.alice.len())
            .map(Ticket::anticorrelated)
            .collect())
    } else {
        enumerate_tickets(scenario)
    }
}

/// `χ = 4·x·y` for the outcomes `x` on Alice's and `y` on Bob's half, one per
/// (Alice setting index, Bob setting index) pair.
pub fn ticket_chis(ticket: &Ticket, pairs: &[(usize, usize)]) -> Result<Vec<ChiValue>> {
    pairs
        .iter()
        .map(|&(i, j)| {
            let (Some(x), Some(y)) = (ticket.alice.get(i), ticket.bob.get(j)) else {
                return Err(Error::InvalidRaffle(format!(
                    "ticket has no setting pair ({i}, {j})"
                )));
            };
            ChiValue::new(4.0 * x.value() * y.value())
        })
        .collect()
}

/// Writes one row per ticket, one column per (side, setting).
pub fn write_tickets_csv<W: io::Write>(
    scenario: &Scenario,
    tickets: &[Ticket],
    writer: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = scenario
        .alice
        .iter()
        .map(|l| format!("A_{l}"))
        .chain(scenario.bob.iter().map(|l| format!("B_{l}")))
        .collect();
    w.write_record(&header)?;
    for t in tickets {
        w.write_record(t.alice.iter().chain(&t.bob).map(|o| o.symbol().to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Raffle {
    scenario: Scenario,
    tickets: Vec<Ticket>,
    weights: Vec<f64>,
}

impl Raffle {
    /// Weights must be nonnegative and sum to 1 within 1e-12; they are
    /// rescaled to sum to 1 exactly.
    pub fn new(scenario: Scenario, tickets: Vec<Ticket>, weights: Vec<f64>) -> Result<Self> {
        scenario.validate()?;
        if tickets.is_empty() || tickets.len() != weights.len() {
            return Err(Error::InvalidRaffle(format!(
                "{} tickets with {} weights",
                tickets.len(),
                weights.len()
            )));
        }
        for t in &tickets {
            if t.alice.len() != scenario.alice.len() || t.bob.len() != scenario.bob.len() {
                return Err(Error::InvalidRaffle(
                    "ticket does not cover the scenario".into(),
                ));
            }
            if scenario.shared && t.alice.iter().zip(&t.bob).any(|(x, y)| x == y) {
                return Err(Error::InvalidRaffle(
                    "shared-settings halves must be opposite".into(),
                ));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidRaffle("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidRaffle(format!("weights sum to {total}")));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            scenario,
            tickets,
            weights,
        })
    }

    pub fn uniform(scenario: Scenario) -> Result<Self> {
        let tickets = enumerate_tickets(&scenario)?;
        let w = 1.0 / tickets.len() as f64;
        let weights = vec![w; tickets.len()];
        // Sum of equal weights may miss 1 by an ulp; skip the check.
        Ok(Self {
            scenario,
            tickets,
            weights,
        })
    }

    pub fn single(scenario: Scenario, ticket: Ticket) -> Result<Self> {
        Self::new(scenario, vec![ticket], vec![1.0])
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn tickets(&self) -> &[Ticket] {
        &self.tickets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Joint outcomes one ticket yields for settings `(i, j)`, with the
/// probability of each half-assignment.
fn ticket_outcomes(shared: bool, t: &Ticket, i: usize, j: usize) -> Vec<(f64, Outcome, Outcome)> {
    if shared {
        vec![(0.5, t.alice[i], t.bob[j]), (0.5, t.bob[i], t.alice[j])]
    } else {
        vec![(1.0, t.alice[i], t.bob[j])]
    }
}

/// Mixture of the tickets' deterministic arrays, averaging over which half
/// goes to whom when settings are shared.
pub fn raffle_array(raffle: &Raffle) -> CorrelationArray {
    let sc = &raffle.scenario;
    let (na, nb) = (sc.alice.len(), sc.bob.len());
    let mut probs = vec![[0.0; 4]; na * nb];
    for (t, &w) in raffle.tickets.iter().zip(&raffle.weights) {
        for i in 0..na {
            for j in 0..nb {
                for (p, x, y) in ticket_outcomes(sc.shared, t, i, j) {
                    probs[i * nb + j][2 * x.index() + y.index()] += w * p;
                }
            }
        }
    }
    let cells = probs
        .into_iter()
        .map(|p| Cell::new(p).expect("mixture of deterministic cells"))
        .collect();
    let labels = |ls: &[String]| ls.iter().map(|l| Setting::label_only(&**l)).collect();
    CorrelationArray::new(labels(&sc.alice), labels(&sc.bob), cells).expect("scenario shape")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub scenario: Scenario,
    pub tickets: Vec<Ticket>,
    /// Ticket weights reproducing the array; present when feasible.
    pub weights: Option<Vec<f64>>,
    /// Largest entry-wise gap between the array and the best mixture found.
    pub max_residual: f64,
    /// Total L1 mismatch minimized by the linear program.
    pub objective: f64,
}

/// Decides whether some raffle over the array's distinct settings
/// reproduces it.
pub fn lhv_feasibility(array: &CorrelationArray, tol: f64) -> Result<FeasibilityResult> {
    lhv_feasibility_in(array, &Scenario::of_array(array), tol)
}

/// As [`lhv_feasibility`], over the tickets of an explicit scenario.
///
/// Minimizes the total slack `Σ|mixture − p|` over nonnegative weights
/// summing to 1; the array is feasible iff the optimum is below `tol`.
pub fn lhv_feasibility_in(
    array: &CorrelationArray,
    scenario: &Scenario,
    tol: f64,
) -> Result<FeasibilityResult> {
    let report = check_nonsignaling(array, tol);
    if !report.passed {
        return Err(Error::Signaling(report.max_discrepancy));
    }
    if !scenario.matches(array) {
        return Err(Error::InvalidArray(
            "settings do not match the scenario".into(),
        ));
    }
    let tickets = enumerate_tickets(scenario)?;
    let columns: Vec<Vec<f64>> = tickets
        .iter()
        .map(|t| {
            let single = Raffle::single(scenario.clone(), t.clone()).expect("enumerated ticket");
            raffle_array(&single)
                .cells()
                .iter()
                .flat_map(|c| c.probs())
                .collect()
        })
        .collect();
    let target: Vec<f64> = array.cells().iter().flat_map(|c| c.probs()).collect();

    let k = tickets.len();
    let r = target.len();
    let n = k + 2 * r;
    let mut a = Vec::with_capacity(r + 1);
    for row in 0..r {
        let mut line = vec![0.0; n];
        for (col, v) in columns.iter().enumerate() {
            line[col] = v[row];
        }
        line[k + row] = 1.0;
        line[k + r + row] = -1.0;
        a.push(line);
    }
    let mut norm = vec![0.0; n];
    norm[..k].iter_mut().for_each(|v| *v = 1.0);
    a.push(norm);
    let mut b = target.clone();
    b.push(1.0);
    let mut c = vec![0.0; n];
    c[k..].iter_mut().for_each(|v| *v = 1.0);

    let sol = simplex::minimize(&c, &a, &b, 1e-9)?;
    let weights: Vec<f64> = sol.x[..k].to_vec();
    let max_residual = (0..r)
        .map(|row| {
            let mix: f64 = columns.iter().zip(&weights).map(|(v, w)| v[row] * w).sum();
            (mix - target[row]).abs()
        })
        .fold(0.0, f64::max);
    let feasible = sol.objective < tol;
    Ok(FeasibilityResult {
        feasible,
        scenario: scenario.clone(),
        tickets,
        weights: feasible.then_some(weights),
        max_residual,
        objective: sol.objective,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub draws: u64,
    pub seed: u64,
    pub rng: String,
    /// Draws landing on each setting pair, row-major.
    pub pair_counts: Vec<u64>,
    /// Outcome counts `(++, +−, −+, −−)` per setting pair, row-major.
    pub counts: Vec<[u64; 4]>,
    /// Relative frequencies; absent if some setting pair was never drawn.
    pub array: Option<CorrelationArray>,
}

/// Draws `n` tickets, a uniformly random setting pair for each, and (with
/// shared settings) a random half-assignment.
///
/// Draws are split into fixed chunks, each with its own stream of a
/// generator seeded from `seed`, so counts do not depend on thread count.
pub fn sample_raffle(raffle: &Raffle, n: u64, seed: u64) -> Result<SampleResult> {
    if n == 0 {
        return Err(Error::InvalidRaffle("draw count must be positive".into()));
    }
    let sc = &raffle.scenario;
    let (na, nb) = (sc.alice.len(), sc.bob.len());
    let pairs = na * nb;
    let picker =
        WeightedIndex::new(&raffle.weights).map_err(|e| Error::InvalidRaffle(e.to_string()))?;
    let chunks = n.div_ceil(DRAWS_PER_CHUNK);

    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let len = DRAWS_PER_CHUNK.min(n - chunk * DRAWS_PER_CHUNK);
            let mut counts = vec![[0u64; 4]; pairs];
            for _ in 0..len {
                let t = &raffle.tickets[picker.sample(&mut rng)];
                let pair = rng.random_range(0..pairs);
                let (i, j) = (pair / nb, pair % nb);
                let (x, y) = if sc.shared && rng.random::<bool>() {
                    (t.bob[i], t.alice[j])
                } else {
                    (t.alice[i], t.bob[j])
                };
                counts[pair][2 * x.index() + y.index()] += 1;
            }
            counts
        })
        .reduce(
            || vec![[0u64; 4]; pairs],
            |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(part) {
                    for (x, y) in a.iter_mut().zip(p) {
                        *x += y;
                    }
                }
                acc
            },
        );

    let pair_counts: Vec<u64> = counts.iter().map(|c| c.iter().sum()).collect();
    let array = if pair_counts.iter().all(|&m| m > 0) {
        let cells = counts
            .iter()
            .zip(&pair_counts)
            .map(|(c, &m)| {
                let p = c.map(|x| x as f64 / m as f64);
                // Renormalize away rounding in the division.
                let s: f64 = p.iter().sum();
                Cell::new(p.map(|x| x / s))
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = |ls: &[String]| ls.iter().map(|l| Setting::label_only(&**l)).collect();
        Some(CorrelationArray::new(
            labels(&sc.alice),
            labels(&sc.bob),
            cells,
        )?)
    } else {
        None
    };
    Ok(SampleResult {
        draws: n,
        seed,
        rng: RNG_NAME.to_string(),
        pair_counts,
        counts,
        array,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{born_array, cell_moments};
    use crate::qstate::{family_settings, hardy_state, hu_state};
    use std::f64::consts::FRAC_PI_2;
    use Outcome::{Minus, Plus};

    fn two_by_two() -> Scenario {
        Scenario::distinct(&["a", "b"], &["a", "b"]).unwrap()
    }

    #[test]
    fn ticket_counts() {
        assert_eq!(enumerate_tickets(&two_by_two()).unwrap().len(), 16);
        assert_eq!(
            enumerate_tickets(&Scenario::distinct(&["a"], &["a"]).unwrap())
                .unwrap()
                .len(),
            4
        );
        let mermin = Scenario::shared(&["a", "b", "c"]).unwrap();
        assert_eq!(mermin.assignment_count(), 8);
        assert_eq!(enumerate_assignments(&mermin).unwrap().len(), 8);
        let classes = enumerate_tickets(&mermin).unwrap();
        let shown: Vec<String> = classes
            .iter()
            .map(|t| t.alice.iter().map(|o| o.symbol()).collect())
            .collect();
        assert_eq!(shown, ["+++", "++-", "+-+", "+--"]);
        assert!(Scenario::distinct(&[], &["a"]).is_err());
    }

    #[test]
    fn mermin_ticket_chis() {
        let classes = enumerate_tickets(&Scenario::shared(&["a", "b", "c"]).unwrap()).unwrap();
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let chis = |t: &Ticket| -> Vec<f64> {
            ticket_chis(t, &pairs)
                .unwrap()
                .iter()
                .map(|c| c.value())
                .collect()
        };
        assert_eq!(chis(&classes[0]), [-1.0, -1.0, -1.0]);
        assert_eq!(chis(&classes[1]), [-1.0, 1.0, 1.0]);
        assert_eq!(chis(&classes[2]), [1.0, -1.0, 1.0]);
        assert_eq!(chis(&classes[3]), [1.0, 1.0, -1.0]);
        let all_plus = Ticket {
            alice: vec![Plus, Plus],
            bob: vec![Plus, Plus],
        };
        let v = ticket_chis(&all_plus, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!(v.iter().all(|c| c.value() == 1.0));
        assert!(ticket_chis(&all_plus, &[(2, 0)]).is_err());
    }

    #[test]
    fn single_type_one_ticket_anticorrelates() {
        let sc = Scenario::shared(&["a", "b", "c"]).unwrap();
        let t = Ticket::anticorrelated(vec![Plus, Plus, Plus]);
        let arr = raffle_array(&Raffle::single(sc, t).unwrap());
        let aa = arr.cell(0, 0);
        assert_eq!(aa.probs(), [0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn even_mix_gives_zero_correlation() {
        let sc = Scenario::shared(&["a", "b"]).unwrap();
        let tickets = enumerate_tickets(&sc).unwrap();
        let arr = raffle_array(&Raffle::new(sc, tickets, vec![0.5, 0.5]).unwrap());
        assert_eq!(cell_moments(arr.cell(0, 1)).cov, 0.0);
        for c in arr.cells() {
            assert_eq!(c.marginal(Side::Alice, Plus), 0.5);
        }
    }

    #[test]
    fn raffle_validation() {
        let sc = two_by_two();
        let t = enumerate_tickets(&sc).unwrap();
        assert!(Raffle::new(sc.clone(), t[..2].to_vec(), vec![0.5, 0.6]).is_err());
        assert!(Raffle::new(sc.clone(), t[..2].to_vec(), vec![1.5, -0.5]).is_err());
        assert!(Raffle::new(sc.clone(), t[..2].to_vec(), vec![1.0]).is_err());
        let shared = Scenario::shared(&["a", "b"]).unwrap();
        let bad = Ticket {
            alice: vec![Plus, Plus],
            bob: vec![Plus, Minus],
        };
        assert!(Raffle::single(shared, bad).is_err());
    }

    fn family_array(hu: bool, alpha: f64) -> CorrelationArray {
        let s = family_settings(alpha);
        let st = if hu {
            hu_state(alpha, (&s[0], &s[0]))
        } else {
            hardy_state(alpha, (&s[0], &s[0]))
        };
        born_array(&st.unwrap(), &s, &s).unwrap()
    }

    #[test]
    fn experimental_hardy_point_is_not_local() {
        let alpha = (0.4f64).sqrt().acos();
        let r = lhv_feasibility(&family_array(false, alpha), FEASIBILITY_TOL).unwrap();
        assert!(!r.feasible);
        assert!(r.weights.is_none());
        assert!(r.objective > 0.1);
    }

    #[test]
    fn product_limit_is_local() {
        let r = lhv_feasibility(&family_array(true, FRAC_PI_2), FEASIBILITY_TOL).unwrap();
        assert!(r.feasible);
        assert!(r.max_residual < 1e-12);
    }

    #[test]
    fn single_tickets_are_extreme() {
        let sc = two_by_two();
        for (k, t) in enumerate_tickets(&sc).unwrap().into_iter().enumerate() {
            let arr = raffle_array(&Raffle::single(sc.clone(), t).unwrap());
            let w = lhv_feasibility(&arr, FEASIBILITY_TOL)
                .unwrap()
                .weights
                .unwrap();
            for (i, x) in w.iter().enumerate() {
                assert!((x - if i == k { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let sc = Scenario::shared(&["a", "b", "c"]).unwrap();
        for (k, t) in enumerate_tickets(&sc).unwrap().into_iter().enumerate() {
            let arr = raffle_array(&Raffle::single(sc.clone(), t).unwrap());
            let w = lhv_feasibility_in(&arr, &sc, FEASIBILITY_TOL)
                .unwrap()
                .weights
                .unwrap();
            assert!((w[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn signaling_arrays_are_rejected() {
        let arr = CorrelationArray::new(
            vec![Setting::label_only("a"), Setting::label_only("b")],
            vec![Setting::label_only("a")],
            vec![
                Cell::deterministic(Plus, Plus),
                Cell::deterministic(Plus, Minus),
            ],
        )
        .unwrap();
        assert!(matches!(
            lhv_feasibility(&arr, 1e-9),
            Err(Error::Signaling(_))
        ));
    }

    #[test]
    fn sampling_is_seed_stable() {
        let sc = Scenario::shared(&["a", "b", "c"]).unwrap();
        let raffle = Raffle::single(sc, Ticket::anticorrelated(vec![Plus, Plus, Plus])).unwrap();
        let s1 = sample_raffle(&raffle, 10_000, 7).unwrap();
        let s2 = sample_raffle(&raffle, 10_000, 7).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.rng, RNG_NAME);
        assert_eq!(s1.pair_counts.iter().sum::<u64>(), 10_000);
        for (k, c) in s1.counts.iter().enumerate() {
            if k % 4 == 0 {
                assert_eq!(c[0] + c[3], 0, "same setting must anticorrelate");
            }
        }
        assert_ne!(sample_raffle(&raffle, 10_000, 8).unwrap().counts, s1.counts);
        assert!(sample_raffle(&raffle, 0, 7).is_err());
    }

    #[test]
    fn tickets_csv() {
        let sc = two_by_two();
        let mut buf = Vec::new();
        write_tickets_csv(&sc, &enumerate_tickets(&sc).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "A_a,A_b,B_a,B_b");
        assert_eq!(lines[1], "+,+,+,+");
        assert_eq!(lines[16], "-,-,-,-");
    }
}
